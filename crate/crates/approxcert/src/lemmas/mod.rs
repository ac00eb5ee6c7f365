//! Executable certificates: each check measures both sides of a displayed
//! inequality on a concrete instance and records inputs, derived parameters,
//! claimed bound, measured value, and the verdict.

mod claim;
mod comparison;
mod kappa;
mod scan;
mod spreading;

pub use claim::claim_check;
pub use comparison::{comparison_check, select_iteration_exponent};
pub use kappa::kappa;
pub use scan::{theorem_a_scan, ScanOptions, ScanRow, ScanTable};
pub use spreading::{spreading_check, SpreadingParams};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error)]
pub enum LemmaError {
    #[error("hypothesis fails: ||P||_E = {norm} exceeds e^(-delta n) = {bound}")]
    HypothesisFail { norm: String, bound: String },
    #[error("geometry precondition fails: {0}")]
    GeometryFail(String),
    #[error("smallness gate fails: measure {measure} is not below kappa {kappa}")]
    KappaFail { measure: String, kappa: String },
    #[error("no admissible measure found even at the search floor")]
    NoFeasible,
    #[error("no (M, eps) pair with M <= 64 satisfies the iteration exponent inequality")]
    NoMEps,
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Poly(#[from] crate::poly::PolyError),
    #[error(transparent)]
    Sublevel(#[from] crate::sublevel::SublevelError),
    #[error(transparent)]
    Cover(#[from] crate::cover::CoverError),
    #[error(transparent)]
    Measure(#[from] crate::measure::MeasureError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaKind {
    Spreading,
    Claim,
    Comparison,
    TheoremAStep,
}

/// A numeric witness for one instance of a displayed inequality.
///
/// `pass` always means `measured_value <= slack_factor * claimed_bound`.
/// For lower-bound statements the roles are: `measured_value` is the demanded
/// lower bound and `claimed_bound` is the quantity that must dominate it
/// (slack 1); the orientation is recorded in `notes`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub lemma: LemmaKind,
    pub inputs: serde_json::Value,
    pub claimed_bound: String,
    pub measured_value: String,
    pub slack_factor: String,
    pub pass: bool,
    pub notes: String,
}

impl Certificate {
    pub fn new(
        lemma: LemmaKind,
        inputs: serde_json::Value,
        claimed: &Real,
        measured: &Real,
        slack: &Real,
        p: usize,
        notes: String,
    ) -> Self {
        let pass = measured.le(&slack.mul(claimed, p));
        Certificate {
            schema_version: 1,
            lemma,
            inputs,
            claimed_bound: claimed.to_decimal(),
            measured_value: measured.to_decimal(),
            slack_factor: slack.to_decimal(),
            pass,
            notes,
        }
    }

    /// The invariant linking the stored fields.
    pub fn verdict_consistent(&self, p: usize) -> bool {
        let c = Real::parse(&self.claimed_bound, p);
        let m = Real::parse(&self.measured_value, p);
        let s = Real::parse(&self.slack_factor, p);
        match (c, m, s) {
            (Some(c), Some(m), Some(s)) => self.pass == m.le(&s.mul(&c, p)),
            _ => false,
        }
    }
}

/// Re-verifies a certificate from its serialized inputs alone.
///
/// Recomputes the measured value through the same public entry points and
/// compares within 1e-9 relative.
pub fn reverify(cert: &Certificate, p: usize) -> Result<bool, LemmaError> {
    let fresh = match cert.lemma {
        LemmaKind::Spreading => spreading::reverify_spreading(cert)?,
        LemmaKind::Claim => claim::reverify_claim(cert)?,
        LemmaKind::Comparison => comparison::reverify_comparison(cert)?,
        LemmaKind::TheoremAStep => return Ok(cert.verdict_consistent(p)),
    };
    let old = Real::parse(&cert.measured_value, p)
        .ok_or_else(|| LemmaError::BadParameter("bad measured_value".into()))?;
    let new = Real::parse(&fresh.measured_value, p)
        .ok_or_else(|| LemmaError::BadParameter("bad recomputed value".into()))?;
    if old.is_zero() && new.is_zero() {
        return Ok(true);
    }
    let denom = old.abs().max(&new.abs());
    let rel = old.sub(&new, p).abs().div(&denom, p);
    Ok(rel.le(&Real::parse("1e-9", p).unwrap()) && fresh.pass == cert.pass)
}
