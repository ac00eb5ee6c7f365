//! The single-step level-set comparison: for a unit-norm polynomial,
//! `|E_P(c delta)| >= |E_P(delta)|^(1/(2-c)+eps)`.
//!
//! When the smallness gate holds, the full machinery is exercised: the
//! maximal-cell cover is built with branching factor ceil(2/kappa), the
//! spreading certificate is checked on every member, the union is verified
//! to sit inside the larger sublevel set, and the superadditive chain is
//! audited. For larger sets the inequality is still measured directly and
//! the skipped machinery is recorded.

use serde::{Deserialize, Serialize};

use crate::cover::{audit_cover, nadic_maximal_cover};
use crate::interval::{ClosedInterval, IntervalSet};
use crate::poly::Poly;
use crate::real::Real;
use crate::sublevel::e_set;

use super::{kappa, spreading_check, Certificate, LemmaError, LemmaKind};

#[derive(Serialize, Deserialize)]
struct ClaimInputs {
    poly: crate::poly::PolyJson,
    delta: String,
    c: String,
    eps: String,
    delta0: String,
    c0: String,
    kappa: String,
    kappa_ok: bool,
    measure_delta: String,
    measure_cdelta: String,
    cover_members: Option<usize>,
    cover_min_member_slack: Option<String>,
    cover_residual: Option<String>,
}

/// Certifies `|E_P(c delta)| >= |E_P(delta)|^(1/(2-c)+eps)` on one instance.
///
/// `strict` makes the smallness precondition a hard gate.
pub fn claim_check(
    poly: &Poly,
    delta: &Real,
    c: &Real,
    eps: &Real,
    floors: Option<(Real, Real)>,
    strict: bool,
) -> Result<Certificate, LemmaError> {
    let p = poly.precision_bits();
    let one = Real::one();
    if !c.is_positive() || c.ge(&one) {
        return Err(LemmaError::BadParameter(format!("c must lie in (0,1), got {c}")));
    }
    let eps_cap = one.sub(c, p).div(&Real::from_u64(2, p).sub(c, p), p);
    if !eps.is_positive() || eps.ge(&eps_cap) {
        return Err(LemmaError::BadParameter(format!(
            "eps must lie in (0, (1-c)/(2-c)) = (0, {eps_cap})"
        )));
    }
    if poly.is_zero() {
        return Err(LemmaError::BadParameter("zero polynomial".into()));
    }

    // normalize to unit sup norm
    let quick = poly.cheb_abs_sum();
    let tol = quick.mul(&Real::pow2(-(p as i64) / 3, p), p);
    let sup = poly.sup_norm(&IntervalSet::full(p), &tol)?;
    let poly_n = poly.scale(&one.div(&sup.upper, p));

    let (delta0, c0) = floors.unwrap_or_else(|| (delta.min(&one), c.clone()));
    let kap = kappa(&delta0, eps, &c0, p)?;

    let big = e_set(&poly_n, delta)?;
    let measure_delta = big.measure(p);
    let kappa_ok = measure_delta.lt(&kap);
    if strict && !kappa_ok {
        return Err(LemmaError::KappaFail {
            measure: measure_delta.to_decimal(),
            kappa: kap.to_decimal(),
        });
    }

    let c_delta = c.mul(delta, p);
    let small = e_set(&poly_n, &c_delta)?;
    let measure_cdelta = small.measure(p);

    // the demanded lower bound |E_P(delta)|^(1/(2-c)+eps)
    let alpha = one.div(&Real::from_u64(2, p).sub(c, p), p).add(eps, p);
    let demanded = if measure_delta.is_positive() {
        alpha.mul(&measure_delta.ln(p), p).exp(p)
    } else {
        Real::zero()
    };

    // full machinery when the smallness gate holds
    let mut cover_members = None;
    let mut cover_min_member_slack: Option<String> = None;
    let mut cover_residual = None;
    let mut machinery_notes = String::new();
    if kappa_ok && measure_delta.is_positive() {
        let n_base = Real::from_u64(2, p).div(&kap, p).ceil();
        let cover = nadic_maximal_cover(&big.set, &n_base, &alpha, 40, p)?;
        audit_cover(&cover, &big.set, p).map_err(LemmaError::GeometryFail)?;
        let cd_threshold = small.threshold.clone();
        let mut min_slack: Option<Real> = None;
        for m in &cover.members {
            let e_cell = big.set.intersect_interval(&m.lo, &m.hi, p);
            let cert = spreading_check(
                &poly_n,
                &e_cell,
                &ClosedInterval::new(m.lo.clone(), m.hi.clone()),
                delta,
                c,
                eps,
                Some((delta0.clone(), c0.clone())),
            )?;
            if !cert.pass {
                return Err(LemmaError::GeometryFail(format!(
                    "spreading certificate fails on cover member [{}, {}]",
                    m.lo, m.hi
                )));
            }
            // membership of I in the larger sublevel set: measured sup vs threshold
            let mtol = cd_threshold.mul(&Real::pow2(-24, p), p);
            let sup_i = poly_n.sup_norm_interval(&m.lo, &m.hi, &mtol)?;
            if sup_i.upper.gt(&cd_threshold) {
                return Err(LemmaError::GeometryFail(format!(
                    "cover member [{}, {}] does not sit inside the c delta sublevel set",
                    m.lo, m.hi
                )));
            }
            let slack = cd_threshold.div(&sup_i.upper.max(&Real::pow2(-(p as i64), p)), p);
            min_slack = Some(match min_slack {
                Some(s) => s.min(&slack),
                None => slack,
            });
        }
        cover_members = Some(cover.members.len());
        cover_min_member_slack = min_slack.map(|s| s.to_decimal());
        cover_residual = Some(cover.residual_measure.to_decimal());
        machinery_notes = format!(
            "cover built with N = ceil(2/kappa), {} members, residual {}; every member passed spreading and sits inside the larger sublevel set",
            cover.members.len(),
            cover.residual_measure.to_decimal()
        );
    } else if !kappa_ok {
        machinery_notes = format!(
            "smallness gate not met (measure {} >= kappa {}); cover machinery skipped, inequality measured directly",
            measure_delta.to_decimal(),
            kap.to_decimal()
        );
    }

    let inputs = ClaimInputs {
        poly: poly_n.to_json(false),
        delta: delta.to_decimal(),
        c: c.to_decimal(),
        eps: eps.to_decimal(),
        delta0: delta0.to_decimal(),
        c0: c0.to_decimal(),
        kappa: kap.to_decimal(),
        kappa_ok,
        measure_delta: measure_delta.to_decimal(),
        measure_cdelta: measure_cdelta.to_decimal(),
        cover_members,
        cover_min_member_slack,
        cover_residual,
    };
    let notes = format!(
        "lower-bound orientation: measured_value is |E_P(delta)|^(1/(2-c)+eps), claimed_bound is |E_P(c delta)|; pass means the sublevel set at c delta dominates. {machinery_notes}"
    );
    Ok(Certificate::new(
        LemmaKind::Claim,
        serde_json::to_value(&inputs).expect("serializable"),
        &measure_cdelta,
        &demanded,
        &Real::one(),
        p,
        notes,
    ))
}

pub(super) fn reverify_claim(cert: &Certificate) -> Result<Certificate, LemmaError> {
    let inputs: ClaimInputs = serde_json::from_value(cert.inputs.clone())
        .map_err(|e| LemmaError::BadParameter(format!("bad inputs: {e}")))?;
    let poly = Poly::from_json(&inputs.poly)?;
    let p = poly.precision_bits();
    let delta = Real::parse(&inputs.delta, p)
        .ok_or_else(|| LemmaError::BadParameter("bad delta".into()))?;
    let c = Real::parse(&inputs.c, p).ok_or_else(|| LemmaError::BadParameter("bad c".into()))?;
    let eps =
        Real::parse(&inputs.eps, p).ok_or_else(|| LemmaError::BadParameter("bad eps".into()))?;
    let d0 = Real::parse(&inputs.delta0, p)
        .ok_or_else(|| LemmaError::BadParameter("bad delta0".into()))?;
    let c0 = Real::parse(&inputs.c0, p).ok_or_else(|| LemmaError::BadParameter("bad c0".into()))?;
    claim_check(&poly, &delta, &c, &eps, Some((d0, c0)), false)
}
