//! The inductive construction of a function with prescribed flat spots:
//! seed with the identity, then repeatedly flatten the partial sum, with
//! per-stage norm budgets drawn from the clamped rate function.

use serde::Serialize;

use crate::decay::DecayFn;
use crate::poly::Poly;
use crate::real::Real;

use super::flatten::{flatten_step, FlattenError};

#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    pub j: usize,
    pub n_j: usize,
    pub degree: usize,
    pub norm: String,
    pub norm_budget: Option<String>,
    pub flat_bound: Option<String>,
    pub flat_budget: Option<String>,
    pub flat_radius: Option<String>,
    pub precision: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionCheck {
    pub name: String,
    pub claimed: String,
    pub measured: String,
    pub pass: bool,
}

/// The construction ledger: stages, budgets, and verification records.
#[derive(Clone, Debug)]
pub struct ConstructionState {
    pub stages: Vec<StageRecord>,
    pub partial_sum: Poly,
    pub stage_norms: Vec<Real>,
    pub stage_degrees: Vec<usize>,
    pub psi_clamped: bool,
    pub c1: Real,
    pub phi_text: String,
    pub psi_text: String,
    pub checks: Vec<ConstructionCheck>,
    pub failure: Option<String>,
}

#[derive(Serialize)]
pub struct ConstructionJson {
    pub phi: String,
    pub psi: String,
    pub psi_clamped: bool,
    pub c1: String,
    pub stages: Vec<StageRecord>,
    pub checks: Vec<ConstructionCheck>,
    pub failure: Option<String>,
    pub partial_sum_degree: usize,
}

impl ConstructionState {
    pub fn to_json(&self) -> ConstructionJson {
        ConstructionJson {
            phi: self.phi_text.clone(),
            psi: self.psi_text.clone(),
            psi_clamped: self.psi_clamped,
            c1: self.c1.to_decimal(),
            stages: self.stages.clone(),
            checks: self.checks.clone(),
            failure: self.failure.clone(),
            partial_sum_degree: self.partial_sum.degree(),
        }
    }

    /// CSV rows (j, n_j, deg_P_j, norm_P_j, flatness_bound, pass).
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.stages
            .iter()
            .map(|s| {
                vec![
                    s.j.to_string(),
                    s.n_j.to_string(),
                    s.degree.to_string(),
                    s.norm.clone(),
                    s.flat_bound.clone().unwrap_or_else(|| "-".into()),
                    s.pass.to_string(),
                ]
            })
            .collect()
    }

    pub fn all_pass(&self) -> bool {
        self.failure.is_none()
            && self.stages.iter().all(|s| s.pass)
            && self.checks.iter().all(|c| c.pass)
    }
}

/// Runs the induction for the requested number of stages.
///
/// The rate function for norm budgets is clamped to min(e^(-2t), psi(t))
/// before stage 1, and the clamping is recorded. Failures terminate the
/// induction; the state up to the last good stage is returned with the
/// failure recorded.
pub fn build_theorem_b(
    phi: &DecayFn,
    psi_raw: &DecayFn,
    stages: usize,
    c1: &Real,
    degree_cap: usize,
    base_prec: usize,
) -> ConstructionState {
    let p = base_prec.max(256);
    let psi_clamped = psi_raw.clamp_would_bite(p);
    let psi = psi_raw.clone().clamped();

    let seed = Poly::identity(p);
    let mut state = ConstructionState {
        stages: vec![StageRecord {
            j: 1,
            n_j: 1,
            degree: 1,
            norm: Real::one().to_decimal(),
            norm_budget: None,
            flat_bound: None,
            flat_budget: None,
            flat_radius: None,
            precision: p,
            pass: true,
        }],
        partial_sum: seed,
        stage_norms: vec![Real::one()],
        stage_degrees: vec![1],
        psi_clamped,
        c1: c1.clone(),
        phi_text: format!("{phi}"),
        psi_text: format!("{psi_raw}"),
        checks: vec![],
        failure: None,
    };

    for stage in 1..stages {
        let n_m = *state.stage_degrees.last().unwrap();
        let n_m_real = Real::from_u64(n_m as u64, p);
        let eps = psi.eval(&n_m_real, p).div(&Real::from_u64(2, p), p);
        match flatten_step(
            &state.partial_sum,
            &eps,
            n_m,
            phi,
            c1,
            degree_cap,
            base_prec,
        ) {
            Ok(out) => {
                state.partial_sum = state
                    .partial_sum
                    .with_precision(out.precision)
                    .add(&out.poly);
                state.stages.push(StageRecord {
                    j: stage + 1,
                    n_j: out.m,
                    degree: out.poly.degree(),
                    norm: out.norm_measured.to_decimal(),
                    norm_budget: Some(out.norm_budget.to_decimal()),
                    flat_bound: Some(out.flat_measured.to_decimal()),
                    flat_budget: Some(out.flat_budget.to_decimal()),
                    flat_radius: Some(out.flat_radius.to_decimal()),
                    precision: out.precision,
                    pass: true,
                });
                state.stage_norms.push(out.norm_measured);
                state.stage_degrees.push(out.m);
            }
            Err(e) => {
                state.failure = Some(format!("stage {} failed: {e}", stage + 1));
                break;
            }
        }
    }

    // finite-stage budget checks over the completed stages
    let s = state.stage_degrees.len();
    for m_idx in 0..s.saturating_sub(1) {
        let n_m = state.stage_degrees[m_idx];
        let n_m_real = Real::from_u64(n_m as u64, p);
        let psi_m = psi.eval(&n_m_real, p);
        // tail budget: sum of later stage norms stays within psi(n_m)
        let mut tail = Real::zero();
        for nrm in &state.stage_norms[m_idx + 1..] {
            tail = tail.add_up(nrm, p);
        }
        state.checks.push(ConstructionCheck {
            name: format!("tail_norm_budget_after_stage_{}", m_idx + 1),
            claimed: psi_m.to_decimal(),
            measured: tail.to_decimal(),
            pass: tail.le(&psi_m),
        });
        // depth budget: e^(-2 n_m) + psi(n_m) <= e^(-n_m)
        let deep = Real::from_i64(-2 * n_m as i64, p).exp(p).add(&psi_m, p);
        let shallow = Real::from_i64(-(n_m as i64), p).exp(p);
        state.checks.push(ConstructionCheck {
            name: format!("flat_value_budget_at_stage_{}", m_idx + 1),
            claimed: shallow.to_decimal(),
            measured: deep.to_decimal(),
            pass: deep.le(&shallow),
        });
    }

    state
}
