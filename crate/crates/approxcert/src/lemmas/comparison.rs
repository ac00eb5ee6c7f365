//! The iterated level-set comparison: `|E_P(t delta)| >= |E_P(delta)|^(t+gamma)`,
//! obtained by applying the single-step claim M times with c = t^(1/M) and an
//! exponent budget `(1/(2-t^(1/M)) + eps)^M <= t + gamma`.

use serde::{Deserialize, Serialize};

use crate::interval::IntervalSet;
use crate::poly::Poly;
use crate::real::Real;
use crate::sublevel::e_set;

use super::{kappa, Certificate, LemmaError, LemmaKind};

/// Smallest iteration count M (and an admissible eps) such that
/// `(1/(2 - t^(1/M)) + eps)^M <= t + gamma`, with eps inside the per-step
/// domain (0, (1-c)/(2-c)).
///
/// Deterministic choice: eps is half the chain headroom, capped at 90% of
/// the domain limit.
pub fn select_iteration_exponent(
    t: &Real,
    gamma: &Real,
    p: usize,
) -> Result<(u32, Real), LemmaError> {
    let one = Real::one();
    let target = t.add(gamma, p);
    for m in 1..=64u32 {
        let c = t.pow(&one.div(&Real::from_u64(m as u64, p), p), p);
        let base = one.div(&Real::from_u64(2, p).sub(&c, p), p);
        // need base + eps <= target^(1/M)
        let cap_chain = target
            .pow(&one.div(&Real::from_u64(m as u64, p), p), p)
            .sub(&base, p);
        if !cap_chain.is_positive() {
            continue;
        }
        let cap_domain = one.sub(&c, p).div(&Real::from_u64(2, p).sub(&c, p), p);
        let eps = cap_chain
            .div(&Real::from_u64(2, p), p)
            .min(&cap_domain.mul(&Real::from_f64(0.9, p), p));
        if eps.is_positive() {
            return Ok((m, eps));
        }
    }
    Err(LemmaError::NoMEps)
}

#[derive(Serialize, Deserialize)]
struct ComparisonInputs {
    poly: crate::poly::PolyJson,
    delta: String,
    t: String,
    gamma: String,
    delta0: String,
    t0: String,
    m_stages: u32,
    eps: String,
    chain_exponent: String,
    kappa_effective: String,
    kappa_ok: bool,
    measure_delta: String,
    measure_tdelta: String,
}

/// Certifies `|E_P(t delta)| >= |E_P(delta)|^(t+gamma)` on one instance.
pub fn comparison_check(
    poly: &Poly,
    delta: &Real,
    t: &Real,
    gamma: &Real,
    floors: Option<(Real, Real)>,
    strict: bool,
) -> Result<Certificate, LemmaError> {
    let p = poly.precision_bits();
    let one = Real::one();
    let (delta0, t0) = floors.unwrap_or_else(|| (delta.min(&one), t.clone()));
    if !t0.is_positive() || t.lt(&t0) || t.ge(&one) {
        return Err(LemmaError::BadParameter(format!(
            "t must lie in [t0, 1), got t = {t}, t0 = {t0}"
        )));
    }
    if !gamma.is_positive() || gamma.ge(&one.sub(t, p)) {
        return Err(LemmaError::BadParameter(format!(
            "gamma must lie in (0, 1 - t), got {gamma}"
        )));
    }
    if poly.is_zero() {
        return Err(LemmaError::BadParameter("zero polynomial".into()));
    }

    let (m_stages, eps) = select_iteration_exponent(t, gamma, p)?;
    let c = t.pow(&one.div(&Real::from_u64(m_stages as u64, p), p), p);
    let chain = one
        .div(&Real::from_u64(2, p).sub(&c, p), p)
        .add(&eps, p)
        .powi(m_stages as usize, p);

    // The per-stage smallness threshold is inherited through the iteration;
    // the most restrictive stage has delta floor t * delta0.
    let stage_floor = t.mul(&delta0, p).min(&one);
    let kap = kappa(&stage_floor, &eps, &t0, p)?;

    let quick = poly.cheb_abs_sum();
    let tol = quick.mul(&Real::pow2(-(p as i64) / 3, p), p);
    let sup = poly.sup_norm(&IntervalSet::full(p), &tol)?;
    let poly_n = poly.scale(&one.div(&sup.upper, p));

    let big = e_set(&poly_n, delta)?;
    let measure_delta = big.measure(p);
    let kappa_ok = measure_delta.lt(&kap);
    if strict && !kappa_ok {
        return Err(LemmaError::KappaFail {
            measure: measure_delta.to_decimal(),
            kappa: kap.to_decimal(),
        });
    }

    let t_delta = t.mul(delta, p);
    let small = e_set(&poly_n, &t_delta)?;
    let measure_tdelta = small.measure(p);

    let exponent = t.add(gamma, p);
    let demanded = if measure_delta.is_positive() {
        exponent.mul(&measure_delta.ln(p), p).exp(p)
    } else {
        Real::zero()
    };

    let inputs = ComparisonInputs {
        poly: poly_n.to_json(false),
        delta: delta.to_decimal(),
        t: t.to_decimal(),
        gamma: gamma.to_decimal(),
        delta0: delta0.to_decimal(),
        t0: t0.to_decimal(),
        m_stages,
        eps: eps.to_decimal(),
        chain_exponent: chain.to_decimal(),
        kappa_effective: kap.to_decimal(),
        kappa_ok,
        measure_delta: measure_delta.to_decimal(),
        measure_tdelta: measure_tdelta.to_decimal(),
    };
    let notes = format!(
        "lower-bound orientation: measured_value is |E_P(delta)|^(t+gamma), claimed_bound is |E_P(t delta)|. \
         iteration: M = {m_stages}, eps = {}, chain exponent {} <= t+gamma = {}; smallness gate {}",
        eps.to_decimal(),
        chain.to_decimal(),
        exponent.to_decimal(),
        if kappa_ok { "holds" } else { "not met (recorded)" }
    );
    Ok(Certificate::new(
        LemmaKind::Comparison,
        serde_json::to_value(&inputs).expect("serializable"),
        &measure_tdelta,
        &demanded,
        &Real::one(),
        p,
        notes,
    ))
}

pub(super) fn reverify_comparison(cert: &Certificate) -> Result<Certificate, LemmaError> {
    let inputs: ComparisonInputs = serde_json::from_value(cert.inputs.clone())
        .map_err(|e| LemmaError::BadParameter(format!("bad inputs: {e}")))?;
    let poly = Poly::from_json(&inputs.poly)?;
    let p = poly.precision_bits();
    let delta = Real::parse(&inputs.delta, p)
        .ok_or_else(|| LemmaError::BadParameter("bad delta".into()))?;
    let t = Real::parse(&inputs.t, p).ok_or_else(|| LemmaError::BadParameter("bad t".into()))?;
    let gamma = Real::parse(&inputs.gamma, p)
        .ok_or_else(|| LemmaError::BadParameter("bad gamma".into()))?;
    let d0 = Real::parse(&inputs.delta0, p)
        .ok_or_else(|| LemmaError::BadParameter("bad delta0".into()))?;
    let t0 = Real::parse(&inputs.t0, p).ok_or_else(|| LemmaError::BadParameter("bad t0".into()))?;
    comparison_check(&poly, &delta, &t, &gamma, Some((d0, t0)), false)
}
