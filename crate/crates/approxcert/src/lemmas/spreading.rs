//! The spreading certificate: a polynomial that is exponentially small on a
//! set E of tiny measure stays exponentially small on a not-much-longer
//! interval I around it.

use serde::{Deserialize, Serialize};

use crate::interval::{ClosedInterval, IntervalSet};
use crate::poly::Poly;
use crate::real::Real;

use super::{kappa, Certificate, LemmaError, LemmaKind};

/// Derived parameters of one spreading instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpreadingParams {
    pub delta0: String,
    pub c0: String,
    pub c: String,
    pub eps: String,
    pub delta: String,
    pub n: usize,
    pub len_e: String,
    pub len_i: String,
    pub a: String,
    pub b: String,
    pub lambda: String,
    pub k: usize,
    pub kappa: String,
}

#[derive(Serialize, Deserialize)]
struct SpreadingInputs {
    poly: crate::poly::PolyJson,
    e_set: crate::interval::IntervalSetJson,
    interval: [String; 2],
    delta: String,
    c: String,
    eps: String,
    delta0: String,
    c0: String,
    params: SpreadingParams,
    normalization: String,
    degree_rescale: Option<String>,
    budget_checks: Vec<(String, bool)>,
}

/// Certifies one spreading instance.
///
/// Preconditions are hard gates: the hypothesis `||P||_E <= e^(-delta n)`,
/// the containment E ⊆ I ⊆ [-1,1], the smallness `|E| < kappa`, and the
/// geometry `|I| <= |E|^(1/(2-c)+eps)`. A failed gate is a precondition
/// report, not a lemma failure. The conclusion `||P||_I <= e^(-c delta n)`
/// is tested with slack factor 2, the pre-limit constant of the derivation.
pub fn spreading_check(
    poly: &Poly,
    e: &IntervalSet,
    interval: &ClosedInterval,
    delta: &Real,
    c: &Real,
    eps: &Real,
    floors: Option<(Real, Real)>,
) -> Result<Certificate, LemmaError> {
    let p = poly.precision_bits();
    let one = Real::one();
    if !c.is_positive() || c.ge(&one) {
        return Err(LemmaError::BadParameter(format!("c must lie in (0,1), got {c}")));
    }
    if !delta.is_positive() {
        return Err(LemmaError::BadParameter("delta must be positive".into()));
    }
    let eps_cap = one.sub(c, p).div(&Real::from_u64(2, p).sub(c, p), p);
    if !eps.is_positive() || eps.ge(&eps_cap) {
        return Err(LemmaError::BadParameter(format!(
            "eps must lie in (0, (1-c)/(2-c)) = (0, {eps_cap})"
        )));
    }

    // normalize to ||P|| <= 1
    let quick = poly.cheb_abs_sum();
    let tol = quick.mul(&Real::pow2(-(p as i64) / 3, p), p);
    let sup = poly.sup_norm(&IntervalSet::full(p), &tol)?;
    let mut normalization = "none".to_string();
    let poly_n = if sup.upper.gt(&one) {
        normalization = format!("divided by certified sup upper bound {}", sup.upper.to_decimal());
        poly.scale(&one.div(&sup.upper, p))
    } else {
        poly.clone()
    };

    // delta <= 1 reduction: (delta, n) -> (1, ceil(delta n)) when delta > 1
    let n0 = poly_n.degree();
    let mut delta_eff = delta.clone();
    let mut n = n0;
    let mut degree_rescale = None;
    if delta.gt(&one) {
        let scaled = delta.mul(&Real::from_u64(n0 as u64, p), p).ceil();
        n = scaled.to_u64().unwrap_or(n0 as u64) as usize;
        delta_eff = one.clone();
        degree_rescale = Some(format!(
            "delta {} > 1: rescaled to delta' = 1, n' = {} (degree {})",
            delta.to_decimal(),
            n,
            n0
        ));
    }

    let (delta0, c0) = floors.unwrap_or((delta_eff.clone(), c.clone()));
    if delta_eff.lt(&delta0) || c.lt(&c0) {
        return Err(LemmaError::BadParameter(
            "instance parameters fall below their declared floors".into(),
        ));
    }

    // geometry gates
    let ilo = &interval.lo;
    let ihi = &interval.hi;
    if ilo.lt(&Real::from_i64(-1, p)) || ihi.gt(&Real::from_i64(1, p)) {
        return Err(LemmaError::GeometryFail("I is not inside [-1, 1]".into()));
    }
    let iset = IntervalSet::single(ilo.clone(), ihi.clone());
    if !e.subset_of(&iset) {
        return Err(LemmaError::GeometryFail("E is not contained in I".into()));
    }
    let len_e = e.total_length_up(p);
    if !len_e.is_positive() {
        return Err(LemmaError::GeometryFail("E has zero measure".into()));
    }
    let len_i = ihi.sub(ilo, p);
    let kap = kappa(&delta0, eps, &c0, p)?;
    if len_e.ge(&kap) {
        return Err(LemmaError::KappaFail {
            measure: len_e.to_decimal(),
            kappa: kap.to_decimal(),
        });
    }
    // |I| <= |E|^(1/(2-c)+eps), compared in log space
    let alpha = one.div(&Real::from_u64(2, p).sub(c, p), p).add(eps, p);
    if len_i.ln(p).gt(&alpha.mul(&len_e.ln(p), p)) {
        return Err(LemmaError::GeometryFail(format!(
            "|I| = {} exceeds |E|^(1/(2-c)+eps) = {}",
            len_i.to_decimal(),
            alpha.mul(&len_e.ln(p), p).exp(p).to_decimal()
        )));
    }

    // hypothesis: ||P||_E <= e^(-delta n)
    let n_real = Real::from_u64(n as u64, p);
    let hyp_bound = delta_eff.neg().mul(&n_real, p).exp(p);
    let hyp_tol = hyp_bound.mul(&Real::pow2(-24, p), p);
    let norm_e = poly_n.sup_norm(e, &hyp_tol)?;
    if norm_e.upper.gt(&hyp_bound) {
        return Err(LemmaError::HypothesisFail {
            norm: norm_e.upper.to_decimal(),
            bound: hyp_bound.to_decimal(),
        });
    }

    // derived parameters
    let e_const = one.exp(p);
    let eta = len_i.div(&len_e, p);
    let a = delta_eff
        .mul(&delta_eff, p)
        .div(&e_const.mul(&len_i, p), p);
    let ln_a = a.ln(p);
    let b = a.div(&ln_a.mul(&ln_a, p), p);
    let ln_b = b.ln(p);
    let lambda = delta_eff.div(&ln_b, p);
    let k_real = lambda.mul(&n_real, p).floor();
    let k = k_real.to_u64().unwrap_or(0) as usize;

    // step-choice budgets from the derivation
    let ln_4eta = Real::from_u64(4, p).mul(&eta, p).ln(p);
    let growth_ok = lambda.le(&delta_eff.mul(&one.sub(c, p), p).div(&ln_4eta, p));
    let remainder_ok = lambda
        .mul(&lambda.mul(&lambda, p).div(&e_const.mul(&len_i, p), p).ln(p), p)
        .ge(&delta_eff);
    let floor_ok = lambda.mul(&lambda, p).ge(&len_i.div(&e_const, p));
    // k-level versions, in log space
    let kr = Real::from_u64(k as u64, p);
    let growth_k_ok = kr
        .mul(&ln_4eta, p)
        .le(&delta_eff.mul(&one.sub(c, p), p).mul(&n_real, p));
    let k1 = Real::from_u64(k as u64 + 1, p);
    let base_ln = e_const
        .mul(&len_i, p)
        .mul(&n_real.mul(&n_real, p), p)
        .div(&k1.mul(&k1, p), p)
        .ln(p);
    let remainder_k_ok = k1
        .mul(&base_ln, p)
        .le(&delta_eff.neg().mul(&n_real, p));

    // conclusion, measured with certified sup norm on I
    let claimed = c.neg().mul(&delta_eff, p).mul(&n_real, p).exp(p);
    let meas_tol = claimed.mul(&Real::pow2(-24, p), p);
    let norm_i = poly_n.sup_norm_interval(ilo, ihi, &meas_tol)?;
    let slack = Real::from_u64(2, p);

    let params = SpreadingParams {
        delta0: delta0.to_decimal(),
        c0: c0.to_decimal(),
        c: c.to_decimal(),
        eps: eps.to_decimal(),
        delta: delta_eff.to_decimal(),
        n,
        len_e: len_e.to_decimal(),
        len_i: len_i.to_decimal(),
        a: a.to_decimal(),
        b: b.to_decimal(),
        lambda: lambda.to_decimal(),
        k,
        kappa: kap.to_decimal(),
    };
    let budget_checks = vec![
        ("lambda_growth_budget".to_string(), growth_ok),
        ("lambda_remainder_budget".to_string(), remainder_ok),
        ("lambda_floor".to_string(), floor_ok),
        ("step_growth_budget".to_string(), growth_k_ok),
        ("step_remainder_budget".to_string(), remainder_k_ok),
    ];
    let all_budgets = budget_checks.iter().all(|(_, ok)| *ok);
    let inputs = SpreadingInputs {
        poly: poly_n.to_json(false),
        e_set: e.to_json(p),
        interval: [ilo.to_decimal(), ihi.to_decimal()],
        delta: delta_eff.to_decimal(),
        c: c.to_decimal(),
        eps: eps.to_decimal(),
        delta0: delta0.to_decimal(),
        c0: c0.to_decimal(),
        params,
        normalization,
        degree_rescale,
        budget_checks,
    };
    let notes = format!(
        "||P||_I (measured upper) vs e^(-c delta n) at slack 2; hypothesis margin ||P||_E = {} <= {}; step budgets all hold: {}",
        norm_e.upper.to_decimal(),
        hyp_bound.to_decimal(),
        all_budgets
    );
    Ok(Certificate::new(
        LemmaKind::Spreading,
        serde_json::to_value(&inputs).expect("serializable"),
        &claimed,
        &norm_i.upper,
        &slack,
        p,
        notes,
    ))
}

/// Recomputes a spreading certificate from its serialized inputs.
pub(super) fn reverify_spreading(cert: &Certificate) -> Result<Certificate, LemmaError> {
    let inputs: SpreadingInputs = serde_json::from_value(cert.inputs.clone())
        .map_err(|e| LemmaError::BadParameter(format!("bad inputs: {e}")))?;
    let poly = Poly::from_json(&inputs.poly)?;
    let p = poly.precision_bits();
    let e = IntervalSet::from_json(&inputs.e_set, p)
        .ok_or_else(|| LemmaError::BadParameter("bad interval set".into()))?;
    let lo = Real::parse(&inputs.interval[0], p)
        .ok_or_else(|| LemmaError::BadParameter("bad interval".into()))?;
    let hi = Real::parse(&inputs.interval[1], p)
        .ok_or_else(|| LemmaError::BadParameter("bad interval".into()))?;
    let delta = Real::parse(&inputs.delta, p)
        .ok_or_else(|| LemmaError::BadParameter("bad delta".into()))?;
    let c = Real::parse(&inputs.c, p).ok_or_else(|| LemmaError::BadParameter("bad c".into()))?;
    let eps =
        Real::parse(&inputs.eps, p).ok_or_else(|| LemmaError::BadParameter("bad eps".into()))?;
    let d0 = Real::parse(&inputs.delta0, p)
        .ok_or_else(|| LemmaError::BadParameter("bad delta0".into()))?;
    let c0 = Real::parse(&inputs.c0, p).ok_or_else(|| LemmaError::BadParameter("bad c0".into()))?;
    spreading_check(
        &poly,
        &e,
        &ClosedInterval::new(lo, hi),
        &delta,
        &c,
        &eps,
        Some((d0, c0)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sublevel::e_set;

    const P: usize = 256;

    fn r(v: f64) -> Real {
        Real::from_f64(v, P)
    }

    /// E = I around a sublevel point: the conclusion holds with slack 1
    /// because c < 1 only weakens the exponent.
    #[test]
    fn e_equals_i_trivially_passes() {
        let t12 = Poly::chebyshev(12, P);
        // root of T_12 nearest 0.13
        let s = e_set(&t12, &r(1.0)).unwrap();
        let root_iv = &s.set.intervals()[6];
        let mid = root_iv.midpoint(P);
        let kap = kappa(&r(0.5), &r(0.05), &r(0.5), P).unwrap();
        let w = kap.div(&r(4.0), P);
        let lo = mid.sub(&w, P);
        let hi = mid.add(&w, P);
        let e = IntervalSet::single(lo.clone(), hi.clone());
        let cert = spreading_check(
            &t12,
            &e,
            &ClosedInterval::new(lo, hi),
            &r(0.75),
            &r(0.6),
            &r(0.05),
            Some((r(0.5), r(0.5))),
        )
        .unwrap();
        assert!(cert.pass, "{}", cert.notes);
        assert!(cert.verdict_consistent(P));
    }

    #[test]
    fn sublevel_instance_passes_and_reverifies() {
        let t20 = Poly::chebyshev(20, P);
        let s = e_set(&t20, &r(0.9)).unwrap();
        let root_iv = &s.set.intervals()[9];
        let mid = root_iv.midpoint(P);
        let kap = kappa(&r(0.5), &r(0.05), &r(0.5), P).unwrap();
        let we = kap.div(&r(8.0), P);
        let e = IntervalSet::single(mid.sub(&we, P), mid.add(&we, P));
        // |I| at 70% of the admissible cap
        let alpha = Real::one().div(&r(1.4), P).add(&r(0.05), P);
        let len_e = e.total_length(P);
        let len_i = alpha.mul(&len_e.ln(P), P).exp(P).mul(&r(0.7), P);
        let half_i = len_i.div(&r(2.0), P);
        let iv = ClosedInterval::new(mid.sub(&half_i, P), mid.add(&half_i, P));
        let cert = spreading_check(
            &t20,
            &e,
            &iv,
            &r(0.9),
            &r(0.6),
            &r(0.05),
            Some((r(0.5), r(0.5))),
        )
        .unwrap();
        assert!(cert.pass, "{}", cert.notes);
        // round-trip re-verification from serialized inputs alone
        assert!(super::super::reverify(&cert, P).unwrap());
    }

    #[test]
    fn oversized_interval_is_geometry_fail() {
        let t12 = Poly::chebyshev(12, P);
        let s = e_set(&t12, &r(1.0)).unwrap();
        let mid = s.set.intervals()[6].midpoint(P);
        let kap = kappa(&r(0.5), &r(0.05), &r(0.5), P).unwrap();
        let we = kap.div(&r(4.0), P);
        let e = IntervalSet::single(mid.sub(&we, P), mid.add(&we, P));
        // |I| slightly above the |E|^(1/(2-c)+eps) cap
        let alpha = Real::one().div(&r(1.4), P).add(&r(0.05), P);
        let len_e = e.total_length(P);
        let len_i = alpha.mul(&len_e.ln(P), P).exp(P).mul(&r(1.05), P);
        let half_i = len_i.div(&r(2.0), P);
        let iv = ClosedInterval::new(mid.sub(&half_i, P), mid.add(&half_i, P));
        let out = spreading_check(
            &t12,
            &e,
            &iv,
            &r(0.75),
            &r(0.6),
            &r(0.05),
            Some((r(0.5), r(0.5))),
        );
        assert!(matches!(out, Err(LemmaError::GeometryFail(_))), "{out:?}");
    }

    #[test]
    fn failed_hypothesis_is_reported() {
        // E far from any root: ||P||_E is order 1
        let t8 = Poly::chebyshev(8, P);
        let kap = kappa(&r(0.5), &r(0.05), &r(0.5), P).unwrap();
        let we = kap.div(&r(4.0), P);
        let e = IntervalSet::single(Real::one().sub(&we, P), Real::one());
        let iv = ClosedInterval::new(r(0.999999), Real::one());
        let out = spreading_check(
            &t8,
            &e,
            &iv,
            &r(0.75),
            &r(0.6),
            &r(0.05),
            Some((r(0.5), r(0.5))),
        );
        assert!(
            matches!(
                out,
                Err(LemmaError::HypothesisFail { .. }) | Err(LemmaError::GeometryFail(_))
            ),
            "{out:?}"
        );
    }
}
