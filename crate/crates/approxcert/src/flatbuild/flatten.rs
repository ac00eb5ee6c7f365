//! One correction step: given Q with Q(0) = 0 and a norm budget, produce a
//! polynomial P of controlled norm such that Q + P is certifiably flat on a
//! prescribed neighbourhood of the origin.

use thiserror::Error;

use crate::decay::DecayFn;
use crate::interval::IntervalSet;
use crate::poly::Poly;
use crate::real::Real;

use super::rpoly::r_poly_from_series;
use super::series::{phi_series, SeriesError};

#[derive(Debug, Error)]
pub enum FlattenError {
    #[error("Q(0) must vanish, found {0}")]
    NonzeroAtOrigin(String),
    #[error(
        "degree cap {cap} exhausted at n = {n}: {unmet} (smallest admissible order exceeds the cap)"
    )]
    BudgetExceeded { cap: usize, n: usize, unmet: String },
    #[error("constant too small: {check} measured {measured} exceeds budget {budget} (raise the configuration constant)")]
    ConstantMismatch {
        check: String,
        measured: String,
        budget: String,
    },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Poly(#[from] crate::poly::PolyError),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

/// Outcome of one flattening step, with both certified conclusion bounds.
#[derive(Clone, Debug)]
pub struct FlattenOutcome {
    /// Achieved flatness order (the new stage degree).
    pub m: usize,
    pub poly: Poly,
    pub n: usize,
    pub l: usize,
    pub norm_measured: Real,
    pub norm_budget: Real,
    pub flat_measured: Real,
    pub flat_budget: Real,
    pub flat_radius: Real,
    pub precision: usize,
}

/// Chebyshev-basis polynomial composition outer(inner) by the Clenshaw
/// recurrence with polynomial arithmetic.
fn compose_cheb(outer: &[Real], inner: &Poly, p: usize) -> Poly {
    let m = outer.len();
    if m == 0 {
        return Poly::zero(p);
    }
    if m == 1 {
        return Poly::constant(outer[0].clone(), p);
    }
    let two = Real::from_u64(2, p);
    let inner2 = inner.scale(&two);
    let mut b1 = Poly::zero(p);
    let mut b2 = Poly::zero(p);
    for k in (1..m).rev() {
        let b = inner2
            .mul(&b1)
            .sub(&b2)
            .add(&Poly::constant(outer[k].clone(), p));
        b2 = b1;
        b1 = b;
    }
    inner.mul(&b1).sub(&b2).add(&Poly::constant(outer[0].clone(), p))
}

/// Selects the smallest odd n >= c1 ||Q||_* / eps and the smallest order l
/// meeting all three step constraints, then builds and verifies P.
pub fn flatten_step(
    q: &Poly,
    eps: &Real,
    n_floor: usize,
    phi: &DecayFn,
    c1: &Real,
    degree_cap: usize,
    base_prec: usize,
) -> Result<FlattenOutcome, FlattenError> {
    let p0 = q.precision_bits().max(base_prec).max(256);
    if !eps.is_positive() {
        return Err(FlattenError::BadParameter("eps must be positive".into()));
    }
    let at_zero = q.evaluate(&Real::zero());
    let scale = q.cheb_abs_sum().max(&Real::one());
    if at_zero
        .abs()
        .gt(&scale.mul(&Real::pow2(-(p0 as i64) / 2, p0), p0))
    {
        return Err(FlattenError::NonzeroAtOrigin(at_zero.to_decimal()));
    }
    let deg_q = q.degree().max(1);
    let qstar = q.coeff_norm();

    // smallest odd n >= c1 qstar / eps
    let n_real = c1.mul(&qstar, p0).div(eps, p0);
    let n_ceil = n_real.ceil().to_u64().unwrap_or(u64::MAX);
    let mut n = n_ceil.max(1) as usize;
    if n % 2 == 0 {
        n += 1;
    }

    // order search: M = l n deg(Q) > n_floor, phi(M) <= 1/(2n),
    // (l+1)! >= c1 e^{2M} qstar  (factorial compared in log space)
    let two_n_inv = Real::one().div(&Real::from_u64(2 * n as u64, p0), p0);
    let ln_target_base = c1.ln(p0).add(&qstar.ln(p0).max(&Real::from_i64(-(1 << 20), p0)), p0);
    let mut ln_factorial = Real::zero(); // ln(l+1)! accumulated
    let mut chosen: Option<usize> = None;
    let mut unmet = String::new();
    let l_cap = degree_cap / (n * deg_q);
    for l in 1..=l_cap.max(0) {
        ln_factorial = ln_factorial.add(&Real::from_u64(l as u64 + 1, p0).ln(p0), p0);
        let m = l * n * deg_q;
        if m <= n_floor {
            unmet = format!("flatness order must exceed {n_floor}");
            continue;
        }
        let phi_m = phi.eval(&Real::from_u64(m as u64, p0), p0);
        if phi_m.gt(&two_n_inv) {
            unmet = format!(
                "rate function at order {m} is {} but must not exceed 1/(2n) = {}",
                phi_m.to_decimal(),
                two_n_inv.to_decimal()
            );
            continue;
        }
        let ln_needed = ln_target_base.add(&Real::from_u64(2 * m as u64, p0), p0);
        if ln_factorial.lt(&ln_needed) {
            unmet = format!(
                "factorial condition: ln (l+1)! = {} below required {} at l = {l}",
                ln_factorial.to_decimal(),
                ln_needed.to_decimal()
            );
            continue;
        }
        chosen = Some(l);
        break;
    }
    let l = chosen.ok_or(FlattenError::BudgetExceeded {
        cap: degree_cap,
        n,
        unmet: if unmet.is_empty() {
            "no admissible order at all".into()
        } else {
            unmet
        },
    })?;
    let m = l * n * deg_q;

    // working precision: the flatness budget e^(-2M) needs ~2.9 M bits of
    // headroom; 4 M bits keeps evaluation noise far below it
    let p = base_prec.max(256).max(4 * m);
    let q_hi = q.with_precision(p);
    let phi_m = phi.eval(&Real::from_u64(m as u64, p), p);
    let flat_budget = Real::from_i64(-2 * m as i64, p).exp(p);

    let (poly, norm_measured, flat_measured) = if n == 1 {
        // exact cancellation branch
        let poly = q_hi.scale(&Real::from_i64(-1, p));
        let quick = poly.cheb_abs_sum();
        let tol = quick
            .mul(&Real::pow2(-64, p), p)
            .max(&Real::pow2(-(p as i64) / 2, p));
        let norm = poly.sup_norm(&IntervalSet::full(p), &tol)?.upper;
        let residual = q_hi.add(&poly);
        (poly, norm, residual.cheb_abs_sum())
    } else {
        let series = phi_series(n, l, p)?;
        let r = r_poly_from_series(&series, p)?;
        let mono = q_hi.mono_coeffs();
        // sup |R| = Phi_{n,l}(1)/n exactly (nonnegative coefficients)
        let sup_r = series
            .sup_norm_exact(p)
            .div(&Real::from_u64(n as u64, p), p);
        let mut poly = Poly::zero(p);
        let mut norm_upper = Real::zero();
        for (j, cj) in mono.iter().enumerate() {
            if j == 0 || cj.is_zero() {
                continue;
            }
            let term = if j == 1 {
                r.scale(cj)
            } else {
                // R(t^j): sparse scatter only works for the identity inner,
                // general powers go through polynomial composition
                let mut inner_mono = vec![Real::zero(); j + 1];
                inner_mono[j] = Real::one();
                let inner = Poly::from_mono(&inner_mono, p);
                compose_cheb(r.cheb_coeffs(), &inner, p)
            };
            poly = poly.add(&term);
            norm_upper = norm_upper.add_up(&cj.abs().mul_up(&sup_r, p), p);
        }
        // flatness majorant: sum_j |c_j| tail(n phi(M)) / n, valid since
        // |u_n(t^j)| <= n |t|^j <= n phi(M) <= 1/2 on the flat zone
        let z = Real::from_u64(n as u64, p).mul(&phi_m, p);
        let tail = series.tail_majorant(&z, p);
        let flat = qstar
            .mul_up(&tail, p)
            .div_up(&Real::from_u64(n as u64, p), p);
        (poly, norm_upper, flat)
    };

    if norm_measured.gt(eps) {
        return Err(FlattenError::ConstantMismatch {
            check: "norm budget".into(),
            measured: norm_measured.to_decimal(),
            budget: eps.to_decimal(),
        });
    }
    if flat_measured.gt(&flat_budget) {
        return Err(FlattenError::ConstantMismatch {
            check: "flatness budget".into(),
            measured: flat_measured.to_decimal(),
            budget: flat_budget.to_decimal(),
        });
    }
    // spot verification of the flat zone with the generic evaluator
    let residual = q_hi.add(&poly);
    for frac in [0.0f64, 0.5, -0.5, 1.0, -1.0] {
        let t = phi_m.mul(&Real::from_f64(frac, p), p);
        let (v, err) = residual.evaluate_with_err(&t);
        let bound = flat_measured.add(&err, p).add(&Real::pow2(-(p as i64) / 2, p), p);
        if v.abs().gt(&bound) {
            return Err(FlattenError::ConstantMismatch {
                check: format!("flat-zone spot value at {frac} phi(M)"),
                measured: v.abs().to_decimal(),
                budget: bound.to_decimal(),
            });
        }
    }

    debug_assert!(poly.degree() <= m);
    Ok(FlattenOutcome {
        m,
        poly,
        n,
        l,
        norm_measured,
        norm_budget: eps.clone(),
        flat_measured,
        flat_budget,
        flat_radius: phi_m,
        precision: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: usize = 256;

    fn r(v: f64) -> Real {
        Real::from_f64(v, P)
    }

    #[test]
    fn identity_with_generous_budget_uses_exact_branch() {
        // eps large enough forces n = 1, P = -t, and (Q+P) = 0
        let q = Poly::identity(P);
        let phi = DecayFn::parse("1/t").unwrap();
        let out = flatten_step(&q, &r(10.0), 1, &phi, &r(8.0), 20000, P).unwrap();
        assert_eq!(out.n, 1);
        assert_eq!(out.l, 17, "frozen order search result for c1 = 8");
        assert_eq!(out.m, 17);
        assert!(out.poly.add(&Poly::identity(out.precision)).is_zero());
        assert!(out.flat_measured.is_zero());
        assert!(out.norm_measured.le(&r(10.0)));
    }

    #[test]
    fn nonzero_origin_rejected() {
        let q = Poly::constant(r(0.3), P);
        let phi = DecayFn::parse("1/t").unwrap();
        assert!(matches!(
            flatten_step(&q, &r(1.0), 1, &phi, &r(8.0), 1000, P),
            Err(FlattenError::NonzeroAtOrigin(_))
        ));
    }

    #[test]
    fn degree_cap_reports_unmet_constraint() {
        // eps small forces n >> 1 and the factorial condition cannot be met
        // within the cap
        let q = Poly::identity(P);
        let phi = DecayFn::parse("1/log(t+3)").unwrap();
        let eps = Real::from_i64(-2, P).exp(P).div(&r(2.0), P);
        let out = flatten_step(&q, &eps, 1, &phi, &r(8.0), 20000, P);
        match out {
            Err(FlattenError::BudgetExceeded { n, .. }) => assert_eq!(n, 119),
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn scaled_cubic_exact_branch() {
        // ||Q||_* = 7; a generous eps still lands in the n = 1 branch and
        // cancels exactly
        let q = Poly::from_mono(&[r(0.0), r(3.0), r(0.0), r(-4.0)], P);
        let phi = DecayFn::parse("1/t").unwrap();
        let out = flatten_step(&q, &r(60.0), 2, &phi, &r(8.0), 20000, P).unwrap();
        assert_eq!(out.n, 1);
        let residual = q.with_precision(out.precision).add(&out.poly);
        assert!(residual.is_zero());
    }

    #[test]
    fn constant_mismatch_when_budget_unreachable() {
        // c1 below the true series constant: the measured norm exceeds eps
        let q = Poly::identity(P);
        let phi = DecayFn::parse("1/t^2").unwrap();
        let out = flatten_step(&q, &r(0.4), 1, &phi, &Real::one(), 20000, P);
        assert!(
            matches!(out, Err(FlattenError::ConstantMismatch { .. })),
            "{out:?}"
        );
    }
}
