//! The correction polynomial `R(t) = -(1/n) Phi_{n,l}(u_n(t))`.
//!
//! Since `u_n = ±T_n` (verified, not assumed) and `T_j(T_n) = T_{jn}`, the
//! composition is a sparse scatter in the Chebyshev basis: convert the
//! truncated series to Chebyshev coefficients b_j, then place
//! `-(±1)^j b_j / n` at position j·n.

use crate::cheb;
use crate::poly::Poly;
use crate::real::Real;

use super::series::{phi_series, SeriesError};
use super::upoly::{u_poly_sign, verify_chebyshev_identity};

/// Builds R for odd n; degree at most l·n.
pub fn r_poly(n: usize, l: usize, prec: usize) -> Result<Poly, SeriesError> {
    let series = phi_series(n, l, prec)?;
    r_poly_from_series(&series, prec)
}

pub(super) fn r_poly_from_series(series: &super::series::PhiSeries, prec: usize) -> Result<Poly, SeriesError> {
    let n = series.n;
    let l = series.l;
    let p = prec.max(series.prec);
    // the closed form u_n = sign*T_n is a proven identity, but cheap to
    // re-verify; do so for every fresh (n, precision) pair
    let worst = verify_chebyshev_identity(n, p)?;
    if worst.ge(&Real::pow2(-(p as i64) / 2, p)) {
        return Err(SeriesError::PrecisionLoss);
    }
    let sign = u_poly_sign(n);
    let b = cheb::mono_to_cheb(&series.coeffs, p);
    let mut out = vec![Real::zero(); l * n + 1];
    let inv_n = Real::one().div(&Real::from_u64(n as u64, p), p);
    for (j, bj) in b.iter().enumerate() {
        if bj.is_zero() {
            continue;
        }
        let mut v = bj.mul(&inv_n, p).neg();
        if sign < 0 && j % 2 == 1 {
            v = v.neg();
        }
        out[j * n] = v;
    }
    Ok(Poly::from_cheb(out, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::IntervalSet;

    const P: usize = 256;

    #[test]
    fn n1_cancels_identity() {
        // R_{1,l} = -t exactly, so t + R vanishes
        let r = r_poly(1, 5, P).unwrap();
        let sum = r.add(&Poly::identity(P));
        assert!(sum.is_zero());
    }

    #[test]
    fn degree_bound_and_direct_eval() {
        let n = 3;
        let l = 5;
        let r = r_poly(n, l, P).unwrap();
        assert!(r.degree() <= l * n);
        // agreement with the two-step evaluation -(1/n) Phi_{n,l}(u_n(t))
        let series = phi_series(n, l, P).unwrap();
        let u = super::super::upoly::u_poly(n, P).unwrap();
        for i in 0..50 {
            let t = Real::from_f64(-1.0 + (2.0 * i as f64 + 1.0) / 50.0, P);
            let direct = r.evaluate(&t);
            let via = series
                .eval(&u.evaluate(&t), P)
                .div(&Real::from_u64(n as u64, P), P)
                .neg();
            assert!(
                direct.sub(&via, P).abs().lt(&Real::pow2(-180, P)),
                "t = {}: {direct} vs {via}",
                t.to_f64()
            );
        }
    }

    #[test]
    fn cancellation_bound_small_case() {
        // |t + R(t)| on |t| <= 1/n stays below the tail majorant
        let n = 3;
        let l = 5;
        let p = 320;
        let r = r_poly(n, l, p).unwrap();
        let third = Real::one().div(&Real::from_u64(3, p), p);
        let series = phi_series(n, l, p).unwrap();
        let z = Real::one(); // |u_n(t)| <= 1 always
        let _ = z;
        for i in 0..60 {
            let t = third.mul(&Real::from_f64(-1.0 + (2.0 * i as f64 + 1.0) / 60.0, p), p);
            let resid = t.add(&r.evaluate(&t), p).abs();
            let cap = Real::from_u64(n as u64, p).mul(&t.abs(), p).min(&Real::one());
            let maj = series
                .tail_majorant(&cap.min(&Real::parse("0.999", p).unwrap()), p)
                .div(&Real::from_u64(n as u64, p), p);
            assert!(
                resid.le(&maj.add(&Real::pow2(-250, p), p)),
                "t = {}: residual {resid} above majorant {maj}",
                t.to_f64()
            );
        }
    }

    #[test]
    fn sup_norm_matches_series_sum() {
        // with nonnegative coefficients, sup |R| = Phi_{n,l}(1)/n exactly
        let n = 5;
        let l = 9;
        let r = r_poly(n, l, P).unwrap();
        let series = phi_series(n, l, P).unwrap();
        let expect = series
            .sup_norm_exact(P)
            .div(&Real::from_u64(n as u64, P), P);
        let got = r
            .sup_norm(&IntervalSet::full(P), &Real::parse("1e-25", P).unwrap())
            .unwrap();
        assert!(
            got.upper.sub(&expect, P).abs().lt(&Real::parse("1e-20", P).unwrap()),
            "{} vs {expect}",
            got.upper
        );
    }
}
