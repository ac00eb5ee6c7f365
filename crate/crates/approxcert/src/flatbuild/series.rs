//! Taylor coefficients of the scaled sine-arcsine composition
//! `n * sin(arcsin(w) / n)` at 0.
//!
//! The function satisfies `(1-w^2) y'' - w y' + y/n^2 = 0`, which gives the
//! two-term coefficient recurrence
//! `c_{k+2} = c_k (k^2 - 1/n^2) / ((k+2)(k+1))`, with c_0 = 0, c_1 = 1.
//! All coefficients are nonnegative, so partial sums at w = 1 are certified
//! sup norms on [-1, 1]. A formal power-series composition route is kept as
//! an independent cross-check.

use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("n must be an odd positive integer, got {0}")]
    EvenDegree(usize),
    #[error("order must be at least 1")]
    BadOrder,
    #[error("precision loss beyond half the budget; retry at doubled precision failed")]
    PrecisionLoss,
}

/// Truncated Taylor series of the composition, coefficient k = y^(k)(0)/k!.
#[derive(Clone, Debug)]
pub struct PhiSeries {
    pub n: usize,
    pub l: usize,
    pub coeffs: Vec<Real>,
    pub prec: usize,
}

impl PhiSeries {
    /// Sum of all coefficients = value of the truncated series at w = 1;
    /// with nonnegative coefficients this is the exact sup norm on [-1, 1].
    pub fn sup_norm_exact(&self, p: usize) -> Real {
        let mut s = Real::zero();
        for c in &self.coeffs {
            s = s.add_up(c, p);
        }
        s
    }

    /// Evaluates the truncated series at `w`.
    pub fn eval(&self, w: &Real, p: usize) -> Real {
        let mut s = Real::zero();
        for c in self.coeffs.iter().rev() {
            s = s.mul(w, p).add(c, p);
        }
        s
    }

    /// Extends the coefficient recurrence past `l` and majorizes the tail
    /// `sum_{k>l} c_k z^k` for `0 <= z < 1`, rounded up.
    pub fn tail_majorant(&self, z: &Real, p: usize) -> Real {
        if !z.is_positive() {
            return Real::zero();
        }
        let one = Real::one();
        debug_assert!(z.lt(&one));
        let n2 = Real::from_u64((self.n * self.n) as u64, p);
        let inv_n2 = one.div(&n2, p);
        // continue the recurrence for a block of terms
        let block = 64usize;
        let mut c_prev2 = if self.l >= 1 {
            self.coeffs.get(self.l - 1).cloned().unwrap_or_else(Real::zero)
        } else {
            Real::zero()
        };
        let mut c_prev1 = self.coeffs.get(self.l).cloned().unwrap_or_else(Real::zero);
        let mut sum = Real::zero();
        let mut zk = z.powi_up(self.l + 1, p);
        let mut last_c = Real::zero();
        for k in (self.l + 1)..=(self.l + block) {
            // c_k from c_{k-2}
            let km2 = Real::from_u64((k as u64) - 2, p);
            let num = km2.mul(&km2, p).sub(&inv_n2, p).max(&Real::zero());
            let den = Real::from_u64(k as u64, p).mul(&Real::from_u64((k - 1) as u64, p), p);
            let ck = c_prev2.mul_up(&num, p).div_up(&den, p);
            sum = sum.add_up(&ck.mul_up(&zk, p), p);
            zk = zk.mul_up(z, p);
            last_c = ck.max(&last_c);
            c_prev2 = c_prev1;
            c_prev1 = ck;
        }
        // coefficients are nonincreasing, so the remaining tail is dominated
        // by a geometric series
        let geo = last_c
            .mul_up(&zk, p)
            .div_up(&one.sub(z, p), p);
        sum.add_up(&geo, p)
    }
}

/// Coefficients via the differential-equation recurrence (the production
/// route: linear work, no cancellation, preserves nonnegativity).
pub fn phi_series(n: usize, l: usize, prec: usize) -> Result<PhiSeries, SeriesError> {
    if n % 2 == 0 || n == 0 {
        return Err(SeriesError::EvenDegree(n));
    }
    if l < 1 {
        return Err(SeriesError::BadOrder);
    }
    // each recurrence step costs a few ulps; guard half the budget
    let mut p = prec;
    if 8 * (l as u64 + 2) > 1u64 << (prec as u64 / 2).min(62) {
        p = prec * 2;
    }
    let one = Real::one();
    let inv_n2 = one.div(&Real::from_u64((n * n) as u64, p), p);
    let mut coeffs = vec![Real::zero(); l + 1];
    if l >= 1 {
        coeffs[1] = Real::one();
    }
    for k in 1..l.saturating_sub(1) {
        let kk = Real::from_u64((k * k) as u64, p);
        let num = kk.sub(&inv_n2, p);
        let den = Real::from_u64((k + 2) as u64, p).mul(&Real::from_u64((k + 1) as u64, p), p);
        coeffs[k + 2] = coeffs[k].mul(&num, p).div(&den, p);
    }
    Ok(PhiSeries {
        n,
        l,
        coeffs,
        prec: p,
    })
}

/// Coefficients by formal power-series composition: the arcsine series,
/// scaled by 1/n, composed into the sine series, scaled by n. Quadratic in
/// the order; used as an independent oracle for the recurrence.
pub fn phi_series_by_composition(n: usize, l: usize, prec: usize) -> Result<PhiSeries, SeriesError> {
    if n % 2 == 0 || n == 0 {
        return Err(SeriesError::EvenDegree(n));
    }
    if l < 1 {
        return Err(SeriesError::BadOrder);
    }
    let p = prec + 64;
    let one = Real::one();
    let n_real = Real::from_u64(n as u64, p);

    // arcsin(w)/n truncated at order l
    let mut g = vec![Real::zero(); l + 1];
    let mut a = one.clone(); // a_{2k+1}, starting at a_1 = 1
    if l >= 1 {
        g[1] = a.div(&n_real, p);
    }
    let mut k = 1usize;
    while 2 * k + 1 <= l {
        // a_{2k+1} = a_{2k-1} * (2k-1)^2 / ((2k)(2k+1))
        let t = Real::from_u64((2 * k - 1) as u64, p);
        a = a
            .mul(&t.mul(&t, p), p)
            .div(&Real::from_u64((2 * k * (2 * k + 1)) as u64, p), p);
        g[2 * k + 1] = a.div(&n_real, p);
        k += 1;
    }

    let truncated_mul = |x: &[Real], y: &[Real]| -> Vec<Real> {
        let mut out = vec![Real::zero(); l + 1];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if i + j > l {
                    break;
                }
                if yj.is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&xi.mul(yj, p), p);
            }
        }
        out
    };

    // sin(g) = g * sum_m s_m (g^2)^m with s_m = (-1)^m / (2m+1)!
    let g2 = truncated_mul(&g, &g);
    let m_max = l / 2;
    let mut acc = vec![Real::zero(); l + 1];
    let mut fact = Real::one(); // (2m+1)! at m = m_max, built below
    let mut s_vals: Vec<Real> = Vec::with_capacity(m_max + 1);
    {
        let mut f = Real::one();
        for m in 0..=m_max {
            if m > 0 {
                f = f
                    .mul(&Real::from_u64((2 * m) as u64, p), p)
                    .mul(&Real::from_u64((2 * m + 1) as u64, p), p);
            }
            let sign = if m % 2 == 0 { 1 } else { -1 };
            s_vals.push(Real::from_i64(sign, p).div(&f, p));
        }
        fact = f;
    }
    let _ = fact;
    for m in (0..=m_max).rev() {
        acc = truncated_mul(&acc, &g2);
        acc[0] = acc[0].add(&s_vals[m], p);
    }
    let sin_g = truncated_mul(&acc, &g);
    let coeffs: Vec<Real> = sin_g.iter().map(|c| c.mul(&n_real, p)).collect();
    Ok(PhiSeries {
        n,
        l,
        coeffs,
        prec: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: usize = 256;

    #[test]
    fn identity_case_n1() {
        // the composition is the identity for n = 1
        let s = phi_series(1, 8, P).unwrap();
        assert!(s.coeffs[1].sub(&Real::one(), P).is_zero());
        for (k, c) in s.coeffs.iter().enumerate() {
            if k != 1 {
                assert!(c.is_zero(), "coefficient {k} should vanish");
            }
        }
    }

    #[test]
    fn frozen_rational_coefficients() {
        // n = 3: c_3 = 4/27, c_5 = 16/243
        let s = phi_series(3, 6, P).unwrap();
        let c3 = Real::from_u64(4, P).div(&Real::from_u64(27, P), P);
        let c5 = Real::from_u64(16, P).div(&Real::from_u64(243, P), P);
        assert!(s.coeffs[3].sub(&c3, P).abs().lt(&Real::pow2(-240, P)));
        assert!(s.coeffs[5].sub(&c5, P).abs().lt(&Real::pow2(-240, P)));
        // structure: vanishing constant, unit linear term, odd function
        assert!(s.coeffs[0].is_zero());
        assert!(s.coeffs[1].sub(&Real::one(), P).is_zero());
        assert!(s.coeffs[2].is_zero() && s.coeffs[4].is_zero());
    }

    #[test]
    fn linear_coefficient_is_one_for_all_n() {
        for n in [1usize, 5, 17, 99] {
            let s = phi_series(n, 3, P).unwrap();
            assert!(s.coeffs[1].sub(&Real::one(), P).is_zero(), "n = {n}");
        }
    }

    #[test]
    fn composition_route_agrees() {
        for n in [3usize, 7, 11] {
            let a = phi_series(n, 24, P).unwrap();
            let b = phi_series_by_composition(n, 24, P).unwrap();
            for k in 0..=24 {
                let d = a.coeffs[k].sub(&b.coeffs[k], P).abs();
                assert!(d.lt(&Real::pow2(-200, P)), "n = {n}, k = {k}: {d}");
            }
        }
    }

    #[test]
    fn finite_difference_oracle_for_third_derivative() {
        // c_3 = y'''(0)/6 via a high-order central difference at radius 1e-3
        let p = 512;
        let n = 3usize;
        let h = Real::parse("1e-3", p).unwrap();
        let f = |x: &Real| -> Real {
            // n sin(asin(x)/n)
            let inner = x.asin(p).div(&Real::from_u64(n as u64, p), p);
            inner.sin(p).mul(&Real::from_u64(n as u64, p), p)
        };
        // f'''(0) ~ [-f(-2h) + 2f(-h) - 2f(h) + f(2h)] / (2h^3) (error O(h^2))
        let two_h = h.mul(&Real::from_u64(2, p), p);
        let num = f(&two_h)
            .sub(&f(&h).mul(&Real::from_u64(2, p), p), p)
            .add(&f(&h.neg()).mul(&Real::from_u64(2, p), p), p)
            .sub(&f(&two_h.neg()), p);
        let d3 = num.div(&two_h.mul(&h, p).mul(&h, p), p);
        let c3_fd = d3.div(&Real::from_u64(6, p), p);
        let expect = Real::from_u64(4, p).div(&Real::from_u64(27, p), p);
        assert!(
            c3_fd.sub(&expect, p).abs().lt(&Real::parse("1e-5", p).unwrap()),
            "finite difference {c3_fd} vs 4/27"
        );
    }

    #[test]
    fn coefficients_nonnegative_and_decreasing() {
        let s = phi_series(9, 300, P).unwrap();
        let mut prev: Option<&Real> = None;
        for (k, c) in s.coeffs.iter().enumerate() {
            assert!(!c.is_negative(), "coefficient {k} negative");
            if k >= 3 && k % 2 == 1 {
                if let Some(pr) = prev {
                    assert!(c.le(pr), "coefficient {k} not decreasing");
                }
                prev = Some(c);
            }
        }
    }

    #[test]
    fn tail_majorant_dominates() {
        let p = 256;
        let s = phi_series(3, 40, p).unwrap();
        let long = phi_series(3, 400, p).unwrap();
        let z = Real::from_f64(0.4, p);
        let maj = s.tail_majorant(&z, p);
        // true tail from the longer expansion
        let mut truth = Real::zero();
        let mut zk = z.powi(41, p);
        for k in 41..=400 {
            truth = truth.add(&long.coeffs[k].mul(&zk, p), p);
            zk = zk.mul(&z, p);
        }
        assert!(maj.ge(&truth), "majorant {maj} below truth {truth}");
        // and it is not absurdly loose
        assert!(maj.le(&truth.mul(&Real::from_u64(3, p), p).add(&Real::pow2(-200, p), p)));
    }

    #[test]
    fn even_order_rejected() {
        assert!(matches!(phi_series(4, 10, P), Err(SeriesError::EvenDegree(4))));
    }
}
