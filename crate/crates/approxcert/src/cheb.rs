//! Low-level kernels on Chebyshev coefficient vectors.
//!
//! A vector `c` represents `P(x) = sum_k c[k] T_k(x)` with plain coefficients
//! (no halved constant term).

use crate::real::Real;

/// Clenshaw evaluation of `sum c[k] T_k(x)`.
pub fn clenshaw(c: &[Real], x: &Real, p: usize) -> Real {
    let n = c.len();
    if n == 0 {
        return Real::zero();
    }
    if n == 1 {
        return c[0].clone();
    }
    let two_x = x.add(x, p);
    let mut b1 = Real::zero();
    let mut b2 = Real::zero();
    for k in (1..n).rev() {
        let b = two_x.mul(&b1, p).sub(&b2, p).add(&c[k], p);
        b2 = b1;
        b1 = b;
    }
    x.mul(&b1, p).sub(&b2, p).add(&c[0], p)
}

/// Clenshaw evaluation together with a rigorous rounding-error majorant.
///
/// For |x| <= 1 the recurrence is backward stable; the returned bound is
/// `6 (n+1) 2^-p * sum|c_k|`, generous enough to absorb every rounding step.
pub fn clenshaw_with_err(c: &[Real], x: &Real, p: usize, abs_sum: &Real) -> (Real, Real) {
    let v = clenshaw(c, x, p);
    let scale = Real::from_u64(6 * (c.len() as u64 + 1), p);
    let err = scale
        .mul_up(abs_sum, p)
        .mul_up(&Real::pow2(-(p as i64), p), p);
    (v, err)
}

/// Sum of absolute values, rounded up (an upper bound for the sup norm).
pub fn one_norm_up(c: &[Real], p: usize) -> Real {
    let mut s = Real::zero();
    for v in c {
        s = s.add_up(&v.abs(), p);
    }
    s
}

/// Chebyshev coefficients of the derivative:
/// `b_{k-1} = b_{k+1} + 2k a_k`, then `b_0 /= 2`.
pub fn differentiate(c: &[Real], p: usize) -> Vec<Real> {
    let n = c.len();
    if n <= 1 {
        return vec![Real::zero()];
    }
    let mut d = vec![Real::zero(); n - 1];
    for k in (1..n).rev() {
        let above = if k + 1 <= n - 2 {
            d[k + 1].clone()
        } else {
            Real::zero()
        };
        d[k - 1] = above.add(&Real::from_u64(2 * k as u64, p).mul(&c[k], p), p);
    }
    d[0] = d[0].div(&Real::from_u64(2, p), p);
    d
}

/// Multiplies the polynomial by `x` in the Chebyshev basis.
pub fn shift_up(c: &[Real], p: usize) -> Vec<Real> {
    let n = c.len();
    let mut out = vec![Real::zero(); n + 1];
    let half = Real::from_f64(0.5, p);
    for (k, v) in c.iter().enumerate() {
        if k == 0 {
            out[1] = out[1].add(v, p);
        } else {
            let h = v.mul(&half, p);
            out[k + 1] = out[k + 1].add(&h, p);
            out[k - 1] = out[k - 1].add(&h, p);
        }
    }
    out
}

/// Converts monomial coefficients to Chebyshev coefficients (Horner with
/// multiply-by-x in the Chebyshev basis).
pub fn mono_to_cheb(mono: &[Real], p: usize) -> Vec<Real> {
    let mut acc: Vec<Real> = vec![];
    for a in mono.iter().rev() {
        acc = shift_up(&acc, p);
        if acc.is_empty() {
            acc.push(Real::zero());
        }
        acc[0] = acc[0].add(a, p);
    }
    if acc.is_empty() {
        acc.push(Real::zero());
    }
    acc
}

/// Converts Chebyshev coefficients to monomial coefficients.
///
/// Intermediate T_k monomial coefficients grow like (1+sqrt 2)^k, so the
/// working precision is raised internally by ~1.3 bits per degree.
pub fn cheb_to_mono(c: &[Real], p: usize) -> Vec<Real> {
    let n = c.len();
    let pw = p + (13 * n) / 10 + 64;
    let mut out = vec![Real::zero(); n.max(1)];
    // t_prev = T_{k-1}, t_cur = T_k as monomial vectors
    let mut t_prev: Vec<Real> = vec![Real::one()];
    if !c.is_empty() {
        out[0] = out[0].add(&c[0], pw);
    }
    if n == 1 {
        return out;
    }
    let mut t_cur: Vec<Real> = vec![Real::zero(), Real::one()];
    out[1] = out[1].add(&c[1], pw);
    let two = Real::from_u64(2, pw);
    for k in 2..n {
        // T_k = 2 x T_{k-1} - T_{k-2}
        let mut t_next = vec![Real::zero(); k + 1];
        for (j, v) in t_cur.iter().enumerate() {
            t_next[j + 1] = t_next[j + 1].add(&two.mul(v, pw), pw);
        }
        for (j, v) in t_prev.iter().enumerate() {
            t_next[j] = t_next[j].sub(v, pw);
        }
        for (j, v) in t_next.iter().enumerate() {
            let contrib = c[k].mul(v, pw);
            out[j] = out[j].add(&contrib, pw);
        }
        t_prev = t_cur;
        t_cur = t_next;
    }
    out
}

/// Product of two polynomials in the Chebyshev basis:
/// `T_i T_j = (T_{i+j} + T_|i-j|) / 2`.
pub fn mul(a: &[Real], b: &[Real], p: usize) -> Vec<Real> {
    if a.is_empty() || b.is_empty() {
        return vec![Real::zero()];
    }
    let mut out = vec![Real::zero(); a.len() + b.len() - 1];
    let half = Real::from_f64(0.5, p);
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            let prod = ai.mul(bj, p).mul(&half, p);
            out[i + j] = out[i + j].add(&prod, p);
            let d = i.abs_diff(j);
            out[d] = out[d].add(&prod, p);
        }
    }
    out
}

/// Coefficients of T_n in the Chebyshev basis.
pub fn chebyshev_t(n: usize) -> Vec<Real> {
    let mut c = vec![Real::zero(); n + 1];
    c[n] = Real::one();
    c
}

/// Monomial coefficients of T_n (via the three-term recurrence).
pub fn chebyshev_t_mono(n: usize, p: usize) -> Vec<Real> {
    cheb_to_mono(&chebyshev_t(n), p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> Real {
        Real::from_f64(v, 256)
    }

    #[test]
    fn clenshaw_matches_t2() {
        // T_2(0) = -1, T_3(1) = 1
        let p = 256;
        let t2 = chebyshev_t(2);
        assert!(clenshaw(&t2, &r(0.0), p).add(&Real::one(), p).abs().lt(&Real::pow2(-200, p)));
        let t3 = chebyshev_t(3);
        assert!(clenshaw(&t3, &r(1.0), p).sub(&Real::one(), p).abs().lt(&Real::pow2(-200, p)));
    }

    #[test]
    fn t4_monomial_expansion() {
        // T_4 = 8x^4 - 8x^2 + 1
        let p = 256;
        let m = chebyshev_t_mono(4, p);
        let expect = [1.0, 0.0, -8.0, 0.0, 8.0];
        for (a, b) in m.iter().zip(expect.iter()) {
            assert!(a.sub(&r(*b), p).abs().lt(&Real::pow2(-120, p)), "{a} vs {b}");
        }
    }

    #[test]
    fn basis_round_trip() {
        let p = 256;
        let mono: Vec<Real> = [0.25, -1.5, 0.0, 3.0, -0.125]
            .iter()
            .map(|v| r(*v))
            .collect();
        let cheb = mono_to_cheb(&mono, p);
        let back = cheb_to_mono(&cheb, p);
        for (a, b) in mono.iter().zip(back.iter()) {
            assert!(a.sub(b, p).abs().lt(&Real::pow2(-128, p)));
        }
    }

    #[test]
    fn derivative_of_t3() {
        // T_3' = 3 U_2 = 12x^2 - 3 = 6 T_2 + 3 T_0
        let p = 256;
        let d = differentiate(&chebyshev_t(3), p);
        assert!(d[0].sub(&r(3.0), p).abs().lt(&Real::pow2(-200, p)));
        assert!(d[2].sub(&r(6.0), p).abs().lt(&Real::pow2(-200, p)));
    }

    #[test]
    fn product_t1_t1() {
        // T_1 * T_1 = (T_2 + T_0)/2
        let p = 256;
        let prod = mul(&chebyshev_t(1), &chebyshev_t(1), p);
        assert!(prod[0].sub(&r(0.5), p).abs().lt(&Real::pow2(-200, p)));
        assert!(prod[2].sub(&r(0.5), p).abs().lt(&Real::pow2(-200, p)));
    }
}
