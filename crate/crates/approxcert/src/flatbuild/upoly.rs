//! The odd sine-composition polynomial `sin(n arcsin t)` and its verified
//! Chebyshev closed form.

use crate::cheb;
use crate::poly::Poly;
use crate::real::Real;

use super::series::SeriesError;

/// Builds `sin(n arcsin t)` for odd n by the angle-addition recurrence
/// `u_{k+2}(t) = 2 (1 - 2 t^2) u_k(t) - u_{k-2}(t)` in the monomial basis.
pub fn u_poly(n: usize, prec: usize) -> Result<Poly, SeriesError> {
    if n % 2 == 0 || n == 0 {
        return Err(SeriesError::EvenDegree(n));
    }
    let p = prec;
    // u_1 = t
    let mut prev: Vec<Real> = vec![Real::zero(), Real::one()]; // u_{k-2}
    if n == 1 {
        return Ok(Poly::from_mono(&prev, p));
    }
    // u_3 = 3t - 4t^3
    let mut cur: Vec<Real> = vec![
        Real::zero(),
        Real::from_u64(3, p),
        Real::zero(),
        Real::from_i64(-4, p),
    ];
    let mut k = 3usize;
    while k < n {
        // next = 2(1 - 2t^2) * cur - prev
        let mut next = vec![Real::zero(); k + 3];
        let two = Real::from_u64(2, p);
        let four = Real::from_u64(4, p);
        for (j, v) in cur.iter().enumerate() {
            next[j] = next[j].add(&two.mul(v, p), p);
            next[j + 2] = next[j + 2].sub(&four.mul(v, p), p);
        }
        for (j, v) in prev.iter().enumerate() {
            next[j] = next[j].sub(v, p);
        }
        prev = cur;
        cur = next;
        k += 2;
    }
    Ok(Poly::from_mono(&cur, p))
}

/// Sign of the Chebyshev closed form: `u_n = sign * T_n` with
/// `sign = (-1)^((n-1)/2)`.
pub fn u_poly_sign(n: usize) -> i8 {
    if ((n - 1) / 2) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Verifies the closed form coefficientwise: every monomial coefficient of
/// `u_n - sign * T_n` must be below 2^(-prec/2). Returns the largest
/// discrepancy found.
pub fn verify_chebyshev_identity(n: usize, prec: usize) -> Result<Real, SeriesError> {
    let u = u_poly(n, prec)?;
    let sign = u_poly_sign(n);
    let t_mono = cheb::chebyshev_t_mono(n, prec);
    let u_mono = u.mono_coeffs();
    let mut worst = Real::zero();
    for k in 0..=n {
        let a = u_mono.get(k).cloned().unwrap_or_else(Real::zero);
        let b = t_mono.get(k).cloned().unwrap_or_else(Real::zero);
        let b = if sign < 0 { b.neg() } else { b };
        let d = a.sub(&b, prec).abs();
        worst = worst.max(&d);
    }
    Ok(worst)
}
