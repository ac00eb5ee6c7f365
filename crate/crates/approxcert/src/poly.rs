//! Dual-basis polynomials with certified supremum norms and the classical
//! inequality bounds used by the certificate machinery.
//!
//! Polynomials are stored in the Chebyshev basis (numerically robust on
//! [-1, 1]); monomial coefficients are converted on demand. The certified
//! `sup_norm` uses branch-and-bound subdivision with derivative bounds, never
//! plain grid sampling, so spikes cannot be missed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cheb;
use crate::interval::IntervalSet;
use crate::real::Real;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("supremum norm requested over an empty set")]
    EmptySet,
    #[error("derivative order exceeds degree: k+1 = {k1} > n = {n}")]
    DegreeOrder { k1: usize, n: usize },
    #[error("invalid measure pair: |E| = {meas_e}, |I| = {len_i}")]
    BadMeasure { meas_e: String, len_i: String },
    #[error("subdivision budget exhausted (bracket [{lower}, {upper}])")]
    SupNormBudget { lower: String, upper: String },
    #[error("invalid polynomial serialization: {0}")]
    BadSerialization(String),
}

/// Certified enclosure of a supremum norm.
#[derive(Clone, Debug)]
pub struct NormResult {
    pub lower: Real,
    pub upper: Real,
    pub witness_point: Real,
}

/// A polynomial on [-1, 1], held in the Chebyshev basis at a fixed working
/// precision.
#[derive(Clone, Debug)]
pub struct Poly {
    cheb: Vec<Real>,
    prec: usize,
}

impl Poly {
    pub fn from_cheb(mut coeffs: Vec<Real>, prec: usize) -> Self {
        while coeffs.len() > 1 && coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Real::zero());
        }
        Poly { cheb: coeffs, prec }
    }

    pub fn from_mono(coeffs: &[Real], prec: usize) -> Self {
        Poly::from_cheb(cheb::mono_to_cheb(coeffs, prec), prec)
    }

    pub fn zero(prec: usize) -> Self {
        Poly::from_cheb(vec![Real::zero()], prec)
    }

    pub fn constant(c: Real, prec: usize) -> Self {
        Poly::from_cheb(vec![c], prec)
    }

    /// The Chebyshev polynomial T_n.
    pub fn chebyshev(n: usize, prec: usize) -> Self {
        Poly::from_cheb(cheb::chebyshev_t(n), prec)
    }

    pub fn identity(prec: usize) -> Self {
        Poly::from_cheb(cheb::chebyshev_t(1), prec)
    }

    pub fn precision_bits(&self) -> usize {
        self.prec
    }

    pub fn cheb_coeffs(&self) -> &[Real] {
        &self.cheb
    }

    /// Monomial coefficients, index = power (computed on demand).
    pub fn mono_coeffs(&self) -> Vec<Real> {
        cheb::cheb_to_mono(&self.cheb, self.prec)
    }

    /// Largest index whose coefficient magnitude exceeds 2^(-precision/2);
    /// the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        let thr = Real::pow2(-(self.prec as i64) / 2, self.prec);
        for k in (0..self.cheb.len()).rev() {
            if self.cheb[k].abs().gt(&thr) {
                return k;
            }
        }
        0
    }

    pub fn is_zero(&self) -> bool {
        let thr = Real::pow2(-(self.prec as i64) / 2, self.prec);
        self.cheb.iter().all(|c| c.abs().le(&thr))
    }

    pub fn evaluate(&self, x: &Real) -> Real {
        cheb::clenshaw(&self.cheb, x, self.prec)
    }

    /// Evaluation plus a rigorous rounding-error majorant (valid for |x| <= 1).
    pub fn evaluate_with_err(&self, x: &Real) -> (Real, Real) {
        let abs_sum = cheb::one_norm_up(&self.cheb, self.prec);
        cheb::clenshaw_with_err(&self.cheb, x, self.prec, &abs_sum)
    }

    pub fn derivative(&self) -> Poly {
        Poly::from_cheb(cheb::differentiate(&self.cheb, self.prec), self.prec)
    }

    /// Sum of absolute monomial coefficients, rounded up.
    pub fn coeff_norm(&self) -> Real {
        let mono = self.mono_coeffs();
        cheb::one_norm_up(&mono, self.prec)
    }

    /// Sum of absolute Chebyshev coefficients (upper bound for the sup norm).
    pub fn cheb_abs_sum(&self) -> Real {
        cheb::one_norm_up(&self.cheb, self.prec)
    }

    pub fn scale(&self, a: &Real) -> Poly {
        Poly::from_cheb(
            self.cheb.iter().map(|c| c.mul(a, self.prec)).collect(),
            self.prec,
        )
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let p = self.prec.max(o.prec);
        let n = self.cheb.len().max(o.cheb.len());
        let mut out = vec![Real::zero(); n];
        for (k, c) in self.cheb.iter().enumerate() {
            out[k] = out[k].add(c, p);
        }
        for (k, c) in o.cheb.iter().enumerate() {
            out[k] = out[k].add(c, p);
        }
        Poly::from_cheb(out, p)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(&Real::from_i64(-1, o.prec)))
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let p = self.prec.max(o.prec);
        Poly::from_cheb(cheb::mul(&self.cheb, &o.cheb, p), p)
    }

    /// Re-expresses the polynomial at a different working precision.
    pub fn with_precision(&self, prec: usize) -> Poly {
        Poly::from_cheb(self.cheb.clone(), prec)
    }

    /// Certified supremum norm of |P| over an interval set.
    ///
    /// Branch-and-bound: each cell carries the rigorous bound
    /// `|P(m)| + err + (h/2) min(D1, |P'(m)| + err' + (h/2) D2)` where D1, D2
    /// bound the first two derivatives on [-1, 1]. Cells are split until the
    /// best bound and the best witnessed value agree within `tol`.
    pub fn sup_norm(&self, set: &IntervalSet, tol: &Real) -> Result<NormResult, PolyError> {
        if set.is_empty() {
            return Err(PolyError::EmptySet);
        }
        let p = self.prec;
        if self.cheb.iter().all(|c| c.is_zero()) {
            let w = set.intervals()[0].lo.clone();
            return Ok(NormResult {
                lower: Real::zero(),
                upper: Real::zero(),
                witness_point: w,
            });
        }
        let abs_sum = cheb::one_norm_up(&self.cheb, p);
        let d1c = cheb::differentiate(&self.cheb, p);
        let d1_abs = cheb::one_norm_up(&d1c, p);
        let d2c = cheb::differentiate(&d1c, p);
        let d2_abs = cheb::one_norm_up(&d2c, p);
        let d1_abs_sum = d1_abs.clone();
        let half = Real::from_f64(0.5, p);

        let mut best_lower = Real::zero().sub(&Real::one(), p); // -1: below any |P|
        let mut witness = set.intervals()[0].lo.clone();
        let mut heap: BinaryHeap<Cell> = BinaryHeap::new();

        let eval_cell = |lo: &Real, hi: &Real| -> (Real, Real) {
            let m = lo.add(hi, p).mul(&half, p);
            let h = hi.sub(lo, p);
            let (vm, err) = cheb::clenshaw_with_err(&self.cheb, &m, p, &abs_sum);
            let vm_abs = vm.abs();
            let lower_cand = vm_abs.sub_down(&err, p);
            let (dv, derr) = cheb::clenshaw_with_err(&d1c, &m, p, &d1_abs_sum);
            let hh = h.mul(&half, p);
            let first = hh.mul_up(&d1_abs, p);
            let second = hh
                .mul_up(&dv.abs().add_up(&derr, p), p)
                .add_up(&hh.mul_up(&hh, p).mul_up(&d2_abs, p).mul_up(&half, p), p);
            let u = vm_abs.add_up(&err, p).add_up(&first.min(&second), p);
            (u, lower_cand)
        };

        for iv in set.intervals() {
            let (u, lc) = eval_cell(&iv.lo, &iv.hi);
            let m = iv.midpoint(p);
            if lc.gt(&best_lower) {
                best_lower = lc;
                witness = m;
            }
            heap.push(Cell {
                u,
                lo: iv.lo.clone(),
                hi: iv.hi.clone(),
            });
        }

        let budget = 2_000_000usize;
        for _ in 0..budget {
            let top = match heap.pop() {
                Some(t) => t,
                None => break,
            };
            let gap = top.u.sub(&best_lower, p);
            if gap.le(tol) {
                let lower = best_lower.max(&Real::zero());
                return Ok(NormResult {
                    lower: lower.clone(),
                    upper: top.u.max(&lower),
                    witness_point: witness,
                });
            }
            let m = top.lo.add(&top.hi, p).mul(&half, p);
            for (a, b) in [(&top.lo, &m), (&m, &top.hi)] {
                let (u, lc) = eval_cell(a, b);
                if lc.gt(&best_lower) {
                    best_lower = lc;
                    witness = a.add(b, p).mul(&half, p);
                }
                heap.push(Cell {
                    u,
                    lo: a.clone(),
                    hi: b.clone(),
                });
            }
        }
        let upper = heap
            .peek()
            .map(|c| c.u.clone())
            .unwrap_or_else(|| best_lower.clone());
        Err(PolyError::SupNormBudget {
            lower: best_lower.to_decimal(),
            upper: upper.to_decimal(),
        })
    }

    /// Certified sup norm over a single interval.
    pub fn sup_norm_interval(&self, lo: &Real, hi: &Real, tol: &Real) -> Result<NormResult, PolyError> {
        self.sup_norm(&IntervalSet::single(lo.clone(), hi.clone()), tol)
    }

    /// Truncated Taylor expansion at `x0` of order `k`, together with the
    /// Lagrange remainder bound `((e/2) L / (k+1))^(k+1) ||P^(k+1)||` for an
    /// interval of length `L`.
    pub fn taylor_truncate(
        &self,
        x0: &Real,
        k: usize,
        interval_len: &Real,
    ) -> Result<(Poly, Real), PolyError> {
        let p = self.prec;
        let n = self.degree();
        if k > n {
            return Err(PolyError::DegreeOrder { k1: k + 1, n });
        }
        // Derivative values P^(j)(x0) for j = 0..=k+1.
        let mut derivs = Vec::with_capacity(k + 2);
        let mut cur = self.cheb.clone();
        for _ in 0..=k {
            derivs.push(cheb::clenshaw(&cur, x0, p));
            cur = cheb::differentiate(&cur, p);
        }
        // ||P^(k+1)||: certified upper bound.
        let dkp1 = Poly::from_cheb(cur, p);
        let deriv_sup = if dkp1.is_zero() {
            Real::zero()
        } else {
            let quick = dkp1.cheb_abs_sum();
            let tol = quick.mul(&Real::pow2(-30, p), p).max(&Real::pow2(-(p as i64) / 2, p));
            dkp1.sup_norm(&IntervalSet::full(p), &tol)?.upper
        };
        // Taylor part via Horner in (x - x0).
        let mut acc = Poly::zero(p);
        for j in (0..=k).rev() {
            // acc = acc * (x - x0) + P^(j)(x0)/j!
            let shifted = Poly::from_cheb(cheb::shift_up(acc.cheb_coeffs(), p), p);
            acc = shifted.sub(&acc.scale(x0));
            let mut fact = Real::one();
            for i in 1..=j {
                fact = fact.mul(&Real::from_u64(i as u64, p), p);
            }
            acc = acc.add(&Poly::constant(derivs[j].div(&fact, p), p));
        }
        // Remainder bound with the e/2 factor.
        let e_half = Real::one().exp(p).div(&Real::from_u64(2, p), p);
        let base = e_half
            .mul(interval_len, p)
            .div(&Real::from_u64(k as u64 + 1, p), p);
        let bound = base.powi_up(k + 1, p).mul_up(&deriv_sup, p);
        Ok((acc, bound))
    }
}

struct Cell {
    u: Real,
    lo: Real,
    hi: Real,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap by bound; ties broken by left endpoint for determinism.
        self.u
            .cmp_total(&other.u)
            .then_with(|| other.lo.cmp_total(&self.lo))
    }
}

/// The displayed bound on the (k+1)-st derivative of a degree-n polynomial:
/// `(1/2) (2/(k+1))^(k+1) n^(2k+2) * norm`.
pub fn vmarkov_bound(n: usize, k: usize, norm: &Real, p: usize) -> Result<Real, PolyError> {
    if k + 1 > n {
        return Err(PolyError::DegreeOrder { k1: k + 1, n });
    }
    let k1 = Real::from_u64(k as u64 + 1, p);
    let ratio = Real::from_u64(2, p).div(&k1, p);
    let npow = Real::from_u64(n as u64, p).powi(2 * k + 2, p);
    Ok(ratio
        .powi(k + 1, p)
        .mul(&npow, p)
        .mul(norm, p)
        .div(&Real::from_u64(2, p), p))
}

/// The crude Remez factor `(4 |I| / |E|)^k`.
pub fn crude_remez_bound(k: usize, meas_e: &Real, len_i: &Real, p: usize) -> Result<Real, PolyError> {
    let two = Real::from_u64(2, p);
    if !meas_e.is_positive() || meas_e.gt(len_i) || len_i.gt(&two) {
        return Err(PolyError::BadMeasure {
            meas_e: meas_e.to_decimal(),
            len_i: len_i.to_decimal(),
        });
    }
    let eta4 = Real::from_u64(4, p).mul(len_i, p).div(meas_e, p);
    Ok(eta4.powi(k, p))
}

/// JSON form: one basis at a time, decimal strings at full precision.
#[derive(Serialize, Deserialize)]
pub struct PolyJson {
    pub basis: String,
    pub degree: usize,
    pub precision_bits: usize,
    pub coefficients: Vec<String>,
}

impl Poly {
    pub fn to_json(&self, monomial: bool) -> PolyJson {
        let coeffs: Vec<String> = if monomial {
            self.mono_coeffs().iter().map(|c| c.to_decimal()).collect()
        } else {
            self.cheb.iter().map(|c| c.to_decimal()).collect()
        };
        PolyJson {
            basis: if monomial { "monomial" } else { "chebyshev" }.into(),
            degree: self.degree(),
            precision_bits: self.prec,
            coefficients: coeffs,
        }
    }

    pub fn from_json(j: &PolyJson) -> Result<Poly, PolyError> {
        let p = j.precision_bits.max(64);
        let mut coeffs = Vec::with_capacity(j.coefficients.len());
        for s in &j.coefficients {
            coeffs.push(
                Real::parse(s, p)
                    .ok_or_else(|| PolyError::BadSerialization(format!("bad coefficient {s}")))?,
            );
        }
        match j.basis.as_str() {
            "chebyshev" => Ok(Poly::from_cheb(coeffs, p)),
            "monomial" => Ok(Poly::from_mono(&coeffs, p)),
            other => Err(PolyError::BadSerialization(format!("unknown basis {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: usize = 256;

    fn r(v: f64) -> Real {
        Real::from_f64(v, P)
    }

    fn tol() -> Real {
        Real::parse("1e-20", P).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        // T_2(0) = -1, T_3(1) = 1, (3t - 4t^3)(0.2) = 0.568
        let t2 = Poly::chebyshev(2, P);
        assert!(t2.evaluate(&r(0.0)).add(&Real::one(), P).abs().lt(&Real::pow2(-200, P)));
        let t3 = Poly::chebyshev(3, P);
        assert!(t3.evaluate(&r(1.0)).sub(&Real::one(), P).abs().lt(&Real::pow2(-200, P)));
        let q = Poly::from_mono(&[r(0.0), r(3.0), r(0.0), r(-4.0)], P);
        let x = Real::parse("0.2", P).unwrap();
        let got = q.evaluate(&x);
        let expect = Real::parse("0.568", P).unwrap();
        assert!(got.sub(&expect, P).abs().lt(&Real::pow2(-200, P)), "{got}");
    }

    #[test]
    fn sup_norm_examples() {
        // ||T_5|| on [-1,1] = 1 (equioscillation)
        let t5 = Poly::chebyshev(5, P);
        let n = t5.sup_norm(&IntervalSet::full(P), &tol()).unwrap();
        assert!(n.upper.sub(&Real::one(), P).abs().le(&tol()));
        assert!(n.lower.sub(&Real::one(), P).abs().le(&tol()));
        assert!(t5.evaluate(&n.witness_point).abs().ge(&n.lower.sub(&Real::pow2(-120, P), P)));

        // ||x|| on [0, 1/2] = 1/2 (monotone)
        let x = Poly::identity(P);
        let n = x
            .sup_norm_interval(&r(0.0), &r(0.5), &tol())
            .unwrap();
        assert!(n.upper.sub(&r(0.5), P).abs().le(&tol()));

        // ||T_2|| on [-1/2, 1/2] = 1 (interior max at 0)
        let t2 = Poly::chebyshev(2, P);
        let n = t2.sup_norm_interval(&r(-0.5), &r(0.5), &tol()).unwrap();
        assert!(n.upper.sub(&Real::one(), P).abs().le(&tol()));
    }

    #[test]
    fn sup_norm_empty_set_errors() {
        let t2 = Poly::chebyshev(2, P);
        assert!(matches!(
            t2.sup_norm(&IntervalSet::empty(), &tol()),
            Err(PolyError::EmptySet)
        ));
    }

    #[test]
    fn coeff_norm_examples() {
        // ||x||_* = 1; ||3t - 4t^3||_* = 7; ||T_4||_* = 17
        let x = Poly::identity(P);
        assert!(x.coeff_norm().sub(&Real::one(), P).abs().lt(&Real::pow2(-100, P)));
        let q = Poly::from_mono(&[r(0.0), r(3.0), r(0.0), r(-4.0)], P);
        assert!(q.coeff_norm().sub(&r(7.0), P).abs().lt(&Real::pow2(-100, P)));
        let t4 = Poly::chebyshev(4, P);
        assert!(t4.coeff_norm().sub(&r(17.0), P).abs().lt(&Real::pow2(-100, P)));
    }

    #[test]
    fn vmarkov_examples() {
        // k = 0 reduces to n^2; sharp for T_n.
        for n in [1usize, 5, 12] {
            let b = vmarkov_bound(n, 0, &Real::one(), P).unwrap();
            let expect = Real::from_u64((n * n) as u64, P);
            assert!(b.sub(&expect, P).abs().lt(&Real::pow2(-120, P)));
        }
        // n = 3, k = 1: bound 40.5, actual ||T_3''|| = 24.
        let b = vmarkov_bound(3, 1, &Real::one(), P).unwrap();
        assert!(b.sub(&r(40.5), P).abs().lt(&Real::pow2(-120, P)));
        let t3dd = Poly::chebyshev(3, P).derivative().derivative();
        let sup = t3dd.sup_norm(&IntervalSet::full(P), &tol()).unwrap();
        assert!(sup.upper.sub(&r(24.0), P).abs().le(&tol()));
        assert!(sup.upper.le(&b));
        // degree-order error
        assert!(matches!(
            vmarkov_bound(3, 3, &Real::one(), P),
            Err(PolyError::DegreeOrder { .. })
        ));
    }

    #[test]
    fn crude_remez_examples() {
        // k = 0 -> 1; k = 1, |E| = 0.1, |I| = 0.2 -> 8; eta = 1, k = 2 -> 16
        let one = crude_remez_bound(0, &r(0.5), &r(0.9), P).unwrap();
        assert!(one.sub(&Real::one(), P).abs().lt(&Real::pow2(-120, P)));
        let eight = crude_remez_bound(1, &r(0.1), &r(0.2), P).unwrap();
        assert!(eight.sub(&r(8.0), P).abs().lt(&Real::pow2(-110, P)));
        let sixteen = crude_remez_bound(2, &r(0.3), &r(0.3), P).unwrap();
        assert!(sixteen.sub(&r(16.0), P).abs().lt(&Real::pow2(-110, P)));
        assert!(matches!(
            crude_remez_bound(1, &r(0.4), &r(0.2), P),
            Err(PolyError::BadMeasure { .. })
        ));
    }

    #[test]
    fn taylor_truncate_examples() {
        // Full-order truncation returns the polynomial itself with zero bound.
        let t3 = Poly::chebyshev(3, P);
        let (pk, bound) = t3.taylor_truncate(&r(0.3), 3, &r(2.0)).unwrap();
        assert!(pk.sub(&t3).is_zero());
        assert!(bound.is_zero());

        // T_2 at x0 = 0, k = 0: constant -1, remainder bound (e/2)L * ||T_2'|| with ||T_2'|| = 4.
        let t2 = Poly::chebyshev(2, P);
        let (p0, bound) = t2.taylor_truncate(&r(0.0), 0, &r(1.0)).unwrap();
        assert_eq!(p0.degree(), 0);
        assert!(p0.evaluate(&r(0.9)).add(&Real::one(), P).abs().lt(&Real::pow2(-120, P)));
        let expect = Real::one().exp(P).div(&r(2.0), P).mul(&r(4.0), P);
        assert!(bound.sub(&expect, P).abs().lt(&r(1e-15)), "{bound} vs {expect}");

        // x^3 at 0, k = 1: the linear Taylor part vanishes.
        let cube = Poly::from_mono(&[r(0.0), r(0.0), r(0.0), r(1.0)], P);
        let (p1, _) = cube.taylor_truncate(&r(0.0), 1, &r(0.5)).unwrap();
        assert!(p1.is_zero());
    }

    #[test]
    fn json_round_trip() {
        let q = Poly::from_mono(&[r(0.5), r(-1.25), r(0.0), r(2.0)], P);
        let j = q.to_json(false);
        let back = Poly::from_json(&j).unwrap();
        assert!(q.sub(&back).is_zero());
        let jm = q.to_json(true);
        assert_eq!(jm.basis, "monomial");
        let back2 = Poly::from_json(&jm).unwrap();
        let diff = q.sub(&back2);
        assert!(diff.cheb_abs_sum().lt(&Real::pow2(-100, P)));
    }
}
