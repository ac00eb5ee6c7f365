//! Best uniform polynomial approximation by the exchange algorithm, the
//! error sequence E_n(f), its floored variant, and the log-divergence
//! diagnostic for error sequences.

use thiserror::Error;

use crate::cheb;
use crate::poly::Poly;
use crate::real::Real;
use crate::target::TargetFunction;

#[derive(Debug, Error)]
pub enum RemezError {
    #[error("exchange stalled after {iterations} iterations; best bracket [{lower}, {upper}]")]
    NoConvergence {
        iterations: u32,
        lower: String,
        upper: String,
    },
    #[error("could not seed {needed} alternation points (found {found})")]
    InsufficientAlternation { needed: usize, found: usize },
    #[error("degrees must be strictly increasing")]
    BadDegrees,
    #[error("error sequence entries must be positive, found {0}")]
    BadSequence(String),
}

/// How an approximation result was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApproxMode {
    /// Equioscillation certified by the exchange algorithm.
    Exchange,
    /// Error taken from a certified series tail bound (lacunary targets).
    TailBound,
}

#[derive(Clone, Debug)]
pub struct ApproxResult {
    pub n: usize,
    /// Upper end of the error bracket (within relative `tol` of E_n(f)).
    pub error: Real,
    /// Lower end of the bracket (min reference deviation).
    pub error_lower: Real,
    pub best_poly: Poly,
    /// n+2 strictly increasing points where the residual equioscillates
    /// (empty in tail-bound mode).
    pub alternation_points: Vec<Real>,
    pub iterations: u32,
    pub mode: ApproxMode,
}

/// max(error, e^-n): the floor that keeps thresholds nondegenerate.
pub fn e_star(error: &Real, n: usize, p: usize) -> Real {
    let floor = Real::from_i64(-(n as i64), p).exp(p);
    error.max(&floor)
}

/// Partial sum of `max(log(1/e_n), 0) / n^2` over n = 1..=N.
pub fn beurling_partial_sum(errors: &[Real], p: usize) -> Result<Real, RemezError> {
    let mut s = Real::zero();
    for (idx, e) in errors.iter().enumerate() {
        if !e.is_positive() {
            return Err(RemezError::BadSequence(e.to_decimal()));
        }
        let n = idx as u64 + 1;
        let term = Real::one().div(e, p).ln(p).max(&Real::zero());
        s = s.add(&term.div(&Real::from_u64(n * n, p), p), p);
    }
    Ok(s)
}

/// Chebyshev-distributed reference points: extrema of T_{n+1} ascending.
fn initial_references(n: usize, p: usize) -> Vec<Real> {
    let m = n + 1;
    let pi = Real::pi(p);
    (0..=m)
        .map(|i| {
            pi.mul(&Real::from_u64(i as u64, p), p)
                .div(&Real::from_u64(m as u64, p), p)
                .cos(p)
                .neg()
        })
        .collect()
}

/// Solves for Chebyshev coefficients c_0..c_n and the levelled error h with
/// `p(x_i) + (-1)^i h = f(x_i)` (Gaussian elimination, partial pivoting).
fn solve_reference_system(
    refs: &[Real],
    fvals: &[Real],
    n: usize,
    p: usize,
) -> Option<(Vec<Real>, Real)> {
    let m = n + 2;
    let mut a: Vec<Vec<Real>> = Vec::with_capacity(m);
    for (i, x) in refs.iter().enumerate() {
        let mut row = Vec::with_capacity(m + 1);
        // T_j(x) by recurrence
        let mut t_prev = Real::one();
        let mut t_cur = x.clone();
        for j in 0..=n {
            let tj = match j {
                0 => Real::one(),
                1 => x.clone(),
                _ => {
                    let t_next = x.mul(&t_cur, p).mul(&Real::from_u64(2, p), p).sub(&t_prev, p);
                    t_prev = t_cur.clone();
                    t_cur = t_next.clone();
                    t_next
                }
            };
            row.push(tj);
        }
        row.push(if i % 2 == 0 {
            Real::one()
        } else {
            Real::from_i64(-1, p)
        });
        row.push(fvals[i].clone());
        a.push(row);
    }
    // elimination
    for col in 0..m {
        let mut piv = col;
        for r in col + 1..m {
            if a[r][col].abs().gt(&a[piv][col].abs()) {
                piv = r;
            }
        }
        if a[piv][col].is_zero() {
            return None;
        }
        a.swap(col, piv);
        for r in col + 1..m {
            let factor = a[r][col].div(&a[col][col], p);
            if factor.is_zero() {
                continue;
            }
            for c in col..=m {
                let t = factor.mul(&a[col][c], p);
                a[r][c] = a[r][c].sub(&t, p);
            }
        }
    }
    let mut sol = vec![Real::zero(); m];
    for r in (0..m).rev() {
        let mut acc = a[r][m].clone();
        for c in r + 1..m {
            acc = acc.sub(&a[r][c].mul(&sol[c], p), p);
        }
        sol[r] = acc.div(&a[r][r], p);
    }
    let h = sol.pop().unwrap();
    Some((sol, h))
}

/// Golden-section maximization of `sign * (f - p)` on [a, b].
fn golden_refine(
    f: &TargetFunction,
    poly: &Poly,
    a: &Real,
    b: &Real,
    sign: i8,
    iters: usize,
    p: usize,
) -> (Real, Real) {
    let resid = |x: &Real| -> Real {
        let r = f.eval(x).sub(&poly.evaluate(x), p);
        if sign < 0 {
            r.neg()
        } else {
            r
        }
    };
    // golden ratio fraction 0.381966...
    let invphi2 = Real::parse("0.3819660112501051517954131656343619", p).unwrap();
    let mut lo = a.clone();
    let mut hi = b.clone();
    let mut width = hi.sub(&lo, p);
    let mut x1 = lo.add(&width.mul(&invphi2, p), p);
    let mut x2 = hi.sub(&width.mul(&invphi2, p), p);
    let mut f1 = resid(&x1);
    let mut f2 = resid(&x2);
    for _ in 0..iters {
        if f1.ge(&f2) {
            hi = x2;
            x2 = x1.clone();
            f2 = f1.clone();
            width = hi.sub(&lo, p);
            x1 = lo.add(&width.mul(&invphi2, p), p);
            f1 = resid(&x1);
        } else {
            lo = x1;
            x1 = x2.clone();
            f1 = f2.clone();
            width = hi.sub(&lo, p);
            x2 = hi.sub(&width.mul(&invphi2, p), p);
            f2 = resid(&x2);
        }
    }
    if f1.ge(&f2) {
        let v = if sign < 0 { f1.neg() } else { f1 };
        (x1, v)
    } else {
        let v = if sign < 0 { f2.neg() } else { f2 };
        (x2, v)
    }
}

struct Candidate {
    x: Real,
    r: Real,
}

/// Locates the alternation candidates of the residual on [-1, 1].
fn residual_extrema(f: &TargetFunction, poly: &Poly, n: usize, p: usize) -> Vec<Candidate> {
    let eff = f.effective_degree().unwrap_or(0);
    let g = (8 * (n + 2)).max(4 * eff + 17).max(65).min(4097);
    let pi = Real::pi(p);
    let mut xs: Vec<Real> = (0..=g)
        .map(|i| {
            pi.mul(&Real::from_u64(i as u64, p), p)
                .div(&Real::from_u64(g as u64, p), p)
                .cos(p)
                .neg()
        })
        .collect();
    // the kink of |x| and similar features sit at 0
    xs.push(Real::zero());
    xs.sort_by(|a, b| a.cmp_total(b));
    let rs: Vec<Real> = xs
        .iter()
        .map(|x| f.eval(x).sub(&poly.evaluate(x), p))
        .collect();

    let golden_iters = (p / 2).clamp(80, 220);
    let mut out: Vec<Candidate> = vec![];
    for i in 0..xs.len() {
        let here = rs[i].abs();
        let left_le = i == 0 || rs[i - 1].abs().le(&here);
        let right_le = i + 1 == xs.len() || rs[i + 1].abs().le(&here);
        if !(left_le && right_le) {
            continue;
        }
        let sign = rs[i].signum_i();
        if sign == 0 {
            out.push(Candidate {
                x: xs[i].clone(),
                r: rs[i].clone(),
            });
            continue;
        }
        let a = if i == 0 { &xs[0] } else { &xs[i - 1] };
        let b = if i + 1 == xs.len() { &xs[i] } else { &xs[i + 1] };
        let (x, r) = golden_refine(f, poly, a, b, sign, golden_iters, p);
        out.push(Candidate { x, r });
    }
    out.sort_by(|a, b| a.x.cmp_total(&b.x));
    out
}

/// Keeps one candidate per sign run, then trims to exactly `m` alternating
/// points, dropping the weakest endpoints / adjacent pairs.
fn select_alternating(mut cands: Vec<Candidate>, m: usize, p: usize) -> Option<Vec<Candidate>> {
    // merge same-sign runs (keep the largest |r|)
    let mut runs: Vec<Candidate> = vec![];
    for c in cands.drain(..) {
        let s = c.r.signum_i();
        if s == 0 {
            continue;
        }
        match runs.last_mut() {
            Some(last) if last.r.signum_i() == s => {
                if c.r.abs().gt(&last.r.abs()) {
                    *last = c;
                }
            }
            _ => runs.push(c),
        }
    }
    let _ = p;
    if runs.len() < m {
        return None;
    }
    while runs.len() > m {
        if runs.len() - m >= 2 {
            // drop the adjacent pair whose larger deviation is smallest
            let mut best_i = 0usize;
            let mut best_val: Option<Real> = None;
            for i in 0..runs.len() - 1 {
                let v = runs[i].r.abs().max(&runs[i + 1].r.abs());
                if best_val.as_ref().map(|b| v.lt(b)).unwrap_or(true) {
                    best_val = Some(v);
                    best_i = i;
                }
            }
            runs.drain(best_i..best_i + 2);
        } else {
            // drop the weaker endpoint
            if runs[0].r.abs().le(&runs[runs.len() - 1].r.abs()) {
                runs.remove(0);
            } else {
                runs.pop();
            }
        }
    }
    Some(runs)
}

/// Best uniform approximation of degree <= n by the exchange algorithm.
pub fn remez_exchange(
    f: &TargetFunction,
    n: usize,
    tol: &Real,
) -> Result<ApproxResult, RemezError> {
    let p = f.prec;
    let mut refs = initial_references(n, p);
    let noise_floor = f
        .sup_upper_bound()
        .max(&Real::one())
        .mul(&Real::pow2(-(p as i64) / 2, p), p);

    let mut best: Option<(Poly, Real, Real, Vec<Real>)> = None;
    let max_iter = 200u32;
    for iter in 1..=max_iter {
        let fvals: Vec<Real> = refs.iter().map(|x| f.eval(x)).collect();
        let (coeffs, h) = match solve_reference_system(&refs, &fvals, n, p) {
            Some(s) => s,
            None => {
                return Err(RemezError::NoConvergence {
                    iterations: iter,
                    lower: "0".into(),
                    upper: "inf".into(),
                })
            }
        };
        let poly = Poly::from_cheb(coeffs, p);

        // residual extrema and the global deviation
        let cands = residual_extrema(f, &poly, n, p);
        let mut max_dev = Real::zero();
        for c in &cands {
            if c.r.abs().gt(&max_dev) {
                max_dev = c.r.abs();
            }
        }

        // exact-representation escape: the residual is numerical noise
        if max_dev.le(&noise_floor) {
            return Ok(ApproxResult {
                n,
                error: max_dev.clone(),
                error_lower: Real::zero(),
                best_poly: poly,
                alternation_points: refs,
                iterations: iter,
                mode: ApproxMode::Exchange,
            });
        }

        let selected = match select_alternating(cands, n + 2, p) {
            Some(s) => s,
            None => {
                // keep the previous reference set; if this is the first
                // iteration there is nothing to fall back to
                if let Some((poly, err, low, alt)) = best {
                    return Ok(ApproxResult {
                        n,
                        error: err,
                        error_lower: low,
                        best_poly: poly,
                        alternation_points: alt,
                        iterations: iter,
                        mode: ApproxMode::Exchange,
                    });
                }
                return Err(RemezError::InsufficientAlternation {
                    needed: n + 2,
                    found: 0,
                });
            }
        };
        let mut min_ref = selected[0].r.abs();
        for c in &selected {
            let a = c.r.abs();
            if a.lt(&min_ref) {
                min_ref = a;
            }
        }
        let new_refs: Vec<Real> = selected.iter().map(|c| c.x.clone()).collect();

        let improved = match &best {
            Some((_, err, _, _)) => max_dev.lt(err),
            None => true,
        };
        if improved {
            best = Some((poly.clone(), max_dev.clone(), min_ref.clone(), new_refs.clone()));
        }

        // convergence: (max deviation - min reference deviation) / max deviation <= tol
        let gap = max_dev.sub(&min_ref, p).div(&max_dev, p);
        if gap.le(tol) {
            return Ok(ApproxResult {
                n,
                error: max_dev,
                error_lower: min_ref,
                best_poly: poly,
                alternation_points: new_refs,
                iterations: iter,
                mode: ApproxMode::Exchange,
            });
        }
        refs = new_refs;
    }
    let (lower, upper) = match &best {
        Some((_, err, low, _)) => (low.to_decimal(), err.to_decimal()),
        None => ("0".into(), "unknown".into()),
    };
    Err(RemezError::NoConvergence {
        iterations: max_iter,
        lower,
        upper,
    })
}

/// Tail-bound result for Chebyshev-series targets: the error bracket is
/// [ |a_m| - tail(m), sum_{k>n} |a_k| ] where m is the first index past n.
pub fn tail_bound_result(f: &TargetFunction, n: usize) -> Option<ApproxResult> {
    let p = f.prec;
    let tail = f.tail_bound(n)?;
    let poly = match &f.kind {
        crate::target::TargetKind::ChebSeries(c) => {
            Poly::from_cheb(c.iter().take(n + 1).cloned().collect(), p)
        }
        _ => return None,
    };
    let lower = match &f.kind {
        crate::target::TargetKind::ChebSeries(c) => {
            let mut first = Real::zero();
            let mut rest = Real::zero();
            let mut seen = false;
            for v in c.iter().skip(n + 1) {
                if !seen && !v.is_zero() {
                    first = v.abs();
                    seen = true;
                } else if seen {
                    rest = rest.add_up(&v.abs(), p);
                }
            }
            first.sub_down(&rest, p).max(&Real::zero())
        }
        _ => Real::zero(),
    };
    Some(ApproxResult {
        n,
        error: tail,
        error_lower: lower,
        best_poly: poly,
        alternation_points: vec![],
        iterations: 0,
        mode: ApproxMode::TailBound,
    })
}

/// Runs the exchange over a strictly increasing degree list, continuing past
/// per-degree failures.
pub struct SequenceReport {
    pub results: Vec<(usize, Result<ApproxResult, RemezError>)>,
    /// Degrees whose error exceeds an earlier error beyond tolerance.
    pub monotonicity_violations: Vec<usize>,
}

pub fn approx_sequence(
    f: &TargetFunction,
    degrees: &[usize],
    tol: &Real,
) -> Result<SequenceReport, RemezError> {
    if degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(RemezError::BadDegrees);
    }
    let p = f.prec;
    let mut results = vec![];
    let mut violations = vec![];
    let mut prev_err: Option<Real> = None;
    for &d in degrees {
        let r = remez_exchange(f, d, tol);
        if let Ok(res) = &r {
            if let Some(pe) = &prev_err {
                let slack = pe.mul(&tol.add(&Real::one(), p), p).add(
                    &Real::pow2(-(p as i64) / 2, p),
                    p,
                );
                if res.error.gt(&slack) {
                    violations.push(d);
                }
            }
            prev_err = Some(res.error.clone());
        }
        results.push((d, r));
    }
    Ok(SequenceReport {
        results,
        monotonicity_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::{Builtin, TargetFunction};

    const P: usize = 256;

    fn r(v: f64) -> Real {
        Real::from_f64(v, P)
    }

    fn tol() -> Real {
        Real::parse("1e-14", P).unwrap()
    }

    #[test]
    fn linear_target_is_exact() {
        // f(x) = x at degree 1: error 0, p = x
        let f = TargetFunction::from_poly(Poly::identity(P));
        let res = remez_exchange(&f, 1, &tol()).unwrap();
        assert!(res.error.le(&Real::pow2(-100, P)));
        let diff = res.best_poly.sub(&Poly::identity(P));
        assert!(diff.cheb_abs_sum().lt(&Real::pow2(-100, P)));
    }

    #[test]
    fn abs_degree_one_is_half() {
        // E_1(|x|) = 1/2 with best polynomial 1/2 (odd part cancels)
        let f = TargetFunction::from_builtin(Builtin::Abs, P);
        let res = remez_exchange(&f, 1, &tol()).unwrap();
        assert!(
            res.error.sub(&r(0.5), P).abs().lt(&Real::parse("1e-12", P).unwrap()),
            "error {}",
            res.error
        );
        assert_eq!(res.alternation_points.len(), 3);
        // residual alternates with magnitude close to the error
        check_equioscillation(&f, &res);
    }

    #[test]
    fn square_degree_one_is_half() {
        // x^2 = (T_0 + T_2)/2: E_1 = ||T_2||/2 = 1/2
        let sq = Poly::from_mono(&[r(0.0), r(0.0), r(1.0)], P);
        let f = TargetFunction::from_poly(sq);
        let res = remez_exchange(&f, 1, &tol()).unwrap();
        assert!(
            res.error.sub(&r(0.5), P).abs().lt(&Real::parse("1e-12", P).unwrap()),
            "error {}",
            res.error
        );
        check_equioscillation(&f, &res);
    }

    #[test]
    fn t8_at_low_degree_gives_unit_error() {
        let mut c = vec![Real::zero(); 9];
        c[8] = Real::one();
        let f = TargetFunction::from_series(c, P);
        let res = remez_exchange(&f, 4, &tol()).unwrap();
        assert!(
            res.error.sub(&Real::one(), P).abs().lt(&Real::parse("1e-10", P).unwrap()),
            "error {}",
            res.error
        );
        // the best approximation is 0
        assert!(res.best_poly.cheb_abs_sum().lt(&Real::parse("1e-10", P).unwrap()));
        check_equioscillation(&f, &res);
    }

    fn check_equioscillation(f: &TargetFunction, res: &ApproxResult) {
        let p = P;
        assert_eq!(res.alternation_points.len(), res.n + 2);
        let mut prev_sign = 0i8;
        for w in res.alternation_points.windows(2) {
            assert!(w[0].lt(&w[1]), "alternation points not increasing");
        }
        if res.error.le(&Real::pow2(-100, p)) {
            return; // exact representation: alternation is vacuous
        }
        let floor = res.error.mul(&Real::one().sub(&r(1e-10), p), p);
        for x in &res.alternation_points {
            let resid = f.eval(x).sub(&res.best_poly.evaluate(x), p);
            assert!(
                resid.abs().ge(&floor),
                "residual {} below error floor {}",
                resid.abs(),
                floor
            );
            let s = resid.signum_i();
            assert!(s != 0);
            if prev_sign != 0 {
                assert_eq!(s, -prev_sign, "signs do not alternate");
            }
            prev_sign = s;
        }
    }

    #[test]
    fn sequence_for_identity() {
        // E_0(x) = 1 (odd function), then exact from degree 1 on
        let f = TargetFunction::from_poly(Poly::identity(P));
        let rep = approx_sequence(&f, &[0, 1, 2], &tol()).unwrap();
        let e0 = rep.results[0].1.as_ref().unwrap();
        assert!(e0.error.sub(&Real::one(), P).abs().lt(&Real::parse("1e-10", P).unwrap()));
        for (d, res) in &rep.results[1..] {
            let res = res.as_ref().unwrap();
            assert!(res.error.le(&Real::parse("1e-30", P).unwrap()), "degree {d}");
        }
        assert!(rep.monotonicity_violations.is_empty());
    }

    #[test]
    fn sequence_rejects_unsorted_degrees() {
        let f = TargetFunction::from_builtin(Builtin::Abs, P);
        assert!(matches!(
            approx_sequence(&f, &[3, 1], &tol()),
            Err(RemezError::BadDegrees)
        ));
    }

    #[test]
    fn zero_function_sequence() {
        let f = TargetFunction::from_poly(Poly::zero(P));
        let rep = approx_sequence(&f, &[0, 1, 3], &tol()).unwrap();
        for (_, res) in &rep.results {
            assert!(res.as_ref().unwrap().error.le(&Real::pow2(-100, P)));
        }
    }

    #[test]
    fn e_star_examples() {
        // e^-5 dominates 1e-10; 0.5 dominates e^-5; e^0 = 1 at n = 0
        let v = e_star(&Real::parse("1e-10", P).unwrap(), 5, P);
        let e5 = Real::from_i64(-5, P).exp(P);
        assert!(v.sub(&e5, P).is_zero());
        let v = e_star(&r(0.5), 5, P);
        assert!(v.sub(&r(0.5), P).is_zero());
        let v = e_star(&Real::zero(), 0, P);
        assert!(v.sub(&Real::one(), P).is_zero());
    }

    #[test]
    fn beurling_examples() {
        // e_n = 1: sum is 0
        let errs: Vec<Real> = (0..100).map(|_| Real::one()).collect();
        let s = beurling_partial_sum(&errs, P).unwrap();
        assert!(s.is_zero());

        // e_n = e^(-beta n): sum = beta * H_N
        let beta = r(0.7);
        let n = 500usize;
        let errs: Vec<Real> = (1..=n)
            .map(|k| beta.neg().mul(&Real::from_u64(k as u64, P), P).exp(P))
            .collect();
        let s = beurling_partial_sum(&errs, P).unwrap();
        let mut h = Real::zero();
        for k in 1..=n {
            h = h.add(&Real::one().div(&Real::from_u64(k as u64, P), P), P);
        }
        let expect = beta.mul(&h, P);
        assert!(
            s.sub(&expect, P).abs().lt(&Real::parse("1e-50", P).unwrap()),
            "{s} vs {expect}"
        );

        // e_n = e^(-n^2): every term is 1
        let errs: Vec<Real> = (1..=50u64)
            .map(|k| Real::from_i64(-((k * k) as i64), P).exp(P))
            .collect();
        let s = beurling_partial_sum(&errs, P).unwrap();
        assert!(s.sub(&r(50.0), P).abs().lt(&Real::parse("1e-50", P).unwrap()));

        // nonpositive entries are rejected
        assert!(matches!(
            beurling_partial_sum(&[Real::zero()], P),
            Err(RemezError::BadSequence(_))
        ));
    }

    #[test]
    fn tail_bound_mode() {
        // f = e^-4 T_4 + e^-16 T_16: E_4 bracket around e^-16
        let p = P;
        let mut c = vec![Real::zero(); 17];
        c[4] = Real::from_i64(-4, p).exp(p);
        c[16] = Real::from_i64(-16, p).exp(p);
        let f = TargetFunction::from_series(c, p);
        let res = tail_bound_result(&f, 4).unwrap();
        let e16 = Real::from_i64(-16, p).exp(p);
        assert!(res.error.sub(&e16, p).abs().lt(&Real::pow2(-100, p)));
        assert!(res.error_lower.sub(&e16, p).abs().lt(&Real::pow2(-100, p)));
        assert_eq!(res.mode, ApproxMode::TailBound);
    }
}
