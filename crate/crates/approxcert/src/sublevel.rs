//! Certified sublevel sets of polynomials: `{x in [-1,1] : |P(x)| <= t}` as
//! an exact interval union, via root isolation in the Chebyshev basis.
//!
//! Isolation is subdivision with certified range exclusion (derivative
//! bounds); brackets are polished by safeguarded Newton iteration down to
//! endpoint accuracy 2^(-precision/2). Cells that cannot be decided at that
//! width (tangencies) are reported as ambiguous width, never silently
//! classified.

use thiserror::Error;

use crate::cheb;
use crate::interval::IntervalSet;
use crate::poly::Poly;
use crate::real::Real;

#[derive(Debug, Error)]
pub enum SublevelError {
    #[error("threshold must be positive, got {0}")]
    BadThreshold(String),
    #[error("sublevel set of the zero polynomial is undefined")]
    ZeroPolynomial,
    #[error("root isolation budget exhausted")]
    IsolationBudget,
    #[error("cell budget exhausted: bracket [{lower}, {upper}]")]
    BudgetExceeded { lower: String, upper: String },
    #[error(transparent)]
    Poly(#[from] crate::poly::PolyError),
}

/// A certified sublevel set.
#[derive(Clone, Debug)]
pub struct SublevelSet {
    pub set: IntervalSet,
    pub threshold: Real,
    /// Set when the threshold is at or above the certified sup norm, so the
    /// sublevel set is all of [-1, 1].
    pub degenerate_threshold: bool,
    /// Total width of undecided tangency cells (each at most 2^(-p/2) wide).
    pub ambiguous_width: Real,
}

impl SublevelSet {
    pub fn measure(&self, p: usize) -> Real {
        self.set.total_length(p)
    }
}

/// All solutions of `P(x) = level` in [-1, 1], plus undecided cells.
struct Crossings {
    roots: Vec<Real>,
    ambiguous: Vec<(Real, Real)>,
}

fn level_crossings(poly: &Poly, level: &Real) -> Result<Crossings, SublevelError> {
    let p = poly.precision_bits();
    let mut q: Vec<Real> = poly.cheb_coeffs().to_vec();
    if q.is_empty() {
        q.push(Real::zero());
    }
    q[0] = q[0].sub(level, p);

    let abs_sum = cheb::one_norm_up(&q, p);
    let d1 = cheb::differentiate(&q, p);
    let d1_abs = cheb::one_norm_up(&d1, p);
    let d2 = cheb::differentiate(&d1, p);
    let d2_abs = cheb::one_norm_up(&d2, p);
    let half = Real::from_f64(0.5, p);
    let h_ambig = Real::pow2(-(p as i64) / 2, p);
    let root_tol = Real::pow2(-(p as i64) / 2 - 4, p);

    let eval = |x: &Real| cheb::clenshaw_with_err(&q, x, p, &abs_sum);
    let eval_d = |x: &Real| cheb::clenshaw_with_err(&d1, x, p, &d1_abs);

    let lo = Real::from_i64(-1, p);
    let hi = Real::from_i64(1, p);
    let (vlo, elo) = eval(&lo);
    let (vhi, ehi) = eval(&hi);
    let mut roots: Vec<Real> = vec![];
    // a value indistinguishable from zero marks a root directly
    if vlo.abs().le(&elo) {
        roots.push(lo.clone());
    }
    if vhi.abs().le(&ehi) {
        roots.push(hi.clone());
    }
    let mut stack = vec![(lo, hi, vlo, vhi)];
    let mut ambiguous: Vec<(Real, Real)> = vec![];
    let mut budget = 4_000_000usize;

    while let Some((a, b, va, vb)) = stack.pop() {
        if budget == 0 {
            return Err(SublevelError::IsolationBudget);
        }
        budget -= 1;
        let h = b.sub(&a, p);
        let hh = h.mul(&half, p);

        // Split point: prefer the midpoint, but nudge off roots so both
        // children get endpoints with a certified sign (a root landing on a
        // cell boundary would otherwise never produce a sign change).
        let mid = a.add(&b, p).mul(&half, p);
        let step = h.mul(&Real::pow2(-4, p), p);
        let mut split = mid.clone();
        let mut vm = Real::zero();
        let mut em = Real::zero();
        let mut split_ok = false;
        let mut hit_zero_at: Option<Real> = None;
        for k in [0i64, 1, -1, 2, -2, 3, -3] {
            let cand = mid.add(&step.mul(&Real::from_i64(k, p), p), p);
            let (v, e) = eval(&cand);
            if v.abs().gt(&e) {
                split = cand;
                vm = v;
                em = e;
                split_ok = true;
                break;
            }
            if hit_zero_at.is_none() {
                hit_zero_at = Some(cand);
            }
        }
        if let Some(z) = hit_zero_at {
            roots.push(z);
        }
        if !split_ok {
            // |Q| below evaluation noise across the middle of the cell
            if h.le(&h_ambig) {
                ambiguous.push((a, b));
            } else {
                let (v, e) = eval(&mid);
                stack.push((mid.clone(), b, v.clone(), vb));
                stack.push((a, mid, va, v));
                let _ = e;
            }
            continue;
        }

        // certified range exclusion on the cell (second-order around split)
        let (dv, de) = eval_d(&split);
        let slope1 = hh.mul_up(&d1_abs, p);
        let slope2 = hh
            .mul_up(&dv.abs().add_up(&de, p), p)
            .add_up(&hh.mul_up(&hh, p).mul_up(&d2_abs, p).mul_up(&half, p), p);
        let radius = slope1.min(&slope2);
        if vm.abs().sub_down(&em, p).gt(&radius) {
            continue; // no zero of Q in the cell
        }
        if h.le(&h_ambig) {
            // cannot be excluded and cannot shrink further
            if va.signum_i() * vb.signum_i() < 0 {
                roots.push(polish_root(&q, &d1, &a, &b, &va, &vb, &root_tol, p));
            } else {
                ambiguous.push((a, b));
            }
            continue;
        }

        let handle_child = |stack: &mut Vec<(Real, Real, Real, Real)>,
                            roots: &mut Vec<Real>,
                            ca: Real,
                            cb: Real,
                            cva: Real,
                            cvb: Real| {
            let chh = cb.sub(&ca, p);
            let sign_change = cva.signum_i() * cvb.signum_i() < 0;
            if sign_change {
                let m2 = ca.add(&cb, p).mul(&half, p);
                let (dv2, de2) = eval_d(&m2);
                let mono = dv2
                    .abs()
                    .sub_down(&de2, p)
                    .gt(&chh.mul(&half, p).mul_up(&d2_abs, p));
                if mono || chh.le(&h_ambig) {
                    roots.push(polish_root(&q, &d1, &ca, &cb, &cva, &cvb, &root_tol, p));
                    return;
                }
            }
            stack.push((ca, cb, cva, cvb));
        };

        handle_child(&mut stack, &mut roots, split.clone(), b, vm.clone(), vb);
        handle_child(&mut stack, &mut roots, a, split, va, vm);
    }
    roots.sort_by(|x, y| x.cmp_total(y));
    // merge root candidates recorded at several subdivision levels
    let merge_tol = root_tol.mul(&Real::from_u64(16, p), p);
    let mut merged: Vec<Real> = vec![];
    for r in roots {
        match merged.last() {
            Some(last) if r.sub(last, p).abs().le(&merge_tol) => {}
            _ => merged.push(r),
        }
    }
    Ok(Crossings {
        roots: merged,
        ambiguous,
    })
}

/// Safeguarded Newton within a sign-change bracket.
#[allow(clippy::too_many_arguments)]
fn polish_root(
    q: &[Real],
    d1: &[Real],
    a0: &Real,
    b0: &Real,
    va0: &Real,
    vb0: &Real,
    tol: &Real,
    p: usize,
) -> Real {
    let mut a = a0.clone();
    let mut b = b0.clone();
    let mut sa = va0.signum_i();
    let _ = vb0;
    let half = Real::from_f64(0.5, p);
    let mut x = a.add(&b, p).mul(&half, p);
    for _ in 0..(p + 64) {
        if b.sub(&a, p).le(tol) {
            break;
        }
        let v = cheb::clenshaw(q, &x, p);
        let sv = v.signum_i();
        if sv == 0 {
            return x;
        }
        if sv == sa {
            a = x.clone();
        } else {
            b = x.clone();
        }
        // Newton proposal, kept inside the bracket
        let d = cheb::clenshaw(d1, &x, p);
        let mut next = if d.is_zero() {
            a.add(&b, p).mul(&half, p)
        } else {
            x.sub(&v.div(&d, p), p)
        };
        if !(a.lt(&next) && next.lt(&b)) {
            next = a.add(&b, p).mul(&half, p);
        }
        x = next;
        if sa == 0 {
            sa = cheb::clenshaw(q, &a, p).signum_i();
        }
    }
    a.add(&b, p).mul(&half, p)
}

/// `{x in [-1,1]: |P(x)| <= threshold}` as an exact interval union.
pub fn poly_sublevel(poly: &Poly, threshold: &Real) -> Result<SublevelSet, SublevelError> {
    let p = poly.precision_bits();
    if !threshold.is_positive() {
        return Err(SublevelError::BadThreshold(threshold.to_decimal()));
    }
    if poly.is_zero() {
        return Ok(SublevelSet {
            set: IntervalSet::full(p),
            threshold: threshold.clone(),
            degenerate_threshold: true,
            ambiguous_width: Real::zero(),
        });
    }

    let up = level_crossings(poly, threshold)?;
    let down = level_crossings(poly, &threshold.neg())?;

    let mut breaks: Vec<Real> = vec![Real::from_i64(-1, p)];
    breaks.extend(up.roots.iter().cloned());
    breaks.extend(down.roots.iter().cloned());
    breaks.push(Real::from_i64(1, p));
    breaks.sort_by(|x, y| x.cmp_total(y));

    let half = Real::from_f64(0.5, p);
    let mut pairs: Vec<(Real, Real)> = vec![];
    for w in breaks.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.ge(b) {
            continue;
        }
        let m = a.add(b, p).mul(&half, p);
        let v = poly.evaluate(&m).abs();
        if v.le(threshold) {
            pairs.push((a.clone(), b.clone()));
        }
    }
    let set = IntervalSet::from_pairs(pairs, p);

    let mut ambiguous_width = Real::zero();
    for (a, b) in up.ambiguous.iter().chain(down.ambiguous.iter()) {
        if !set.contains_point(&a.add(b, p).mul(&half, p)) {
            ambiguous_width = ambiguous_width.add_up(&b.sub(a, p), p);
        }
    }

    // Degenerate threshold: the set is all of [-1, 1] because t is at or
    // above the certified sup norm.
    let mut degenerate = false;
    let is_full = set.intervals().len() == 1 && {
        let iv = &set.intervals()[0];
        iv.lo.le(&Real::from_i64(-1, p)) && iv.hi.ge(&Real::from_i64(1, p))
    };
    if is_full {
        let quick = poly.cheb_abs_sum();
        if threshold.ge(&quick) {
            degenerate = true;
        } else {
            let tol = threshold.mul(&Real::pow2(-24, p), p);
            if let Ok(n) = poly.sup_norm(&IntervalSet::full(p), &tol) {
                degenerate = threshold.ge(&n.lower);
            }
        }
    }

    Ok(SublevelSet {
        set,
        threshold: threshold.clone(),
        degenerate_threshold: degenerate,
        ambiguous_width,
    })
}

/// The normalized sublevel set at threshold `e^(-delta n) ||P||`.
pub fn e_set(poly: &Poly, delta: &Real) -> Result<SublevelSet, SublevelError> {
    let p = poly.precision_bits();
    if poly.is_zero() {
        return Err(SublevelError::ZeroPolynomial);
    }
    if !delta.is_positive() {
        return Err(SublevelError::BadThreshold(delta.to_decimal()));
    }
    let n = poly.degree();
    let quick = poly.cheb_abs_sum();
    let tol = quick.mul(&Real::pow2(-(p as i64) / 2, p), p);
    let sup = poly.sup_norm(&IntervalSet::full(p), &tol)?;
    let sup_mid = sup
        .lower
        .add(&sup.upper, p)
        .mul(&Real::from_f64(0.5, p), p);
    let threshold = delta
        .neg()
        .mul(&Real::from_u64(n as u64, p), p)
        .exp(p)
        .mul(&sup_mid, p);
    poly_sublevel(poly, &threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: usize = 256;

    fn r(v: f64) -> Real {
        Real::from_f64(v, P)
    }

    /// Dense-grid indicator quadrature, independent of the isolation path.
    /// Refines until two grid resolutions agree within `tol`.
    fn grid_measure_oracle(poly: &Poly, t: &Real, tol: f64) -> f64 {
        let tf = t.to_f64();
        let mut prev = -1.0f64;
        let mut n = 1 << 12;
        loop {
            let mut count = 0usize;
            for i in 0..n {
                let x = -1.0 + (2.0 * i as f64 + 1.0) / n as f64;
                let v = poly.evaluate(&Real::from_f64(x, P)).to_f64();
                if v.abs() <= tf {
                    count += 1;
                }
            }
            let m = 2.0 * count as f64 / n as f64;
            if (m - prev).abs() < tol || n >= (1 << 22) {
                return m;
            }
            prev = m;
            n *= 2;
        }
    }

    #[test]
    fn t2_threshold_one_is_degenerate() {
        let t2 = Poly::chebyshev(2, P);
        let s = poly_sublevel(&t2, &Real::one()).unwrap();
        assert!(s.degenerate_threshold);
        let len = s.measure(P);
        assert!(len.sub(&r(2.0), P).abs().lt(&Real::pow2(-100, P)));
    }

    #[test]
    fn t2_closed_form() {
        // |2x^2 - 1| <= t  <=>  x^2 in [(1-t)/2, (1+t)/2]
        let t2 = Poly::chebyshev(2, P);
        for t in [0.1f64, 0.5, 0.9] {
            let tt = Real::parse(&format!("{t}"), P).unwrap();
            let s = poly_sublevel(&t2, &tt).unwrap();
            let half = r(0.5);
            let expect = Real::one()
                .add(&tt, P)
                .mul(&half, P)
                .sqrt(P)
                .sub(&Real::one().sub(&tt, P).mul(&half, P).sqrt(P), P)
                .mul(&r(2.0), P);
            let got = s.measure(P);
            assert!(
                got.sub(&expect, P).abs().lt(&Real::parse("1e-30", P).unwrap()),
                "t={t}: {got} vs {expect}"
            );
            assert_eq!(s.set.intervals().len(), 2);
        }
    }

    #[test]
    fn constant_above_threshold_is_empty() {
        let c = Poly::constant(r(0.8), P);
        let s = poly_sublevel(&c, &r(0.25)).unwrap();
        assert!(s.set.is_empty());
        assert!(s.measure(P).is_zero());
    }

    #[test]
    fn e_set_power_function() {
        // |x^n| <= e^-(delta n)  <=>  |x| <= e^-delta, length 2 e^-delta
        for n in [5usize, 9, 16] {
            let mut mono = vec![r(0.0); n + 1];
            mono[n] = Real::one();
            let xn = Poly::from_mono(&mono, P);
            let delta = r(0.6);
            let s = e_set(&xn, &delta).unwrap();
            let expect = delta.neg().exp(P).mul(&r(2.0), P);
            let got = s.measure(P);
            assert!(
                got.sub(&expect, P).abs().lt(&Real::parse("1e-30", P).unwrap()),
                "n={n}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn e_set_matches_grid_oracle_t4() {
        let t4 = Poly::chebyshev(4, P);
        let s = e_set(&t4, &r(0.5)).unwrap();
        let got = s.measure(P).to_f64();
        let oracle = grid_measure_oracle(&t4, &s.threshold, 1e-6);
        assert!((got - oracle).abs() < 1e-4, "{got} vs oracle {oracle}");
    }

    #[test]
    fn e_set_zero_polynomial_errors() {
        let z = Poly::zero(P);
        assert!(matches!(e_set(&z, &r(0.5)), Err(SublevelError::ZeroPolynomial)));
    }

    #[test]
    fn monotone_in_threshold() {
        let t5 = Poly::chebyshev(5, P);
        let s1 = poly_sublevel(&t5, &r(0.2)).unwrap();
        let s2 = poly_sublevel(&t5, &r(0.6)).unwrap();
        assert!(s1.set.subset_of(&s2.set));
        assert!(s1.measure(P).le(&s2.measure(P)));
    }

    #[test]
    fn scaling_invariance_of_e_set() {
        let q = Poly::from_cheb(vec![r(0.1), r(-0.4), r(0.3), r(0.7), r(-0.2)], P);
        let s1 = e_set(&q, &r(0.8)).unwrap();
        let s2 = e_set(&q.scale(&r(-17.5)), &r(0.8)).unwrap();
        let d = s1.measure(P).sub(&s2.measure(P), P).abs();
        assert!(d.lt(&Real::parse("1e-35", P).unwrap()), "{d}");
    }
}
