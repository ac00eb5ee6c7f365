//! Certified measure of `{x in [-1,1] : |f(x)| <= t}` for a target function
//! with a stated modulus of continuity.
//!
//! Adaptive bisection: a cell is counted when `|f| <= t` is certified
//! throughout (via the modulus), discarded when `|f| > t` is certified, and
//! split otherwise. The result is a two-sided bracket.

use thiserror::Error;

use crate::real::Real;
use crate::target::TargetFunction;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("threshold and tolerance must be positive")]
    BadParams,
    #[error("cell budget exhausted: bracket [{lower}, {upper}]")]
    BudgetExceeded { lower: String, upper: String },
}

/// A certified enclosure of the sublevel-set measure.
#[derive(Clone, Debug)]
pub struct MeasureBracket {
    pub lower: Real,
    pub upper: Real,
    pub cells_used: usize,
}

/// Options for the bisection loop.
#[derive(Clone, Debug)]
pub struct MeasureOptions {
    /// Stop when `upper - lower <= tol_abs`.
    pub tol_abs: Real,
    /// Also stop when `upper - lower <= tol_rel * lower` (for measures many
    /// orders of magnitude below 1). Zero disables the relative criterion.
    pub tol_rel: Real,
    pub cell_budget: usize,
}

impl MeasureOptions {
    pub fn absolute(tol: Real) -> Self {
        MeasureOptions {
            tol_abs: tol,
            tol_rel: Real::zero(),
            cell_budget: 400_000,
        }
    }

    pub fn relative(tol_rel: Real, floor: Real) -> Self {
        MeasureOptions {
            tol_abs: floor,
            tol_rel,
            cell_budget: 400_000,
        }
    }
}

/// Encloses `|{x : |f(x)| <= t}|` within the requested tolerance.
pub fn measure_sublevel(
    f: &TargetFunction,
    t: &Real,
    opts: &MeasureOptions,
) -> Result<MeasureBracket, MeasureError> {
    let p = f.prec;
    if !t.is_positive() || (!opts.tol_abs.is_positive() && !opts.tol_rel.is_positive()) {
        return Err(MeasureError::BadParams);
    }
    let half = Real::from_f64(0.5, p);

    let mut inside = Real::zero();
    // Undecided cells, processed breadth-first so every boundary sharpens in
    // lockstep and the undecided width shrinks level by level.
    let mut queue: std::collections::VecDeque<(Real, Real)> = std::collections::VecDeque::new();
    queue.push_back((Real::from_i64(-1, p), Real::from_i64(1, p)));
    let mut undecided_width = Real::from_u64(2, p);
    let mut cells = 0usize;

    let done = |inside: &Real, undecided: &Real| -> bool {
        if undecided.le(&opts.tol_abs) {
            return true;
        }
        if opts.tol_rel.is_positive() && inside.is_positive() {
            return undecided.le(&opts.tol_rel.mul(inside, p));
        }
        false
    };

    while let Some((a, b)) = queue.pop_front() {
        if done(&inside, &undecided_width) {
            queue.push_front((a, b));
            break;
        }
        cells += 1;
        if cells > opts.cell_budget {
            queue.push_front((a, b));
            let upper: Real = inside.add(&undecided_width, p);
            return Err(MeasureError::BudgetExceeded {
                lower: inside.to_decimal(),
                upper: upper.to_decimal(),
            });
        }
        let h = b.sub(&a, p);
        let m = a.add(&b, p).mul(&half, p);
        let (v, err) = f.eval_with_err(&m);
        let va = v.abs();
        let omega = f.modulus.eval_up(&h.mul(&half, p), p).add_up(&err, p);
        if va.add_up(&omega, p).le(t) {
            inside = inside.add(&h, p);
            undecided_width = undecided_width.sub(&h, p);
        } else if va.sub_down(&omega, p).gt(t) {
            undecided_width = undecided_width.sub(&h, p);
        } else {
            queue.push_back((a, m.clone()));
            queue.push_back((m, b));
        }
    }

    // Remaining undecided cells belong to the upper bound only.
    let mut upper = inside.clone();
    for (a, b) in &queue {
        upper = upper.add_up(&b.sub(a, p), p);
    }
    Ok(MeasureBracket {
        lower: inside,
        upper,
        cells_used: cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use crate::sublevel::poly_sublevel;
    use crate::target::{Builtin, TargetFunction};

    const P: usize = 192;

    fn r(v: f64) -> Real {
        Real::from_f64(v, P)
    }

    #[test]
    fn identity_function_exact() {
        // |{ |x| <= 0.3 }| = 0.6
        let f = TargetFunction::from_builtin(Builtin::Abs, P);
        let m = measure_sublevel(&f, &r(0.3), &MeasureOptions::absolute(r(1e-12))).unwrap();
        let expect = r(0.6);
        assert!(m.lower.le(&expect) && expect.le(&m.upper));
        assert!(m.upper.sub(&m.lower, P).le(&r(1e-12)));
    }

    #[test]
    fn constant_one_is_empty() {
        let f = TargetFunction::from_poly(Poly::constant(Real::one(), P));
        let m = measure_sublevel(&f, &r(0.5), &MeasureOptions::absolute(r(1e-12))).unwrap();
        assert!(m.upper.le(&r(1e-12)));
        assert!(m.lower.is_zero());
    }

    #[test]
    fn t8_series_cross_checks_poly_sublevel() {
        let mut coeffs = vec![Real::zero(); 9];
        coeffs[8] = Real::one();
        let f = TargetFunction::from_series(coeffs, P);
        let t = r(0.2);
        let m = measure_sublevel(&f, &t, &MeasureOptions::absolute(r(1e-10))).unwrap();
        let direct = poly_sublevel(&Poly::chebyshev(8, P), &t).unwrap().measure(P);
        assert!(
            m.lower.le(&direct) && direct.le(&m.upper),
            "direct {} not in [{}, {}]",
            direct,
            m.lower,
            m.upper
        );
    }

    #[test]
    fn relative_tolerance_for_tiny_sets() {
        // |x| <= 1e-9: measure 2e-9, resolved to 1e-3 relative
        let f = TargetFunction::from_builtin(Builtin::Abs, P);
        let opts = MeasureOptions::relative(r(1e-3), Real::pow2(-90, P));
        let m = measure_sublevel(&f, &r(1e-9), &opts).unwrap();
        let expect = r(2e-9);
        assert!(m.lower.le(&expect) && expect.le(&m.upper));
        let gap = m.upper.sub(&m.lower, P);
        assert!(gap.le(&r(1e-3).mul(&m.lower, P)));
    }
}
