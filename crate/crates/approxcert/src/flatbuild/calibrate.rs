//! Empirical calibration of the configuration constant: measures the actual
//! constants in the series sup bound, the factorial-form truncation bound,
//! the sine-composition bound, and the end-to-end cancellation bound, and
//! reports whether a given budget covers them.

use serde::Serialize;

use crate::real::Real;

use super::rpoly::r_poly;
use super::series::{phi_series, SeriesError};
use super::upoly::u_poly;

#[derive(Clone, Debug, Serialize)]
pub struct CalibrationReport {
    /// max over n of sup |Phi_{n,l}| on [-1,1] for all tested l (series sup).
    pub series_sup_constant: String,
    /// smallest l per n from which the series sup stays within the budget.
    pub series_sup_l0: Vec<(usize, usize)>,
    /// per-order constants for the factorial-form truncation bound on
    /// |u| <= 1/2: measured max of |Phi_n - Phi_{n,l}| (l+1)! / (2|u|)^(l+1).
    pub remainder_constant_by_l: Vec<(usize, String)>,
    pub remainder_constant_max: String,
    /// max of |u_n(t)| / min(1, n|t|) over odd n and a dense grid.
    pub sine_bound_constant: String,
    /// per-order constants for the end-to-end cancellation bound on
    /// |t| <= 1/n: |t + R_{n,l}(t)| (l+1)! / (2n|t|)^(l+1).
    pub cancellation_constant_by_l: Vec<(usize, String)>,
    pub cancellation_constant_max: String,
    pub budget: String,
    pub budget_sufficient: bool,
}

pub struct CalibrationOptions {
    pub n_max_series: usize,
    pub l_max: usize,
    pub sine_n_max: usize,
    pub sine_grid: usize,
    pub grid: usize,
    pub prec: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            n_max_series: 21,
            l_max: 30,
            sine_n_max: 99,
            sine_grid: 10_000,
            grid: 48,
            prec: 256,
        }
    }
}

/// Runs the calibration sweeps and reports the measured constants.
pub fn calibrate(budget: &Real, opts: &CalibrationOptions) -> Result<CalibrationReport, SeriesError> {
    let p = opts.prec;
    let one = Real::one();
    let two = Real::from_u64(2, p);
    let half = one.div(&two, p);

    // series sup constants and l0 search
    let mut series_sup = Real::zero();
    let mut l0s = vec![];
    for n in (3..=opts.n_max_series).step_by(2) {
        let s = phi_series(n, opts.l_max + 10, p)?;
        // partial sums at w = 1 are the sup norms (nonnegative coefficients)
        let mut partial = Real::zero();
        let mut sups = vec![];
        for k in 0..=opts.l_max + 10 {
            partial = partial.add_up(&s.coeffs[k], p);
            sups.push(partial.clone());
        }
        // smallest l such that the sup stays within budget for l..l+10
        let mut l0 = None;
        for l in 1..=opts.l_max {
            if (l..=l + 10).all(|lp| sups[lp].le(budget)) {
                l0 = Some(l);
                break;
            }
        }
        l0s.push((n, l0.unwrap_or(opts.l_max + 1)));
        series_sup = series_sup.max(&sups[opts.l_max + 10]);
    }

    // factorial-form truncation constants on |u| <= 1/2
    let mut rem_by_l: Vec<(usize, Real)> = (1..=opts.l_max).map(|l| (l, Real::zero())).collect();
    for n in (3..=opts.n_max_series).step_by(2) {
        let s_full = phi_series(n, opts.l_max, p)?;
        let n_real = Real::from_u64(n as u64, p);
        for gi in 1..=opts.grid {
            let u = half.mul(&Real::from_f64(gi as f64 / opts.grid as f64, p), p);
            // reference value by the transcendental route
            let exact = u.asin(p).div(&n_real, p).sin(p).mul(&n_real, p);
            // partial sums, reusing one Horner pass per order
            for (l, worst) in rem_by_l.iter_mut() {
                let approx = PhiPrefix::eval(&s_full.coeffs[..=*l], &u, p);
                let err = exact.sub(&approx, p).abs();
                let denom = two.mul(&u, p).powi(*l + 1, p);
                let mut fact = Real::one();
                for i in 2..=(*l as u64 + 1) {
                    fact = fact.mul(&Real::from_u64(i, p), p);
                }
                let c = err.mul(&fact, p).div(&denom, p);
                if c.gt(worst) {
                    *worst = c;
                }
            }
        }
    }
    let rem_max = rem_by_l
        .iter()
        .fold(Real::zero(), |acc, (_, v)| acc.max(v));

    // sine-composition bound over odd n and a dense grid
    let mut sine_worst = Real::zero();
    for n in (1..=opts.sine_n_max).step_by(2) {
        let u = u_poly(n, p)?;
        let n_real = Real::from_u64(n as u64, p);
        for gi in 1..=opts.sine_grid {
            let t = Real::from_f64(gi as f64 / opts.sine_grid as f64, p);
            let v = u.evaluate(&t).abs();
            let cap = one.min(&n_real.mul(&t, p));
            let ratio = v.div(&cap, p);
            if ratio.gt(&sine_worst) {
                sine_worst = ratio;
            }
        }
    }

    // end-to-end cancellation constants on |t| <= 1/n
    let mut canc_by_l: Vec<(usize, Real)> = (1..=opts.l_max).map(|l| (l, Real::zero())).collect();
    for n in (3..=opts.n_max_series).step_by(2) {
        let n_real = Real::from_u64(n as u64, p);
        for (l, worst) in canc_by_l.iter_mut() {
            let r = r_poly(n, *l, p)?;
            let mut fact = Real::one();
            for i in 2..=(*l as u64 + 1) {
                fact = fact.mul(&Real::from_u64(i, p), p);
            }
            for gi in 1..=opts.grid {
                let t = Real::from_f64(gi as f64 / opts.grid as f64, p).div(&n_real, p);
                let resid = t.add(&r.evaluate(&t), p).abs();
                let denom = two.mul(&n_real, p).mul(&t, p).powi(*l + 1, p);
                let c = resid.mul(&fact, p).div(&denom, p);
                if c.gt(worst) {
                    *worst = c;
                }
            }
        }
    }
    let canc_max = canc_by_l
        .iter()
        .fold(Real::zero(), |acc, (_, v)| acc.max(v));

    let sufficient = series_sup.le(budget)
        && rem_max.le(budget)
        && sine_worst.le(&one.add(&Real::pow2(-40, p), p))
        && canc_max.le(budget);

    Ok(CalibrationReport {
        series_sup_constant: series_sup.to_decimal(),
        series_sup_l0: l0s,
        remainder_constant_by_l: rem_by_l
            .into_iter()
            .map(|(l, v)| (l, v.to_decimal()))
            .collect(),
        remainder_constant_max: rem_max.to_decimal(),
        sine_bound_constant: sine_worst.to_decimal(),
        cancellation_constant_by_l: canc_by_l
            .into_iter()
            .map(|(l, v)| (l, v.to_decimal()))
            .collect(),
        cancellation_constant_max: canc_max.to_decimal(),
        budget: budget.to_decimal(),
        budget_sufficient: sufficient,
    })
}

struct PhiPrefix;

impl PhiPrefix {
    fn eval(coeffs: &[Real], w: &Real, p: usize) -> Real {
        let mut s = Real::zero();
        for c in coeffs.iter().rev() {
            s = s.mul(w, p).add(c, p);
        }
        s
    }
}
