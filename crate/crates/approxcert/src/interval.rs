//! Finite disjoint unions of closed subintervals of [-1, 1].

use serde::{Deserialize, Serialize};

use crate::real::Real;

/// A closed interval `[lo, hi]` (possibly degenerate, `lo == hi`).
#[derive(Clone, Debug)]
pub struct ClosedInterval {
    pub lo: Real,
    pub hi: Real,
}

impl ClosedInterval {
    pub fn new(lo: Real, hi: Real) -> Self {
        assert!(lo.le(&hi), "interval endpoints out of order");
        ClosedInterval { lo, hi }
    }

    pub fn length(&self, p: usize) -> Real {
        self.hi.sub(&self.lo, p)
    }

    pub fn midpoint(&self, p: usize) -> Real {
        self.lo.add(&self.hi, p).div(&Real::from_u64(2, p), p)
    }

    pub fn contains(&self, x: &Real) -> bool {
        self.lo.le(x) && x.le(&self.hi)
    }
}

/// Sorted disjoint union of closed intervals with exact total length.
#[derive(Clone, Debug, Default)]
pub struct IntervalSet {
    intervals: Vec<ClosedInterval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { intervals: vec![] }
    }

    pub fn full(p: usize) -> Self {
        IntervalSet {
            intervals: vec![ClosedInterval::new(
                Real::from_i64(-1, p),
                Real::from_i64(1, p),
            )],
        }
    }

    /// Builds a normalized set: sorts by left endpoint and merges
    /// overlapping or touching intervals (a union of closed intervals).
    pub fn from_pairs(mut pairs: Vec<(Real, Real)>, p: usize) -> Self {
        pairs.retain(|(a, b)| a.le(b));
        pairs.sort_by(|a, b| a.0.cmp_total(&b.0));
        let mut out: Vec<ClosedInterval> = vec![];
        for (lo, hi) in pairs {
            match out.last_mut() {
                Some(last) if lo.le(&last.hi) => {
                    if hi.gt(&last.hi) {
                        last.hi = hi;
                    }
                }
                _ => out.push(ClosedInterval::new(lo, hi)),
            }
        }
        let _ = p;
        IntervalSet { intervals: out }
    }

    pub fn single(lo: Real, hi: Real) -> Self {
        IntervalSet {
            intervals: vec![ClosedInterval::new(lo, hi)],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> &[ClosedInterval] {
        &self.intervals
    }

    pub fn total_length(&self, p: usize) -> Real {
        let mut s = Real::zero();
        for iv in &self.intervals {
            s = s.add(&iv.length(p), p);
        }
        s
    }

    /// Total length rounded up at every step (certified upper bound).
    pub fn total_length_up(&self, p: usize) -> Real {
        let mut s = Real::zero();
        for iv in &self.intervals {
            s = s.add_up(&iv.length(p), p);
        }
        s
    }

    /// Intersection with a single closed interval.
    pub fn intersect_interval(&self, lo: &Real, hi: &Real, p: usize) -> IntervalSet {
        let mut out = vec![];
        for iv in &self.intervals {
            let a = iv.lo.max(lo);
            let b = iv.hi.min(hi);
            if a.le(&b) {
                out.push(ClosedInterval::new(a, b));
            }
        }
        let _ = p;
        IntervalSet { intervals: out }
    }

    /// True when every point of `self` lies in `other` (both are normalized).
    pub fn subset_of(&self, other: &IntervalSet) -> bool {
        'outer: for iv in &self.intervals {
            for cover in &other.intervals {
                if cover.lo.le(&iv.lo) && iv.hi.le(&cover.hi) {
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }

    pub fn contains_point(&self, x: &Real) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }
}

/// Serialized form: decimal-string endpoint pairs plus the total length.
#[derive(Serialize, Deserialize)]
pub struct IntervalSetJson {
    pub intervals: Vec<[String; 2]>,
    pub total_length: String,
}

impl IntervalSet {
    pub fn to_json(&self, p: usize) -> IntervalSetJson {
        IntervalSetJson {
            intervals: self
                .intervals
                .iter()
                .map(|iv| [iv.lo.to_decimal(), iv.hi.to_decimal()])
                .collect(),
            total_length: self.total_length(p).to_decimal(),
        }
    }

    pub fn from_json(j: &IntervalSetJson, p: usize) -> Option<Self> {
        let mut pairs = vec![];
        for [a, b] in &j.intervals {
            pairs.push((Real::parse(a, p)?, Real::parse(b, p)?));
        }
        Some(IntervalSet::from_pairs(pairs, p))
    }
}
