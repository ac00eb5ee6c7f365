//! Maximal N-adic interval covers with a stopping rule.
//!
//! Starting from [-1, 1] split into N equal children per level, the cover
//! collects the maximal N-adic cells I with `|E ∩ I|^exponent >= |I|`. The
//! root itself is excluded from membership by convention. Descent is pruned
//! to cells meeting E, so enormous branching factors are handled as long as
//! E has few components.

use serde::Serialize;
use thiserror::Error;

use crate::interval::IntervalSet;
use crate::real::Real;

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("branching factor must be at least 2")]
    BadBase,
    #[error("exponent must lie in (0, 1)")]
    BadExponent,
    #[error("cover requires a nonempty set")]
    EmptySet,
    #[error("cell budget exhausted while building the cover")]
    CellBudget,
}

/// One accepted cell, together with its parent (for maximality audits).
#[derive(Clone, Debug)]
pub struct CoverCell {
    pub depth: u32,
    pub lo: Real,
    pub hi: Real,
    pub parent_lo: Real,
    pub parent_hi: Real,
    /// |E ∩ I| for this cell.
    pub e_len: Real,
}

/// The cover, its covered mass, and the residual accounting.
#[derive(Clone, Debug)]
pub struct DyadicCover {
    /// Branching factor (an integer value, possibly far beyond u64).
    pub n_base: Real,
    pub exponent: Real,
    pub members: Vec<CoverCell>,
    /// Sum over members of |E ∩ I|.
    pub covered_length: Real,
    /// |E| minus the covered mass (measured exactly from the interval sets).
    pub residual_measure: Real,
    /// A-priori bound for the mass that can escape below the depth limit:
    /// `2 * xi^(1/exponent - 1)` with `xi` the cell width at the limit.
    pub residual_bound: Real,
    pub depth_limit_hit: bool,
}

#[derive(Serialize)]
pub struct CoverJson {
    pub n_base: String,
    pub exponent: String,
    pub member_count: usize,
    pub members: Vec<CoverMemberJson>,
    pub covered_length: String,
    pub residual_measure: String,
    pub residual_bound: String,
    pub depth_limit_hit: bool,
}

#[derive(Serialize)]
pub struct CoverMemberJson {
    pub depth: u32,
    pub lo: String,
    pub hi: String,
    pub e_len: String,
}

impl DyadicCover {
    pub fn to_json(&self) -> CoverJson {
        CoverJson {
            n_base: self.n_base.to_decimal(),
            exponent: self.exponent.to_decimal(),
            member_count: self.members.len(),
            members: self
                .members
                .iter()
                .map(|m| CoverMemberJson {
                    depth: m.depth,
                    lo: m.lo.to_decimal(),
                    hi: m.hi.to_decimal(),
                    e_len: m.e_len.to_decimal(),
                })
                .collect(),
            covered_length: self.covered_length.to_decimal(),
            residual_measure: self.residual_measure.to_decimal(),
            residual_bound: self.residual_bound.to_decimal(),
            depth_limit_hit: self.depth_limit_hit,
        }
    }
}

/// Acceptance rule: `|E ∩ I|^exponent >= |I|`.
fn rule_holds(e_len: &Real, cell_len: &Real, exponent: &Real, p: usize) -> bool {
    if !e_len.is_positive() {
        return false;
    }
    let lhs = e_len.ln(p).mul(exponent, p);
    let rhs = cell_len.ln(p);
    lhs.ge(&rhs)
}

/// Builds the maximal-cell cover of `E` for branching factor `n_base`.
pub fn nadic_maximal_cover(
    e: &IntervalSet,
    n_base: &Real,
    exponent: &Real,
    depth_limit: u32,
    p: usize,
) -> Result<DyadicCover, CoverError> {
    let two = Real::from_u64(2, p);
    if n_base.lt(&two) {
        return Err(CoverError::BadBase);
    }
    if !exponent.is_positive() || exponent.ge(&Real::one()) {
        return Err(CoverError::BadExponent);
    }
    if e.is_empty() {
        return Err(CoverError::EmptySet);
    }

    let mut members: Vec<CoverCell> = vec![];
    let mut depth_limit_hit = false;
    let mut budget = 200_000usize;

    // Cells pending refinement (the rule failed there, or the root).
    let root = (0u32, Real::from_i64(-1, p), Real::from_i64(1, p));
    let mut pending = vec![root];

    while let Some((depth, lo, hi)) = pending.pop() {
        if depth >= depth_limit {
            depth_limit_hit = true;
            continue;
        }
        let width = hi.sub(&lo, p).div(n_base, p);
        // Child index ranges intersecting E (indices kept as integer Reals;
        // they can exceed u64 for very large branching factors).
        let e_here = e.intersect_interval(&lo, &hi, p);
        if e_here.is_empty() {
            continue;
        }
        let mut ranges: Vec<(Real, Real)> = vec![];
        for iv in e_here.intervals() {
            let j0 = iv.lo.sub(&lo, p).div(&width, p).floor();
            let j1 = iv.hi.sub(&lo, p).div(&width, p).floor();
            let j0 = j0.max(&Real::zero());
            let j1 = j1.min(&n_base.sub(&Real::one(), p));
            ranges.push((j0, j1));
        }
        ranges.sort_by(|a, b| a.0.cmp_total(&b.0));
        let mut merged: Vec<(Real, Real)> = vec![];
        for (a, b) in ranges {
            match merged.last_mut() {
                Some(last) if a.le(&last.1.add(&Real::one(), p)) => {
                    if b.gt(&last.1) {
                        last.1 = b;
                    }
                }
                _ => merged.push((a, b)),
            }
        }
        for (j0, j1) in merged {
            let mut j = j0;
            while j.le(&j1) {
                budget = budget.checked_sub(1).ok_or(CoverError::CellBudget)?;
                if budget == 0 {
                    return Err(CoverError::CellBudget);
                }
                let clo = lo.add(&j.mul(&width, p), p);
                let chi = clo.add(&width, p).min(&hi);
                let e_cell = e.intersect_interval(&clo, &chi, p);
                let e_len = e_cell.total_length(p);
                let cell_len = chi.sub(&clo, p);
                if rule_holds(&e_len, &cell_len, exponent, p) {
                    members.push(CoverCell {
                        depth: depth + 1,
                        lo: clo,
                        hi: chi,
                        parent_lo: lo.clone(),
                        parent_hi: hi.clone(),
                        e_len,
                    });
                } else if e_len.is_positive() {
                    pending.push((depth + 1, clo, chi));
                }
                j = j.add(&Real::one(), p);
            }
        }
    }

    members.sort_by(|a, b| a.lo.cmp_total(&b.lo));
    let mut covered = Real::zero();
    for m in &members {
        covered = covered.add(&m.e_len, p);
    }
    let total = e.total_length(p);
    let residual_measure = total.sub(&covered, p).max(&Real::zero());

    // xi = cell width at the depth limit; escape bound 2 xi^(1/alpha - 1)
    let xi = two.div(&n_base.powi(depth_limit as usize, p), p);
    let expo = Real::one().div(exponent, p).sub(&Real::one(), p);
    let residual_bound = two.mul_up(&xi.pow(&expo, p), p).min(&total);

    Ok(DyadicCover {
        n_base: n_base.clone(),
        exponent: exponent.clone(),
        members,
        covered_length: covered,
        residual_measure,
        residual_bound,
        depth_limit_hit,
    })
}

/// Audits the cover invariants: disjoint members, rule holds at each member,
/// rule fails at each parent (the root is exempt by convention), and the
/// superadditive chain `sum |I| >= (1/N) (sum |E ∩ I|)^exponent`.
pub fn audit_cover(cover: &DyadicCover, e: &IntervalSet, p: usize) -> Result<(), String> {
    for w in cover.members.windows(2) {
        if w[0].hi.gt(&w[1].lo) {
            return Err("members overlap".into());
        }
    }
    for m in &cover.members {
        let cell_len = m.hi.sub(&m.lo, p);
        let e_len = e.intersect_interval(&m.lo, &m.hi, p).total_length(p);
        if !rule_holds(&e_len, &cell_len, &cover.exponent, p) {
            return Err(format!("rule fails at member [{}, {}]", m.lo, m.hi));
        }
        let parent_is_root =
            m.parent_lo.le(&Real::from_i64(-1, p)) && m.parent_hi.ge(&Real::from_i64(1, p));
        if !parent_is_root {
            let plen = m.parent_hi.sub(&m.parent_lo, p);
            let pe = e
                .intersect_interval(&m.parent_lo, &m.parent_hi, p)
                .total_length(p);
            if rule_holds(&pe, &plen, &cover.exponent, p) {
                return Err(format!(
                    "member [{}, {}] is not maximal: rule holds at its parent",
                    m.lo, m.hi
                ));
            }
        }
    }
    // chain: sum |I| >= (1/N) (sum |E ∩ I|)^alpha
    let mut sum_i = Real::zero();
    let mut sum_e = Real::zero();
    for m in &cover.members {
        sum_i = sum_i.add(&m.hi.sub(&m.lo, p), p);
        sum_e = sum_e.add(&m.e_len, p);
    }
    if sum_e.is_positive() {
        let rhs = sum_e.pow(&cover.exponent, p).div(&cover.n_base, p);
        // allow a sliver of rounding headroom
        let slack = Real::one().add(&Real::pow2(-(p as i64) / 2, p), p);
        if sum_i.mul(&slack, p).lt(&rhs) {
            return Err(format!("superadditive chain fails: {sum_i} < {rhs}"));
        }
    }
    Ok(())
}
