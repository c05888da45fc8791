//! The residual operator `chi(x, W)`.
//!
//! For a member index `x` and a set `W`, `chi(x, W)` is `S_y \ W` where
//! `y` minimizes `|S_y \ W|` among indices with `S_y` contained in
//! `S_x ∪ W`, ties broken to the smallest index. `x` itself always
//! qualifies, so the value exists; it is empty exactly when some member
//! is covered by `W`.

use rayon::prelude::*;

use crate::error::Result;
use crate::family::SetFamily;
use crate::set::ElemSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChiResult {
    /// The residual `S_y \ W`.
    pub value: ElemSet,
    /// The minimizing index `y` (1-based, smallest on ties).
    pub witness: usize,
}

impl ChiResult {
    pub fn size(&self) -> usize {
        self.value.len()
    }
}

pub fn chi(family: &SetFamily, x: usize, w: ElemSet) -> Result<ChiResult> {
    let sx = family.set(x)?;
    let hull = sx.union(w);
    let mut best: Option<ChiResult> = None;
    for (i, &sy) in family.sets().iter().enumerate() {
        if !sy.is_subset_of(hull) {
            continue;
        }
        let value = sy.difference(w);
        // ascending scan, strict improvement only: ties keep the smaller y
        if best.map_or(true, |b| value.len() < b.size()) {
            best = Some(ChiResult {
                value,
                witness: i + 1,
            });
        }
    }
    Ok(best.expect("x itself is always a candidate"))
}

/// Smallest index `y` with `S_y ⊆ W`, if any.
pub fn covers(family: &SetFamily, w: ElemSet) -> Option<usize> {
    family
        .sets()
        .iter()
        .position(|s| s.is_subset_of(w))
        .map(|i| i + 1)
}

/// `chi(x, W)` for every `x` in order. Slots are evaluated in parallel;
/// output is identical to the sequential scan.
pub fn chi_profile(family: &SetFamily, w: ElemSet) -> Vec<ChiResult> {
    (1..=family.len())
        .into_par_iter()
        .map(|x| chi(family, x, w).expect("index in range"))
        .collect()
}
