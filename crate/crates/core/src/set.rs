//! Subsets of a ground set `[n]` stored as 64-bit masks.
//!
//! Elements are 1-based: element `e` occupies bit `e - 1`. Everything in
//! this crate is desk scale, so ground sets are capped at [`MAX_GROUND`]
//! elements and all subset arithmetic is branch-free word arithmetic.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported ground-set size.
pub const MAX_GROUND: u32 = 64;

/// A subset of `[64]` as a bitmask. Element `e` is bit `e - 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ElemSet(u64);

impl ElemSet {
    pub const EMPTY: ElemSet = ElemSet(0);

    pub fn empty() -> Self {
        ElemSet(0)
    }

    /// Set containing the single element `e` (1-based, `e <= 64`).
    pub fn singleton(e: u32) -> Self {
        assert!((1..=MAX_GROUND).contains(&e), "element {e} out of range");
        ElemSet(1u64 << (e - 1))
    }

    /// Builds a set from 1-based elements, rejecting out-of-range values
    /// and duplicates.
    pub fn from_elems(elems: &[u32]) -> Result<Self> {
        let mut mask = 0u64;
        for &e in elems {
            if e == 0 || e > MAX_GROUND {
                return Err(Error::InvalidInput(format!(
                    "element {e} out of range 1..={MAX_GROUND}"
                )));
            }
            let bit = 1u64 << (e - 1);
            if mask & bit != 0 {
                return Err(Error::InvalidInput(format!("duplicate element {e}")));
            }
            mask |= bit;
        }
        Ok(ElemSet(mask))
    }

    pub fn from_mask(mask: u64) -> Self {
        ElemSet(mask)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    /// Full ground set `{1, ..., n}`.
    pub fn full(n: u32) -> Self {
        assert!(n <= MAX_GROUND);
        if n == 64 {
            ElemSet(u64::MAX)
        } else {
            ElemSet((1u64 << n) - 1)
        }
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, e: u32) -> bool {
        e >= 1 && e <= MAX_GROUND && self.0 & (1u64 << (e - 1)) != 0
    }

    pub fn insert(&mut self, e: u32) {
        assert!((1..=MAX_GROUND).contains(&e));
        self.0 |= 1u64 << (e - 1);
    }

    pub fn union(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 & other.0)
    }

    pub fn difference(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: ElemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: ElemSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Does every element lie in `1..=n`?
    pub fn within(self, n: u32) -> bool {
        self.is_subset_of(ElemSet::full(n))
    }

    /// Ascending elements.
    pub fn iter(self) -> Elems {
        Elems(self.0)
    }

    pub fn elems(self) -> Vec<u32> {
        self.iter().collect()
    }

    /// The `size` smallest elements (the lexicographically first subset of
    /// this set among subsets of that size).
    pub fn smallest(self, size: usize) -> ElemSet {
        assert!(size <= self.len());
        let mut out = ElemSet::empty();
        for e in self.iter().take(size) {
            out.insert(e);
        }
        out
    }

    /// Order of subsets as ascending element sequences compared
    /// lexicographically. This is not the numeric mask order that `Ord`
    /// provides; use it wherever a canonical "first" witness is required.
    pub fn lex_cmp(self, other: ElemSet) -> Ordering {
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        let low = diff & diff.wrapping_neg(); // lowest differing element
        let above = !(low | (low - 1)); // elements strictly above it
        if self.0 & low != 0 {
            // self owns the smallest differing element; self is smaller
            // unless other has nothing beyond it (other is a strict prefix).
            if other.0 & above == 0 {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        } else if self.0 & above == 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// Iterator over the elements of an [`ElemSet`], ascending.
pub struct Elems(u64);

impl Iterator for Elems {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(tz + 1)
    }
}

/// Elements `1..=n` in order.
pub fn ground_elems(n: u32) -> Vec<u32> {
    (1..=n).collect()
}

/// All `size`-subsets of `pool`, in lexicographic order of their ascending
/// element sequences. `pool` must be strictly increasing.
pub fn combinations(pool: &[u32], size: usize) -> Combinations {
    debug_assert!(pool.windows(2).all(|w| w[0] < w[1]));
    Combinations {
        pool: pool.to_vec(),
        size,
        idx: (0..size).collect(),
        done: size > pool.len(),
    }
}

pub struct Combinations {
    pool: Vec<u32>,
    size: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Iterator for Combinations {
    type Item = ElemSet;

    fn next(&mut self) -> Option<ElemSet> {
        if self.done {
            return None;
        }
        let mut out = ElemSet::empty();
        for &i in &self.idx {
            out.insert(self.pool[i]);
        }
        // advance to the next index tuple
        let n = self.pool.len();
        let k = self.size;
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] != i + n - k {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// All subsets of `{1..n}` in ascending mask order (not lexicographic).
pub fn all_subsets(n: u32) -> impl Iterator<Item = ElemSet> {
    assert!(n < 64, "all_subsets is for small ground sets");
    (0..(1u64 << n)).map(ElemSet::from_mask)
}

/// All non-empty submasks of `set`, in no particular order.
pub fn nonempty_submasks(set: ElemSet) -> impl Iterator<Item = ElemSet> {
    let mask = set.mask();
    let mut sub = mask;
    let mut done = mask == 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let cur = sub;
        sub = (sub.wrapping_sub(1)) & mask;
        if sub == 0 {
            done = true;
        }
        Some(ElemSet::from_mask(cur))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lex_cmp_matches_sequence_order() {
        let mut sets: Vec<ElemSet> = all_subsets(5).collect();
        sets.sort_by(|a, b| a.lex_cmp(*b));
        let seqs: Vec<Vec<u32>> = sets.iter().map(|s| s.elems()).collect();
        let mut sorted = seqs.clone();
        sorted.sort();
        assert_eq!(seqs, sorted);
    }

    #[test]
    fn combinations_lex_order() {
        let got: Vec<Vec<u32>> = combinations(&[1, 2, 3, 4], 2).map(|s| s.elems()).collect();
        assert_eq!(
            got,
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![1, 4],
                vec![2, 3],
                vec![2, 4],
                vec![3, 4]
            ]
        );
    }

    #[test]
    fn combinations_edge_sizes() {
        assert_eq!(combinations(&[1, 2], 0).count(), 1);
        assert_eq!(combinations(&[1, 2], 3).count(), 0);
    }

    #[test]
    fn submask_count() {
        let s = ElemSet::from_elems(&[2, 5, 9]).unwrap();
        assert_eq!(nonempty_submasks(s).count(), 7);
    }

    #[test]
    fn rejects_bad_elements() {
        assert!(ElemSet::from_elems(&[0]).is_err());
        assert!(ElemSet::from_elems(&[65]).is_err());
        assert!(ElemSet::from_elems(&[3, 3]).is_err());
    }
}
