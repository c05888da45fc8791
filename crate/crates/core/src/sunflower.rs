//! Sunflower recognition and extraction.
//!
//! Two extractors: the classical greedy/most-popular-element recursion,
//! and the spreadness route that restricts at a spreadness witness until
//! the family is spread, then looks for disjoint members with random
//! partitions. Every returned sunflower is re-verified structurally.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chi::covers;
use crate::error::{Error, Result};
use crate::family::{
    link_indexed, r_threshold_theorem, spread_check, SetFamily, SpreadParams, SpreadVerdict,
};
use crate::numeric::count_gt_rpow;
use crate::set::ElemSet;

/// `p` member indices whose sets pairwise intersect in exactly `core`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sunflower {
    pub core: ElemSet,
    /// 1-based indices into the family, pairwise distinct.
    pub petals: Vec<usize>,
}

/// If every pairwise intersection of the indexed sets coincides, returns
/// that common core. Indices must be distinct, in range, and at least two.
pub fn is_sunflower(family: &SetFamily, indices: &[usize]) -> Result<Option<ElemSet>> {
    if indices.len() < 2 {
        return Err(Error::InvalidInput("a sunflower needs at least 2 petals".into()));
    }
    let mut seen = indices.to_vec();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("duplicate petal index".into()));
    }
    let sets: Vec<ElemSet> = indices
        .iter()
        .map(|&i| family.set(i))
        .collect::<Result<_>>()?;
    let core = sets[0].intersection(sets[1]);
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            if sets[a].intersection(sets[b]) != core {
                return Ok(None);
            }
        }
    }
    Ok(Some(core))
}

/// Greedy maximal pairwise-disjoint subfamily, scanning in index order.
pub fn greedy_disjoint(family: &SetFamily) -> Vec<usize> {
    let mut taken: Vec<usize> = Vec::new();
    let mut union = ElemSet::empty();
    for (i, s) in family.sets().iter().enumerate() {
        if s.is_disjoint(union) {
            taken.push(i + 1);
            union = union.union(*s);
        }
    }
    taken
}

/// Classical extraction: if a greedy disjoint subfamily reaches `p`
/// sets, done (empty core); otherwise some element lies in more than
/// `l / (k(p-1))` members, so restrict there and recurse, re-attaching
/// the element to the returned core. Requires distinct sets; returns
/// `None` only when the recursion bottoms out, which can happen when
/// `l <= (p-1)^k * k!`.
pub fn find_sunflower_erdos_rado(family: &SetFamily, p: usize) -> Result<Option<Sunflower>> {
    if p < 2 {
        return Err(Error::InvalidInput("p must be at least 2".into()));
    }
    if family.has_duplicates() {
        return Err(Error::InvalidInput(
            "the classical extraction requires distinct sets".into(),
        ));
    }
    let result = erdos_rado_rec(family, p);
    if let Some(sf) = &result {
        debug_assert_eq!(is_sunflower(family, &sf.petals)?, Some(sf.core));
    }
    Ok(result)
}

fn erdos_rado_rec(family: &SetFamily, p: usize) -> Option<Sunflower> {
    let greedy = greedy_disjoint(family);
    if greedy.len() >= p {
        return Some(Sunflower {
            core: ElemSet::empty(),
            petals: greedy[..p].to_vec(),
        });
    }
    if family.k() <= 1 {
        // distinct size-1 sets are pairwise disjoint, so greedy found all
        return None;
    }
    // every member hits the union of the greedy sets; pick the most
    // popular element there, smallest element on ties
    let mut union = ElemSet::empty();
    for &i in &greedy {
        union = union.union(family.set(i).expect("greedy index valid"));
    }
    let popular = union
        .iter()
        .max_by_key(|&e| {
            (
                family.superset_count(ElemSet::singleton(e)),
                std::cmp::Reverse(e),
            )
        })?;
    let e = ElemSet::singleton(popular);
    let (restricted, origin) = link_indexed(family, e).expect("singleton restriction");
    let inner = erdos_rado_rec(&restricted, p)?;
    Some(Sunflower {
        core: inner.core.union(e),
        petals: inner.petals.iter().map(|&i| origin[i - 1]).collect(),
    })
}

/// A partition of `[n]` into `p` blocks, each of size at least
/// `floor(n/p)`.
#[derive(Clone, Debug)]
pub struct PartitionSample {
    pub parts: Vec<ElemSet>,
}

impl PartitionSample {
    /// Structural validity: disjoint blocks covering `[n]` exactly, with
    /// the size floor.
    pub fn validate(&self, n: u32) -> bool {
        let p = self.parts.len();
        let floor = n as usize / p;
        let mut union = ElemSet::empty();
        let mut total = 0usize;
        for part in &self.parts {
            if part.len() < floor || !union.is_disjoint(*part) {
                return false;
            }
            union = union.union(*part);
            total += part.len();
        }
        union == ElemSet::full(n) && total == n as usize
    }
}

/// Uniformly random permutation of `[n]` cut into `p` consecutive
/// blocks; the remainder `n mod p` is distributed one element each to the
/// first blocks. Deterministic in `seed`.
pub fn sample_partition(n: u32, p: usize, seed: u64) -> Result<PartitionSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_partition_rng(n, p, &mut rng)
}

pub(crate) fn sample_partition_rng(
    n: u32,
    p: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PartitionSample> {
    if p == 0 || (n as usize) < p {
        return Err(Error::InvalidInput(format!(
            "cannot partition [{n}] into {p} non-trivial blocks"
        )));
    }
    let mut perm: Vec<u32> = (1..=n).collect();
    perm.shuffle(rng);
    let base = n as usize / p;
    let remainder = n as usize % p;
    let mut parts = Vec::with_capacity(p);
    let mut start = 0usize;
    for i in 0..p {
        let size = base + usize::from(i < remainder);
        let mut part = ElemSet::empty();
        for &e in &perm[start..start + size] {
            part.insert(e);
        }
        parts.push(part);
        start += size;
    }
    Ok(PartitionSample { parts })
}

/// Samples partitions until every block covers some member set; returns
/// the covering indices (one per block, pairwise disjoint sets) or `None`
/// after `max_iters` failures. Absence is a legitimate outcome: the
/// probabilistic guarantee only applies above the threshold regime.
pub fn find_disjoint_by_partition(
    family: &SetFamily,
    p: usize,
    max_iters: u64,
    seed: u64,
) -> Result<Option<Vec<usize>>> {
    if p == 0 || (family.n() as usize) < p {
        return Err(Error::InvalidInput(format!(
            "need n >= p, got n={} p={p}",
            family.n()
        )));
    }
    if family.k() == 0 {
        return Ok(None); // empty sets cover every block at one index
    }
    for trial in 0..max_iters {
        // independent stream per trial so trials could run concurrently
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let partition = sample_partition_rng(family.n(), p, &mut rng)?;
        let mut indices = Vec::with_capacity(p);
        let mut all = true;
        for part in &partition.parts {
            match covers(family, *part) {
                Some(y) => indices.push(y),
                None => {
                    all = false;
                    break;
                }
            }
        }
        if all {
            debug_assert!(pairwise_disjoint(family, &indices));
            return Ok(Some(indices));
        }
    }
    Ok(None)
}

fn pairwise_disjoint(family: &SetFamily, indices: &[usize]) -> bool {
    let mut union = ElemSet::empty();
    for &i in indices {
        let s = family.set(i).expect("index valid");
        if !s.is_disjoint(union) {
            return false;
        }
        union = union.union(s);
    }
    true
}

/// Spreadness-based extraction. Computes `r = alpha * p * log2(pk)`; on a
/// spreadness violation restricts at the witness and recurses, re-attaching
/// the witness to the core; on a spread family with more than `r^k`
/// members runs the random-partition search for `p` disjoint sets. Size-1
/// members short-circuit: any `p` distinct singletons form a sunflower.
///
/// With `allow_repeats`, a set repeated at least `p` times is returned as
/// a degenerate sunflower (its own core); by default petal sets must be
/// distinct.
pub fn find_sunflower_spread(
    family: &SetFamily,
    p: usize,
    params: &SpreadParams,
    max_iters: u64,
    seed: u64,
    allow_repeats: bool,
) -> Result<Option<Sunflower>> {
    if p < 2 {
        return Err(Error::InvalidInput("p must be at least 2".into()));
    }
    params.validate()?;
    let result = spread_rec(family, p, params, max_iters, seed, allow_repeats)?;
    if let Some(sf) = &result {
        let verified = is_sunflower(family, &sf.petals)?;
        assert_eq!(verified, Some(sf.core), "extractor soundness");
    }
    Ok(result)
}

fn spread_rec(
    family: &SetFamily,
    p: usize,
    params: &SpreadParams,
    max_iters: u64,
    seed: u64,
    allow_repeats: bool,
) -> Result<Option<Sunflower>> {
    let l = family.len();
    if l == 0 {
        return Ok(None);
    }
    let k = family.k();
    if k == 0 {
        // only the empty set remains; a sunflower needs p copies
        if allow_repeats && l >= p {
            return Ok(Some(Sunflower {
                core: ElemSet::empty(),
                petals: (1..=p).collect(),
            }));
        }
        return Ok(None);
    }
    if k == 1 {
        return Ok(singleton_base_case(family, p, allow_repeats));
    }
    let r = r_threshold_theorem(&params.alpha, p as u64, k)?;
    let report = spread_check(family, &r);
    match report.verdict {
        SpreadVerdict::Violated => {
            let witness = report.witness.expect("violation carries a witness").z;
            let (restricted, origin) = link_indexed(family, witness)?;
            let inner = spread_rec(&restricted, p, params, max_iters, seed, allow_repeats)?;
            Ok(inner.map(|sf| Sunflower {
                core: sf.core.union(witness),
                petals: sf.petals.iter().map(|&i| origin[i - 1]).collect(),
            }))
        }
        SpreadVerdict::Spread => {
            if !count_gt_rpow(l as u64, &r, k) {
                return Ok(None); // size hypothesis fails
            }
            if (family.n() as usize) < p {
                return Ok(None);
            }
            let found = find_disjoint_by_partition(family, p, max_iters, seed)?;
            Ok(found.map(|petals| Sunflower {
                core: ElemSet::empty(),
                petals,
            }))
        }
    }
}

fn singleton_base_case(family: &SetFamily, p: usize, allow_repeats: bool) -> Option<Sunflower> {
    let mut seen: Vec<u64> = Vec::new();
    let mut petals = Vec::new();
    for (i, s) in family.sets().iter().enumerate() {
        if !seen.contains(&s.mask()) {
            seen.push(s.mask());
            petals.push(i + 1);
            if petals.len() == p {
                return Some(Sunflower {
                    core: ElemSet::empty(),
                    petals,
                });
            }
        }
    }
    if allow_repeats {
        // some singleton repeated p times is a degenerate sunflower
        for mask in seen {
            let indices: Vec<usize> = family
                .sets()
                .iter()
                .enumerate()
                .filter(|(_, s)| s.mask() == mask)
                .map(|(i, _)| i + 1)
                .collect();
            if indices.len() >= p {
                return Some(Sunflower {
                    core: ElemSet::from_mask(mask),
                    petals: indices[..p].to_vec(),
                });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{generate_extremal, generate_random_family};
    use crate::numeric::parse_rational;

    fn family(n: u32, k: u32, sets: &[&[u32]]) -> SetFamily {
        SetFamily::new(
            n,
            k,
            sets.iter().map(|s| ElemSet::from_elems(s).unwrap()).collect(),
        )
        .unwrap()
    }

    fn set(elems: &[u32]) -> ElemSet {
        ElemSet::from_elems(elems).unwrap()
    }

    #[test]
    fn recognizer_examples() {
        let f = family(4, 2, &[&[1, 2], &[1, 3], &[1, 4]]);
        assert_eq!(is_sunflower(&f, &[1, 2, 3]).unwrap(), Some(set(&[1])));

        let g = family(6, 2, &[&[1, 2], &[3, 4], &[5, 6]]);
        assert_eq!(is_sunflower(&g, &[1, 2, 3]).unwrap(), Some(ElemSet::empty()));

        let h = family(3, 2, &[&[1, 2], &[2, 3], &[1, 3]]);
        assert_eq!(is_sunflower(&h, &[1, 2, 3]).unwrap(), None);

        assert!(is_sunflower(&h, &[1, 1]).is_err());
        assert!(is_sunflower(&h, &[1]).is_err());
        assert!(is_sunflower(&h, &[1, 4]).is_err());
    }

    #[test]
    fn erdos_rado_tiny() {
        let f = family(2, 1, &[&[1], &[2]]);
        let sf = find_sunflower_erdos_rado(&f, 2).unwrap().unwrap();
        assert_eq!(sf.core, ElemSet::empty());
        assert_eq!(sf.petals, vec![1, 2]);
    }

    #[test]
    fn erdos_rado_guarantee_nine_pairs() {
        // 9 distinct 2-subsets of [8] always exceed the classical bound 8
        for seed in 0..40u64 {
            let f = generate_random_family(8, 2, 9, seed, true).unwrap();
            let sf = find_sunflower_erdos_rado(&f, 3).unwrap().expect("guaranteed");
            assert_eq!(sf.petals.len(), 3);
            assert_eq!(is_sunflower(&f, &sf.petals).unwrap(), Some(sf.core));
        }
    }

    #[test]
    fn erdos_rado_none_on_extremal() {
        let f = generate_extremal(3, 2).unwrap();
        assert!(find_sunflower_erdos_rado(&f, 3).unwrap().is_none());
    }

    #[test]
    fn erdos_rado_rejects_duplicates() {
        let f = family(2, 2, &[&[1, 2], &[1, 2]]);
        assert!(find_sunflower_erdos_rado(&f, 2).is_err());
    }

    #[test]
    fn partition_shapes() {
        let s = sample_partition(6, 3, 0).unwrap();
        assert!(s.validate(6));
        assert!(s.parts.iter().all(|p| p.len() == 2));

        let s = sample_partition(7, 3, 0).unwrap();
        assert!(s.validate(7));
        let mut sizes: Vec<usize> = s.parts.iter().map(|p| p.len()).collect();
        assert_eq!(sizes.remove(0), 3);
        assert_eq!(sizes, vec![2, 2]);

        assert!(sample_partition(2, 3, 0).is_err());
    }

    #[test]
    fn partition_deterministic() {
        let a = sample_partition(9, 3, 11).unwrap();
        let b = sample_partition(9, 3, 11).unwrap();
        assert_eq!(a.parts.iter().map(|p| p.mask()).collect::<Vec<_>>(),
                   b.parts.iter().map(|p| p.mask()).collect::<Vec<_>>());
    }

    #[test]
    fn disjoint_by_partition_singletons() {
        let f = family(6, 1, &[&[1], &[2], &[3], &[4], &[5], &[6]]);
        let found = find_disjoint_by_partition(&f, 3, 1, 0).unwrap();
        assert!(found.is_some(), "every block contains a singleton");
    }

    #[test]
    fn disjoint_by_partition_impossible() {
        let f = family(3, 2, &[&[1, 2], &[1, 3]]);
        assert!(find_disjoint_by_partition(&f, 2, 200, 5).unwrap().is_none());
    }

    #[test]
    fn disjoint_by_partition_complete_pairs() {
        let f = generate_random_family(8, 2, 28, 1, true).unwrap(); // all 2-subsets of [8]
        let found = find_disjoint_by_partition(&f, 3, 100, 5).unwrap().unwrap();
        assert!(pairwise_disjoint(&f, &found));
    }

    fn tight_params() -> SpreadParams {
        // alpha just above 1 keeps r(3,2) below 8 so small examples recurse
        SpreadParams {
            alpha: parse_rational("101/100").unwrap(),
            ..SpreadParams::default()
        }
    }

    #[test]
    fn spread_route_singletons() {
        let f = family(9, 1, &[&[1], &[2], &[3], &[4], &[5], &[6], &[7], &[8], &[9]]);
        let sf = find_sunflower_spread(&f, 3, &SpreadParams::default(), 10, 0, false)
            .unwrap()
            .unwrap();
        assert_eq!(sf.core, ElemSet::empty());
        assert_eq!(sf.petals, vec![1, 2, 3]);
    }

    #[test]
    fn spread_route_recurses_at_witness() {
        // element 9 lies in all 8 sets; the restriction is 8 distinct
        // singletons and the witness is re-attached as the core
        let sets: Vec<Vec<u32>> = (1..=8).map(|e| vec![e, 9]).collect();
        let refs: Vec<&[u32]> = sets.iter().map(|s| s.as_slice()).collect();
        let f = family(9, 2, &refs);
        let sf = find_sunflower_spread(&f, 3, &tight_params(), 10, 0, false)
            .unwrap()
            .unwrap();
        assert_eq!(sf.core, set(&[9]));
        assert_eq!(sf.petals, vec![1, 2, 3]);
    }

    #[test]
    fn spread_route_none_on_extremal() {
        let f = generate_extremal(3, 2).unwrap();
        assert!(find_sunflower_spread(&f, 3, &tight_params(), 50, 1, false)
            .unwrap()
            .is_none());
    }

    #[test]
    fn spread_route_partition_branch() {
        // 7-regular circulant graph on 20 vertices: 70 edges, every
        // element in exactly 7 members, pairs distinct, so the family is
        // r-spread for the tight threshold r(3,2) ~ 7.84 and large enough
        // for the random-partition branch.
        let mut sets = Vec::new();
        for v in 0..20u32 {
            for d in [1u32, 2, 3] {
                let w = (v + d) % 20;
                let (a, b) = (v.min(w) + 1, v.max(w) + 1);
                sets.push(set(&[a, b]));
            }
            if v < 10 {
                sets.push(set(&[v + 1, v + 11]));
            }
        }
        let f = SetFamily::new(20, 2, sets).unwrap();
        assert_eq!(f.len(), 70);
        let params = tight_params();
        let r = r_threshold_theorem(&params.alpha, 3, 2).unwrap();
        assert_eq!(spread_check(&f, &r).verdict, SpreadVerdict::Spread);
        let sf = find_sunflower_spread(&f, 3, &params, 200, 7, false)
            .unwrap()
            .expect("partition search finds disjoint edges");
        assert_eq!(sf.core, ElemSet::empty());
        assert_eq!(is_sunflower(&f, &sf.petals).unwrap(), Some(ElemSet::empty()));
    }

    #[test]
    fn degenerate_repeats_only_when_allowed() {
        let f = family(2, 1, &[&[1], &[1], &[1]]);
        assert!(find_sunflower_spread(&f, 3, &SpreadParams::default(), 10, 0, false)
            .unwrap()
            .is_none());
        let sf = find_sunflower_spread(&f, 3, &SpreadParams::default(), 10, 0, true)
            .unwrap()
            .unwrap();
        assert_eq!(sf.core, set(&[1]));
        assert_eq!(sf.petals, vec![1, 2, 3]);
    }
}
