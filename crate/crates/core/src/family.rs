//! Set families: representation, file I/O, generators, restriction, and
//! exact spreadness checking.
//!
//! A family is an ordered sequence of `l` subsets of `[n]`, all of size
//! `k`, with repeats permitted. Spreadness verdicts are computed in exact
//! arbitrary-precision arithmetic: a family is `r`-spread when every
//! non-empty `Z` is contained in at most `r^(k-|Z|)` members.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use num::{BigRational, One, Signed, Zero};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numeric::{
    binomial_big, ceil_to_dyadic, count_le_rpow, log2_upper, parse_rational, ratio_from_u64,
};
use crate::set::{nonempty_submasks, ElemSet, MAX_GROUND};

/// Hard cap on generated set counts.
pub const MAX_GENERATED_SETS: u64 = 1 << 22;

/// An ordered sequence of `k`-subsets of `[n]`. Indices into the sequence
/// are 1-based throughout the crate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFamily {
    n: u32,
    k: u32,
    sets: Vec<ElemSet>,
}

impl SetFamily {
    pub fn new(n: u32, k: u32, sets: Vec<ElemSet>) -> Result<Self> {
        if n == 0 || n > MAX_GROUND {
            return Err(Error::InvalidInput(format!(
                "ground-set size {n} outside 1..={MAX_GROUND}"
            )));
        }
        if k > n {
            return Err(Error::InvalidInput(format!("set size k={k} exceeds n={n}")));
        }
        for (i, s) in sets.iter().enumerate() {
            if !s.within(n) {
                return Err(Error::InvalidInput(format!(
                    "set {} contains an element above n={n}",
                    i + 1
                )));
            }
            if s.len() != k as usize {
                return Err(Error::InvalidInput(format!(
                    "set {} has size {} but k={k}",
                    i + 1,
                    s.len()
                )));
            }
        }
        Ok(SetFamily { n, k, sets })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of member sets (the sequence length `l`).
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Member set at 1-based index `x`.
    pub fn set(&self, x: usize) -> Result<ElemSet> {
        if x == 0 || x > self.sets.len() {
            return Err(Error::IndexOutOfRange {
                index: x,
                len: self.sets.len(),
            });
        }
        Ok(self.sets[x - 1])
    }

    pub fn sets(&self) -> &[ElemSet] {
        &self.sets
    }

    pub fn has_duplicates(&self) -> bool {
        let mut masks: Vec<u64> = self.sets.iter().map(|s| s.mask()).collect();
        masks.sort_unstable();
        masks.windows(2).any(|w| w[0] == w[1])
    }

    /// How many members contain `z`.
    pub fn superset_count(&self, z: ElemSet) -> u64 {
        self.sets.iter().filter(|s| z.is_subset_of(**s)).count() as u64
    }

    /// Canonical single-line JSON form; `parse_family` inverts it exactly,
    /// including set order.
    pub fn canonical_json(&self) -> String {
        let file = FamilyFile {
            n: self.n,
            k: self.k,
            sets: self.sets.iter().map(|s| s.elems()).collect(),
        };
        serde_json::to_string(&file).expect("family serialization cannot fail")
    }

    /// Stable identifier: truncated SHA-256 of the canonical form.
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        let mut out = String::new();
        for b in &digest[..8] {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyFile {
    n: u32,
    k: u32,
    sets: Vec<Vec<u32>>,
}

/// Parses the family file format: one JSON object
/// `{"n": int, "k": int, "sets": [[int,...],...]}` with 1-based, strictly
/// increasing elements. Set order is significant. Errors carry the line
/// number of the offending set.
pub fn parse_family(text: &str) -> Result<SetFamily> {
    let file: FamilyFile =
        serde_json::from_str(text).map_err(|e| Error::Syntax(e.to_string()))?;
    let lines = set_start_lines(text, file.sets.len());
    let line_of = |i: usize| lines.get(i).copied().unwrap_or(1);
    if file.n == 0 || file.n > MAX_GROUND {
        return Err(Error::FamilyFormat {
            line: 1,
            message: format!("n={} outside the supported range 1..={MAX_GROUND}", file.n),
        });
    }
    if file.k > file.n {
        return Err(Error::FamilyFormat {
            line: 1,
            message: format!("k={} exceeds n={}", file.k, file.n),
        });
    }
    let mut sets = Vec::with_capacity(file.sets.len());
    for (i, elems) in file.sets.iter().enumerate() {
        if elems.len() != file.k as usize {
            return Err(Error::FamilyFormat {
                line: line_of(i),
                message: format!("set size {} ≠ k={}", elems.len(), file.k),
            });
        }
        for w in elems.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::FamilyFormat {
                    line: line_of(i),
                    message: "set elements must be strictly increasing".to_string(),
                });
            }
        }
        for &e in elems {
            if e == 0 {
                return Err(Error::FamilyFormat {
                    line: line_of(i),
                    message: "element 0 out of range (elements are 1-based)".to_string(),
                });
            }
            if e > file.n {
                return Err(Error::FamilyFormat {
                    line: line_of(i),
                    message: format!("element {e} exceeds n={}", file.n),
                });
            }
        }
        sets.push(ElemSet::from_elems(elems)?);
    }
    SetFamily::new(file.n, file.k, sets)
}

/// Line number (1-based) on which the i-th inner set opens. Tracks square
/// brackets outside JSON strings: the sets array is depth 1, members are
/// depth 2.
fn set_start_lines(text: &str, count: usize) -> Vec<usize> {
    let mut lines = Vec::with_capacity(count);
    let mut line = 1usize;
    let mut depth = 0i32;
    let mut in_string = false;
    let mut escape = false;
    for c in text.chars() {
        match c {
            '\n' => line += 1,
            '"' if !escape => in_string = !in_string,
            '[' if !in_string => {
                depth += 1;
                if depth == 2 {
                    lines.push(line);
                    if lines.len() == count {
                        break;
                    }
                }
            }
            ']' if !in_string => depth -= 1,
            _ => {}
        }
        escape = c == '\\' && in_string && !escape;
    }
    lines
}

/// The `(p-1)^k`-set family with no `p`-sunflower: `k` blocks of `p-1`
/// fresh elements, one element chosen per block, sets in lexicographic
/// order over a ground set of size `k(p-1)`.
pub fn generate_extremal(p: u32, k: u32) -> Result<SetFamily> {
    if p < 2 {
        return Err(Error::InvalidInput(format!("p={p} must be at least 2")));
    }
    if k < 1 {
        return Err(Error::InvalidInput("k must be at least 1".to_string()));
    }
    let n = k.checked_mul(p - 1).filter(|&n| n <= MAX_GROUND).ok_or_else(|| {
        Error::Overflow(format!("ground set k(p-1) = {}*{} exceeds {MAX_GROUND}", k, p - 1))
    })?;
    let count = (p as u64 - 1)
        .checked_pow(k)
        .filter(|&c| c <= MAX_GENERATED_SETS)
        .ok_or_else(|| Error::Overflow(format!("(p-1)^k = ({})^{k} sets is too many", p - 1)))?;
    let b = (p - 1) as u64;
    let mut sets = Vec::with_capacity(count as usize);
    let mut digits = vec![0u64; k as usize];
    loop {
        let mut s = ElemSet::empty();
        for (block, &d) in digits.iter().enumerate() {
            s.insert((block as u64 * b + d + 1) as u32);
        }
        sets.push(s);
        // odometer, last block fastest, giving lexicographic set order
        let mut pos = k as usize;
        loop {
            if pos == 0 {
                return SetFamily::new(n, k, sets);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < b {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// `l` uniformly random `k`-subsets of `[n]`, reproducible from `seed`.
/// With `distinct`, repeats are rejected; requires `l <= C(n,k)`.
pub fn generate_random_family(
    n: u32,
    k: u32,
    l: usize,
    seed: u64,
    distinct: bool,
) -> Result<SetFamily> {
    if n == 0 || n > MAX_GROUND || k > n {
        return Err(Error::InvalidInput(format!("bad dimensions n={n}, k={k}")));
    }
    if l == 0 {
        return Err(Error::InvalidInput("family must have at least one set".into()));
    }
    if distinct && binomial_big(n as u64, k as u64) < l.into() {
        return Err(Error::InvalidInput(format!(
            "distinct requested but l={l} exceeds C({n},{k})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<u64> = HashSet::new();
    let mut sets = Vec::with_capacity(l);
    while sets.len() < l {
        let mut s = ElemSet::empty();
        for i in index::sample(&mut rng, n as usize, k as usize).iter() {
            s.insert(i as u32 + 1);
        }
        if distinct && !seen.insert(s.mask()) {
            continue;
        }
        sets.push(s);
    }
    SetFamily::new(n, k, sets)
}

/// Restriction at `Z`: the subfamily of members containing `Z`, each with
/// `Z` removed, in original order and with multiplicity. The ground set is
/// unchanged; the new member size is `k - |Z|`.
pub fn link(family: &SetFamily, z: ElemSet) -> Result<SetFamily> {
    Ok(link_indexed(family, z)?.0)
}

/// As [`link`], also returning the 1-based original index of each
/// surviving member.
pub fn link_indexed(family: &SetFamily, z: ElemSet) -> Result<(SetFamily, Vec<usize>)> {
    if z.is_empty() {
        return Err(Error::InvalidInput("restriction set Z must be non-empty".into()));
    }
    if !z.within(family.n()) {
        return Err(Error::InvalidInput("Z has elements outside the ground set".into()));
    }
    if z.len() > family.k() as usize {
        return Err(Error::InvalidInput(format!(
            "|Z|={} exceeds k={}",
            z.len(),
            family.k()
        )));
    }
    let mut sets = Vec::new();
    let mut origin = Vec::new();
    for (i, s) in family.sets().iter().enumerate() {
        if z.is_subset_of(*s) {
            sets.push(s.difference(z));
            origin.push(i + 1);
        }
    }
    let restricted = SetFamily {
        n: family.n(),
        k: family.k() - z.len() as u32,
        sets,
    };
    Ok((restricted, origin))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SpreadVerdict {
    Spread,
    Violated,
}

/// Outcome of a spreadness check. On violation the witness is the
/// canonical worst `Z`: maximal `count(Z)^(1/(k-|Z|))`, then smallest
/// `|Z|`, then lexicographically smallest.
#[derive(Clone, Debug)]
pub struct SpreadReport {
    pub verdict: SpreadVerdict,
    pub witness: Option<SpreadWitness>,
}

#[derive(Clone, Debug)]
pub struct SpreadWitness {
    pub z: ElemSet,
    pub count: u64,
}

/// All subset counts of the family: for every non-empty `Z` contained in
/// at least one member, the number of members containing it.
fn subset_counts(family: &SetFamily) -> HashMap<u64, u64> {
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for s in family.sets() {
        for z in nonempty_submasks(*s) {
            *counts.entry(z.mask()).or_insert(0) += 1;
        }
    }
    counts
}

/// Candidate witness ordering. Ratios `count^(1/d)` compare by
/// cross-exponentiation; `d = 0` with a repeated set is treated as
/// infinite.
fn witness_better(a: (u64, u32, ElemSet), b: (u64, u32, ElemSet)) -> bool {
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    enum Class {
        One,
        Finite,
        Infinite,
    }
    let class = |(c, d, _): (u64, u32, ElemSet)| {
        if c <= 1 {
            Class::One
        } else if d == 0 {
            Class::Infinite
        } else {
            Class::Finite
        }
    };
    let (ca, cb) = (class(a), class(b));
    let ratio = match ca.cmp(&cb) {
        Ordering::Greater => Ordering::Greater,
        Ordering::Less => Ordering::Less,
        Ordering::Equal => match ca {
            Class::Finite => {
                // c_a^(1/d_a) vs c_b^(1/d_b)  <=>  c_a^d_b vs c_b^d_a
                let lhs = num::BigUint::from(a.0).pow(b.1);
                let rhs = num::BigUint::from(b.0).pow(a.1);
                lhs.cmp(&rhs)
            }
            _ => Ordering::Equal,
        },
    };
    match ratio {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => {
            let za = a.2.len();
            let zb = b.2.len();
            za < zb || (za == zb && a.2.lex_cmp(b.2) == Ordering::Less)
        }
    }
}

/// Exact spreadness check: `Spread` iff every non-empty `Z` satisfies
/// `count(Z) <= r^(k-|Z|)`. Comparisons cross-multiply in big integers;
/// floating point is never consulted.
pub fn spread_check(family: &SetFamily, r: &BigRational) -> SpreadReport {
    assert!(r.is_positive(), "spreadness requires a positive r");
    let k = family.k();
    let mut best: Option<(u64, u32, ElemSet)> = None;
    for (mask, count) in subset_counts(family) {
        let z = ElemSet::from_mask(mask);
        let d = k - z.len() as u32;
        let cand = (count, d, z);
        if best.map_or(true, |b| witness_better(cand, b)) {
            best = Some(cand);
        }
    }
    match best {
        None => SpreadReport {
            verdict: SpreadVerdict::Spread,
            witness: None,
        },
        Some((count, d, z)) => {
            if count_le_rpow(count, r, d) {
                SpreadReport {
                    verdict: SpreadVerdict::Spread,
                    witness: None,
                }
            } else {
                SpreadReport {
                    verdict: SpreadVerdict::Violated,
                    witness: Some(SpreadWitness { z, count }),
                }
            }
        }
    }
}

/// The least `r` for which the family is `r`-spread, described exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpreadNumber {
    /// A set repeats, so no finite `r` works.
    Infinite { witness: ElemSet },
    /// Achieved by `count(witness)` supersets at exponent gap `root`;
    /// the value is `count^(1/root)`.
    Finite {
        count: u64,
        root: u32,
        witness: ElemSet,
    },
    /// No non-empty `Z` with `|Z| < k` exists and no set repeats
    /// (`k <= 1` families); every `r >= 1` works.
    Unconstrained,
}

impl SpreadNumber {
    pub fn approx(&self) -> f64 {
        match self {
            SpreadNumber::Infinite { .. } => f64::INFINITY,
            SpreadNumber::Finite { count, root, .. } => {
                (*count as f64).powf(1.0 / *root as f64)
            }
            SpreadNumber::Unconstrained => 1.0,
        }
    }
}

pub fn spread_number(family: &SetFamily) -> SpreadNumber {
    let k = family.k();
    let counts = subset_counts(family);
    // a full-size Z with count >= 2 is a repeated member set
    let mut dup: Option<ElemSet> = None;
    for (mask, count) in &counts {
        let z = ElemSet::from_mask(*mask);
        if z.len() as u32 == k && *count >= 2 {
            match dup {
                Some(prev) if prev.lex_cmp(z) != Ordering::Greater => {}
                _ => dup = Some(z),
            }
        }
    }
    if let Some(witness) = dup {
        return SpreadNumber::Infinite { witness };
    }
    let mut best: Option<(u64, u32, ElemSet)> = None;
    for (mask, count) in counts {
        let z = ElemSet::from_mask(mask);
        if z.len() as u32 == k {
            continue;
        }
        let d = k - z.len() as u32;
        let cand = (count, d, z);
        if best.map_or(true, |b| witness_better(cand, b)) {
            best = Some(cand);
        }
    }
    match best {
        None => SpreadNumber::Unconstrained,
        Some((count, root, witness)) => SpreadNumber::Finite {
            count,
            root,
            witness,
        },
    }
}

/// Scaling constants for the threshold formulas. The constants are
/// configuration, not derived values: the defaults (`alpha = 4`,
/// `beta = 2`) merely make desk-scale demos run.
#[derive(Clone, Debug)]
pub struct SpreadParams {
    pub alpha: BigRational,
    pub beta: BigRational,
    pub gamma: BigRational,
    pub epsilon: BigRational,
}

impl Default for SpreadParams {
    fn default() -> Self {
        SpreadParams {
            alpha: ratio_from_u64(4),
            beta: ratio_from_u64(2),
            gamma: parse_rational("1/4").unwrap(),
            epsilon: parse_rational("1/4").unwrap(),
        }
    }
}

impl SpreadParams {
    /// Validates the standard ranges: `alpha, beta > 1` and
    /// `0 < gamma, epsilon < 1/2`.
    pub fn validate(&self) -> Result<()> {
        self.validate_relaxed()?;
        let half = BigRational::new(1.into(), 2.into());
        if self.gamma >= half || self.epsilon >= half {
            return Err(Error::InvalidInput(
                "gamma and epsilon must lie in (0, 1/2)".into(),
            ));
        }
        Ok(())
    }

    /// Permits `gamma, epsilon` up to 1 for probes outside the standard
    /// regime; callers should label such results.
    pub fn validate_relaxed(&self) -> Result<()> {
        if self.alpha <= BigRational::one() || self.beta <= BigRational::one() {
            return Err(Error::InvalidInput("alpha and beta must exceed 1".into()));
        }
        let one = BigRational::one();
        if self.gamma <= BigRational::zero()
            || self.epsilon <= BigRational::zero()
            || self.gamma >= one
            || self.epsilon >= one
        {
            return Err(Error::InvalidInput(
                "gamma and epsilon must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    pub fn outside_standard_regime(&self) -> bool {
        let half = BigRational::new(1.into(), 2.into());
        self.gamma >= half || self.epsilon >= half
    }
}

/// Fractional precision of threshold values: logs are rounded up at
/// denominator `2^20`, preserving the "more than r^k" direction.
pub const THRESHOLD_FRAC_BITS: u32 = 20;
const LOG_WORK_BITS: u32 = 40;

/// Threshold `alpha * p * log2(p*k)`, as a rational upper bound rounded
/// up at denominator `2^20` (exact when `p*k` is a power of two).
pub fn r_threshold_theorem(alpha: &BigRational, p: u64, k: u32) -> Result<BigRational> {
    if !alpha.is_positive() {
        return Err(Error::InvalidInput("alpha must be positive".into()));
    }
    let pk = p
        .checked_mul(k as u64)
        .ok_or_else(|| Error::Overflow("p*k".into()))?;
    if pk < 2 {
        return Err(Error::InvalidInput(format!("threshold requires p*k >= 2, got {pk}")));
    }
    let (log, exact) = log2_upper(&ratio_from_u64(pk), LOG_WORK_BITS)?;
    let raw = alpha * ratio_from_u64(p) * log;
    Ok(round_threshold(raw, exact))
}

/// Threshold `beta * (1/gamma) * log2(k/epsilon)`, same rounding contract
/// as [`r_threshold_theorem`].
pub fn r_threshold_lemma(
    beta: &BigRational,
    gamma: &BigRational,
    epsilon: &BigRational,
    k: u32,
) -> Result<BigRational> {
    if !beta.is_positive() || !gamma.is_positive() || !epsilon.is_positive() {
        return Err(Error::InvalidInput("beta, gamma, epsilon must be positive".into()));
    }
    let x = ratio_from_u64(k as u64) / epsilon;
    if x <= BigRational::one() {
        return Err(Error::InvalidInput(format!(
            "threshold requires k/epsilon > 1, got {}",
            crate::numeric::format_ratio(&x)
        )));
    }
    let (log, exact) = log2_upper(&x, LOG_WORK_BITS)?;
    let raw = beta * (BigRational::one() / gamma) * log;
    Ok(round_threshold(raw, exact))
}

fn round_threshold(raw: BigRational, log_exact: bool) -> BigRational {
    if log_exact {
        // the product of exact rationals needs no rounding
        raw
    } else {
        ceil_to_dyadic(&raw, THRESHOLD_FRAC_BITS)
    }
}
