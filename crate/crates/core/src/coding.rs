//! Prefix-free code machinery: validation, exact Kraft sums, the average
//! codeword-length lower bound, and the bit-level primitives (unary
//! integers, fixed-width ranks, subset rank/unrank) consumed by the
//! pair encoder.
//!
//! The length bound is checked without tolerances: a prefix-free code on
//! `[t]` has mean length at least `log2 t`, verified as the integer
//! comparison `2^(sum of lengths) >= t^t`.

use std::fmt;
use std::str::FromStr;

use num::{BigRational, BigUint, One};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::binomial_u128;
use crate::set::ElemSet;

/// A finite binary string.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        BitString(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn extend(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    /// Appends `value` in exactly `width` bits, most significant first.
    pub fn push_bits(&mut self, value: u128, width: u32) {
        debug_assert!(width == 128 || value < (1u128 << width).max(1));
        for i in (0..width).rev() {
            self.0.push((value >> i) & 1 == 1);
        }
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.0.len() <= other.0.len() && self.0 == other.0[..self.0.len()]
    }

    pub fn truncated(&self, len: usize) -> BitString {
        BitString(self.0[..len.min(self.0.len())].to_vec())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "binary word may contain only 0 and 1, found {c:?}"
                    )))
                }
            }
        }
        Ok(BitString(bits))
    }
}

/// A code `E : [t] -> {0,1}*` given by its list of words.
#[derive(Clone, Debug)]
pub struct PrefixCode {
    words: Vec<BitString>,
}

impl PrefixCode {
    pub fn from_words(words: Vec<BitString>) -> Self {
        PrefixCode { words }
    }

    pub fn t(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[BitString] {
        &self.words
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.words.iter().map(|w| w.len()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrefixCheck {
    PrefixFree,
    /// Word `i` is a prefix of word `j` (1-based; first such pair in
    /// lexicographic `(i, j)` order).
    Violation { i: usize, j: usize },
}

pub fn check_prefix_free(code: &PrefixCode) -> PrefixCheck {
    let words = code.words();
    for i in 0..words.len() {
        for j in 0..words.len() {
            if i != j && words[i].is_prefix_of(&words[j]) {
                return PrefixCheck::Violation { i: i + 1, j: j + 1 };
            }
        }
    }
    PrefixCheck::PrefixFree
}

/// Scalable prefix-freeness verdict: sorted adjacent comparison. Detects
/// the same violations as the quadratic scan but without a canonical
/// witness; the pair encoder's audit uses it and falls back to the full
/// scan only on failure.
pub fn is_prefix_free_sorted(words: &[BitString]) -> bool {
    let mut sorted: Vec<&BitString> = words.iter().collect();
    sorted.sort_by(|a, b| a.bits().cmp(b.bits()));
    sorted.windows(2).all(|w| !w[0].is_prefix_of(w[1]))
}

/// Exact Kraft sum of a prefix-free code. Rejects codes that are not
/// prefix-free; for accepted codes the sum never exceeds 1.
pub fn kraft_sum(code: &PrefixCode) -> Result<BigRational> {
    if let PrefixCheck::Violation { i, j } = check_prefix_free(code) {
        return Err(Error::NotPrefixFree { i, j });
    }
    let mut sum = BigRational::from_integer(0.into());
    for len in code.lengths() {
        sum += BigRational::new(1.into(), num::BigInt::one() << len);
    }
    Ok(sum)
}

#[derive(Clone, Debug)]
pub struct ShannonReport {
    /// Exact mean codeword length `(1/t) * sum of lengths`.
    pub mean_length: BigRational,
    /// `log2 t`, for display only.
    pub log2_t: f64,
    /// Whether mean length >= log2 t, decided as `2^(sum) >= t^t`.
    pub holds: bool,
}

/// Average-length lower bound for prefix-free codes, checked in exact
/// integer arithmetic.
pub fn shannon_converse_check(code: &PrefixCode) -> Result<ShannonReport> {
    if let PrefixCheck::Violation { i, j } = check_prefix_free(code) {
        return Err(Error::NotPrefixFree { i, j });
    }
    let t = code.t();
    if t == 0 {
        return Err(Error::InvalidInput("code must have at least one word".into()));
    }
    let total: usize = code.lengths().iter().sum();
    let lhs = BigUint::one() << total;
    let rhs = BigUint::from(t).pow(t as u32);
    Ok(ShannonReport {
        mean_length: BigRational::new((total as u64).into(), (t as u64).into()),
        log2_t: (t as f64).log2(),
        holds: lhs >= rhs,
    })
}

/// `0^m 1`.
pub fn unary_encode(m: usize) -> BitString {
    let mut bits = BitString::new();
    for _ in 0..m {
        bits.push(false);
    }
    bits.push(true);
    bits
}

/// Reads a unary integer from the front; returns `(value, bits consumed)`.
pub fn unary_decode(bits: &BitString) -> Result<(usize, usize)> {
    let mut reader = BitReader::new(bits);
    let value = reader.read_unary()?;
    Ok((value, reader.pos()))
}

/// Cursor over a bitstring; every read fails cleanly on underrun.
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a BitString) -> Self {
        BitReader {
            bits: bits.bits(),
            pos: 0,
        }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        let b = *self
            .bits
            .get(self.pos)
            .ok_or_else(|| Error::Decode("truncated input".into()))?;
        self.pos += 1;
        Ok(b)
    }

    /// Fixed-width big-endian integer.
    pub fn read_bits(&mut self, width: u32) -> Result<u128> {
        let mut value = 0u128;
        for _ in 0..width {
            value = (value << 1) | self.read_bit()? as u128;
        }
        Ok(value)
    }

    pub fn read_unary(&mut self) -> Result<usize> {
        let mut count = 0;
        loop {
            if self.read_bit().map_err(|_| {
                Error::Decode("unary field has no terminating 1".into())
            })? {
                return Ok(count);
            }
            count += 1;
        }
    }

    pub fn expect_done(&self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(Error::Decode(format!(
                "{} trailing bits after a complete codeword",
                self.remaining()
            )));
        }
        Ok(())
    }
}

/// Bits needed to index `count` alternatives; zero alternatives of
/// freedom (count <= 1) need zero bits.
pub fn fixed_width(count: u128) -> u32 {
    if count <= 1 {
        0
    } else {
        128 - (count - 1).leading_zeros()
    }
}

/// Number of subsets of a `ground_len`-element set with size in
/// `lo..=hi`.
pub fn subset_range_count(ground_len: usize, lo: usize, hi: usize) -> u128 {
    (lo..=hi)
        .map(|s| binomial_u128(ground_len as u64, s as u64))
        .sum()
}

/// Rank of `s` among subsets of `ground` with size in `lo..=hi`, ordered
/// by size first and lexicographically within a size. `ground` must be
/// strictly increasing and contain `s`.
pub fn rank_subset(ground: &[u32], lo: usize, hi: usize, s: ElemSet) -> Result<u128> {
    let size = s.len();
    if size < lo || size > hi {
        return Err(Error::InvalidInput(format!(
            "subset size {size} outside {lo}..={hi}"
        )));
    }
    let g = ground.len();
    let mut positions = Vec::with_capacity(size);
    for e in s.iter() {
        match ground.binary_search(&e) {
            Ok(p) => positions.push(p),
            Err(_) => {
                return Err(Error::InvalidInput(format!(
                    "element {e} is not in the ground list"
                )))
            }
        }
    }
    let offset: u128 = (lo..size)
        .map(|t| binomial_u128(g as u64, t as u64))
        .sum();
    // lexicographic rank of the position combination
    let mut rank = 0u128;
    let mut prev: isize = -1;
    for (i, &p) in positions.iter().enumerate() {
        for c in (prev + 1) as usize..p {
            rank += binomial_u128((g - 1 - c) as u64, (size - 1 - i) as u64);
        }
        prev = p as isize;
    }
    Ok(offset + rank)
}

/// Inverse of [`rank_subset`].
pub fn unrank_subset(ground: &[u32], lo: usize, hi: usize, rank: u128) -> Result<ElemSet> {
    let g = ground.len();
    let total = subset_range_count(g, lo, hi);
    if rank >= total {
        return Err(Error::Decode(format!(
            "subset rank {rank} out of range (total {total})"
        )));
    }
    let mut rank = rank;
    let mut size = lo;
    loop {
        let c = binomial_u128(g as u64, size as u64);
        if rank < c {
            break;
        }
        rank -= c;
        size += 1;
    }
    let mut out = ElemSet::empty();
    let mut next = 0usize;
    for i in 0..size {
        let mut p = next;
        loop {
            let c = binomial_u128((g - 1 - p) as u64, (size - 1 - i) as u64);
            if rank < c {
                break;
            }
            rank -= c;
            p += 1;
        }
        out.insert(ground[p]);
        next = p + 1;
    }
    Ok(out)
}

/// Random prefix-free code on `[t]`: grows a full binary tree by seeded
/// random leaf expansion, then keeps `t` of its leaves. Kraft sum is at
/// most 1 by construction; below 1 whenever leaves are dropped.
pub fn random_code(t: usize, seed: u64) -> PrefixCode {
    assert!(t >= 1, "a code needs at least one word");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extra = rng.gen_range(0..=t);
    let mut frontier: Vec<BitString> = vec![BitString::new()];
    for _ in 0..(t - 1 + extra) {
        let idx = rng.gen_range(0..frontier.len());
        let node = frontier.swap_remove(idx);
        let mut zero = node.clone();
        zero.push(false);
        let mut one = node;
        one.push(true);
        frontier.push(zero);
        frontier.push(one);
    }
    let chosen = rand::seq::index::sample(&mut rng, frontier.len(), t);
    let words = chosen.iter().map(|i| frontier[i].clone()).collect();
    PrefixCode::from_words(words)
}
