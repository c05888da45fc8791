//! An executable, decodable two-case encoding of pairs `(V, X)` for a
//! fixed conditioning set `U`, with exhaustive prefix-freeness and
//! length accounting.
//!
//! For each pair, the encoder either (case bit 0) describes the union
//! `V ∪ chi(X,U)` and locates `X` inside the small candidate set `tau`,
//! or (case bit 1) names `X` directly and locates `V` among the rare
//! sets that make `tau` larger than the analytic threshold `phi`. Every
//! field width is computable by the decoder from previously decoded
//! content, so each codeword is self-delimiting. The only schedule
//! addition beyond the counting argument is field (c'), the unary size
//! of `chi(X,W)`, which makes the decoder total at a cost of
//! `|chi(X,W)| + 1` bits per case-0 word.

use num::{BigInt, BigRational, BigUint, One, Signed};
use rayon::prelude::*;

use crate::chi::chi;
use crate::coding::{
    check_prefix_free, fixed_width, is_prefix_free_sorted, rank_subset, subset_range_count,
    unary_encode, unrank_subset, BitReader, BitString, PrefixCheck, PrefixCode,
};
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::numeric::ratio_pow;
use crate::set::{combinations, ElemSet};

/// Parameters of one audit: the fixed set `U`, the sampled size `v`, and
/// the two rational constants entering `phi`.
#[derive(Clone, Debug)]
pub struct AuditConfig {
    pub u: ElemSet,
    pub v: usize,
    pub rho: BigRational,
    pub r: BigRational,
}

impl AuditConfig {
    pub fn validate(&self, family: &SetFamily) -> Result<()> {
        if !self.u.within(family.n()) {
            return Err(Error::InvalidInput("U has elements outside the ground set".into()));
        }
        if self.v < 1 {
            return Err(Error::InvalidInput("v must be at least 1".into()));
        }
        if self.u.len() + self.v > family.n() as usize {
            return Err(Error::InvalidInput(format!(
                "u + v = {} exceeds n = {}",
                self.u.len() + self.v,
                family.n()
            )));
        }
        if self.rho <= BigRational::one() {
            return Err(Error::InvalidInput("rho must exceed 1".into()));
        }
        if !self.r.is_positive() {
            return Err(Error::InvalidInput("r must be positive".into()));
        }
        Ok(())
    }

    /// Side conditions of the counting argument that small demo instances
    /// routinely miss; reported, never enforced.
    pub fn warnings(&self, family: &SetFamily) -> Vec<String> {
        let mut out = Vec::new();
        let n = family.n() as i64;
        let k = family.k() as i64;
        let u = self.u.len() as i64;
        if n <= 6 * k {
            out.push(format!("n/k <= 6 (n={n}, k={k}): outside the spread side condition"));
        }
        if 3 * (n - u - k) < n {
            out.push(format!(
                "n-u-k < n/3 (n={n}, u={u}, k={k}): the tally bound's side condition fails"
            ));
        }
        out
    }
}

/// Precomputed per-config state: residuals against `U` and the ordered
/// ground remainder `[n] \ U`.
struct Ctx<'a> {
    family: &'a SetFamily,
    cfg: &'a AuditConfig,
    chi_u: Vec<ElemSet>,
    ground: Vec<u32>,
}

impl<'a> Ctx<'a> {
    fn build(family: &'a SetFamily, cfg: &'a AuditConfig) -> Result<Ctx<'a>> {
        cfg.validate(family)?;
        if family.is_empty() {
            return Err(Error::InvalidInput("family must have at least one set".into()));
        }
        let chi_u = (1..=family.len())
            .map(|y| chi(family, y, cfg.u).map(|r| r.value))
            .collect::<Result<Vec<_>>>()?;
        let ground: Vec<u32> = (1..=family.n()).filter(|&e| !cfg.u.contains(e)).collect();
        Ok(Ctx {
            family,
            cfg,
            chi_u,
            ground,
        })
    }

    /// `tau` for selector `a`, union `kx = V ∪ chi(x,U)` and residual
    /// size `m`: indices `y` with `a ⊆ chi(y,U) ⊆ kx` and
    /// `|chi(y,U)| = m`, ascending.
    fn tau_for(&self, a: ElemSet, kx: ElemSet, m: usize) -> Vec<usize> {
        self.chi_u
            .iter()
            .enumerate()
            .filter(|(_, c)| a.is_subset_of(**c) && c.is_subset_of(kx) && c.len() == m)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Smallest-index minimizer of `|chi(y,U)|` among residuals inside
    /// `kx` (equivalently inside `W ∪ chi(x,U)`, as residuals avoid `U`).
    fn min_residual_inside(&self, kx: ElemSet) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for (i, c) in self.chi_u.iter().enumerate() {
            if c.is_subset_of(kx) && best.map_or(true, |(size, _)| c.len() < size) {
                best = Some((c.len(), i + 1));
            }
        }
        best.map(|(_, j)| j)
    }

    fn phi_value(&self, m: usize, a_size: usize) -> BigRational {
        let n = BigRational::from_integer(BigInt::from(self.family.n()));
        let v = BigRational::from_integer(BigInt::from(self.cfg.v as u64));
        let rho_v_n = &self.cfg.rho * &v / &n;
        let v_r_n = &v * &self.cfg.r / &n;
        ratio_pow(&self.cfg.r, self.family.k() as i64)
            * ratio_pow(&rho_v_n, m as i64)
            * ratio_pow(&v_r_n, -(a_size as i64))
    }

    /// The sets `V'` of size `v` for which `tau(a, ·, V')` exceeds `phi`,
    /// in lexicographic order.
    fn violating_vs(&self, a: ElemSet, cx: ElemSet, m: usize, phi: &BigRational) -> Vec<ElemSet> {
        combinations(&self.ground, self.cfg.v)
            .filter(|v2| exceeds(self.tau_for(a, v2.union(cx), m).len(), phi))
            .collect()
    }
}

fn exceeds(count: usize, phi: &BigRational) -> bool {
    BigRational::from_integer(BigInt::from(count as u64)) > *phi
}

/// The analytic case threshold
/// `phi = r^k * (rho*v/n)^|chi(x,U)| * (v*r/n)^(-a_size)`, evaluated
/// exactly. `a_size` is the caller's `|chi(x,W)|`; `phi` depends on `V`
/// only through that size and `v`.
pub fn phi(family: &SetFamily, cfg: &AuditConfig, x: usize, a_size: usize) -> Result<BigRational> {
    let ctx = Ctx::build(family, cfg)?;
    let m = ctx.chi_u[check_index(family, x)? - 1].len();
    Ok(ctx.phi_value(m, a_size))
}

fn check_index(family: &SetFamily, x: usize) -> Result<usize> {
    family.set(x)?;
    Ok(x)
}

/// Exact filter defining `tau(A, x, V)`. Requires `A ⊆ chi(x,U)` and
/// `V ⊆ [n] \ U`.
pub fn tau(
    family: &SetFamily,
    cfg: &AuditConfig,
    a: ElemSet,
    x: usize,
    v_set: ElemSet,
) -> Result<Vec<usize>> {
    let ctx = Ctx::build(family, cfg)?;
    let cx = ctx.chi_u[check_index(family, x)? - 1];
    if !a.is_subset_of(cx) {
        return Err(Error::InvalidInput("A must be a subset of chi(x,U)".into()));
    }
    check_v_side(family, cfg, v_set, false)?;
    Ok(ctx.tau_for(a, v_set.union(cx), cx.len()))
}

fn check_v_side(
    family: &SetFamily,
    cfg: &AuditConfig,
    v_set: ElemSet,
    exact_size: bool,
) -> Result<()> {
    if !v_set.within(family.n()) || !v_set.is_disjoint(cfg.u) {
        return Err(Error::InvalidInput("V must be a subset of [n] \\ U".into()));
    }
    if exact_size && v_set.len() != cfg.v {
        return Err(Error::InvalidInput(format!(
            "|V| = {} but the config fixes v = {}",
            v_set.len(),
            cfg.v
        )));
    }
    Ok(())
}

/// `N(A, B, x, V)`: members of `tau(A, x, V)` whose residual meets
/// `chi(x,U)` exactly in `B`. Requires `A ⊆ B ⊆ chi(x,U)`.
pub fn count_tally(
    family: &SetFamily,
    cfg: &AuditConfig,
    a: ElemSet,
    b: ElemSet,
    x: usize,
    v_set: ElemSet,
) -> Result<u64> {
    let ctx = Ctx::build(family, cfg)?;
    let cx = ctx.chi_u[check_index(family, x)? - 1];
    if !a.is_subset_of(b) || !b.is_subset_of(cx) {
        return Err(Error::InvalidInput("need A ⊆ B ⊆ chi(x,U)".into()));
    }
    check_v_side(family, cfg, v_set, false)?;
    let kx = v_set.union(cx);
    let count = ctx
        .tau_for(a, kx, cx.len())
        .into_iter()
        .filter(|&y| ctx.chi_u[y - 1].intersection(cx) == b)
        .count();
    Ok(count as u64)
}

/// One query bundle: `tau`, `phi`, the case-0 minimizer `j`, and the
/// tally for an intersection pattern `B`. Diagnostic companion to the
/// encoder; tests exercise the definitions through it.
#[derive(Clone, Debug)]
pub struct TauQuery {
    pub a: ElemSet,
    pub b: ElemSet,
    pub x: usize,
    pub v_set: ElemSet,
    pub tau: Vec<usize>,
    pub phi: BigRational,
    pub j: usize,
    pub chi_j: ElemSet,
    pub tally: u64,
}

pub fn tau_query(
    family: &SetFamily,
    cfg: &AuditConfig,
    a: ElemSet,
    b: ElemSet,
    x: usize,
    v_set: ElemSet,
) -> Result<TauQuery> {
    let ctx = Ctx::build(family, cfg)?;
    let cx = ctx.chi_u[check_index(family, x)? - 1];
    if !a.is_subset_of(b) || !b.is_subset_of(cx) {
        return Err(Error::InvalidInput("need A ⊆ B ⊆ chi(x,U)".into()));
    }
    check_v_side(family, cfg, v_set, false)?;
    let kx = v_set.union(cx);
    let tau = ctx.tau_for(a, kx, cx.len());
    let tally = tau
        .iter()
        .filter(|&&y| ctx.chi_u[y - 1].intersection(cx) == b)
        .count() as u64;
    let j = ctx
        .min_residual_inside(kx)
        .expect("x itself qualifies for j");
    Ok(TauQuery {
        a,
        b,
        x,
        v_set,
        tau,
        phi: ctx.phi_value(cx.len(), a.len()),
        j,
        chi_j: ctx.chi_u[j - 1],
        tally,
    })
}

/// Per-pair audit record: case bit, field widths in emission order
/// (case bit excluded), residual sizes, and on case-0 pairs the
/// minimizer `j` with the overlap `|chi(j,U) ∩ chi(x,U)|`.
#[derive(Clone, Debug)]
pub struct PairRecord {
    pub x: usize,
    pub v_set: ElemSet,
    pub case1: bool,
    pub total_bits: usize,
    pub field_bits: Vec<usize>,
    pub chi_u_size: usize,
    pub chi_w_size: usize,
    pub j: Option<usize>,
    pub overlap: Option<usize>,
}

fn encode_with(ctx: &Ctx, x: usize, v_set: ElemSet) -> Result<(BitString, PairRecord)> {
    let family = ctx.family;
    let cfg = ctx.cfg;
    check_index(family, x)?;
    check_v_side(family, cfg, v_set, true)?;

    let cx = ctx.chi_u[x - 1];
    let m = cx.len();
    let w = cfg.u.union(v_set);
    let cw = chi(family, x, w)?.value;
    let a_sz = cw.len();
    debug_assert!(a_sz <= m, "residuals shrink as W grows");
    let kx = v_set.union(cx);
    let phi_val = ctx.phi_value(m, a_sz);

    let case1 = combinations(&cx.elems(), a_sz)
        .any(|a| exceeds(ctx.tau_for(a, kx, m).len(), &phi_val));

    let mut bits = BitString::new();
    bits.push(case1);
    let mut fields = Vec::new();
    let mut mark = bits.len();
    let field_done = |bits: &BitString, fields: &mut Vec<usize>, mark: &mut usize| {
        fields.push(bits.len() - *mark);
        *mark = bits.len();
    };

    let (j, overlap);
    if !case1 {
        // (a) residual size against U, unary
        bits.extend(&unary_encode(m));
        field_done(&bits, &mut fields, &mut mark);

        // (b) the union V ∪ chi(x,U), ranked among subsets of [n] \ U
        // with size in v ..= v + m
        let total = subset_range_count(ctx.ground.len(), cfg.v, cfg.v + m);
        let rank = rank_subset(&ctx.ground, cfg.v, cfg.v + m, kx)?;
        bits.push_bits(rank, fixed_width(total));
        field_done(&bits, &mut fields, &mut mark);

        // (c) overlap with the smallest residual inside the union
        let jj = ctx.min_residual_inside(kx).expect("x qualifies for j");
        let cj = ctx.chi_u[jj - 1];
        assert!(cj.len() <= m, "x is a candidate for j");
        let b0 = cx.intersection(cj);
        assert!(a_sz <= b0.len(), "overlap must reach |chi(x,W)|");
        for e in cj.iter() {
            bits.push(cx.contains(e));
        }
        field_done(&bits, &mut fields, &mut mark);

        // (c') |chi(x,W)| in unary; the one schedule addition that makes
        // decoding total
        bits.extend(&unary_encode(a_sz));
        field_done(&bits, &mut fields, &mut mark);

        // (d) rank of x inside tau for the lexicographically first
        // selector of that size
        let a = b0.smallest(a_sz);
        let t = ctx.tau_for(a, kx, m);
        let pos = t
            .iter()
            .position(|&y| y == x)
            .expect("self-membership of x in tau") as u128;
        bits.push_bits(pos, fixed_width(t.len() as u128));
        field_done(&bits, &mut fields, &mut mark);

        // (e) chart of W ∩ chi(x,U); pins down V inside the union
        for e in cx.iter() {
            bits.push(v_set.contains(e));
        }
        field_done(&bits, &mut fields, &mut mark);

        j = Some(jj);
        overlap = Some(b0.len());
    } else {
        // (a) the index directly
        bits.push_bits((x - 1) as u128, fixed_width(family.len() as u128));
        field_done(&bits, &mut fields, &mut mark);

        // (b) the first violating selector, charted over chi(x,U)
        let a_viol = combinations(&cx.elems(), a_sz)
            .find(|a| exceeds(ctx.tau_for(*a, kx, m).len(), &phi_val))
            .expect("case 1 has a violating selector");
        for e in cx.iter() {
            bits.push(a_viol.contains(e));
        }
        field_done(&bits, &mut fields, &mut mark);

        // (c) V ranked among the sets that violate the threshold
        let vs = ctx.violating_vs(a_viol, cx, m, &phi_val);
        let pos = vs
            .iter()
            .position(|s| *s == v_set)
            .expect("the encoded V violates the threshold") as u128;
        bits.push_bits(pos, fixed_width(vs.len() as u128));
        field_done(&bits, &mut fields, &mut mark);

        j = None;
        overlap = None;
    }

    let record = PairRecord {
        x,
        v_set,
        case1,
        total_bits: bits.len(),
        field_bits: fields,
        chi_u_size: m,
        chi_w_size: a_sz,
        j,
        overlap,
    };
    Ok((bits, record))
}

fn decode_with(ctx: &Ctx, bits: &BitString) -> Result<(usize, ElemSet)> {
    let family = ctx.family;
    let cfg = ctx.cfg;
    let mut r = BitReader::new(bits);
    let case1 = r.read_bit()?;
    if !case1 {
        let m = r.read_unary()?;
        if m > family.k() as usize {
            return Err(Error::Decode(format!("residual size {m} exceeds k")));
        }
        let total = subset_range_count(ctx.ground.len(), cfg.v, cfg.v + m);
        let rank = r.read_bits(fixed_width(total))?;
        if rank >= total {
            return Err(Error::Decode("union rank out of range".into()));
        }
        let kx = unrank_subset(&ctx.ground, cfg.v, cfg.v + m, rank)?;
        let j = ctx
            .min_residual_inside(kx)
            .ok_or_else(|| Error::Decode("no residual fits inside the union".into()))?;
        let cj = ctx.chi_u[j - 1];
        let mut b0 = ElemSet::empty();
        for e in cj.iter() {
            if r.read_bit()? {
                b0.insert(e);
            }
        }
        let a_sz = r.read_unary()?;
        if a_sz > b0.len() {
            return Err(Error::Decode("selector size exceeds the overlap".into()));
        }
        let a = b0.smallest(a_sz);
        let t = ctx.tau_for(a, kx, m);
        let pos = r.read_bits(fixed_width(t.len() as u128))?;
        if pos >= t.len() as u128 {
            return Err(Error::Decode("tau rank out of range".into()));
        }
        let x = t[pos as usize];
        let cx = ctx.chi_u[x - 1];
        if cx.len() != m {
            return Err(Error::Decode("decoded index has the wrong residual size".into()));
        }
        let mut v_in_cx = ElemSet::empty();
        for e in cx.iter() {
            if r.read_bit()? {
                v_in_cx.insert(e);
            }
        }
        let v_set = kx.difference(cx).union(v_in_cx);
        if v_set.len() != cfg.v {
            return Err(Error::Decode("reconstructed V has the wrong size".into()));
        }
        r.expect_done()?;
        Ok((x, v_set))
    } else {
        let xr = r.read_bits(fixed_width(family.len() as u128))?;
        if xr >= family.len() as u128 {
            return Err(Error::Decode("index rank out of range".into()));
        }
        let x = xr as usize + 1;
        let cx = ctx.chi_u[x - 1];
        let mut a = ElemSet::empty();
        for e in cx.iter() {
            if r.read_bit()? {
                a.insert(e);
            }
        }
        let phi_val = ctx.phi_value(cx.len(), a.len());
        let vs = ctx.violating_vs(a, cx, cx.len(), &phi_val);
        let pos = r.read_bits(fixed_width(vs.len() as u128))?;
        if pos >= vs.len() as u128 {
            return Err(Error::Decode("V rank out of range".into()));
        }
        let v_set = vs[pos as usize];
        r.expect_done()?;
        Ok((x, v_set))
    }
}

/// Encodes one pair `(x, V)`; `V` must be a `v`-subset of `[n] \ U`.
pub fn encode_pair(
    family: &SetFamily,
    cfg: &AuditConfig,
    x: usize,
    v_set: ElemSet,
) -> Result<BitString> {
    let ctx = Ctx::build(family, cfg)?;
    Ok(encode_with(&ctx, x, v_set)?.0)
}

/// Inverse of [`encode_pair`] under the same family and config. Fails on
/// truncated input, out-of-range field ranks, and trailing bits; a config
/// mismatch surfaces as an error or as a re-encode disagreement.
pub fn decode_pair(family: &SetFamily, cfg: &AuditConfig, bits: &BitString) -> Result<(usize, ElemSet)> {
    let ctx = Ctx::build(family, cfg)?;
    decode_with(&ctx, bits)
}

/// Least-squares fit of codeword excess over `log2(pair count)` against
/// the two residual sizes.
#[derive(Clone, Copy, Debug)]
pub struct Regression {
    /// Cost attributed to each element of `chi(X,U)`.
    pub per_chi_u: f64,
    /// Saving attributed to each element of `chi(X,W)`.
    pub per_chi_w: f64,
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub pair_count: u64,
    pub records: Vec<PairRecord>,
    pub prefix_free: bool,
    /// Lexicographically first offending pair (1-based positions in the
    /// pair enumeration), when any.
    pub first_violation: Option<(usize, usize)>,
    /// Exact mean codeword length.
    pub mean_length: BigRational,
    pub log2_pairs: f64,
    /// Exact verdict `2^(total bits) >= pairs^pairs`.
    pub lemma4_holds: bool,
    /// Exact `E_X |chi(X,U)|`.
    pub mean_chi_u: BigRational,
    /// Exact `E_{X,V} |chi(X,W)|`.
    pub mean_chi_w: BigRational,
    pub regression: Option<Regression>,
    pub warnings: Vec<String>,
}

/// Exhaustively encodes every pair `(x, V)`, decodes each word back,
/// scans for prefix violations, and accounts for lengths. Errors if the
/// pair space exceeds `budget`.
pub fn audit(family: &SetFamily, cfg: &AuditConfig, budget: u64) -> Result<AuditReport> {
    let ctx = Ctx::build(family, cfg)?;
    let g = ctx.ground.len();
    let pair_count_big = BigUint::from(family.len())
        * crate::numeric::binomial_big(g as u64, cfg.v as u64);
    if pair_count_big > BigUint::from(budget) {
        return Err(Error::BudgetExceeded {
            required: pair_count_big.to_string(),
            budget,
        });
    }
    let pair_count: u64 = pair_count_big
        .try_into()
        .map_err(|_| Error::Overflow("pair count".into()))?;
    if pair_count == 0 {
        return Err(Error::InvalidInput("no pairs to audit".into()));
    }

    let pairs: Vec<(usize, ElemSet)> = (1..=family.len())
        .flat_map(|x| {
            combinations(&ctx.ground, cfg.v)
                .map(move |v_set| (x, v_set))
                .collect::<Vec<_>>()
        })
        .collect();

    let encoded: Vec<(BitString, PairRecord)> = pairs
        .par_iter()
        .map(|&(x, v_set)| {
            let (bits, record) = encode_with(&ctx, x, v_set)?;
            let (x2, v2) = decode_with(&ctx, &bits)?;
            if x2 != x || v2 != v_set {
                return Err(Error::Decode(format!(
                    "round trip failed for pair ({x}, {v_set}): got ({x2}, {v2})"
                )));
            }
            Ok((bits, record))
        })
        .collect::<Result<_>>()?;

    let words: Vec<BitString> = encoded.iter().map(|(b, _)| b.clone()).collect();
    let records: Vec<PairRecord> = encoded.into_iter().map(|(_, r)| r).collect();

    let prefix_free = is_prefix_free_sorted(&words);
    let first_violation = if prefix_free {
        None
    } else {
        match check_prefix_free(&PrefixCode::from_words(words)) {
            PrefixCheck::Violation { i, j } => Some((i, j)),
            PrefixCheck::PrefixFree => None,
        }
    };

    let total_bits: u64 = records.iter().map(|r| r.total_bits as u64).sum();
    let lemma4_holds = (BigUint::one() << total_bits as usize)
        >= BigUint::from(pair_count).pow(pair_count as u32);

    let chi_u_total: u64 = ctx.chi_u.iter().map(|c| c.len() as u64).sum();
    let chi_w_total: u64 = records.iter().map(|r| r.chi_w_size as u64).sum();

    let log2_pairs = (pair_count as f64).log2();
    let regression = fit_regression(&records, log2_pairs);

    Ok(AuditReport {
        pair_count,
        prefix_free,
        first_violation,
        mean_length: BigRational::new(total_bits.into(), pair_count.into()),
        log2_pairs,
        lemma4_holds,
        mean_chi_u: BigRational::new(chi_u_total.into(), (family.len() as u64).into()),
        mean_chi_w: BigRational::new(chi_w_total.into(), pair_count.into()),
        regression,
        warnings: cfg.warnings(family),
        records,
    })
}

fn fit_regression(records: &[PairRecord], log2_pairs: f64) -> Option<Regression> {
    // least squares for excess ~ a*|chi(X,U)| - b*|chi(X,W)|
    let (mut s_mm, mut s_mw, mut s_ww, mut s_me, mut s_we) = (0f64, 0f64, 0f64, 0f64, 0f64);
    for r in records {
        let m = r.chi_u_size as f64;
        let w = r.chi_w_size as f64;
        let e = r.total_bits as f64 - log2_pairs;
        s_mm += m * m;
        s_mw += m * w;
        s_ww += w * w;
        s_me += m * e;
        s_we += w * e;
    }
    let det = s_mm * s_ww - s_mw * s_mw;
    if det.abs() < 1e-9 {
        return None;
    }
    let a = (s_me * s_ww - s_mw * s_we) / det;
    let b = -(s_mm * s_we - s_mw * s_me) / det;
    Some(Regression {
        per_chi_u: a,
        per_chi_w: b,
    })
}
