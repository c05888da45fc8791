//! Exact enumerators, seeded Monte Carlo estimators, and exhaustive
//! oracles.
//!
//! Estimators batch their trials over independent seeded streams and
//! aggregate with integer sums, so results are bit-identical for a given
//! `(seed, trials)` regardless of thread schedule. Exact modes enumerate
//! the full probability space and return rationals; they refuse to start
//! when the space exceeds the budget instead of silently sampling.

use num::{BigRational, BigUint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chi::{chi, covers};
use crate::error::{Error, Result};
use crate::family::{r_threshold_lemma, SetFamily, SpreadParams};
use crate::numeric::{binomial_big, clopper_pearson, ratio_from_u64, ratio_to_f64, Z95};
use crate::set::{combinations, ground_elems, ElemSet};
use crate::sunflower::{is_sunflower, sample_partition_rng, Sunflower};

/// Default enumeration budget (elements visited by an exact mode).
pub const DEFAULT_BUDGET: u64 = 20_000_000;

const BATCH: u64 = 1024;

/// A seeded Monte Carlo estimate with a 95% normal-approximation
/// confidence half-width.
#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    pub trials: u64,
    pub seed: u64,
}

/// One statistic of one run, exact or estimated.
#[derive(Clone, Debug)]
pub enum StatValue {
    Exact(BigRational),
    Estimate { mean: f64, half_width: f64 },
}

#[derive(Clone, Debug)]
pub struct ExperimentRecord {
    pub family_hash: String,
    pub statistic: String,
    /// The index the statistic is parameterized by (`w`, `p`, or `m`).
    pub param: u64,
    pub value: StatValue,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

impl ExperimentRecord {
    fn exact(family: &SetFamily, statistic: &str, param: u64, value: BigRational) -> Self {
        ExperimentRecord {
            family_hash: family.hash_hex(),
            statistic: statistic.to_string(),
            param,
            value: StatValue::Exact(value),
            trials: None,
            seed: None,
        }
    }

    fn estimated(family: &SetFamily, statistic: &str, param: u64, est: Estimate) -> Self {
        ExperimentRecord {
            family_hash: family.hash_hex(),
            statistic: statistic.to_string(),
            param,
            value: StatValue::Estimate {
                mean: est.mean,
                half_width: est.half_width,
            },
            trials: Some(est.trials),
            seed: Some(est.seed),
        }
    }
}

fn check_w(family: &SetFamily, w: usize) -> Result<()> {
    if w > family.n() as usize {
        return Err(Error::InvalidInput(format!(
            "w={w} exceeds the ground-set size {}",
            family.n()
        )));
    }
    Ok(())
}

fn check_enum_budget(family: &SetFamily, w: usize, budget: u64) -> Result<()> {
    let space = binomial_big(family.n() as u64, w as u64) * BigUint::from(family.len());
    if space > BigUint::from(budget) {
        return Err(Error::BudgetExceeded {
            required: space.to_string(),
            budget,
        });
    }
    Ok(())
}

/// Exact `E |chi(X, W)|` over uniform member index `X` and uniform `W`
/// of size exactly `w`.
pub fn exact_chi_expectation(family: &SetFamily, w: usize, budget: u64) -> Result<BigRational> {
    check_w(family, w)?;
    check_enum_budget(family, w, budget)?;
    if family.is_empty() {
        return Err(Error::InvalidInput("family must have at least one set".into()));
    }
    let ground = ground_elems(family.n());
    let w_sets: Vec<ElemSet> = combinations(&ground, w).collect();
    let total: u64 = w_sets
        .par_iter()
        .map(|w_set| {
            (1..=family.len())
                .map(|x| chi(family, x, *w_set).expect("index in range").size() as u64)
                .sum::<u64>()
        })
        .sum();
    let denom = w_sets.len() as u64 * family.len() as u64;
    Ok(BigRational::new(total.into(), denom.into()))
}

/// Sampled `E |chi(X, W)|` with independent uniform `(X, W)` per trial.
pub fn estimate_chi_expectation(
    family: &SetFamily,
    w: usize,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    check_w(family, w)?;
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    if family.is_empty() {
        return Err(Error::InvalidInput("family must have at least one set".into()));
    }
    let n = family.n() as usize;
    let l = family.len();
    let (sum, sum_sq) = batched_sums(trials, seed, |rng| {
        let mut w_set = ElemSet::empty();
        for i in rand::seq::index::sample(rng, n, w).iter() {
            w_set.insert(i as u32 + 1);
        }
        let x = rng.gen_range(1..=l);
        chi(family, x, w_set).expect("index in range").size() as u64
    });
    Ok(finish_estimate(sum, sum_sq, trials, seed))
}

/// Runs `trials` seeded trials in parallel batches; each batch `b` uses
/// the stream `b` of the base seed, so the integer sums are independent
/// of the thread schedule.
fn batched_sums(
    trials: u64,
    seed: u64,
    trial_fn: impl Fn(&mut ChaCha8Rng) -> u64 + Sync,
) -> (u64, u128) {
    let batches: u64 = trials.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let in_batch = BATCH.min(trials - b * BATCH);
            let mut sum = 0u64;
            let mut sum_sq = 0u128;
            for _ in 0..in_batch {
                let v = trial_fn(&mut rng);
                sum += v;
                sum_sq += (v as u128) * (v as u128);
            }
            (sum, sum_sq)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

fn finish_estimate(sum: u64, sum_sq: u128, trials: u64, seed: u64) -> Estimate {
    let n = trials as f64;
    let mean = sum as f64 / n;
    let var = if trials > 1 {
        ((sum_sq as f64) - n * mean * mean) / (n - 1.0)
    } else {
        0.0
    };
    let half_width = Z95 * (var.max(0.0) / n).sqrt();
    Estimate {
        mean,
        half_width,
        trials,
        seed,
    }
}

/// Exact probability that a uniform `w`-subset covers some member.
pub fn coverage_probability_exact(
    family: &SetFamily,
    w: usize,
    budget: u64,
) -> Result<BigRational> {
    check_w(family, w)?;
    check_enum_budget(family, w, budget)?;
    let ground = ground_elems(family.n());
    let w_sets: Vec<ElemSet> = combinations(&ground, w).collect();
    let covered = w_sets
        .par_iter()
        .filter(|w_set| covers(family, **w_set).is_some())
        .count() as u64;
    Ok(BigRational::new(covered.into(), (w_sets.len() as u64).into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CiMode {
    /// Normal approximation at 95%.
    Normal,
    /// Exact binomial (Clopper-Pearson) at 95%.
    ExactBinomial,
}

/// Sampled coverage probability. The estimate's half-width is the
/// half-range of the chosen interval.
pub fn coverage_probability_mc(
    family: &SetFamily,
    w: usize,
    trials: u64,
    seed: u64,
    ci: CiMode,
) -> Result<Estimate> {
    check_w(family, w)?;
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let n = family.n() as usize;
    let (hits, _) = batched_sums(trials, seed, |rng| {
        let mut w_set = ElemSet::empty();
        for i in rand::seq::index::sample(rng, n, w).iter() {
            w_set.insert(i as u32 + 1);
        }
        covers(family, w_set).is_some() as u64
    });
    let mean = hits as f64 / trials as f64;
    let half_width = match ci {
        CiMode::Normal => Z95 * (mean * (1.0 - mean) / trials as f64).sqrt(),
        CiMode::ExactBinomial => {
            let (lo, hi) = clopper_pearson(hits, trials, 0.95);
            (hi - lo) / 2.0
        }
    };
    Ok(Estimate {
        mean,
        half_width,
        trials,
        seed,
    })
}

/// Fraction of sampled partitions of `[n]` into `p` blocks where every
/// block covers some member.
pub fn partition_success_rate(
    family: &SetFamily,
    p: usize,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    if p == 0 || (family.n() as usize) < p {
        return Err(Error::InvalidInput(format!(
            "need n >= p, got n={} p={p}",
            family.n()
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let (hits, _) = batched_sums(trials, seed, |rng| {
        let partition = sample_partition_rng(family.n(), p, rng).expect("n >= p");
        partition
            .parts
            .iter()
            .all(|part| covers(family, *part).is_some()) as u64
    });
    let mean = hits as f64 / trials as f64;
    let half_width = Z95 * (mean * (1.0 - mean) / trials as f64).sqrt();
    Ok(Estimate {
        mean,
        half_width,
        trials,
        seed,
    })
}

/// Size schedule `w_m = ceil(kappa * m * n / r)` with the lemma-form
/// threshold `r`, reporting `E |chi(X,W)|` per level and the ratio to the
/// previous level. Ratios are recorded, never asserted. Levels whose
/// exact space fits the budget are enumerated; the rest are estimated.
pub fn contraction_schedule(
    family: &SetFamily,
    params: &SpreadParams,
    kappa: &BigRational,
    m_max: u64,
    trials: u64,
    seed: u64,
    budget: u64,
) -> Result<Vec<ExperimentRecord>> {
    use num::Signed;
    params.validate_relaxed()?;
    if !kappa.is_positive() {
        return Err(Error::InvalidInput("kappa must be positive".into()));
    }
    let r = r_threshold_lemma(&params.beta, &params.gamma, &params.epsilon, family.k())?;
    let n = family.n() as u64;
    let outside = params.outside_standard_regime();

    // the whole schedule must fit before any work starts
    let mut sizes = Vec::new();
    for m in 0..=m_max {
        let w_exact = kappa * ratio_from_u64(m * n) / &r;
        let w = w_exact.ceil().to_integer();
        let w: u64 = w
            .try_into()
            .map_err(|_| Error::Overflow("schedule size".into()))?;
        if w > n {
            return Err(Error::InvalidInput(format!(
                "schedule size w_{m} = {w} exceeds n = {n}"
            )));
        }
        sizes.push(w as usize);
    }

    let stat_name = |base: &str| {
        if outside {
            format!("{base}(outside_standard_regime)")
        } else {
            base.to_string()
        }
    };

    let mut records = Vec::new();
    let mut prev: Option<f64> = None;
    for (m, &w) in sizes.iter().enumerate() {
        let exact_ok = check_enum_budget(family, w, budget).is_ok();
        let (record, value) = if exact_ok {
            let v = exact_chi_expectation(family, w, budget)?;
            let value = ratio_to_f64(&v);
            (
                ExperimentRecord::exact(family, &stat_name("chi_expectation"), m as u64, v),
                value,
            )
        } else {
            let est = estimate_chi_expectation(family, w, trials, seed.wrapping_add(m as u64))?;
            (
                ExperimentRecord::estimated(
                    family,
                    &stat_name("chi_expectation"),
                    m as u64,
                    est,
                ),
                est.mean,
            )
        };
        records.push(record);
        if let Some(prev_value) = prev {
            if prev_value > 0.0 {
                records.push(ExperimentRecord {
                    family_hash: family.hash_hex(),
                    statistic: stat_name("chi_ratio"),
                    param: m as u64,
                    value: StatValue::Estimate {
                        mean: value / prev_value,
                        half_width: 0.0,
                    },
                    trials: None,
                    seed: None,
                });
            }
        }
        prev = Some(value);
    }
    Ok(records)
}

/// Every `p`-tuple of indices forming a sunflower, in lexicographic
/// index order. With `distinct`, tuples containing a repeated set are
/// skipped.
pub fn brute_force_sunflowers(
    family: &SetFamily,
    p: usize,
    distinct: bool,
    budget: u64,
) -> Result<Vec<Sunflower>> {
    if p < 2 {
        return Err(Error::InvalidInput("p must be at least 2".into()));
    }
    let l = family.len() as u64;
    let tuples = binomial_big(l, p as u64);
    if tuples > BigUint::from(budget) {
        return Err(Error::BudgetExceeded {
            required: tuples.to_string(),
            budget,
        });
    }
    let indices: Vec<u32> = (1..=family.len() as u32).collect();
    let mut out = Vec::new();
    for tuple in combinations(&indices, p) {
        let petals: Vec<usize> = tuple.iter().map(|i| i as usize).collect();
        if distinct {
            let mut masks: Vec<u64> = petals
                .iter()
                .map(|&i| family.set(i).expect("index valid").mask())
                .collect();
            masks.sort_unstable();
            if masks.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
        }
        if let Some(core) = is_sunflower(family, &petals)? {
            out.push(Sunflower { core, petals });
        }
    }
    Ok(out)
}

/// A maximum-cardinality pairwise-disjoint index set, lexicographically
/// smallest among maximums. Exhaustive with pruning; the budget caps the
/// number of visited search nodes.
pub fn max_disjoint(family: &SetFamily, budget: u64) -> Result<Vec<usize>> {
    struct Search<'a> {
        family: &'a SetFamily,
        best: Vec<usize>,
        current: Vec<usize>,
        nodes: u64,
        budget: u64,
    }
    impl Search<'_> {
        fn run(&mut self, next: usize, union: ElemSet) -> Result<()> {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::BudgetExceeded {
                    required: format!("more than {} search nodes", self.budget),
                    budget: self.budget,
                });
            }
            if self.current.len() > self.best.len() {
                self.best = self.current.clone();
            }
            let l = self.family.len();
            // even taking everything left cannot beat the best
            if self.current.len() + (l + 1 - next) <= self.best.len() {
                return Ok(());
            }
            for i in next..=l {
                let s = self.family.set(i).expect("index valid");
                if s.is_disjoint(union) {
                    self.current.push(i);
                    self.run(i + 1, union.union(s))?;
                    self.current.pop();
                }
            }
            Ok(())
        }
    }
    let mut search = Search {
        family,
        best: Vec::new(),
        current: Vec::new(),
        nodes: 0,
        budget,
    };
    search.run(1, ElemSet::empty())?;
    Ok(search.best)
}

/// Exact chi-expectation statistic as a record (CLI convenience).
pub fn chi_expectation_record(
    family: &SetFamily,
    w: usize,
    budget: u64,
) -> Result<ExperimentRecord> {
    let v = exact_chi_expectation(family, w, budget)?;
    Ok(ExperimentRecord::exact(family, "chi_expectation", w as u64, v))
}

pub fn chi_estimate_record(
    family: &SetFamily,
    w: usize,
    trials: u64,
    seed: u64,
) -> Result<ExperimentRecord> {
    let est = estimate_chi_expectation(family, w, trials, seed)?;
    Ok(ExperimentRecord::estimated(
        family,
        "chi_expectation",
        w as u64,
        est,
    ))
}

pub fn coverage_record(
    family: &SetFamily,
    w: usize,
    mode: Option<(u64, u64, CiMode)>,
    budget: u64,
) -> Result<ExperimentRecord> {
    match mode {
        None => {
            let v = coverage_probability_exact(family, w, budget)?;
            Ok(ExperimentRecord::exact(family, "coverage_probability", w as u64, v))
        }
        Some((trials, seed, ci)) => {
            let est = coverage_probability_mc(family, w, trials, seed, ci)?;
            Ok(ExperimentRecord::estimated(
                family,
                "coverage_probability",
                w as u64,
                est,
            ))
        }
    }
}

pub fn partition_record(
    family: &SetFamily,
    p: usize,
    trials: u64,
    seed: u64,
) -> Result<ExperimentRecord> {
    let est = partition_success_rate(family, p, trials, seed)?;
    Ok(ExperimentRecord::estimated(
        family,
        "partition_success_rate",
        p as u64,
        est,
    ))
}
