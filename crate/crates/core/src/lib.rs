//! Desk-scale toolkit for spread set families and sunflower extraction,
//! with a decodable prefix-free pair encoding and its length audit.
//!
//! The crate is organized around exact arithmetic: spreadness verdicts,
//! Kraft sums, threshold values, and expectation enumerations all use
//! arbitrary-precision rationals. Randomized procedures take explicit
//! seeds and are reproducible bit for bit.
//!
//! Modules:
//! - [`set`], [`family`]: bitset subsets, family I/O, generators,
//!   restriction, spreadness.
//! - [`chi`]: the minimal-residual operator and coverage queries.
//! - [`sunflower`]: recognition plus the greedy and spreadness-based
//!   extractors, and random partition sampling.
//! - [`coding`]: prefix-free codes, exact Kraft sums, the mean-length
//!   lower bound, unary and subset-rank primitives.
//! - [`audit`]: the two-case pair encoder, its decoder, and the
//!   exhaustive audit report.
//! - [`experiments`]: exact enumerators, seeded estimators, and
//!   brute-force oracles.

pub mod audit;
pub mod chi;
pub mod coding;
pub mod error;
pub mod experiments;
pub mod family;
pub mod numeric;
pub mod set;
pub mod sunflower;

pub use error::{Error, Result};
pub use num::BigRational;

pub use audit::{audit, decode_pair, encode_pair, AuditConfig, AuditReport, PairRecord};
pub use chi::{chi, chi_profile, covers, ChiResult};
pub use coding::{
    check_prefix_free, kraft_sum, random_code, shannon_converse_check, unary_decode,
    unary_encode, BitString, PrefixCheck, PrefixCode,
};
pub use experiments::{
    brute_force_sunflowers, coverage_probability_exact, coverage_probability_mc,
    estimate_chi_expectation, exact_chi_expectation, max_disjoint, partition_success_rate,
    CiMode, Estimate, ExperimentRecord, StatValue, DEFAULT_BUDGET,
};
pub use family::{
    generate_extremal, generate_random_family, link, parse_family, r_threshold_lemma,
    r_threshold_theorem, spread_check, spread_number, SetFamily, SpreadNumber, SpreadParams,
    SpreadReport, SpreadVerdict,
};
pub use set::ElemSet;
pub use sunflower::{
    find_disjoint_by_partition, find_sunflower_erdos_rado, find_sunflower_spread, is_sunflower,
    sample_partition, PartitionSample, Sunflower,
};
