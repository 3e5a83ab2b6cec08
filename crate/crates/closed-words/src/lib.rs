//! Counting and classification of closed and privileged words.
//!
//! A word is *closed* if it has a border occurring in it exactly twice, and
//! *privileged* if it has length at most 1 or a privileged border occurring
//! exactly twice; by convention the words of length 0 and 1 count as closed
//! too, keeping the privileged words a subset of the closed words at every
//! length.
//!
//! The crate provides:
//!
//! - [`word`]: borders, the closed/privileged predicates, canonical forms;
//! - [`avoidance`]: exact factor-avoidance counts A_w(n) via automaton DP,
//!   their maximum mu(n, m) over patterns of a length, brute-force oracles,
//!   and the exact integer avoidance upper bound;
//! - [`census`]: exhaustive exact counts C(n), C(n, m), B(n) with parallel
//!   sharding and an on-disk cache;
//! - [`bounds`]: the asymptotic bound formulas evaluated numerically against
//!   the exact counts, with empirical constants extracted per sweep.
//!
//! All counts are arbitrary-precision integers ([`BigCount`]); bound shapes
//! are evaluated in log-domain so no sweep overflows.

pub mod avoidance;
pub mod bounds;
pub mod census;
pub mod word;

/// Exact nonnegative count; censuses and avoidance counts reach `q^n`.
pub type BigCount = num_bigint::BigUint;

pub use avoidance::{
    avoidance_count, brute_force_avoidance, canonical_patterns, mu_exact, mu_exact_with_witness,
    mu_upper_lemma1, AvoidanceError, FactorAutomaton, MuValue,
};
pub use bounds::{
    corollary1_ratio, eq1_check, lemma3_check, lemma4_ratio, ln_count, prop2_value, prop3_sides,
    theorem1_ratio, theorem2_report, AsymptoticParams, BoundReport, BoundRow, BoundsError,
    Eq1Check, Formula, Lemma3Branch, Lemma3Check, Prop3Sides, Theorem2Report, DEFAULT_KAPPA,
};
pub use census::{
    census_range, load_census, run_census, save_census, shard_plan, CensusCache, CensusError,
    CensusTable, ShardSpec,
};
pub use word::{Alphabet, BorderProfile, Letter, PrivilegeMemo, Word, WordError};

/// Default cap on `q^n` for exhaustive scans (census, brute-force oracle).
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 34;

/// Default cap on `q^m` for mu pattern scans.
pub const DEFAULT_MU_SCAN_BUDGET: u64 = 1 << 20;
