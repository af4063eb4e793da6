//! Synthetic playthrough corpora with known structure, and an independent
//! reference oracle for information gain.
//!
//! Random streams come from ChaCha8 seeded with `seed_from_u64`, so a spec and
//! seed reproduce the same records on every platform.

pub mod fixtures;
pub mod generate;
pub mod oracle;

pub use generate::{generate, Archetype, SynthError, SynthSpec};
pub use oracle::{oracle_best_subset, oracle_greedy, oracle_info_gain, OracleError, OracleLimits};
