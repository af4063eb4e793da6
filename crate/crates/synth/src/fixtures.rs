//! Shared fixtures: random small tables for equivalence checks and a suite
//! of synthetic corpora covering every archetype.

use infosel_core::{aggregate, AggregateOptions, MetricKey, PerformanceStat, PerformanceTable, TableBuilder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::generate::{generate, Archetype, SynthSpec};

/// A random table with 2..=8 agents and 1..=4 metric keys, all within the
/// oracle's direct-evaluation range. Returns the table and its keys.
pub fn random_instance(seed: u64) -> (PerformanceTable, Vec<MetricKey>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents = rng.random_range(2..=8usize);
    let key_count = rng.random_range(1..=4usize);
    let keys: Vec<MetricKey> = (0..key_count)
        .map(|k| {
            if rng.random_bool(0.5) {
                MetricKey::win(format!("g{k}"))
            } else {
                MetricKey::score(format!("g{k}"))
            }
        })
        .collect();
    let mut b = TableBuilder::new();
    for a in 0..agents {
        for key in &keys {
            let stat = if key.measure == infosel_core::Measure::WinRate {
                PerformanceStat::new(rng.random_range(0.0..=1.0), rng.random_range(0.05..0.5), 100)
            } else {
                PerformanceStat::new(rng.random_range(-5.0..5.0), rng.random_range(0.3..3.0), 100)
            };
            b.insert(&format!("a{a}"), key.clone(), stat);
        }
    }
    (b.build().expect("complete by construction"), keys)
}

pub fn table_from_spec(spec: &SynthSpec) -> PerformanceTable {
    let records = generate(spec).expect("valid spec");
    aggregate(&records, &AggregateOptions::default())
        .expect("synthetic corpora are complete")
        .table
}

/// Named synthetic corpora exercising each archetype and their mixtures.
pub fn fixture_suite() -> Vec<(String, PerformanceTable)> {
    use Archetype::*;
    let specs: Vec<(&str, SynthSpec)> = vec![
        (
            "mixed-5x12",
            SynthSpec::cycled(
                5,
                12,
                &[
                    LinearSpread { gap: 1.0, sd: 2.0 },
                    TwoCluster { gap: 3.0, sd: 1.0 },
                    DelayedScore { gap: 0.5, sd: 1.0 },
                    Identical { mean: 1.0, sd: 1.0, win_p: 0.5 },
                ],
                60,
                11,
            ),
        ),
        (
            "linear-8",
            SynthSpec::cycled(8, 6, &[LinearSpread { gap: 0.7, sd: 1.5 }], 40, 12),
        ),
        (
            "two-cluster-6",
            SynthSpec::cycled(6, 5, &[TwoCluster { gap: 2.0, sd: 1.0 }], 50, 13),
        ),
        (
            "delayed-4",
            SynthSpec::cycled(4, 6, &[DelayedScore { gap: 1.5, sd: 2.0 }], 80, 14),
        ),
        (
            "with-duplicates-6",
            SynthSpec {
                agents: 6,
                problems: vec![
                    LinearSpread { gap: 1.0, sd: 1.0 },
                    TwoCluster { gap: 2.5, sd: 1.0 },
                    DuplicateOf(0),
                    DelayedScore { gap: 0.8, sd: 1.0 },
                    DuplicateOf(1),
                ],
                samples: 50,
                seed: 15,
                shuffle_agents: true,
            },
        ),
        (
            "noisy-3",
            SynthSpec::cycled(3, 8, &[LinearSpread { gap: 0.2, sd: 3.0 }, TwoCluster { gap: 0.5, sd: 2.0 }], 30, 16),
        ),
        (
            "wide-12",
            SynthSpec::cycled(12, 6, &[LinearSpread { gap: 2.0, sd: 1.0 }, DelayedScore { gap: 1.0, sd: 1.0 }], 40, 17),
        ),
    ];
    specs
        .into_iter()
        .map(|(name, spec)| (name.to_string(), table_from_spec(&spec)))
        .collect()
}
