//! Information-theoretic analysis of benchmark problem sets.
//!
//! Given noisy per-problem performance of a population of algorithms, each
//! problem is treated as a measurement channel: the more reliably the observed
//! performance identifies the algorithm that produced it, the more bits of
//! information the problem carries. The crate provides
//!
//! * ingestion of playthrough logs into a Gaussian [`PerformanceTable`],
//! * confusion matrices between algorithms for any set of metric keys,
//! * information gain per problem and per problem set, in bits,
//! * greedy selection of the most informative problem subset,
//! * correlation matrices and Ward clustering of the problem corpus.

pub mod cluster;
pub mod confusion;
pub mod correlation;
pub mod error;
pub mod info_gain;
pub mod record;
pub mod select;
pub mod stats_io;
pub mod table;

pub use cluster::{cluster, Clustering, Dendrogram, Merge};
pub use confusion::{confusion, log_weight, ConfusionMatrix, LogWeights, MetricSet, NoiseModel};
pub use correlation::{correlation_matrix, pearson, CorrelationMatrix};
pub use error::{Error, Result};
pub use info_gain::{
    info_gain_combined, info_gain_set, mutual_information, problem_gains, rank_problems, InfoGainBits,
    MetricMode, ProblemGains,
};
pub use record::{parse_records, PlaythroughRecord, RecordReader};
pub use select::{greedy_select, SelectOptions, SelectionReport, SelectionStep, StopReason};
pub use table::{
    aggregate, AggregateOptions, Aggregation, Aggregator, Measure, MetricKey, PerformanceStat, PerformanceTable,
    TableBuilder,
};
