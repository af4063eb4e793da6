//! Gaussian performance model: per (agent, problem, measure) mean, standard
//! deviation and sample count, aggregated from playthrough records.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::PlaythroughRecord;

pub const DEFAULT_SIGMA_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    #[serde(rename = "win")]
    WinRate,
    Score,
}

impl Measure {
    pub const ALL: [Measure; 2] = [Measure::WinRate, Measure::Score];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::WinRate => "win",
            Measure::Score => "score",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "win" | "winrate" | "win_rate" | "win-rate" => Ok(Measure::WinRate),
            "score" => Ok(Measure::Score),
            other => Err(format!("unknown measure `{other}` (expected win or score)")),
        }
    }
}

/// One measurement dimension: a problem observed through one measure.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MetricKey {
    pub problem: String,
    pub measure: Measure,
}

impl MetricKey {
    pub fn new(problem: impl Into<String>, measure: Measure) -> Self {
        MetricKey {
            problem: problem.into(),
            measure,
        }
    }

    pub fn win(problem: impl Into<String>) -> Self {
        Self::new(problem, Measure::WinRate)
    }

    pub fn score(problem: impl Into<String>) -> Self {
        Self::new(problem, Measure::Score)
    }
}

impl fmt::Display for MetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.problem, self.measure)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceStat {
    pub mean: f64,
    pub stddev: f64,
    pub count: u64,
}

impl PerformanceStat {
    pub fn new(mean: f64, stddev: f64, count: u64) -> Self {
        PerformanceStat { mean, stddev, count }
    }
}

/// Complete agents x metrics matrix of performance statistics.
///
/// Agents and metric keys are kept in lexicographic order; cells are stored
/// agent-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceTable {
    agents: Vec<String>,
    metrics: Vec<MetricKey>,
    cells: Vec<PerformanceStat>,
}

impl PerformanceTable {
    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn metrics(&self) -> &[MetricKey] {
        &self.metrics
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    /// Distinct problem identifiers, sorted.
    pub fn problems(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for m in &self.metrics {
            if out.last() != Some(&m.problem) {
                out.push(m.problem.clone());
            }
        }
        out
    }

    pub fn agent_index(&self, agent: &str) -> Option<usize> {
        self.agents.binary_search_by(|a| a.as_str().cmp(agent)).ok()
    }

    pub fn metric_index(&self, key: &MetricKey) -> Option<usize> {
        self.metrics.binary_search(key).ok()
    }

    pub fn stat(&self, agent: usize, metric: usize) -> &PerformanceStat {
        &self.cells[agent * self.metrics.len() + metric]
    }

    pub fn get(&self, agent: &str, key: &MetricKey) -> Option<&PerformanceStat> {
        Some(self.stat(self.agent_index(agent)?, self.metric_index(key)?))
    }

    /// Iterates `(agent, key, stat)` in table order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &MetricKey, &PerformanceStat)> + '_ {
        self.agents.iter().enumerate().flat_map(move |(a, agent)| {
            self.metrics
                .iter()
                .enumerate()
                .map(move |(m, key)| (agent.as_str(), key, self.stat(a, m)))
        })
    }

    /// Keeps only the listed metric keys (all must exist).
    pub fn restrict(&self, keys: &[MetricKey]) -> Result<PerformanceTable> {
        let mut b = TableBuilder::new();
        for key in keys {
            let m = self
                .metric_index(key)
                .ok_or_else(|| Error::MissingMetric(key.to_string()))?;
            for (a, agent) in self.agents.iter().enumerate() {
                b.insert(agent, key.clone(), *self.stat(a, m));
            }
        }
        b.build()
    }

    /// Returns a copy with every stddev raised to at least `floor`.
    pub fn with_sigma_floor(&self, floor: f64) -> PerformanceTable {
        let mut out = self.clone();
        for c in &mut out.cells {
            c.stddev = c.stddev.max(floor);
        }
        out
    }
}

/// Collects cells in any order and produces a validated, sorted table.
#[derive(Debug, Default, Clone)]
pub struct TableBuilder {
    cells: BTreeMap<(String, MetricKey), PerformanceStat>,
}

impl TableBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a cell, returning the previous value for a duplicate key.
    pub fn insert(&mut self, agent: &str, key: MetricKey, stat: PerformanceStat) -> Option<PerformanceStat> {
        self.cells.insert((agent.to_owned(), key), stat)
    }

    pub fn build(self) -> Result<PerformanceTable> {
        let agents: BTreeSet<&String> = self.cells.keys().map(|(a, _)| a).collect();
        let metrics: BTreeSet<&MetricKey> = self.cells.keys().map(|(_, m)| m).collect();
        if agents.is_empty() {
            return Err(Error::domain("performance table has no cells"));
        }
        let agents: Vec<String> = agents.into_iter().cloned().collect();
        let metrics: Vec<MetricKey> = metrics.into_iter().cloned().collect();
        let mut missing = Vec::new();
        let mut cells = Vec::with_capacity(agents.len() * metrics.len());
        for agent in &agents {
            for key in &metrics {
                match self.cells.get(&(agent.clone(), key.clone())) {
                    Some(stat) => cells.push(*stat),
                    None => {
                        let pair = (agent.clone(), key.problem.clone());
                        if missing.last() != Some(&pair) {
                            missing.push(pair);
                        }
                        cells.push(PerformanceStat::new(f64::NAN, f64::NAN, 0));
                    }
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::Incomplete { missing });
        }
        for ((agent, key), s) in &self.cells {
            let ok = s.mean.is_finite()
                && s.stddev.is_finite()
                && s.stddev > 0.0
                && s.count >= 1
                && (key.measure != Measure::WinRate || (0.0..=1.0).contains(&s.mean));
            if !ok {
                return Err(Error::domain(format!(
                    "invalid statistics for ({agent}, {key}): mean {}, stddev {}, count {}",
                    s.mean, s.stddev, s.count
                )));
            }
        }
        Ok(PerformanceTable {
            agents,
            metrics,
            cells,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AggregateOptions {
    pub sigma_floor: f64,
    /// Drop agents that lack records for some problem instead of failing.
    pub allow_missing: bool,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        AggregateOptions {
            sigma_floor: DEFAULT_SIGMA_FLOOR,
            allow_missing: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Aggregation {
    pub table: PerformanceTable,
    pub warnings: Vec<String>,
    pub records: u64,
}

#[derive(Debug, Default, Clone)]
struct CellAccumulator {
    scores: Vec<f64>,
    wins: u64,
}

/// Partial sums over a batch of records. Batches may be merged in any order;
/// the finished table does not depend on partitioning or record order.
#[derive(Debug, Default, Clone)]
pub struct Aggregator {
    cells: HashMap<(Arc<str>, Arc<str>), CellAccumulator>,
    records: u64,
}

impl Aggregator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: &PlaythroughRecord) {
        let cell = self
            .cells
            .entry((record.agent.clone(), record.problem.clone()))
            .or_default();
        cell.scores.push(record.score);
        cell.wins += u64::from(record.win);
        self.records += 1;
    }

    pub fn merge(&mut self, other: Aggregator) {
        self.records += other.records;
        for (key, acc) in other.cells {
            let cell = self.cells.entry(key).or_default();
            cell.scores.extend(acc.scores);
            cell.wins += acc.wins;
        }
    }

    pub fn record_count(&self) -> u64 {
        self.records
    }

    pub fn finish(self, options: &AggregateOptions) -> Result<Aggregation> {
        if !(options.sigma_floor > 0.0 && options.sigma_floor.is_finite()) {
            return Err(Error::domain("sigma floor must be a positive finite number"));
        }
        if self.cells.is_empty() {
            return Err(Error::domain("no playthrough records"));
        }
        let mut warnings = Vec::new();
        let agents: BTreeSet<Arc<str>> = self.cells.keys().map(|(a, _)| a.clone()).collect();
        let problems: BTreeSet<Arc<str>> = self.cells.keys().map(|(_, p)| p.clone()).collect();

        let mut missing = Vec::new();
        let mut dropped = BTreeSet::new();
        for agent in &agents {
            for problem in &problems {
                if !self.cells.contains_key(&(agent.clone(), problem.clone())) {
                    missing.push((agent.to_string(), problem.to_string()));
                    dropped.insert(agent.clone());
                }
            }
        }
        if !missing.is_empty() {
            if !options.allow_missing {
                return Err(Error::Incomplete { missing });
            }
            warnings.push(format!(
                "dropped {} agent(s) lacking full problem coverage: {}",
                dropped.len(),
                dropped.iter().map(|a| &**a).collect::<Vec<_>>().join(", ")
            ));
            if dropped.len() == agents.len() {
                return Err(Error::Incomplete { missing });
            }
        }

        let mut builder = TableBuilder::new();
        let mut keys: Vec<_> = self.cells.into_iter().collect();
        keys.sort_by(|a, b| a.0.cmp(&b.0));
        for ((agent, problem), mut acc) in keys {
            if dropped.contains(&agent) {
                continue;
            }
            let n = acc.scores.len() as u64;
            if n == 1 {
                warnings.push(format!(
                    "({agent}, {problem}) has a single playthrough; stddev set to the floor {}",
                    options.sigma_floor
                ));
            }
            acc.scores.sort_by(f64::total_cmp);
            let (mean, sd) = sample_mean_sd(&acc.scores);
            builder.insert(
                &agent,
                MetricKey::score(&*problem),
                PerformanceStat::new(mean, sd.max(options.sigma_floor), n),
            );
            let (mean, sd) = bernoulli_mean_sd(acc.wins, n);
            builder.insert(
                &agent,
                MetricKey::win(&*problem),
                PerformanceStat::new(mean, sd.max(options.sigma_floor), n),
            );
        }
        Ok(Aggregation {
            table: builder.build()?,
            warnings,
            records: self.records,
        })
    }
}

/// Mean and Bessel-corrected standard deviation; stddev is 0 for one sample.
pub(crate) fn sample_mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// The same estimator as [`sample_mean_sd`] applied to 0/1 outcomes, in closed form.
fn bernoulli_mean_sd(wins: u64, n: u64) -> (f64, f64) {
    let mean = wins as f64 / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let losses = n - wins;
    let var = (wins as f64 * losses as f64) / (n as f64 * (n - 1) as f64);
    (mean, var.sqrt())
}

pub fn aggregate(records: &[PlaythroughRecord], options: &AggregateOptions) -> Result<Aggregation> {
    let mut agg = Aggregator::new();
    for r in records {
        agg.push(r);
    }
    agg.finish(options)
}
