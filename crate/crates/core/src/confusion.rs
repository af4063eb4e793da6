//! Pairwise confusion between algorithms under a Gaussian noise model.
//!
//! For an observed agent `i` and a candidate agent `j`, each metric key `g`
//! contributes the log of a normal density evaluated at `mu_i` with mean
//! `mu_j` and scale `s = sigma_i + sigma_j`:
//!
//! ```text
//! w(i, j) = sum_g  -(mu_ig - mu_jg)^2 / (2 s^2) - ln(2 pi s^2) / 2
//! ```
//!
//! Row `i` of the confusion matrix is the softmax of `w(i, .)`. Working in log
//! space keeps products over many metric keys from underflowing; under a
//! uniform prior over agents the result is the normalised product of densities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{MetricKey, PerformanceTable};

/// Tolerance on row sums accepted by [`ConfusionMatrix::new`].
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// How two standard deviations combine into the scale of the density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    /// `sigma_i + sigma_j`.
    #[default]
    Sum,
    /// Root of summed squares, `sqrt(sigma_i^2 + sigma_j^2)`.
    Rss,
}

impl NoiseModel {
    #[inline]
    pub fn scale(self, a: f64, b: f64) -> f64 {
        match self {
            NoiseModel::Sum => a + b,
            NoiseModel::Rss => a.hypot(b),
        }
    }
}

impl std::str::FromStr for NoiseModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sum" => Ok(NoiseModel::Sum),
            "rss" => Ok(NoiseModel::Rss),
            other => Err(format!("unknown noise model `{other}` (expected sum or rss)")),
        }
    }
}

/// A non-empty set of distinct metric keys, in caller order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricSet {
    keys: Vec<MetricKey>,
}

impl MetricSet {
    pub fn new(keys: Vec<MetricKey>) -> Result<Self> {
        if keys.is_empty() {
            return Err(Error::domain("metric set must not be empty"));
        }
        for (i, k) in keys.iter().enumerate() {
            if keys[..i].contains(k) {
                return Err(Error::domain(format!("metric key {k} listed twice")));
            }
        }
        Ok(MetricSet { keys })
    }

    pub fn single(key: MetricKey) -> Self {
        MetricSet { keys: vec![key] }
    }

    pub fn keys(&self) -> &[MetricKey] {
        &self.keys
    }

    pub(crate) fn resolve(&self, table: &PerformanceTable) -> Result<Vec<usize>> {
        self.keys
            .iter()
            .map(|k| table.metric_index(k).ok_or_else(|| Error::MissingMetric(k.to_string())))
            .collect()
    }
}

#[inline]
fn log_density(mu_obs: f64, sd_obs: f64, mu_cand: f64, sd_cand: f64, noise: NoiseModel) -> f64 {
    let s = noise.scale(sd_cand, sd_obs);
    let z = (mu_obs - mu_cand) / s;
    -0.5 * z * z - 0.5 * (std::f64::consts::TAU * s * s).ln()
}

/// Unnormalised log weight of `candidate` as the explanation of `observed`.
pub fn log_weight(
    table: &PerformanceTable,
    observed: usize,
    candidate: usize,
    g_set: &MetricSet,
    noise: NoiseModel,
) -> Result<f64> {
    let n = table.agent_count();
    if observed >= n || candidate >= n {
        return Err(Error::domain(format!("agent index out of range (table has {n} agents)")));
    }
    let mut w = 0.0;
    for m in g_set.resolve(table)? {
        let o = table.stat(observed, m);
        let c = table.stat(candidate, m);
        w += log_density(o.mean, o.stddev, c.mean, c.stddev, noise);
    }
    Ok(w)
}

/// Dense `n x n` matrix of accumulated log weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LogWeights {
    n: usize,
    w: Vec<f64>,
}

impl LogWeights {
    pub fn zeros(n: usize) -> Self {
        LogWeights { n, w: vec![0.0; n * n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, observed: usize, candidate: usize) -> f64 {
        self.w[observed * self.n + candidate]
    }

    /// Adds the contribution of one metric column of `table`.
    pub fn add_metric(&mut self, table: &PerformanceTable, metric: usize, noise: NoiseModel) {
        debug_assert_eq!(table.agent_count(), self.n);
        for i in 0..self.n {
            let o = table.stat(i, metric);
            let row = &mut self.w[i * self.n..(i + 1) * self.n];
            for (j, slot) in row.iter_mut().enumerate() {
                let c = table.stat(j, metric);
                *slot += log_density(o.mean, o.stddev, c.mean, c.stddev, noise);
            }
        }
    }

    pub fn for_metrics(table: &PerformanceTable, metrics: &[usize], noise: NoiseModel) -> Self {
        let mut lw = LogWeights::zeros(table.agent_count());
        for &m in metrics {
            lw.add_metric(table, m, noise);
        }
        lw
    }

    pub fn plus(&self, other: &LogWeights) -> LogWeights {
        debug_assert_eq!(self.n, other.n);
        LogWeights {
            n: self.n,
            w: self.w.iter().zip(&other.w).map(|(a, b)| a + b).collect(),
        }
    }

    /// Row-wise softmax.
    pub fn softmax_rows(&self) -> Vec<Vec<f64>> {
        self.w
            .chunks(self.n)
            .map(|row| {
                let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = row.iter().map(|&x| (x - max).exp()).collect();
                let total: f64 = e.iter().sum();
                e.into_iter().map(|x| x / total).collect()
            })
            .collect()
    }
}

/// Row-stochastic matrix of `p(candidate | observed)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    agents: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl ConfusionMatrix {
    /// Validates shape, entry range and row sums.
    pub fn new(agents: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != agents.len() {
            return Err(Error::domain("confusion matrix row count differs from agent count"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != agents.len() {
                return Err(Error::domain(format!("confusion matrix row {i} has wrong length")));
            }
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::NotStochastic { row: i, sum });
            }
        }
        Ok(ConfusionMatrix { agents, rows })
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn size(&self) -> usize {
        self.agents.len()
    }

    pub fn get(&self, observed: usize, candidate: usize) -> f64 {
        self.rows[observed][candidate]
    }

    pub(crate) fn from_log_weights(agents: Vec<String>, lw: &LogWeights) -> Self {
        ConfusionMatrix {
            agents,
            rows: lw.softmax_rows(),
        }
    }
}

pub(crate) fn require_two_agents(table: &PerformanceTable) -> Result<()> {
    if table.agent_count() < 2 {
        return Err(Error::domain("discrimination undefined for fewer than two algorithms"));
    }
    Ok(())
}

pub fn confusion(table: &PerformanceTable, g_set: &MetricSet, noise: NoiseModel) -> Result<ConfusionMatrix> {
    require_two_agents(table)?;
    let metrics = g_set.resolve(table)?;
    let lw = LogWeights::for_metrics(table, &metrics, noise);
    Ok(ConfusionMatrix::from_log_weights(table.agents().to_vec(), &lw))
}
