//! Reference information gain by direct summation.
//!
//! Densities are multiplied and normalised exactly as written, with no log
//! space and no shared code with `infosel_core`'s numerical path. The table
//! is only read through its public accessors. The price is a limited range:
//! instances whose densities could underflow are refused.

use infosel_core::{MetricKey, MetricMode, NoiseModel, PerformanceTable};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("oracle supports at most {max} agents, got {got}")]
    TooManyAgents { max: usize, got: usize },
    #[error("oracle supports at most {max} metric keys, got {got}")]
    TooManyKeys { max: usize, got: usize },
    #[error("oracle needs at least two agents and one metric key")]
    TooSmall,
    #[error("metric {0} not in table")]
    MissingMetric(String),
    #[error("density product outside direct-evaluation range")]
    OutOfRange,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_agents: usize,
    pub max_keys: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_agents: 8,
            max_keys: 4,
        }
    }
}

const SMALLEST_DENSITY: f64 = 1e-280;

fn combined_sd(noise: NoiseModel, a: f64, b: f64) -> f64 {
    match noise {
        NoiseModel::Sum => b + a,
        NoiseModel::Rss => (a * a + b * b).sqrt(),
    }
}

fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let var = sd * sd;
    (-(x - mean) * (x - mean) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Direct confusion matrix `p(j | i)`.
pub fn oracle_confusion(
    table: &PerformanceTable,
    keys: &[MetricKey],
    noise: NoiseModel,
    limits: OracleLimits,
) -> Result<Vec<Vec<f64>>, OracleError> {
    let n = table.agents().len();
    if n < 2 || keys.is_empty() {
        return Err(OracleError::TooSmall);
    }
    if n > limits.max_agents {
        return Err(OracleError::TooManyAgents { max: limits.max_agents, got: n });
    }
    if keys.len() > limits.max_keys {
        return Err(OracleError::TooManyKeys { max: limits.max_keys, got: keys.len() });
    }
    let agents = table.agents();
    let mut rows = Vec::with_capacity(n);
    for observed in agents {
        let mut densities = Vec::with_capacity(n);
        for candidate in agents {
            let mut product = 1.0;
            for key in keys {
                let o = table
                    .get(observed, key)
                    .ok_or_else(|| OracleError::MissingMetric(key.to_string()))?;
                let c = table.get(candidate, key).expect("table is complete");
                product *= normal_pdf(o.mean, c.mean, combined_sd(noise, o.stddev, c.stddev));
            }
            if !(product.is_finite() && product > SMALLEST_DENSITY) {
                return Err(OracleError::OutOfRange);
            }
            densities.push(product);
        }
        let total: f64 = densities.iter().sum();
        rows.push(densities.iter().map(|d| d / total).collect());
    }
    Ok(rows)
}

fn mutual_information(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len() as f64;
    let mut conditional = 0.0;
    for row in rows {
        for &p in row {
            if p > 0.0 {
                conditional += (1.0 / n) * -(p * p.log2());
            }
        }
    }
    n.log2() - conditional
}

pub fn oracle_info_gain(
    table: &PerformanceTable,
    keys: &[MetricKey],
    noise: NoiseModel,
) -> Result<f64, OracleError> {
    oracle_info_gain_with(table, keys, noise, OracleLimits::default())
}

pub fn oracle_info_gain_with(
    table: &PerformanceTable,
    keys: &[MetricKey],
    noise: NoiseModel,
    limits: OracleLimits,
) -> Result<f64, OracleError> {
    Ok(mutual_information(&oracle_confusion(table, keys, noise, limits)?))
}

fn keys_for(problems: &[String], mode: MetricMode) -> Vec<MetricKey> {
    problems
        .iter()
        .flat_map(|p| match mode {
            MetricMode::WinRate => vec![MetricKey::win(p)],
            MetricMode::Score => vec![MetricKey::score(p)],
            MetricMode::Combined => vec![MetricKey::win(p), MetricKey::score(p)],
        })
        .collect()
}

/// Naive greedy: at every step try each remaining problem and keep the one
/// with the largest marginal gain (quantised to `epsilon`, ties by name).
/// Stops when no problem adds at least `epsilon` bits.
pub fn oracle_greedy(
    table: &PerformanceTable,
    mode: MetricMode,
    k: usize,
    epsilon: f64,
    noise: NoiseModel,
) -> Result<Vec<(String, f64)>, OracleError> {
    let limits = OracleLimits {
        max_agents: 8,
        max_keys: 16,
    };
    let mut problems: Vec<String> = table.metrics().iter().map(|m| m.problem.clone()).collect();
    problems.sort();
    problems.dedup();
    let mut chosen: Vec<String> = Vec::new();
    let mut out = Vec::new();
    let mut current = 0.0;
    while chosen.len() < k {
        let mut best: Option<(String, f64, i64)> = None;
        for p in problems.iter().filter(|p| !chosen.contains(p)) {
            let mut trial = chosen.clone();
            trial.push(p.clone());
            let gain = oracle_info_gain_with(table, &keys_for(&trial, mode), noise, limits)?;
            let marginal = gain - current;
            if marginal < epsilon {
                continue;
            }
            let q = (marginal / epsilon).round() as i64;
            let better = match &best {
                None => true,
                Some((name, _, bq)) => q > *bq || (q == *bq && p < name),
            };
            if better {
                best = Some((p.clone(), gain, q));
            }
        }
        let Some((p, gain, _)) = best else { break };
        chosen.push(p.clone());
        out.push((p, gain));
        current = gain;
    }
    Ok(out)
}

/// Exhaustive search for the `size`-subset of problems with maximal gain.
pub fn oracle_best_subset(
    table: &PerformanceTable,
    mode: MetricMode,
    size: usize,
    noise: NoiseModel,
) -> Result<(Vec<String>, f64), OracleError> {
    let limits = OracleLimits {
        max_agents: 8,
        max_keys: 16,
    };
    let mut problems: Vec<String> = table.metrics().iter().map(|m| m.problem.clone()).collect();
    problems.sort();
    problems.dedup();
    let n = problems.len();
    let mut best: Option<(Vec<String>, f64)> = None;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != size {
            continue;
        }
        let subset: Vec<String> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| problems[i].clone()).collect();
        let gain = oracle_info_gain_with(table, &keys_for(&subset, mode), noise, limits)?;
        if best.as_ref().is_none_or(|(_, g)| gain > *g) {
            best = Some((subset, gain));
        }
    }
    best.ok_or(OracleError::TooSmall)
}

#[cfg(test)]
mod tests {
    use super::*;
    use infosel_core::{PerformanceStat, TableBuilder};

    fn one_game(stats: &[(f64, f64)]) -> PerformanceTable {
        let mut b = TableBuilder::new();
        for (i, &(m, s)) in stats.iter().enumerate() {
            b.insert(&format!("a{i}"), MetricKey::score("g"), PerformanceStat::new(m, s, 10));
        }
        b.build().unwrap()
    }

    #[test]
    fn identical_agents_zero_bits_exactly() {
        let t = one_game(&[(2.0, 0.5); 4]);
        assert_eq!(oracle_info_gain(&t, &[MetricKey::score("g")], NoiseModel::Sum).unwrap(), 0.0);
    }

    #[test]
    fn separated_agents_reach_log2_n() {
        let t = one_game(&[(0.0, 0.1), (1.5, 0.1), (3.0, 0.1), (4.5, 0.1)]);
        let bits = oracle_info_gain(&t, &[MetricKey::score("g")], NoiseModel::Sum).unwrap();
        assert!((bits - 2.0).abs() < 1e-6);
    }

    #[test]
    fn three_agent_value() {
        let t = one_game(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]);
        let bits = oracle_info_gain(&t, &[MetricKey::score("g")], NoiseModel::Sum).unwrap();
        assert!((bits - 0.020_631_421_480_649_1).abs() < 1e-12);
    }

    #[test]
    fn scope_guard() {
        let t = one_game(&[(0.0, 1.0); 9]);
        assert!(matches!(
            oracle_info_gain(&t, &[MetricKey::score("g")], NoiseModel::Sum),
            Err(OracleError::TooManyAgents { .. })
        ));
        let far = one_game(&[(0.0, 0.01), (1000.0, 0.01)]);
        assert_eq!(
            oracle_info_gain(&far, &[MetricKey::score("g")], NoiseModel::Sum),
            Err(OracleError::OutOfRange)
        );
    }
}
