//! Mutual information of the belief channel defined by a confusion matrix,
//! under a uniform prior over agents.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::confusion::{confusion, ConfusionMatrix, MetricSet, NoiseModel};
use crate::error::Result;
use crate::table::{Measure, MetricKey, PerformanceTable};

/// Information gain in bits, `0 <= value <= log2(|A|)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InfoGainBits(f64);

impl InfoGainBits {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for InfoGainBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.8}", self.0)
    }
}

/// Shannon entropy of one row, in bits, with `0 log 0 = 0`.
fn row_entropy_bits(row: &[f64]) -> f64 {
    -row.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// `I(A^; A) = log2|A| - H(A^ | A)` with `p(a) = 1/|A|`.
pub fn mutual_information(c: &ConfusionMatrix) -> InfoGainBits {
    InfoGainBits(mutual_information_rows(c.rows()))
}

pub(crate) fn mutual_information_rows(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let ceiling = (n as f64).log2();
    let conditional = rows.iter().map(|r| row_entropy_bits(r)).sum::<f64>() / n as f64;
    // rounding can push the difference a few ulps outside the channel bounds
    (ceiling - conditional).clamp(0.0, ceiling)
}

pub fn info_gain_set(table: &PerformanceTable, g_set: &MetricSet, noise: NoiseModel) -> Result<InfoGainBits> {
    Ok(mutual_information(&confusion(table, g_set, noise)?))
}

/// Gain of one problem with win rate and score treated as two measurements.
pub fn info_gain_combined(table: &PerformanceTable, problem: &str, noise: NoiseModel) -> Result<InfoGainBits> {
    let set = MetricSet::new(vec![MetricKey::win(problem), MetricKey::score(problem)])?;
    info_gain_set(table, &set, noise)
}

/// Which measurements of a problem are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MetricMode {
    #[serde(rename = "win")]
    WinRate,
    Score,
    #[default]
    Combined,
}

impl MetricMode {
    pub fn keys(self, problem: &str) -> Vec<MetricKey> {
        match self {
            MetricMode::WinRate => vec![MetricKey::win(problem)],
            MetricMode::Score => vec![MetricKey::score(problem)],
            MetricMode::Combined => vec![MetricKey::win(problem), MetricKey::score(problem)],
        }
    }

    pub fn measures(self) -> &'static [Measure] {
        match self {
            MetricMode::WinRate => &[Measure::WinRate],
            MetricMode::Score => &[Measure::Score],
            MetricMode::Combined => &Measure::ALL,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MetricMode::WinRate => "win",
            MetricMode::Score => "score",
            MetricMode::Combined => "combined",
        }
    }
}

impl fmt::Display for MetricMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MetricMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "win" | "winrate" | "win-rate" => Ok(MetricMode::WinRate),
            "score" => Ok(MetricMode::Score),
            "combined" | "both" => Ok(MetricMode::Combined),
            other => Err(format!("unknown metric mode `{other}` (expected win, score or combined)")),
        }
    }
}

/// Single-problem gains under each metric mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemGains {
    pub problem: String,
    pub win_bits: f64,
    pub score_bits: f64,
    pub combined_bits: f64,
}

impl ProblemGains {
    pub fn get(&self, mode: MetricMode) -> f64 {
        match mode {
            MetricMode::WinRate => self.win_bits,
            MetricMode::Score => self.score_bits,
            MetricMode::Combined => self.combined_bits,
        }
    }
}

pub fn problem_gains(table: &PerformanceTable, noise: NoiseModel) -> Result<Vec<ProblemGains>> {
    table
        .problems()
        .into_iter()
        .map(|p| {
            let single = |key: MetricKey| info_gain_set(table, &MetricSet::single(key), noise);
            Ok(ProblemGains {
                win_bits: single(MetricKey::win(&p))?.value(),
                score_bits: single(MetricKey::score(&p))?.value(),
                combined_bits: info_gain_combined(table, &p, noise)?.value(),
                problem: p,
            })
        })
        .collect()
}

/// Problems sorted by descending gain under `mode`, ties by identifier.
pub fn rank_problems(gains: &[ProblemGains], mode: MetricMode) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = gains.iter().map(|g| (g.problem.clone(), g.get(mode))).collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}
