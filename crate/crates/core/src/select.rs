//! Greedy selection of the problem subset that maximises joint information gain.
//!
//! Step one takes the problem with the largest individual gain; every later
//! step adds the problem whose inclusion raises the gain of the selected set
//! the most. Ties in the marginal gain (after quantising to `epsilon_gain`)
//! go to the lexicographically smallest identifier.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confusion::{require_two_agents, LogWeights, NoiseModel};
use crate::error::{Error, Result};
use crate::info_gain::{mutual_information_rows, MetricMode};
use crate::record::csv_io;
use crate::table::{MetricKey, PerformanceTable};

pub const DEFAULT_EPSILON_GAIN: f64 = 1e-9;
pub const DEFAULT_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectOptions {
    pub k: usize,
    pub mode: MetricMode,
    pub noise: NoiseModel,
    pub epsilon_gain: f64,
    /// Select individual metric keys rather than whole problems.
    pub per_key: bool,
    pub parallel: bool,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions {
            k: DEFAULT_K,
            mode: MetricMode::Combined,
            noise: NoiseModel::Sum,
            epsilon_gain: DEFAULT_EPSILON_GAIN,
            per_key: false,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub rank: usize,
    pub problem: String,
    pub keys: Vec<MetricKey>,
    pub marginal_bits: f64,
    pub cumulative_bits: f64,
}

/// A candidate whose inclusion would have lowered the joint gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeGain {
    pub step: usize,
    pub problem: String,
    pub marginal_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    /// `k` problems were selected.
    Completed,
    /// Every candidate was selected before reaching `k`.
    Exhausted,
    /// No remaining candidate adds at least `epsilon_gain` bits at this step.
    NoInformativeCandidate { step: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub mode: MetricMode,
    pub per_key: bool,
    pub noise: NoiseModel,
    pub requested_k: usize,
    pub epsilon_gain: f64,
    pub steps: Vec<SelectionStep>,
    pub stop: StopReason,
    pub negative_gains: Vec<NegativeGain>,
    pub warnings: Vec<String>,
}

impl SelectionReport {
    pub fn stopped_early(&self) -> bool {
        matches!(self.stop, StopReason::NoInformativeCandidate { .. })
    }

    pub fn selected(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.problem.as_str()).collect()
    }

    pub fn total_bits(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.cumulative_bits)
    }

    /// `rank,problem,marginal_bits,cumulative_bits`
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["rank", "problem", "marginal_bits", "cumulative_bits"])
            .map_err(csv_io)?;
        for s in &self.steps {
            w.write_record([
                s.rank.to_string(),
                s.problem.clone(),
                s.marginal_bits.to_string(),
                s.cumulative_bits.to_string(),
            ])
            .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Aligned plain-text table, one row per selected problem.
    pub fn to_text(&self) -> String {
        let width = self
            .steps
            .iter()
            .map(|s| s.problem.len())
            .chain([format!("Problem (top {})", self.requested_k).len()])
            .max()
            .unwrap_or(8);
        let mut out = String::new();
        let header = format!("Problem (top {})", self.requested_k);
        let _ = writeln!(out, "{:>4}  {:<width$}  {:>12}  {:>12}", "#", header, "marginal", "cumulative");
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{:>4}  {:<width$}  {:>12.8}  {:>12.8}",
                s.rank, s.problem, s.marginal_bits, s.cumulative_bits
            );
        }
        if let StopReason::NoInformativeCandidate { step } = self.stop {
            let _ = writeln!(
                out,
                "stopped at step {step}: no remaining problem adds at least {:e} bits",
                self.epsilon_gain
            );
        }
        out
    }
}

struct Candidate {
    label: String,
    keys: Vec<MetricKey>,
    metrics: Vec<usize>,
}

fn candidates(table: &PerformanceTable, mode: MetricMode, per_key: bool) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    for problem in table.problems() {
        let keys = mode.keys(&problem);
        let groups: Vec<Vec<MetricKey>> = if per_key && keys.len() > 1 {
            keys.into_iter().map(|k| vec![k]).collect()
        } else {
            vec![keys]
        };
        for keys in groups {
            let metrics = keys
                .iter()
                .map(|k| table.metric_index(k).ok_or_else(|| Error::MissingMetric(k.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let label = if per_key && mode == MetricMode::Combined {
                keys[0].to_string()
            } else {
                problem.clone()
            };
            out.push(Candidate { label, keys, metrics });
        }
    }
    out.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(out)
}

fn gain_of(table: &PerformanceTable, base: &LogWeights, metrics: &[usize], noise: NoiseModel) -> f64 {
    let mut lw = base.clone();
    for &m in metrics {
        lw.add_metric(table, m, noise);
    }
    mutual_information_rows(&lw.softmax_rows())
}

pub fn greedy_select(table: &PerformanceTable, options: &SelectOptions) -> Result<SelectionReport> {
    require_two_agents(table)?;
    if options.k == 0 {
        return Err(Error::domain("selection size k must be at least 1"));
    }
    if !(options.epsilon_gain > 0.0 && options.epsilon_gain.is_finite()) {
        return Err(Error::domain("epsilon_gain must be a positive finite number"));
    }
    let mut pool = candidates(table, options.mode, options.per_key)?;
    let mut warnings = Vec::new();
    if options.k > pool.len() {
        warnings.push(format!(
            "k = {} exceeds the {} available candidates; selecting all",
            options.k,
            pool.len()
        ));
    }
    let target = options.k.min(pool.len());
    let quantise = |g: f64| (g / options.epsilon_gain).round() as i64;

    let mut base = LogWeights::zeros(table.agent_count());
    let mut cumulative = 0.0;
    let mut steps = Vec::new();
    let mut negative_gains = Vec::new();
    let mut stop = if target < options.k {
        StopReason::Exhausted
    } else {
        StopReason::Completed
    };

    for step in 1..=target {
        let eval = |c: &Candidate| gain_of(table, &base, &c.metrics, options.noise);
        let gains: Vec<f64> = if options.parallel {
            pool.par_iter().map(eval).collect()
        } else {
            pool.iter().map(eval).collect()
        };
        let mut best: Option<(usize, i64)> = None;
        for (i, &g) in gains.iter().enumerate() {
            let marginal = g - cumulative;
            if marginal < -options.epsilon_gain {
                negative_gains.push(NegativeGain {
                    step,
                    problem: pool[i].label.clone(),
                    marginal_bits: marginal,
                });
            }
            if marginal < options.epsilon_gain {
                continue;
            }
            // pool is sorted by label, so strict > keeps the smallest label on ties
            let q = quantise(marginal);
            if best.is_none_or(|(_, bq)| q > bq) {
                best = Some((i, q));
            }
        }
        let Some((i, _)) = best else {
            stop = StopReason::NoInformativeCandidate { step };
            break;
        };
        let chosen = pool.remove(i);
        let gain = gains[i];
        for &m in &chosen.metrics {
            base.add_metric(table, m, options.noise);
        }
        steps.push(SelectionStep {
            rank: step,
            problem: chosen.label,
            keys: chosen.keys,
            marginal_bits: gain - cumulative,
            cumulative_bits: gain,
        });
        cumulative = gain;
    }

    Ok(SelectionReport {
        mode: options.mode,
        per_key: options.per_key,
        noise: options.noise,
        requested_k: options.k,
        epsilon_gain: options.epsilon_gain,
        steps,
        stop,
        negative_gains,
        warnings,
    })
}
