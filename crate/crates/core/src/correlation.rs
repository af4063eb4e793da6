//! Pearson correlation between problems, computed over the vector of agent
//! mean performances on each problem.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::csv_io;
use crate::table::{Measure, MetricKey, PerformanceTable};

/// Pearson's r, or `None` when either vector is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "pearson: length mismatch");
    if x.len() < 2 || is_constant(x) || is_constant(y) {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|v| *v == x[0])
}

/// Symmetric problem x problem correlation matrix; `None` marks pairs
/// involving a problem with no variance across agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub measure: Option<Measure>,
    problems: Vec<String>,
    entries: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn from_entries(problems: Vec<String>, entries: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let n = problems.len();
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(Error::domain("correlation matrix must be square and match the problem list"));
        }
        for i in 0..n {
            if problems[..i].contains(&problems[i]) {
                return Err(Error::domain(format!("problem `{}` listed twice", problems[i])));
            }
            for j in 0..n {
                let (a, b) = (entries[i][j], entries[j][i]);
                let symmetric = match (a, b) {
                    (Some(a), Some(b)) => a == b,
                    (None, None) => true,
                    _ => false,
                };
                if !symmetric {
                    return Err(Error::domain(format!("correlation matrix not symmetric at ({i}, {j})")));
                }
                let defined = entries[i][i].is_some() && entries[j][j].is_some();
                if a.is_some() != defined || (i == j && a.is_some_and(|r| r != 1.0)) {
                    return Err(Error::domain(format!(
                        "entry ({i}, {j}) must be defined exactly when both problems are, with unit diagonal"
                    )));
                }
                if a.is_some_and(|r| !r.is_finite() || r.abs() > 1.0 + 1e-12) {
                    return Err(Error::domain(format!("correlation out of range at ({i}, {j})")));
                }
            }
        }
        Ok(CorrelationMatrix {
            measure: None,
            problems,
            entries,
        })
    }

    pub fn problems(&self) -> &[String] {
        &self.problems
    }

    pub fn entries(&self) -> &[Vec<Option<f64>>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries[i][j]
    }

    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn is_defined(&self, i: usize) -> bool {
        self.entries[i][i].is_some()
    }

    /// Problems that carry no correlation measure.
    pub fn undefined_problems(&self) -> Vec<&str> {
        (0..self.len())
            .filter(|&i| !self.is_defined(i))
            .map(|i| self.problems[i].as_str())
            .collect()
    }

    /// Same matrix with rows and columns permuted to the given problem order.
    pub fn reordered(&self, order: &[String]) -> Result<CorrelationMatrix> {
        if order.len() != self.len() {
            return Err(Error::domain("reorder must list every problem exactly once"));
        }
        let idx = order
            .iter()
            .map(|p| {
                self.problems
                    .iter()
                    .position(|q| q == p)
                    .ok_or_else(|| Error::domain(format!("unknown problem `{p}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let entries = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.entries[i][j]).collect())
            .collect();
        let mut out = CorrelationMatrix::from_entries(order.to_vec(), entries)?;
        out.measure = self.measure;
        Ok(out)
    }

    /// Header row `problem,<p1>,<p2>,...`; undefined entries are written as `NA`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["problem".to_string()];
        header.extend(self.problems.iter().cloned());
        w.write_record(&header).map_err(csv_io)?;
        for (p, row) in self.problems.iter().zip(&self.entries) {
            let mut rec = vec![p.clone()];
            rec.extend(row.iter().map(|e| e.map_or_else(|| "NA".to_string(), |r| r.to_string())));
            w.write_record(&rec).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn correlation_matrix(table: &PerformanceTable, measure: Measure) -> Result<CorrelationMatrix> {
    if table.agent_count() < 3 {
        return Err(Error::domain("correlation needs at least three agents"));
    }
    let problems = table.problems();
    let vectors = problems
        .iter()
        .map(|p| {
            let key = MetricKey::new(p.clone(), measure);
            let m = table
                .metric_index(&key)
                .ok_or_else(|| Error::MissingMetric(key.to_string()))?;
            Ok((0..table.agent_count()).map(|a| table.stat(a, m).mean).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let n = problems.len();
    let mut entries = vec![vec![None; n]; n];
    for i in 0..n {
        if is_constant(&vectors[i]) {
            continue;
        }
        entries[i][i] = Some(1.0);
        for j in (i + 1)..n {
            let r = pearson(&vectors[i], &vectors[j]);
            entries[i][j] = r;
            entries[j][i] = r;
        }
    }
    let mut out = CorrelationMatrix::from_entries(problems, entries)?;
    out.measure = Some(measure);
    Ok(out)
}
