//! Aggregated-statistics files.
//!
//! CSV: header `agent,problem,measure,mean,stddev,count`, one row per cell,
//! `measure` is `win` or `score`.
//!
//! JSON:
//! ```text
//! {
//!   "agents": ["a1", ...],
//!   "problems": ["freeway", ...],
//!   "cells": [
//!     {"agent": "a1", "problem": "freeway", "measure": "win",
//!      "mean": 0.5, "stddev": 0.5, "count": 40}, ...
//!   ]
//! }
//! ```
//! Cells are listed in table order (agent, then problem, then win before score).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::csv_io;
use crate::table::{Measure, MetricKey, PerformanceStat, PerformanceTable, TableBuilder};

pub const STATS_HEADER: [&str; 6] = ["agent", "problem", "measure", "mean", "stddev", "count"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsCell {
    pub agent: String,
    pub problem: String,
    pub measure: Measure,
    pub mean: f64,
    pub stddev: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsDocument {
    pub agents: Vec<String>,
    pub problems: Vec<String>,
    pub cells: Vec<StatsCell>,
}

impl StatsDocument {
    pub fn from_table(table: &PerformanceTable) -> Self {
        StatsDocument {
            agents: table.agents().to_vec(),
            problems: table.problems(),
            cells: table
                .iter()
                .map(|(agent, key, s)| StatsCell {
                    agent: agent.to_owned(),
                    problem: key.problem.clone(),
                    measure: key.measure,
                    mean: s.mean,
                    stddev: s.stddev,
                    count: s.count,
                })
                .collect(),
        }
    }

    pub fn to_table(&self) -> Result<PerformanceTable> {
        let mut b = TableBuilder::new();
        for c in &self.cells {
            if c.agent.is_empty() || c.problem.is_empty() {
                return Err(Error::domain("empty identifier in statistics document"));
            }
            let key = MetricKey::new(c.problem.clone(), c.measure);
            if b.insert(&c.agent, key, PerformanceStat::new(c.mean, c.stddev, c.count)).is_some() {
                return Err(Error::domain(format!(
                    "duplicate cell ({}, {}:{})",
                    c.agent, c.problem, c.measure
                )));
            }
        }
        let table = b.build()?;
        if table.agents() != self.agents.as_slice() || table.problems() != self.problems {
            return Err(Error::domain("agent/problem lists do not match the cells"));
        }
        Ok(table)
    }
}

pub fn write_stats_json<W: Write>(writer: W, table: &PerformanceTable) -> Result<()> {
    let mut writer = writer;
    serde_json::to_writer_pretty(&mut writer, &StatsDocument::from_table(table))?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn read_stats_json<R: Read>(reader: R) -> Result<PerformanceTable> {
    let doc: StatsDocument = serde_json::from_reader(reader)?;
    doc.to_table()
}

pub fn write_stats_csv<W: Write>(writer: W, table: &PerformanceTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(STATS_HEADER).map_err(csv_io)?;
    for (agent, key, s) in table.iter() {
        w.write_record([
            agent,
            &key.problem,
            key.measure.as_str(),
            &s.mean.to_string(),
            &s.stddev.to_string(),
            &s.count.to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_stats_csv<R: Read>(reader: R) -> Result<PerformanceTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut row = csv::StringRecord::new();
    let mut first = true;
    let mut builder = TableBuilder::new();
    loop {
        match rdr.read_record(&mut row) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(Error::parse(line, None, format!("malformed CSV: {e}")));
            }
        }
        let line = row.position().map_or(0, |p| p.line());
        if first {
            first = false;
            let ok = row.len() == STATS_HEADER.len()
                && row
                    .iter()
                    .zip(STATS_HEADER)
                    .all(|(got, want)| got.trim().eq_ignore_ascii_case(want));
            if !ok {
                return Err(Error::parse(
                    line,
                    None,
                    "expected header agent,problem,measure,mean,stddev,count",
                ));
            }
            continue;
        }
        if row.len() != STATS_HEADER.len() {
            return Err(Error::parse(line, None, format!("expected 6 fields, found {}", row.len())));
        }
        let agent = row[0].trim();
        let problem = row[1].trim();
        if agent.is_empty() || problem.is_empty() {
            return Err(Error::parse(line, None, "empty identifier"));
        }
        let measure: Measure = row[2].parse().map_err(|e: String| Error::parse(line, Some(3), e))?;
        let real = |col: usize| -> Result<f64> {
            let raw = row[col].trim();
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::parse(line, Some(col + 1), format!("invalid number `{raw}`"))),
            }
        };
        let mean = real(3)?;
        let stddev = real(4)?;
        let count: u64 = row[5]
            .trim()
            .parse()
            .map_err(|_| Error::parse(line, Some(6), format!("invalid count `{}`", row[5].trim())))?;
        if stddev <= 0.0 || count == 0 {
            return Err(Error::parse(line, None, "stddev must be positive and count at least 1"));
        }
        if measure == Measure::WinRate && !(0.0..=1.0).contains(&mean) {
            return Err(Error::parse(line, Some(4), "win rate outside [0, 1]"));
        }
        let key = MetricKey::new(problem, measure);
        if builder.insert(agent, key, PerformanceStat::new(mean, stddev, count)).is_some() {
            return Err(Error::parse(line, None, format!("duplicate cell ({agent}, {problem}:{measure})")));
        }
    }
    if first {
        return Err(Error::parse(1, None, "empty input"));
    }
    builder.build()
}
