//! Playthrough records: one outcome of one agent on one problem.
//!
//! The input format is UTF-8 CSV with the header `agent,problem,score,win`.
//! Win flags accept `0`, `1`, `true`, `false`, `win` and `lose`, case-insensitively.

use std::collections::HashSet;
use std::io::Read;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const RECORD_HEADER: [&str; 4] = ["agent", "problem", "score", "win"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlaythroughRecord {
    pub agent: Arc<str>,
    pub problem: Arc<str>,
    pub score: f64,
    pub win: bool,
    /// 1-based source line, 0 for records not read from a file.
    pub line: u64,
}

impl PlaythroughRecord {
    pub fn new(agent: &str, problem: &str, score: f64, win: bool) -> Self {
        PlaythroughRecord {
            agent: Arc::from(agent),
            problem: Arc::from(problem),
            score,
            win,
            line: 0,
        }
    }
}

pub fn parse_win(field: &str) -> Option<bool> {
    match field.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "win" => Some(true),
        "0" | "false" | "lose" => Some(false),
        _ => None,
    }
}

/// Streaming reader over a playthrough CSV. Identifiers are interned so that
/// multi-million row inputs share one allocation per distinct agent/problem.
pub struct RecordReader<R: Read> {
    inner: csv::Reader<R>,
    row: csv::StringRecord,
    interned: HashSet<Arc<str>>,
    header_checked: bool,
}

impl<R: Read> RecordReader<R> {
    pub fn new(reader: R) -> Self {
        let inner = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        RecordReader {
            inner,
            row: csv::StringRecord::new(),
            interned: HashSet::new(),
            header_checked: false,
        }
    }

    fn intern(&mut self, s: &str) -> Arc<str> {
        if let Some(existing) = self.interned.get(s) {
            return existing.clone();
        }
        let arc: Arc<str> = Arc::from(s);
        self.interned.insert(arc.clone());
        arc
    }

    fn read_row(&mut self) -> Result<Option<u64>> {
        match self.inner.read_record(&mut self.row) {
            Ok(true) => Ok(Some(self.row.position().map_or(0, |p| p.line()))),
            Ok(false) => Ok(None),
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                Err(Error::parse(line, None, format!("malformed CSV: {e}")))
            }
        }
    }

    fn check_header(&mut self) -> Result<()> {
        self.header_checked = true;
        let line = self
            .read_row()?
            .ok_or_else(|| Error::parse(1, None, "empty input, expected header agent,problem,score,win"))?;
        let ok = self.row.len() == RECORD_HEADER.len()
            && self
                .row
                .iter()
                .zip(RECORD_HEADER)
                .all(|(got, want)| got.trim().trim_start_matches('\u{feff}').eq_ignore_ascii_case(want));
        if !ok {
            return Err(Error::parse(
                line,
                None,
                format!(
                    "expected header agent,problem,score,win, found `{}`",
                    self.row.iter().collect::<Vec<_>>().join(",")
                ),
            ));
        }
        Ok(())
    }

    fn next_record(&mut self) -> Result<Option<PlaythroughRecord>> {
        if !self.header_checked {
            self.check_header()?;
        }
        let line = loop {
            match self.read_row()? {
                None => return Ok(None),
                // blank lines are skipped by the csv reader; a lone empty field is too
                Some(_) if self.row.len() == 1 && self.row[0].trim().is_empty() => continue,
                Some(line) => break line,
            }
        };
        if self.row.len() != 4 {
            return Err(Error::parse(
                line,
                None,
                format!("expected 4 fields, found {}", self.row.len()),
            ));
        }
        let agent = self.row[0].trim().to_owned();
        let problem = self.row[1].trim().to_owned();
        if agent.is_empty() {
            return Err(Error::parse(line, Some(1), "empty agent identifier"));
        }
        if problem.is_empty() {
            return Err(Error::parse(line, Some(2), "empty problem identifier"));
        }
        let raw_score = self.row[2].trim();
        let score: f64 = raw_score
            .parse()
            .map_err(|_| Error::parse(line, Some(3), format!("invalid score `{raw_score}`")))?;
        if !score.is_finite() {
            return Err(Error::parse(line, Some(3), format!("non-finite score `{raw_score}`")));
        }
        let raw_win = &self.row[3];
        let win = parse_win(raw_win)
            .ok_or_else(|| Error::parse(line, Some(4), format!("invalid win flag `{}`", raw_win.trim())))?;
        let agent = self.intern(&agent);
        let problem = self.intern(&problem);
        Ok(Some(PlaythroughRecord {
            agent,
            problem,
            score,
            win,
            line,
        }))
    }
}

impl<R: Read> Iterator for RecordReader<R> {
    type Item = Result<PlaythroughRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_record().transpose()
    }
}

/// Reads every record of a playthrough CSV, in file order.
pub fn parse_records<R: Read>(reader: R) -> Result<Vec<PlaythroughRecord>> {
    RecordReader::new(reader).collect()
}

pub fn write_records<W: std::io::Write>(writer: W, records: &[PlaythroughRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RECORD_HEADER).map_err(csv_io)?;
    for r in records {
        w.write_record([
            &*r.agent,
            &*r.problem,
            &r.score.to_string(),
            if r.win { "1" } else { "0" },
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
