//! Run configuration: defaults, then an optional `key=value` file, then flags.
//!
//! Config file syntax: one `key = value` per line, `#` starts a comment,
//! blank lines are ignored. Keys are the long flag names without dashes
//! prefix: `input`, `metric`, `k`, `sigma-floor`, `epsilon-gain`, `noise`,
//! `threshold`, `format`, `out`, `allow-missing`, `per-key`. List values
//! (`input`, `format`) are comma separated.

use std::path::PathBuf;
use std::str::FromStr;

use infosel_core::cluster::DEFAULT_THRESHOLD;
use infosel_core::select::{DEFAULT_EPSILON_GAIN, DEFAULT_K};
use infosel_core::table::DEFAULT_SIGMA_FLOOR;
use infosel_core::{MetricMode, NoiseModel};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}` (expected csv, json or svg)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub mode: MetricMode,
    pub k: usize,
    pub sigma_floor: f64,
    pub epsilon_gain: f64,
    pub noise: NoiseModel,
    pub threshold: f64,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
    pub allow_missing: bool,
    pub per_key: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            mode: MetricMode::Combined,
            k: DEFAULT_K,
            sigma_floor: DEFAULT_SIGMA_FLOOR,
            epsilon_gain: DEFAULT_EPSILON_GAIN,
            noise: NoiseModel::Sum,
            threshold: DEFAULT_THRESHOLD,
            out_dir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json, Format::Svg],
            allow_missing: false,
            per_key: false,
        }
    }
}

impl RunConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.inputs {
            self.inputs = v.clone();
        }
        if let Some(v) = o.mode {
            self.mode = v;
        }
        if let Some(v) = o.k {
            self.k = v;
        }
        if let Some(v) = o.sigma_floor {
            self.sigma_floor = v;
        }
        if let Some(v) = o.epsilon_gain {
            self.epsilon_gain = v;
        }
        if let Some(v) = o.noise {
            self.noise = v;
        }
        if let Some(v) = o.threshold {
            self.threshold = v;
        }
        if let Some(v) = &o.out_dir {
            self.out_dir = v.clone();
        }
        if let Some(v) = &o.formats {
            self.formats = v.clone();
        }
        if let Some(v) = o.allow_missing {
            self.allow_missing = v;
        }
        if let Some(v) = o.per_key {
            self.per_key = v;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Input(format!("{name} must be a positive number, got {v}")))
            }
        };
        if self.k == 0 {
            return Err(CliError::Input("k must be at least 1".into()));
        }
        positive("sigma-floor", self.sigma_floor)?;
        positive("epsilon-gain", self.epsilon_gain)?;
        positive("threshold", self.threshold)?;
        if self.formats.is_empty() {
            return Err(CliError::Input("at least one output format is required".into()));
        }
        Ok(())
    }

    /// Defaults, overlaid with the config file (if any), overlaid with flags.
    pub fn resolve(file: Option<&str>, flags: &Overrides) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(text) = file {
            cfg.apply(&parse_config(text)?);
        }
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Optional settings from one configuration layer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub inputs: Option<Vec<PathBuf>>,
    pub mode: Option<MetricMode>,
    pub k: Option<usize>,
    pub sigma_floor: Option<f64>,
    pub epsilon_gain: Option<f64>,
    pub noise: Option<NoiseModel>,
    pub threshold: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
    pub allow_missing: Option<bool>,
    pub per_key: Option<bool>,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

pub fn parse_config(text: &str) -> Result<Overrides, CliError> {
    let mut o = Overrides::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| CliError::Input(format!("config line {}: {msg}", n + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, found `{line}`")))?;
        let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
        let num = |v: &str| v.parse::<f64>().map_err(|_| err(format!("invalid number `{v}` for {key}")));
        match key.as_str() {
            "input" => {
                o.inputs = Some(
                    value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(PathBuf::from)
                        .collect(),
                )
            }
            "metric" => o.mode = Some(value.parse().map_err(err)?),
            "k" => o.k = Some(value.parse().map_err(|_| err(format!("invalid k `{value}`")))?),
            "sigma-floor" => o.sigma_floor = Some(num(value)?),
            "epsilon-gain" => o.epsilon_gain = Some(num(value)?),
            "noise" => o.noise = Some(value.parse().map_err(err)?),
            "threshold" => o.threshold = Some(num(value)?),
            "out" => o.out_dir = Some(PathBuf::from(value)),
            "format" => {
                o.formats = Some(
                    value
                        .split(',')
                        .map(|f| f.parse::<Format>())
                        .collect::<Result<_, _>>()
                        .map_err(err)?,
                )
            }
            "allow-missing" => {
                o.allow_missing = Some(parse_bool(value).ok_or_else(|| err(format!("invalid boolean `{value}`")))?)
            }
            "per-key" => o.per_key = Some(parse_bool(value).ok_or_else(|| err(format!("invalid boolean `{value}`")))?),
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    Ok(o)
}
