use infosel_core::PlaythroughRecord;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("{0} must be at least 1")]
    Zero(&'static str),
    #[error("problem {index}: duplicate-of({target}) must reference an earlier problem")]
    BadDuplicate { index: usize, target: usize },
    #[error("problem {index}: parameters must be finite with positive standard deviation")]
    BadParameters { index: usize },
    #[error("invalid archetype `{0}`")]
    Unparsable(String),
}

/// Statistical character of one synthetic problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Archetype {
    /// Every agent draws scores from N(mean, sd) and wins with probability `win_p`.
    Identical { mean: f64, sd: f64, win_p: f64 },
    /// Agent of rank `r` scores N(r * gap, sd); win probability rises with rank.
    LinearSpread { gap: f64, sd: f64 },
    /// Two groups of agents, score means `0` and `gap`, win probability 0.2 and 0.8.
    TwoCluster { gap: f64, sd: f64 },
    /// Win probability rises with rank while the score mean falls with it.
    DelayedScore { gap: f64, sd: f64 },
    /// Exact copy of the records of an earlier problem, under a new name.
    DuplicateOf(usize),
}

impl Archetype {
    /// Parses `identical`, `identical:MEAN:SD:P`, `linear:GAP:SD`,
    /// `two-cluster:GAP:SD`, `delayed:GAP:SD` or `dup:INDEX`.
    pub fn parse(s: &str) -> Result<Self, SynthError> {
        let bad = || SynthError::Unparsable(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize, default: f64| -> Result<f64, SynthError> {
            match parts.get(i) {
                None => Ok(default),
                Some(v) => v.trim().parse::<f64>().map_err(|_| bad()),
            }
        };
        let arity = |max: usize| if parts.len() > max { Err(bad()) } else { Ok(()) };
        let a = match parts[0].trim().to_ascii_lowercase().as_str() {
            "identical" => {
                arity(4)?;
                Archetype::Identical {
                    mean: num(1, 0.0)?,
                    sd: num(2, 1.0)?,
                    win_p: num(3, 0.5)?,
                }
            }
            "linear" | "linear-spread" => {
                arity(3)?;
                Archetype::LinearSpread { gap: num(1, 10.0)?, sd: num(2, 1.0)? }
            }
            "two-cluster" | "twocluster" => {
                arity(3)?;
                Archetype::TwoCluster { gap: num(1, 10.0)?, sd: num(2, 1.0)? }
            }
            "delayed" | "delayed-score" => {
                arity(3)?;
                Archetype::DelayedScore { gap: num(1, 10.0)?, sd: num(2, 1.0)? }
            }
            "dup" | "duplicate-of" => {
                arity(2)?;
                let idx = parts.get(1).ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
                Archetype::DuplicateOf(idx)
            }
            _ => return Err(bad()),
        };
        Ok(a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub agents: usize,
    /// One archetype per problem; the problem count is its length.
    pub problems: Vec<Archetype>,
    pub samples: usize,
    pub seed: u64,
    /// Rank agents by a seeded per-problem permutation instead of by index.
    pub shuffle_agents: bool,
}

impl SynthSpec {
    /// `problems` problems cycling through `archetypes`.
    pub fn cycled(agents: usize, problems: usize, archetypes: &[Archetype], samples: usize, seed: u64) -> Self {
        SynthSpec {
            agents,
            problems: archetypes.iter().copied().cycle().take(problems).collect(),
            samples,
            seed,
            shuffle_agents: true,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.agents == 0 {
            return Err(SynthError::Zero("agent count"));
        }
        if self.problems.is_empty() {
            return Err(SynthError::Zero("problem count"));
        }
        if self.samples == 0 {
            return Err(SynthError::Zero("samples per cell"));
        }
        for (index, a) in self.problems.iter().enumerate() {
            let ok = match *a {
                Archetype::Identical { mean, sd, win_p } => {
                    mean.is_finite() && sd.is_finite() && sd > 0.0 && (0.0..=1.0).contains(&win_p)
                }
                Archetype::LinearSpread { gap, sd }
                | Archetype::TwoCluster { gap, sd }
                | Archetype::DelayedScore { gap, sd } => gap.is_finite() && sd.is_finite() && sd > 0.0,
                Archetype::DuplicateOf(source) => {
                    if source >= index {
                        return Err(SynthError::BadDuplicate { index, target: source });
                    }
                    true
                }
            };
            if !ok {
                return Err(SynthError::BadParameters { index });
            }
        }
        Ok(())
    }

    pub fn agent_name(&self, i: usize) -> String {
        format!("agent{:0w$}", i, w = digits(self.agents))
    }

    pub fn problem_name(&self, i: usize) -> String {
        format!("problem{:0w$}", i, w = digits(self.problems.len()))
    }
}

fn digits(n: usize) -> usize {
    n.saturating_sub(1).to_string().len().max(2)
}

/// Per-agent (score mean, score sd, win probability), indexed by rank.
fn ranked_params(archetype: Archetype, n: usize) -> Vec<(f64, f64, f64)> {
    let frac = |r: usize| if n > 1 { r as f64 / (n - 1) as f64 } else { 0.5 };
    (0..n)
        .map(|r| match archetype {
            Archetype::Identical { mean, sd, win_p } => (mean, sd, win_p),
            Archetype::LinearSpread { gap, sd } => (r as f64 * gap, sd, 0.1 + 0.8 * frac(r)),
            Archetype::TwoCluster { gap, sd } => {
                if r < n.div_ceil(2) {
                    (0.0, sd, 0.2)
                } else {
                    (gap, sd, 0.8)
                }
            }
            Archetype::DelayedScore { gap, sd } => ((n - 1 - r) as f64 * gap, sd, 0.1 + 0.8 * frac(r)),
            Archetype::DuplicateOf(_) => unreachable!("duplicates copy records"),
        })
        .collect()
}

pub fn generate(spec: &SynthSpec) -> Result<Vec<PlaythroughRecord>, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let agents: Vec<String> = (0..spec.agents).map(|i| spec.agent_name(i)).collect();
    let per_problem = spec.agents * spec.samples;
    let mut records: Vec<PlaythroughRecord> = Vec::with_capacity(per_problem * spec.problems.len());
    for (p, archetype) in spec.problems.iter().enumerate() {
        let name = spec.problem_name(p);
        if let Archetype::DuplicateOf(source) = *archetype {
            let start = source * per_problem;
            let copies: Vec<_> = records[start..start + per_problem]
                .iter()
                .map(|r| PlaythroughRecord::new(&r.agent, &name, r.score, r.win))
                .collect();
            records.extend(copies);
            continue;
        }
        let params = ranked_params(*archetype, spec.agents);
        let mut rank: Vec<usize> = (0..spec.agents).collect();
        if spec.shuffle_agents && !matches!(archetype, Archetype::Identical { .. }) {
            rank.shuffle(&mut rng);
        }
        for (a, agent) in agents.iter().enumerate() {
            let (mean, sd, win_p) = params[rank[a]];
            for _ in 0..spec.samples {
                let z: f64 = rng.sample(StandardNormal);
                let win = rng.random::<f64>() < win_p;
                records.push(PlaythroughRecord::new(agent, &name, mean + sd * z, win));
            }
        }
    }
    Ok(records)
}
