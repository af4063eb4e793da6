use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input, with 1-based line (and column when known).
    #[error("line {line}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        line: u64,
        column: Option<usize>,
        message: String,
    },

    #[error("incomplete performance table, missing {} agent/problem pair(s): {}", missing.len(), format_pairs(missing))]
    Incomplete { missing: Vec<(String, String)> },

    /// The input is well formed but the requested computation is undefined on it.
    #[error("{0}")]
    Domain(String),

    #[error("row {row} of confusion matrix is not a probability distribution (sum = {sum})")]
    NotStochastic { row: usize, sum: f64 },

    #[error("unknown agent `{0}`")]
    UnknownAgent(String),

    #[error("metric `{0}` not present in table")]
    MissingMetric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: u64, column: Option<usize>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }

    /// True for errors caused by the input data rather than by the analysis.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Incomplete { .. } | Error::Io(_) | Error::Json(_)
        )
    }
}

fn format_pairs(pairs: &[(String, String)]) -> String {
    const SHOWN: usize = 20;
    let mut out = pairs
        .iter()
        .take(SHOWN)
        .map(|(a, p)| format!("({a}, {p})"))
        .collect::<Vec<_>>()
        .join(", ");
    if pairs.len() > SHOWN {
        out.push_str(&format!(", ... and {} more", pairs.len() - SHOWN));
    }
    out
}
