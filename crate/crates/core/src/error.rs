use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix of size {rows}x{cols} is not a {expected}")]
    BadShape {
        rows: usize,
        cols: usize,
        expected: &'static str,
    },

    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("qubit index {0} used more than once")]
    DuplicateQubit(usize),

    #[error("partial trace needs at least one qubit to keep")]
    EmptyKeepSet,

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("gate {gate} takes {expected} parameter(s), got {got}")]
    WrongParamCount {
        gate: String,
        expected: usize,
        got: usize,
    },

    #[error("gate {gate} acts on {expected} qubit(s), got {got}")]
    ArityMismatch {
        gate: String,
        expected: usize,
        got: usize,
    },

    #[error("no basis decomposition for gate `{0}`")]
    NoDecomposition(String),

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("{what} = {value} is out of range ({allowed})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        allowed: &'static str,
    },

    #[error("unknown {what} `{value}` (expected one of: {choices})")]
    UnknownName {
        what: &'static str,
        value: String,
        choices: &'static str,
    },

    #[error("series has only {got} point(s) in the fit window, need at least {need}")]
    TooFewPoints { got: usize, need: usize },

    #[error("degenerate series: all values equal, nothing to fit")]
    DegenerateSeries,

    #[error("rows mix several (channel, n, theta) series; fit one series at a time")]
    MixedSeries,

    #[error("series {series}: {source}")]
    InSeries {
        series: String,
        #[source]
        source: Box<Error>,
    },

    #[error("need at least 3 distinct qubit counts, got {0}")]
    TooFewQubitCounts(usize),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
