use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("d·n = {d}·{n} is odd; no perfect matching of the points exists")]
    OddProduct { n: usize, d: usize },
    #[error("degree {0} is below 3")]
    DegreeTooSmall(usize),
    #[error("invalid degree {d} for n = {n}")]
    BadDegree { n: usize, d: usize },
    #[error("no simple graph after {attempts} pairing attempts")]
    AttemptsExhausted { attempts: u64 },
    #[error("trial count must be positive")]
    InvalidTrials,
    #[error("invalid pairing: {0}")]
    InvalidPairing(String),

    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("vertex {vertex} has {found} neighbors, expected {expected}")]
    DegreeMismatch {
        vertex: usize,
        found: usize,
        expected: usize,
    },
    #[error("loop or repeated edge {u}-{v}{}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    LoopOrMultiEdge {
        u: usize,
        v: usize,
        line: Option<usize>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("index {index} out of range for a space of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("state space mismatch: expected {expected}, got {found}")]
    SpaceMismatch { expected: String, found: String },
    #[error("probability mass drifted by {drift:e} after {steps} steps")]
    MassDrift { drift: f64, steps: usize },

    #[error("work estimate {required:e} exceeds budget {budget:e}; use a sampled start policy")]
    BudgetExceeded { required: f64, budget: f64 },
    #[error("mixing level not reached within t_max = {0}")]
    NotReached(usize),
    #[error("graph is not connected")]
    NotConnected,
    #[error("power iteration did not converge in {0} iterations")]
    MaxItersExceeded(usize),

    #[error("partial-path expansions exceeded cap {0}")]
    CapExceeded(u64),
    #[error("trajectory counts overflow at m = {0}")]
    CountOverflow(usize),

    #[error("level {0} must lie strictly between 0 and 1")]
    BadLevel(f64),
    #[error("epsilon {0} must lie strictly between 0 and 1")]
    BadEpsilon(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
