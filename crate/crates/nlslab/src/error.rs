use thiserror::Error;

/// Errors produced by the library. Each variant names a failure category so
/// callers (and the CLI exit-code mapping) can react without string matching.
#[derive(Debug, Error)]
pub enum NlsError {
    /// A parameter fails its domain check (p <= 1, nonpositive radius, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The critical scaling index for (p, N) falls outside the open window (0, 1).
    #[error("critical index s_c = {s_c} for p = {p}, N = {dimension} is outside (0, 1)")]
    CriticalIndexOutOfRange { p: f64, dimension: u32, s_c: f64 },

    /// Two fields (or a field and an operator) live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Sample buffer length disagrees with the grid node count.
    #[error("length mismatch: expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// The grid cannot support the requested operation (too few nodes).
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    /// No sign change could be bracketed for the shooting parameter.
    #[error("shooting bracket not found: {0}")]
    BracketNotFound(String),

    /// An iteration exhausted its budget before reaching the tolerance.
    #[error("did not converge: {0}")]
    NotConverged(String),

    /// A reduction or classification needs strictly positive mass.
    #[error("mass is zero or not positive; {0}")]
    MassNotPositive(String),

    /// Field samples contain NaN or infinity.
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    /// File I/O failure with the offending path.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Structured-text parse failure with file and line for diagnostics.
    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// Configuration file is syntactically valid but semantically unusable.
    #[error("config error: {0}")]
    Config(String),
}

impl NlsError {
    /// Stable category slug used by the CLI for exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            NlsError::InvalidParameter(_) => "invalid-parameter",
            NlsError::CriticalIndexOutOfRange { .. } => "critical-index-out-of-range",
            NlsError::GridMismatch(_) => "grid-mismatch",
            NlsError::LengthMismatch { .. } => "length-mismatch",
            NlsError::GridTooCoarse(_) => "grid-too-coarse",
            NlsError::BracketNotFound(_) => "bracket-not-found",
            NlsError::NotConverged(_) => "not-converged",
            NlsError::MassNotPositive(_) => "mass-not-positive",
            NlsError::NonFinite { .. } => "non-finite",
            NlsError::Io { .. } => "io",
            NlsError::Parse { .. } => "parse",
            NlsError::Config(_) => "config",
        }
    }
}

pub type Result<T> = std::result::Result<T, NlsError>;
