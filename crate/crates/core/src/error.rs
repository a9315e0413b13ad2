//! Error type shared by all estimators and IO routines.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of estimators, generators, and ingestion.
///
/// The variants map onto the process exit codes used by the CLI:
/// configuration problems, data problems, and degenerate statistics
/// are distinguishable by the caller.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration: bad grids, bad schema, mismatched inputs.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input violates a mathematical precondition (point outside window,
    /// negative statistic where a non-negative one is required, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Too few events for the requested estimator.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// An ingest produced no usable events.
    #[error("empty pattern: {0}")]
    EmptyPattern(String),

    /// A test statistic could not be formed (all cells excluded,
    /// zero null variance, ...).
    #[error("degenerate statistic: {0}")]
    DegenerateStatistic(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that stem from the run configuration rather than
    /// from the data or the statistic itself.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}
