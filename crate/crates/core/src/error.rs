use alloc::string::String;

/// Errors raised by the numerical core.
///
/// The variants are grouped by the exit-code family the CLI maps them to:
/// configuration problems, numerical-consistency failures, and everything
/// else.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("partition infeasible: {0}")]
    Infeasible(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("calibration not applicable for M={m}, N_k={nk}, N_j={nj} (needs M > N_k + N_j)")]
    CalibrationNotApplicable { m: usize, nk: usize, nj: usize },
    #[error("missing calibration entry for M={m}, N_k={nk}, N_j={nj}")]
    CalibrationMissing { m: usize, nk: usize, nj: usize },
    #[error("no feasible partition among the candidates")]
    NoFeasiblePartition,
    #[error("resource guard: {0}")]
    ResourceGuard(String),
    #[error("numerical consistency error: {0}")]
    Numerical(String),
    #[error("class {0} has too few samples to stratify")]
    Stratification(String),
    #[error("degenerate scenario: {0}")]
    DegenerateScenario(String),
}

impl Error {
    /// True for failures that indicate broken numerical invariants rather
    /// than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = core::result::Result<T, Error>;
