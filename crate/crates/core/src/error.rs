use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("transition matrix is not primitive (no positive power up to {max_power})")]
    NotMixing { max_power: usize },
    #[error("symbol {0} has an empty row or column in the transition matrix")]
    DeadSymbol(usize),
    #[error("depth {depth} is smaller than the required {required}")]
    DepthTooSmall { depth: usize, required: usize },
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("word {0} is not admissible")]
    InadmissibleWord(String),
    #[error("depth mismatch: expected {expected}, got {got}")]
    DepthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("eigen-solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("word {0} is too short")]
    WordTooShort(String),
    #[error("cocycle does not satisfy the reduction identity (max defect {0:e})")]
    NotCohomologous(f64),
    #[error("budget of {budget} exhausted")]
    BudgetExceeded { budget: u64 },
    #[error("observable is not integrable: {0}")]
    NotIntegrable(String),
    #[error("spectral measure is not positive: {0}")]
    NotPositive(String),
    #[error("leading eigenvalue crossing near xi = {xi}")]
    EigenvalueCrossing { xi: f64 },
    #[error("observable is not nice: {0}")]
    NotNice(String),
    #[error("tolerance undefined: {0}")]
    ToleranceUndefined(String),
    #[error("no cycle found: {0}")]
    NotFound(String),
    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
