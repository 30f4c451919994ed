use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// Variants fall into two families: invalid input (caller supplied something
/// outside an operation's domain) and numerical failure (an iteration or a
/// certified bound did not close). [`Error::is_numerical`] tells them apart.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("result would have {got} terms, limit is {limit}")]
    TooManyTerms { got: usize, limit: usize },
    #[error("Wiener norm {0} is not below 1")]
    NormNotLessThanOne(f64),
    #[error("edge factorization failed at height {height}: remainder norm {norm}")]
    FactorizationFailed { height: f64, norm: f64 },
    #[error("operation needs a nonempty series")]
    EmptySeries,
    #[error("contour passes too close to a zero (min |Q| = {min_modulus:e}, max |Q| = {max_modulus:e})")]
    BoundaryTooCloseToZero { min_modulus: f64, max_modulus: f64 },
    #[error("contour quadrature did not settle near an integer (last value {0})")]
    QuadratureNotConverged(f64),
    #[error("{total} zeros in the covering strip but only {real} on the real axis")]
    NonRealZeroDetected { total: i64, real: i64 },
    #[error("root refinement did not converge near x = {0}")]
    ConvergenceFailure(f64),
    #[error("need at least two distinct points")]
    NotEnoughPoints,
    #[error("ball [{lo}, {hi}] leaves the measure window")]
    BallExceedsWindow { lo: f64, hi: f64 },
    #[error("window too short: {0}")]
    WindowTooShort(String),
    #[error("test function support [{lo}, {hi}] leaves the window")]
    SupportExceedsWindow { lo: f64, hi: f64 },
    #[error("no admissible line height up to {0}")]
    NoHeightFound(f64),
    #[error("series truncation error {budget:e} amplified past the prune threshold")]
    TruncationBudgetExceeded { budget: f64 },
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("zero set contains the origin; shift it first")]
    ZeroAtOrigin,
    #[error("need {needed} zeros on each side of a_0, have {have}")]
    InsufficientZeros { needed: usize, have: usize },
    #[error("evaluation point coincides with a zero")]
    EvaluationAtZero,
    #[error("evaluation point must lie in the upper half-plane")]
    NonPositiveImaginaryPart,
    #[error("height {y0} not above twice the observed growth exponent {slope}")]
    HeightTooLow { y0: f64, slope: f64 },
    #[error("sum |b|/gamma over (0,1) is {value}, above the cap {cap}")]
    IntConditionDiverging { value: f64, cap: f64 },
    #[error("sample grid does not cover the requested span")]
    GridTooShort,
    #[error("zero set is empty")]
    EmptyZeroSet,
    #[error("point counts differ: {0} vs {1}")]
    CountMismatch(usize, usize),
    #[error("spectrum offers no candidate periods")]
    NoCandidatePeriods,
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TooManyTerms { .. }
                | Error::FactorizationFailed { .. }
                | Error::BoundaryTooCloseToZero { .. }
                | Error::QuadratureNotConverged(_)
                | Error::NonRealZeroDetected { .. }
                | Error::ConvergenceFailure(_)
                | Error::NoHeightFound(_)
                | Error::TruncationBudgetExceeded { .. }
                | Error::IntConditionDiverging { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
