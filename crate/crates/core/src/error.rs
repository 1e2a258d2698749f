use thiserror::Error;

/// Failure modes shared by all modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no sign change of the quintic in [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("phase violation: {0}")]
    PhaseViolation(String),
    #[error("ambiguous branch labels at z = {re} + {im}i")]
    BranchAmbiguity { re: f64, im: f64 },
    #[error("inconsistent curve constants: {0}")]
    InconsistentConstants(String),
    #[error("unexpected discriminant root pattern: {0}")]
    UnexpectedRootPattern(String),
    #[error("quadrature not converged: {0}")]
    QuadratureNotConverged(String),
    #[error("variational condition violated: {0}")]
    VariationalViolation(String),
    #[error("no admissible contour: {0}")]
    ContourNotFound(String),
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("point {re} + {im}i lies on the cut [-x1, x1]")]
    BranchCutHit { re: f64, im: f64 },
    #[error("ladder needs at least 3 instances, got {0}")]
    LadderTooShort(usize),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::NoRootInBracket { .. } => "NoRootInBracket",
            Error::NoConvergence(_) => "NoConvergence",
            Error::PhaseViolation(_) => "PhaseViolation",
            Error::BranchAmbiguity { .. } => "BranchAmbiguity",
            Error::InconsistentConstants(_) => "InconsistentConstants",
            Error::UnexpectedRootPattern(_) => "UnexpectedRootPattern",
            Error::QuadratureNotConverged(_) => "QuadratureNotConverged",
            Error::VariationalViolation(_) => "VariationalViolation",
            Error::ContourNotFound(_) => "ContourNotFound",
            Error::SingularSystem(_) => "SingularSystem",
            Error::PrecisionExhausted(_) => "PrecisionExhausted",
            Error::BranchCutHit { .. } => "BranchCutHit",
            Error::LadderTooShort(_) => "LadderTooShort",
        }
    }

    /// True for errors caused by rejected input rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParams(_) | Error::PhaseViolation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
