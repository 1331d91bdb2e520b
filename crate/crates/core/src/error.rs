use thiserror::Error;

use crate::lyapunov::InequalityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent must be positive, got {0}")]
    NonPositiveExponent(f64),

    #[error("could not bracket a preimage of {0}")]
    BracketNotFound(f64),

    #[error("property check requires a non-empty grid")]
    EmptyGrid,

    #[error("grid point {x} must lie in (0, inf)")]
    NonPositiveGridPoint { x: f64 },

    #[error("psi({x}) = {value} is not positive")]
    NonPositiveValue { x: f64, value: f64 },

    #[error("x = {x} outside coefficient domain [{lo}, {hi}]")]
    DomainExceeded { x: f64, lo: f64, hi: f64 },

    #[error("step size underflow at x = {x} (h = {h:e})")]
    StepUnderflow { x: f64, h: f64 },

    #[error("empty integration interval [{l}, {r}]")]
    IntervalEmpty { l: f64, r: f64 },

    #[error("no sign change of u(b) over the curvature sweep")]
    NoBracket,

    #[error("solution vanishes inside the interval at x = {x}")]
    InteriorZero { x: f64 },

    #[error("no zero of (psi1(u'))' in [{a}, {b}]")]
    NoXi { a: f64, b: f64 },

    #[error("found {found} zeros after the start point, need {needed}")]
    InsufficientZeros { found: usize, needed: usize },

    #[error("function does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("degenerate interval [{a}, {b}]")]
    DegenerateInterval { a: f64, b: f64 },

    #[error("Phi(u) is undefined at u = 0 and no limit is declared")]
    UndefinedAtZero,

    #[error("instance violates a standing hypothesis: {0}")]
    OutOfHypothesis(String),

    #[error("inequality failed beyond numerical error: {0:?}")]
    InvariantViolation(Box<InequalityReport>),

    #[error("need at least {needed} zeros, found {found}")]
    TooFewZeros { found: usize, needed: usize },

    #[error("exponent p - alpha1*alpha2 must be positive, got {0}")]
    ExponentNotPositive(f64),

    #[error("integral of |q| vanishes")]
    ZeroCoefficient,

    #[error("invalid expression `{src}`: {msg}")]
    Expr { src: String, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Outcomes meaning "the requested boundary value problem has no solution
    /// in the searched family" rather than a failure of the machinery.
    pub fn is_no_solution(&self) -> bool {
        matches!(
            self,
            Error::NoBracket
                | Error::NoXi { .. }
                | Error::InsufficientZeros { .. }
                | Error::InteriorZero { .. }
                | Error::TooFewZeros { .. }
        )
    }

    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Expr { .. }
                | Error::NonPositiveExponent(_)
                | Error::OutOfHypothesis(_)
                | Error::DegenerateInterval { .. }
        )
    }
}
