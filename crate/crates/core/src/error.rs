use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),

    #[error("invalid extension spec: {0}")]
    InvalidSpec(String),

    #[error("not totally ramified: {0}")]
    NotTotallyRamified(String),

    #[error("p divides break {0}")]
    PDividesBreak(i64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not a scaffold: {0}")]
    NotAScaffold(String),

    #[error("hypothesis violation at (i={i}, t={t}): v_L = {found}, required {required}")]
    HypothesisViolation {
        i: usize,
        t: i64,
        found: String,
        required: String,
    },

    #[error("diagonal shape violation: {0}")]
    DiagonalShape(String),

    #[error("scaling exponent v_{i} = {numerator}/{denominator} is not integral")]
    NotIntegral {
        i: usize,
        numerator: i64,
        denominator: i64,
    },

    /// A structural fact the constructions rely on did not hold for this input.
    #[error("assertion failed: {what}: expected {expected}, computed {computed}")]
    Assertion {
        what: String,
        expected: String,
        computed: String,
    },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Process exit code: 1 for input and precondition problems, 2 when the
    /// precision ceiling is hit, 3 when a structural fact fails to hold.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InsufficientPrecision(_) => 2,
            Error::Assertion { .. }
            | Error::DiagonalShape(_)
            | Error::NotIntegral { .. }
            | Error::HypothesisViolation { .. } => 3,
            _ => 1,
        }
    }

    pub(crate) fn assertion(
        what: impl Into<String>,
        expected: impl std::fmt::Display,
        computed: impl std::fmt::Display,
    ) -> Self {
        Error::Assertion {
            what: what.into(),
            expected: expected.to_string(),
            computed: computed.to_string(),
        }
    }
}
