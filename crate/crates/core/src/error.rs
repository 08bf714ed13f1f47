use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge for {what} at x = {x} (estimated error {err:.3e})")]
    Quadrature { what: String, x: f64, err: f64 },

    #[error("no bracket for c_n found within (0, 1e30] for n = {n}")]
    BracketNotFound { n: u64 },

    #[error("level set {{u : V(u)/u^2 > 1/{n}}} is empty and the support touches 0")]
    DegenerateLevelSet { n: u64 },

    #[error("no n <= 1e12 satisfies c_n <= a*n for a = {a}; drift too small to tabulate")]
    NoCrossing { a: f64 },

    #[error("insufficient span: {0}")]
    InsufficientSpan(String),

    #[error(
        "step budget exceeded: {requested} jump evaluations requested, budget is {budget}; \
         {suggestion}"
    )]
    StepBudget {
        requested: u128,
        budget: u128,
        suggestion: String,
    },

    #[error("divergent dyadic sum after {terms} terms")]
    DivergentSum { terms: usize },

    #[error("standard error {achieved:.3e} exceeds requested tolerance {requested:.3e}")]
    Tolerance { achieved: f64, requested: f64 },

    #[error("Mittag-Leffler evaluation lost accuracy at beta = {beta}, z = {z}")]
    MittagLefflerAccuracy { beta: f64, z: f64 },

    #[error("spec is not centered; theorem suites require a zero-mean jump law")]
    NotCentered,

    #[error("too few points ({got}) in fitting window, need at least {need}")]
    TooFewPoints { got: usize, need: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
