use serde::Serialize;
use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum GibbsError {
    #[error("invalid spin grid: {0}")]
    InvalidGrid(String),

    #[error("constraint set is empty")]
    EmptyConstraintSet,

    #[error("no admissible pair: A(M x M) does not meet the constraint set")]
    EmptySystem,

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("successor map is not locally constant; violating pairs: {pairs:?}")]
    LocalConstancy { pairs: Vec<(usize, usize)> },

    #[error("word table at depth {depth} would hold {count} words (budget {budget})")]
    DepthOverflow { depth: usize, count: u128, budget: usize },

    #[error("potential has Lip(e^phi) = 0; choose_delta needs a positive constant")]
    DegeneratePotential,

    #[error("depth mismatch: need depth >= {required}, got {available}")]
    DepthMismatch { required: usize, available: usize },

    #[error("word of length {got} is too short, need {needed}")]
    WordTooShort { needed: usize, got: usize },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid probe set: {0}")]
    InvalidProbe(String),

    #[error("transport solver failure: {0}")]
    SolverFailure(String),

    #[error("potential is not normalized: ||L1 - 1|| = {deviation:e}")]
    NotNormalized { deviation: f64 },

    #[error("depth exhausted: lag {lag} needs depth {required}, measure has {available}")]
    DepthExhausted { lag: usize, required: usize, available: usize },

    #[error("insufficient decay data: {0}")]
    InsufficientDecayData(String),

    #[error("no spectral gap: estimated rate {rate}")]
    NoGap { rate: f64 },

    #[error("variance {sigma2:e} is below tolerance; use the coboundary test")]
    ZeroVariance { sigma2: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl GibbsError {
    /// Variant name, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            GibbsError::InvalidGrid(_) => "InvalidGrid",
            GibbsError::EmptyConstraintSet => "EmptyConstraintSet",
            GibbsError::EmptySystem => "EmptySystem",
            GibbsError::InvalidSystem(_) => "InvalidSystem",
            GibbsError::LocalConstancy { .. } => "LocalConstancy",
            GibbsError::DepthOverflow { .. } => "DepthOverflow",
            GibbsError::DegeneratePotential => "DegeneratePotential",
            GibbsError::DepthMismatch { .. } => "DepthMismatch",
            GibbsError::WordTooShort { .. } => "WordTooShort",
            GibbsError::NoConvergence { .. } => "NoConvergence",
            GibbsError::InvalidProbe(_) => "InvalidProbe",
            GibbsError::SolverFailure(_) => "SolverFailure",
            GibbsError::NotNormalized { .. } => "NotNormalized",
            GibbsError::DepthExhausted { .. } => "DepthExhausted",
            GibbsError::InsufficientDecayData(_) => "InsufficientDecayData",
            GibbsError::NoGap { .. } => "NoGap",
            GibbsError::ZeroVariance { .. } => "ZeroVariance",
            GibbsError::InvalidArgument(_) => "InvalidArgument",
        }
    }

    /// True for failures of an iteration or estimate on valid input, as
    /// opposed to rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            GibbsError::NoConvergence { .. }
                | GibbsError::SolverFailure(_)
                | GibbsError::DepthExhausted { .. }
                | GibbsError::InsufficientDecayData(_)
                | GibbsError::NoGap { .. }
                | GibbsError::ZeroVariance { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, GibbsError>;
