use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid root system: {0}")]
    InvalidRootSystem(String),

    #[error("root system is reducible; {0}")]
    Reducible(String),

    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("operator is not nilpotent (relative norm of top power {residual:e})")]
    NotNilpotent { residual: f64 },

    #[error("operator is zero; nilpotency degree undefined")]
    ZeroOperator,

    #[error("ill-conditioned eigenstructure (condition estimate {condition:e}): {detail}")]
    IllConditioned { condition: f64, detail: String },

    #[error("matrix exponential overflowed at t = {t}; largest finite grid point was t = {max_t}")]
    Overflow { t: f64, max_t: f64 },

    #[error("invalid rank-one family: {0}")]
    InvalidFamily(String),

    #[error("invalid group specification: {0}")]
    InvalidSpec(String),

    #[error("element is not unimodular (det = {det})")]
    NotUnimodular { det: f64 },

    #[error("fundamental-domain reduction failed: {0}")]
    Reduction(String),

    #[error("witness matrix overflowed after {steps} steps")]
    WitnessOverflow { steps: u64 },

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error(
        "measure schedule sums to {total:.3} over the horizon; a summable schedule is hit only \
         finitely often almost surely (easy Borel-Cantelli), so there is no ratio to test"
    )]
    ConvergentSchedule { total: f64 },

    #[error("degenerate test function: {0}")]
    DegenerateFunction(String),

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
