use thiserror::Error;

/// Errors shared by all algebra, hierarchy, and operator routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("lambda-support [{lo}, {hi}] exceeds degree window [{win_lo}, {win_hi}]")]
    DegreeOverflow {
        lo: i32,
        hi: i32,
        win_lo: i32,
        win_hi: i32,
    },

    #[error("Fourier support {support} exceeds mode cap {cap}")]
    ModeOverflow { support: usize, cap: usize },

    #[error("element is not invertible: {0}")]
    NotInvertible(String),

    #[error("flow leaves the manifold pattern: {0}")]
    TangencyViolation(String),

    #[error("time integration aborted: {0}")]
    BlowUp(String),

    #[error("nonlocal tail requires a zero-mean argument (mean = {mean:.3e})")]
    NonzeroMeanInNonlocalTail { mean: f64 },

    #[error("Dirac reduction is ill-posed: {0}")]
    IllPosedReduction(String),

    #[error("unknown operator: {0}")]
    UnknownOperator(String),

    #[error("covector outside the admissible sector: {0}")]
    SectorViolation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
