use thiserror::Error;

/// Errors raised by the bound, constraint and verification routines.
#[derive(Debug, Error)]
pub enum CrbError {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("constraint Jacobian is rank deficient: numerical rank {rank}, expected {expected}")]
    RankDeficientConstraint { rank: usize, expected: usize },

    #[error("Fisher information is full rank (rank {rank}); no constraint is needed")]
    FullRankFim { rank: usize },

    #[error("constraint {index} is not a minimum constraint")]
    NotMinimumConstraint { index: usize },

    #[error("restricted information V^T J V is numerically singular (min eigenvalue {min_eig:e}, cutoff {cutoff:e})")]
    SingularRestriction { min_eig: f64, cutoff: f64 },

    #[error("constraint sampling exhausted after {attempts} consecutive rejections")]
    SamplingExhausted { attempts: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("parameter is degenerate: {0}")]
    DegenerateParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CrbError>;
