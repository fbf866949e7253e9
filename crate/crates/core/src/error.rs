use thiserror::Error;

use crate::oracle::SpectrumReport;

/// Errors raised by the factorization and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("column {0} has zero norm")]
    DegenerateColumn(usize),

    #[error("no candidate column: all partial norms are zero")]
    EmptyCandidates,

    #[error("largest partial norm {max:e} does not exceed the floor {floor:e}")]
    NormFloor { max: f64, floor: f64 },

    #[error("one-sided Jacobi did not converge within {sweeps} sweeps")]
    NoConvergence {
        sweeps: usize,
        partial: Box<SpectrumReport>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn mismatch(op: &'static str, detail: impl Into<String>) -> Error {
    Error::DimensionMismatch {
        op,
        detail: detail.into(),
    }
}
