use std::io;

use thiserror::Error;

use crate::tensor::Shape;

/// Errors raised by tensor algebra, solvers and the file/image harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("non-finite input in {0}")]
    NonFinite(&'static str),

    #[error("imaginary residue {max_imag:e} exceeds bound {bound:e} after inverse transform")]
    ImaginaryResidue { max_imag: f64, bound: f64 },

    #[error("observation mask has no observed entries")]
    EmptyMask,

    #[error("{what}: shape {shape} exceeds the oracle size guard of {limit} entries")]
    SizeGuard {
        what: &'static str,
        shape: Shape,
        limit: usize,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
