//! Low-rank third-order tensor completion under a dual low-rank constraint.
//!
//! The crate provides FFT-domain t-product algebra ([`tproduct`]), surrogate
//! penalties of the tubal rank and their scalar prox ([`surrogate`]),
//! generalized tensor singular value thresholding with a factored fast path
//! ([`gtsvt`]), the ADMM completion solvers with optional per-slice rank
//! estimation ([`solver`]), slow reference oracles ([`reference`]) and a
//! benchmark/data harness ([`harness`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gtsvt;
pub mod harness;
pub mod linalg;
pub mod norms;
pub mod reference;
pub mod solver;
pub mod spectral;
pub mod surrogate;
pub mod tensor;
pub mod tproduct;

pub use error::{Error, Result};
pub use gtsvt::{gtsvt_factored, gtsvt_full, FactorState, SliceFactor};
pub use norms::{norm_star_g, norm_star_kg, tnn};
pub use solver::{
    solve, solve_tcdlr, solve_tcdlr_re, IterationRecord, Observation, RankInit, SolverConfig,
    SolverReport, Termination,
};
pub use spectral::{fft_tubes, ifft_tubes, SpectralSlices};
pub use surrogate::{SurrogateKind, SurrogateSpec};
pub use tensor::{Mask3, Shape, Tensor3};
pub use tproduct::{tprod, tqr, tsvd, ttranspose, tubal_rank, TSvd};
