//! Tensor nuclear norm and its surrogate generalizations.

use crate::error::{Error, Result};
use crate::surrogate::SurrogateSpec;
use crate::tensor::Tensor3;
use crate::tproduct::{spectral_singular_values, tubal_rank};

/// Tensor nuclear norm `Σ_j [S]_{j,j,1}`.
pub fn tnn(a: &Tensor3) -> f64 {
    norm_star_g(a, &SurrogateSpec::identity())
}

/// `‖A‖_{*,g} = (1/n3) Σ g(σ)` over all `min(n1, n2)·n3` singular values of
/// the Fourier slices.
pub fn norm_star_g(a: &Tensor3, g: &SurrogateSpec) -> f64 {
    let sv = spectral_singular_values(a);
    let n3 = sv.len() as f64;
    sv.iter().flatten().map(|&s| g.value(s)).sum::<f64>() / n3
}

/// The dual low-rank norm: `‖A‖_{*,g}` when `tubal_rank(a, tol) ≤ k`,
/// `+∞` otherwise.
pub fn norm_star_kg(a: &Tensor3, g: &SurrogateSpec, k: usize, tol: f64) -> Result<f64> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rank tolerance {tol} must be >= 0"
        )));
    }
    if tubal_rank(a, tol)? > k {
        return Ok(f64::INFINITY);
    }
    Ok(norm_star_g(a, g))
}
