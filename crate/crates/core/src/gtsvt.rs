//! Generalized tensor singular value thresholding `S_{τ,g}`.
//!
//! `S_{τ,g}(Y) = argmin_X ½‖Y − X‖_F² + τ‖X‖_{*,g}`. Both terms carry the same
//! `1/n3` Parseval factor in the Fourier domain, so each spectral singular
//! value is mapped through the scalar prox with weight `τ` unchanged.
//!
//! [`gtsvt_factored`] evaluates `S_{τ,g}(A * B)` without forming the
//! `n1×n2×n3` product's SVD: with `B^* = Q^* * R^*` and `Z = A * R`,
//! `S_{τ,g}(A * B) = S_{τ,g}(Z) * Q`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::spectral::{fft_half, half_len, ifft_half};
use crate::surrogate::SurrogateSpec;
use crate::tensor::{Shape, Tensor3};

/// One Fourier slice of a factored iterate `Z̄_i Q̄_i` with `Q̄_i` row-orthonormal.
#[derive(Clone, Debug)]
pub struct SliceFactor {
    pub z: CMat,
    pub q: CMat,
}

impl SliceFactor {
    pub fn new(z: CMat, q: CMat) -> Result<Self> {
        if z.ncols() != q.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "factor widths differ: z has {} columns, q has {} rows",
                z.ncols(),
                q.nrows()
            )));
        }
        Ok(SliceFactor { z, q })
    }

    pub fn rank(&self) -> usize {
        self.q.nrows()
    }

    pub fn product(&self) -> CMat {
        linalg::mul(&self.z, &self.q)
    }
}

/// Per-slice factors for the first `⌊n3/2⌋ + 1` Fourier slices; the
/// remaining slices are the conjugates of their mirrors.
#[derive(Clone, Debug)]
pub struct FactorState {
    shape: Shape,
    slices: Vec<SliceFactor>,
}

impl FactorState {
    pub fn new(shape: Shape, slices: Vec<SliceFactor>) -> Result<Self> {
        if slices.len() != half_len(shape.n3)
            || slices
                .iter()
                .any(|s| s.z.nrows() != shape.n1 || s.q.ncols() != shape.n2)
        {
            return Err(Error::DimensionMismatch(format!(
                "factor slices do not describe a {shape} tensor"
            )));
        }
        Ok(FactorState { shape, slices })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn slices(&self) -> &[SliceFactor] {
        &self.slices
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.slices.iter().map(SliceFactor::rank).collect()
    }

    /// The real tensor `Z * Q`.
    pub fn reconstruct(&self) -> Result<Tensor3> {
        ifft_half(
            self.shape,
            self.slices.iter().map(SliceFactor::product).collect(),
        )
    }
}

/// Thresholds the singular values of one complex matrix.
///
/// Returns the thresholded matrix and the original singular values. An
/// exactly zero matrix is returned unchanged.
pub(crate) fn threshold_slice(m: &CMat, tau: f64, g: &SurrogateSpec) -> (CMat, Vec<f64>) {
    if linalg::is_zero(m) {
        return (m.clone(), vec![0.0; m.nrows().min(m.ncols())]);
    }
    let d = linalg::svd(m);
    let shrunk: Vec<f64> = d.s.iter().map(|&s| g.prox_unchecked(s, tau)).collect();
    let keep = shrunk.iter().take_while(|&&s| s > 0.0).count();
    let u = d.u.columns(0, keep).into_owned();
    let vh = d.v_h.rows(0, keep).into_owned();
    let out = linalg::mul(&linalg::scale_columns(&u, &shrunk[..keep]), &vh);
    (out, d.s)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "threshold tau = {tau} must be finite and >= 0"
        )));
    }
    Ok(())
}

/// Reference path: per-slice SVD of the full spectrum of `y`.
pub fn gtsvt_full(y: &Tensor3, tau: f64, g: &SurrogateSpec) -> Result<Tensor3> {
    check_tau(tau)?;
    let half: Vec<CMat> = fft_half(y)
        .par_iter()
        .map(|yi| threshold_slice(yi, tau, g).0)
        .collect();
    ifft_half(y.shape(), half)
}

/// Fast path: `S_{τ,g}(a * b)` for `a: n1×k×n3`, `b: k×n2×n3` with
/// `k ≤ min(n1, n2)`.
///
/// The returned state holds the unthresholded factors `(Z̄_i, Q̄_i)` with
/// `Z * Q = a * b`.
pub fn gtsvt_factored(
    a: &Tensor3,
    b: &Tensor3,
    tau: f64,
    g: &SurrogateSpec,
) -> Result<(Tensor3, FactorState)> {
    check_tau(tau)?;
    let (sa, sb) = (a.shape(), b.shape());
    if sa.n2 != sb.n1 || sa.n3 != sb.n3 {
        return Err(Error::DimensionMismatch(format!("factors {sa} and {sb}")));
    }
    let k = sa.n2;
    if k > sa.n1.min(sb.n2) {
        return Err(Error::DimensionMismatch(format!(
            "inner rank {k} exceeds min(n1, n2) = {}",
            sa.n1.min(sb.n2)
        )));
    }
    let shape = Shape::new(sa.n1, sb.n2, sa.n3);
    let (fa, fb) = (fft_half(a), fft_half(b));
    let parts: Vec<(CMat, SliceFactor)> = fa
        .par_iter()
        .zip(fb.par_iter())
        .map(|(ai, bi)| {
            // B̄ = R̄ Q̄ from the QR of B̄^H, then Z̄ = Ā R̄.
            let (r, q) = linalg::lq_rows(bi);
            let z = linalg::mul(ai, &r);
            let (sz, _) = threshold_slice(&z, tau, g);
            (linalg::mul(&sz, &q), SliceFactor { z, q })
        })
        .collect();
    let (xs, factors): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    Ok((ifft_half(shape, xs)?, FactorState::new(shape, factors)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::singular_values;
    use crate::spectral::fft_tubes;
    use crate::surrogate::SurrogateKind;
    use crate::tproduct::{tprod, tqr};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(shape: Shape, seed: u64) -> Tensor3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor3::from_fn(shape, |_, _, _| StandardNormal.sample(&mut rng))
    }

    fn rel(a: &Tensor3, b: &Tensor3) -> f64 {
        a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm().max(1e-300)
    }

    #[test]
    fn zero_tau_is_identity() {
        let y = gaussian(Shape::new(5, 4, 3), 1);
        let x = gtsvt_full(&y, 0.0, &SurrogateSpec::default()).unwrap();
        assert!(x.max_abs_diff(&y).unwrap() < 1e-12);
    }

    #[test]
    fn identity_single_slice_soft_thresholds() {
        let y = gaussian(Shape::new(5, 4, 1), 2);
        let x = gtsvt_full(&y, 0.7, &SurrogateSpec::identity()).unwrap();
        let sy = singular_values(&linalg::to_complex(&y.frontal_slice(0)));
        let sx = singular_values(&linalg::to_complex(&x.frontal_slice(0)));
        for (a, b) in sy.iter().zip(&sx) {
            assert!(((a - 0.7).max(0.0) - b).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_values_follow_scalar_prox() {
        // Oracle: independent per-slice SVDs of input and output, compared
        // through the scalar prox.
        let g = SurrogateSpec::lp(0.8).unwrap();
        let y = gaussian(Shape::new(6, 5, 3), 3);
        let x = gtsvt_full(&y, 0.5, &g).unwrap();
        let (fy, fx) = (fft_tubes(&y), fft_tubes(&x));
        for i in 0..3 {
            let sy = singular_values(fy.slice(i));
            let sx = singular_values(fx.slice(i));
            for (a, b) in sy.iter().zip(&sx) {
                assert!((g.prox(*a, 0.5).unwrap() - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn factored_matches_full_for_geman() {
        let g = SurrogateSpec::new(SurrogateKind::Geman, 0.8, 1.0).unwrap();
        let a = gaussian(Shape::new(20, 5, 3), 4);
        let b = gaussian(Shape::new(5, 15, 3), 5);
        let (x, state) = gtsvt_factored(&a, &b, 0.2, &g).unwrap();
        let full = gtsvt_full(&tprod(&a, &b).unwrap(), 0.2, &g).unwrap();
        assert!(rel(&x, &full) <= 1e-8);
        assert_eq!(state.ranks(), vec![5, 5]);
        for s in state.slices() {
            assert!(linalg::row_orthonormality_error(&s.q) < 1e-8);
        }
    }

    #[test]
    fn factored_preserves_product() {
        let a = gaussian(Shape::new(7, 3, 4), 6);
        let b = gaussian(Shape::new(3, 9, 4), 7);
        let (x, state) = gtsvt_factored(&a, &b, 0.0, &SurrogateSpec::default()).unwrap();
        let ab = tprod(&a, &b).unwrap();
        assert!(state.reconstruct().unwrap().max_abs_diff(&ab).unwrap() <= 1e-10);
        assert!(x.max_abs_diff(&ab).unwrap() <= 1e-10);
    }

    #[test]
    fn row_orthonormal_b_thresholds_a_directly() {
        let g = SurrogateSpec::default();
        let a = gaussian(Shape::new(8, 3, 3), 8);
        let (q, _) = tqr(&gaussian(Shape::new(3, 10, 3), 9)).unwrap();
        let (x, _) = gtsvt_factored(&a, &q, 0.4, &g).unwrap();
        let expect = tprod(&gtsvt_full(&a, 0.4, &g).unwrap(), &q).unwrap();
        assert!(rel(&x, &expect) < 1e-8);
    }

    #[test]
    fn zero_slices_pass_through() {
        let z = Tensor3::zeros(Shape::new(4, 3, 3));
        let x = gtsvt_full(&z, 1.0, &SurrogateSpec::default()).unwrap();
        assert!(x.is_zero());
    }

    #[test]
    fn rejects_bad_arguments() {
        let a = gaussian(Shape::new(4, 5, 2), 1);
        let b = gaussian(Shape::new(5, 6, 2), 2);
        assert!(gtsvt_factored(&a, &b, 0.1, &SurrogateSpec::default()).is_err());
        assert!(gtsvt_full(&a, -1.0, &SurrogateSpec::default()).is_err());
    }
}
