//! t-product algebra: products, conjugate transpose, t-QR and t-SVD.
//!
//! Everything is computed slice-by-slice in the Fourier domain over the
//! first `⌊n3/2⌋ + 1` slices and mirrored by conjugation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::spectral::{fft_half, ifft_half};
use crate::tensor::{Shape, Tensor3};

/// Default relative cutoff for [`tubal_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// `a * b` for `a: n1×k×n3`, `b: k×n2×n3`.
pub fn tprod(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    let (sa, sb) = (a.shape(), b.shape());
    if sa.n2 != sb.n1 || sa.n3 != sb.n3 {
        return Err(Error::DimensionMismatch(format!(
            "t-product of {sa} and {sb}"
        )));
    }
    let (fa, fb) = (fft_half(a), fft_half(b));
    let half: Vec<CMat> = fa
        .par_iter()
        .zip(fb.par_iter())
        .map(|(x, y)| linalg::mul(x, y))
        .collect();
    ifft_half(Shape::new(sa.n1, sb.n2, sa.n3), half)
}

/// Tensor conjugate transpose: transpose every frontal slice and reverse
/// slices `2..n3`.
pub fn ttranspose(a: &Tensor3) -> Tensor3 {
    let s = a.shape();
    Tensor3::from_fn(Shape::new(s.n2, s.n1, s.n3), |i, j, k| {
        a[(j, i, (s.n3 - k) % s.n3)]
    })
}

/// t-QR of a wide tensor `b: k×n2×n3` (`k ≤ n2`): returns `(q, r)` with
/// `b = r * q`, where every Fourier slice of `q` has orthonormal rows.
///
/// Computed as per-slice reduced QR of `B̄_i^H`.
pub fn tqr(b: &Tensor3) -> Result<(Tensor3, Tensor3)> {
    let s = b.shape();
    if s.n1 > s.n2 {
        return Err(Error::DimensionMismatch(format!(
            "t-QR needs k <= n2, got {s}"
        )));
    }
    let parts: Vec<(CMat, CMat)> = fft_half(b)
        .par_iter()
        .map(|bi| {
            let (l, q) = linalg::lq_rows(bi);
            (q, l)
        })
        .collect();
    let (qs, rs): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    Ok((
        ifft_half(s, qs)?,
        ifft_half(Shape::new(s.n1, s.n1, s.n3), rs)?,
    ))
}

/// A t-SVD `A = U * S * V^*` with `r = min(n1, n2)` retained tubes.
#[derive(Clone, Debug)]
pub struct TSvd {
    pub u: Tensor3,
    pub s: Tensor3,
    pub v: Tensor3,
    pub width: usize,
}

pub fn tsvd(a: &Tensor3) -> Result<TSvd> {
    let sh = a.shape();
    let r = sh.min_side();
    let parts: Vec<(CMat, CMat, CMat)> = fft_half(a)
        .par_iter()
        .map(|ai| {
            let d = linalg::svd(ai);
            let s = CMat::from_fn(r, r, |i, j| if i == j { d.s[i].into() } else { 0.0.into() });
            (d.u, s, d.v_h.adjoint())
        })
        .collect();
    let mut us = Vec::with_capacity(parts.len());
    let mut ss = Vec::with_capacity(parts.len());
    let mut vs = Vec::with_capacity(parts.len());
    for (u, s, v) in parts {
        us.push(u);
        ss.push(s);
        vs.push(v);
    }
    Ok(TSvd {
        u: ifft_half(Shape::new(sh.n1, r, sh.n3), us)?,
        s: ifft_half(Shape::new(r, r, sh.n3), ss)?,
        v: ifft_half(Shape::new(sh.n2, r, sh.n3), vs)?,
        width: r,
    })
}

/// Singular values of every Fourier slice `Ā_i`, each sorted non-increasing.
/// The outer vector has all `n3` slices.
pub fn spectral_singular_values(a: &Tensor3) -> Vec<Vec<f64>> {
    let n3 = a.shape().n3;
    let half: Vec<Vec<f64>> = fft_half(a)
        .par_iter()
        .map(linalg::singular_values)
        .collect();
    (0..n3)
        .map(|i| half[i.min(crate::spectral::mirror_index(i, n3))].clone())
        .collect()
}

/// Diagonal of the first frontal slice of `S` in the t-SVD: the mean over
/// Fourier slices of the `j`-th singular value.
pub fn singular_tube_heads(a: &Tensor3) -> Vec<f64> {
    let sv = spectral_singular_values(a);
    let n3 = sv.len() as f64;
    let r = a.shape().min_side();
    (0..r)
        .map(|j| sv.iter().map(|s| s[j]).sum::<f64>() / n3)
        .collect()
}

/// Tubal rank: the number of entries of `[S]_{:,:,1}` whose magnitude exceeds
/// `tol` times the largest one.
pub fn tubal_rank(a: &Tensor3, tol: f64) -> Result<usize> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rank tolerance {tol} must be >= 0"
        )));
    }
    let heads = singular_tube_heads(a);
    let max = heads.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if max == 0.0 {
        return Ok(0);
    }
    Ok(heads.iter().filter(|v| v.abs() > tol * max).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::fft_tubes;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(shape: Shape, seed: u64) -> Tensor3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor3::from_fn(shape, |_, _, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn identity_is_neutral() {
        let a = gaussian(Shape::new(4, 3, 5), 1);
        let right = tprod(&a, &Tensor3::identity(3, 5)).unwrap();
        let left = tprod(&Tensor3::identity(4, 5), &a).unwrap();
        assert!(right.max_abs_diff(&a).unwrap() < 1e-12);
        assert!(left.max_abs_diff(&a).unwrap() < 1e-12);
    }

    #[test]
    fn single_slice_is_matrix_product() {
        let a = gaussian(Shape::new(3, 4, 1), 2);
        let b = gaussian(Shape::new(4, 2, 1), 3);
        let c = tprod(&a, &b).unwrap();
        let m: DMatrix<f64> = a.frontal_slice(0) * b.frontal_slice(0);
        assert!((c.frontal_slice(0) - m).amax() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_inner_dims() {
        let a = gaussian(Shape::new(3, 4, 2), 2);
        let b = gaussian(Shape::new(3, 2, 2), 3);
        assert!(tprod(&a, &b).is_err());
        let c = gaussian(Shape::new(4, 2, 3), 3);
        assert!(tprod(&a, &c).is_err());
    }

    #[test]
    fn transpose_properties() {
        let a = gaussian(Shape::new(4, 3, 5), 4);
        assert_eq!(ttranspose(&ttranspose(&a)), a);
        let single = gaussian(Shape::new(3, 2, 1), 5);
        assert_eq!(
            ttranspose(&single).frontal_slice(0),
            single.frontal_slice(0).transpose()
        );
        let g = tprod(&a, &ttranspose(&a)).unwrap();
        assert!(g.max_abs_diff(&ttranspose(&g)).unwrap() < 1e-10);
        // Fourier slices of a^* are adjoints of those of a.
        let (fa, ft) = (fft_tubes(&a), fft_tubes(&ttranspose(&a)));
        for i in 0..5 {
            assert!(linalg::frobenius(&(fa.slice(i).adjoint() - ft.slice(i))) < 1e-12);
        }
    }

    #[test]
    fn tqr_reconstructs_with_orthonormal_rows() {
        let b = gaussian(Shape::new(3, 8, 4), 6);
        let (q, r) = tqr(&b).unwrap();
        assert_eq!(q.dims(), (3, 8, 4));
        assert_eq!(r.dims(), (3, 3, 4));
        let back = tprod(&r, &q).unwrap();
        assert!(back.sub(&b).unwrap().frobenius_norm() <= 1e-10);
        for qi in fft_tubes(&q).slices() {
            assert!(linalg::row_orthonormality_error(qi) <= 1e-10);
        }
    }

    #[test]
    fn tqr_of_row_orthonormal_input_has_unimodular_r() {
        let (q0, _) = tqr(&gaussian(Shape::new(2, 6, 3), 7)).unwrap();
        let (q, r) = tqr(&q0).unwrap();
        for ri in fft_tubes(&r).slices() {
            for i in 0..2 {
                assert!((ri[(i, i)].norm() - 1.0).abs() < 1e-10);
                for j in 0..2 {
                    if i != j {
                        assert!(ri[(i, j)].norm() < 1e-10);
                    }
                }
            }
        }
        assert!(tprod(&r, &q).unwrap().max_abs_diff(&q0).unwrap() < 1e-10);
    }

    #[test]
    fn tqr_rejects_tall_input() {
        assert!(tqr(&gaussian(Shape::new(5, 3, 2), 1)).is_err());
    }

    #[test]
    fn tsvd_reconstructs_and_orders() {
        let a = gaussian(Shape::new(5, 4, 3), 8);
        let d = tsvd(&a).unwrap();
        let back = tprod(&tprod(&d.u, &d.s).unwrap(), &ttranspose(&d.v)).unwrap();
        assert!(back.sub(&a).unwrap().frobenius_norm() / a.frobenius_norm() < 1e-8);
        for si in fft_tubes(&d.s).slices() {
            for j in 0..d.width {
                for l in 0..d.width {
                    if j != l {
                        assert!(si[(j, l)].norm() < 1e-10);
                    }
                }
                if j + 1 < d.width {
                    assert!(si[(j, j)].re + 1e-12 >= si[(j + 1, j + 1)].re);
                }
                assert!(si[(j, j)].re >= -1e-12);
            }
        }
    }

    #[test]
    fn tubal_ranks() {
        assert_eq!(
            tubal_rank(&Tensor3::identity(4, 3), DEFAULT_RANK_TOL).unwrap(),
            4
        );
        assert_eq!(
            tubal_rank(&Tensor3::zeros(Shape::new(3, 3, 2)), DEFAULT_RANK_TOL).unwrap(),
            0
        );
        let m1 = gaussian(Shape::new(12, 3, 3), 9);
        let m2 = gaussian(Shape::new(3, 12, 3), 10);
        let m = tprod(&m1, &m2).unwrap();
        assert_eq!(tubal_rank(&m, DEFAULT_RANK_TOL).unwrap(), 3);
        assert!(tubal_rank(&m, -1.0).is_err());
    }
}
