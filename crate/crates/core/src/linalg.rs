//! Complex dense matrix helpers for the per-slice Fourier-domain work.
//!
//! Products are formed from real GEMMs on the split real/imaginary parts so
//! they run through the optimized `f64` kernels.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

fn split(a: &CMat) -> (RMat, RMat) {
    (a.map(|z| z.re), a.map(|z| z.im))
}

fn join(re: RMat, im: &RMat) -> CMat {
    re.zip_map(im, Complex64::new)
}

/// `a * b`.
pub fn mul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let mut re = &ar * &br;
    re -= &ai * &bi;
    let mut im = &ar * &bi;
    im += &ai * &br;
    join(re, &im)
}

/// `a * b^H`.
pub fn mul_adj_right(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.ncols(), "inner dimensions differ");
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let (brt, bit) = (br.transpose(), bi.transpose());
    let mut re = &ar * &brt;
    re += &ai * &bit;
    let mut im = &ai * &brt;
    im -= &ar * &bit;
    join(re, &im)
}

/// `a^H * b`.
pub fn mul_adj_left(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.nrows(), b.nrows(), "inner dimensions differ");
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let mut re = ar.tr_mul(&br);
    re += ai.tr_mul(&bi);
    let mut im = ar.tr_mul(&bi);
    im -= ai.tr_mul(&br);
    join(re, &im)
}

pub fn to_complex(a: &RMat) -> CMat {
    a.map(|v| Complex64::new(v, 0.0))
}

/// Thin QR of a tall (or square) matrix: `m = q r`, `q` with orthonormal columns.
pub fn thin_qr(m: &CMat) -> (CMat, CMat) {
    debug_assert!(m.nrows() >= m.ncols());
    let qr = m.clone().qr();
    (qr.q(), qr.r())
}

/// Row-orthonormal factorization of a wide matrix: `m = l q` with `q q^H = I`.
///
/// Computed as the thin QR of `m^H`.
pub fn lq_rows(m: &CMat) -> (CMat, CMat) {
    let (q, r) = thin_qr(&m.adjoint());
    (r.adjoint(), q.adjoint())
}

/// Thin SVD with singular values sorted in non-increasing order, computed by
/// the system LAPACK.
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v_h: CMat,
}

pub fn svd(m: &CMat) -> Svd {
    let (s, u, v_h) = lapack::gesdd(m, true);
    Svd { u, s, v_h }
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    lapack::gesdd(m, false).0
}

mod lapack {
    use std::os::raw::c_char;

    use lapack_sys::{c_double_complex, zgesdd_, zgesvd_};
    use num_complex::Complex64;

    use super::CMat;

    fn ptr(v: &mut [Complex64]) -> *mut c_double_complex {
        v.as_mut_ptr().cast()
    }

    /// Thin SVD through `zgesdd`, falling back to `zgesvd` when the
    /// divide-and-conquer iteration fails. Without `vectors` the returned
    /// factors are empty.
    pub(super) fn gesdd(m: &CMat, vectors: bool) -> (Vec<f64>, CMat, CMat) {
        let (rows, cols) = m.shape();
        let k = rows.min(cols);
        if k == 0 {
            return (Vec::new(), CMat::zeros(rows, 0), CMat::zeros(0, cols));
        }
        let (mi, ni, ki) = (rows as i32, cols as i32, k as i32);
        let jobz = if vectors { b'S' } else { b'N' } as c_char;
        let mut a: Vec<Complex64> = m.as_slice().to_vec();
        let mut s = vec![0.0; k];
        let (ucols, vrows) = if vectors { (k, k) } else { (1, 1) };
        let mut u = vec![Complex64::default(); rows * ucols];
        let mut vt = vec![Complex64::default(); vrows * cols];
        let (ldu, ldvt) = (mi, if vectors { ki } else { 1 });
        let lrwork = if vectors {
            k * (5 * k + 7).max(2 * rows.max(cols) + 2 * k + 1)
        } else {
            7 * k
        };
        let mut rwork = vec![0.0; lrwork.max(1)];
        let mut iwork = vec![0i32; 8 * k];
        let mut info = 0;
        let mut query = [Complex64::default()];
        unsafe {
            zgesdd_(
                &jobz,
                &mi,
                &ni,
                ptr(&mut a),
                &mi,
                s.as_mut_ptr(),
                ptr(&mut u),
                &ldu,
                ptr(&mut vt),
                &ldvt,
                ptr(&mut query),
                &-1,
                rwork.as_mut_ptr(),
                iwork.as_mut_ptr(),
                &mut info,
            );
        }
        let lwork = (query[0].re as usize).max(1);
        let mut work = vec![Complex64::default(); lwork];
        unsafe {
            zgesdd_(
                &jobz,
                &mi,
                &ni,
                ptr(&mut a),
                &mi,
                s.as_mut_ptr(),
                ptr(&mut u),
                &ldu,
                ptr(&mut vt),
                &ldvt,
                ptr(&mut work),
                &(lwork as i32),
                rwork.as_mut_ptr(),
                iwork.as_mut_ptr(),
                &mut info,
            );
        }
        if info > 0 {
            return gesvd(m, vectors);
        }
        assert_eq!(info, 0, "zgesdd rejected argument {}", -info);
        finish(s, u, vt, rows, cols, vectors)
    }

    fn gesvd(m: &CMat, vectors: bool) -> (Vec<f64>, CMat, CMat) {
        let (rows, cols) = m.shape();
        let k = rows.min(cols);
        let (mi, ni, ki) = (rows as i32, cols as i32, k as i32);
        let job = if vectors { b'S' } else { b'N' } as c_char;
        let mut a: Vec<Complex64> = m.as_slice().to_vec();
        let mut s = vec![0.0; k];
        let (ucols, vrows) = if vectors { (k, k) } else { (1, 1) };
        let mut u = vec![Complex64::default(); rows * ucols];
        let mut vt = vec![Complex64::default(); vrows * cols];
        let ldvt = if vectors { ki } else { 1 };
        let mut rwork = vec![0.0; 5 * k];
        let mut info = 0;
        let mut query = [Complex64::default()];
        unsafe {
            zgesvd_(
                &job,
                &job,
                &mi,
                &ni,
                ptr(&mut a),
                &mi,
                s.as_mut_ptr(),
                ptr(&mut u),
                &mi,
                ptr(&mut vt),
                &ldvt,
                ptr(&mut query),
                &-1,
                rwork.as_mut_ptr(),
                &mut info,
            );
        }
        let lwork = (query[0].re as usize).max(1);
        let mut work = vec![Complex64::default(); lwork];
        unsafe {
            zgesvd_(
                &job,
                &job,
                &mi,
                &ni,
                ptr(&mut a),
                &mi,
                s.as_mut_ptr(),
                ptr(&mut u),
                &mi,
                ptr(&mut vt),
                &ldvt,
                ptr(&mut work),
                &(lwork as i32),
                rwork.as_mut_ptr(),
                &mut info,
            );
        }
        assert_eq!(info, 0, "zgesvd failed with info = {info}");
        finish(s, u, vt, rows, cols, vectors)
    }

    fn finish(
        s: Vec<f64>,
        u: Vec<Complex64>,
        vt: Vec<Complex64>,
        rows: usize,
        cols: usize,
        vectors: bool,
    ) -> (Vec<f64>, CMat, CMat) {
        if !vectors {
            return (s, CMat::zeros(rows, 0), CMat::zeros(0, cols));
        }
        let k = s.len();
        (s, CMat::from_vec(rows, k, u), CMat::from_vec(k, cols, vt))
    }
}

/// Scales column `j` of `u` by `s[j]`.
pub fn scale_columns(u: &CMat, s: &[f64]) -> CMat {
    let mut out = u.clone();
    for (j, &sj) in s.iter().enumerate() {
        out.column_mut(j).scale_mut(sj);
    }
    out
}

/// Moore–Penrose pseudo-inverse via SVD; singular values at or below
/// `rel_cutoff * σ_max` are treated as zero.
pub fn pinv(m: &CMat, rel_cutoff: f64) -> CMat {
    let Svd { u, s, v_h } = svd(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let inv: Vec<f64> = s
        .iter()
        .map(|&x| {
            if smax > 0.0 && x > rel_cutoff * smax {
                1.0 / x
            } else {
                0.0
            }
        })
        .collect();
    // pinv = V diag(1/s) U^H
    let v_scaled = scale_columns(&v_h.adjoint(), &inv);
    mul_adj_right(&v_scaled, &u)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_zero(m: &CMat) -> bool {
    m.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

/// `‖m m^H − I‖_max`, the deviation from orthonormal rows.
pub fn row_orthonormality_error(m: &CMat) -> f64 {
    let g = mul_adj_right(m, m);
    let mut err: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            err = err.max((g[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    err
}
