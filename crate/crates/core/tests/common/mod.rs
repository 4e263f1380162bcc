#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tcdlr_core::linalg::{self, CMat};
use tcdlr_core::{tprod, tqr, Shape, Tensor3};

pub fn gauss_tensor(shape: Shape, rng: &mut ChaCha8Rng) -> Tensor3 {
    Tensor3::from_fn(shape, |_, _, _| StandardNormal.sample(rng))
}

pub fn gauss_cmat(r: usize, c: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(r, c, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

/// `n1×n2×n3` Gaussian-factor tensor of tubal rank `r`.
pub fn low_rank(n1: usize, n2: usize, n3: usize, r: usize, rng: &mut ChaCha8Rng) -> Tensor3 {
    let a = gauss_tensor(Shape::new(n1, r, n3), rng);
    let b = gauss_tensor(Shape::new(r, n2, n3), rng);
    tprod(&a, &b).unwrap()
}

/// Tensor whose Fourier slices have orthonormal rows.
pub fn row_orthonormal(k: usize, n2: usize, n3: usize, rng: &mut ChaCha8Rng) -> Tensor3 {
    tqr(&gauss_tensor(Shape::new(k, n2, n3), rng)).unwrap().0
}

pub fn row_orthonormal_cmat(k: usize, n2: usize, rng: &mut ChaCha8Rng) -> CMat {
    linalg::lq_rows(&gauss_cmat(k, n2, rng)).1
}

pub fn random_shape(rng: &mut ChaCha8Rng, max: (usize, usize, usize)) -> Shape {
    Shape::new(
        rng.random_range(1..=max.0),
        rng.random_range(1..=max.1),
        rng.random_range(1..=max.2),
    )
}

/// `‖x − y‖_F / ‖y‖_F`, or the absolute difference when `y = 0`.
pub fn rel_frob(x: &Tensor3, y: &Tensor3) -> f64 {
    let d = x.sub(y).unwrap().frobenius_norm();
    let n = y.frobenius_norm();
    if n == 0.0 {
        d
    } else {
        d / n
    }
}
