//! Slow oracles for tests and small-scale validation.

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gtsvt::threshold_slice;
use crate::linalg::CMat;
use crate::solver::{IterationRecord, Observation, SolverConfig, SolverReport, Termination};
use crate::spectral::{fft_half, ifft_half};
use crate::surrogate::SurrogateSpec;
use crate::tensor::{Shape, Tensor3};

/// Largest explicit block-circulant matrix [`tprod_bcirc`] will build.
pub const BCIRC_LIMIT: usize = 1_000_000;

/// Largest tensor [`solve_tnn`] accepts (200×200×5).
pub const TNN_LIMIT: usize = 200 * 200 * 5;

/// `bcirc(a)`: block `(i, j)` is frontal slice `(i − j) mod n3`.
pub fn bcirc(a: &Tensor3) -> Result<DMatrix<f64>> {
    let (n1, n2, n3) = a.dims();
    if n1 * n3 * n2 * n3 > BCIRC_LIMIT {
        return Err(Error::SizeGuard {
            what: "bcirc",
            shape: a.shape(),
            limit: BCIRC_LIMIT,
        });
    }
    let slices: Vec<DMatrix<f64>> = (0..n3).map(|k| a.frontal_slice(k)).collect();
    let mut m = DMatrix::zeros(n1 * n3, n2 * n3);
    for bi in 0..n3 {
        for bj in 0..n3 {
            let s = &slices[(bi + n3 - bj) % n3];
            m.view_mut((bi * n1, bj * n2), (n1, n2)).copy_from(s);
        }
    }
    Ok(m)
}

/// Frontal slices stacked vertically.
pub fn unfold(b: &Tensor3) -> DMatrix<f64> {
    let (n1, n2, n3) = b.dims();
    DMatrix::from_fn(n1 * n3, n2, |r, j| b[(r % n1, j, r / n1)])
}

/// Inverse of [`unfold`] for a tensor with `n3` frontal slices.
pub fn fold(m: &DMatrix<f64>, n3: usize) -> Result<Tensor3> {
    if n3 == 0 || !m.nrows().is_multiple_of(n3) {
        return Err(Error::DimensionMismatch(format!(
            "cannot fold {} rows into {n3} slices",
            m.nrows()
        )));
    }
    let n1 = m.nrows() / n3;
    Ok(Tensor3::from_fn(
        Shape::new(n1, m.ncols(), n3),
        |i, j, k| m[(i + k * n1, j)],
    ))
}

/// `fold(bcirc(a) · unfold(b))` with a dense matrix product.
pub fn tprod_bcirc(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    let (_, n2, n3) = a.dims();
    let (m1, _, m3) = b.dims();
    if n2 != m1 || n3 != m3 {
        return Err(Error::DimensionMismatch(format!(
            "t-product of {} and {}",
            a.shape(),
            b.shape()
        )));
    }
    fold(&(bcirc(a)? * unfold(b)), n3)
}

/// Tensor completion by t-TNN minimization with classical ADMM.
///
/// Each iteration applies full t-SVT at threshold `1/μ`. Only `rho`, `mu0`,
/// `mu_max`, `eps` and `max_iters` of `cfg` are used; `ranks` in the log
/// count spectral singular values above the threshold.
pub fn solve_tnn(obs: &Observation, cfg: &SolverConfig) -> Result<SolverReport> {
    let shape = obs.shape();
    if shape.len() > TNN_LIMIT {
        return Err(Error::SizeGuard {
            what: "solve_tnn",
            shape,
            limit: TNN_LIMIT,
        });
    }
    if obs.mask().count() == 0 {
        return Err(Error::EmptyMask);
    }
    let mut check = cfg.clone();
    check.fixed_rank = true;
    check.k_init = crate::solver::RankInit::Uniform(1);
    check.validate(shape)?;

    let identity = SurrogateSpec::identity();
    let start = Instant::now();
    let m = obs.data();
    let mask = obs.mask().as_slice();
    let mut x = Tensor3::zeros(shape);
    let mut e = Tensor3::zeros(shape);
    let mut y = Tensor3::zeros(shape);
    let mut log = Vec::new();
    let mut termination = Termination::MaxIterations;

    for t in 0..cfg.max_iters {
        let mu = cfg.penalty(t);
        let inv_mu = 1.0 / mu;
        let arg = Tensor3::from_vec(
            shape,
            m.as_slice()
                .iter()
                .zip(e.as_slice())
                .zip(y.as_slice())
                .map(|((&mv, &ev), &yv)| mv - ev + yv * inv_mu)
                .collect(),
        )?;
        let parts: Vec<(CMat, usize)> = fft_half(&arg)
            .par_iter()
            .map(|s| {
                let (out, sv) = threshold_slice(s, inv_mu, &identity);
                (out, sv.iter().filter(|&&v| v > inv_mu).count())
            })
            .collect();
        let ranks = parts.iter().map(|p| p.1).collect();
        let x_new = ifft_half(shape, parts.into_iter().map(|p| p.0).collect())?;

        let mut e_new = Tensor3::zeros(shape);
        let (mut primal, mut delta_e) = (0.0f64, 0.0f64);
        {
            let ed = e_new.as_mut_slice();
            let yd = y.as_mut_slice();
            for (idx, &observed) in mask.iter().enumerate() {
                let xv = x_new.as_slice()[idx];
                if !observed {
                    ed[idx] = -xv + yd[idx] * inv_mu;
                }
                let r = m.as_slice()[idx] - xv - ed[idx];
                primal = primal.max(r.abs());
                delta_e = delta_e.max((ed[idx] - e.as_slice()[idx]).abs());
                yd[idx] += mu * r;
            }
        }
        let delta_x = x_new.max_abs_diff(&x)?;
        log.push(IterationRecord {
            primal_residual: primal,
            delta_p: delta_x,
            delta_e,
            mu,
            e_on_omega: 0.0,
            ranks,
            elapsed: start.elapsed(),
        });
        x = x_new;
        e = e_new;
        if primal < cfg.eps && delta_x < cfg.eps && delta_e < cfg.eps {
            termination = Termination::Converged;
            break;
        }
    }

    Ok(SolverReport {
        recovered: x,
        iterations: log.len(),
        log,
        termination,
        elapsed: start.elapsed(),
    })
}
