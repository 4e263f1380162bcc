//! Per-slice rank increase and decrease for the rank-estimating solver.

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::gtsvt::SliceFactor;
use crate::linalg::{self, CMat};

/// Resolved rank-adjustment parameters for one problem size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankBounds {
    pub k_min: usize,
    pub k_max: usize,
    /// Increase step `l`.
    pub step: usize,
    /// Slack `h` added to the `√n1 + √n2` noise bound.
    pub h: f64,
    /// Residual sample size `w` for the mean/deviation estimates.
    pub sample_w: usize,
    /// Power steps in the `σ₁` estimate; see [`residual_statistic`].
    pub power_steps: usize,
}

/// Gap statistic level at which the decrease strategy fires.
pub const DECREASE_GAP: f64 = 10.0;
/// Fraction of `Σ λ_j` retained by a decrease.
pub const ENERGY_FRACTION: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IncreaseOutcome {
    /// `s̄_max` of the standardized residual; zero when the residual is constant.
    pub statistic: f64,
    /// `√n1 + √n2 + h`.
    pub threshold: f64,
    /// Number of rows added to `Q̄` (zero when not triggered or at `k_max`).
    pub added: usize,
}

/// Estimate of `σ₁((D − μ̂) / δ̂)` from a standard normal probe `p`, with the
/// mean `μ̂` and deviation `δ̂` taken over `sample_w` entries drawn without
/// replacement.
///
/// With `power_steps = 0` this is the raw projection norm `‖p^T A‖₂`, which
/// for any standardized `A` concentrates near `√(n1 n2)` regardless of its
/// structure. Each power step replaces the probe by `A^H A` applied to it, so
/// `power_steps = 1` returns `‖A A^H p‖ / ‖A^H p‖`, a lower bound on `σ₁` that
/// stays near `√(2n)` for square Gaussian noise and is close to `σ₁` for a
/// dominant low-rank part.
pub fn residual_statistic<R: Rng + ?Sized>(
    d: &CMat,
    sample_w: usize,
    power_steps: usize,
    rng: &mut R,
) -> f64 {
    let n = d.len();
    let w = sample_w.min(n);
    if w < 2 {
        return 0.0;
    }
    let entries = d.as_slice();
    let picks = index::sample(rng, n, w);
    let mean: Complex64 = picks.iter().map(|p| entries[p]).sum::<Complex64>() / w as f64;
    let var = picks
        .iter()
        .map(|p| (entries[p] - mean).norm_sqr())
        .sum::<f64>()
        / (w - 1) as f64;
    let delta = var.sqrt();
    if !(delta > 0.0) {
        return 0.0;
    }
    let p = CMat::from_fn(d.nrows(), 1, |_, _| {
        Complex64::new(StandardNormal.sample(rng), 0.0)
    });
    let a = d.map(|z| (z - mean) / delta);
    // x = A^H p
    let mut x = linalg::mul_adj_left(&a, &p);
    if power_steps == 0 {
        return linalg::frobenius(&x);
    }
    for _ in 1..power_steps {
        let nx = linalg::frobenius(&x);
        if nx == 0.0 {
            return 0.0;
        }
        x /= Complex64::new(nx, 0.0);
        x = linalg::mul_adj_left(&a, &linalg::mul(&a, &x));
    }
    let nx = linalg::frobenius(&x);
    if nx == 0.0 {
        return 0.0;
    }
    linalg::frobenius(&linalg::mul(&a, &x)) / nx
}

/// Raises the slice rank by `step` (capped at `k_max`) when the residual
/// `D̄ = C̄ − Z̄Q̄` looks structured, augmenting the row space with a Gaussian
/// sketch `P D̄`. `Z̄Q̄` is unchanged by the augmentation.
pub fn rank_increase<R: Rng + ?Sized>(
    slice: &mut SliceFactor,
    c: &CMat,
    bounds: &RankBounds,
    rng: &mut R,
) -> IncreaseOutcome {
    let (n1, n2) = c.shape();
    let d = c - slice.product();
    let statistic = residual_statistic(&d, bounds.sample_w, bounds.power_steps, rng);
    let threshold = (n1 as f64).sqrt() + (n2 as f64).sqrt() + bounds.h;
    let k = slice.rank();
    let target = (k + bounds.step).min(bounds.k_max).min(n2);
    if statistic <= threshold || target <= k {
        return IncreaseOutcome {
            statistic,
            threshold,
            added: 0,
        };
    }
    let l = target - k;
    let sketch = CMat::from_fn(l, n1, |_, _| {
        Complex64::new(StandardNormal.sample(rng), 0.0)
    });
    let pd = linalg::mul(&sketch, &d);
    let mut stacked = CMat::zeros(target, n2);
    stacked.rows_mut(0, k).copy_from(&slice.q);
    stacked.rows_mut(k, l).copy_from(&pd);
    // [Q̄; P D̄] = R̃ Q̃
    let (r, q) = linalg::lq_rows(&stacked);
    let mut z_ext = CMat::zeros(n1, target);
    z_ext.columns_mut(0, k).copy_from(&slice.z);
    slice.z = linalg::mul(&z_ext, &r);
    slice.q = q;
    IncreaseOutcome {
        statistic,
        threshold,
        added: l,
    }
}

/// Gap test on a non-increasing spectrum `λ`.
///
/// Returns the gap statistic `τ = (k − 1) λ̃_s / Σ_{j≠s} λ̃_j` over the quotient
/// sequence `λ̃_j = λ_j / λ_{j+1}` and, when `τ ≥ 10`, the reduced rank
/// `max(k̃, k_min)` (never above `k`), where `k̃` is the smallest count whose
/// leading values carry 95% of `Σ λ_j`.
///
/// Values are floored at `1e-15 λ_1` so exact zeros give finite quotients;
/// ties in the largest quotient resolve to the smallest index.
pub fn decrease_target(lambda: &[f64], k_min: usize) -> (f64, Option<usize>) {
    let k = lambda.len();
    if k < 3 || !(lambda[0] > 0.0) {
        return (0.0, None);
    }
    let floor = lambda[0] * 1e-15;
    let quot: Vec<f64> = lambda
        .windows(2)
        .map(|w| w[0].max(floor) / w[1].max(floor))
        .collect();
    let mut s = 0;
    for (j, &q) in quot.iter().enumerate() {
        if q > quot[s] {
            s = j;
        }
    }
    let rest: f64 = quot
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != s)
        .map(|(_, q)| q)
        .sum();
    let gap = (k - 1) as f64 * quot[s] / rest;
    if gap < DECREASE_GAP {
        return (gap, None);
    }
    let total: f64 = lambda.iter().sum();
    let mut acc = 0.0;
    let mut k_tilde = k;
    for (j, &l) in lambda.iter().enumerate() {
        acc += l;
        if acc >= ENERGY_FRACTION * total {
            k_tilde = j + 1;
            break;
        }
    }
    let new_rank = k_tilde.max(k_min).min(k);
    (gap, (new_rank < k).then_some(new_rank))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecreaseOutcome {
    pub gap: f64,
    pub old_rank: usize,
    pub new_rank: usize,
}

/// Truncates the slice to the rank chosen by [`decrease_target`] using the
/// QR of `Z̄` and the SVD of its triangular factor: `Z̄ ← Q_Z Ũ_k S̃_k`,
/// `Q̄ ← Ṽ_k^H Q̄`. The result is the best rank-`k` approximation of `Z̄Q̄`.
pub fn rank_decrease(slice: &mut SliceFactor, bounds: &RankBounds) -> DecreaseOutcome {
    let k = slice.rank();
    let (n1, _) = slice.z.shape();
    if k < 3 || n1 < k {
        return DecreaseOutcome {
            gap: 0.0,
            old_rank: k,
            new_rank: k,
        };
    }
    let (qz, rz) = linalg::thin_qr(&slice.z);
    let d = linalg::svd(&rz);
    let (gap, target) = decrease_target(&d.s, bounds.k_min);
    let Some(new_rank) = target else {
        return DecreaseOutcome {
            gap,
            old_rank: k,
            new_rank: k,
        };
    };
    let u = d.u.columns(0, new_rank).into_owned();
    slice.z = linalg::scale_columns(&linalg::mul(&qz, &u), &d.s[..new_rank]);
    slice.q = linalg::mul(&d.v_h.rows(0, new_rank).into_owned(), &slice.q);
    DecreaseOutcome {
        gap,
        old_rank: k,
        new_rank,
    }
}
