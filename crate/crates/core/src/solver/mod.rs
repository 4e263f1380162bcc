//! ADMM completion solvers.
//!
//! [`solve_tcdlr`] runs the dual low-rank model with a fixed per-slice rank
//! bound; [`solve_tcdlr_re`] additionally grows and shrinks each Fourier
//! slice's rank. Both keep state only for the first `⌊n3/2⌋ + 1` slices of the
//! spectrum and mirror the rest by conjugation.

pub mod rank;

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gtsvt::{threshold_slice, SliceFactor};
use crate::linalg::{self, CMat};
use crate::spectral::{fft_half, half_len, ifft_half};
use crate::surrogate::SurrogateSpec;
use crate::tensor::{Mask3, Shape, Tensor3};

pub use rank::{
    decrease_target, rank_decrease, rank_increase, residual_statistic, DecreaseOutcome,
    IncreaseOutcome, RankBounds,
};

/// Relative singular-value cutoff of the pseudo-inverse in the `B̄` update.
pub const PINV_CUTOFF: f64 = 1e-12;

/// Observed entries `P_Ω(M)` together with `Ω`.
#[derive(Clone, Debug)]
pub struct Observation {
    data: Tensor3,
    mask: Mask3,
}

impl Observation {
    /// Wraps already-projected data; fails if any unobserved entry is nonzero.
    pub fn new(data: Tensor3, mask: Mask3) -> Result<Self> {
        mask.expect_shape(&data)?;
        if data
            .as_slice()
            .iter()
            .zip(mask.as_slice())
            .any(|(&v, &m)| !m && v != 0.0)
        {
            return Err(Error::InvalidParameter(
                "observation data must be zero outside the mask".into(),
            ));
        }
        Ok(Observation { data, mask })
    }

    /// Projects a full tensor onto `mask`.
    pub fn from_full(full: &Tensor3, mask: Mask3) -> Result<Self> {
        let data = mask.project(full)?;
        Ok(Observation { data, mask })
    }

    pub fn data(&self) -> &Tensor3 {
        &self.data
    }

    pub fn mask(&self) -> &Mask3 {
        &self.mask
    }

    pub fn shape(&self) -> Shape {
        self.data.shape()
    }

    /// Fraction of observed entries.
    pub fn sample_rate(&self) -> f64 {
        self.mask.count() as f64 / self.shape().len() as f64
    }
}

/// Initial per-slice rank.
#[derive(Clone, Debug, PartialEq)]
pub enum RankInit {
    /// Same rank on every slice.
    Uniform(usize),
    /// One rank per stored slice (`⌊n3/2⌋ + 1` values).
    PerSlice(Vec<usize>),
    /// `max(1, round(f · min(n1, n2)))` on every slice.
    Fraction(f64),
}

impl RankInit {
    pub fn resolve(&self, shape: Shape) -> Result<Vec<usize>> {
        let m = half_len(shape.n3);
        let ranks = match self {
            RankInit::Uniform(k) => vec![*k; m],
            RankInit::PerSlice(v) => {
                if v.len() != m {
                    return Err(Error::InvalidParameter(format!(
                        "per-slice k_init needs {m} entries for n3 = {}, got {}",
                        shape.n3,
                        v.len()
                    )));
                }
                v.clone()
            }
            RankInit::Fraction(f) => {
                if !(*f > 0.0 && *f <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "k_init fraction {f} must lie in (0, 1]"
                    )));
                }
                let k = ((f * shape.min_side() as f64).round() as usize).max(1);
                vec![k; m]
            }
        };
        if let Some(&bad) = ranks.iter().find(|&&k| k == 0 || k > shape.min_side()) {
            return Err(Error::InvalidParameter(format!(
                "k_init = {bad} must lie in [1, min(n1, n2) = {}]",
                shape.min_side()
            )));
        }
        Ok(ranks)
    }
}

/// Solver hyperparameters. `None` bounds are derived from the problem size.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub surrogate: SurrogateSpec,
    pub rho: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub eps: f64,
    pub max_iters: usize,
    pub k_init: RankInit,
    pub k_min: usize,
    /// Defaults to `⌊min(n1, n2) / 2⌋`.
    pub k_max: Option<usize>,
    /// Rank increase step; defaults to `max(1, ⌊min(n1, n2) / 50⌋)`.
    pub step: Option<usize>,
    pub h: f64,
    /// Residual sample size; defaults to `min(1000, n1·n2)`.
    pub sample_w: Option<usize>,
    /// Power steps in the rank-increase `σ₁` estimate; 0 is the raw projection.
    pub power_steps: usize,
    /// Skip the decrease test on a slice in the iteration it grew. Augmented
    /// directions enter `Z̄` with zero singular values, so without this the
    /// gap test removes them again at once.
    pub defer_decrease: bool,
    /// Iterations during which rank increases are suppressed.
    pub warmup: usize,
    pub seed: u64,
    pub fixed_rank: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            surrogate: SurrogateSpec::default(),
            rho: 1.3,
            mu0: 1e-4,
            mu_max: 1e14,
            eps: 1e-9,
            max_iters: 300,
            k_init: RankInit::Fraction(0.05),
            k_min: 25,
            k_max: None,
            step: None,
            h: 1.0,
            sample_w: None,
            power_steps: 0,
            defer_decrease: false,
            warmup: 3,
            seed: 0,
            fixed_rank: false,
        }
    }
}

impl SolverConfig {
    pub fn fixed(k: usize) -> Self {
        SolverConfig {
            k_init: RankInit::Uniform(k),
            fixed_rank: true,
            ..Self::default()
        }
    }

    pub fn estimating(k_init: usize) -> Self {
        SolverConfig {
            k_init: RankInit::Uniform(k_init),
            fixed_rank: false,
            ..Self::default()
        }
    }

    /// Penalty `μ⁽ᵗ⁾ = min(μ̄, μ0 ρᵗ)` used in iteration `t`.
    pub fn penalty(&self, t: usize) -> f64 {
        let t = i32::try_from(t).unwrap_or(i32::MAX);
        (self.mu0 * self.rho.powi(t)).min(self.mu_max)
    }

    /// Rank bounds after filling in size-dependent defaults.
    pub fn rank_bounds(&self, shape: Shape) -> RankBounds {
        let m = shape.min_side();
        let k_max = self.k_max.unwrap_or(m / 2).min(m);
        RankBounds {
            // The default floor of 25 exceeds k_max on small problems.
            k_min: self.k_min.min(k_max),
            k_max,
            step: self.step.unwrap_or((m / 50).max(1)),
            h: self.h,
            sample_w: self.sample_w.unwrap_or(1000.min(shape.slice_len())),
            power_steps: self.power_steps,
        }
    }

    /// Checks scalar ranges and resolves `k_init` for `shape`.
    pub fn validate(&self, shape: Shape) -> Result<Vec<usize>> {
        let finite_pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} = {v} must be finite and > 0"
                )))
            }
        };
        if !(self.rho.is_finite() && self.rho > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rho = {} must be > 1",
                self.rho
            )));
        }
        finite_pos("mu0", self.mu0)?;
        finite_pos("mu_max", self.mu_max)?;
        finite_pos("eps", self.eps)?;
        if self.mu_max < self.mu0 {
            return Err(Error::InvalidParameter(format!(
                "mu_max = {} is below mu0 = {}",
                self.mu_max, self.mu0
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "max_iters must be at least 1".into(),
            ));
        }
        if !(self.h.is_finite() && self.h >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "h = {} must be finite and >= 0",
                self.h
            )));
        }
        let ranks = self.k_init.resolve(shape)?;
        if !self.fixed_rank {
            let b = self.rank_bounds(shape);
            if b.k_max == 0 {
                return Err(Error::InvalidParameter("k_max must be at least 1".into()));
            }
            if let Some(&k) = ranks.iter().find(|&&k| k > b.k_max) {
                return Err(Error::InvalidParameter(format!(
                    "k_init = {k} exceeds k_max = {}",
                    b.k_max
                )));
            }
            if b.sample_w < 2 {
                return Err(Error::InvalidParameter(
                    "sample_w must be at least 2".into(),
                ));
            }
        }
        Ok(ranks)
    }
}

/// Diagnostics of one ADMM iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    /// `‖P_Ω(M) − P − E‖_∞` after the update.
    pub primal_residual: f64,
    /// `‖P⁺ − P‖_∞`.
    pub delta_p: f64,
    /// `‖E⁺ − E‖_∞`.
    pub delta_e: f64,
    /// Penalty used in this iteration.
    pub mu: f64,
    /// `‖P_Ω(E)‖_∞`; zero by construction.
    pub e_on_omega: f64,
    /// Ranks of the stored slices at the end of the iteration.
    pub ranks: Vec<usize>,
    /// Time since the solve started.
    pub elapsed: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct SolverReport {
    /// The thresholded estimate `X` at termination.
    pub recovered: Tensor3,
    pub iterations: usize,
    pub log: Vec<IterationRecord>,
    pub termination: Termination,
    pub elapsed: Duration,
}

impl SolverReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    /// Ranks of the stored slices after the last iteration.
    pub fn final_ranks(&self) -> &[usize] {
        self.log.last().map(|r| r.ranks.as_slice()).unwrap_or(&[])
    }

    /// Ranks of all `n3` slices, mirrored.
    pub fn full_ranks(&self, n3: usize) -> Vec<usize> {
        let half = self.final_ranks();
        if half.is_empty() {
            return Vec::new();
        }
        (0..n3)
            .map(|i| half[crate::spectral::mirror_index(i, n3).min(i)])
            .collect()
    }
}

/// Dispatches on `cfg.fixed_rank`.
pub fn solve(obs: &Observation, cfg: &SolverConfig) -> Result<SolverReport> {
    run(obs, cfg)
}

/// Fixed-rank solver.
pub fn solve_tcdlr(obs: &Observation, cfg: &SolverConfig) -> Result<SolverReport> {
    let cfg = SolverConfig {
        fixed_rank: true,
        ..cfg.clone()
    };
    run(obs, &cfg)
}

/// Rank-estimating solver.
pub fn solve_tcdlr_re(obs: &Observation, cfg: &SolverConfig) -> Result<SolverReport> {
    let cfg = SolverConfig {
        fixed_rank: false,
        ..cfg.clone()
    };
    run(obs, &cfg)
}

/// Independent stream per (iteration, slice) so parallel slices stay deterministic.
fn slice_rng(seed: u64, iter: u64, slice: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((iter << 24) | slice as u64);
    rng
}

const INIT_STREAM: u64 = u64::MAX >> 24;

fn initial_factor(shape: Shape, k: usize, seed: u64, slice: usize) -> SliceFactor {
    let mut rng = slice_rng(seed, INIT_STREAM, slice);
    let g = CMat::from_fn(k, shape.n2, |_, _| {
        Complex64::new(StandardNormal.sample(&mut rng), 0.0)
    });
    let (_, q) = linalg::lq_rows(&g);
    SliceFactor {
        z: CMat::zeros(shape.n1, k),
        q,
    }
}

struct SliceStep {
    factor: SliceFactor,
    x: CMat,
    p: CMat,
}

fn slice_step(
    c: &CMat,
    prev: &SliceFactor,
    tau: f64,
    g: &SurrogateSpec,
    adjust: Option<(&RankBounds, bool, bool, &mut ChaCha8Rng)>,
) -> SliceStep {
    // Ā = C̄ Q̄^H, B̄ = Ā^† C̄, B̄ = R̄ Q̄⁺, Z̄ = Ā R̄.
    let a = linalg::mul_adj_right(c, &prev.q);
    let b = linalg::mul(&linalg::pinv(&a, PINV_CUTOFF), c);
    let (r, q) = linalg::lq_rows(&b);
    let mut factor = SliceFactor {
        z: linalg::mul(&a, &r),
        q,
    };
    let mut bounds = None;
    if let Some((bnd, allow_increase, defer, rng)) = adjust {
        let mut grew = false;
        if allow_increase {
            grew = rank_increase(&mut factor, c, bnd, rng).added > 0;
        }
        if !(grew && defer) {
            bounds = Some(bnd);
        }
    }
    let (zt, _) = threshold_slice(&factor.z, tau, g);
    let x = linalg::mul(&zt, &factor.q);
    let p = factor.product();
    if let Some(bnd) = bounds {
        rank_decrease(&mut factor, bnd);
    }
    SliceStep { factor, x, p }
}

fn run(obs: &Observation, cfg: &SolverConfig) -> Result<SolverReport> {
    let shape = obs.shape();
    if obs.mask.count() == 0 {
        return Err(Error::EmptyMask);
    }
    let ranks = cfg.validate(shape)?;
    let bounds = cfg.rank_bounds(shape);
    let start = Instant::now();

    let m = &obs.data;
    let mut factors: Vec<SliceFactor> = ranks
        .iter()
        .enumerate()
        .map(|(i, &k)| initial_factor(shape, k, cfg.seed, i))
        .collect();
    let mut x = m.clone();
    let mut p = Tensor3::zeros(shape);
    let mut e = Tensor3::zeros(shape);
    let mut y = Tensor3::zeros(shape);
    let mut log = Vec::new();
    let mut termination = Termination::MaxIterations;

    for t in 0..cfg.max_iters {
        let mu = cfg.penalty(t);
        let inv_mu = 1.0 / mu;
        let c_data: Vec<f64> = m
            .as_slice()
            .iter()
            .zip(e.as_slice())
            .zip(x.as_slice())
            .zip(y.as_slice())
            .map(|(((&mv, &ev), &xv), &yv)| 0.5 * (mv - ev + xv + yv * inv_mu))
            .collect();
        let c_hat = fft_half(&Tensor3::from_vec(shape, c_data)?);

        let allow_increase = !cfg.fixed_rank && t >= cfg.warmup;
        let steps: Vec<SliceStep> = c_hat
            .par_iter()
            .zip(factors.par_iter())
            .enumerate()
            .map(|(i, (c, prev))| {
                if cfg.fixed_rank {
                    slice_step(c, prev, inv_mu, &cfg.surrogate, None)
                } else {
                    let mut rng = slice_rng(cfg.seed, t as u64, i);
                    slice_step(
                        c,
                        prev,
                        inv_mu,
                        &cfg.surrogate,
                        Some((&bounds, allow_increase, cfg.defer_decrease, &mut rng)),
                    )
                }
            })
            .collect();

        let mut x_half = Vec::with_capacity(steps.len());
        let mut p_half = Vec::with_capacity(steps.len());
        factors.clear();
        for s in steps {
            x_half.push(s.x);
            p_half.push(s.p);
            factors.push(s.factor);
        }
        let x_new = ifft_half(shape, x_half)?;
        let p_new = ifft_half(shape, p_half)?;

        // E = P_Ωᶜ(−P + Y/μ); the P_Ω(M) term vanishes off Ω.
        let mut e_new = Tensor3::zeros(shape);
        let mut primal: f64 = 0.0;
        let mut delta_e: f64 = 0.0;
        let mut e_on_omega: f64 = 0.0;
        {
            let ed = e_new.as_mut_slice();
            let yd = y.as_mut_slice();
            for (idx, &observed) in obs.mask.as_slice().iter().enumerate() {
                let pv = p_new.as_slice()[idx];
                if !observed {
                    ed[idx] = -pv + yd[idx] * inv_mu;
                } else {
                    e_on_omega = e_on_omega.max(ed[idx].abs());
                }
                let r = m.as_slice()[idx] - pv - ed[idx];
                primal = primal.max(r.abs());
                delta_e = delta_e.max((ed[idx] - e.as_slice()[idx]).abs());
                yd[idx] += mu * r;
            }
        }
        let delta_p = p_new.max_abs_diff(&p)?;

        log.push(IterationRecord {
            primal_residual: primal,
            delta_p,
            delta_e,
            mu,
            e_on_omega,
            ranks: factors.iter().map(SliceFactor::rank).collect(),
            elapsed: start.elapsed(),
        });

        x = x_new;
        p = p_new;
        e = e_new;

        if primal < cfg.eps && delta_p < cfg.eps && delta_e < cfg.eps {
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
