//! Phase-transition sweep over rank fraction and sampling rate.

use std::io::Write;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::harness::metrics::relerr;
use crate::harness::synth::SynthSpec;
use crate::solver::{solve, RankInit, SolverConfig};

/// Mean relerr at or below this counts as a successful recovery.
pub const SUCCESS_RELERR: f64 = 1e-2;

pub const CSV_HEADER: &str = "rank_fraction,sample_rate,mean_relerr,success_count,mean_time";

#[derive(Clone, Debug)]
pub struct PhaseSpec {
    pub n: usize,
    pub n3: usize,
    pub rank_fractions: Vec<f64>,
    pub sample_rates: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// `k_init` is this multiple of the planted rank, capped by `k_max`.
    pub k_init_factor: f64,
    pub solver: SolverConfig,
}

impl PhaseSpec {
    pub fn new(n: usize, rank_fractions: Vec<f64>, sample_rates: Vec<f64>, trials: usize) -> Self {
        PhaseSpec {
            n,
            n3: 3,
            rank_fractions,
            sample_rates,
            trials,
            seed: 0,
            k_init_factor: 1.5,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseCell {
    pub rank_fraction: f64,
    pub rank: usize,
    pub sample_rate: f64,
    pub mean_relerr: f64,
    /// Trials whose own relerr met the success level.
    pub success_count: usize,
    pub trials: usize,
    pub mean_time: f64,
}

impl PhaseCell {
    pub fn success(&self) -> bool {
        self.mean_relerr <= SUCCESS_RELERR
    }
}

/// Runs `trials` seeded instances per grid cell. Trial `t` uses data seed
/// `seed + t` in every cell, so columns share their ground truth.
pub fn phase_sweep(spec: &PhaseSpec) -> Result<Vec<PhaseCell>> {
    if spec.rank_fractions.is_empty() || spec.sample_rates.is_empty() || spec.trials == 0 {
        return Err(Error::InvalidParameter(
            "phase grids and trial count must be nonempty".into(),
        ));
    }
    let mut cells = Vec::new();
    for &f in &spec.rank_fractions {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rank fraction {f} must lie in (0, 1]"
            )));
        }
        let rank = ((f * spec.n as f64).round() as usize).clamp(1, spec.n);
        for &c in &spec.sample_rates {
            let mut sum_err = 0.0;
            let mut sum_time = 0.0;
            let mut successes = 0;
            for t in 0..spec.trials {
                let synth = SynthSpec {
                    n1: spec.n,
                    n2: spec.n,
                    n3: spec.n3,
                    rank,
                    sample_rate: c,
                    seed: spec.seed.wrapping_add(t as u64),
                };
                let (m, obs) = synth.observe()?;
                let mut cfg = spec.solver.clone();
                let k_max = cfg.rank_bounds(synth.shape()).k_max.max(1);
                let k = ((spec.k_init_factor * rank as f64).ceil() as usize).clamp(1, k_max);
                cfg.k_init = RankInit::Uniform(k);
                cfg.seed = synth.seed;
                let start = Instant::now();
                let rep = solve(&obs, &cfg)?;
                sum_time += start.elapsed().as_secs_f64();
                let e = relerr(&rep.recovered, &m)?;
                if e <= SUCCESS_RELERR {
                    successes += 1;
                }
                sum_err += e;
            }
            cells.push(PhaseCell {
                rank_fraction: f,
                rank,
                sample_rate: c,
                mean_relerr: sum_err / spec.trials as f64,
                success_count: successes,
                trials: spec.trials,
                mean_time: sum_time / spec.trials as f64,
            });
        }
    }
    Ok(cells)
}

pub fn write_phase_csv<W: Write>(w: &mut W, cells: &[PhaseCell]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for c in cells {
        writeln!(
            w,
            "{},{},{:e},{},{}",
            c.rank_fraction, c.sample_rate, c.mean_relerr, c.success_count, c.mean_time
        )?;
    }
    Ok(())
}
