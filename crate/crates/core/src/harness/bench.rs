//! Per-iteration timing of the factored solver against full t-SVT.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gtsvt::gtsvt_full;
use crate::harness::synth::SynthSpec;
use crate::solver::{solve_tcdlr, SolverConfig};
use crate::surrogate::SurrogateSpec;
use crate::tensor::{Shape, Tensor3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchPath {
    /// One iteration of the fixed-rank factored solver at `k = rank`.
    Factored,
    /// One full-size t-SVT, the dominant cost of a nuclear-norm iteration.
    Full,
}

impl BenchPath {
    pub fn name(self) -> &'static str {
        match self {
            BenchPath::Factored => "factored",
            BenchPath::Full => "full",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub path: BenchPath,
    pub n: usize,
    pub n3: usize,
    pub rank: usize,
    pub reps: usize,
    pub per_iter: Duration,
}

pub const CSV_HEADER: &str = "path,n,n3,rank,reps,per_iter_secs";

impl BenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{:e}",
            self.path.name(),
            self.n,
            self.n3,
            self.rank,
            self.reps,
            self.per_iter.as_secs_f64()
        )
    }
}

pub fn bench_iteration(
    path: BenchPath,
    n: usize,
    n3: usize,
    rank: usize,
    reps: usize,
    seed: u64,
) -> Result<BenchRow> {
    if reps == 0 {
        return Err(Error::InvalidParameter(
            "bench needs at least one repetition".into(),
        ));
    }
    let per_iter = match path {
        BenchPath::Factored => {
            let spec = SynthSpec {
                n1: n,
                n2: n,
                n3,
                rank,
                sample_rate: 0.3,
                seed,
            };
            let (_, obs) = spec.observe()?;
            // eps small enough that the loop always runs `reps` iterations.
            let cfg = SolverConfig {
                max_iters: reps,
                eps: f64::MIN_POSITIVE,
                seed,
                ..SolverConfig::fixed(rank)
            };
            let rep = solve_tcdlr(&obs, &cfg)?;
            let mut prev = Duration::ZERO;
            rep.log
                .iter()
                .map(|r| {
                    let d = r.elapsed - prev;
                    prev = r.elapsed;
                    d
                })
                .min()
                .expect("at least one iteration")
        }
        BenchPath::Full => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y = Tensor3::from_fn(Shape::new(n, n, n3), |_, _, _| {
                StandardNormal.sample(&mut rng)
            });
            let g = SurrogateSpec::identity();
            let mut best = Duration::MAX;
            for _ in 0..reps {
                let start = Instant::now();
                gtsvt_full(&y, 1.0, &g)?;
                best = best.min(start.elapsed());
            }
            best
        }
    };
    Ok(BenchRow {
        path,
        n,
        n3,
        rank,
        reps,
        per_iter,
    })
}

pub fn bench_sizes(
    path: BenchPath,
    ns: &[usize],
    n3: usize,
    rank: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    ns.iter()
        .map(|&n| bench_iteration(path, n, n3, rank, reps, seed))
        .collect()
}

/// Least-squares slope of `log t` against `log n`.
pub fn fit_exponent(rows: &[BenchRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.per_iter.as_secs_f64().max(1e-12).ln()))
        .collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, secs: f64) -> BenchRow {
        BenchRow {
            path: BenchPath::Full,
            n,
            n3: 3,
            rank: 1,
            reps: 1,
            per_iter: Duration::from_secs_f64(secs),
        }
    }

    #[test]
    fn exponent_of_power_law() {
        let rows: Vec<BenchRow> = [10, 20, 40, 80]
            .iter()
            .map(|&n| row(n, 1e-6 * (n as f64).powi(3)))
            .collect();
        assert!((fit_exponent(&rows) - 3.0).abs() < 1e-6);
    }

    #[test]
    fn small_runs_complete() {
        let r = bench_iteration(BenchPath::Factored, 20, 3, 2, 3, 1).unwrap();
        assert_eq!(r.reps, 3);
        assert!(r.csv().starts_with("factored,20,3,2,3,"));
        bench_iteration(BenchPath::Full, 10, 3, 2, 1, 1).unwrap();
    }
}
