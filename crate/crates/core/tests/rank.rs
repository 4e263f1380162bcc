mod common;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tcdlr_core::linalg::{self, CMat};
use tcdlr_core::solver::residual_statistic;

use common::*;

fn unit(v: CMat) -> CMat {
    let n = linalg::frobenius(&v);
    v.map(|z| z / n)
}

/// Rank-1 spike of magnitude `100·√(n1 n2)` over unit complex noise fires the
/// increase test for at least 99% of probes. The projection estimate scales
/// like `|p^T u| σ₁` with `|p^T u|²` roughly exponential, so the dimensions
/// must be large enough that `σ₁` clears the threshold by a factor near 10.
#[test]
fn planted_spike_triggers_increase() {
    let (n1, n2) = (1000, 1000);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let u = unit(gauss_cmat(n1, 1, &mut rng));
    let v = unit(gauss_cmat(n2, 1, &mut rng));
    let scale = 100.0 * ((n1 * n2) as f64).sqrt();
    let spike = linalg::mul_adj_right(&u, &v).map(|z| z * Complex64::new(scale, 0.0));
    let d = spike + gauss_cmat(n1, n2, &mut rng);
    let threshold = (n1 as f64).sqrt() + (n2 as f64).sqrt() + 1.0;
    let fired = (0..200u64)
        .filter(|&s| {
            let mut probe = ChaCha8Rng::seed_from_u64(s);
            residual_statistic(&d, 1000, 0, &mut probe) > threshold
        })
        .count();
    assert!(fired >= 198, "fired on {fired}/200 probes");
}

#[test]
fn zero_residual_gives_zero_statistic() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = CMat::zeros(30, 20);
    assert_eq!(residual_statistic(&d, 600, 0, &mut rng), 0.0);
}
