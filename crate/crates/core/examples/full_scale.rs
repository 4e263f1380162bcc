//! Full-scale synthetic recovery: `n×n×3`, tubal rank `r`, 30% observed,
//! solved by TCDLR-RE starting from `k_init = k`.
//!
//! ```text
//! cargo run --release -p tcdlr-core --example full_scale -- [n] [r] [k] [max_iters] [fixed]
//! ```
//!
//! Defaults are `n = 1000`, `r = 100`, `k = 3r/2`, `max_iters = 300`. Pass
//! `fixed` as the fifth argument to keep the rank at `k` (TCDLR) instead.

use tcdlr_core::harness::{relerr, SynthSpec};
use tcdlr_core::{solve, SolverConfig};

fn arg(i: usize, default: usize) -> usize {
    std::env::args()
        .nth(i)
        .map(|s| s.parse().expect("numeric argument"))
        .unwrap_or(default)
}

fn main() {
    let n = arg(1, 1000);
    let r = arg(2, 100);
    let k = arg(3, 3 * r / 2);
    let max_iters = arg(4, 300);
    let estimate = std::env::args().nth(5).as_deref() != Some("fixed");

    let (m, obs) = SynthSpec::square(n, r, 0.3, 0)
        .observe()
        .expect("valid instance");
    let base = if estimate {
        SolverConfig::estimating(k)
    } else {
        SolverConfig::fixed(k)
    };
    let cfg = SolverConfig { max_iters, ..base };
    let rep = solve(&obs, &cfg).expect("solve");
    println!(
        "n={n} r={r} k={k} mode={} relerr={:.3e} iterations={} converged={} ranks={:?} time={:.1}s",
        if estimate { "re" } else { "fixed" },
        relerr(&rep.recovered, &m).expect("nonzero reference"),
        rep.iterations,
        rep.converged(),
        rep.final_ranks(),
        rep.elapsed.as_secs_f64()
    );
}
