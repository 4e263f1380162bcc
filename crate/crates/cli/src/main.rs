use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tcdlr_core::harness::{
    self, bench, fit_exponent, load_mask, load_png, load_tensor, phase_sweep, psnr, sample_uniform,
    save_png, save_tensor, write_phase_csv, BenchPath, Metrics, PhaseSpec, SynthSpec,
};
use tcdlr_core::reference::solve_tnn;
use tcdlr_core::{
    solve, Error, Observation, RankInit, SolverConfig, SolverReport, SurrogateKind, SurrogateSpec,
    Tensor3,
};

const EXIT_FAILURE: u8 = 1;
const EXIT_FORMAT: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "tcdlr",
    version,
    about = "Low-rank tensor completion experiments"
)]
struct Cli {
    /// Worker threads for per-slice parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random low-rank tensor, sample it, complete it and report.
    Synth(SynthArgs),
    /// Complete an observed tensor given as TNS3 data plus an MSK3 mask.
    Complete(CompleteArgs),
    /// Sweep rank fraction against sample rate and write a CSV grid.
    Phase(PhaseArgs),
    /// Sample a PNG image, complete it and report PSNR.
    Image(ImageArgs),
    /// Time one solver iteration across sizes.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value = "lp")]
    surrogate: SurrogateKind,
    #[arg(long, default_value_t = tcdlr_core::surrogate::DEFAULT_P)]
    p: f64,
    #[arg(long, default_value_t = tcdlr_core::surrogate::DEFAULT_GAMMA)]
    gamma: f64,
    /// Initial per-slice rank (default: 5% of min(n1, n2)).
    #[arg(long)]
    k_init: Option<usize>,
    #[arg(long, default_value_t = 25)]
    k_min: usize,
    /// Default: min(n1, n2) / 2.
    #[arg(long)]
    k_max: Option<usize>,
    /// Keep the rank at --k-init (TCDLR) instead of estimating it.
    #[arg(long)]
    fixed_rank: bool,
    #[arg(long, default_value_t = 1.3)]
    rho: f64,
    #[arg(long, default_value_t = 1e-4)]
    mu0: f64,
    #[arg(long, default_value_t = 1e14)]
    mu_max: f64,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    #[arg(long, default_value_t = 300)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run the tensor nuclear norm baseline instead.
    #[arg(long)]
    tnn: bool,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig, Error> {
        let base = SolverConfig::default();
        Ok(SolverConfig {
            surrogate: SurrogateSpec::new(self.surrogate, self.p, self.gamma)?,
            rho: self.rho,
            mu0: self.mu0,
            mu_max: self.mu_max,
            eps: self.eps,
            max_iters: self.max_iters,
            k_init: self.k_init.map_or(base.k_init.clone(), RankInit::Uniform),
            k_min: self.k_min,
            k_max: self.k_max,
            seed: self.seed,
            fixed_rank: self.fixed_rank,
            ..base
        })
    }

    fn echo(&self) -> String {
        let opt = |v: Option<usize>| v.map_or("auto".to_string(), |v| v.to_string());
        format!(
            "solver={} surrogate={} p={} gamma={} k_init={} k_min={} k_max={} fixed_rank={} \
             rho={} mu0={:e} mu_max={:e} eps={:e} max_iters={} seed={}",
            if self.tnn { "tnn" } else { "tcdlr" },
            self.surrogate,
            self.p,
            self.gamma,
            opt(self.k_init),
            self.k_min,
            opt(self.k_max),
            self.fixed_rank,
            self.rho,
            self.mu0,
            self.mu_max,
            self.eps,
            self.max_iters,
            self.seed
        )
    }

    fn run(&self, obs: &Observation) -> Result<SolverReport, Error> {
        let cfg = self.config()?;
        if self.tnn {
            solve_tnn(obs, &cfg)
        } else {
            solve(obs, &cfg)
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Second dimension (default: --n).
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long, default_value_t = 3)]
    n3: usize,
    #[arg(long, default_value_t = 20)]
    rank: usize,
    #[arg(long, default_value_t = 0.3)]
    sample_rate: f64,
    /// Write the recovered tensor as TNS3.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct CompleteArgs {
    /// Observed tensor (TNS3); unobserved entries are ignored.
    #[arg(long)]
    tensor: PathBuf,
    /// Observation mask (MSK3).
    #[arg(long)]
    mask: PathBuf,
    /// Ground truth (TNS3) for error metrics.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct PhaseArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    n3: usize,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.05,0.1,0.2,0.3,0.4,0.5"
    )]
    rank_fractions: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.05,0.1,0.2,0.3,0.5,0.7,1.0"
    )]
    sample_rates: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Initial rank as a multiple of the planted rank.
    #[arg(long, default_value_t = 1.5)]
    k_init_factor: f64,
    /// CSV output (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct ImageArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.3)]
    sample_rate: f64,
    /// Recovered image (PNG).
    #[arg(long)]
    out: PathBuf,
    /// Also write the sampled image with unobserved pixels set to zero.
    #[arg(long)]
    observed: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Factored,
    Full,
    Both,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "both")]
    path: PathArg,
    #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    n3: usize,
    #[arg(long, default_value_t = 20)]
    rank: usize,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    }
    let result = match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Complete(a) => complete(a),
        Command::Phase(a) => phase(a),
        Command::Image(a) => image(a),
        Command::Bench(a) => bench_cmd(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Format(_) | Error::Image(_) => EXIT_FORMAT,
                _ => EXIT_FAILURE,
            })
        }
    }
}

fn outcome(rep: &SolverReport) -> u8 {
    if rep.converged() {
        0
    } else {
        eprintln!(
            "warning: no convergence within {} iterations",
            rep.iterations
        );
        EXIT_NOT_CONVERGED
    }
}

fn print_report(rep: &SolverReport, truth: Option<&Tensor3>) -> Result<(), Error> {
    match truth {
        Some(m) => {
            let metrics = Metrics::evaluate(&rep.recovered, m, rep.elapsed, rep.iterations)?;
            println!("{metrics} converged={}", rep.converged());
        }
        None => println!(
            "time={:.3} iterations={} converged={}",
            rep.elapsed.as_secs_f64(),
            rep.iterations,
            rep.converged()
        ),
    }
    let ranks: Vec<String> = rep.final_ranks().iter().map(|r| r.to_string()).collect();
    println!("ranks={}", ranks.join(","));
    Ok(())
}

fn synth(a: &SynthArgs) -> Result<u8, Error> {
    let spec = SynthSpec {
        n1: a.n,
        n2: a.n2.unwrap_or(a.n),
        n3: a.n3,
        rank: a.rank,
        sample_rate: a.sample_rate,
        seed: a.solver.seed,
    };
    println!(
        "command=synth n1={} n2={} n3={} rank={} sample_rate={} {}",
        spec.n1,
        spec.n2,
        spec.n3,
        spec.rank,
        spec.sample_rate,
        a.solver.echo()
    );
    let (m, obs) = spec.observe()?;
    let rep = a.solver.run(&obs)?;
    if let Some(out) = &a.out {
        save_tensor(out, &rep.recovered)?;
    }
    print_report(&rep, Some(&m))?;
    Ok(outcome(&rep))
}

fn complete(a: &CompleteArgs) -> Result<u8, Error> {
    println!(
        "command=complete tensor={} mask={} {}",
        a.tensor.display(),
        a.mask.display(),
        a.solver.echo()
    );
    let data = load_tensor(&a.tensor)?;
    let mask = load_mask(&a.mask)?;
    let truth = a.truth.as_ref().map(load_tensor).transpose()?;
    let obs = Observation::from_full(&data, mask)?;
    let rep = a.solver.run(&obs)?;
    save_tensor(&a.out, &rep.recovered)?;
    print_report(&rep, truth.as_ref())?;
    Ok(outcome(&rep))
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn phase(a: &PhaseArgs) -> Result<u8, Error> {
    let spec = PhaseSpec {
        n3: a.n3,
        seed: a.solver.seed,
        k_init_factor: a.k_init_factor,
        solver: a.solver.config()?,
        ..PhaseSpec::new(
            a.n,
            a.rank_fractions.clone(),
            a.sample_rates.clone(),
            a.trials,
        )
    };
    eprintln!(
        "command=phase n={} n3={} trials={} k_init_factor={} {}",
        a.n,
        a.n3,
        a.trials,
        a.k_init_factor,
        a.solver.echo()
    );
    let cells = phase_sweep(&spec)?;
    let mut w = output(a.out.as_ref())?;
    write_phase_csv(&mut w, &cells)?;
    w.flush()?;
    Ok(0)
}

fn image(a: &ImageArgs) -> Result<u8, Error> {
    println!(
        "command=image input={} sample_rate={} {}",
        a.input.display(),
        a.sample_rate,
        a.solver.echo()
    );
    let m = load_png(&a.input)?;
    let obs = sample_uniform(&m, a.sample_rate, harness::synth::mask_seed(a.solver.seed))?;
    if let Some(path) = &a.observed {
        save_png(path, obs.data())?;
    }
    let rep = a.solver.run(&obs)?;
    save_png(&a.out, &rep.recovered)?;
    let clamped = rep.recovered.map(|v| v.clamp(0.0, 1.0));
    println!(
        "psnr_clamped={:.4} converged={}",
        psnr(&clamped, &m)?,
        rep.converged()
    );
    print_report(&rep, Some(&m))?;
    Ok(outcome(&rep))
}

fn bench_cmd(a: &BenchArgs) -> Result<u8, Error> {
    let paths: &[BenchPath] = match a.path {
        PathArg::Factored => &[BenchPath::Factored],
        PathArg::Full => &[BenchPath::Full],
        PathArg::Both => &[BenchPath::Factored, BenchPath::Full],
    };
    eprintln!(
        "command=bench n3={} rank={} reps={} seed={}",
        a.n3, a.rank, a.reps, a.seed
    );
    let mut w = output(a.out.as_ref())?;
    writeln!(w, "{}", bench::CSV_HEADER)?;
    for &path in paths {
        let start = Instant::now();
        let rows = harness::bench_sizes(path, &a.sizes, a.n3, a.rank, a.reps, a.seed)?;
        for row in &rows {
            writeln!(w, "{}", row.csv())?;
        }
        if rows.len() >= 2 {
            eprintln!(
                "path={} exponent={:.3} total={:.3}s",
                path.name(),
                fit_exponent(&rows),
                start.elapsed().as_secs_f64()
            );
        }
    }
    w.flush()?;
    Ok(0)
}
