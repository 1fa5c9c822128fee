//! `purikit` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 non-convergence or guess
//! failure, 3 verification failure, 4 I/O or parse error. The last line
//! on stdout is always a `RESULT` line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use purikit::bench::{convergence_profile, gap_scan, gapscan_csv, profile_csv, run_sweep, sweep_csv};
use purikit::mtx::save_matrix_with_comments;
use purikit::{
    generate_hamiltonian, load_matrix, run_purification, verify, Basis, GuessConfig, GuessKind, HamiltonianSpec,
    GapFit, Method, PurifierConfig, RunResult, Subspace, SweepConfig, SweepResult,
};

#[derive(Parser, Debug)]
#[command(name = "purikit", version, about = "Trace-conserving density matrix purification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random gapped Hamiltonian in Matrix Market format.
    Gen(GenArgs),
    /// Purify a Hamiltonian into a density matrix.
    Purify(PurifyArgs),
    /// Check that a density matrix is an idempotent rank-N projector.
    Verify(VerifyArgs),
    /// Iteration-count sweep over occupation and gap.
    Sweep(BenchArgs),
    /// Gap scan with a logarithmic fit of the mean iteration count.
    Gapscan(BenchArgs),
    /// Per-iterate convergence profile.
    Profile(BenchArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value_t = 100)]
    m: usize,
    /// Number of occupied states.
    #[arg(long)]
    n: usize,
    /// HOMO-LUMO gap.
    #[arg(long, default_value_t = 1.0)]
    gap: f64,
    #[arg(long, env = "PURIKIT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = BasisArg::Diagonal)]
    basis: BasisArg,
    #[arg(long, default_value_t = -2.5, allow_hyphen_values = true)]
    range_low: f64,
    #[arg(long, default_value_t = 2.5)]
    range_high: f64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct PurifyArgs {
    /// Hamiltonian in Matrix Market format.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Hpcp)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = SubspaceArg::Particle)]
    subspace: SubspaceArg,
    #[arg(long, value_enum, default_value_t = GuessArg::Pmcp)]
    guess: GuessArg,
    /// Mixing weight for `--guess mixed`.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Target shrink factor for `--guess mixed-opt`.
    #[arg(long, default_value_t = 2.0 / 3.0)]
    delta: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Write per-iterate diagnostics as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Print per-iterate diagnostics to stdout.
    #[arg(long)]
    curves: bool,
    /// Output density matrix.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Density matrix in Matrix Market format.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    n: usize,
    /// Also compare with the ground-state projector of this Hamiltonian.
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// `key=value` configuration file.
    #[arg(long)]
    config: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Worker threads; overrides the config file.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BasisArg {
    Diagonal,
    Orthogonal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Mcweeny,
    Pmcp,
    Hpcp,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SubspaceArg {
    Particle,
    Hole,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GuessArg {
    Pmcp,
    Hole,
    Mixed,
    MixedOpt,
}

struct Outcome {
    code: u8,
    status: String,
    p: Option<usize>,
    idem_err: Option<f64>,
    energy: Option<f64>,
}

impl Outcome {
    fn status(code: u8, status: &str) -> Self {
        Self {
            code,
            status: status.to_string(),
            p: None,
            idem_err: None,
            energy: None,
        }
    }

    fn result_line(&self) -> String {
        let na = || "na".to_string();
        format!(
            "RESULT status={} p={} idem_err={} energy={}",
            self.status,
            self.p.map_or_else(na, |p| p.to_string()),
            self.idem_err.map_or_else(na, |x| format!("{x:.6e}")),
            self.energy.map_or_else(na, |x| format!("{x:.12e}")),
        )
    }
}

fn io_error(context: &str, e: impl std::fmt::Display) -> Outcome {
    eprintln!("error: {context}: {e}");
    Outcome::status(4, "io_error")
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn load(path: &Path) -> Result<purikit::SymMatrix, Outcome> {
    load_matrix(path).map_err(|e| io_error(&path.display().to_string(), e))
}

fn cmd_gen(a: GenArgs) -> Outcome {
    let spec = HamiltonianSpec {
        m: a.m,
        n_occ: a.n,
        gap: a.gap,
        range_low: a.range_low,
        range_high: a.range_high,
        seed: a.seed,
        basis: match a.basis {
            BasisArg::Diagonal => Basis::Diagonal,
            BasisArg::Orthogonal => Basis::RandomOrthogonal,
        },
    };
    let h = match generate_hamiltonian(&spec) {
        Ok(h) => h,
        Err(e) => {
            eprintln!("error: {e}");
            return Outcome::status(1, "usage_error");
        }
    };
    let comments: Vec<String> = spec.to_kv().lines().map(str::to_string).collect();
    if let Err(e) = save_matrix_with_comments(&h, &comments, &a.output) {
        return io_error(&a.output.display().to_string(), e);
    }
    println!("wrote {} ({}x{}, n_occ={}, gap={:e})", a.output.display(), a.m, a.m, a.n, a.gap);
    Outcome::status(0, "ok")
}

fn trace_csv(run: &RunResult) -> String {
    let opt = |x: Option<f64>| x.map_or_else(|| "nan".to_string(), |v| format!("{v:.16e}"));
    let mut out = String::from("n,trace_d,idem_err,energy,c,gamma,d,omega,lagrangian,grad_norm\n");
    for r in &run.records {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{},{},{},{},{},{}",
            r.n,
            r.trace_d,
            r.idempotency_error,
            r.energy,
            opt(r.c),
            opt(r.gamma),
            opt(r.d),
            opt(r.omega),
            opt(r.lagrangian),
            opt(r.grad_norm)
        )
        .unwrap();
    }
    out
}

fn cmd_purify(a: PurifyArgs) -> Outcome {
    let h = match load(&a.input) {
        Ok(h) => h,
        Err(o) => return o,
    };
    let guess = GuessConfig {
        kind: match a.guess {
            GuessArg::Pmcp => GuessKind::ParticlePmcp,
            GuessArg::Hole => GuessKind::HolePmcp,
            GuessArg::Mixed => GuessKind::MixedFixedAlpha,
            GuessArg::MixedOpt => GuessKind::MixedOptimizedAlpha,
        },
        alpha: a.alpha,
        delta: a.delta,
        ..GuessConfig::default()
    };
    let purifier = PurifierConfig {
        method: match a.method {
            MethodArg::Mcweeny => Method::McWeeny,
            MethodArg::Pmcp => Method::Pmcp,
            MethodArg::Hpcp => Method::Hpcp,
        },
        subspace: match a.subspace {
            SubspaceArg::Particle => Subspace::Particle,
            SubspaceArg::Hole => Subspace::Hole,
        },
        tol: a.tol,
        max_iter: a.max_iter,
        ..PurifierConfig::default()
    };
    let run = match run_purification(&h, a.n, &guess, &purifier) {
        Ok(r) => r,
        Err(e @ purikit::PurifyError::InvalidConfig(_)) => {
            eprintln!("error: {e}");
            return Outcome::status(1, "usage_error");
        }
        Err(e) => {
            eprintln!("error: {e}");
            return Outcome::status(2, "guess_error");
        }
    };
    if let Some(fb) = &run.guess.alpha_fallback {
        eprintln!("warning: alpha search fell back to alpha={}: {}", fb.alpha, fb.reason);
    }
    if a.curves {
        for r in &run.records {
            let c = r.c.map_or_else(|| "na".to_string(), |c| format!("{c:.6}"));
            println!(
                "iter n={} trace={:.12} idem_err={:.6e} energy={:.12} c={c}",
                r.n, r.trace_d, r.idempotency_error, r.energy
            );
        }
    }
    if let Some(path) = &a.trace {
        if let Err(e) = fs::write(path, trace_csv(&run)) {
            return io_error(&path.display().to_string(), e);
        }
    }
    if let Some(path) = &a.output {
        let comments = vec![
            format!("method={}", purifier.method.name()),
            format!("n_occ={}", a.n),
            format!("iterations={}", run.iterations),
        ];
        if let Err(e) = save_matrix_with_comments(&run.final_d, &comments, path) {
            return io_error(&path.display().to_string(), e);
        }
    }
    let energy = run.records.last().map(|r| r.energy);
    let (code, status) = if run.converged {
        (0, "converged".to_string())
    } else {
        (2, run.failure_reason.map_or("failed", |f| f.name()).to_string())
    };
    Outcome {
        code,
        status,
        p: Some(run.iterations),
        idem_err: Some(run.final_idempotency_error()),
        energy,
    }
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    let d = match load(&a.input) {
        Ok(d) => d,
        Err(o) => return o,
    };
    let h = match a.hamiltonian.as_deref().map(load).transpose() {
        Ok(h) => h,
        Err(o) => return o,
    };
    if h.as_ref().is_some_and(|h| h.order() != d.order()) {
        eprintln!("error: Hamiltonian and density matrix orders differ");
        return Outcome::status(4, "io_error");
    }
    let report = match verify(&d, a.n, h.as_ref()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return Outcome::status(3, "fail");
        }
    };
    println!("norm_trace_gap={:.6e}", report.norm_trace_gap);
    println!("norm_occupancy_gap={:.6e}", report.norm_occupancy_gap);
    println!("norm_occupancy_gap_literal={:.6e}", report.norm_occupancy_gap_literal);
    println!("spectrum_gap={:.6e}", report.spectrum_gap);
    if let Some(x) = report.oracle_projector_distance {
        println!("oracle_projector_distance={x:.6e}");
    }
    if let Some(x) = report.oracle_energy_gap {
        println!("oracle_energy_gap={x:.6e}");
    }
    Outcome {
        code: if report.passed { 0 } else { 3 },
        status: if report.passed { "pass" } else { "fail" }.to_string(),
        p: None,
        idem_err: Some(purikit::lagrangian::idempotency_error(&d)),
        energy: h.as_ref().map(|h| purikit::linalg::trace_of_product(h, &d)),
    }
}

#[derive(Clone, Copy)]
enum BenchKind {
    Sweep,
    Gapscan,
    Profile,
}

fn gapscan_all(cfg: &SweepConfig) -> Result<(SweepResult, Vec<GapFit>), purikit::BenchError> {
    let mut cells = Vec::new();
    let mut fits = Vec::new();
    for &theta in &cfg.thetas {
        let (r, f) = gap_scan(theta, &cfg.gaps, cfg)?;
        cells.extend(r.cells);
        fits.extend(f);
    }
    Ok((SweepResult { cells }, fits))
}

fn cmd_bench(a: BenchArgs, kind: BenchKind) -> Outcome {
    let text = match fs::read_to_string(&a.config) {
        Ok(t) => t,
        Err(e) => return io_error(&a.config.display().to_string(), e),
    };
    let mut cfg = match SweepConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return io_error(&a.config.display().to_string(), e),
    };
    if let Some(jobs) = a.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return Outcome::status(1, "usage_error");
        }
        cfg.parallelism = jobs;
    }
    let ts = Some(timestamp());
    let produced = match kind {
        BenchKind::Sweep => run_sweep(&cfg).map(|r| {
            let failed: usize = r.cells.iter().map(|c| c.n_fail).sum();
            (sweep_csv(&r, &cfg, ts), failed)
        }),
        BenchKind::Gapscan => gapscan_all(&cfg).map(|(r, fits)| {
            for f in &fits {
                match &f.fit {
                    Ok(l) => println!(
                        "fit theta={} method={} slope={:.4} intercept={:.4} r2={:.4}",
                        f.theta, f.method, l.slope, l.intercept, l.r_squared
                    ),
                    Err(e) => println!("fit theta={} method={} error={e}", f.theta, f.method),
                }
            }
            let failed: usize = r.cells.iter().map(|c| c.n_fail).sum();
            (gapscan_csv(&fits, &cfg, ts), failed)
        }),
        BenchKind::Profile => convergence_profile(&cfg).map(|rows| (profile_csv(&rows, &cfg, ts), 0)),
    };
    let (csv, failed) = match produced {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return Outcome::status(2, "failed");
        }
    };
    if let Err(e) = fs::write(&a.output, csv) {
        return io_error(&a.output.display().to_string(), e);
    }
    println!("wrote {} ({failed} failed runs)", a.output.display());
    Outcome::status(0, "ok")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                println!("{}", Outcome::status(1, "usage_error").result_line());
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Purify(a) => cmd_purify(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Sweep(a) => cmd_bench(a, BenchKind::Sweep),
        Command::Gapscan(a) => cmd_bench(a, BenchKind::Gapscan),
        Command::Profile(a) => cmd_bench(a, BenchKind::Profile),
    };
    println!("{}", outcome.result_line());
    ExitCode::from(outcome.code)
}
