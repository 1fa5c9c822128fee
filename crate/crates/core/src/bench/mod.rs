//! Benchmark harness: iteration-count sweeps over occupation factor and
//! HOMO-LUMO gap, gap scans with a logarithmic fit, and per-iterate
//! convergence profiles.

mod config;
mod csv;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use config::{MethodVariant, SweepConfig, VariantDefaults};
pub use csv::{gapscan_csv, profile_csv, sweep_csv};

use crate::error::{BenchError, ConfigError};
use crate::hamgen::{generate_hamiltonian, HamiltonianSpec};
use crate::linalg::SymMatrix;
use crate::purify::{run_purification, RunResult};
use crate::verify::ground_state_oracle;

/// Welford accumulator. `std_dev` is the sample (`n - 1`) deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningStats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.mean)
    }

    pub fn std_dev(&self) -> Option<f64> {
        match self.count {
            0 => None,
            1 => Some(0.0),
            n => Some((self.m2 / (n - 1) as f64).sqrt()),
        }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.push(x);
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit, BenchError> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return Err(BenchError::TooFewPoints(n));
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(BenchError::TooFewPoints(1));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: n,
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sample `k` in cell `(theta_index, gap_index)`. All methods of a
/// cell see the same Hamiltonians.
pub fn sample_seed(base_seed: u64, theta_index: usize, gap_index: usize, k: usize) -> u64 {
    let h = splitmix64(splitmix64(splitmix64(theta_index as u64) ^ gap_index as u64) ^ k as u64);
    base_seed ^ h
}

/// Hamiltonian spec of sample `k` in cell `(theta_index, gap_index)`.
pub fn sample_spec(cfg: &SweepConfig, theta_index: usize, gap_index: usize, k: usize) -> HamiltonianSpec {
    HamiltonianSpec {
        m: cfg.m,
        n_occ: cfg.n_occ(cfg.thetas[theta_index]),
        gap: cfg.gaps[gap_index],
        range_low: cfg.range_low,
        range_high: cfg.range_high,
        seed: sample_seed(cfg.base_seed, theta_index, gap_index, k),
        basis: cfg.basis,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub theta: f64,
    pub gap: f64,
    pub method: String,
    /// Mean iteration count over converged samples.
    pub p_mean: Option<f64>,
    pub p_std: Option<f64>,
    pub n_conv: usize,
    pub n_fail: usize,
    /// Failure counts keyed by reason name.
    pub failures: BTreeMap<String, usize>,
    /// Per-sample iteration count, `None` where the run failed.
    pub iterations: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    /// Ordered by θ, then gap, then method.
    pub cells: Vec<CellResult>,
}

impl SweepResult {
    pub fn cell(&self, theta: f64, gap: f64, method: &str) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.theta == theta && c.gap == gap && c.method == method)
    }
}

enum Outcome {
    Converged(usize),
    Failed(&'static str),
}

fn outcome(run: Result<RunResult, crate::error::PurifyError>) -> Outcome {
    match run {
        Ok(r) if r.converged => Outcome::Converged(r.iterations),
        Ok(r) => Outcome::Failed(r.failure_reason.map_or("unknown", |f| f.name())),
        Err(_) => Outcome::Failed("guess_error"),
    }
}

fn thread_pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool")
}

/// Runs every method on `samples` Hamiltonians per (θ, gap) cell.
/// Results do not depend on `cfg.parallelism`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult, BenchError> {
    cfg.validate()?;
    let (nt, ng, ns) = (cfg.thetas.len(), cfg.gaps.len(), cfg.samples);
    let tasks: Vec<(usize, usize, usize)> = (0..nt)
        .flat_map(|t| (0..ng).flat_map(move |g| (0..ns).map(move |k| (t, g, k))))
        .collect();

    let sample_outcomes: Vec<Result<Vec<Outcome>, BenchError>> = thread_pool(cfg.parallelism).install(|| {
        tasks
            .par_iter()
            .map(|&(t, g, k)| {
                let spec = sample_spec(cfg, t, g, k);
                let h = generate_hamiltonian(&spec)?;
                Ok(cfg
                    .methods
                    .iter()
                    .map(|v| outcome(run_purification(&h, spec.n_occ, &v.guess, &v.purifier)))
                    .collect())
            })
            .collect()
    });

    let mut cells = Vec::with_capacity(nt * ng * cfg.methods.len());
    let mut it = sample_outcomes.into_iter();
    for &theta in &cfg.thetas {
        for &gap in &cfg.gaps {
            let mut per_method: Vec<Vec<Outcome>> = cfg.methods.iter().map(|_| Vec::new()).collect();
            for _ in 0..ns {
                for (slot, o) in per_method.iter_mut().zip(it.next().expect("one entry per task")?) {
                    slot.push(o);
                }
            }
            for (variant, outcomes) in cfg.methods.iter().zip(per_method) {
                let mut stats = RunningStats::default();
                let mut failures = BTreeMap::new();
                let iterations = outcomes
                    .iter()
                    .map(|o| match o {
                        Outcome::Converged(p) => {
                            stats.push(*p as f64);
                            Some(*p)
                        }
                        Outcome::Failed(reason) => {
                            *failures.entry(reason.to_string()).or_insert(0) += 1;
                            None
                        }
                    })
                    .collect();
                cells.push(CellResult {
                    theta,
                    gap,
                    method: variant.label.clone(),
                    p_mean: stats.mean(),
                    p_std: stats.std_dev(),
                    n_conv: stats.count(),
                    n_fail: ns - stats.count(),
                    failures,
                    iterations,
                });
            }
        }
    }
    Ok(SweepResult { cells })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapFit {
    pub theta: f64,
    pub method: String,
    /// Fit of mean iteration count against `ln(1/Δε)`.
    pub fit: Result<LinearFit, BenchError>,
}

/// Least-squares fit of `p̄` against `ln(1/Δε)` for each (θ, method) of a
/// sweep, using cells with at least one converged sample.
pub fn gap_fits(result: &SweepResult, cfg: &SweepConfig) -> Vec<GapFit> {
    let mut fits = Vec::new();
    for &theta in &cfg.thetas {
        for v in &cfg.methods {
            let (xs, ys): (Vec<f64>, Vec<f64>) = result
                .cells
                .iter()
                .filter(|c| c.theta == theta && c.method == v.label)
                .filter_map(|c| c.p_mean.map(|p| ((1.0 / c.gap).ln(), p)))
                .unzip();
            fits.push(GapFit {
                theta,
                method: v.label.clone(),
                fit: linear_fit(&xs, &ys),
            });
        }
    }
    fits
}

/// Sweep of `cfg`'s methods at a single `theta` over `gaps` followed by
/// [`gap_fits`]. The gaps must number at least three and span at least two
/// decades.
pub fn gap_scan(theta: f64, gaps: &[f64], cfg: &SweepConfig) -> Result<(SweepResult, Vec<GapFit>), BenchError> {
    let (lo, hi) = gaps
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &g| (lo.min(g), hi.max(g)));
    if gaps.len() < 3 || !(hi / lo >= 100.0 * (1.0 - 1e-12)) {
        return Err(ConfigError::Invalid(format!(
            "gap scan needs at least 3 gaps spanning 2 decades, got {gaps:?}"
        ))
        .into());
    }
    let cfg = SweepConfig {
        thetas: vec![theta],
        gaps: gaps.to_vec(),
        ..cfg.clone()
    };
    let result = run_sweep(&cfg)?;
    let fits = gap_fits(&result, &cfg);
    Ok((result, fits))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileRow {
    pub theta: f64,
    pub gap: f64,
    pub method: String,
    pub n: usize,
    pub energy: f64,
    pub energy_gap_to_oracle: f64,
    pub trace_err: f64,
    pub idem_err: f64,
    pub c: Option<f64>,
    pub gamma: Option<f64>,
}

fn profile_rows(h: &SymMatrix, n_occ: usize, theta: f64, gap: f64, cfg: &SweepConfig) -> Result<Vec<ProfileRow>, BenchError> {
    let (_, e_oracle) = ground_state_oracle(h, n_occ)?;
    let mut rows = Vec::new();
    for v in &cfg.methods {
        let mut purifier = v.purifier.clone();
        purifier.record_trace = true;
        let run = run_purification(h, n_occ, &v.guess, &purifier)?;
        rows.extend(run.records.iter().map(|r| ProfileRow {
            theta,
            gap,
            method: v.label.clone(),
            n: r.n,
            energy: r.energy,
            energy_gap_to_oracle: r.energy - e_oracle,
            trace_err: r.trace_d - n_occ as f64,
            idem_err: r.idempotency_error,
            c: r.c,
            gamma: r.gamma,
        }));
    }
    Ok(rows)
}

/// Per-iterate diagnostics of every method on the first sample Hamiltonian
/// of each (θ, gap) cell.
pub fn convergence_profile(cfg: &SweepConfig) -> Result<Vec<ProfileRow>, BenchError> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = (0..cfg.thetas.len())
        .flat_map(|t| (0..cfg.gaps.len()).map(move |g| (t, g)))
        .collect();
    let parts: Vec<Result<Vec<ProfileRow>, BenchError>> = thread_pool(cfg.parallelism).install(|| {
        cells
            .par_iter()
            .map(|&(t, g)| {
                let spec = sample_spec(cfg, t, g, 0);
                let h = generate_hamiltonian(&spec)?;
                profile_rows(&h, spec.n_occ, cfg.thetas[t], cfg.gaps[g], cfg)
            })
            .collect()
    });
    let mut rows = Vec::new();
    for p in parts {
        rows.extend(p?);
    }
    Ok(rows)
}
