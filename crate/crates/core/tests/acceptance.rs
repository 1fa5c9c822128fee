//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use purikit::bench::{gap_scan, run_sweep, sweep_csv};
use purikit::lagrangian::{compute_gamma, Powers};
use purikit::linalg::{gershgorin_bounds, multiply_count, reset_multiply_count, trace};
use purikit::purify::{hpcp_step, mcweeny_step, pm_hole_dual_update, pm_particle_update, pmcp_step, PmcpBranch};
use purikit::verify::{ground_state_oracle, verify_norm_trace, verify_occupancy_norm, verify_spectrum};
use purikit::{
    generate_hamiltonian, run_purification, Basis, GuessConfig, HamiltonianSpec, Method, PurifierConfig,
    RunResult, Subspace, SweepConfig, SymMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const M: usize = 100;

struct CorpusRun {
    spec: HamiltonianSpec,
    method: Method,
    run: RunResult,
}

/// θ ∈ {0.1, 0.3, 0.5, 0.7, 0.9} × gap ∈ {1, 0.1, 0.01} × 8 seeds, half of
/// them in a random orthogonal basis, purified by PMCP and HPCP.
fn corpus() -> Vec<CorpusRun> {
    let mut runs = Vec::new();
    for (ti, theta) in [0.1, 0.3, 0.5, 0.7, 0.9].into_iter().enumerate() {
        for (gi, gap) in [1.0, 0.1, 0.01].into_iter().enumerate() {
            for k in 0..8u64 {
                let n = (theta * M as f64).round() as usize;
                let basis = if k % 2 == 0 { Basis::Diagonal } else { Basis::RandomOrthogonal };
                let seed = 1000 * ti as u64 + 100 * gi as u64 + k;
                let spec = HamiltonianSpec::new(M, n, gap, seed).with_basis(basis);
                let h = generate_hamiltonian(&spec).unwrap();
                for method in [Method::Pmcp, Method::Hpcp] {
                    let run =
                        run_purification(&h, n, &GuessConfig::default(), &PurifierConfig::with_method(method)).unwrap();
                    runs.push(CorpusRun {
                        spec: spec.clone(),
                        method,
                        run,
                    });
                }
            }
        }
    }
    runs
}

fn random_density(m: usize, seed: u64) -> SymMatrix {
    let spec = HamiltonianSpec::new(m, m / 2, 0.1, seed).with_basis(Basis::RandomOrthogonal);
    generate_hamiltonian(&spec).unwrap().shift_diagonal(2.6).scale(1.0 / 5.2)
}

type Outcome = (bool, String);

fn trace_conservation(corpus: &[CorpusRun]) -> Outcome {
    let mut iterations = 0;
    let mut worst: f64 = 0.0;
    for r in corpus.iter().filter(|r| r.method == Method::Hpcp) {
        iterations += r.run.iterations;
        for rec in &r.run.records {
            worst = worst.max((rec.trace_d - r.spec.n_occ as f64).abs());
        }
    }
    (
        iterations >= 1000 && worst <= 1e-9 * M as f64,
        format!("{iterations} HPCP iterations, max |Tr D - N| = {worst:.2e} (limit {:.0e})", 1e-9 * M as f64),
    )
}

fn traceless_gradient() -> Outcome {
    let mut worst_ratio: f64 = 0.0;
    for k in 0..200u64 {
        let m = 10 + (k as usize % 5) * 20;
        let p = Powers::new(random_density(m, 50_000 + k)).unwrap();
        let g = p.grad_lagrangian(compute_gamma(p.c().unwrap()));
        let bound = 1e-10 * m as f64 * (1.0 + g.frobenius_norm());
        worst_ratio = worst_ratio.max(trace(&g).abs() / bound);
    }
    (worst_ratio <= 1.0, format!("200 matrices, max |Tr grad L| / bound = {worst_ratio:.2e}"))
}

fn oracle_equivalence() -> Outcome {
    let (mut count, mut fails) = (0, 0);
    let (mut worst_p, mut worst_e): (f64, f64) = (0.0, 0.0);
    for (ti, theta) in [0.1, 0.5, 0.9].into_iter().enumerate() {
        for (gi, gap) in [1.0, 0.1, 0.01].into_iter().enumerate() {
            for k in 0..6u64 {
                let n = (theta * M as f64).round() as usize;
                let basis = if k % 2 == 0 { Basis::RandomOrthogonal } else { Basis::Diagonal };
                let spec = HamiltonianSpec::new(M, n, gap, 7_000 + 100 * ti as u64 + 10 * gi as u64 + k).with_basis(basis);
                let h = generate_hamiltonian(&spec).unwrap();
                let run = run_purification(&h, n, &GuessConfig::default(), &PurifierConfig::default()).unwrap();
                let (p, e) = ground_state_oracle(&h, n).unwrap();
                let dp = (&run.final_d - &p).frobenius_norm();
                let de = (purikit::linalg::trace_of_product(&h, &run.final_d) - e).abs() / (1.0 + e.abs());
                worst_p = worst_p.max(dp);
                worst_e = worst_e.max(de);
                count += 1;
                if !(run.converged && dp <= 1e-4 && de <= 1e-5) {
                    fails += 1;
                }
            }
        }
    }
    (
        count >= 50 && fails == 0,
        format!("{count} Hamiltonians, {fails} failures, max ||D-P|| = {worst_p:.2e}, max rel energy gap = {worst_e:.2e}"),
    )
}

fn projector_suite(corpus: &[CorpusRun]) -> Outcome {
    let (mut checked, mut fails) = (0, 0);
    let mut worst: f64 = 0.0;
    for r in corpus.iter().filter(|r| r.run.converged) {
        let d = &r.run.final_d;
        let a = verify_norm_trace(d).unwrap();
        let b = verify_occupancy_norm(d, r.spec.n_occ);
        let c = verify_spectrum(d, r.spec.n_occ).unwrap();
        worst = worst.max(a).max(b).max(c);
        checked += 1;
        if a > 1e-6 || b > 1e-6 || c > 1e-6 {
            fails += 1;
        }
    }
    let unconverged = corpus.len() - checked;
    (
        fails == 0 && checked > 0,
        format!("{checked} converged runs ({unconverged} unconverged), {fails} failures, max residual {worst:.2e}"),
    )
}

fn sweep_cfg(text: &str) -> SweepConfig {
    SweepConfig::parse(text).unwrap()
}

fn gap_one_points() -> Outcome {
    let cfg = sweep_cfg("thetas=0.5,0.05\ngaps=1\nsamples=32\nm=100\nmethods=HPCP,PMCP\n");
    let res = run_sweep(&cfg).unwrap();
    let get = |theta: f64, method: &str| {
        let c = res.cell(theta, 1.0, method).unwrap();
        (c.p_mean.unwrap_or(f64::NAN), c.n_fail)
    };
    let checks = [
        (0.5, "HPCP", 8.0, 14.0),
        (0.5, "PMCP", 8.0, 14.0),
        (0.05, "HPCP", 19.0, 27.0),
        (0.05, "PMCP", 32.0, 42.0),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (theta, method, lo, hi) in checks {
        let (p, fail) = get(theta, method);
        let inside = (lo..=hi).contains(&p);
        ok &= inside;
        parts.push(format!(
            "theta={theta} {method} p={p:.2} in [{lo},{hi}]{}{}",
            if inside { "" } else { " NO" },
            if fail > 0 { format!(" ({fail} failed)") } else { String::new() }
        ));
    }
    (ok, parts.join("; "))
}

fn low_filling_intercepts() -> Outcome {
    let cfg = sweep_cfg("samples=32\nm=100\nmethods=HPCP+,PMCP+\n");
    let (_, fits) = gap_scan(0.01, &[1.0, 1e-1, 1e-2, 1e-3], &cfg).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for f in &fits {
        let (lo, hi) = if f.method == "HPCP+" { (16.0, 26.0) } else { (33.0, 43.0) };
        match &f.fit {
            Ok(l) => {
                let good = (lo..=hi).contains(&l.intercept) && l.r_squared >= 0.95;
                ok &= good;
                parts.push(format!(
                    "{} intercept={:.2} in [{lo},{hi}] slope={:.2} r2={:.3}{}",
                    f.method,
                    l.intercept,
                    l.slope,
                    l.r_squared,
                    if good { "" } else { " NO" }
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{}: {e}", f.method));
            }
        }
    }
    (ok, parts.join("; "))
}

fn mixed_plateau() -> Outcome {
    let thetas: Vec<String> = (1..20).map(|k| format!("{:.2}", 0.05 * k as f64)).collect();
    let cfg = sweep_cfg(&format!(
        "thetas={}\ngaps=1\nsamples=32\nm=100\nmethods=HPCP+,PMCP+\n",
        thetas.join(",")
    ));
    let res = run_sweep(&cfg).unwrap();
    let runaways: usize = res.cells.iter().map(|c| c.failures.get("runaway").copied().unwrap_or(0)).sum();
    let other_failures: usize = res.cells.iter().map(|c| c.n_fail).sum::<usize>() - runaways;
    let mut ok = runaways == 0;
    let mut parts = Vec::new();
    for method in ["HPCP+", "PMCP+"] {
        let plateau: Vec<f64> = res
            .cells
            .iter()
            .filter(|c| c.method == method && c.theta >= 0.35 - 1e-9 && c.theta <= 0.65 + 1e-9)
            .map(|c| c.p_mean.unwrap_or(f64::NAN))
            .collect();
        let lo = plateau.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = plateau.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        ok &= hi - lo <= 3.0;
        parts.push(format!("{method} plateau p in [{lo:.2}, {hi:.2}] spread {:.2}", hi - lo));
    }
    parts.push(format!("runaways={runaways} other failures={other_failures}"));
    (ok, parts.join("; "))
}

fn monotone_energy(corpus: &[CorpusRun]) -> Outcome {
    let mut parts = Vec::new();
    let mut total = 0;
    for method in [Method::Pmcp, Method::Hpcp] {
        let (mut violations, mut runs_hit) = (0, 0);
        let mut worst: f64 = 0.0;
        for r in corpus.iter().filter(|r| r.method == method) {
            let mut hit = false;
            for w in r.run.records.windows(2) {
                let excess = w[1].energy - w[0].energy - 1e-10 * (1.0 + w[0].energy.abs());
                if excess > 0.0 {
                    violations += 1;
                    hit = true;
                    worst = worst.max(excess);
                }
            }
            runs_hit += hit as usize;
        }
        total += violations;
        parts.push(format!(
            "{}: {violations} violations in {runs_hit} runs (worst rise {worst:.2e})",
            method.name()
        ));
    }
    (total == 0, parts.join("; "))
}

fn quadratic_tail(corpus: &[CorpusRun]) -> Outcome {
    let mut worst = f64::INFINITY;
    let mut runs = 0;
    for r in corpus.iter().filter(|r| r.method == Method::Hpcp && r.spec.gap >= 0.1 && r.run.converged) {
        let eps: Vec<f64> = r.run.records.iter().map(|x| x.idempotency_error.abs()).collect();
        if eps.len() < 4 {
            continue;
        }
        runs += 1;
        for w in eps[eps.len() - 4..].windows(2) {
            worst = worst.min(w[1].ln() / w[0].ln());
        }
    }
    (worst >= 1.7, format!("{runs} runs, min log(e_n+1)/log(e_n) over last three steps = {worst:.3}"))
}

fn weighted_pm_identity() -> Outcome {
    let mut worst_ratio: f64 = 0.0;
    for k in 0..100u64 {
        let m = 5 + (k as usize % 8) * 12;
        let d = random_density(m, 90_000 + k);
        let (hp, c) = hpcp_step(&d).unwrap();
        let branch = PmcpBranch::for_c(c);
        let part = pm_particle_update(&d, c, branch).unwrap();
        let hole = pm_hole_dual_update(&d, c, branch).unwrap();
        let combined = match branch {
            PmcpBranch::Low => part.lin_comb(1.0 - c, &hole, c),
            PmcpBranch::High => part.lin_comb(c, &hole, 1.0 - c),
        };
        worst_ratio = worst_ratio.max((&combined - &hp).max_abs() / (1e-12 * m as f64));
    }
    (worst_ratio <= 1.0, format!("100 inputs, max deviation / (1e-12 M) = {worst_ratio:.2e}"))
}

fn scalar_maps() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = rng.random_range(2..40);
        let x: Vec<f64> = (0..m).map(|_| rng.random_range(0.001..0.999)).collect();
        let num: f64 = x.iter().map(|v| v * v * (1.0 - v)).sum();
        let den: f64 = x.iter().map(|v| v * (1.0 - v)).sum();
        let c = num / den;
        let d = SymMatrix::from_diagonal(&x);
        let mc = mcweeny_step(&d).unwrap();
        let (pm, _, _) = pmcp_step(&d).unwrap();
        let (hp, _) = hpcp_step(&d).unwrap();
        for (i, &v) in x.iter().enumerate() {
            let mc_v = 3.0 * v * v - 2.0 * v * v * v;
            let pm_v = if c <= 0.5 {
                ((1.0 + c) * v * v + (1.0 - 2.0 * c) * v - v * v * v) / (1.0 - c)
            } else {
                ((1.0 + c) * v * v - v * v * v) / c
            };
            let hp_v = v + 2.0 * (v * v * (1.0 - v) - c * v * (1.0 - v));
            worst = worst
                .max((mc.get(i, i) - mc_v).abs())
                .max((pm.get(i, i) - pm_v).abs())
                .max((hp.get(i, i) - hp_v).abs());
        }
        let off = [&mc, &pm, &hp]
            .iter()
            .map(|a| (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| a.get(i, j).abs())).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        worst = worst.max(off);
    }
    (worst <= 1e-12, format!("100 diagonal inputs, 3 engines, max deviation {worst:.2e}"))
}

fn basis_invariance() -> Outcome {
    let (mut cases, mut fails) = (0, 0);
    let (mut worst, mut raw_c): (f64, f64) = (0.0, 0.0);
    for (k, (theta, gap)) in [(0.1, 1.0), (0.3, 0.1), (0.5, 0.01), (0.7, 1.0), (0.9, 0.1)].into_iter().enumerate() {
        let n = (theta * M as f64).round() as usize;
        let spec = HamiltonianSpec::new(M, n, gap, 300 + k as u64);
        let hd = generate_hamiltonian(&spec).unwrap();
        let ho = generate_hamiltonian(&spec.clone().with_basis(Basis::RandomOrthogonal)).unwrap();
        let guess = GuessConfig {
            bounds_override: Some(gershgorin_bounds(&hd)),
            ..GuessConfig::default()
        };
        for method in [Method::McWeeny, Method::Pmcp, Method::Hpcp] {
            let cfg = PurifierConfig::with_method(method);
            let a = run_purification(&hd, n, &guess, &cfg).unwrap();
            let b = run_purification(&ho, n, &guess, &cfg).unwrap();
            cases += 1;
            let mut dev: f64 = 0.0;
            for (x, y) in a.records.iter().zip(&b.records) {
                // c is a quotient whose denominator Tr[DD̄] vanishes at convergence, so
                // it is compared through its trace content c·Tr[DD̄].
                let dc = (x.c.unwrap_or(0.0) - y.c.unwrap_or(0.0)).abs();
                raw_c = raw_c.max(dc);
                dev = dev
                    .max((x.trace_d - y.trace_d).abs())
                    .max((x.idempotency_error - y.idempotency_error).abs())
                    .max((x.energy - y.energy).abs())
                    .max(dc * x.idempotency_error.abs());
            }
            worst = worst.max(dev);
            if a.iterations != b.iterations || a.records.len() != b.records.len() || dev > 1e-9 {
                fails += 1;
            }
        }
    }
    (fails == 0, format!(
            "{cases} paired runs, {fails} mismatches, max trace-diagnostic deviation {worst:.2e} (raw c deviation {raw_c:.2e})"
        ))
}

fn cost_contract() -> Outcome {
    let mut bad = Vec::new();
    let mut runs = 0;
    for (k, theta) in [0.1, 0.5, 0.9].into_iter().enumerate() {
        let n = (theta * M as f64).round() as usize;
        let h = generate_hamiltonian(&HamiltonianSpec::new(M, n, 0.1, 500 + k as u64)).unwrap();
        for method in [Method::McWeeny, Method::Pmcp, Method::Hpcp] {
            for subspace in [Subspace::Particle, Subspace::Hole] {
                let guess = purikit::build_guess(&h, n, &GuessConfig::default()).unwrap();
                let cfg = PurifierConfig {
                    subspace,
                    ..PurifierConfig::with_method(method)
                };
                reset_multiply_count();
                let run = purikit::purify_from_guess(&h, n, guess, &cfg).unwrap();
                let count = multiply_count();
                runs += 1;
                if count != 2 * run.iterations as u64 {
                    bad.push(format!("{} {subspace:?}: {count} products for {} steps", method.name(), run.iterations));
                }
            }
        }
    }
    let detail = if bad.is_empty() {
        format!("{runs} runs, products = 2 x iterations in all")
    } else {
        bad.join("; ")
    };
    (bad.is_empty(), detail)
}

fn determinism() -> Outcome {
    let text = "thetas=0.1,0.5,0.9\ngaps=1,0.01\nsamples=4\nm=60\nmethods=PMCP,HPCP,PMCP+,HPCP+\nbase_seed=99\n";
    let strip = |s: String| {
        s.lines()
            .filter(|l| !l.starts_with("# generated_unix="))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let mut outputs = Vec::new();
    for (jobs, stamp) in [(1, 1), (1, 2), (2, 3), (4, 4)] {
        let cfg = SweepConfig {
            parallelism: jobs,
            ..sweep_cfg(text)
        };
        outputs.push(strip(sweep_csv(&run_sweep(&cfg).unwrap(), &cfg, Some(stamp))));
    }
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    (identical, format!("4 sweeps (jobs 1, 1, 2, 4): byte-identical = {identical}"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let corpus = corpus();
    let corpus_secs = start.elapsed().as_secs_f64();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("trace conservation", Box::new(|| trace_conservation(&corpus))),
        ("traceless Lagrangian gradient", Box::new(traceless_gradient)),
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("projector residuals", Box::new(|| projector_suite(&corpus))),
        ("iteration counts at gap 1", Box::new(gap_one_points)),
        ("low-filling gap-scan intercepts", Box::new(low_filling_intercepts)),
        ("mixed-guess plateau", Box::new(mixed_plateau)),
        ("monotone energy", Box::new(|| monotone_energy(&corpus))),
        ("quadratic terminal convergence", Box::new(|| quadratic_tail(&corpus))),
        ("weighted PM steps equal HPCP", Box::new(weighted_pm_identity)),
        ("scalar-map equivalence", Box::new(scalar_maps)),
        ("basis invariance", Box::new(basis_invariance)),
        ("two products per iteration", Box::new(cost_contract)),
        ("determinism", Box::new(determinism)),
    ];
    println!("corpus: {} runs built in {corpus_secs:.1}s", corpus.len());
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = check();
        failed += !ok as usize;
        println!(
            "{} [{:2}] {name}: {detail} ({:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1}s)",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
