//! CSV output. Every file starts with `#` comment lines echoing the
//! configuration; a `# generated_unix=` line is added when a timestamp is
//! given and is the only line that varies between identical runs. The
//! worker count is not echoed, so output is independent of it.

use std::fmt::Write;

use super::{GapFit, ProfileRow, SweepConfig, SweepResult};

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), real)
}

fn preamble(kind: &str, cfg: &SweepConfig, timestamp: Option<u64>) -> String {
    let mut out = format!("# purikit {kind} v{}\n", env!("CARGO_PKG_VERSION"));
    if let Some(t) = timestamp {
        writeln!(out, "# generated_unix={t}").unwrap();
    }
    for line in cfg.to_kv().lines().filter(|l| !l.starts_with("jobs=")) {
        writeln!(out, "# {line}").unwrap();
    }
    out
}

pub fn sweep_csv(result: &SweepResult, cfg: &SweepConfig, timestamp: Option<u64>) -> String {
    let mut out = preamble("sweep", cfg, timestamp);
    out.push_str("theta,gap,method,p_mean,p_std,n_conv,n_fail\n");
    for c in &result.cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            real(c.theta),
            real(c.gap),
            c.method,
            opt(c.p_mean),
            opt(c.p_std),
            c.n_conv,
            c.n_fail
        )
        .unwrap();
    }
    out
}

pub fn gapscan_csv(fits: &[GapFit], cfg: &SweepConfig, timestamp: Option<u64>) -> String {
    let mut out = preamble("gapscan", cfg, timestamp);
    out.push_str("theta,method,slope,intercept,r2\n");
    for f in fits {
        let (slope, intercept, r2) = match &f.fit {
            Ok(l) => (real(l.slope), real(l.intercept), real(l.r_squared)),
            Err(_) => ("nan".into(), "nan".into(), "nan".into()),
        };
        writeln!(out, "{},{},{slope},{intercept},{r2}", real(f.theta), f.method).unwrap();
    }
    out
}

pub fn profile_csv(rows: &[ProfileRow], cfg: &SweepConfig, timestamp: Option<u64>) -> String {
    let mut out = preamble("profile", cfg, timestamp);
    out.push_str("theta,gap,method,n,energy,energy_gap_to_oracle,trace_err,idem_err,c,gamma\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            real(r.theta),
            real(r.gap),
            r.method,
            r.n,
            real(r.energy),
            real(r.energy_gap_to_oracle),
            real(r.trace_err),
            real(r.idem_err),
            opt(r.c),
            opt(r.gamma)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{run_sweep, CellResult};
    use super::*;

    #[test]
    fn sweep_header_and_rows() {
        let cfg = SweepConfig::default();
        let result = SweepResult {
            cells: vec![CellResult {
                theta: 0.5,
                gap: 1.0,
                method: "HPCP".into(),
                p_mean: Some(8.0),
                p_std: None,
                n_conv: 1,
                n_fail: 0,
                failures: Default::default(),
                iterations: vec![Some(8)],
            }],
        };
        let text = sweep_csv(&result, &cfg, Some(42));
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], "theta,gap,method,p_mean,p_std,n_conv,n_fail");
        assert_eq!(
            data[1],
            "5.0000000000000000e-1,1.0000000000000000e0,HPCP,8.0000000000000000e0,nan,1,0"
        );
        assert!(text.contains("# generated_unix=42\n"));
    }

    #[test]
    fn output_is_deterministic_up_to_timestamp() {
        let cfg = SweepConfig::parse("thetas=0.5\ngaps=1\nsamples=2\nm=16\nmethods=HPCP\n").unwrap();
        let a = sweep_csv(&run_sweep(&cfg).unwrap(), &cfg, Some(1));
        let b = sweep_csv(&run_sweep(&cfg).unwrap(), &cfg, Some(2));
        let strip = |s: &str| {
            s.lines()
                .filter(|l| !l.starts_with("# generated_unix="))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_ne!(a, b);
        assert_eq!(strip(&a), strip(&b));
    }
}
