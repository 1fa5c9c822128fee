//! Sweep configuration as flat `key=value` text.
//!
//! ```text
//! # comment
//! thetas = 0.05, 0.5
//! gaps = 1, 1e-1, 1e-2
//! samples = 32
//! m = 100
//! methods = PMCP, HPCP, PMCP+, HPCP+
//! base_seed = 0
//! ```
//!
//! Other keys: `jobs`, `tol`, `max_iter`, `alpha`, `delta`, `basis`,
//! `range_low`, `range_high`. Unknown or repeated keys are errors.

use std::collections::BTreeSet;

use crate::error::ConfigError;
use crate::guess::{GuessConfig, GuessKind};
use crate::hamgen::Basis;
use crate::purify::{Method, PurifierConfig, Subspace};

/// One labelled (guess, purifier) pair of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodVariant {
    pub label: String,
    pub guess: GuessConfig,
    pub purifier: PurifierConfig,
}

impl MethodVariant {
    /// Recognized labels (case-insensitive):
    ///
    /// * `MCWEENY`, `PMCP`, `HPCP`: particle guess;
    /// * `PMCP+`, `HPCP+`: mixed guess with optimized α;
    /// * `PMCP+fixed`, `HPCP+fixed`: mixed guess with the configured α;
    /// * a `/hole` suffix on any of the above purifies in the hole subspace.
    pub fn from_label(label: &str, defaults: &VariantDefaults) -> Option<Self> {
        let (base, subspace) = match label.strip_suffix("/hole") {
            Some(b) => (b, Subspace::Hole),
            None => (label, Subspace::Particle),
        };
        let upper = base.to_ascii_uppercase();
        let (method_name, kind) = if let Some(m) = upper.strip_suffix("+FIXED") {
            (m, GuessKind::MixedFixedAlpha)
        } else if let Some(m) = upper.strip_suffix('+') {
            (m, GuessKind::MixedOptimizedAlpha)
        } else {
            (upper.as_str(), GuessKind::ParticlePmcp)
        };
        let method = match method_name {
            "MCWEENY" => Method::McWeeny,
            "PMCP" => Method::Pmcp,
            "HPCP" => Method::Hpcp,
            _ => return None,
        };
        Some(Self {
            label: label.to_string(),
            guess: GuessConfig {
                kind,
                alpha: defaults.alpha,
                delta: defaults.delta,
                ..GuessConfig::default()
            },
            purifier: PurifierConfig {
                method,
                subspace,
                tol: defaults.tol,
                max_iter: defaults.max_iter,
                record_trace: true,
                ..PurifierConfig::default()
            },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariantDefaults {
    pub tol: f64,
    pub max_iter: usize,
    pub alpha: f64,
    pub delta: f64,
}

impl Default for VariantDefaults {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 100,
            alpha: 0.5,
            delta: 2.0 / 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub thetas: Vec<f64>,
    pub gaps: Vec<f64>,
    pub samples: usize,
    pub m: usize,
    pub methods: Vec<MethodVariant>,
    pub base_seed: u64,
    pub parallelism: usize,
    pub basis: Basis,
    pub range_low: f64,
    pub range_high: f64,
    pub defaults: VariantDefaults,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let defaults = VariantDefaults::default();
        Self {
            thetas: vec![0.5],
            gaps: vec![1.0],
            samples: 32,
            m: 100,
            methods: ["PMCP", "HPCP", "PMCP+", "HPCP+"]
                .iter()
                .map(|l| MethodVariant::from_label(l, &defaults).expect("known label"))
                .collect(),
            base_seed: 0,
            parallelism: 1,
            basis: Basis::Diagonal,
            range_low: -2.5,
            range_high: 2.5,
            defaults,
        }
    }
}

impl SweepConfig {
    /// Full map preset: θ ∈ {0.01, 0.05, 0.10, …, 0.95, 0.99},
    /// Δε ∈ {1, 1e-1, …, 1e-7}, 32 samples, M = 100.
    pub fn full_map() -> Self {
        let mut thetas = vec![0.01];
        thetas.extend((1..20).map(|k| k as f64 * 0.05));
        thetas.push(0.99);
        Self {
            thetas,
            gaps: (0..8).map(|k| 10f64.powi(-k)).collect(),
            ..Self::default()
        }
    }

    pub fn method_labels(&self) -> Vec<&str> {
        self.methods.iter().map(|m| m.label.as_str()).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.m < 2 {
            return bad(format!("m must be at least 2, got {}", self.m));
        }
        if self.parallelism == 0 {
            return bad("jobs must be at least 1".into());
        }
        if self.thetas.is_empty() || self.gaps.is_empty() || self.methods.is_empty() {
            return bad("thetas, gaps and methods must be non-empty".into());
        }
        for &t in &self.thetas {
            if !(t > 0.0 && t < 1.0) {
                return bad(format!("theta {t} outside (0, 1)"));
            }
            let n = (t * self.m as f64).round() as usize;
            if n == 0 || n >= self.m {
                return bad(format!("theta {t} rounds to {n} occupied states for m = {}", self.m));
            }
        }
        for &g in &self.gaps {
            if !(g > 0.0 && g.is_finite()) {
                return bad(format!("gap {g} must be positive"));
            }
        }
        Ok(())
    }

    /// Number of occupied states for occupation factor `theta`.
    pub fn n_occ(&self, theta: f64) -> usize {
        (theta * self.m as f64).round() as usize
    }

    /// Parses `key=value` lines over the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = BTreeSet::new();
        let mut method_labels: Option<(usize, Vec<String>)> = None;

        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let perr = |message: String| ConfigError::Parse { line, message };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| perr(format!("expected key=value, got '{content}'")))?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(perr(format!("duplicate key '{key}'")));
            }
            let float = |v: &str| -> Result<f64, ConfigError> {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| perr(format!("invalid number '{}' for '{key}'", v.trim())))
            };
            let uint = |v: &str| -> Result<u64, ConfigError> {
                v.trim()
                    .parse::<u64>()
                    .map_err(|_| perr(format!("invalid integer '{}' for '{key}'", v.trim())))
            };
            let list = |v: &str| -> Result<Vec<f64>, ConfigError> {
                v.split(',').map(float).collect()
            };
            match key {
                "thetas" => cfg.thetas = list(value)?,
                "gaps" => cfg.gaps = list(value)?,
                "samples" => cfg.samples = uint(value)? as usize,
                "m" => cfg.m = uint(value)? as usize,
                "base_seed" | "seed" => cfg.base_seed = uint(value)?,
                "jobs" | "parallelism" => cfg.parallelism = uint(value)? as usize,
                "tol" => cfg.defaults.tol = float(value)?,
                "max_iter" => cfg.defaults.max_iter = uint(value)? as usize,
                "alpha" => cfg.defaults.alpha = float(value)?,
                "delta" => cfg.defaults.delta = float(value)?,
                "range_low" => cfg.range_low = float(value)?,
                "range_high" => cfg.range_high = float(value)?,
                "basis" => {
                    cfg.basis = Basis::parse(value)
                        .ok_or_else(|| perr(format!("unknown basis '{value}'")))?
                }
                "methods" => {
                    let labels: Vec<String> = value
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect();
                    method_labels = Some((line, labels));
                }
                other => return Err(perr(format!("unknown key '{other}'"))),
            }
        }

        let (line, labels) = method_labels
            .unwrap_or_else(|| (0, cfg.methods.iter().map(|m| m.label.clone()).collect()));
        cfg.methods = labels
            .iter()
            .map(|l| {
                MethodVariant::from_label(l, &cfg.defaults).ok_or_else(|| ConfigError::Parse {
                    line,
                    message: format!("unknown method '{l}'"),
                })
            })
            .collect::<Result<_, _>>()?;
        for variant in &cfg.methods {
            variant
                .guess
                .validate()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            variant
                .purifier
                .validate()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// `key=value` lines that [`SweepConfig::parse`] reads back to the same
    /// configuration.
    pub fn to_kv(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        format!(
            "thetas={}\ngaps={}\nsamples={}\nm={}\nmethods={}\nbase_seed={}\njobs={}\ntol={:e}\nmax_iter={}\nalpha={}\ndelta={}\nbasis={}\nrange_low={}\nrange_high={}\n",
            join(&self.thetas),
            join(&self.gaps),
            self.samples,
            self.m,
            self.method_labels().join(","),
            self.base_seed,
            self.parallelism,
            self.defaults.tol,
            self.defaults.max_iter,
            self.defaults.alpha,
            self.defaults.delta,
            self.basis.name(),
            self.range_low,
            self.range_high,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let text = "# sweep\nthetas = 0.05, 0.5\ngaps=1,1e-2\nsamples=4\nm=50\nmethods=HPCP,PMCP+\nbase_seed=9\njobs=3\ntol=1e-8 # tighter\nbasis=orthogonal\n";
        let cfg = SweepConfig::parse(text).unwrap();
        assert_eq!(cfg.thetas, vec![0.05, 0.5]);
        assert_eq!(cfg.gaps, vec![1.0, 1e-2]);
        assert_eq!(cfg.samples, 4);
        assert_eq!(cfg.m, 50);
        assert_eq!(cfg.method_labels(), vec!["HPCP", "PMCP+"]);
        assert_eq!(cfg.methods[1].guess.kind, GuessKind::MixedOptimizedAlpha);
        assert_eq!(cfg.methods[1].purifier.method, Method::Pmcp);
        assert_eq!(cfg.methods[0].purifier.tol, 1e-8);
        assert_eq!(cfg.parallelism, 3);
        assert_eq!(cfg.basis, Basis::RandomOrthogonal);
    }

    #[test]
    fn kv_round_trip() {
        let cfg = SweepConfig::full_map();
        assert_eq!(SweepConfig::parse(&cfg.to_kv()).unwrap(), cfg);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("thetas=0.1\nbogus=1\n", 2),
            ("\n\nsamples=x\n", 3),
            ("gaps=1\ngaps=2\n", 2),
            ("no equals sign\n", 1),
            ("methods=HPCP,FOO\n", 1),
            ("tol=nan\n", 1),
        ];
        for (text, line) in cases {
            match SweepConfig::parse(text) {
                Err(ConfigError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn semantic_errors() {
        for text in ["thetas=1.5\n", "samples=0\n", "gaps=-1\n", "m=100\nthetas=0.001\n", "alpha=2\n"] {
            assert!(matches!(SweepConfig::parse(text), Err(ConfigError::Invalid(_))), "{text}");
        }
    }

    #[test]
    fn labels() {
        let d = VariantDefaults::default();
        let v = MethodVariant::from_label("hpcp+fixed/hole", &d).unwrap();
        assert_eq!(v.guess.kind, GuessKind::MixedFixedAlpha);
        assert_eq!(v.purifier.subspace, Subspace::Hole);
        assert_eq!(MethodVariant::from_label("McWeeny", &d).unwrap().purifier.method, Method::McWeeny);
        assert!(MethodVariant::from_label("TRS4", &d).is_none());
    }
}
