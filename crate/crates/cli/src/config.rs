use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use nonconical::scalar::{parse_rational, Backend};
use nonconical::schottky::GeneratorSchedule;

/// Settings shared by every subcommand. Each field may come from a flag, a
/// JSON config file or the built-in default, in that order of precedence.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `"paper"` or a path to a schedule JSON file.
    pub schedule: Option<String>,
    pub count: Option<usize>,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub n_max: Option<usize>,
    pub alpha: Option<String>,
    pub backend: Option<String>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub width: Option<u32>,
    pub depth: Option<usize>,
    pub max_depth: Option<usize>,
    pub word: Option<String>,
    pub horizon: Option<f64>,
    pub step: Option<f64>,
    pub ball: Option<usize>,
    pub letters: Option<usize>,
    pub box_depth: Option<usize>,
    pub scales: Option<u32>,
    pub tol: Option<f64>,
}

/// Error in the user's configuration; reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn bad(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| bad(format!("config {}: {e}", path.display())))
    }

    /// Fields set in `flags` replace those in `self`.
    pub fn overlay(mut self, flags: &RunConfig) -> RunConfig {
        overlay!(
            self, flags, schedule, count, k, m, n_max, alpha, backend, jobs, out, width, depth, max_depth, word, horizon,
            step, ball, letters, box_depth, scales, tol
        );
        self
    }

    pub fn backend(&self) -> anyhow::Result<Backend> {
        match &self.backend {
            None => Ok(Backend::Exact),
            Some(b) => b.parse().map_err(|e| bad(format!("{e}"))),
        }
    }

    pub fn jobs(&self) -> anyhow::Result<usize> {
        match self.jobs.unwrap_or(1) {
            0 => Err(bad("--jobs must be at least 1")),
            j => Ok(j),
        }
    }

    pub fn k(&self) -> usize {
        self.k.unwrap_or(2)
    }

    /// Window size; at least 2.
    pub fn m(&self, default: usize) -> anyhow::Result<usize> {
        let m = self.m.unwrap_or(default);
        if m < 2 {
            return Err(bad(format!("window size m must be at least 2, got {m}")));
        }
        Ok(m)
    }

    pub fn n_max(&self, default: usize) -> anyhow::Result<usize> {
        let n = self.n_max.unwrap_or(default);
        if n < 1 {
            return Err(bad("n must be at least 1"));
        }
        Ok(n)
    }

    /// Rational exponent in `(0, 1]`; defaults to `1/(2k)`.
    pub fn alpha(&self) -> anyhow::Result<BigRational> {
        let a = match &self.alpha {
            None => BigRational::new(1.into(), (2 * self.k().max(1)).into()),
            Some(text) => parse_rational(text).map_err(|e| bad(format!("alpha: {e}")))?,
        };
        if !a.is_positive() || a > BigRational::one() {
            return Err(bad(format!("alpha must lie in (0, 1], got {}", self.alpha.as_deref().unwrap_or(""))));
        }
        Ok(a)
    }

    /// The standard schedule with at least `count` generators, or the
    /// schedule file named in the config.
    pub fn schedule(&self, count: usize) -> anyhow::Result<GeneratorSchedule> {
        match self.schedule.as_deref() {
            None | Some("paper") => Ok(GeneratorSchedule::standard(count)),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read schedule {path}: {e}")))?;
                GeneratorSchedule::from_json(&text).map_err(|e| bad(format!("schedule {path}: {e}")))
            }
        }
    }
}
