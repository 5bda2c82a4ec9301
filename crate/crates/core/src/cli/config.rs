use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{build_grid, GridSpec};
use crate::nelson::NelsonParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "Lambda", alias = "lambda")]
    Lambda,
    #[serde(rename = "n_max")]
    NMax,
    #[serde(rename = "kappa")]
    Kappa,
    /// Points per axis.
    #[serde(rename = "refinement")]
    Refinement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Entrywise slack for `⊵` and exact identities.
    pub entry: f64,
    pub tau_pos: f64,
    /// Relative spectral gap below which a ground state counts as degenerate.
    pub gap_rel: f64,
    pub quadrature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { entry: 1e-10, tau_pos: 1e-12, gap_rel: 1e-8, quadrature: 1e-6 }
    }
}

impl Tolerances {
    pub fn scaled(&self, s: f64) -> Self {
        Self { entry: self.entry * s, tau_pos: self.tau_pos * s, gap_rel: self.gap_rel * s, quadrature: self.quadrature * s }
    }
}

/// Sizes and knobs of the individual checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteOptions {
    pub bound_samples: usize,
    pub ergodicity_pairs: usize,
    pub duhamel_order: usize,
    pub duhamel_points: usize,
    pub form_epsilon: f64,
    pub form_samples: usize,
    pub limit_levels: Vec<f64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            bound_samples: 20,
            ergodicity_pairs: 10,
            duhamel_order: 6,
            duhamel_points: 32,
            form_epsilon: 0.5,
            form_samples: 100,
            limit_levels: vec![1.0, 2.0, 4.0, 8.0, 16.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub params: NelsonParams,
    pub n_max: usize,
    pub beta_list: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub suite: SuiteOptions,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.beta_list.is_empty() {
            return Err(Error::Config("beta_list must not be empty".into()));
        }
        if let Some(b) = self.beta_list.iter().find(|&&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::Config(format!("every β must be positive and finite, got {b}")));
        }
        let t = &self.tolerances;
        for (name, v) in [("entry", t.entry), ("tau_pos", t.tau_pos), ("gap_rel", t.gap_rel), ("quadrature", t.quadrature)] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::Config("sweep values must not be empty".into()));
            }
            if s.values.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config("sweep values must be strictly increasing".into()));
            }
            if matches!(s.variable, SweepVariable::NMax | SweepVariable::Refinement)
                && s.values.iter().any(|v| v.fract() != 0.0 || *v < 0.0)
            {
                return Err(Error::Config("n_max and refinement sweeps take nonnegative integers".into()));
            }
        }
        let o = &self.suite;
        if o.limit_levels.is_empty() || o.limit_levels.windows(2).any(|w| w[1] <= w[0]) || o.limit_levels[0] < 1.0 {
            return Err(Error::Config("limit_levels must be strictly increasing and start at 1 or above".into()));
        }
        if o.duhamel_points < 2 || !o.duhamel_points.is_multiple_of(2) {
            return Err(Error::Config("duhamel_points must be even and at least 2".into()));
        }
        if !(o.form_epsilon > 0.0) || o.form_samples == 0 {
            return Err(Error::Config("form_epsilon must be positive and form_samples nonzero".into()));
        }
        let grid = build_grid(&self.grid)?;
        self.params.validate(&grid)
    }

    /// The configuration at one point of its sweep.
    pub fn at_sweep_value(&self, value: f64) -> Result<Self> {
        let sweep = self.sweep.as_ref().ok_or_else(|| Error::Config("no sweep section".into()))?;
        let mut c = self.clone();
        c.sweep = None;
        match sweep.variable {
            SweepVariable::Lambda => c.params.window.lambda = value,
            SweepVariable::Kappa => c.params.window.kappa = value,
            SweepVariable::NMax => c.n_max = value as usize,
            SweepVariable::Refinement => c.grid.points_per_axis = value as usize,
        }
        c.validate()?;
        Ok(c)
    }
}
