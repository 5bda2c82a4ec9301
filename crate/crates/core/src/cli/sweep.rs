use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cli::config::{ExperimentConfig, SweepVariable};
use crate::cli::run::{run, Category, CheckRecord, RunReport, Summary};
use crate::error::{Error, Result};

pub const SWEEP_FILE: &str = "sweep.json";
pub const TRENDS_FILE: &str = "trends.csv";
pub const TRENDS_HEADER: &str = "value,inf_spec_h,inf_spec_h_ren,e_lambda_grid,e_lambda_radial,gap,min_semigroup_entry";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub value: f64,
    pub inf_spec_h: f64,
    pub inf_spec_h_ren: f64,
    pub e_lambda_grid: f64,
    pub e_lambda_radial: f64,
    pub gap: f64,
    pub min_semigroup_entry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub kind: String,
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub points: Vec<RunReport>,
    pub trends: Vec<TrendRow>,
    /// Checks on the sequence of points, all advisory.
    pub trend_checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl SweepReport {
    pub fn trend(&self, name: &str) -> Option<&CheckRecord> {
        self.trend_checks.iter().find(|c| c.name == name)
    }

    pub fn trends_csv(&self) -> String {
        let mut s = String::from(TRENDS_HEADER);
        s.push('\n');
        for r in &self.trends {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.value, r.inf_spec_h, r.inf_spec_h_ren, r.e_lambda_grid, r.e_lambda_radial, r.gap, r.min_semigroup_entry
            );
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let json_path = dir.join(SWEEP_FILE);
        std::fs::write(&json_path, serde_json::to_string_pretty(self)? + "\n")?;
        let csv_path = dir.join(TRENDS_FILE);
        std::fs::write(&csv_path, self.trends_csv())?;
        Ok((json_path, csv_path))
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn spread(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn trend_checks(variable: SweepVariable, points: &[RunReport], entry_tol: f64) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let mut push = |name: &str, measured: serde_json::Value, passed: bool| {
        out.push(CheckRecord {
            name: name.to_string(),
            category: Category::Advisory,
            parameters: json!({ "variable": variable }),
            measured,
            tolerance: None,
            passed,
        });
    };
    let h: Vec<f64> = points.iter().map(|r| r.metrics.lambda_min_h).collect();
    let h_ren: Vec<f64> = points.iter().map(|r| r.metrics.lambda_min_h_ren).collect();
    let min_entries: Vec<f64> = points.iter().map(|r| r.metrics.min_semigroup_entry).collect();
    push(
        "sweep_semigroup_nonnegative",
        json!(min_entries),
        points.iter().all(|r| {
            let s = r.metrics.min_semigroup_entry;
            s >= -entry_tol
        }),
    );
    match variable {
        SweepVariable::Lambda => {
            let radial: Vec<f64> = points.iter().map(|r| r.metrics.e_lambda_radial).collect();
            push("inf_spec_h_decreasing", json!(h), strictly_decreasing(&h));
            push("e_lambda_radial_decreasing", json!(radial), strictly_decreasing(&radial));
            let (sh, sr) = (spread(&h), spread(&h_ren));
            push(
                "renormalized_spread_ratio",
                json!({ "spread_h": sh, "spread_h_ren": sr, "ratio": sh / sr }),
                sh > 10.0 * sr,
            );
            let tail: Vec<f64> = points.iter().map(|r| r.metrics.tail_ground_energy).collect();
            let last_window = points.last().map_or(0.0, |r| r.metrics.e_window.abs());
            let band = spread(&tail);
            push(
                "tail_ground_band",
                json!({ "tail_ground": tail, "band": band, "e_window_at_largest": last_window, "fraction": band / last_window }),
                band < 0.2 * last_window,
            );
        }
        SweepVariable::NMax => {
            push("inf_spec_h_ren_nonincreasing", json!(h_ren), h_ren.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
        SweepVariable::Kappa | SweepVariable::Refinement => {}
    }
    out
}

/// Runs every sweep point, on up to `workers` threads when given.
pub fn sweep(config: &ExperimentConfig, workers: Option<usize>) -> Result<SweepReport> {
    config.validate()?;
    let s = config.sweep.as_ref().ok_or_else(|| Error::Config("configuration has no sweep section".into()))?;
    let configs: Vec<ExperimentConfig> = s.values.iter().map(|&v| config.at_sweep_value(v)).collect::<Result<_>>()?;
    let exec = || configs.par_iter().map(run).collect::<Vec<Result<RunReport>>>();
    let results = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(exec),
        None => exec(),
    };
    let points: Vec<RunReport> = results.into_iter().collect::<Result<_>>()?;
    let trends = s
        .values
        .iter()
        .zip(&points)
        .map(|(&value, r)| TrendRow {
            value,
            inf_spec_h: r.metrics.lambda_min_h,
            inf_spec_h_ren: r.metrics.lambda_min_h_ren,
            e_lambda_grid: r.metrics.e_lambda_grid,
            e_lambda_radial: r.metrics.e_lambda_radial,
            gap: r.metrics.gap,
            min_semigroup_entry: r.metrics.min_semigroup_entry,
        })
        .collect();
    let trend_checks = trend_checks(s.variable, &points, config.tolerances.entry);
    let all: Vec<CheckRecord> = points
        .iter()
        .zip(&s.values)
        .flat_map(|(r, v)| {
            r.checks.iter().map(move |c| CheckRecord { name: format!("{}@{}", c.name, v), ..c.clone() })
        })
        .chain(trend_checks.iter().cloned())
        .collect();
    Ok(SweepReport {
        kind: "sweep".into(),
        variable: s.variable,
        values: s.values.clone(),
        summary: Summary::of(&all),
        points,
        trends,
        trend_checks,
    })
}
