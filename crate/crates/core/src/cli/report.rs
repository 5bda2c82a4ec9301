use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::cli::run::{Category, CheckRecord, RunReport, REPORT_FILE};
use crate::cli::sweep::{SweepReport, SWEEP_FILE, TRENDS_FILE, TRENDS_HEADER};
use crate::error::{Error, Result};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

fn corrupt(path: &Path, reason: impl ToString) -> Error {
    Error::CorruptFile { path: path.to_path_buf(), reason: reason.to_string() }
}

fn short(v: &Value) -> String {
    let s = match v {
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), |x| format!("{x:.3e}")),
        Value::Null => "-".to_string(),
        other => other.to_string(),
    };
    if s.chars().count() > 48 {
        let cut: String = s.chars().take(45).collect();
        format!("{cut}...")
    } else {
        s
    }
}

fn status(c: &CheckRecord) -> &'static str {
    match (c.passed, c.category) {
        (true, Category::ExpectedNegative) => "pass (expected negative)",
        (true, _) => "pass",
        (false, Category::Advisory) => "advisory",
        (false, _) => "FAIL",
    }
}

fn category(c: Category) -> &'static str {
    match c {
        Category::Fatal => "fatal",
        Category::Advisory => "advisory",
        Category::ExpectedNegative => "negative",
    }
}

fn table(out: &mut String, checks: &[CheckRecord]) {
    let _ = writeln!(out, "{:<34} {:<9} {:<50} {:<10} status", "check", "category", "measured", "tolerance");
    for c in checks {
        let tol = c.tolerance.map_or("-".to_string(), |t| format!("{t:.1e}"));
        let _ = writeln!(out, "{:<34} {:<9} {:<50} {:<10} {}", c.name, category(c.category), short(&c.measured), tol, status(c));
    }
}

fn run_summary(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "modes {}  n_max {}  basis dimension {}", r.mode_count, r.config.n_max, r.basis_dimension);
    table(&mut out, &r.checks);
    let s = &r.summary;
    let _ = writeln!(
        out,
        "{} checks, {} passed, {} fatal failures, {} advisory failures: {}",
        s.total,
        s.passed,
        s.fatal_failures.len(),
        s.advisory_failures.len(),
        if s.pass { "PASS" } else { "FAIL" }
    );
    out
}

/// Renders the reports found in `dir` without recomputing anything.
pub fn report(dir: &Path) -> Result<String> {
    let run_path = dir.join(REPORT_FILE);
    let sweep_path = dir.join(SWEEP_FILE);
    if run_path.exists() {
        let text = read(&run_path)?;
        let r: RunReport = serde_json::from_str(&text).map_err(|e| corrupt(&run_path, e))?;
        if r.kind != "run" {
            return Err(corrupt(&run_path, format!("kind is {:?}, expected \"run\"", r.kind)));
        }
        return Ok(run_summary(&r));
    }
    if !sweep_path.exists() {
        return Err(Error::MissingFile(run_path));
    }
    let text = read(&sweep_path)?;
    let s: SweepReport = serde_json::from_str(&text).map_err(|e| corrupt(&sweep_path, e))?;
    let csv_path = dir.join(TRENDS_FILE);
    let csv = read(&csv_path)?;
    let mut lines = csv.lines();
    match lines.next() {
        Some(h) if h == TRENDS_HEADER => {}
        Some(h) => return Err(corrupt(&csv_path, format!("header {h:?} does not match {TRENDS_HEADER:?}"))),
        None => return Err(corrupt(&csv_path, "empty file")),
    }
    let rows: Vec<&str> = lines.filter(|l| !l.is_empty()).collect();
    if rows.len() != s.values.len() {
        return Err(corrupt(&csv_path, format!("{} rows for {} sweep values", rows.len(), s.values.len())));
    }

    let mut out = String::new();
    let _ = writeln!(out, "sweep over {:?}: {} points", s.variable, s.values.len());
    let _ = writeln!(out, "{:>10} {:>6} {:>6} {:>14} {:>14} {:>12} {:>12}", "value", "pass", "fatal", "inf H", "inf H_ren", "gap", "min e^-bH");
    for (v, p) in s.values.iter().zip(&s.points) {
        let _ = writeln!(
            out,
            "{:>10} {:>6} {:>6} {:>14.6e} {:>14.6e} {:>12.4e} {:>12.4e}",
            v,
            p.summary.passed,
            p.summary.fatal_failures.len(),
            p.metrics.lambda_min_h,
            p.metrics.lambda_min_h_ren,
            p.metrics.gap,
            p.metrics.min_semigroup_entry
        );
    }
    out.push_str("trend checks\n");
    table(&mut out, &s.trend_checks);
    let _ = writeln!(out, "overall: {}", if s.summary.pass { "PASS" } else { "FAIL" });
    Ok(out)
}
