//! `recover`: additive and cubic recovery at the sampled points.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, PhiSpec};
use super::{join_literals, write_csv, write_json, RunOutcome, REPORT_SCHEMA_VERSION};
use crate::bounds::certify_phi;
use crate::error::Result;
use crate::hyers::{recover, Direction, PointRecovery, RecoveryConfig, RecoveryReport, TraceSummary};
use crate::models::{ControlFunction, FuncModel};
use crate::scalar::{Scalar, ScalarMode};
use crate::Rational;

pub fn resolve_phi<S: Scalar>(spec: &PhiSpec, f: &FuncModel<S>) -> Result<ControlFunction<f64>> {
    match spec {
        PhiSpec::Keyword(_) => certify_phi(f),
        PhiSpec::Explicit(phi) => Ok(*phi),
    }
}

/// Builds the model, φ and sample points from `cfg` and runs the recovery.
pub fn recover_from_config<S: Scalar>(cfg: &ExperimentConfig) -> Result<RecoveryReport<S>> {
    let f = cfg.model::<S>()?;
    let phi = resolve_phi(&cfg.phi, &f)?;
    let points = cfg.samples.points::<S>(cfg.dim, cfg.norm)?;
    let rc = RecoveryConfig { directions: cfg.directions.into(), iteration: cfg.iteration, series_tol: cfg.series_tol };
    recover(&f, &points, &phi, &rc)
}

/// One point of `recover.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRow {
    pub schema_version: u32,
    pub index: usize,
    pub x: String,
    pub additive: String,
    pub cubic: String,
    pub odd_error: f64,
    pub raw_error: f64,
    pub bound: f64,
    pub additive_limit_error: f64,
    pub additive_limit_bound: f64,
    pub cubic_limit_error: f64,
    pub cubic_limit_bound: f64,
    pub additive_converged: bool,
    pub cubic_converged: bool,
    pub within_bound: bool,
}

const RECOVERY_HEADER: [&str; 15] = [
    "schema_version",
    "index",
    "x",
    "additive",
    "cubic",
    "odd_error",
    "raw_error",
    "bound",
    "additive_limit_error",
    "additive_limit_bound",
    "cubic_limit_error",
    "cubic_limit_bound",
    "additive_converged",
    "cubic_converged",
    "within_bound",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PointJson {
    x: Vec<String>,
    additive: Vec<String>,
    cubic: Vec<String>,
    odd_error: f64,
    raw_error: f64,
    bound: f64,
    additive_limit_error: f64,
    additive_limit_bound: f64,
    cubic_limit_error: f64,
    cubic_limit_bound: f64,
    additive_trace: TraceSummary,
    cubic_trace: TraceSummary,
    within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RecoveryJson {
    schema_version: u32,
    subcommand: String,
    mode: ScalarMode,
    phi: ControlFunction<f64>,
    direction_additive: Direction,
    direction_cubic: Direction,
    passed: bool,
    max_odd_error: f64,
    points: Vec<PointJson>,
}

fn row<S: Scalar>(index: usize, p: &PointRecovery<S>) -> RecoveryRow {
    RecoveryRow {
        schema_version: REPORT_SCHEMA_VERSION,
        index,
        x: join_literals(&p.x.literals()),
        additive: join_literals(&p.additive.literals()),
        cubic: join_literals(&p.cubic.literals()),
        odd_error: p.odd_error,
        raw_error: p.raw_error,
        bound: p.bound,
        additive_limit_error: p.additive_limit_error,
        additive_limit_bound: p.additive_limit_bound,
        cubic_limit_error: p.cubic_limit_error,
        cubic_limit_bound: p.cubic_limit_bound,
        additive_converged: p.additive_trace.converged,
        cubic_converged: p.cubic_trace.converged,
        within_bound: p.within_bound(),
    }
}

fn json<S: Scalar>(report: &RecoveryReport<S>) -> RecoveryJson {
    RecoveryJson {
        schema_version: REPORT_SCHEMA_VERSION,
        subcommand: "recover".into(),
        mode: S::MODE,
        phi: report.phi,
        direction_additive: report.direction_additive,
        direction_cubic: report.direction_cubic,
        passed: report.all_within_bound(),
        max_odd_error: report.max_odd_error(),
        points: report
            .points
            .iter()
            .map(|p| PointJson {
                x: p.x.literals(),
                additive: p.additive.literals(),
                cubic: p.cubic.literals(),
                odd_error: p.odd_error,
                raw_error: p.raw_error,
                bound: p.bound,
                additive_limit_error: p.additive_limit_error,
                additive_limit_bound: p.additive_limit_bound,
                cubic_limit_error: p.cubic_limit_error,
                cubic_limit_bound: p.cubic_limit_bound,
                additive_trace: p.additive_trace,
                cubic_trace: p.cubic_trace,
                within_bound: p.within_bound(),
            })
            .collect(),
    }
}

fn recover_with<S: Scalar>(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let report = recover_from_config::<S>(cfg)?;
    let rows: Vec<_> = report.points.iter().enumerate().map(|(i, p)| row(i, p)).collect();
    let doc = json(&report);
    let files = vec![write_json(out, "recover.json", &doc)?, write_csv(out, "recover.csv", &rows, &RECOVERY_HEADER)?];
    let failing = rows.iter().filter(|r| !r.within_bound).count();
    Ok(RunOutcome {
        passed: doc.passed,
        files,
        summary: format!(
            "recover: {} points, max odd error {:e}, {failing} outside the bound",
            rows.len(),
            doc.max_odd_error
        ),
    })
}

/// Writes `recover.json` and `recover.csv`; passes iff every point is within
/// its certified bounds.
pub fn run_recover(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    match cfg.mode {
        ScalarMode::Exact => recover_with::<Rational>(cfg, out),
        ScalarMode::Float => recover_with::<f64>(cfg, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_row_fields() {
        let r = RecoveryRow {
            schema_version: 1,
            index: 0,
            x: String::new(),
            additive: String::new(),
            cubic: String::new(),
            odd_error: 0.0,
            raw_error: 0.0,
            bound: 0.0,
            additive_limit_error: 0.0,
            additive_limit_bound: 0.0,
            cubic_limit_error: 0.0,
            cubic_limit_bound: 0.0,
            additive_converged: true,
            cubic_converged: true,
            within_bound: true,
        };
        let mut w = csv::Writer::from_writer(vec![]);
        w.serialize(&r).unwrap();
        let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
        assert_eq!(text.lines().next().unwrap(), RECOVERY_HEADER.join(","));
    }
}
