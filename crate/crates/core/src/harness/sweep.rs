//! `sweep`: one recovery and one closed-form comparison per grid cell.

use std::cmp::Ordering;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Literal, SweepFamily, SweepSpec};
use super::{finite, write_csv, write_json, RunOutcome, REPORT_SCHEMA_VERSION};
use crate::bounds::{certify_phi, combined_bound, corollary_product_bound, corollary_sum_bound, SeriesStatus};
use crate::error::{Error, Result};
use crate::hyers::{recover, DirectionChoice, RecoveryConfig};
use crate::models::{Atom, ControlFunction, FuncModel};
use crate::scalar::{parse_rational, Scalar, ScalarMode};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub schema_version: u32,
    pub family: SweepFamily,
    pub p: f64,
    pub r: Option<f64>,
    pub s: Option<f64>,
    pub theta: f64,
    pub epsilon: String,
    /// Closed-form constant at `‖x‖ = 1`; empty for excluded exponents.
    pub closed_form: Option<f64>,
    /// Combined series at `‖x‖ = 1`.
    pub series: f64,
    pub series_tail: Option<f64>,
    pub series_status: SeriesStatus,
    /// θ of the envelope certified for the noisy model.
    pub certified_theta: Option<f64>,
    pub max_recovery_error: Option<f64>,
    /// Largest `error / bound` over the sampled points.
    pub max_error_ratio: Option<f64>,
    pub bound_satisfied: bool,
    /// `ok`, `bound_violated`, `diverged` or `error: …`.
    pub status: String,
}

const SWEEP_HEADER: [&str; 16] = [
    "schema_version",
    "family",
    "p",
    "r",
    "s",
    "theta",
    "epsilon",
    "closed_form",
    "series",
    "series_tail",
    "series_status",
    "certified_theta",
    "max_recovery_error",
    "max_error_ratio",
    "bound_satisfied",
    "status",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SweepReport {
    schema_version: u32,
    subcommand: String,
    passed: bool,
    cells: Vec<SweepRow>,
}

#[derive(Debug, Clone)]
struct Cell {
    r: Option<f64>,
    s: Option<f64>,
    p: f64,
    theta: f64,
    epsilon: Literal,
}

fn sorted_f64(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn cells(spec: &SweepSpec) -> Result<Vec<Cell>> {
    let exps: Vec<(f64, Option<f64>, Option<f64>)> = match spec.family {
        SweepFamily::Sum => sorted_f64(spec.p.clone()).into_iter().map(|p| (p, None, None)).collect(),
        SweepFamily::Product => {
            let mut rs = spec.rs.clone();
            rs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            rs.dedup();
            rs.into_iter().map(|(r, s)| (r + s, Some(r), Some(s))).collect()
        }
    };
    let eps = if spec.epsilon.is_empty() { vec![Literal::from("0")] } else { spec.epsilon.clone() };
    let mut keyed = eps.into_iter().map(|e| Ok((parse_rational(&e.text())?, e))).collect::<Result<Vec<_>>>()?;
    if keyed.iter().any(|(q, _)| q < &Rational::from_integer(0.into())) {
        return Err(Error::Config("sweep epsilon must be >= 0".into()));
    }
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    keyed.dedup_by(|a, b| a.0 == b.0);
    let thetas = sorted_f64(spec.theta.clone());
    let mut out = Vec::new();
    for &(p, r, s) in &exps {
        for &theta in &thetas {
            for (_, e) in &keyed {
                out.push(Cell { r, s, p, theta, epsilon: e.clone() });
            }
        }
    }
    Ok(out)
}

fn cell_phi(family: SweepFamily, c: &Cell) -> ControlFunction<f64> {
    match family {
        SweepFamily::Sum => ControlFunction::SumOfPowers { theta: c.theta, p: c.p },
        SweepFamily::Product => {
            ControlFunction::ProductOfPowers { theta: c.theta, r: c.r.unwrap_or(0.0), s: c.s.unwrap_or(0.0) }
        }
    }
}

fn run_cell<S: Scalar>(spec: &SweepSpec, cell: &Cell) -> Result<SweepRow> {
    let t = &spec.template;
    let phi = cell_phi(spec.family, cell);
    let closed = match spec.family {
        SweepFamily::Sum => corollary_sum_bound(cell.theta, cell.p, 1.0),
        SweepFamily::Product => corollary_product_bound(cell.theta, cell.r.unwrap_or(0.0), cell.s.unwrap_or(0.0), 1.0),
    };
    let closed_form = match closed {
        Ok(v) => Some(v),
        Err(Error::ExcludedExponent { .. }) => None,
        Err(e) => return Err(e),
    };
    let choice: DirectionChoice = t.directions.into();
    let (la, lc) = choice.resolve(&phi);
    let series = combined_bound(&phi, 1.0, la, lc, t.series_tol);

    let mut f: FuncModel<S> = match &t.model {
        Some(_) => t.model()?,
        None => FuncModel::zero(t.dim, t.codim)?,
    };
    let eps: S = cell.epsilon.parse()?;
    if !eps.is_zero() {
        f.push(Atom::PowerNoise { seed: spec.noise_seed, amplitude: eps, exponent: cell.p })?;
    }
    let certified_theta = match certify_phi::<S, f64>(&f) {
        Ok(ControlFunction::SumOfPowers { theta, .. }) => Some(theta),
        Ok(ControlFunction::Constant { c }) => Some(c),
        _ => None,
    };
    let points = t.samples.points::<S>(t.dim, t.norm)?;
    let rc = RecoveryConfig { directions: choice, iteration: t.iteration, series_tol: t.series_tol };

    let mut row = SweepRow {
        schema_version: REPORT_SCHEMA_VERSION,
        family: spec.family,
        p: cell.p,
        r: cell.r,
        s: cell.s,
        theta: cell.theta,
        epsilon: cell.epsilon.text(),
        closed_form,
        series: series.partial_sum,
        series_tail: finite(series.tail_bound),
        series_status: series.status,
        certified_theta,
        max_recovery_error: None,
        max_error_ratio: None,
        bound_satisfied: false,
        status: String::new(),
    };
    match recover(&f, &points, &phi, &rc) {
        Ok(rep) => {
            row.max_recovery_error = Some(rep.max_odd_error());
            row.max_error_ratio = Some(
                rep.points
                    .iter()
                    .map(|p| {
                        if p.bound > 0.0 {
                            p.odd_error / p.bound
                        } else if p.odd_error > 0.0 {
                            f64::INFINITY
                        } else {
                            0.0
                        }
                    })
                    .fold(0.0, f64::max),
            )
            .and_then(finite);
            row.bound_satisfied = rep.all_within_bound();
            row.status = if row.bound_satisfied { "ok" } else { "bound_violated" }.into();
        }
        Err(Error::Divergent { component }) => row.status = format!("diverged: {component}"),
        Err(e) => row.status = format!("error: {e}"),
    }
    Ok(row)
}

fn sweep_with<S: Scalar>(spec: &SweepSpec, out: &Path) -> Result<RunOutcome> {
    let grid = cells(spec)?;
    let rows = grid.par_iter().map(|c| run_cell::<S>(spec, c)).collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().all(|r| r.status == "ok" || (r.closed_form.is_none() && r.status.starts_with("diverged")));
    let report = SweepReport { schema_version: REPORT_SCHEMA_VERSION, subcommand: "sweep".into(), passed, cells: rows };
    let files =
        vec![write_json(out, "sweep.json", &report)?, write_csv(out, "sweep.csv", &report.cells, &SWEEP_HEADER)?];
    let ok = report.cells.iter().filter(|r| r.status == "ok").count();
    Ok(RunOutcome { passed, files, summary: format!("sweep: {} cells, {ok} ok", report.cells.len()) })
}

/// Writes `sweep.csv` (and the same rows as `sweep.json`). Failing cells are
/// recorded and the sweep continues; cells at excluded exponents pass when
/// reported diverged.
pub fn run_sweep(spec: &SweepSpec, out: &Path) -> Result<RunOutcome> {
    match spec.template.mode {
        ScalarMode::Exact => sweep_with::<Rational>(spec, out),
        ScalarMode::Float => sweep_with::<f64>(spec, out),
    }
}
