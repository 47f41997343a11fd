//! Table and summary writers. Numbers are printed with a fixed number of
//! decimals so reruns are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ConfigFile, GridPoint, SimulationPlan};
use super::CliError;
use crate::calibration::CalibrationReport;
use crate::engine::{Estimate, HminComparison, ScenarioReport};

pub const GRID_HEADER: [&str; 14] = [
    "d",
    "t",
    "gamma",
    "lambda",
    "power_diff",
    "type1_diff",
    "mean_saved",
    "bias",
    "ci_length",
    "power_diff_se",
    "type1_diff_se",
    "mean_saved_se",
    "bias_se",
    "ci_length_se",
];

pub fn fmt(x: f64) -> String {
    format!("{x:.6}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), CliError> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Serialize(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

/// The config with every override applied, as TOML.
pub fn config_echo(file: &ConfigFile) -> Result<String, CliError> {
    toml::to_string(file).map_err(|e| CliError::Serialize(e.to_string()))
}

fn write_echo(dir: &Path, file: &ConfigFile) -> Result<PathBuf, CliError> {
    let path = dir.join("config_echo.toml");
    write_text(&path, &config_echo(file)?)?;
    Ok(path)
}

/// One row per grid point. Control bias and saved patients depend only on
/// control data, which both hypotheses share; the interval length is taken
/// from the alternative when it was simulated.
pub fn grid_rows(plan: &SimulationPlan, reports: &[ScenarioReport]) -> Vec<Vec<String>> {
    plan.points
        .iter()
        .map(|p| {
            let null = p.null.map(|i| &reports[i]);
            let alt = p.alternative.map(|i| &reports[i]);
            let any = alt.or(null).expect("grid point without scenarios");
            let diff = |r: Option<&ScenarioReport>| r.and_then(|r| r.rejection_diff);
            let ci = alt
                .and_then(|r| r.design.mean_ci_length)
                .or(any.design.mean_ci_length);
            vec![
                fmt(p.drift),
                fmt(p.t),
                fmt(p.gamma),
                fmt(p.lambda),
                fmt_opt(diff(alt).map(|e| e.value)),
                fmt_opt(diff(null).map(|e| e.value)),
                fmt(any.design.mean_saved.value),
                fmt(any.design.mean_bias_control.value),
                fmt_opt(ci.map(|e| e.value)),
                fmt_opt(diff(alt).map(|e| e.se)),
                fmt_opt(diff(null).map(|e| e.se)),
                fmt(any.design.mean_saved.se),
                fmt(any.design.mean_bias_control.se),
                fmt_opt(ci.map(|e| e.se)),
            ]
        })
        .collect()
}

const SCENARIO_HEADER: [&str; 24] = [
    "index",
    "hypothesis",
    "d",
    "t",
    "gamma",
    "lambda",
    "theta_control",
    "theta_treatment",
    "h_min",
    "rejection_rate",
    "rejection_rate_se",
    "comparator_rate",
    "comparator_rate_se",
    "rejection_diff",
    "rejection_diff_se",
    "mean_saved",
    "mean_saved_se",
    "bias_delta",
    "bias_delta_se",
    "bias_control",
    "bias_control_se",
    "ci_length",
    "ci_length_se",
    "mean_enrolled",
];

fn scenario_rows(plan: &SimulationPlan, reports: &[ScenarioReport]) -> Vec<Vec<String>> {
    let mut owner: Vec<Option<&GridPoint>> = vec![None; plan.scenarios.len()];
    for p in &plan.points {
        for i in [p.null, p.alternative].into_iter().flatten() {
            owner[i] = Some(p);
        }
    }
    plan.scenarios
        .iter()
        .zip(reports)
        .enumerate()
        .map(|(i, (s, r))| {
            let p = owner[i].expect("scenario outside the grid");
            let scale = s.model.reporting_scale();
            let e = |x: Option<Estimate>| (fmt_opt(x.map(|e| e.value)), fmt_opt(x.map(|e| e.se)));
            let (cr, cr_se) = e(r.comparator.as_ref().map(|c| c.rejection_rate));
            let (rd, rd_se) = e(r.rejection_diff);
            let (ci, ci_se) = e(r.design.mean_ci_length);
            vec![
                i.to_string(),
                s.hypothesis.name().to_string(),
                fmt(p.drift),
                fmt(p.t),
                fmt(p.gamma),
                fmt(p.lambda),
                fmt(s.theta_control * scale),
                fmt(s.theta_treatment * scale),
                fmt(r.h_min),
                fmt(r.design.rejection_rate.value),
                fmt(r.design.rejection_rate.se),
                cr,
                cr_se,
                rd,
                rd_se,
                fmt(r.design.mean_saved.value),
                fmt(r.design.mean_saved.se),
                fmt(r.design.mean_bias_delta.value),
                fmt(r.design.mean_bias_delta.se),
                fmt(r.design.mean_bias_control.value),
                fmt(r.design.mean_bias_control.se),
                ci,
                ci_se,
                fmt(r.design.mean_enrolled.value),
            ]
        })
        .collect()
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    config: &'a ConfigFile,
    scenarios: Vec<ScenarioSummary<'a>>,
}

#[derive(Serialize)]
struct ScenarioSummary<'a> {
    index: usize,
    hypothesis: &'static str,
    drift: f64,
    t: f64,
    gamma: f64,
    lambda: f64,
    report: &'a ScenarioReport,
}

pub fn emit_simulation(
    dir: &Path,
    file: &ConfigFile,
    plan: &SimulationPlan,
    reports: &[ScenarioReport],
) -> Result<Vec<PathBuf>, CliError> {
    let grid = dir.join("grid.csv");
    write_csv(&grid, &GRID_HEADER, &grid_rows(plan, reports))?;
    let scen = dir.join("scenarios.csv");
    write_csv(&scen, &SCENARIO_HEADER, &scenario_rows(plan, reports))?;
    let mut summaries = Vec::new();
    for p in &plan.points {
        for i in [p.null, p.alternative].into_iter().flatten() {
            summaries.push(ScenarioSummary {
                index: i,
                hypothesis: plan.scenarios[i].hypothesis.name(),
                drift: p.drift,
                t: p.t,
                gamma: p.gamma,
                lambda: p.lambda,
                report: &reports[i],
            });
        }
    }
    let summary = dir.join("summary.json");
    write_json(
        &summary,
        &SimulationSummary {
            config: file,
            scenarios: summaries,
        },
    )?;
    Ok(vec![grid, scen, summary, write_echo(dir, file)?])
}

#[derive(Serialize)]
struct CalibrationSummary<'a> {
    config: &'a ConfigFile,
    report: &'a CalibrationReport,
}

pub fn emit_calibration(
    dir: &Path,
    file: &ConfigFile,
    report: &CalibrationReport,
) -> Result<Vec<PathBuf>, CliError> {
    let cells = dir.join("calibration.csv");
    let rows: Vec<Vec<String>> = report
        .cells
        .iter()
        .map(|c| {
            vec![
                fmt(c.t),
                fmt(c.gamma),
                fmt(c.borrowing_prob.value),
                fmt(c.borrowing_prob.se),
                fmt(c.mean_saved_at_null.value),
                fmt(c.mean_saved_at_null.se),
                c.admissible.to_string(),
            ]
        })
        .collect();
    write_csv(
        &cells,
        &[
            "t",
            "gamma",
            "borrowing_prob",
            "borrowing_prob_se",
            "mean_saved",
            "mean_saved_se",
            "admissible",
        ],
        &rows,
    )?;

    // drifts as rows, (γ, t) cells as columns, mean saved as the last row
    let table = dir.join("borrowing_table.csv");
    let labels: Vec<String> = report
        .cells
        .iter()
        .map(|c| format!("gamma={}_t={}", c.gamma, c.t))
        .collect();
    let mut header = vec!["drift"];
    header.extend(labels.iter().map(String::as_str));
    let mut rows: Vec<Vec<String>> = report
        .table
        .iter()
        .map(|r| {
            std::iter::once(fmt(r.drift))
                .chain(r.probs.iter().map(|e| fmt(e.value)))
                .collect()
        })
        .collect();
    rows.push(
        std::iter::once("mean_saved".to_string())
            .chain(report.cells.iter().map(|c| fmt(c.mean_saved_at_null.value)))
            .collect(),
    );
    write_csv(&table, &header, &rows)?;

    let summary = dir.join("summary.json");
    write_json(
        &summary,
        &CalibrationSummary {
            config: file,
            report,
        },
    )?;
    Ok(vec![cells, table, summary, write_echo(dir, file)?])
}

pub fn emit_comparison(
    dir: &Path,
    file: &ConfigFile,
    rows: &[(GridPoint, HminComparison)],
) -> Result<Vec<PathBuf>, CliError> {
    let path = dir.join("hmin_compare.csv");
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(p, c)| {
            vec![
                fmt(p.drift),
                fmt(p.t),
                fmt(p.gamma),
                fmt(p.lambda),
                fmt(c.h_min_exact),
                fmt(c.h_min_approx),
                c.replications.to_string(),
                c.mismatches.to_string(),
                fmt(c.max_abs_h_star_diff),
            ]
        })
        .collect();
    write_csv(
        &path,
        &[
            "d",
            "t",
            "gamma",
            "lambda",
            "h_min_exact",
            "h_min_approx",
            "replications",
            "mismatches",
            "max_abs_h_star_diff",
        ],
        &body,
    )?;
    Ok(vec![path, write_echo(dir, file)?])
}
