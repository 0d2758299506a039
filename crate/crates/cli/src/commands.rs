use std::io::{self, Write};
use std::path::{Path, PathBuf};

use greenfde::analysis::{AnalysisError, DEFAULT_SAMPLES};
use greenfde::solver::SolveError;
use greenfde::{check_conditions, convergence_study, ConditionReport, Grid, Hypotheses, SolveReport, Solver, StudyReport};
use serde::Serialize;
use thiserror::Error;

use crate::config::{self, ConfigError};
use crate::format;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Solve(_) | CliError::Analysis(_) => 2,
        }
    }
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Non-convergence or failed hypotheses; outputs were still written.
    NumericalFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::NumericalFailure => 2,
        }
    }

    fn from_ok(ok: bool) -> Status {
        if ok {
            Status::Success
        } else {
            Status::NumericalFailure
        }
    }
}

pub(crate) fn load(path: &Path) -> Result<config::LoadedConfig, CliError> {
    config::load(path).map_err(|source| CliError::Config { path: path.display().to_string(), source })
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io { path: "<stdout>".into(), source }
}

/// JSON document written next to a solution curve.
#[derive(Serialize)]
pub struct SolveDocument<'a> {
    #[serde(rename = "N")]
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    #[serde(flatten)]
    pub report: &'a SolveReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<&'a ConditionReport>,
}

/// `t,U` columns, plus `exact,abs_diff` when an exact solution is known.
pub fn solution_csv(report: &SolveReport, exact: Option<&greenfde::Expr>) -> String {
    let mut csv = String::from(if exact.is_some() { "t,U,exact,abs_diff\n" } else { "t,U\n" });
    for (&t, &u) in report.nodes.iter().zip(&report.u) {
        csv.push_str(&format::dump(t));
        csv.push(',');
        csv.push_str(&format::dump(u));
        if let Some(e) = exact {
            let x = e.eval_t(t).unwrap_or(f64::NAN);
            csv.push(',');
            csv.push_str(&format::dump(x));
            csv.push(',');
            csv.push_str(&format::dump((u - x).abs()));
        }
        csv.push('\n');
    }
    csv
}

/// `N,h2,K,error,order` with empty cells where a value is unavailable.
pub fn study_csv(report: &StudyReport) -> String {
    let mut csv = String::from("N,h2,K,error,order\n");
    for row in &report.rows {
        let opt = |x: Option<f64>| x.map(format::table).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.n,
            format::table(row.h2),
            row.iterations.map(|k| k.to_string()).unwrap_or_default(),
            opt(row.error),
            opt(row.order),
        ));
    }
    csv
}

pub fn solve(config: &Path, output: Option<&Path>, out: &mut dyn Write) -> Result<Status, CliError> {
    let loaded = load(config)?;
    let cfg = &loaded.config;
    let grid = Grid::new(loaded.spec.a, cfg.n).map_err(SolveError::from)?;
    let solver = Solver::new(&loaded.spec, &grid)?;
    let mut report = solver.solve(cfg.tol, cfg.max_iter)?;

    let conditions = match cfg.m {
        Some(m) => match check_conditions(&loaded.spec, m, DEFAULT_SAMPLES) {
            Ok(c) => {
                report.hypotheses = if c.pass { Hypotheses::Satisfied } else { Hypotheses::Violated };
                Some(c)
            }
            Err(e) => {
                eprintln!("warning: hypotheses not checked: {e}");
                None
            }
        },
        None => None,
    };

    let csv_path = match output {
        Some(p) => p.to_path_buf(),
        None => default_output(config, "solution.csv"),
    };
    let json_path = csv_path.with_extension("report.json");
    write_file(&csv_path, &solution_csv(&report, loaded.spec.exact.as_ref()))?;
    let doc = SolveDocument {
        n: cfg.n,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        report: &report,
        conditions: conditions.as_ref(),
    };
    write_file(&json_path, &(serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"))?;

    let error = report.error_vs_exact.map(format::table).unwrap_or_else(|| "n/a".into());
    writeln!(
        out,
        "K={} error={} residual={} converged={} hypotheses={}",
        report.iterations,
        error,
        format::table(report.final_residual),
        report.converged,
        serde_json::to_value(report.hypotheses).expect("serializes").as_str().unwrap_or_default(),
    )
    .map_err(stdout_err)?;
    writeln!(out, "wrote {} and {}", csv_path.display(), json_path.display()).map_err(stdout_err)?;
    Ok(Status::from_ok(report.converged))
}

/// `<stem>_<suffix>` in the current directory.
fn default_output(config: &Path, suffix: &str) -> PathBuf {
    let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("problem");
    PathBuf::from(format!("{stem}_{suffix}"))
}

pub fn condition_text(r: &ConditionReport) -> String {
    let rows = [
        ("g_norm", format::table(r.g_norm)),
        ("M0", format::table(r.m0)),
        ("M", format::table(r.m)),
        ("bound_estimate", format::table(r.bound_estimate)),
        ("f_max_observed", format::table(r.f_max_observed)),
        ("L1", format::table(r.l1)),
        ("L2", format::table(r.l2)),
        ("q", format::table(r.q)),
        ("samples_per_axis", r.samples_per_axis.to_string()),
        ("pass", r.pass.to_string()),
    ];
    rows.iter().map(|(k, v)| format!("{k:<16}  {v}\n")).collect()
}

pub fn check(config: &Path, m: Option<f64>, samples: Option<usize>, out: &mut dyn Write) -> Result<Status, CliError> {
    let loaded = load(config)?;
    let m = m
        .or(loaded.config.m)
        .ok_or_else(|| CliError::Usage("no bound M given: pass --M or set \"M\" in the config".into()))?;
    let report = check_conditions(&loaded.spec, m, samples.unwrap_or(DEFAULT_SAMPLES))?;
    write!(out, "{}", condition_text(&report)).map_err(stdout_err)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes")).map_err(stdout_err)?;
    Ok(Status::from_ok(report.pass))
}

pub fn study(config: &Path, grids: &[usize], output: Option<&Path>, out: &mut dyn Write) -> Result<Status, CliError> {
    let loaded = load(config)?;
    if grids.is_empty() {
        return Err(CliError::Usage("--grids needs at least one N".into()));
    }
    if let Some(&n) = grids.iter().find(|&&n| n < 2) {
        return Err(CliError::Usage(format!("grid sizes must be at least 2, got {n}")));
    }
    let report = convergence_study(&loaded.spec, grids, loaded.config.tol, loaded.config.max_iter);
    let csv = study_csv(&report);
    match output {
        Some(path) => {
            write_file(path, &csv)?;
            writeln!(out, "wrote {}", path.display()).map_err(stdout_err)?;
        }
        None => out.write_all(csv.as_bytes()).map_err(stdout_err)?,
    }
    for row in &report.rows {
        if let Some(why) = &row.failure {
            eprintln!("N={}: {why}", row.n);
        }
    }
    Ok(Status::from_ok(report.rows.iter().all(|r| r.converged)))
}
