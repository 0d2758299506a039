//! Re-run the bundled problems and compare against published reference values.

use std::io::Write;
use std::path::Path;

use greenfde::{convergence_study, Grid, Solver};

use crate::commands::{solution_csv, study_csv, write_file, CliError, Status};
use crate::config::{self, LoadedConfig};
use crate::format;

/// Published error values are matched within this factor either way.
pub const ERROR_FACTOR: f64 = 2.0;

/// One reference row: grid size, iteration count and, when published, the error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expected {
    pub n: usize,
    pub iterations: usize,
    pub error: Option<f64>,
}

const fn row(n: usize, iterations: usize, error: Option<f64>) -> Expected {
    Expected { n, iterations, error }
}

#[derive(Debug, Clone, Copy)]
pub struct Case {
    pub name: &'static str,
    pub config: &'static str,
    pub expected: &'static [Expected],
    /// Also write the solution curve at the config's `N`.
    pub curve: bool,
}

pub const CASES: &[Case] = &[
    Case {
        name: "example1",
        config: include_str!("../problems/example1.json"),
        expected: &[
            row(50, 3, Some(6.1899e-05)),
            row(100, 3, Some(1.5475e-05)),
            row(150, 3, Some(6.877e-06)),
            row(200, 3, Some(3.8688e-06)),
            row(300, 3, Some(1.7195e-06)),
            row(400, 3, Some(9.6721e-07)),
            row(500, 3, Some(6.1901e-07)),
            row(800, 3, Some(6.1901e-07)),
            row(1000, 3, Some(1.5475e-07)),
        ],
        curve: false,
    },
    Case {
        name: "example2",
        config: include_str!("../problems/example2.json"),
        expected: &[row(50, 8, None), row(100, 8, None), row(500, 8, None), row(1000, 8, None)],
        curve: true,
    },
    Case {
        name: "example3",
        config: include_str!("../problems/example3.json"),
        expected: &[
            row(50, 25, Some(1.4455e-04)),
            row(100, 25, Some(3.6142e-05)),
            row(150, 25, Some(1.6063e-05)),
            row(200, 25, Some(9.0345e-06)),
            row(300, 25, Some(4.0155e-06)),
            row(400, 25, Some(2.2587e-06)),
            row(500, 25, Some(1.4456e-06)),
            row(800, 25, Some(5.6467e-07)),
            row(1000, 25, Some(3.6139e-07)),
        ],
        curve: false,
    },
    Case {
        name: "remark1",
        config: include_str!("../problems/remark1.json"),
        expected: &[row(100, 15, None)],
        curve: false,
    },
    Case {
        name: "remark2",
        config: include_str!("../problems/remark2.json"),
        expected: &[row(100, 16, None)],
        curve: false,
    },
];

pub fn bundled(name: &str) -> Option<LoadedConfig> {
    CASES
        .iter()
        .find(|c| c.name == name)
        .map(|c| config::load_str(c.config).expect("bundled config is valid"))
}

/// One line of the comparison summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub case: &'static str,
    pub n: usize,
    pub iterations: Option<usize>,
    pub expected_iterations: usize,
    pub error: Option<f64>,
    pub expected_error: Option<f64>,
    pub status: String,
}

impl SummaryRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

pub fn run_case(case: &Case) -> (LoadedConfig, greenfde::StudyReport, Vec<SummaryRow>) {
    let loaded = config::load_str(case.config).expect("bundled config is valid");
    let ns: Vec<usize> = case.expected.iter().map(|e| e.n).collect();
    let study = convergence_study(&loaded.spec, &ns, loaded.config.tol, loaded.config.max_iter);
    let rows = case
        .expected
        .iter()
        .map(|exp| {
            let got = study.rows.iter().find(|r| r.n == exp.n).expect("one row per N");
            // errors are only comparable when measured against the exact solution
            let error = if loaded.spec.exact.is_some() { got.error } else { None };
            let status = if let Some(why) = &got.failure {
                why.clone()
            } else if got.iterations != Some(exp.iterations) {
                "K mismatch".to_string()
            } else {
                match (exp.error, error) {
                    (Some(want), Some(have)) if !(have <= want * ERROR_FACTOR && have >= want / ERROR_FACTOR) => {
                        "error mismatch".to_string()
                    }
                    (Some(_), None) => "error missing".to_string(),
                    _ => "ok".to_string(),
                }
            };
            SummaryRow {
                case: case.name,
                n: exp.n,
                iterations: got.iterations,
                expected_iterations: exp.iterations,
                error,
                expected_error: exp.error,
                status,
            }
        })
        .collect();
    (loaded, study, rows)
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let opt = |x: Option<f64>| x.map(format::table).unwrap_or_default();
    let mut csv = String::from("case,N,K,expected_K,error,expected_error,status\n");
    for r in rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.case,
            r.n,
            r.iterations.map(|k| k.to_string()).unwrap_or_default(),
            r.expected_iterations,
            opt(r.error),
            opt(r.expected_error),
            r.status.replace(',', ";"),
        ));
    }
    csv
}

pub fn reproduce(dir: &Path, out: &mut dyn Write) -> Result<Status, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    let mut summary = Vec::new();
    for case in CASES {
        let (loaded, study, rows) = run_case(case);
        write_file(&dir.join(format!("{}_study.csv", case.name)), &study_csv(&study))?;
        let json = serde_json::to_string_pretty(&study).expect("report serializes") + "\n";
        write_file(&dir.join(format!("{}_study.json", case.name)), &json)?;
        if case.curve {
            let grid = Grid::new(loaded.spec.a, loaded.config.n).map_err(greenfde::solver::SolveError::from)?;
            let report = Solver::new(&loaded.spec, &grid)?.solve(loaded.config.tol, loaded.config.max_iter)?;
            write_file(
                &dir.join(format!("{}_solution.csv", case.name)),
                &solution_csv(&report, loaded.spec.exact.as_ref()),
            )?;
        }
        summary.extend(rows);
    }
    let csv = summary_csv(&summary);
    write_file(&dir.join("summary.csv"), &csv)?;

    let io = |source| CliError::Io { path: "<stdout>".into(), source };
    writeln!(out, "{:<9} {:>5} {:>3} {:>5} {:>12} {:>12}  status", "case", "N", "K", "K_ref", "error", "error_ref")
        .map_err(io)?;
    for r in &summary {
        let opt = |x: Option<f64>| x.map(format::table).unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{:<9} {:>5} {:>3} {:>5} {:>12} {:>12}  {}",
            r.case,
            r.n,
            r.iterations.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
            r.expected_iterations,
            opt(r.error),
            opt(r.expected_error),
            r.status,
        )
        .map_err(io)?;
    }
    let mismatches = summary.iter().filter(|r| !r.ok()).count();
    writeln!(out, "{} of {} rows match; outputs in {}", summary.len() - mismatches, summary.len(), dir.display())
        .map_err(io)?;
    Ok(if mismatches == 0 { Status::Success } else { Status::NumericalFailure })
}
