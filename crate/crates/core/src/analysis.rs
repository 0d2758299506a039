//! Checks of the existence/uniqueness hypotheses and grid refinement studies.
//!
//! The hypotheses are: `|f| <= M` on the box
//! `D_M = [0, a] x [-R, R]^2` with `R = |g| + M0 M`, Lipschitz constants `L1`,
//! `L2` of `f` in `u` and `v` on that box, and `q = (L1 + L2) M0 < 1`. `M` is
//! supplied by the caller; `f_max`, `L1` and `L2` are estimated on a lattice and
//! are therefore lower bounds of the true suprema.

use serde::Serialize;
use thiserror::Error;

use crate::expr::EvalError;
use crate::green::{build_g, GreenError, GreenTable};
use crate::poly::Quadratic;
use crate::problem::ProblemSpec;
use crate::quadrature::{Grid, GridError};
use crate::solver::{SolveError, Solver};

pub const DEFAULT_SAMPLES: usize = 64;
pub const MIN_SAMPLES: usize = 8;
/// Grid used to evaluate `M0` inside [`check_conditions`].
pub const M0_GRID_CELLS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("f is undefined at (t, u, v) = ({t}, {u}, {v}) inside D_M: {source}")]
    Eval {
        t: f64,
        u: f64,
        v: f64,
        source: EvalError,
    },
    #[error("M must be positive and finite, got {0}")]
    InvalidBound(f64),
    #[error("need at least {MIN_SAMPLES} samples per axis, got {0}")]
    TooFewSamples(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    /// `max |g|` on `[0, a]`.
    pub g_norm: f64,
    pub m0: f64,
    /// Candidate bound `M` for `|f|`.
    pub m: f64,
    /// Radius `|g| + M0 M` of the box in `u` and `v`.
    pub bound_estimate: f64,
    pub f_max_observed: f64,
    pub l1: f64,
    pub l2: f64,
    pub q: f64,
    pub samples_per_axis: usize,
    pub pass: bool,
}

impl ConditionReport {
    /// `p_k = q^k / (1 - q)`, defined when `q < 1`.
    pub fn p(&self, k: usize) -> Option<f64> {
        (self.q < 1.0).then(|| self.q.powi(k as i32) / (1.0 - self.q))
    }

    /// A priori bound `M0 p_k d` on `|u_k - u|`, with `d = |Psi_1 - Psi_0|`.
    pub fn iteration_bound(&self, k: usize, d: f64) -> Option<f64> {
        self.p(k).map(|p| self.m0 * p * d)
    }
}

/// `max_{0 <= t <= a} |g(t)|`, exact.
pub fn g_norm(g: &Quadratic, a: f64) -> f64 {
    g.max_abs(0.0, a)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Check the hypotheses with `M0` computed on a grid of [`M0_GRID_CELLS`] cells.
pub fn check_conditions(
    spec: &ProblemSpec,
    m: f64,
    samples_per_axis: usize,
) -> Result<ConditionReport, AnalysisError> {
    let grid = Grid::new(spec.a, M0_GRID_CELLS)?;
    let table = GreenTable::new(spec, &grid)?;
    check_conditions_with(spec, &table, m, samples_per_axis)
}

/// Check the hypotheses, reusing an existing Green table for `M0`.
pub fn check_conditions_with(
    spec: &ProblemSpec,
    table: &GreenTable,
    m: f64,
    samples_per_axis: usize,
) -> Result<ConditionReport, AnalysisError> {
    if !(m.is_finite() && m > 0.0) {
        return Err(AnalysisError::InvalidBound(m));
    }
    if samples_per_axis < MIN_SAMPLES {
        return Err(AnalysisError::TooFewSamples(samples_per_axis));
    }
    let g = build_g(spec)?;
    let g_norm = g_norm(&g, spec.a);
    let m0 = table.m0()?;
    let radius = g_norm + m0 * m;
    let step = 1e-6 * radius.max(1.0);

    let ts = linspace(0.0, spec.a, samples_per_axis);
    let ys = linspace(-radius, radius, samples_per_axis);
    let f = &spec.f;
    let eval = |t: f64, u: f64, v: f64| {
        f.eval(t, u, v)
            .map_err(|source| AnalysisError::Eval { t, u, v, source })
    };

    let (mut f_max, mut l1, mut l2) = (0.0f64, 0.0f64, 0.0f64);
    for &t in &ts {
        for &u in &ys {
            for &v in &ys {
                f_max = f_max.max(eval(t, u, v)?.abs());
                let du = (eval(t, u + step, v)? - eval(t, u - step, v)?) / (2.0 * step);
                let dv = (eval(t, u, v + step)? - eval(t, u, v - step)?) / (2.0 * step);
                l1 = l1.max(du.abs());
                l2 = l2.max(dv.abs());
            }
        }
    }
    let q = (l1 + l2) * m0;
    Ok(ConditionReport {
        g_norm,
        m0,
        m,
        bound_estimate: radius,
        f_max_observed: f_max,
        l1,
        l2,
        q,
        samples_per_axis,
        pass: f_max <= m && q < 1.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub n: usize,
    pub h2: f64,
    pub iterations: Option<usize>,
    pub converged: bool,
    pub error: Option<f64>,
    /// Observed order against the previous row, when both converged.
    pub order: Option<f64>,
    /// `d = |Psi_1 - Psi_0|`.
    pub d: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    /// Whether errors are measured against the exact solution or the finest grid.
    pub reference: Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    Exact,
    FinestGrid,
}

/// Observed order `log(e_coarse / e_fine) / log(n_fine / n_coarse)`.
pub fn observed_order(n_coarse: usize, e_coarse: f64, n_fine: usize, e_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (n_fine as f64 / n_coarse as f64).ln()
}

/// Solve on every grid in `ns` (sorted ascending) and tabulate `N, h^2, K, error, order`.
///
/// Without an exact solution the finest successful grid serves as reference; a
/// coarse grid is compared at the nodes it shares with it, so its `N` must divide
/// the finest `N`.
pub fn convergence_study(
    spec: &ProblemSpec,
    ns: &[usize],
    tol: f64,
    max_iter: usize,
) -> StudyReport {
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();

    let runs: Vec<_> = ns
        .iter()
        .map(|&n| {
            Grid::new(spec.a, n)
                .map_err(SolveError::from)
                .and_then(|grid| Solver::new(spec, &grid)?.solve(tol, max_iter))
        })
        .collect();

    let reference = if spec.exact.is_some() {
        Reference::Exact
    } else {
        Reference::FinestGrid
    };
    let finest = runs
        .iter()
        .zip(&ns)
        .rev()
        .find_map(|(r, &n)| r.as_ref().ok().filter(|r| r.converged).map(|r| (n, r)));

    let mut rows: Vec<StudyRow> = Vec::with_capacity(ns.len());
    for (&n, run) in ns.iter().zip(&runs) {
        let h = spec.a / n as f64;
        let mut row = StudyRow {
            n,
            h2: h * h,
            iterations: None,
            converged: false,
            error: None,
            order: None,
            d: None,
            failure: None,
        };
        match run {
            Ok(r) => {
                row.iterations = Some(r.iterations);
                row.converged = r.converged;
                row.d = r.history.first().copied();
                row.error = match reference {
                    Reference::Exact => r.error_vs_exact,
                    Reference::FinestGrid => finest.and_then(|(nf, fine)| {
                        (nf != n && nf % n == 0).then(|| {
                            let stride = nf / n;
                            r.u.iter()
                                .enumerate()
                                .map(|(i, &x)| (x - fine.u[i * stride]).abs())
                                .fold(0.0, f64::max)
                        })
                    }),
                };
                if !r.converged {
                    row.failure = Some(format!("not converged after {} iterations", r.iterations));
                }
            }
            Err(e) => row.failure = Some(e.to_string()),
        }
        if let Some(prev) = rows.last() {
            if prev.converged && row.converged {
                if let (Some(e0), Some(e1)) = (prev.error, row.error) {
                    if e0 > 0.0 && e1 > 0.0 {
                        row.order = Some(observed_order(prev.n, e0, n, e1));
                    }
                }
            }
        }
        rows.push(row);
    }
    StudyReport { rows, reference }
}
