//! Discrete fixed-point iteration on the right-hand side `psi = u'''`.
//!
//! Starting from `Psi_0(t_i) = f(t_i, 0, 0)`, each sweep forms
//!
//! ```text
//! U(t_i) = g(t_i)  + h sum_j rho_j G(t_i,  s_j) Psi(s_j)
//! V(t_i) = g(xi_i) + h sum_j rho_j G(xi_i, s_j) Psi(s_j)
//! Psi'(t_i) = f(t_i, U(t_i), V(t_i))
//! ```
//!
//! and stops once `max_i |Psi' - Psi| <= tol`.

use serde::Serialize;
use thiserror::Error;

use crate::expr::EvalError;
use crate::green::{build_g, GreenError, GreenTable};
use crate::poly::Quadratic;
use crate::problem::ProblemSpec;
use crate::quadrature::{Grid, GridError};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1000;
/// `max |Psi|` beyond which the iteration is declared divergent.
pub const DIVERGENCE_BOUND: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("cannot evaluate f at t = {t}, u = {u}, v = {v}: {source}")]
    Eval {
        t: f64,
        u: f64,
        v: f64,
        source: EvalError,
    },
    #[error("iteration diverged at step {k}: max |Psi| = {norm:e}")]
    Divergence { k: usize, norm: f64 },
    #[error("tolerance must be positive and max_iter at least 1")]
    InvalidSettings,
}

/// `Psi_k` together with the `U_k`, `V_k` it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub k: usize,
    pub psi: Vec<f64>,
    /// Empty until the first step.
    pub u: Vec<f64>,
    /// Empty until the first step.
    pub v: Vec<f64>,
    /// `max_i |Psi_k - Psi_{k-1}|`; infinite at `k = 0`.
    pub residual: f64,
}

/// Whether the existence and uniqueness hypotheses were checked for this run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypotheses {
    Unverified,
    Satisfied,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    /// Number of sweeps performed, `K`.
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub nodes: Vec<f64>,
    /// `U_K`, computed from `Psi_K`.
    pub u: Vec<f64>,
    /// `Psi_K`.
    pub psi: Vec<f64>,
    /// `max_i |U_K(t_i) - u(t_i)|` when the exact solution is known.
    pub error_vs_exact: Option<f64>,
    /// Residual after each sweep; `history[0]` is `d = |Psi_1 - Psi_0|`.
    pub history: Vec<f64>,
    pub hypotheses: Hypotheses,
}

/// Everything a sweep needs: cached Green matrices, `g` and the grid.
#[derive(Debug, Clone)]
pub struct Solver {
    table: GreenTable,
    g: Quadratic,
    g_nodes: Vec<f64>,
    g_delays: Vec<f64>,
}

impl Solver {
    pub fn new(spec: &ProblemSpec, grid: &Grid) -> Result<Solver, SolveError> {
        let g = build_g(spec)?;
        let table = GreenTable::new(spec, grid)?;
        Ok(Self::from_parts(table, g))
    }

    pub fn from_parts(table: GreenTable, g: Quadratic) -> Solver {
        let g_nodes = table.grid().nodes().iter().map(|&t| g.eval(t)).collect();
        let g_delays = table.delays().iter().map(|&x| g.eval(x)).collect();
        Solver {
            table,
            g,
            g_nodes,
            g_delays,
        }
    }

    pub fn table(&self) -> &GreenTable {
        &self.table
    }

    pub fn boundary_polynomial(&self) -> &Quadratic {
        &self.g
    }

    pub fn grid(&self) -> &Grid {
        self.table.grid()
    }

    fn eval_f(&self, t: f64, u: f64, v: f64) -> Result<f64, SolveError> {
        self.table
            .spec()
            .f
            .eval(t, u, v)
            .map_err(|source| SolveError::Eval { t, u, v, source })
    }

    /// `Psi_0(t_i) = f(t_i, 0, 0)`.
    pub fn initialize(&self) -> Result<IterationState, SolveError> {
        let psi = self
            .grid()
            .nodes()
            .iter()
            .map(|&t| self.eval_f(t, 0.0, 0.0))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IterationState {
            k: 0,
            psi,
            u: Vec::new(),
            v: Vec::new(),
            residual: f64::INFINITY,
        })
    }

    /// `(U, V)` induced by `psi`.
    pub fn potentials(&self, psi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let grid = self.grid();
        let n = psi.len();
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            u.push(self.g_nodes[i] + grid.weighted_sum_unchecked(self.table.row_at_node(i), psi));
            v.push(self.g_delays[i] + grid.weighted_sum_unchecked(self.table.row_at_delay(i), psi));
        }
        (u, v)
    }

    /// One sweep: `Psi_{k+1} = f(t, U_k, V_k)`. The returned state carries the
    /// `U_{k+1}`, `V_{k+1}` induced by the new `Psi`.
    pub fn step(&self, state: &IterationState) -> Result<IterationState, SolveError> {
        let (u, v) = if state.u.is_empty() {
            self.potentials(&state.psi)
        } else {
            (state.u.clone(), state.v.clone())
        };
        let nodes = self.grid().nodes();
        let mut psi = Vec::with_capacity(nodes.len());
        let mut residual = 0.0f64;
        let mut norm = 0.0f64;
        for (i, &t) in nodes.iter().enumerate() {
            let next = match self.eval_f(t, u[i], v[i]) {
                Ok(x) => x,
                Err(SolveError::Eval {
                    source: EvalError::NonFinite,
                    ..
                }) => {
                    return Err(SolveError::Divergence {
                        k: state.k + 1,
                        norm: f64::INFINITY,
                    })
                }
                Err(e) => return Err(e),
            };
            residual = residual.max((next - state.psi[i]).abs());
            norm = norm.max(next.abs());
            psi.push(next);
        }
        if !(norm <= DIVERGENCE_BOUND) {
            return Err(SolveError::Divergence {
                k: state.k + 1,
                norm,
            });
        }
        let (u, v) = self.potentials(&psi);
        Ok(IterationState {
            k: state.k + 1,
            psi,
            u,
            v,
            residual,
        })
    }

    /// Sweep until the residual drops to `tol` or `max_iter` sweeps have run.
    pub fn solve(&self, tol: f64, max_iter: usize) -> Result<SolveReport, SolveError> {
        if !(tol > 0.0) || max_iter == 0 {
            return Err(SolveError::InvalidSettings);
        }
        let mut state = self.initialize()?;
        let mut history = Vec::new();
        while state.k < max_iter {
            state = self.step(&state)?;
            history.push(state.residual);
            if state.residual <= tol {
                break;
            }
        }
        let error_vs_exact = match &self.table.spec().exact {
            Some(exact) => {
                let mut worst = 0.0f64;
                for (&t, &u) in self.grid().nodes().iter().zip(&state.u) {
                    let want = exact.eval_t(t).map_err(|source| SolveError::Eval {
                        t,
                        u,
                        v: f64::NAN,
                        source,
                    })?;
                    worst = worst.max((u - want).abs());
                }
                Some(worst)
            }
            None => None,
        };
        Ok(SolveReport {
            iterations: state.k,
            converged: state.residual <= tol,
            final_residual: state.residual,
            nodes: self.grid().nodes().to_vec(),
            u: state.u,
            psi: state.psi,
            error_vs_exact,
            history,
            hypotheses: Hypotheses::Unverified,
        })
    }
}

/// Build the tables for `spec` on `grid` and iterate to `tol`.
pub fn solve(
    spec: &ProblemSpec,
    grid: &Grid,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport, SolveError> {
    Solver::new(spec, grid)?.solve(tol, max_iter)
}
