//! The boundary value problem `u''' = f(t, u(t), u(phi(t)))` on `[0, a]`.

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::poly::Quadratic;
use crate::quadrature::Grid;

/// Number of equispaced samples used to check that `phi` maps `[0, a]` into itself.
pub const PHI_SAMPLES: usize = 10_001;
/// Relative slack, in units of `a`, tolerated (and clamped away) outside `[0, a]`.
pub const DELAY_CLAMP_TOL: f64 = 1e-12;
/// Relative singular value cutoff for the boundary coefficient matrix rank.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Left,
    Right,
}

/// `alpha u(x) + beta u'(x) + gamma u''(x) = b` at `x = 0` or `x = a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub at: Endpoint,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub b: f64,
}

impl BoundaryRow {
    pub fn new(at: Endpoint, alpha: f64, beta: f64, gamma: f64, b: f64) -> Self {
        BoundaryRow {
            at,
            alpha,
            beta,
            gamma,
            b,
        }
    }

    /// Abscissa of the endpoint on `[0, a]`.
    pub fn point(&self, a: f64) -> f64 {
        match self.at {
            Endpoint::Left => 0.0,
            Endpoint::Right => a,
        }
    }

    /// The linear functional `p -> alpha p(x) + beta p'(x) + gamma p''(x)` acting on
    /// the coefficients `(c0, c1, c2)` of a quadratic.
    pub fn functional_at(&self, x: f64) -> [f64; 3] {
        [
            self.alpha,
            self.alpha * x + self.beta,
            self.alpha * x * x + 2.0 * self.beta * x + 2.0 * self.gamma,
        ]
    }

    /// Apply the homogeneous part of the row to a quadratic.
    pub fn apply(&self, p: &Quadratic, a: f64) -> f64 {
        let x = self.point(a);
        self.alpha * p.eval(x) + self.beta * p.derivative(x) + self.gamma * p.second_derivative()
    }
}

/// Which of the two admissible arrangements the rows use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowSplit {
    /// Two conditions at `0`, one at `a`.
    TwoLeftOneRight,
    /// One condition at `0`, two at `a`.
    OneLeftTwoRight,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSpec {
    /// Interval length.
    pub a: f64,
    pub rows: [BoundaryRow; 3],
    /// Nonlinearity `f(t, u, v)`.
    pub f: Expr,
    /// Delay map `phi(t)`.
    pub phi: Expr,
    /// Exact solution `u(t)`, when known.
    pub exact: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rank: usize,
    pub split: RowSplit,
    pub phi_min: f64,
    pub phi_max: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("interval length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("boundary row {0} has alpha = beta = gamma = 0")]
    ZeroRow(usize),
    #[error("boundary rows must be two at one endpoint and one at the other, got {left} left and {right} right")]
    InvalidRowSplit { left: usize, right: usize },
    #[error("boundary coefficient matrix has rank {rank}, expected 3")]
    RankDeficient { rank: usize },
    #[error("delay map leaves [0, a]: phi({t}) = {value}")]
    DelayOutOfRange { t: f64, value: f64 },
    #[error("cannot evaluate {what} at t = {t}: {source}")]
    Eval {
        what: &'static str,
        t: f64,
        source: EvalError,
    },
}

impl ProblemSpec {
    /// The 3x6 matrix with left-endpoint coefficients in columns 0..3 and right-endpoint
    /// coefficients in columns 3..6.
    pub fn coefficient_matrix(&self) -> [[f64; 6]; 3] {
        let mut m = [[0.0; 6]; 3];
        for (row, bc) in m.iter_mut().zip(&self.rows) {
            let off = match bc.at {
                Endpoint::Left => 0,
                Endpoint::Right => 3,
            };
            row[off] = bc.alpha;
            row[off + 1] = bc.beta;
            row[off + 2] = bc.gamma;
        }
        m
    }

    pub fn validate(&self) -> Result<ValidationReport, ProblemError> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(ProblemError::InvalidLength(self.a));
        }
        if let Some(i) = self
            .rows
            .iter()
            .position(|r| r.alpha == 0.0 && r.beta == 0.0 && r.gamma == 0.0)
        {
            return Err(ProblemError::ZeroRow(i));
        }
        let left = self.rows.iter().filter(|r| r.at == Endpoint::Left).count();
        let right = 3 - left;
        let split = match left {
            2 => RowSplit::TwoLeftOneRight,
            1 => RowSplit::OneLeftTwoRight,
            _ => return Err(ProblemError::InvalidRowSplit { left, right }),
        };

        let rank = matrix_rank(&self.coefficient_matrix());
        if rank != 3 {
            return Err(ProblemError::RankDeficient { rank });
        }

        let a = self.a;
        let mut phi_min = f64::INFINITY;
        let mut phi_max = f64::NEG_INFINITY;
        for i in 0..PHI_SAMPLES {
            let t = if i + 1 == PHI_SAMPLES {
                a
            } else {
                a * i as f64 / (PHI_SAMPLES - 1) as f64
            };
            let value = self.phi.eval_t(t).map_err(|source| ProblemError::Eval {
                what: "phi",
                t,
                source,
            })?;
            if value < -DELAY_CLAMP_TOL * a || value > a * (1.0 + DELAY_CLAMP_TOL) {
                return Err(ProblemError::DelayOutOfRange { t, value });
            }
            phi_min = phi_min.min(value);
            phi_max = phi_max.max(value);
        }

        Ok(ValidationReport {
            rank,
            split,
            phi_min,
            phi_max,
        })
    }

    /// `xi_i = phi(t_i)` at every node, with round-off excursions clamped into `[0, a]`.
    pub fn delay_points(&self, grid: &Grid) -> Result<Vec<f64>, ProblemError> {
        let a = self.a;
        grid.nodes()
            .iter()
            .map(|&t| {
                let value = self.phi.eval_t(t).map_err(|source| ProblemError::Eval {
                    what: "phi",
                    t,
                    source,
                })?;
                if value < -DELAY_CLAMP_TOL * a || value > a * (1.0 + DELAY_CLAMP_TOL) {
                    Err(ProblemError::DelayOutOfRange { t, value })
                } else {
                    Ok(value.clamp(0.0, a))
                }
            })
            .collect()
    }
}

fn matrix_rank(rows: &[[f64; 6]; 3]) -> usize {
    let m = SMatrix::<f64, 3, 6>::from_fn(|i, j| rows[i][j]);
    let sv = m.singular_values();
    let largest = sv.max();
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * largest).count()
}
