//! Uniform grids and the composite trapezoidal rule.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("interval length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("grid needs at least 2 cells, got {0}")]
    TooFewCells(usize),
    #[error("length mismatch: grid has {expected} nodes, got kernel {kernel} and values {values}")]
    LengthMismatch {
        expected: usize,
        kernel: usize,
        values: usize,
    },
}

/// Uniform partition `t_i = i h`, `h = a / N`, of `[0, a]` with trapezoid weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    a: f64,
    cells: usize,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    pub fn new(a: f64, cells: usize) -> Result<Grid, GridError> {
        if !(a.is_finite() && a > 0.0) {
            return Err(GridError::InvalidLength(a));
        }
        if cells < 2 {
            return Err(GridError::TooFewCells(cells));
        }
        let h = a / cells as f64;
        let mut nodes: Vec<f64> = (0..=cells).map(|i| i as f64 * h).collect();
        // i*h can overshoot or undershoot a in the last ulp
        nodes[cells] = a;
        let weights = (0..=cells)
            .map(|j| if j == 0 || j == cells { 0.5 } else { 1.0 })
            .collect();
        Ok(Grid {
            a,
            cells,
            h,
            nodes,
            weights,
        })
    }

    /// Interval length `a`.
    pub fn length(&self) -> f64 {
        self.a
    }

    /// Number of cells `N`.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Trapezoid weights `rho_j`: 1/2 at both ends, 1 inside.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `h * sum_j rho_j * kernel[j] * values[j]`, summed in ascending `j`.
    pub fn weighted_sum(&self, kernel: &[f64], values: &[f64]) -> Result<f64, GridError> {
        let n = self.nodes.len();
        if kernel.len() != n || values.len() != n {
            return Err(GridError::LengthMismatch {
                expected: n,
                kernel: kernel.len(),
                values: values.len(),
            });
        }
        Ok(self.weighted_sum_unchecked(kernel, values))
    }

    pub(crate) fn weighted_sum_unchecked(&self, kernel: &[f64], values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((w, k), x) in self.weights.iter().zip(kernel).zip(values) {
            acc += w * k * x;
        }
        self.h * acc
    }

    /// Trapezoid rule applied to `f` sampled at the nodes.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = 0.0;
        for (w, &t) in self.weights.iter().zip(&self.nodes) {
            acc += w * f(t);
        }
        self.h * acc
    }
}

/// Shorthand for [`Grid::new`].
pub fn make_grid(a: f64, cells: usize) -> Result<Grid, GridError> {
    Grid::new(a, cells)
}
