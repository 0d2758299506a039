//! Green function of `u''' = psi` under the homogeneous boundary rows, and the
//! quadratic `g(t)` carrying the inhomogeneous boundary data.
//!
//! For a source point `s`, `G(., s)` is a quadratic on `[0, s]` and another on
//! `[s, a]`. The six coefficients are fixed by the three homogeneous boundary
//! rows (each applied to the piece containing its endpoint), continuity of `G`
//! and `dG/dt` at `t = s`, and a unit jump of `d2G/dt2` across `t = s`.
//! Then
//!
//! ```text
//! u(t) = g(t) + int_0^a G(t, s) psi(s) ds
//! ```
//!
//! solves `u''' = psi` with the original boundary data.

use nalgebra::{DMatrix, SMatrix, SVector};
use serde::Serialize;
use thiserror::Error;

use crate::poly::Quadratic;
use crate::problem::{Endpoint, ProblemError, ProblemSpec};
use crate::quadrature::Grid;

/// Systems whose condition estimate exceeds this are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GreenError {
    #[error("Green function system is singular at s = {s} (condition {condition:e}); the homogeneous problem has nontrivial solutions")]
    SingularGreenSystem { s: f64, condition: f64 },
    #[error("boundary polynomial system is singular (condition {condition:e})")]
    SingularGSystem { condition: f64 },
    #[error("source point {s} lies outside [0, {a}]")]
    SourceOutOfRange { s: f64, a: f64 },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// The two quadratic pieces of `t -> G(t, s)` for one source point `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenPieces {
    pub s: f64,
    /// Valid for `t <= s`.
    pub left: Quadratic,
    /// Valid for `t >= s`.
    pub right: Quadratic,
}

impl GreenPieces {
    /// `G(t, s)`. At `t == s` the left piece is used; both agree there.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.s {
            self.left.eval(t)
        } else {
            self.right.eval(t)
        }
    }

    /// The piece that a boundary row at `at` constrains.
    pub fn piece_at(&self, at: Endpoint) -> &Quadratic {
        match at {
            Endpoint::Left => &self.left,
            Endpoint::Right => &self.right,
        }
    }

    /// The six coefficients `(c0-, c1-, c2-, c0+, c1+, c2+)`.
    pub fn coefficients(&self) -> [f64; 6] {
        let [a, b, c] = self.left.c;
        let [d, e, f] = self.right.c;
        [a, b, c, d, e, f]
    }
}

fn condition_number<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    let sv = DMatrix::from_column_slice(N, N, m.as_slice()).singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Solve the 6x6 matching system for the pieces of `G(., s)`.
pub fn build_green(spec: &ProblemSpec, s: f64) -> Result<GreenPieces, GreenError> {
    let a = spec.a;
    if !(0.0..=a).contains(&s) {
        return Err(GreenError::SourceOutOfRange { s, a });
    }
    let mut m = SMatrix::<f64, 6, 6>::zeros();
    let mut rhs = SVector::<f64, 6>::zeros();
    for (i, row) in spec.rows.iter().enumerate() {
        let off = match row.at {
            Endpoint::Left => 0,
            Endpoint::Right => 3,
        };
        let coeffs = row.functional_at(row.point(a));
        for k in 0..3 {
            m[(i, off + k)] = coeffs[k];
        }
    }
    // value continuity
    let value = [1.0, s, s * s];
    // first derivative continuity
    let slope = [0.0, 1.0, 2.0 * s];
    for k in 0..3 {
        m[(3, k)] = value[k];
        m[(3, 3 + k)] = -value[k];
        m[(4, k)] = slope[k];
        m[(4, 3 + k)] = -slope[k];
    }
    // d2G/dt2 jumps by +1 going left to right
    m[(5, 2)] = -2.0;
    m[(5, 5)] = 2.0;
    rhs[5] = 1.0;

    let condition = condition_number(&m);
    if !(condition <= SINGULAR_CONDITION) {
        return Err(GreenError::SingularGreenSystem { s, condition });
    }
    let c = m
        .lu()
        .solve(&rhs)
        .ok_or(GreenError::SingularGreenSystem { s, condition })?;
    Ok(GreenPieces {
        s,
        left: Quadratic::new(c[0], c[1], c[2]),
        right: Quadratic::new(c[3], c[4], c[5]),
    })
}

/// The quadratic `g` with `B_i[g] = b_i` for all three rows.
pub fn build_g(spec: &ProblemSpec) -> Result<Quadratic, GreenError> {
    let mut m = SMatrix::<f64, 3, 3>::zeros();
    let mut rhs = SVector::<f64, 3>::zeros();
    for (i, row) in spec.rows.iter().enumerate() {
        let coeffs = row.functional_at(row.point(spec.a));
        for k in 0..3 {
            m[(i, k)] = coeffs[k];
        }
        rhs[i] = row.b;
    }
    let condition = condition_number(&m);
    if !(condition <= SINGULAR_CONDITION) {
        return Err(GreenError::SingularGSystem { condition });
    }
    let c = m
        .lu()
        .solve(&rhs)
        .ok_or(GreenError::SingularGSystem { condition })?;
    Ok(Quadratic::new(c[0], c[1], c[2]))
}

/// Green function pieces at every grid node (and cell midpoint), plus the value
/// matrices `G(t_i, s_j)` and `G(xi_i, s_j)` used by the iteration.
#[derive(Debug, Clone)]
pub struct GreenTable {
    spec: ProblemSpec,
    grid: Grid,
    delays: Vec<f64>,
    node_pieces: Vec<GreenPieces>,
    mid_pieces: Vec<GreenPieces>,
    at_nodes: Vec<f64>,
    at_delays: Vec<f64>,
}

impl GreenTable {
    pub fn new(spec: &ProblemSpec, grid: &Grid) -> Result<GreenTable, GreenError> {
        let delays = spec.delay_points(grid)?;
        let nodes = grid.nodes();
        let node_pieces = nodes
            .iter()
            .map(|&s| build_green(spec, s))
            .collect::<Result<Vec<_>, _>>()?;
        let mid_pieces = nodes
            .windows(2)
            .map(|w| build_green(spec, 0.5 * (w[0] + w[1])))
            .collect::<Result<Vec<_>, _>>()?;

        let fill = |points: &[f64]| {
            let mut out = Vec::with_capacity(points.len() * node_pieces.len());
            for &t in points {
                out.extend(node_pieces.iter().map(|p| p.eval(t)));
            }
            out
        };
        let at_nodes = fill(nodes);
        let at_delays = fill(&delays);

        Ok(GreenTable {
            spec: spec.clone(),
            grid: grid.clone(),
            delays,
            node_pieces,
            mid_pieces,
            at_nodes,
            at_delays,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    /// `xi_i = phi(t_i)`.
    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn node_pieces(&self) -> &[GreenPieces] {
        &self.node_pieces
    }

    /// Row `i` of `G(t_i, s_j)`.
    pub fn row_at_node(&self, i: usize) -> &[f64] {
        let n = self.node_pieces.len();
        &self.at_nodes[i * n..(i + 1) * n]
    }

    /// Row `i` of `G(xi_i, s_j)`.
    pub fn row_at_delay(&self, i: usize) -> &[f64] {
        let n = self.node_pieces.len();
        &self.at_delays[i * n..(i + 1) * n]
    }

    fn node_index(&self, s: f64) -> Option<usize> {
        let j = (s / self.grid.step()).round();
        if j < 0.0 {
            return None;
        }
        let j = j as usize;
        (self.grid.nodes().get(j) == Some(&s)).then_some(j)
    }

    /// `G(t, s)` for any `t, s` in `[0, a]`; pieces for off-grid `s` are built on demand.
    pub fn eval(&self, t: f64, s: f64) -> Result<f64, GreenError> {
        match self.node_index(s) {
            Some(j) => Ok(self.node_pieces[j].eval(t)),
            None => Ok(build_green(&self.spec, s)?.eval(t)),
        }
    }

    /// Exact `int_0^a |G(t, s)| ds`.
    ///
    /// For fixed `t`, `s -> G(t, s)` is quadratic on each side of `s = t`. Each grid
    /// cell (split at `t` when `t` falls strictly inside it) is interpolated exactly
    /// from three samples and `|quadratic|` is integrated between its roots.
    pub fn abs_integral(&self, t: f64) -> Result<f64, GreenError> {
        let nodes = self.grid.nodes();
        let mut total = 0.0;
        for j in 0..self.grid.cells() {
            let (lo, hi) = (nodes[j], nodes[j + 1]);
            if t > lo && t < hi {
                for (x0, x1) in [(lo, t), (t, hi)] {
                    let y0 = self.eval(t, x0)?;
                    let ym = build_green(&self.spec, 0.5 * (x0 + x1))?.eval(t);
                    let y1 = self.eval(t, x1)?;
                    total += (x1 - x0) * Quadratic::through_cell(y0, ym, y1).integral_abs(0.0, 1.0);
                }
            } else {
                let y0 = self.node_pieces[j].eval(t);
                let ym = self.mid_pieces[j].eval(t);
                let y1 = self.node_pieces[j + 1].eval(t);
                total += (hi - lo) * Quadratic::through_cell(y0, ym, y1).integral_abs(0.0, 1.0);
            }
        }
        Ok(total)
    }

    /// `M0 = max_i int_0^a |G(t_i, s)| ds` over the grid nodes.
    pub fn m0(&self) -> Result<f64, GreenError> {
        let mut best = 0.0f64;
        for &t in self.grid.nodes() {
            best = best.max(self.abs_integral(t)?);
        }
        Ok(best)
    }
}

/// `G(t, s)` from a table.
pub fn eval_green(table: &GreenTable, t: f64, s: f64) -> Result<f64, GreenError> {
    table.eval(t, s)
}

/// `M0` over the table's grid.
pub fn compute_m0(table: &GreenTable) -> Result<f64, GreenError> {
    table.m0()
}
