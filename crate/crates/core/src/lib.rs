//! Green-function fixed-point solver for third-order functional differential
//! boundary value problems
//!
//! ```text
//! u'''(t) = f(t, u(t), u(phi(t))),   0 < t < a,
//! ```
//!
//! with three linear boundary conditions on `u, u', u''` at the endpoints.
//! The problem is recast as a fixed point `psi = f(t, u, u(phi))` where
//! `u = g + int G psi`, and iterated on a uniform grid with trapezoid weights.
//!
//! ```
//! use greenfde::{expr, BoundaryRow, Endpoint, Grid, ProblemSpec};
//!
//! let spec = ProblemSpec {
//!     a: 1.0,
//!     rows: [
//!         BoundaryRow::new(Endpoint::Left, 1.0, 0.0, 0.0, 1.0),
//!         BoundaryRow::new(Endpoint::Left, 0.0, 1.0, 0.0, 1.0),
//!         BoundaryRow::new(Endpoint::Right, 0.0, 1.0, 0.0, std::f64::consts::E),
//!     ],
//!     f: expr::parse("e^t - 1/4*u + 1/4*v^2", expr::NONLINEARITY_VARS).unwrap(),
//!     phi: expr::parse("t/2", expr::TIME_VARS).unwrap(),
//!     exact: Some(expr::parse("e^t", expr::TIME_VARS).unwrap()),
//! };
//! spec.validate().unwrap();
//! let report = greenfde::solve(&spec, &Grid::new(1.0, 100).unwrap(), 1e-10, 1000).unwrap();
//! assert_eq!(report.iterations, 3);
//! assert!(report.error_vs_exact.unwrap() < 2e-5);
//! ```

pub mod analysis;
pub mod expr;
pub mod green;
pub mod poly;
pub mod problem;
pub mod quadrature;
pub mod solver;

pub use analysis::{check_conditions, convergence_study, ConditionReport, StudyReport, StudyRow};
pub use expr::{parse, Expr, Var};
pub use green::{build_g, build_green, compute_m0, eval_green, GreenPieces, GreenTable};
pub use poly::Quadratic;
pub use problem::{BoundaryRow, Endpoint, ProblemSpec, ValidationReport};
pub use quadrature::{make_grid, Grid};
pub use solver::{solve, Hypotheses, SolveReport, Solver};
