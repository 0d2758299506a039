#![allow(dead_code)]

use greenfde::expr::{parse, NONLINEARITY_VARS, TIME_VARS};
use greenfde::{BoundaryRow, Endpoint, ProblemSpec};
use std::f64::consts::{E, PI};

pub fn problem(a: f64, rows: [BoundaryRow; 3], f: &str, phi: &str, exact: Option<&str>) -> ProblemSpec {
    ProblemSpec {
        a,
        rows,
        f: parse(f, NONLINEARITY_VARS).unwrap(),
        phi: parse(phi, TIME_VARS).unwrap(),
        exact: exact.map(|e| parse(e, TIME_VARS).unwrap()),
    }
}

/// u(0) = 1, u'(0) = 1, u'(1) = e
pub fn example1_rows() -> [BoundaryRow; 3] {
    [
        BoundaryRow::new(Endpoint::Left, 1.0, 0.0, 0.0, 1.0),
        BoundaryRow::new(Endpoint::Left, 0.0, 1.0, 0.0, 1.0),
        BoundaryRow::new(Endpoint::Right, 0.0, 1.0, 0.0, E),
    ]
}

pub fn example1() -> ProblemSpec {
    problem(1.0, example1_rows(), "e^t - 1/4*u + 1/4*v^2", "t/2", Some("e^t"))
}

pub fn example2() -> ProblemSpec {
    let rows = [
        BoundaryRow::new(Endpoint::Left, 1.0, 0.0, 0.0, 0.0),
        BoundaryRow::new(Endpoint::Left, 0.0, 1.0, 0.0, PI),
        BoundaryRow::new(Endpoint::Right, 0.0, 1.0, 0.0, -PI),
    ];
    problem(1.0, rows, "sin(u^2) + cos(v^2)", "t^2", None)
}

pub fn example3() -> ProblemSpec {
    let rows = [
        BoundaryRow::new(Endpoint::Left, 1.0, 0.0, 0.0, 0.0),
        BoundaryRow::new(Endpoint::Left, 0.0, 1.0, 0.0, 1.0),
        BoundaryRow::new(Endpoint::Right, 1.0, 0.0, 0.0, 0.0),
    ];
    problem(PI, rows, "-1 + 2*v^2", "t/2", Some("sin(t)"))
}

/// Closed-form Green function for example 1's boundary rows.
pub fn green1(t: f64, s: f64) -> f64 {
    if s <= t {
        s / 2.0 * (t * t - 2.0 * t + s)
    } else {
        t * t / 2.0 * (s - 1.0)
    }
}

/// Closed-form Green function for example 3's boundary rows on [0, pi].
pub fn green3(t: f64, s: f64) -> f64 {
    let base = -t * t * (PI - s).powi(2) / (2.0 * PI * PI);
    if s <= t {
        base + (t - s).powi(2) / 2.0
    } else {
        base
    }
}

/// Trapezoid rule with `n` cells for `int_lo^hi f`.
pub fn trapezoid(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut acc = 0.5 * (f(lo) + f(hi));
    for k in 1..n {
        acc += f(lo + k as f64 * h);
    }
    acc * h
}

/// Brute-force `max_t int_0^a |G(t, s)| ds` on `nt` t-points with an `ns`-point s-grid.
pub fn brute_force_m0(a: f64, nt: usize, ns: usize, g: impl Fn(f64, f64) -> f64) -> f64 {
    (0..nt)
        .map(|i| {
            let t = a * i as f64 / (nt - 1) as f64;
            trapezoid(0.0, a, ns - 1, |s| g(t, s).abs())
        })
        .fold(0.0, f64::max)
}
