//! Quadratic polynomials, the building block of both `g(t)` and the Green function pieces.

use serde::Serialize;

/// `c0 + c1 x + c2 x^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Quadratic {
    pub c: [f64; 3],
}

impl Quadratic {
    pub const ZERO: Quadratic = Quadratic { c: [0.0; 3] };

    pub fn new(c0: f64, c1: f64, c2: f64) -> Self {
        Quadratic { c: [c0, c1, c2] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let [c0, c1, c2] = self.c;
        c0 + x * (c1 + x * c2)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.c[1] + 2.0 * self.c[2] * x
    }

    pub fn second_derivative(&self) -> f64 {
        2.0 * self.c[2]
    }

    /// Interpolant through `(x0, y0)`, `((x0+x1)/2, ym)`, `(x1, y1)`, expressed in the
    /// local coordinate `r = (x - x0) / (x1 - x0)` on `[0, 1]`.
    pub fn through_cell(y0: f64, ym: f64, y1: f64) -> Self {
        // p(r) = y0 + b r + c r^2 with p(1/2) = ym, p(1) = y1
        let c = 2.0 * (y1 + y0 - 2.0 * ym);
        let b = y1 - y0 - c;
        Quadratic::new(y0, b, c)
    }

    pub fn antiderivative(&self, x: f64) -> f64 {
        let [c0, c1, c2] = self.c;
        x * (c0 + x * (c1 / 2.0 + x * c2 / 3.0))
    }

    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        self.antiderivative(hi) - self.antiderivative(lo)
    }

    /// Real roots strictly inside `(lo, hi)`, ascending.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let [c0, c1, c2] = self.c;
        let mut roots = Vec::with_capacity(2);
        if c2 == 0.0 {
            if c1 != 0.0 {
                roots.push(-c0 / c1);
            }
        } else {
            let disc = c1 * c1 - 4.0 * c2 * c0;
            if disc >= 0.0 {
                // Cancellation-free form.
                let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
                if q != 0.0 {
                    roots.push(q / c2);
                    roots.push(c0 / q);
                } else {
                    // c1 == 0 and c0 == 0: double root at 0.
                    roots.push(0.0);
                }
            }
        }
        roots.retain(|r| *r > lo && *r < hi);
        roots.sort_by(f64::total_cmp);
        roots.dedup();
        roots
    }

    /// Exact `int_lo^hi |p(x)| dx`.
    pub fn integral_abs(&self, lo: f64, hi: f64) -> f64 {
        let mut total = 0.0;
        let mut left = lo;
        for r in self.roots_in(lo, hi).into_iter().chain(std::iter::once(hi)) {
            total += self.integral(left, r).abs();
            left = r;
        }
        total
    }

    /// Exact `max_{lo <= x <= hi} |p(x)|`.
    pub fn max_abs(&self, lo: f64, hi: f64) -> f64 {
        let mut m = self.eval(lo).abs().max(self.eval(hi).abs());
        if self.c[2] != 0.0 {
            let vertex = -self.c[1] / (2.0 * self.c[2]);
            if vertex > lo && vertex < hi {
                m = m.max(self.eval(vertex).abs());
            }
        }
        m
    }
}
