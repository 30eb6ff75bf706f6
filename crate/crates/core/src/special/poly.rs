//! Bivariate polynomials of degree ≤ 2 and piecewise assemblies of them.

use serde::{Deserialize, Serialize};

use crate::geometry::{convex_contains, Point, Polygon};

/// `c[0] + c[1]x + c[2]y + c[3]x² + c[4]xy + c[5]y²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub c: [f64; 6],
}

impl Quadratic {
    pub const ZERO: Quadratic = Quadratic { c: [0.0; 6] };

    /// `c0 + cx·x + cy·y`.
    pub fn linear(c0: f64, cx: f64, cy: f64) -> Self {
        Quadratic {
            c: [c0, cx, cy, 0.0, 0.0, 0.0],
        }
    }

    /// Product of two linear forms; panics in debug builds if either has
    /// quadratic terms.
    pub fn mul(self, o: Quadratic) -> Quadratic {
        debug_assert!(self.c[3..].iter().chain(&o.c[3..]).all(|&v| v == 0.0));
        let [a0, ax, ay, ..] = self.c;
        let [b0, bx, by, ..] = o.c;
        Quadratic {
            c: [
                a0 * b0,
                a0 * bx + ax * b0,
                a0 * by + ay * b0,
                ax * bx,
                ax * by + ay * bx,
                ay * by,
            ],
        }
    }

    pub fn square(self) -> Quadratic {
        self.mul(self)
    }

    pub fn scale(self, s: f64) -> Quadratic {
        Quadratic {
            c: self.c.map(|v| v * s),
        }
    }

    pub fn add(self, o: Quadratic) -> Quadratic {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(o.c) {
            *a += b;
        }
        Quadratic { c }
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let c = &self.c;
        c[0] + x * (c[1] + c[3] * x + c[4] * y) + y * (c[2] + c[5] * y)
    }
}

/// Polygonal regions with disjoint interiors, each carrying a quadratic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly2D {
    pub regions: Vec<(Polygon, Quadratic)>,
}

impl PiecewisePoly2D {
    /// Value of the first region whose closure contains `p`; 0 outside all.
    /// Regions must be convex.
    pub fn eval(&self, p: Point) -> f64 {
        for (poly, q) in &self.regions {
            if convex_contains(poly.vertices(), p, 1e-15) {
                return q.eval(p[0], p[1]);
            }
        }
        0.0
    }

    /// Index of the region containing `p`.
    pub fn locate(&self, p: Point) -> Option<usize> {
        self.regions
            .iter()
            .position(|(poly, _)| convex_contains(poly.vertices(), p, 1e-15))
    }
}
