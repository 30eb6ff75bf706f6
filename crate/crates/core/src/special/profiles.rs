//! One-dimensional correlation profiles of the unit Haar function and the
//! unit indicator, and an exact convolution oracle for step functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Continuous piecewise-linear function, zero outside its breakpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearFn {
    breakpoints: Vec<f64>,
    node_values: Vec<f64>,
}

impl PiecewiseLinearFn {
    pub fn new(breakpoints: Vec<f64>, node_values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != node_values.len() || breakpoints.len() < 2 {
            return Err(Error::InvalidConfig(
                "breakpoints and node values must have equal length ≥ 2".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig("breakpoints must be strictly increasing".into()));
        }
        Ok(PiecewiseLinearFn {
            breakpoints,
            node_values,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let b = &self.breakpoints;
        if x < b[0] || x > b[b.len() - 1] {
            return 0.0;
        }
        let k = b.partition_point(|&t| t <= x).clamp(1, b.len() - 1);
        let (x0, x1) = (b[k - 1], b[k]);
        let (y0, y1) = (self.node_values[k - 1], self.node_values[k]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Exact integral by the trapezoid rule on each linear piece.
    pub fn integral(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .zip(self.node_values.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }
}

const PROFILE_KNOTS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// `h₀ * h₀` as a table.
pub fn alpha_fn() -> PiecewiseLinearFn {
    PiecewiseLinearFn::new(PROFILE_KNOTS.to_vec(), vec![0.0, 0.5, -1.0, 0.5, 0.0]).unwrap()
}

/// `χ₀ * χ₀` as a table.
pub fn beta_fn() -> PiecewiseLinearFn {
    PiecewiseLinearFn::new(PROFILE_KNOTS.to_vec(), vec![0.0, 0.5, 1.0, 0.5, 0.0]).unwrap()
}

/// `h₀ * χ₀` as a table.
pub fn gamma_fn() -> PiecewiseLinearFn {
    PiecewiseLinearFn::new(PROFILE_KNOTS.to_vec(), vec![0.0, -0.5, 0.0, 0.5, 0.0]).unwrap()
}

#[inline]
pub fn alpha(x: f64) -> f64 {
    let t = x.abs();
    if t <= 0.5 {
        3.0 * t - 1.0
    } else if t <= 1.0 {
        1.0 - t
    } else {
        0.0
    }
}

#[inline]
pub fn beta(x: f64) -> f64 {
    (1.0 - x.abs()).max(0.0)
}

#[inline]
pub fn gamma(x: f64) -> f64 {
    let t = x.abs();
    let v = if t <= 0.5 {
        t
    } else if t <= 1.0 {
        1.0 - t
    } else {
        0.0
    };
    v.copysign(x)
}

/// Piecewise-constant function: `values[i]` on `[knots[i], knots[i+1])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFn1 {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepFn1 {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidConfig("need one more knot than values".into()));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig("knots must be strictly increasing".into()));
        }
        Ok(StepFn1 { knots, values })
    }

    /// `-1` on `[-½, 0)`, `+1` on `[0, ½)`.
    pub fn h0() -> Self {
        StepFn1::new(vec![-0.5, 0.0, 0.5], vec![-1.0, 1.0]).unwrap()
    }

    /// Indicator of `[-½, ½)`.
    pub fn chi0() -> Self {
        StepFn1::new(vec![-0.5, 0.5], vec![1.0]).unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.knots[0] || x >= self.knots[self.knots.len() - 1] {
            return 0.0;
        }
        let k = self.knots.partition_point(|&t| t <= x);
        self.values[k - 1]
    }

    fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.knots
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[0], w[1], v))
    }
}

/// `(f * g)(x) = ∫ f(s) g(x − s) ds`, summed exactly over overlapping pieces.
pub fn conv1d_oracle(f: &StepFn1, g: &StepFn1, x: f64) -> f64 {
    let mut acc = 0.0;
    for (a, b, u) in f.pieces() {
        for (c, d, v) in g.pieces() {
            // g(x − s) ≠ 0 for s ∈ (x − d, x − c]
            let lo = a.max(x - d);
            let hi = b.min(x - c);
            if hi > lo {
                acc += u * v * (hi - lo);
            }
        }
    }
    acc
}
