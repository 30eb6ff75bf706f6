use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A point of the unit circle, kept as its angle so the modulus is exactly 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitComplex {
    angle: f64,
}

impl UnitComplex {
    pub const ONE: UnitComplex = UnitComplex { angle: 0.0 };
    pub const MINUS_ONE: UnitComplex = UnitComplex { angle: PI };

    pub fn from_angle(angle: f64) -> Self {
        UnitComplex { angle }
    }

    /// Nearest unit number to `z`; `z = 0` maps to 1.
    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            return UnitComplex::ONE;
        }
        UnitComplex { angle: z.arg() }
    }

    pub fn angle(self) -> f64 {
        self.angle
    }

    pub fn value(self) -> Complex64 {
        if self.angle == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        if self.angle == PI || self.angle == -PI {
            return Complex64::new(-1.0, 0.0);
        }
        Complex64::from_polar(1.0, self.angle)
    }

    pub fn conj(self) -> Self {
        UnitComplex { angle: -self.angle }
    }

    pub fn rotate(self, by: f64) -> Self {
        UnitComplex {
            angle: self.angle + by,
        }
    }

    /// Angle reduced to `(-π, π]`.
    pub fn principal(self) -> f64 {
        let mut a = self.angle.rem_euclid(2.0 * PI);
        if a > PI {
            a -= 2.0 * PI;
        }
        a
    }

    pub fn approx_eq(self, other: UnitComplex, tol: f64) -> bool {
        (self.value() - other.value()).norm() <= tol
    }
}

impl std::ops::Mul for UnitComplex {
    type Output = UnitComplex;

    fn mul(self, rhs: UnitComplex) -> UnitComplex {
        UnitComplex {
            angle: self.angle + rhs.angle,
        }
    }
}

impl std::ops::Neg for UnitComplex {
    type Output = UnitComplex;

    fn neg(self) -> UnitComplex {
        self.rotate(PI)
    }
}

impl fmt::Display for UnitComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({}i)", self.angle)
    }
}
