//! Averaged kernels of the modified Haar families.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::profiles::{alpha, beta, gamma};
use super::triangle::{support_vertices, triangle_g_all};
use super::unit::UnitComplex;
use crate::error::{Error, Result};
use crate::geometry::{Affine2, Point, Polygon};
use crate::quad::Breaklines;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    /// Square cells split into halves, transported to the parallelogram
    /// spanned by `(1, 0)` and `b·(cos φ, sin φ)`.
    New {
        b: f64,
        phi: f64,
        sigma0: UnitComplex,
        sigma_plus: UnitComplex,
        sigma_minus: UnitComplex,
    },
    /// Square cells split along the diagonals, stretched to `[0,1] × [0,b]`.
    Diagonal {
        b: f64,
        sigma0: UnitComplex,
        sigma_plus: UnitComplex,
        sigma_minus: UnitComplex,
    },
    /// Triangle cells transported by `(x, y) ↦ (x + a y, b y)`.
    Triangle {
        a: f64,
        b: f64,
        sigma0: UnitComplex,
        sigma_plus: UnitComplex,
        sigma_minus: UnitComplex,
    },
    /// `ρ⁻² F(·/ρ)`.
    Scaled { inner: Box<KernelSpec>, rho: f64 },
}

impl KernelSpec {
    pub fn new_family(b: f64, phi: f64, sigma: [UnitComplex; 3]) -> Self {
        KernelSpec::New {
            b,
            phi,
            sigma0: sigma[0],
            sigma_plus: sigma[1],
            sigma_minus: sigma[2],
        }
    }

    /// `σ = (1, −1, −1)`.
    pub fn optimal_new(b: f64, phi: f64) -> Self {
        KernelSpec::new_family(
            b,
            phi,
            [UnitComplex::ONE, UnitComplex::MINUS_ONE, UnitComplex::MINUS_ONE],
        )
    }

    /// `σ₀ = 1`, `σ± = e^{±iϑ}`.
    pub fn diagonal(b: f64, theta: f64) -> Self {
        KernelSpec::Diagonal {
            b,
            sigma0: UnitComplex::ONE,
            sigma_plus: UnitComplex::from_angle(theta),
            sigma_minus: UnitComplex::from_angle(-theta),
        }
    }

    pub fn triangle(a: f64, b: f64, sigma_plus: UnitComplex, sigma_minus: UnitComplex) -> Self {
        KernelSpec::Triangle {
            a,
            b,
            sigma0: UnitComplex::ONE,
            sigma_plus,
            sigma_minus,
        }
    }

    pub fn scaled(self, rho: f64) -> Self {
        KernelSpec::Scaled {
            inner: Box::new(self),
            rho,
        }
    }

    /// Innermost unscaled spec and the accumulated scale factor.
    pub fn base(&self) -> (&KernelSpec, f64) {
        match self {
            KernelSpec::Scaled { inner, rho } => {
                let (b, r) = inner.base();
                (b, r * rho)
            }
            other => (other, 1.0),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self.base().0 {
            KernelSpec::New { .. } => "new",
            KernelSpec::Diagonal { .. } => "diagonal",
            KernelSpec::Triangle { .. } => "triangle",
            KernelSpec::Scaled { .. } => unreachable!(),
        }
    }

    /// `(σ₀, σ₊, σ₋)` of the base spec.
    pub fn sigmas(&self) -> [UnitComplex; 3] {
        match *self.base().0 {
            KernelSpec::New {
                sigma0,
                sigma_plus,
                sigma_minus,
                ..
            }
            | KernelSpec::Diagonal {
                sigma0,
                sigma_plus,
                sigma_minus,
                ..
            }
            | KernelSpec::Triangle {
                sigma0,
                sigma_plus,
                sigma_minus,
                ..
            } => [sigma0, sigma_plus, sigma_minus],
            KernelSpec::Scaled { .. } => unreachable!(),
        }
    }

    /// Same geometry with the signs replaced by `s = (σ₀, σ₊, σ₋)`.
    pub fn with_sigmas(&self, s: [UnitComplex; 3]) -> KernelSpec {
        match self {
            KernelSpec::Scaled { inner, rho } => KernelSpec::Scaled {
                inner: Box::new(inner.with_sigmas(s)),
                rho: *rho,
            },
            KernelSpec::New { b, phi, .. } => KernelSpec::new_family(*b, *phi, s),
            KernelSpec::Diagonal { b, .. } => KernelSpec::Diagonal {
                b: *b,
                sigma0: s[0],
                sigma_plus: s[1],
                sigma_minus: s[2],
            },
            KernelSpec::Triangle { a, b, .. } => KernelSpec::Triangle {
                a: *a,
                b: *b,
                sigma0: s[0],
                sigma_plus: s[1],
                sigma_minus: s[2],
            },
        }
    }

    /// All three signs equal: the kernel averages a multiple of the identity
    /// projection and carries no information about the transform.
    pub fn is_identity_average(&self) -> bool {
        let [s0, sp, sm] = self.sigmas();
        s0.approx_eq(sp, 1e-12) && s0.approx_eq(sm, 1e-12)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::UnsupportedParams(format!("{name} must be positive, got {v}")))
            }
        };
        let finite_signs = |s: [UnitComplex; 3]| {
            if s.iter().all(|u| u.angle().is_finite()) {
                Ok(())
            } else {
                Err(Error::UnsupportedParams("non-finite sign angle".into()))
            }
        };
        match self {
            KernelSpec::New { b, phi, .. } => {
                positive("b", *b)?;
                if !(phi.is_finite() && *phi > 0.0 && *phi < PI) {
                    return Err(Error::UnsupportedParams(format!(
                        "phi must lie in (0, π), got {phi}"
                    )));
                }
                finite_signs(self.sigmas())
            }
            KernelSpec::Diagonal { b, .. } => {
                positive("b", *b)?;
                finite_signs(self.sigmas())
            }
            KernelSpec::Triangle { a, b, .. } => {
                positive("b", *b)?;
                if !a.is_finite() {
                    return Err(Error::UnsupportedParams("a must be finite".into()));
                }
                finite_signs(self.sigmas())
            }
            KernelSpec::Scaled { inner, rho } => {
                positive("rho", *rho)?;
                inner.validate()
            }
        }
    }

    /// Linear map from reference to physical coordinates of the base spec.
    pub fn reference_map(&self) -> Affine2 {
        let (base, rho) = self.base();
        let m = match *base {
            KernelSpec::New { b, phi, .. } => [[1.0, b * phi.cos()], [0.0, b * phi.sin()]],
            KernelSpec::Diagonal { b, .. } => [[1.0, 0.0], [0.0, b]],
            KernelSpec::Triangle { a, b, .. } => [[1.0, a], [0.0, b]],
            KernelSpec::Scaled { .. } => unreachable!(),
        };
        Affine2::linear([[rho * m[0][0], rho * m[0][1]], [rho * m[1][0], rho * m[1][1]]])
    }

    pub fn compile(&self) -> Result<Kernel> {
        self.validate()?;
        let forward = self.reference_map();
        let inverse = forward
            .inverse()
            .ok_or_else(|| Error::UnsupportedParams("singular reference map".into()))?;
        let weight = 1.0 / forward.det().abs();
        let s = self.sigmas().map(UnitComplex::value);
        let shape = match self.base().0 {
            KernelSpec::New { .. } => Shape::Halves {
                c0: s[0],
                c1: 0.5 * (s[1] + s[2]),
            },
            KernelSpec::Diagonal { .. } => Shape::Diagonals {
                c0: s[0],
                c1: 0.5 * (s[1] + s[2]),
                c2: s[1] - s[2],
            },
            KernelSpec::Triangle { .. } => Shape::Triangles {
                c: [2.0 * s[0], 2.0 * s[1], 2.0 * s[2]],
            },
            KernelSpec::Scaled { .. } => unreachable!(),
        };
        Ok(Kernel {
            shape,
            forward,
            inverse,
            weight,
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<Complex64> {
        Ok(self.compile()?.eval(x, y))
    }
}

/// `F(x, y)` for the given spec.
pub fn eval_kernel(spec: &KernelSpec, x: f64, y: f64) -> Result<Complex64> {
    spec.eval(x, y)
}

#[derive(Clone, Copy, Debug)]
enum Shape {
    /// `c0·(−β⊗α) + c1·(α⊗α − α⊗β)`
    Halves { c0: Complex64, c1: Complex64 },
    /// `c0·α⊗α − c1·(α⊗β + β⊗α) − c2·γ⊗γ`
    Diagonals {
        c0: Complex64,
        c1: Complex64,
        c2: Complex64,
    },
    /// `Σ c_k G_k`
    Triangles { c: [Complex64; 3] },
}

/// A validated kernel ready for repeated evaluation.
#[derive(Clone, Copy, Debug)]
pub struct Kernel {
    shape: Shape,
    forward: Affine2,
    inverse: Affine2,
    weight: f64,
}

impl Kernel {
    /// Kernel in reference coordinates, without the Jacobian weight.
    #[inline]
    pub fn eval_reference(&self, u: f64, v: f64) -> Complex64 {
        match self.shape {
            Shape::Halves { c0, c1 } => {
                if u.abs() >= 1.0 || v.abs() >= 1.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let (au, bu, av, bv) = (alpha(u), beta(u), alpha(v), beta(v));
                c0 * (-bu * av) + c1 * (au * av - au * bv)
            }
            Shape::Diagonals { c0, c1, c2 } => {
                if u.abs() >= 1.0 || v.abs() >= 1.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let (au, bu, av, bv) = (alpha(u), beta(u), alpha(v), beta(v));
                c0 * (au * av) - c1 * (au * bv + bu * av) - c2 * (gamma(u) * gamma(v))
            }
            Shape::Triangles { c } => {
                let g = triangle_g_all(u, v);
                c[0] * g[0] + c[1] * g[1] + c[2] * g[2]
            }
        }
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let [u, v] = self.inverse.apply_linear([x, y]);
        self.eval_reference(u, v) * self.weight
    }

    pub fn at(&self, p: Point) -> Complex64 {
        self.eval(p[0], p[1])
    }

    /// Reference-to-physical map.
    pub fn forward(&self) -> &Affine2 {
        &self.forward
    }

    pub fn jacobian_weight(&self) -> f64 {
        self.weight
    }

    pub fn reference_support(&self) -> Polygon {
        match self.shape {
            Shape::Triangles { .. } => Polygon::new(support_vertices()).expect("hexagon"),
            _ => Polygon::rectangle([-1.0, -1.0], [1.0, 1.0]).expect("square"),
        }
    }

    /// Closed support of the kernel in physical coordinates.
    pub fn support(&self) -> Polygon {
        self.reference_support()
            .map(&self.forward)
            .expect("support of a nonsingular map")
    }

    pub fn reference_breaklines(&self) -> Breaklines {
        match self.shape {
            Shape::Triangles { .. } => Breaklines::triangular(0.5),
            _ => Breaklines::grid(0.5),
        }
    }

    /// Lines off which the kernel is polynomial, in physical coordinates.
    pub fn breaklines(&self) -> Breaklines {
        self.reference_breaklines().pushed(&self.forward)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn optimal_square_kernel_values() {
        let k = KernelSpec::optimal_new(1.0, PI / 2.0);
        assert!((k.eval(0.0, 0.0).unwrap() - c(-1.0)).norm() < 1e-15);
        assert_eq!(k.eval(1.0, 0.0).unwrap(), c(0.0));
        let s = k.clone().scaled(2.0);
        assert!((s.eval(0.0, 0.0).unwrap() - c(-0.25)).norm() < 1e-15);
    }

    #[test]
    fn closed_form_of_optimal_kernel() {
        let k = KernelSpec::optimal_new(1.0, PI / 2.0).compile().unwrap();
        for &(x, y) in &[(0.1, 0.3), (-0.6, 0.2), (0.75, -0.8), (0.45, 0.55)] {
            let f = alpha(x) * beta(y) - beta(x) * alpha(y) - alpha(x) * alpha(y);
            assert!((k.eval(x, y) - c(f)).norm() < 1e-15);
        }
    }

    #[test]
    fn shear_formula() {
        let (b, phi) = (1.3, 1.1);
        let sheared = KernelSpec::optimal_new(b, phi).compile().unwrap();
        let square = KernelSpec::optimal_new(1.0, PI / 2.0).compile().unwrap();
        for &(x, y) in &[(0.1, 0.3), (-0.6, 0.2), (0.75, -0.8)] {
            let want = square.eval(x - y / phi.tan(), y / (b * phi.sin())) / (b * phi.sin());
            assert!((sheared.eval(x, y) - want).norm() < 1e-14);
        }
    }

    #[test]
    fn triangle_transport_formula() {
        let (a, b) = (0.3, 0.9);
        let sp = UnitComplex::from_angle(0.4);
        let sm = UnitComplex::from_angle(-1.1);
        let t = KernelSpec::triangle(a, b, sp, sm).compile().unwrap();
        let r = KernelSpec::triangle(0.0, 1.0, sp, sm).compile().unwrap();
        for &(x, y) in &[(0.1, 0.3), (-0.6, 0.2), (0.45, -0.5)] {
            let want = r.eval(x - a / b * y, y / b) / b;
            assert!((t.eval(x, y) - want).norm() < 1e-14);
        }
    }

    #[test]
    fn triangle_kernel_is_even() {
        let t = KernelSpec::triangle(0.2, 1.1, UnitComplex::from_angle(0.7), UnitComplex::ONE)
            .compile()
            .unwrap();
        for i in 0..50 {
            let x = (i as f64 * 0.173).sin() * 1.2;
            let y = (i as f64 * 0.311).cos() * 1.2;
            assert!((t.eval(x, y) - t.eval(-x, -y)).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        for bad in [
            KernelSpec::optimal_new(-1.0, 1.0),
            KernelSpec::optimal_new(1.0, 0.0),
            KernelSpec::optimal_new(1.0, PI),
            KernelSpec::diagonal(0.0, 1.0),
            KernelSpec::optimal_new(1.0, 1.0).scaled(0.0),
        ] {
            assert!(matches!(bad.validate(), Err(Error::UnsupportedParams(_))));
        }
    }

    #[test]
    fn support_contains_nonzero_values() {
        let k = KernelSpec::optimal_new(1.4, 1.2).compile().unwrap();
        let supp = k.support();
        for i in 0..400 {
            let x = -3.0 + 6.0 * ((i * 37) % 400) as f64 / 400.0;
            let y = -3.0 + 6.0 * ((i * 91) % 400) as f64 / 400.0;
            if k.eval(x, y).norm() > 0.0 {
                assert!(supp.contains([x, y]));
            }
        }
    }

    #[test]
    fn identity_average_flag() {
        let s = [UnitComplex::ONE; 3];
        assert!(KernelSpec::new_family(1.0, 1.5, s).is_identity_average());
        assert!(!KernelSpec::optimal_new(1.0, 1.5).is_identity_average());
    }
}
