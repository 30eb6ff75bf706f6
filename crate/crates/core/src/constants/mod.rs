//! The constant `C` relating the Ahlfors–Beurling operator to an averaged
//! martingale transform: `1/C = |I| / (2 log 2)` where
//! `I = ∬ F(x, y) (x + iy)² / (x² + y²) dx dy`.
//!
//! Every kernel family has a generic evaluator (the planar integral in
//! physical coordinates) and a family-specific reduced form. The two are kept
//! independent so each can check the other.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::quad::{integrate_polygon_on, Breaklines, Integral, QuadConfig};
use crate::special::{alpha, beta, gamma, region_polys, region_vertices, GKind, KernelSpec, UnitComplex};

/// Which evaluator produced a [`ConstantResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// `∬ F · z²/|z|²` over the physical support.
    Planar,
    /// Real/imaginary split over `[0,1]²` for the diagonal family.
    DiagonalSplit,
    /// Symmetrized `ζ = a + ib` weight over the quarter domain A–G.
    TriangleZeta,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantResult {
    /// `I / (2 log 2)`; its modulus is `1/C`.
    pub integral_i: Complex64,
    /// `I = ∬ F · z²/|z|²` itself.
    pub raw_integral: Complex64,
    #[serde(rename = "C")]
    pub c: f64,
    /// Error bound on `integral_i`.
    pub err_est: f64,
    pub cells_used: usize,
    /// All three signs equal. The value is legitimate but says nothing about
    /// the transform, so searches skip it.
    pub degenerate: bool,
    pub method: Method,
}

impl ConstantResult {
    fn from_raw(raw: Complex64, raw_err: f64, cells: usize, degenerate: bool, method: Method) -> Self {
        let norm = 2.0 * LN_2;
        let integral_i = raw / norm;
        ConstantResult {
            integral_i,
            raw_integral: raw,
            c: 1.0 / integral_i.norm(),
            err_est: raw_err / norm,
            cells_used: cells,
            degenerate,
            method,
        }
    }

    /// Error bound on `C`, to first order.
    pub fn c_err(&self) -> f64 {
        self.c * self.c * self.err_est
    }
}

/// `z² / |z|²`, taken as 0 at the origin.
#[inline]
pub fn rotation_weight(x: f64, y: f64) -> Complex64 {
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new((x * x - y * y) / r2, 2.0 * x * y / r2)
}

/// Dispatches to the reduced form of the family where one exists.
pub fn constant_for(spec: &KernelSpec, cfg: &QuadConfig) -> Result<ConstantResult> {
    spec.validate()?;
    // C does not depend on the calibre: the weight is homogeneous of degree 0.
    match *spec.base().0 {
        KernelSpec::Diagonal {
            b,
            sigma0,
            sigma_plus,
            sigma_minus,
        } => diagonal_split(b, [sigma0, sigma_plus, sigma_minus], cfg),
        KernelSpec::Triangle {
            a,
            b,
            sigma0,
            sigma_plus,
            sigma_minus,
        } => triangle_zeta(a, b, [sigma0, sigma_plus, sigma_minus], cfg),
        _ => planar_constant(spec, cfg),
    }
}

/// The generic evaluator, for any spec.
pub fn planar_constant(spec: &KernelSpec, cfg: &QuadConfig) -> Result<ConstantResult> {
    let kernel = spec.compile()?;
    let r = integrate_polygon_on(
        |x, y| kernel.eval(x, y) * rotation_weight(x, y),
        &kernel.support(),
        &kernel.breaklines(),
        cfg,
    )?;
    Ok(ConstantResult::from_raw(
        r.value,
        r.err_est,
        r.cells,
        spec.is_identity_average(),
        Method::Planar,
    ))
}

/// `(1/√2)(5π/6 + 9 arctan(1/√2) − 7 arctan √2) + (8/3) log 2 − 2 log 3`,
/// the value of `I` for the `√2 × 1` rectangle.
pub fn closed_form_i_sqrt2() -> f64 {
    let s = std::f64::consts::SQRT_2;
    (5.0 * PI / 6.0 + 9.0 * (1.0 / s).atan() - 7.0 * s.atan()) / s + 8.0 / 3.0 * LN_2
        - 2.0 * 3f64.ln()
}

/// `12 log 2 / (16π + 32 log 2 − 15 log 5 − 40 arctan 2)`, the constant of the
/// unit square.
pub fn closed_form_c_unit() -> f64 {
    12.0 * LN_2 / (16.0 * PI + 32.0 * LN_2 - 15.0 * 5f64.ln() - 40.0 * 2f64.atan())
}

/// `Re I` for the parallelogram family from the sheared-coordinate form
/// `−2 (b sin φ)² ∬ F(u, v) v² / (u² + 2b cos φ uv + b² v²)`.
///
/// The imaginary part is not captured: it vanishes only for rectangles.
pub fn new_reduced_real(spec: &KernelSpec, cfg: &QuadConfig) -> Result<Integral> {
    let (b, phi) = match *spec.base().0 {
        KernelSpec::New { b, phi, .. } => (b, phi),
        _ => {
            return Err(Error::UnsupportedParams(
                "reduced parallelogram form needs the `new` family".into(),
            ))
        }
    };
    let kernel = spec.compile()?;
    let (bc, bs) = (b * phi.cos(), b * phi.sin());
    let r = integrate_polygon_on(
        |u, v| {
            let q = u * u + 2.0 * bc * u * v + b * b * v * v;
            if q == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            kernel.eval_reference(u, v) * (v * v / q)
        },
        &kernel.reference_support(),
        &kernel.reference_breaklines(),
        cfg,
    )?;
    let f = -2.0 * bs * bs;
    Ok(Integral {
        value: Complex64::new((r.value * f).re, 0.0),
        err_est: r.err_est * f.abs(),
        cells: r.cells,
    })
}

/// The three `[0,1]²` integrals of the diagonal family at stretch `b`:
/// `P = ∬ αα w`, `Q = ∬ (αβ + βα) w` with `w = x²/(x² + b²y²)`, and
/// `R = ∬ γγ xy/(x² + b²y²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalParts {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub err_est: f64,
    pub cells: usize,
}

pub fn diagonal_parts(b: f64, cfg: &QuadConfig) -> Result<DiagonalParts> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::UnsupportedParams(format!("b must be positive, got {b}")));
    }
    let square = Polygon::unit_square();
    let lines = Breaklines::grid(0.5);
    let b2 = b * b;
    let pq = integrate_polygon_on(
        |x, y| {
            let d = x * x + b2 * y * y;
            if d == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let w = x * x / d;
            let (ax, ay) = (alpha(x), alpha(y));
            Complex64::new(ax * ay * w, (ax * beta(y) + beta(x) * ay) * w)
        },
        &square,
        &lines,
        cfg,
    )?;
    let r = integrate_polygon_on(
        |x, y| {
            let d = x * x + b2 * y * y;
            if d == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(gamma(x) * gamma(y) * x * y / d, 0.0)
        },
        &square,
        &lines,
        cfg,
    )?;
    Ok(DiagonalParts {
        p: pq.value.re,
        q: pq.value.im,
        r: r.value.re,
        err_est: pq.err_est + r.err_est,
        cells: pq.cells + r.cells,
    })
}

impl DiagonalParts {
    /// `I/(2 log 2) · log 2 / 4`, i.e. `∬_{[0,1]²}` of the folded integrand,
    /// for arbitrary signs.
    pub fn folded(&self, b: f64, s: [UnitComplex; 3]) -> Complex64 {
        let [s0, sp, sm] = s.map(UnitComplex::value);
        let c1 = 0.5 * (sp + sm);
        s0 * self.p - c1 * self.q - Complex64::new(0.0, b) * (sp - sm) * self.r
    }

    /// `J(b, ϑ) = P − cos ϑ · Q + 2b sin ϑ · R`, real for `σ± = e^{±iϑ}`.
    pub fn j(&self, b: f64, theta: f64) -> f64 {
        self.p - theta.cos() * self.q + 2.0 * b * theta.sin() * self.r
    }
}

fn diagonal_split(b: f64, s: [UnitComplex; 3], cfg: &QuadConfig) -> Result<ConstantResult> {
    let parts = diagonal_parts(b, cfg)?;
    // 1/C = (4 / log 2) · folded  ⇒  raw I = 8 · folded.
    let raw = parts.folded(b, s) * 8.0;
    let degenerate = s[0].approx_eq(s[1], 1e-12) && s[0].approx_eq(s[2], 1e-12);
    Ok(ConstantResult::from_raw(
        raw,
        8.0 * parts.err_est,
        parts.cells,
        degenerate,
        Method::DiagonalSplit,
    ))
}

/// Diagonal family with `σ₀ = 1`, `σ± = e^{±iϑ}`.
pub fn diagonal_constant(b: f64, theta: f64, cfg: &QuadConfig) -> Result<ConstantResult> {
    if !theta.is_finite() {
        return Err(Error::UnsupportedParams("theta must be finite".into()));
    }
    diagonal_split(
        b,
        [
            UnitComplex::ONE,
            UnitComplex::from_angle(theta),
            UnitComplex::from_angle(-theta),
        ],
        cfg,
    )
}

/// `J(b, ϑ)`, the quantity with `log 2 / (4C) = J`.
pub fn diagonal_j(b: f64, theta: f64, cfg: &QuadConfig) -> Result<(f64, f64)> {
    let parts = diagonal_parts(b, cfg)?;
    Ok((parts.j(b, theta), parts.err_est * (1.0 + 2.0 * b)))
}

fn triangle_zeta(a: f64, b: f64, s: [UnitComplex; 3], cfg: &QuadConfig) -> Result<ConstantResult> {
    if !(b.is_finite() && b > 0.0 && a.is_finite()) {
        return Err(Error::UnsupportedParams(format!("bad triangle shape a={a}, b={b}")));
    }
    let zeta = Complex64::new(a, b);
    let zbar = zeta.conj();
    let w = move |s: f64, t: f64| {
        let den = s + t * zbar;
        if den.norm_sqr() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            (s + t * zeta) / den
        }
    };
    let sig = s.map(UnitComplex::value);
    let tables = GKind::ALL.map(region_polys);
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut cells = 0;
    for (r, verts) in region_vertices().iter().enumerate() {
        let region = Polygon::new(verts.to_vec())?;
        let part = integrate_polygon_on(
            |x, y| {
                let g = sig[0] * tables[0][r].eval(x, y)
                    + sig[1] * tables[1][r].eval(x, y)
                    + sig[2] * tables[2][r].eval(x, y);
                g * (w(x, y) + w(y, x))
            },
            &region,
            &Breaklines::none(),
            cfg,
        )?;
        value += part.value;
        err += part.err_est;
        cells += part.cells;
    }
    // 1/C = (2 / log 2) ∬_A ...  ⇒  raw I = 4 ∬_A ...
    let degenerate = s[0].approx_eq(s[1], 1e-12) && s[0].approx_eq(s[2], 1e-12);
    Ok(ConstantResult::from_raw(
        value * 4.0,
        4.0 * err,
        cells,
        degenerate,
        Method::TriangleZeta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn closed_forms_have_expected_values() {
        assert!((closed_form_i_sqrt2() - 0.690_681_997_549_3).abs() < 1e-12);
        assert!((2.0 * LN_2 / closed_form_i_sqrt2() - 2.00714).abs() < 5e-6);
        assert!((closed_form_c_unit() - 2.069_778_348_3).abs() < 1e-9);
        assert!((closed_form_c_unit() - 2.0 * LN_2 / closed_form_i_sqrt2()).abs() > 0.05);
    }

    #[test]
    fn unit_square_matches_closed_form() {
        let r = constant_for(&KernelSpec::optimal_new(1.0, FRAC_PI_2), &cfg()).unwrap();
        assert!((r.c - closed_form_c_unit()).abs() < 1e-6, "{r:?}");
        assert!(r.integral_i.im.abs() < 1e-10);
        assert!((r.c * r.integral_i.norm() - 1.0).abs() < 1e-12);
        assert!(!r.degenerate);
    }

    #[test]
    fn sqrt2_rectangle_matches_closed_form() {
        let r = constant_for(&KernelSpec::optimal_new(2f64.sqrt(), FRAC_PI_2), &cfg()).unwrap();
        assert!(
            (r.raw_integral.norm() - closed_form_i_sqrt2()).abs() < 1e-8,
            "{:?} vs {}",
            r.raw_integral,
            closed_form_i_sqrt2()
        );
        assert!((r.c - 2.00714).abs() < 5e-6);
    }

    #[test]
    fn reduced_parallelogram_form_matches_real_part() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..4 {
            let b = rng.random_range(0.6..2.2);
            let phi = rng.random_range(0.9..2.2);
            let spec = KernelSpec::optimal_new(b, phi);
            let g = planar_constant(&spec, &cfg()).unwrap();
            let red = new_reduced_real(&spec, &cfg()).unwrap();
            assert!((g.raw_integral.re - red.value.re).abs() < 1e-7, "b={b} phi={phi}");
        }
    }

    #[test]
    fn diagonal_split_matches_planar() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..4 {
            let b = rng.random_range(0.4..2.0);
            let s = [
                UnitComplex::from_angle(rng.random_range(-PI..PI)),
                UnitComplex::from_angle(rng.random_range(-PI..PI)),
                UnitComplex::from_angle(rng.random_range(-PI..PI)),
            ];
            let spec = KernelSpec::Diagonal {
                b,
                sigma0: s[0],
                sigma_plus: s[1],
                sigma_minus: s[2],
            };
            let split = constant_for(&spec, &cfg()).unwrap();
            let planar = planar_constant(&spec, &cfg()).unwrap();
            assert_eq!(split.method, Method::DiagonalSplit);
            assert!(
                (split.integral_i - planar.integral_i).norm() < 1e-7,
                "{split:?} {planar:?}"
            );
        }
    }

    #[test]
    fn triangle_zeta_matches_planar() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..3 {
            let a = rng.random_range(-0.8..1.5);
            let b = rng.random_range(0.4..1.8);
            let spec = KernelSpec::triangle(
                a,
                b,
                UnitComplex::from_angle(rng.random_range(-PI..PI)),
                UnitComplex::from_angle(rng.random_range(-PI..PI)),
            );
            let z = constant_for(&spec, &cfg()).unwrap();
            let p = planar_constant(&spec, &cfg()).unwrap();
            assert_eq!(z.method, Method::TriangleZeta);
            assert!((z.integral_i - p.integral_i).norm() < 1e-7, "{z:?} {p:?}");
        }
    }

    #[test]
    fn diagonal_at_pi_is_even_kernel_case() {
        // With ϑ = π the diagonal kernel is even in each variable, like the
        // rectangle family, so the integral is real. At b = 1 it is also
        // symmetric under x ↔ y, which forces I = 0.
        for b in [0.6, 1.7] {
            let split = diagonal_constant(b, PI, &cfg()).unwrap();
            let planar = planar_constant(&KernelSpec::diagonal(b, PI), &cfg()).unwrap();
            assert!(split.integral_i.im.abs() < 1e-10);
            assert!((split.integral_i - planar.integral_i).norm() < 1e-9);
            let j = diagonal_j(b, PI, &cfg()).unwrap().0;
            assert!((LN_2 / (4.0 * split.c) - j.abs()).abs() < 1e-9);
        }
        let one = diagonal_constant(1.0, PI, &cfg()).unwrap();
        assert!(one.integral_i.norm() < 1e-12);
    }

    #[test]
    fn diagonal_j_antisymmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..3 {
            let b = rng.random_range(0.3..3.0);
            let t = rng.random_range(-PI..PI);
            let (j1, e1) = diagonal_j(1.0 / b, t, &cfg()).unwrap();
            let (j2, e2) = diagonal_j(b, -t, &cfg()).unwrap();
            assert!((j1 + j2).abs() <= 10.0 * (e1 + e2) + 1e-10, "{j1} {j2}");
        }
    }

    #[test]
    fn global_phase_leaves_c_unchanged() {
        let base = KernelSpec::triangle(0.3, 0.9, UnitComplex::from_angle(0.4), UnitComplex::from_angle(-1.1));
        let rot = UnitComplex::from_angle(0.77);
        let s = base.sigmas().map(|u| u * rot);
        let a = constant_for(&base, &cfg()).unwrap();
        let b = constant_for(&base.with_sigmas(s), &cfg()).unwrap();
        assert!((a.integral_i.norm() - b.integral_i.norm()).abs() < 1e-10);
    }

    #[test]
    fn calibre_does_not_change_c() {
        let spec = KernelSpec::optimal_new(1.3, 1.2);
        let a = planar_constant(&spec, &cfg()).unwrap();
        let b = planar_constant(&spec.clone().scaled(0.37), &cfg()).unwrap();
        assert!((a.integral_i - b.integral_i).norm() < 1e-8);
    }

    #[test]
    fn identity_average_is_flagged() {
        let ones = [UnitComplex::ONE; 3];
        for spec in [
            KernelSpec::new_family(1.0, FRAC_PI_2, ones),
            KernelSpec::diagonal(0.7, 0.0),
            KernelSpec::triangle(0.2, 1.0, UnitComplex::ONE, UnitComplex::ONE),
        ] {
            assert!(constant_for(&spec, &cfg()).unwrap().degenerate, "{spec:?}");
        }
        assert!(!diagonal_constant(0.7, 0.3, &cfg()).unwrap().degenerate);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            constant_for(&KernelSpec::optimal_new(-1.0, 1.0), &cfg()),
            Err(Error::UnsupportedParams(_))
        ));
        assert!(diagonal_constant(0.0, 1.0, &cfg()).is_err());
    }
}
