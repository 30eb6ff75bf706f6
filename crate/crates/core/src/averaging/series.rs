//! Dilation series of a kernel and its degree −2 homogenization.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, Point};
use crate::quad::{integrate_1d_complex, integrate_polygon_on, QuadConfig};
use crate::special::Kernel;

/// `Σ_{n = m_low}^{m_high} F^{r·2ⁿ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesTruncation {
    pub r: f64,
    pub m_low: i32,
    pub m_high: i32,
}

impl SeriesTruncation {
    pub fn new(r: f64, m_low: i32, m_high: i32) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidConfig(format!("calibre must be positive, got {r}")));
        }
        if m_low > m_high {
            return Err(Error::InvalidConfig("m_low must not exceed m_high".into()));
        }
        Ok(SeriesTruncation { r, m_low, m_high })
    }

    pub fn shifted(&self, by: i32) -> Self {
        SeriesTruncation {
            m_low: self.m_low + by,
            m_high: self.m_high + by,
            ..*self
        }
    }
}

pub fn kr_truncated(kernel: &Kernel, trunc: &SeriesTruncation, x: Point) -> Result<Complex64> {
    if x == [0.0, 0.0] {
        return Err(Error::OriginNotAllowed);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for n in trunc.m_low..=trunc.m_high {
        let s = trunc.r * 2f64.powi(n);
        acc += kernel.eval(x[0] / s, x[1] / s) / (s * s);
    }
    Ok(acc)
}

/// Radius of the smallest origin-centred disc containing the support.
fn support_radius(kernel: &Kernel) -> f64 {
    kernel
        .support()
        .vertices()
        .iter()
        .map(|v| dot(*v, *v).sqrt())
        .fold(0.0, f64::max)
}

/// `(1/log 2) ∫₀^∞ F(r e^{iφ}) r dr`.
pub fn homogenized_profile(kernel: &Kernel, phi: f64, cfg: &QuadConfig) -> Result<Complex64> {
    let dir = [phi.cos(), phi.sin()];
    let big_r = support_radius(kernel) * (1.0 + 1e-12);
    let bps = kernel.breaklines().ray_crossings(dir, big_r);
    let v = integrate_1d_complex(
        |r| kernel.eval(r * dir[0], r * dir[1]) * r,
        0.0,
        big_r,
        &bps,
        cfg,
    )?;
    Ok(v.value / LN_2)
}

/// `(1/log 2) ∫₁² k^r_M(e^{iφ}) dr/r` over the window `[m_low, m_high]`.
pub fn calibre_average(
    kernel: &Kernel,
    phi: f64,
    m_low: i32,
    m_high: i32,
    cfg: &QuadConfig,
) -> Result<Complex64> {
    let dir = [phi.cos(), phi.sin()];
    let big_r = support_radius(kernel) * (1.0 + 1e-12);
    let crossings = kernel.breaklines().ray_crossings(dir, big_r);
    // F^s(e^{iφ}) kinks where 1/s is a crossing radius
    let mut bps = Vec::new();
    for n in m_low..=m_high {
        let p = 2f64.powi(n);
        for &c in &crossings {
            let r = 1.0 / (p * c);
            if r > 1.0 && r < 2.0 {
                bps.push(r);
            }
        }
        let r = 1.0 / (p * big_r);
        if r > 1.0 && r < 2.0 {
            bps.push(r);
        }
    }
    let v = integrate_1d_complex(
        |r| {
            let t = SeriesTruncation { r, m_low, m_high };
            kr_truncated(kernel, &t, dir).expect("unit vector") / r
        },
        1.0,
        2.0,
        &bps,
        cfg,
    )?;
    Ok(v.value / LN_2)
}

/// Directions in which the profile may fail to be smooth: rays through
/// intersections of two breaklines inside the support.
pub fn profile_kink_angles(kernel: &Kernel) -> Vec<f64> {
    let big_r = support_radius(kernel) * (1.0 + 1e-9);
    let fams = kernel.breaklines().families;
    let mut out = vec![0.0, 2.0 * PI];
    for (i, f1) in fams.iter().enumerate() {
        for f2 in &fams[i + 1..] {
            let det = f1.normal[0] * f2.normal[1] - f1.normal[1] * f2.normal[0];
            if det.abs() < 1e-14 {
                continue;
            }
            let range = |f: &crate::quad::LineFamily| {
                let reach = big_r * dot(f.normal, f.normal).sqrt();
                let lo = ((-reach - f.offset) / f.spacing).floor() as i64;
                let hi = ((reach - f.offset) / f.spacing).ceil() as i64;
                lo..=hi
            };
            for j1 in range(f1) {
                let c1 = f1.offset + j1 as f64 * f1.spacing;
                for j2 in range(f2) {
                    let c2 = f2.offset + j2 as f64 * f2.spacing;
                    let x = (c1 * f2.normal[1] - c2 * f1.normal[1]) / det;
                    let y = (f1.normal[0] * c2 - f2.normal[0] * c1) / det;
                    let rr = (x * x + y * y).sqrt();
                    if rr > 1e-12 && rr < big_r {
                        out.push(y.atan2(x).rem_euclid(2.0 * PI));
                    }
                }
            }
        }
        // lines through the origin are rays of their own
        if (f1.offset / f1.spacing).fract().abs() < 1e-12 {
            let a = (-f1.normal[0]).atan2(f1.normal[1]);
            out.push(a.rem_euclid(2.0 * PI));
            out.push((a + PI).rem_euclid(2.0 * PI));
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    out
}

/// Both sides of `∫₀^{2π} k(e^{iφ}) e^{2iφ} dφ = (1/log 2) ∬ F(z) z²/|z|² dA`,
/// each computed independently.
pub fn rotation_fourier_sides(kernel: &Kernel, cfg: &QuadConfig) -> Result<(Complex64, Complex64)> {
    let kinks = profile_kink_angles(kernel);
    let lhs = integrate_1d_complex(
        |phi| {
            homogenized_profile(kernel, phi, cfg).unwrap_or_else(|e| match e {
                Error::NonConvergence { estimate, .. } => estimate / LN_2,
                _ => Complex64::new(f64::NAN, f64::NAN),
            }) * Complex64::from_polar(1.0, 2.0 * phi)
        },
        0.0,
        2.0 * PI,
        &kinks,
        cfg,
    )?
    .value;
    let rhs = integrate_polygon_on(
        |x, y| {
            let z = Complex64::new(x, y);
            let w = z.norm_sqr();
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            kernel.eval(x, y) * z * z / w
        },
        &kernel.support(),
        &kernel.breaklines(),
        cfg,
    )?
    .value
        / LN_2;
    Ok((lhs, rhs))
}

/// Degree −2 homogeneous kernel determined by sampled values on the circle.
pub struct RadialKernel {
    kernel: Kernel,
    cfg: QuadConfig,
    cache: Mutex<HashMap<u64, Complex64>>,
}

impl RadialKernel {
    pub fn new(kernel: Kernel, cfg: QuadConfig) -> Self {
        RadialKernel {
            kernel,
            cfg,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// `k(e^{iφ})`, cached per angle.
    pub fn profile(&self, phi: f64) -> Result<Complex64> {
        let key = phi.to_bits();
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(*v);
        }
        let v = homogenized_profile(&self.kernel, phi, &self.cfg)?;
        self.cache.lock().expect("cache poisoned").insert(key, v);
        Ok(v)
    }

    /// `k(x) = k(x/|x|) / |x|²`.
    pub fn eval(&self, x: Point) -> Result<Complex64> {
        let w = x[0] * x[0] + x[1] * x[1];
        if w == 0.0 {
            return Err(Error::OriginNotAllowed);
        }
        Ok(self.profile(x[1].atan2(x[0]))? / w)
    }

    pub fn cached_angles(&self) -> usize {
        self.cache.lock().expect("cache poisoned").len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{KernelSpec, UnitComplex};

    fn kern() -> Kernel {
        KernelSpec::optimal_new(1.0, PI / 2.0).compile().unwrap()
    }

    #[test]
    fn doubling_is_exact() {
        let k = kern();
        let t = SeriesTruncation::new(1.3, -10, 30).unwrap();
        for x in [[0.3, 0.4], [-1.1, 0.05], [0.9, -0.7]] {
            let a = kr_truncated(&k, &t.shifted(1), [2.0 * x[0], 2.0 * x[1]]).unwrap();
            let b = kr_truncated(&k, &t, x).unwrap() / 4.0;
            assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-300));
        }
    }

    #[test]
    fn far_outside_window_is_zero() {
        let k = kern();
        let t = SeriesTruncation::new(1.0, -5, -3).unwrap();
        assert_eq!(kr_truncated(&k, &t, [3.0, 3.0]).unwrap(), Complex64::new(0.0, 0.0));
        assert!(matches!(kr_truncated(&k, &t, [0.0, 0.0]), Err(Error::OriginNotAllowed)));
    }

    #[test]
    fn window_tail_is_small() {
        let k = kern();
        let a = kr_truncated(&k, &SeriesTruncation::new(1.0, -40, 40).unwrap(), [1.0, 0.0]).unwrap();
        let b = kr_truncated(&k, &SeriesTruncation::new(1.0, -60, 60).unwrap(), [1.0, 0.0]).unwrap();
        assert!((a - b).norm() <= 1e-10);
    }

    #[test]
    fn calibre_average_is_the_profile() {
        let k = KernelSpec::triangle(0.3, 0.9, UnitComplex::from_angle(1.0), UnitComplex::MINUS_ONE)
            .compile()
            .unwrap();
        let cfg = QuadConfig::default();
        for phi in [0.1, 1.3, 2.9] {
            let a = calibre_average(&k, phi, -40, 40, &cfg).unwrap();
            let b = homogenized_profile(&k, phi, &cfg).unwrap();
            assert!((a - b).norm() < 1e-8, "{phi}: {a} vs {b}");
        }
    }

    #[test]
    fn radial_kernel_homogeneity() {
        let rk = RadialKernel::new(kern(), QuadConfig::default());
        let x = [0.3, -0.8];
        let a = rk.eval([2.0 * x[0], 2.0 * x[1]]).unwrap();
        let b = rk.eval(x).unwrap() / 4.0;
        assert_eq!(a, b);
        assert_eq!(rk.cached_angles(), 1);
    }

    #[test]
    fn profile_ignores_dilation() {
        let cfg = QuadConfig::default();
        let spec = KernelSpec::optimal_new(1.2, 1.3);
        let a = homogenized_profile(&spec.compile().unwrap(), 0.7, &cfg).unwrap();
        let b = homogenized_profile(&spec.scaled(3.0).compile().unwrap(), 0.7, &cfg).unwrap();
        assert!((a - b).norm() < 1e-10);
    }
}
