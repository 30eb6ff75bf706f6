//! Translation, dilation and rotation averages of single-scale Haar
//! transforms.

mod oracle;
mod series;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{cell_measure, cell_piece, locate, HaarSystem, Piece};
use crate::error::{Error, Result};
use crate::geometry::{clip_convex, sub, translate_ring, Affine2, Point, Polygon};
use crate::quad::{chunked_mc, integrate_polygon_on, GaussLegendre, Integral, McConfig, McEstimate, QuadConfig};
use crate::special::{Kernel, UnitComplex};

pub use oracle::{autocorrelation, averaged_kernel_oracle, triangle_g_oracle};
pub use series::{
    calibre_average, homogenized_profile, kr_truncated, profile_kink_angles, rotation_fourier_sides,
    RadialKernel, SeriesTruncation,
};

/// `amp · p_x(x) · p_y(y)` on the box `[lo, hi]`, zero outside; the
/// polynomials are given by coefficients of `1, t, t²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub lo: Point,
    pub hi: Point,
    pub px: [f64; 3],
    pub py: [f64; 3],
    pub amp: Complex64,
}

impl TestFunction {
    pub fn zero() -> Self {
        TestFunction {
            lo: [0.0, 0.0],
            hi: [1.0, 1.0],
            px: [0.0; 3],
            py: [0.0; 3],
            amp: Complex64::new(0.0, 0.0),
        }
    }

    /// Product of parabolas vanishing on the box edges, peak value `|amp|`.
    pub fn bump(lo: Point, hi: Point, amp: Complex64) -> Self {
        let par = |a: f64, b: f64| {
            let s = 4.0 / ((b - a) * (b - a));
            [-a * b * s, (a + b) * s, -s]
        };
        TestFunction {
            lo,
            hi,
            px: par(lo[0], hi[0]),
            py: par(lo[1], hi[1]),
            amp,
        }
    }

    /// Random box meeting `[-r, r]²` and random quadratic factors.
    pub fn random<R: Rng>(rng: &mut R, r: f64) -> Self {
        let cx = rng.random_range(-r..r);
        let cy = rng.random_range(-r..r);
        let wx = rng.random_range(0.3..1.5);
        let wy = rng.random_range(0.3..1.5);
        let lo = [cx - 0.5 * wx, cy - 0.5 * wy];
        let hi = [cx + 0.5 * wx, cy + 0.5 * wy];
        let mut f = TestFunction::bump(
            lo,
            hi,
            Complex64::from_polar(1.0, rng.random_range(-3.1..3.1)),
        );
        // tilt so the function is not symmetric in its box
        let tx = rng.random_range(-0.5..0.5);
        let ty = rng.random_range(-0.5..0.5);
        f.px = tilt(f.px, tx, cx);
        f.py = tilt(f.py, ty, cy);
        f
    }

    pub fn box_polygon(&self) -> Polygon {
        Polygon::rectangle(self.lo, self.hi).expect("non-empty box")
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        if x < self.lo[0] || x > self.hi[0] || y < self.lo[1] || y > self.hi[1] {
            return Complex64::new(0.0, 0.0);
        }
        self.amp * (poly(&self.px, x) * poly(&self.py, y))
    }

    /// `∫_{ring ∩ box} f` for a convex counterclockwise ring, exactly.
    pub fn integral_over(&self, ring: &[Point]) -> Complex64 {
        let (rlo, rhi) = crate::geometry::bbox(ring);
        if rhi[0] <= self.lo[0] || rlo[0] >= self.hi[0] || rhi[1] <= self.lo[1] || rlo[1] >= self.hi[1] {
            return Complex64::new(0.0, 0.0);
        }
        let inside = rlo[0] >= self.lo[0] && rhi[0] <= self.hi[0] && rlo[1] >= self.lo[1] && rhi[1] <= self.hi[1];
        let clipped;
        let ring = if inside {
            ring
        } else {
            let b = [self.lo, [self.hi[0], self.lo[1]], self.hi, [self.lo[0], self.hi[1]]];
            clipped = clip_convex(ring, &b);
            if clipped.len() < 3 {
                return Complex64::new(0.0, 0.0);
            }
            &clipped
        };
        self.amp * self.green(ring)
    }

    /// `∮ Q(x) p_y(y) dy` with `Q' = p_x`, exact by three-point Gauss.
    fn green(&self, ring: &[Point]) -> f64 {
        let gl = green_rule();
        let q = |x: f64| x * (self.px[0] + x * (0.5 * self.px[1] + x * self.px[2] / 3.0));
        let n = ring.len();
        let mut acc = 0.0;
        for i in 0..n {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            let dy = b[1] - a[1];
            if dy == 0.0 {
                continue;
            }
            let mut s = 0.0;
            for (t, w) in gl.iter() {
                let x = a[0] + t * (b[0] - a[0]);
                let y = a[1] + t * dy;
                s += w * q(x) * poly(&self.py, y);
            }
            acc += s * dy;
        }
        acc
    }
}

fn green_rule() -> &'static [(f64, f64); 3] {
    static R: std::sync::OnceLock<[(f64, f64); 3]> = std::sync::OnceLock::new();
    R.get_or_init(|| {
        let g = GaussLegendre::new(3);
        let v: Vec<(f64, f64)> = g.unit().collect();
        [v[0], v[1], v[2]]
    })
}

#[inline]
fn poly(c: &[f64; 3], t: f64) -> f64 {
    c[0] + t * (c[1] + t * c[2])
}

/// `p(t)·(1 + s(t − c))` with the cubic term dropped.
fn tilt(p: [f64; 3], s: f64, c: f64) -> [f64; 3] {
    let k0 = 1.0 - s * c;
    [p[0] * k0, p[1] * k0 + p[0] * s, p[2] * k0 + p[1] * s]
}

/// Uniform translation over the fundamental domain of the system's lattice:
/// the cell itself for square lattices, `Ω = T ∪ (−T)` for triangles.
pub fn sample_translation<R: Rng>(system: &HaarSystem, rng: &mut R) -> Point {
    let map = system.reference_map();
    let mut u = [rng.random::<f64>(), rng.random::<f64>()];
    if let HaarSystem::Triangle { .. } = system {
        if u[0] + u[1] > 1.0 {
            u = [1.0 - u[0], 1.0 - u[1]];
        }
        if rng.random::<bool>() {
            u = [-u[0], -u[1]];
        }
    }
    map.apply_linear(u)
}

/// `P_t f(x)`: the single-scale transform on the lattice translated by `t`,
/// with multiplier `sigma[k]` on kind `k`.
pub fn single_grid_projection(
    system: &HaarSystem,
    sigma: &[Complex64],
    f: &TestFunction,
    x: Point,
    t: Point,
) -> Complex64 {
    let shape = system.shape();
    let y = sub(x, t);
    let cell = locate(system, &y, 0);
    let (_, digit) = locate(system, &y, -1).parent(shape);
    let mut ints = [Complex64::new(0.0, 0.0); 4];
    let mut any = false;
    for (d, slot) in ints.iter_mut().enumerate() {
        if let Piece::Polygon(r) = cell_piece(system, &cell.child(shape, d)) {
            *slot = f.integral_over(&translate_ring(&r, t));
            any |= *slot != Complex64::new(0.0, 0.0);
        }
    }
    if !any {
        return Complex64::new(0.0, 0.0);
    }
    let inv_measure = 1.0 / cell_measure(system, &cell);
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, s) in sigma.iter().enumerate() {
        let v = system.child_values(crate::basis::Kind(k as u8));
        if v[digit] == 0.0 {
            continue;
        }
        let coef: Complex64 = ints.iter().zip(v).map(|(i, w)| i * *w).sum();
        acc += s * coef * (v[digit] * inv_measure);
    }
    acc
}

/// Monte-Carlo estimate of `E_t[P_t f](x)` over uniform translations.
pub fn mc_average_translations(
    system: &HaarSystem,
    sigma: &[UnitComplex],
    f: &TestFunction,
    x: Point,
    cfg: &McConfig,
) -> Result<McEstimate> {
    cfg.validate()?;
    system.validate()?;
    if system.dim() != 2 {
        return Err(Error::UnsupportedParams("translation averages need a planar system".into()));
    }
    if sigma.len() != system.kind_count() {
        return Err(Error::InvalidConfig("one multiplier per kind required".into()));
    }
    let s: Vec<Complex64> = sigma.iter().map(|u| u.value()).collect();
    let stats = chunked_mc(cfg.samples, cfg.seed, |rng| {
        let t = sample_translation(system, rng);
        single_grid_projection(system, &s, f, x, t)
    });
    Ok(McEstimate {
        value: stats.mean(),
        stderr: stats.stderr(),
        samples: stats.count(),
    })
}

/// `(F * f)(x) = ∫ F(x − s) f(s) ds` by breakline-aligned quadrature.
pub fn convolve_kernel(kernel: &Kernel, f: &TestFunction, x: Point, cfg: &QuadConfig) -> Result<Integral> {
    let reflect = Affine2 {
        m: [[-1.0, 0.0], [0.0, -1.0]],
        t: x,
    };
    let supp = kernel.support().map(&reflect)?;
    let region = clip_convex(f.box_polygon().vertices(), supp.vertices());
    let zero = Integral {
        value: Complex64::new(0.0, 0.0),
        err_est: 0.0,
        cells: 0,
    };
    if region.len() < 3 {
        return Ok(zero);
    }
    let region = match Polygon::new(region) {
        Ok(p) => p,
        Err(Error::DegenerateRegion) => return Ok(zero),
        Err(e) => return Err(e),
    };
    let lines = kernel.breaklines().reflected_about(x);
    integrate_polygon_on(
        |s0, s1| kernel.eval(x[0] - s0, x[1] - s1) * f.eval(s0, s1),
        &region,
        &lines,
        cfg,
    )
}
