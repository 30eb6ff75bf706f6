//! Integration engines: adaptive Gauss–Legendre on intervals and on polygons
//! cut along a breakline lattice, plus a seeded Monte-Carlo estimator.
//!
//! Every integrand that appears in the averaging pipeline is a piecewise
//! polynomial on a lattice of lines times a weight that is homogeneous of
//! degree zero. Cutting along the lattice makes each cell smooth, and cells
//! whose closure contains the origin are fanned from the origin and mapped with
//! a collapsed (Duffy) square, on which the weight depends on one coordinate
//! only.

mod gauss;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, convex_contains, dot, midpoint, ring_area, sub, Affine2, Point, Polygon};

pub use gauss::GaussLegendre;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum recursion depth of the adaptive estimator.
    pub max_subdiv: u32,
    /// Gauss–Legendre nodes per axis.
    pub gl_order: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdiv: 20,
            gl_order: 16,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if self.gl_order < 2 {
            return Err(Error::InvalidConfig("gl_order must be at least 2".into()));
        }
        if self.max_subdiv < 1 {
            return Err(Error::InvalidConfig("max_subdiv must be at least 1".into()));
        }
        Ok(())
    }

    fn target(&self, estimate: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * estimate)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        McConfig { samples, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// The lines `normal·p = offset + j·spacing`, `j ∈ ℤ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFamily {
    pub normal: Point,
    pub spacing: f64,
    pub offset: f64,
}

/// Families of parallel lines along which an integrand may fail to be smooth.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Breaklines {
    pub families: Vec<LineFamily>,
}

impl Breaklines {
    pub fn none() -> Self {
        Breaklines::default()
    }

    /// Axis-parallel lines through the multiples of `spacing`.
    pub fn grid(spacing: f64) -> Self {
        Breaklines {
            families: vec![
                LineFamily {
                    normal: [1.0, 0.0],
                    spacing,
                    offset: 0.0,
                },
                LineFamily {
                    normal: [0.0, 1.0],
                    spacing,
                    offset: 0.0,
                },
            ],
        }
    }

    /// The grid plus the anti-diagonals `x + y = j·spacing`.
    pub fn triangular(spacing: f64) -> Self {
        let mut b = Breaklines::grid(spacing);
        b.families.push(LineFamily {
            normal: [1.0, 1.0],
            spacing,
            offset: 0.0,
        });
        b
    }

    /// Image of the lattice under `map`.
    pub fn pushed(&self, map: &Affine2) -> Self {
        let families = self
            .families
            .iter()
            .filter_map(|fam| {
                let (n, c) = map.push_line(fam.normal, fam.offset)?;
                Some(LineFamily {
                    normal: n,
                    spacing: fam.spacing,
                    offset: c,
                })
            })
            .collect();
        Breaklines { families }
    }

    /// Lattice of `x ↦ g(c - x)` when `g` breaks along `self`.
    pub fn reflected_about(&self, c: Point) -> Self {
        let map = Affine2 {
            m: [[-1.0, 0.0], [0.0, -1.0]],
            t: c,
        };
        self.pushed(&map)
    }

    /// Parameters `r > 0` at which the ray `r·dir` crosses a breakline, for
    /// `r` in `(0, r_max)`.
    pub fn ray_crossings(&self, dir: Point, r_max: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for fam in &self.families {
            let speed = dot(fam.normal, dir);
            if speed.abs() < 1e-14 {
                continue;
            }
            // offset + j·spacing = r·speed
            let (lo, hi) = if speed > 0.0 {
                (0.0, r_max * speed)
            } else {
                (r_max * speed, 0.0)
            };
            let j0 = ((lo - fam.offset) / fam.spacing).floor() as i64;
            let j1 = ((hi - fam.offset) / fam.spacing).ceil() as i64;
            for j in j0..=j1 {
                let r = (fam.offset + j as f64 * fam.spacing) / speed;
                if r > 0.0 && r < r_max {
                    out.push(r);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
        out
    }

    /// Cuts a convex ring along every line of every family.
    pub fn cut(&self, ring: Vec<Point>) -> Vec<Vec<Point>> {
        let mut pieces = vec![ring];
        for fam in &self.families {
            let mut next = Vec::with_capacity(pieces.len());
            for piece in pieces {
                cut_along_family(piece, fam, &mut next);
            }
            pieces = next;
        }
        pieces
    }
}

fn cut_along_family(piece: Vec<Point>, fam: &LineFamily, out: &mut Vec<Vec<Point>>) {
    let vals: Vec<f64> = piece.iter().map(|&p| dot(fam.normal, p)).collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-12 * fam.spacing;
    let j0 = ((lo - fam.offset) / fam.spacing).floor() as i64;
    let j1 = ((hi - fam.offset) / fam.spacing).ceil() as i64;
    let mut rest = piece;
    for j in j0..=j1 {
        let c = fam.offset + j as f64 * fam.spacing;
        if c <= lo + slack || c >= hi - slack {
            continue;
        }
        let (below, above) = geometry::split_convex(&rest, fam.normal, c);
        if below.len() >= 3 {
            out.push(below);
        }
        rest = above;
        if rest.len() < 3 {
            return;
        }
    }
    if rest.len() >= 3 {
        out.push(rest);
    }
}

/// Value, accumulated error estimate, and number of accepted leaf cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: Complex64,
    pub err_est: f64,
    pub cells: usize,
}

/// `∫_a^b f`, split at every breakpoint inside `(a, b)`.
pub fn integrate_1d<F>(f: F, a: f64, b: f64, breakpoints: &[f64], cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    match integrate_1d_complex(|x| Complex64::new(f(x), 0.0), a, b, breakpoints, cfg) {
        Ok(r) => Ok(r.value.re),
        Err(e) => Err(e),
    }
}

pub fn integrate_1d_complex<F>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    cfg: &QuadConfig,
) -> Result<Integral>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    cfg.validate()?;
    if !(a <= b) {
        return Err(Error::InvalidConfig(format!("integration bounds reversed: {a} > {b}")));
    }
    if a == b {
        return Ok(Integral {
            value: Complex64::new(0.0, 0.0),
            err_est: 0.0,
            cells: 0,
        });
    }
    let rule = GaussLegendre::cached(cfg.gl_order);
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut knots = Vec::with_capacity(cuts.len() + 2);
    knots.push(a);
    knots.extend(cuts);
    knots.push(b);

    let segs: Vec<(f64, f64, Complex64)> = knots
        .windows(2)
        .map(|w| (w[0], w[1], gl_interval(&f, &rule, w[0], w[1])))
        .collect();
    let coarse: Complex64 = segs.iter().map(|s| s.2).sum();
    let tol = cfg.target(coarse.norm());
    let total_len = b - a;

    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut cells = 0;
    let mut exhausted = false;
    for (lo, hi, q) in segs {
        let local = tol * (hi - lo) / total_len;
        let leaf = adapt_interval(&f, &rule, lo, hi, q, local, cfg.max_subdiv);
        value += leaf.value;
        err += leaf.err;
        cells += leaf.cells;
        exhausted |= leaf.exhausted;
    }
    if exhausted && err > tol {
        return Err(Error::NonConvergence {
            estimate: value,
            achieved: err,
        });
    }
    Ok(Integral {
        value,
        err_est: err,
        cells,
    })
}

struct Leaf {
    value: Complex64,
    err: f64,
    cells: usize,
    exhausted: bool,
}

fn gl_interval<F: Fn(f64) -> Complex64>(f: &F, rule: &GaussLegendre, a: f64, b: f64) -> Complex64 {
    let h = b - a;
    rule.unit()
        .map(|(x, w)| f(a + h * x) * (w * h))
        .sum()
}

fn adapt_interval<F: Fn(f64) -> Complex64>(
    f: &F,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    q0: Complex64,
    tol: f64,
    depth: u32,
) -> Leaf {
    let m = 0.5 * (a + b);
    let ql = gl_interval(f, rule, a, m);
    let qr = gl_interval(f, rule, m, b);
    let q1 = ql + qr;
    let diff = (q1 - q0).norm();
    if diff <= tol || depth == 0 {
        return Leaf {
            value: q1,
            err: diff,
            cells: 2,
            exhausted: depth == 0 && diff > tol,
        };
    }
    let l = adapt_interval(f, rule, a, m, ql, 0.5 * tol, depth - 1);
    let r = adapt_interval(f, rule, m, b, qr, 0.5 * tol, depth - 1);
    Leaf {
        value: l.value + r.value,
        err: l.err + r.err,
        cells: l.cells + r.cells,
        exhausted: l.exhausted || r.exhausted,
    }
}

/// `∬_region f dA` with the region cut along an axis-parallel lattice of the
/// given spacing.
pub fn integrate_polygon<F>(f: F, region: &Polygon, spacing: f64, cfg: &QuadConfig) -> Result<Complex64>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    if !(spacing > 0.0) {
        return Err(Error::InvalidConfig("breakline spacing must be positive".into()));
    }
    Ok(integrate_polygon_on(f, region, &Breaklines::grid(spacing), cfg)?.value)
}

#[derive(Clone, Copy, Debug)]
enum Cell {
    Rect { lo: Point, hi: Point },
    /// Vertex 0 is the collapse point of the Duffy map.
    Tri([Point; 3]),
}

impl Cell {
    fn area(&self) -> f64 {
        match self {
            Cell::Rect { lo, hi } => (hi[0] - lo[0]) * (hi[1] - lo[1]),
            Cell::Tri(t) => ring_area(t),
        }
    }

    fn children(&self) -> [Cell; 4] {
        match *self {
            Cell::Rect { lo, hi } => {
                let m = midpoint(lo, hi);
                [
                    Cell::Rect { lo, hi: m },
                    Cell::Rect {
                        lo: [m[0], lo[1]],
                        hi: [hi[0], m[1]],
                    },
                    Cell::Rect {
                        lo: [lo[0], m[1]],
                        hi: [m[0], hi[1]],
                    },
                    Cell::Rect { lo: m, hi },
                ]
            }
            Cell::Tri([a, b, c]) => {
                let ab = midpoint(a, b);
                let ac = midpoint(a, c);
                let bc = midpoint(b, c);
                [
                    Cell::Tri([a, ab, ac]),
                    Cell::Tri([ab, b, bc]),
                    Cell::Tri([ac, bc, c]),
                    Cell::Tri([bc, ac, ab]),
                ]
            }
        }
    }

    fn rule<F: Fn(f64, f64) -> Complex64>(&self, f: &F, gl: &GaussLegendre) -> Complex64 {
        match *self {
            Cell::Rect { lo, hi } => {
                let hx = hi[0] - lo[0];
                let hy = hi[1] - lo[1];
                let mut acc = Complex64::new(0.0, 0.0);
                for (u, wu) in gl.unit() {
                    let x = lo[0] + hx * u;
                    let mut row = Complex64::new(0.0, 0.0);
                    for (v, wv) in gl.unit() {
                        row += f(x, lo[1] + hy * v) * wv;
                    }
                    acc += row * wu;
                }
                acc * (hx * hy)
            }
            Cell::Tri([a, b, c]) => {
                let e1 = sub(b, a);
                let e2 = sub(c, b);
                let jac = geometry::cross(e1, e2).abs();
                let mut acc = Complex64::new(0.0, 0.0);
                for (s, ws) in gl.unit() {
                    let mut row = Complex64::new(0.0, 0.0);
                    for (t, wt) in gl.unit() {
                        let x = a[0] + s * (e1[0] + t * e2[0]);
                        let y = a[1] + s * (e1[1] + t * e2[1]);
                        row += f(x, y) * wt;
                    }
                    acc += row * (ws * s);
                }
                acc * jac
            }
        }
    }
}

fn adapt_cell<F: Fn(f64, f64) -> Complex64>(
    f: &F,
    gl: &GaussLegendre,
    cell: Cell,
    q0: Complex64,
    tol: f64,
    depth: u32,
) -> Leaf {
    let kids = cell.children();
    let qs: Vec<Complex64> = kids.iter().map(|k| k.rule(f, gl)).collect();
    let q1: Complex64 = qs.iter().sum();
    let diff = (q1 - q0).norm();
    if diff <= tol || depth == 0 {
        return Leaf {
            value: q1,
            err: diff,
            cells: 4,
            exhausted: depth == 0 && diff > tol,
        };
    }
    let mut out = Leaf {
        value: Complex64::new(0.0, 0.0),
        err: 0.0,
        cells: 0,
        exhausted: false,
    };
    for (k, q) in kids.into_iter().zip(qs) {
        let leaf = adapt_cell(f, gl, k, q, 0.25 * tol, depth - 1);
        out.value += leaf.value;
        out.err += leaf.err;
        out.cells += leaf.cells;
        out.exhausted |= leaf.exhausted;
    }
    out
}

/// Removes vertices within `eps` of their predecessor, as left by repeated cuts.
fn drop_repeated(ring: &[Point], eps: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(ring.len());
    for &p in ring {
        if out.last().is_none_or(|q| (p[0] - q[0]).abs().max((p[1] - q[1]).abs()) > eps) {
            out.push(p);
        }
    }
    while out.len() > 1 {
        let (a, b) = (out[0], out[out.len() - 1]);
        if (a[0] - b[0]).abs().max((a[1] - b[1]).abs()) > eps {
            break;
        }
        out.pop();
    }
    out
}

fn as_axis_rect(ring: &[Point]) -> Option<(Point, Point)> {
    if ring.len() != 4 {
        return None;
    }
    let (lo, hi) = geometry::bbox(ring);
    let scale = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let eps = 1e-13 * scale.max(1e-300);
    let on_corner = |p: &Point| {
        ((p[0] - lo[0]).abs() < eps || (p[0] - hi[0]).abs() < eps)
            && ((p[1] - lo[1]).abs() < eps || (p[1] - hi[1]).abs() < eps)
    };
    // a triangle with a doubled vertex also has every vertex on a corner
    let full = (hi[0] - lo[0]) * (hi[1] - lo[1]);
    if ring.iter().all(on_corner) && ring_area(ring) >= (1.0 - 1e-9) * full {
        Some((lo, hi))
    } else {
        None
    }
}

fn cells_of_piece(ring: &[Point], min_area: f64, out: &mut Vec<Cell>) {
    let (lo, hi) = geometry::bbox(ring);
    let diam = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let ring = &drop_repeated(ring, 1e-13 * diam);
    if ring.len() < 3 {
        return;
    }
    let origin_inside = convex_contains(ring, [0.0, 0.0], 1e-12 * diam);
    if !origin_inside {
        if let Some((lo, hi)) = as_axis_rect(ring) {
            out.push(Cell::Rect { lo, hi });
            return;
        }
    }
    let n = ring.len();
    if origin_inside {
        for i in 0..n {
            let t = [[0.0, 0.0], ring[i], ring[(i + 1) % n]];
            if ring_area(&t) > min_area {
                out.push(Cell::Tri(t));
            }
        }
    } else {
        for i in 1..n - 1 {
            let t = [ring[0], ring[i], ring[i + 1]];
            if ring_area(&t) > min_area {
                out.push(Cell::Tri(t));
            }
        }
    }
}

/// `∬_region f dA`, cutting the region along `breaklines` first.
pub fn integrate_polygon_on<F>(
    f: F,
    region: &Polygon,
    breaklines: &Breaklines,
    cfg: &QuadConfig,
) -> Result<Integral>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    cfg.validate()?;
    let total_area = region.area();
    if !(total_area > 0.0) {
        return Err(Error::DegenerateRegion);
    }
    if breaklines.families.iter().any(|fam| !(fam.spacing > 0.0)) {
        return Err(Error::InvalidConfig("breakline spacing must be positive".into()));
    }
    let rings: Vec<Vec<Point>> = if region.is_convex() {
        vec![region.vertices().to_vec()]
    } else {
        region.triangulate().iter().map(|t| t.to_vec()).collect()
    };
    let min_area = 1e-15 * total_area;
    let mut cells = Vec::new();
    for ring in rings {
        for piece in breaklines.cut(ring) {
            if ring_area(&piece) > min_area {
                cells_of_piece(&piece, min_area, &mut cells);
            }
        }
    }
    let gl = GaussLegendre::cached(cfg.gl_order);
    let coarse: Vec<Complex64> = cells.par_iter().map(|c| c.rule(&f, &gl)).collect();
    let estimate: Complex64 = coarse.iter().sum();
    let tol = cfg.target(estimate.norm());

    let leaves: Vec<Leaf> = cells
        .par_iter()
        .zip(coarse.par_iter())
        .map(|(cell, &q)| {
            let local = tol * cell.area() / total_area;
            adapt_cell(&f, &gl, *cell, q, local, cfg.max_subdiv)
        })
        .collect();
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut n = 0;
    let mut exhausted = false;
    for leaf in leaves {
        value += leaf.value;
        err += leaf.err;
        n += leaf.cells;
        exhausted |= leaf.exhausted;
    }
    if exhausted && err > tol {
        return Err(Error::NonConvergence {
            estimate: value,
            achieved: err,
        });
    }
    Ok(Integral {
        value,
        err_est: err,
        cells: n,
    })
}

/// Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: Complex64,
    pub stderr: f64,
    pub samples: u64,
}

/// Running mean and squared deviation of complex samples.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexStats {
    n: u64,
    mean: Complex64,
    m2: f64,
}

impl ComplexStats {
    pub fn push(&mut self, x: Complex64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        let delta2 = x - self.mean;
        self.m2 += delta.re * delta2.re + delta.im * delta2.im;
    }

    pub fn merge(&mut self, other: &ComplexStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let nb = other.n as f64 / n as f64;
        self.mean += delta * nb;
        self.m2 += other.m2 + delta.norm_sqr() * (self.n as f64) * nb;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> Complex64 {
        self.mean
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

const MC_CHUNK: u64 = 1 << 14;

/// Draws `samples` values in fixed-size chunks; chunk `c` uses stream `c` of
/// a ChaCha8 generator seeded with `seed`, so the result does not depend on
/// the thread count.
pub fn chunked_mc<S>(samples: u64, seed: u64, sampler: S) -> ComplexStats
where
    S: Fn(&mut ChaCha8Rng) -> Complex64 + Sync,
{
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts: Vec<ComplexStats> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut st = ComplexStats::default();
            for _ in 0..len {
                st.push(sampler(&mut rng));
            }
            st
        })
        .collect();
    let mut total = ComplexStats::default();
    for p in &parts {
        total.merge(p);
    }
    total
}

/// Uniform point of `region` by rejection from its bounding box.
pub fn sample_polygon<R: Rng>(region: &Polygon, rng: &mut R) -> Point {
    let (lo, hi) = region.bbox();
    loop {
        let p = [
            lo[0] + (hi[0] - lo[0]) * rng.random::<f64>(),
            lo[1] + (hi[1] - lo[1]) * rng.random::<f64>(),
        ];
        if region.contains(p) {
            return p;
        }
    }
}

pub fn mc_integrate<F>(f: F, region: &Polygon, cfg: &McConfig) -> Result<McEstimate>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    cfg.validate()?;
    let area = region.area();
    if !(area > 0.0) {
        return Err(Error::DegenerateRegion);
    }
    let stats = chunked_mc(cfg.samples, cfg.seed, |rng| {
        let p = sample_polygon(region, rng);
        f(p[0], p[1])
    });
    Ok(McEstimate {
        value: stats.mean() * area,
        stderr: stats.stderr() * area,
        samples: stats.count(),
    })
}
