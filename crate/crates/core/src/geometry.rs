//! Planar primitives shared by the quadrature engine, the Haar lattices and
//! the kernel oracles: points, affine maps and convex polygon clipping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Twice the signed area of a vertex ring (positive when counterclockwise).
pub fn signed_area2(ring: &[Point]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| cross(ring[i], ring[(i + 1) % n])).sum()
}

pub fn ring_area(ring: &[Point]) -> f64 {
    0.5 * signed_area2(ring).abs()
}

/// `x -> m x + t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine2 {
    pub m: [[f64; 2]; 2],
    pub t: Point,
}

impl Affine2 {
    pub const IDENTITY: Affine2 = Affine2 {
        m: [[1.0, 0.0], [0.0, 1.0]],
        t: [0.0, 0.0],
    };

    pub fn linear(m: [[f64; 2]; 2]) -> Self {
        Affine2 { m, t: [0.0, 0.0] }
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        [
            self.m[0][0] * p[0] + self.m[0][1] * p[1] + self.t[0],
            self.m[1][0] * p[0] + self.m[1][1] * p[1] + self.t[1],
        ]
    }

    #[inline]
    pub fn apply_linear(&self, p: Point) -> Point {
        [
            self.m[0][0] * p[0] + self.m[0][1] * p[1],
            self.m[1][0] * p[0] + self.m[1][1] * p[1],
        ]
    }

    pub fn inverse(&self) -> Option<Affine2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let m = [
            [self.m[1][1] / d, -self.m[0][1] / d],
            [-self.m[1][0] / d, self.m[0][0] / d],
        ];
        let inv = Affine2 { m, t: [0.0, 0.0] };
        let t = inv.apply_linear(self.t);
        Some(Affine2 {
            m,
            t: [-t[0], -t[1]],
        })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Affine2) -> Affine2 {
        let a = &self.m;
        let b = &other.m;
        let m = [
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ];
        Affine2 {
            m,
            t: self.apply(other.t),
        }
    }

    /// Image of the line `{n·u = c}` under this map, as `(n', c')` with
    /// the image being `{n'·x = c'}`.
    pub fn push_line(&self, normal: Point, c: f64) -> Option<(Point, f64)> {
        let inv = self.inverse()?;
        // n·(A⁻¹x + s) = c  ⇔  (A⁻ᵀn)·x = c − n·s
        let n2 = [
            inv.m[0][0] * normal[0] + inv.m[1][0] * normal[1],
            inv.m[0][1] * normal[0] + inv.m[1][1] * normal[1],
        ];
        Some((n2, c - dot(normal, inv.t)))
    }
}

/// A simple polygon with counterclockwise vertices and positive area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Validates the ring and stores it counterclockwise. The closing edge
    /// is implicit; a repeated final vertex is dropped.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() >= 2 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite vertex".into()));
        }
        if !is_simple(&vertices) {
            return Err(Error::InvalidPolygon("edges intersect".into()));
        }
        let a2 = signed_area2(&vertices);
        let extent = bbox(&vertices);
        let diam = (extent.1[0] - extent.0[0]).max(extent.1[1] - extent.0[1]);
        if a2.abs() <= 1e-14 * diam * diam {
            return Err(Error::DegenerateRegion);
        }
        if a2 < 0.0 {
            vertices.reverse();
        }
        Ok(Polygon { vertices })
    }

    pub fn rectangle(lo: Point, hi: Point) -> Result<Self> {
        Polygon::new(vec![lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]])
    }

    pub fn triangle(a: Point, b: Point, c: Point) -> Result<Self> {
        Polygon::new(vec![a, b, c])
    }

    pub fn unit_square() -> Self {
        Polygon::rectangle([0.0, 0.0], [1.0, 1.0]).expect("unit square")
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        ring_area(&self.vertices)
    }

    pub fn bbox(&self) -> (Point, Point) {
        bbox(&self.vertices)
    }

    pub fn is_convex(&self) -> bool {
        is_convex_ccw(&self.vertices)
    }

    /// Closed containment test (boundary points count as inside).
    pub fn contains(&self, p: Point) -> bool {
        if self.is_convex() {
            return convex_contains(&self.vertices, p, 0.0);
        }
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if on_segment(a, b, p) {
                return true;
            }
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn map(&self, f: &Affine2) -> Result<Polygon> {
        Polygon::new(self.vertices.iter().map(|&p| f.apply(p)).collect())
    }

    pub fn translate(&self, d: Point) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|&p| add(p, d)).collect(),
        }
    }

    /// Ear-clipping triangulation; each triangle is counterclockwise.
    pub fn triangulate(&self) -> Vec<[Point; 3]> {
        if self.is_convex() {
            let v = &self.vertices;
            return (1..v.len() - 1).map(|i| [v[0], v[i], v[i + 1]]).collect();
        }
        let mut ring: Vec<Point> = self.vertices.clone();
        let mut out = Vec::with_capacity(ring.len() - 2);
        while ring.len() > 3 {
            let n = ring.len();
            let ear = (0..n).find(|&i| {
                let a = ring[(i + n - 1) % n];
                let b = ring[i];
                let c = ring[(i + 1) % n];
                if cross(sub(b, a), sub(c, b)) <= 0.0 {
                    return false;
                }
                let tri = [a, b, c];
                ring.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i && j != (i + n - 1) % n && j != (i + 1) % n)
                    .all(|(_, &p)| !convex_contains(&tri, p, 0.0))
            });
            let i = ear.unwrap_or(0);
            let a = ring[(i + n - 1) % n];
            let c = ring[(i + 1) % n];
            out.push([a, ring[i], c]);
            ring.remove(i);
        }
        out.push([ring[0], ring[1], ring[2]]);
        out
    }
}

pub fn translate_ring(ring: &[Point], d: Point) -> Vec<Point> {
    ring.iter().map(|&p| add(p, d)).collect()
}

pub fn bbox(ring: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in ring {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

fn is_convex_ccw(ring: &[Point]) -> bool {
    let n = ring.len();
    (0..n).all(|i| {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let c = ring[(i + 2) % n];
        cross(sub(b, a), sub(c, b)) >= -1e-14 * (1.0 + dot(sub(b, a), sub(b, a)))
    })
}

/// Point-in-convex-ring test with a slack `eps` (in units of length).
pub fn convex_contains(ring: &[Point], p: Point, eps: f64) -> bool {
    let n = ring.len();
    (0..n).all(|i| {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let e = sub(b, a);
        let len = dot(e, e).sqrt();
        cross(e, sub(p, a)) >= -eps * len - 1e-15 * len * (1.0 + dot(p, p).sqrt())
    })
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    let e = sub(b, a);
    let w = sub(p, a);
    let c = cross(e, w);
    if c.abs() > 1e-14 * (1.0 + dot(e, e)) {
        return false;
    }
    let t = dot(w, e);
    t >= 0.0 && t <= dot(e, e)
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(sub(b, a), sub(c, a));
    let d2 = cross(sub(b, a), sub(d, a));
    let d3 = cross(sub(d, c), sub(a, c));
    let d4 = cross(sub(d, c), sub(b, c));
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0
}

fn is_simple(ring: &[Point]) -> bool {
    let n = ring.len();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Sutherland–Hodgman clip of a convex ring against a convex ccw ring.
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % n];
        let e = sub(b, a);
        // Keep the left side of a→b, i.e. n·p ≤ c with n the right normal.
        let normal = [e[1], -e[0]];
        out = clip_half_plane(&out, normal, dot(normal, a));
    }
    out
}

/// Keeps the part of a convex ring with `normal·p ≤ c`.
pub fn clip_half_plane(ring: &[Point], normal: Point, c: f64) -> Vec<Point> {
    let n = ring.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let p = ring[i];
        let q = ring[(i + 1) % n];
        let sp = dot(normal, p) - c;
        let sq = dot(normal, q) - c;
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push(add(p, scale(sub(q, p), t)));
        }
    }
    out
}

/// Splits a convex ring along `normal·p = c` into (below, above); either side
/// may be empty or degenerate.
pub fn split_convex(ring: &[Point], normal: Point, c: f64) -> (Vec<Point>, Vec<Point>) {
    let below = clip_half_plane(ring, normal, c);
    let above = clip_half_plane(ring, [-normal[0], -normal[1]], -c);
    (below, above)
}

/// Exact area of the intersection of two convex rings.
pub fn convex_overlap_area(a: &[Point], b: &[Point]) -> f64 {
    let (alo, ahi) = bbox(a);
    let (blo, bhi) = bbox(b);
    if alo[0] >= bhi[0] || blo[0] >= ahi[0] || alo[1] >= bhi[1] || blo[1] >= ahi[1] {
        return 0.0;
    }
    let clipped = clip_convex(a, b);
    if clipped.len() < 3 {
        0.0
    } else {
        ring_area(&clipped)
    }
}
