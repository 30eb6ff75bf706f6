//! Symmetrized autocorrelations `G₀, G₊, G₋` of the three triangle Haar
//! functions on the reference triangle `(0,0), (1,0), (0,1)`.
//!
//! Each `G` is even and symmetric about both diagonals, so it is tabulated on
//! the quarter `{y ≤ x, x + y ≥ 0}` of its hexagonal support, which splits into
//! seven triangles labelled A–G.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::poly::{PiecewisePoly2D, Quadratic};
use crate::geometry::{Point, Polygon};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GKind {
    Zero,
    Plus,
    Minus,
}

impl GKind {
    pub const ALL: [GKind; 3] = [GKind::Zero, GKind::Plus, GKind::Minus];
}

pub const REGION_LABELS: [char; 7] = ['A', 'B', 'C', 'D', 'E', 'F', 'G'];

/// Vertices of the regions A–G.
pub fn region_vertices() -> [[Point; 3]; 7] {
    [
        [[0.0, 0.0], [0.5, 0.0], [0.25, 0.25]],
        [[0.25, 0.25], [0.5, 0.0], [0.5, 0.5]],
        [[0.5, 0.0], [1.0, 0.0], [0.5, 0.5]],
        [[0.0, 0.0], [0.5, 0.0], [0.5, -0.5]],
        [[0.5, 0.0], [0.5, -0.5], [1.0, -0.5]],
        [[0.5, 0.0], [1.0, -0.5], [1.0, 0.0]],
        [[0.5, -0.5], [1.0, -0.5], [1.0, -1.0]],
    ]
}

/// Vertices of the hexagonal support.
pub fn support_vertices() -> Vec<Point> {
    vec![
        [1.0, 0.0],
        [0.0, 1.0],
        [-1.0, 1.0],
        [-1.0, 0.0],
        [0.0, -1.0],
        [1.0, -1.0],
    ]
}

fn lin(c0: f64, cx: f64, cy: f64) -> Quadratic {
    Quadratic::linear(c0, cx, cy)
}

/// Region polynomials in the order A–G.
pub fn region_polys(kind: GKind) -> [Quadratic; 7] {
    let x_minus_y = lin(0.0, 1.0, -1.0);
    let s = lin(-1.0, 2.0, 2.0); // 2x + 2y − 1
    let one_minus_x = lin(1.0, -1.0, 0.0);
    let z = Quadratic::ZERO;
    match kind {
        GKind::Zero => [
            x_minus_y.square().scale(-1.0).add(s.square()),
            x_minus_y.square().scale(-1.0),
            lin(1.0, -1.0, -1.0).square().scale(-1.0),
            one_minus_x
                .square()
                .add(x_minus_y.mul(lin(-1.0, 1.0, -1.0)).scale(2.0)),
            one_minus_x.square().scale(-1.0).add(s.square().scale(0.5)),
            one_minus_x.square().scale(-1.0),
            one_minus_x.square(),
        ],
        GKind::Plus => [
            s.square(),
            z,
            z,
            lin(-1.0, 2.0, 0.0)
                .square()
                .add(lin(0.0, 0.0, 1.0).square().scale(-2.0)),
            s.square().scale(-0.5),
            z,
            one_minus_x.square().scale(-2.0),
        ],
        GKind::Minus => {
            let p = lin(1.0, -2.0, 0.0).mul(lin(1.0, 0.0, -2.0));
            [
                p.scale(-1.0).add(s.square().scale(2.0)),
                p.scale(-1.0),
                z,
                lin(1.0, -2.0, 0.0).mul(lin(1.0, -4.0, -2.0)),
                z,
                z,
                z,
            ]
        }
    }
}

/// The quarter-domain table as a piecewise polynomial.
pub fn quarter_table(kind: GKind) -> PiecewisePoly2D {
    let polys = region_polys(kind);
    PiecewisePoly2D {
        regions: region_vertices()
            .iter()
            .zip(polys)
            .map(|(v, q)| (Polygon::new(v.to_vec()).expect("fixed region"), q))
            .collect(),
    }
}

fn tables() -> &'static [[Quadratic; 7]; 3] {
    static T: OnceLock<[[Quadratic; 7]; 3]> = OnceLock::new();
    T.get_or_init(|| GKind::ALL.map(region_polys))
}

/// Maps a point to the quarter domain using the symmetries of `G`.
#[inline]
pub fn fold(mut x: f64, mut y: f64) -> (f64, f64) {
    if x + y < 0.0 {
        x = -x;
        y = -y;
    }
    if y > x {
        std::mem::swap(&mut x, &mut y);
    }
    (x, y)
}

/// Region index (0 = A … 6 = G) of a folded point, or `None` off the support.
#[inline]
pub fn region_of_folded(x: f64, y: f64) -> Option<usize> {
    if x > 1.0 || x + y > 1.0 {
        return None;
    }
    let s = x + y;
    Some(if y >= 0.0 {
        if s <= 0.5 {
            0
        } else if x <= 0.5 {
            1
        } else {
            2
        }
    } else if x <= 0.5 {
        3
    } else if y <= -0.5 {
        6
    } else if s <= 0.5 {
        4
    } else {
        5
    })
}

/// `G_kind(x, y)` on the whole plane.
#[inline]
pub fn triangle_g(kind: GKind, x: f64, y: f64) -> f64 {
    let (u, v) = fold(x, y);
    match region_of_folded(u, v) {
        Some(r) => tables()[kind as usize][r].eval(u, v),
        None => 0.0,
    }
}

/// All three values at once, sharing the region lookup.
#[inline]
pub fn triangle_g_all(x: f64, y: f64) -> [f64; 3] {
    let (u, v) = fold(x, y);
    match region_of_folded(u, v) {
        Some(r) => {
            let t = tables();
            [t[0][r].eval(u, v), t[1][r].eval(u, v), t[2][r].eval(u, v)]
        }
        None => [0.0; 3],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::convex_contains;

    #[test]
    fn value_at_origin() {
        assert_eq!(triangle_g(GKind::Zero, 0.0, 0.0), 1.0);
    }

    #[test]
    fn outside_support_is_zero() {
        for kind in GKind::ALL {
            assert_eq!(triangle_g(kind, 0.9, 0.9), 0.0);
            assert_eq!(triangle_g(kind, 1.2, -0.1), 0.0);
            assert_eq!(triangle_g(kind, -0.9, -0.9), 0.0);
        }
    }

    #[test]
    fn fast_lookup_matches_polygon_table() {
        for kind in GKind::ALL {
            let table = quarter_table(kind);
            for i in 0..=40 {
                for j in -40..=40 {
                    let (x, y) = (i as f64 / 40.0 + 1e-7, j as f64 / 40.0 + 3e-7);
                    if y > x || x + y < 0.0 {
                        continue;
                    }
                    let fast = triangle_g(kind, x, y);
                    let slow = table.eval([x, y]);
                    assert!((fast - slow).abs() < 1e-14, "{kind:?} at ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn regions_tile_the_quarter() {
        let area: f64 = region_vertices()
            .iter()
            .map(|t| crate::geometry::ring_area(t))
            .sum();
        assert!((area - 0.75).abs() < 1e-15);
        let hex = Polygon::new(support_vertices()).unwrap();
        assert!((hex.area() - 3.0).abs() < 1e-15);
        for t in region_vertices() {
            for p in t {
                assert!(convex_contains(hex.vertices(), p, 1e-15));
            }
        }
    }

    #[test]
    fn zero_kind_is_continuous_across_region_edges() {
        let pts = [
            [0.25, 0.0],
            [0.375, 0.125],
            [0.5, 0.25],
            [0.75, 0.25],
            [0.5, -0.25],
            [0.75, -0.25],
            [0.75, -0.5],
            [0.9, -0.5],
            [0.25, -0.25],
        ];
        let h = 1e-9;
        for p in pts {
            for d in [[1.0, 0.0], [0.0, 1.0], [0.7, 0.7]] {
                let a = triangle_g(GKind::Zero, p[0] + h * d[0], p[1] + h * d[1]);
                let b = triangle_g(GKind::Zero, p[0] - h * d[0], p[1] - h * d[1]);
                assert!((a - b).abs() < 1e-7, "jump at {p:?}");
            }
        }
    }
}
