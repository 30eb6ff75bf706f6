use serde::{Deserialize, Serialize};

use super::system::CellShape;
use crate::geometry::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Up,
    Down,
}

/// A cell of a dyadic lattice, in reference coordinates.
///
/// Cells at scale `n` have side `2ⁿ`. A triangle "up" cell `(i, j)` is
/// `2ⁿ((i, j) + T)` and a "down" cell is `2ⁿ((i+1, j+1) − T)` with
/// `T = conv{(0,0), (1,0), (0,1)}`; unused index components are zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeId {
    pub scale: i32,
    pub index: [i64; 3],
    pub orientation: Option<Orientation>,
}

impl LatticeId {
    /// The cell at scale 0 with index 0.
    pub fn root(shape: CellShape) -> Self {
        LatticeId {
            scale: 0,
            index: [0; 3],
            orientation: (shape == CellShape::Triangle).then_some(Orientation::Up),
        }
    }

    pub fn new(scale: i32, index: [i64; 3], orientation: Option<Orientation>) -> Self {
        LatticeId {
            scale,
            index,
            orientation,
        }
    }

    pub fn side(&self) -> f64 {
        2f64.powi(self.scale)
    }

    pub fn is_valid_for(&self, shape: CellShape) -> bool {
        let dims = match shape {
            CellShape::Interval => 1,
            CellShape::Cube => 3,
            _ => 2,
        };
        let unused_zero = self.index[dims..].iter().all(|&v| v == 0);
        unused_zero && (self.orientation.is_some() == (shape == CellShape::Triangle))
    }

    /// Measure in reference coordinates.
    pub fn measure(&self, shape: CellShape) -> f64 {
        let s = self.side();
        match shape {
            CellShape::Interval => s,
            CellShape::Square => s * s,
            CellShape::Triangle => 0.5 * s * s,
            CellShape::Cube => s * s * s,
        }
    }

    pub fn child(&self, shape: CellShape, digit: usize) -> LatticeId {
        let [i, j, k] = self.index;
        let scale = self.scale - 1;
        let (index, orientation) = match shape {
            CellShape::Interval => ([2 * i + digit as i64, 0, 0], None),
            CellShape::Square => (
                [2 * i + (digit & 1) as i64, 2 * j + (digit >> 1) as i64, 0],
                None,
            ),
            CellShape::Cube => (
                [
                    2 * i + (digit & 1) as i64,
                    2 * j + ((digit >> 1) & 1) as i64,
                    2 * k + (digit >> 2) as i64,
                ],
                None,
            ),
            CellShape::Triangle => {
                use Orientation::*;
                match (self.orientation.expect("triangle cell"), digit) {
                    (Up, 0) => ([2 * i, 2 * j, 0], Some(Up)),
                    (Up, 1) => ([2 * i + 1, 2 * j, 0], Some(Up)),
                    (Up, 2) => ([2 * i, 2 * j + 1, 0], Some(Up)),
                    (Up, _) => ([2 * i, 2 * j, 0], Some(Down)),
                    (Down, 0) => ([2 * i + 1, 2 * j + 1, 0], Some(Down)),
                    (Down, 1) => ([2 * i, 2 * j + 1, 0], Some(Down)),
                    (Down, 2) => ([2 * i + 1, 2 * j, 0], Some(Down)),
                    (Down, _) => ([2 * i + 1, 2 * j + 1, 0], Some(Up)),
                }
            }
        };
        LatticeId {
            scale,
            index,
            orientation,
        }
    }

    pub fn children(&self, shape: CellShape) -> Vec<LatticeId> {
        let n = match shape {
            CellShape::Interval => 2,
            CellShape::Cube => 8,
            _ => 4,
        };
        (0..n).map(|d| self.child(shape, d)).collect()
    }

    /// Parent cell and the digit of `self` among its children.
    pub fn parent(&self, shape: CellShape) -> (LatticeId, usize) {
        let [i, j, k] = self.index;
        let p = [i.div_euclid(2), j.div_euclid(2), k.div_euclid(2)];
        let (a, b, c) = (
            i.rem_euclid(2) as usize,
            j.rem_euclid(2) as usize,
            k.rem_euclid(2) as usize,
        );
        let scale = self.scale + 1;
        let (index, orientation, digit) = match shape {
            CellShape::Interval => ([p[0], 0, 0], None, a),
            CellShape::Square => ([p[0], p[1], 0], None, a + 2 * b),
            CellShape::Cube => (p, None, a + 2 * b + 4 * c),
            CellShape::Triangle => {
                use Orientation::*;
                let q = [p[0], p[1], 0];
                match (self.orientation.expect("triangle cell"), a, b) {
                    (Up, 0, 0) => (q, Some(Up), 0),
                    (Up, 1, 0) => (q, Some(Up), 1),
                    (Up, 0, 1) => (q, Some(Up), 2),
                    (Up, _, _) => (q, Some(Down), 3),
                    (Down, 1, 1) => (q, Some(Down), 0),
                    (Down, 0, 1) => (q, Some(Down), 1),
                    (Down, 1, 0) => (q, Some(Down), 2),
                    (Down, _, _) => (q, Some(Up), 3),
                }
            }
        };
        (
            LatticeId {
                scale,
                index,
                orientation,
            },
            digit,
        )
    }

    /// Cell of the given scale containing the reference point `u`. Cells are
    /// closed on their lower faces; triangle down cells own their diagonal.
    pub fn locate(shape: CellShape, u: [f64; 3], scale: i32) -> LatticeId {
        let inv = 2f64.powi(-scale);
        let s = u.map(|c| c * inv);
        let fl = s.map(f64::floor);
        let idx = fl.map(|v| v as i64);
        match shape {
            CellShape::Interval => LatticeId::new(scale, [idx[0], 0, 0], None),
            CellShape::Square => LatticeId::new(scale, [idx[0], idx[1], 0], None),
            CellShape::Cube => LatticeId::new(scale, idx, None),
            CellShape::Triangle => {
                let f = (s[0] - fl[0]) + (s[1] - fl[1]);
                let o = if f < 1.0 {
                    Orientation::Up
                } else {
                    Orientation::Down
                };
                LatticeId::new(scale, [idx[0], idx[1], 0], Some(o))
            }
        }
    }

    /// Counterclockwise vertices of a planar cell in reference coordinates.
    pub fn reference_ring(&self, shape: CellShape) -> Vec<Point> {
        let s = self.side();
        let (i, j) = (self.index[0] as f64, self.index[1] as f64);
        match shape {
            CellShape::Square => vec![
                [s * i, s * j],
                [s * (i + 1.0), s * j],
                [s * (i + 1.0), s * (j + 1.0)],
                [s * i, s * (j + 1.0)],
            ],
            CellShape::Triangle => match self.orientation.expect("triangle cell") {
                Orientation::Up => vec![[s * i, s * j], [s * (i + 1.0), s * j], [s * i, s * (j + 1.0)]],
                Orientation::Down => vec![
                    [s * (i + 1.0), s * (j + 1.0)],
                    [s * i, s * (j + 1.0)],
                    [s * (i + 1.0), s * j],
                ],
            },
            _ => panic!("reference_ring needs a planar cell"),
        }
    }

    /// Lower and upper corners of an interval or cube cell.
    pub fn reference_box(&self) -> ([f64; 3], [f64; 3]) {
        let s = self.side();
        let lo = self.index.map(|v| v as f64 * s);
        (lo, lo.map(|v| v + s))
    }

    /// Whether `self` lies inside `ancestor` (or equals it).
    pub fn is_descendant_of(&self, ancestor: &LatticeId, shape: CellShape) -> bool {
        let mut c = *self;
        while c.scale < ancestor.scale {
            c = c.parent(shape).0;
        }
        c == *ancestor
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ring_area, Polygon};

    #[test]
    fn parent_inverts_child() {
        for shape in [CellShape::Interval, CellShape::Square, CellShape::Triangle, CellShape::Cube] {
            let mut roots = vec![LatticeId::root(shape)];
            if shape == CellShape::Triangle {
                roots.push(LatticeId::new(2, [1, -3, 0], Some(Orientation::Down)));
            }
            for root in roots {
                for (d, c) in root.children(shape).into_iter().enumerate() {
                    assert_eq!(c.parent(shape), (root, d));
                }
            }
        }
    }

    #[test]
    fn triangle_children_tile_and_are_similar() {
        for o in [Orientation::Up, Orientation::Down] {
            let p = LatticeId::new(1, [2, -1, 0], Some(o));
            let ring = p.reference_ring(CellShape::Triangle);
            let kids = p.children(CellShape::Triangle);
            let total: f64 = kids
                .iter()
                .map(|c| ring_area(&c.reference_ring(CellShape::Triangle)))
                .sum();
            assert!((total - ring_area(&ring)).abs() < 1e-14);
            let parent_poly = Polygon::new(ring).unwrap();
            for c in kids {
                let r = c.reference_ring(CellShape::Triangle);
                assert!((ring_area(&r) * 4.0 - parent_poly.area()).abs() < 1e-14);
                let centroid = [(r[0][0] + r[1][0] + r[2][0]) / 3.0, (r[0][1] + r[1][1] + r[2][1]) / 3.0];
                assert!(parent_poly.contains(centroid));
                assert_eq!(
                    LatticeId::locate(CellShape::Triangle, [centroid[0], centroid[1], 0.0], 0),
                    c
                );
            }
        }
    }

    #[test]
    fn locate_uses_half_open_cells() {
        let up = LatticeId::locate(CellShape::Triangle, [0.0, 0.0, 0.0], 0);
        assert_eq!(up, LatticeId::new(0, [0, 0, 0], Some(Orientation::Up)));
        let diag = LatticeId::locate(CellShape::Triangle, [0.5, 0.5, 0.0], 0);
        assert_eq!(diag.orientation, Some(Orientation::Down));
        let sq = LatticeId::locate(CellShape::Square, [1.0, -0.25, 0.0], -1);
        assert_eq!(sq.index, [2, -1, 0]);
    }
}
