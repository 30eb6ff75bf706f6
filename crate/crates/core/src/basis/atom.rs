use serde::{Deserialize, Serialize};

use super::lattice::LatticeId;
use super::system::{CellShape, HaarSystem, Kind};
use crate::geometry::{convex_overlap_area, ring_area, Point};

/// One normalized Haar function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarAtom {
    pub system: HaarSystem,
    pub cell: LatticeId,
    pub kind: Kind,
}

/// A constancy piece in physical coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Piece {
    Interval(f64, f64),
    Polygon(Vec<Point>),
    Box3([f64; 3], [f64; 3]),
}

impl Piece {
    pub fn measure(&self) -> f64 {
        match self {
            Piece::Interval(a, b) => b - a,
            Piece::Polygon(r) => ring_area(r),
            Piece::Box3(lo, hi) => (0..3).map(|i| hi[i] - lo[i]).product(),
        }
    }

    /// Measure of the intersection with another piece of the same kind.
    pub fn overlap(&self, other: &Piece) -> f64 {
        match (self, other) {
            (Piece::Interval(a, b), Piece::Interval(c, d)) => (b.min(*d) - a.max(*c)).max(0.0),
            (Piece::Polygon(p), Piece::Polygon(q)) => convex_overlap_area(p, q),
            (Piece::Box3(alo, ahi), Piece::Box3(blo, bhi)) => (0..3)
                .map(|i| (ahi[i].min(bhi[i]) - alo[i].max(blo[i])).max(0.0))
                .product(),
            _ => panic!("overlap of pieces of different dimension"),
        }
    }
}

/// Physical region of a lattice cell.
pub fn cell_piece(system: &HaarSystem, cell: &LatticeId) -> Piece {
    let shape = system.shape();
    match shape {
        CellShape::Interval => {
            let (lo, hi) = cell.reference_box();
            Piece::Interval(lo[0], hi[0])
        }
        CellShape::Cube => {
            let (lo, hi) = cell.reference_box();
            Piece::Box3(lo, hi)
        }
        _ => {
            let map = system.reference_map();
            Piece::Polygon(
                cell.reference_ring(shape)
                    .into_iter()
                    .map(|p| map.apply(p))
                    .collect(),
            )
        }
    }
}

/// Physical measure of a cell.
pub fn cell_measure(system: &HaarSystem, cell: &LatticeId) -> f64 {
    let m = cell.measure(system.shape());
    if system.dim() == 2 {
        m * system.reference_map().det().abs()
    } else {
        m
    }
}

/// Cell of the given scale containing the physical point `x`.
pub fn locate(system: &HaarSystem, x: &[f64], scale: i32) -> LatticeId {
    let u = match system.dim() {
        1 => [x[0], 0.0, 0.0],
        2 => {
            let inv = system
                .reference_map()
                .inverse()
                .expect("validated systems have invertible maps");
            let r = inv.apply([x[0], x[1]]);
            [r[0], r[1], 0.0]
        }
        _ => [x[0], x[1], x[2]],
    };
    LatticeId::locate(system.shape(), u, scale)
}

impl HaarAtom {
    pub fn new(system: HaarSystem, cell: LatticeId, kind: Kind) -> Self {
        HaarAtom { system, cell, kind }
    }

    pub fn measure(&self) -> f64 {
        cell_measure(&self.system, &self.cell)
    }

    /// Value of the atom on each child of its cell.
    pub fn child_values(&self) -> Vec<f64> {
        let amp = self.measure().sqrt().recip();
        self.system
            .child_values(self.kind)
            .iter()
            .map(|v| v * amp)
            .collect()
    }

    /// Nonzero constancy pieces with their values.
    pub fn pieces(&self) -> Vec<(Piece, f64)> {
        let shape = self.system.shape();
        self.child_values()
            .into_iter()
            .enumerate()
            .filter(|&(_, v)| v != 0.0)
            .map(|(d, v)| (cell_piece(&self.system, &self.cell.child(shape, d)), v))
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let shape = self.system.shape();
        let child = locate(&self.system, x, self.cell.scale - 1);
        let (parent, digit) = child.parent(shape);
        if parent != self.cell {
            return 0.0;
        }
        self.system.child_values(self.kind)[digit] / self.measure().sqrt()
    }

    pub fn label(&self) -> String {
        format!(
            "{}@{}:{:?}{}",
            self.system.kind_label(self.kind),
            self.cell.scale,
            &self.cell.index[..self.system.dim()],
            match self.cell.orientation {
                Some(super::Orientation::Up) => "u",
                Some(super::Orientation::Down) => "d",
                None => "",
            }
        )
    }
}

pub fn eval_atom(a: &HaarAtom, x: &[f64]) -> f64 {
    a.eval(x)
}

/// Cells of `depth` generations below and including `root`, generation by
/// generation, each generation in path order.
pub fn cells_in(system: &HaarSystem, root: &LatticeId, depth: u32) -> Vec<Vec<LatticeId>> {
    let shape = system.shape();
    let mut gens = Vec::with_capacity(depth as usize);
    let mut current = vec![*root];
    for _ in 0..depth {
        let next = current.iter().flat_map(|c| c.children(shape)).collect();
        gens.push(std::mem::replace(&mut current, next));
    }
    gens
}

/// Every atom whose cell is `root` or one of its descendants fewer than
/// `depth` generations down.
pub fn atoms_in(system: &HaarSystem, root: &LatticeId, depth: u32) -> Vec<HaarAtom> {
    let kinds = system.kinds();
    cells_in(system, root, depth)
        .into_iter()
        .flatten()
        .flat_map(|cell| kinds.iter().map(move |&k| HaarAtom::new(*system, cell, k)))
        .collect()
}

pub fn inner_product(a: &HaarAtom, b: &HaarAtom) -> f64 {
    let pa = a.pieces();
    let pb = b.pieces();
    let mut acc = 0.0;
    for (p, u) in &pa {
        for (q, v) in &pb {
            acc += u * v * p.overlap(q);
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub atoms: usize,
    pub max_off_diagonal: f64,
    pub max_norm_deviation: f64,
    pub max_abs_mean: f64,
}

/// Exact Gram matrix deviation from the identity over `atoms_in`.
pub fn gram_check(system: &HaarSystem, root: &LatticeId, depth: u32) -> GramReport {
    let atoms = atoms_in(system, root, depth);
    let mut off: f64 = 0.0;
    let mut diag: f64 = 0.0;
    let mut mean: f64 = 0.0;
    for (i, a) in atoms.iter().enumerate() {
        diag = diag.max((inner_product(a, a) - 1.0).abs());
        let m: f64 = a.pieces().iter().map(|(p, v)| v * p.measure()).sum();
        mean = mean.max(m.abs());
        for b in &atoms[i + 1..] {
            off = off.max(inner_product(a, b).abs());
        }
    }
    GramReport {
        atoms: atoms.len(),
        max_off_diagonal: off,
        max_norm_deviation: diag,
        max_abs_mean: mean,
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::SQRT_2;

    use super::*;
    use crate::basis::Orientation;

    #[test]
    fn atom_counts() {
        let one = |s: HaarSystem, d| atoms_in(&s, &LatticeId::root(s.shape()), d).len();
        assert_eq!(one(HaarSystem::Dyadic1D, 1), 1);
        assert_eq!(one(HaarSystem::New, 1), 3);
        assert_eq!(one(HaarSystem::Cube, 1), 7);
        assert_eq!(one(HaarSystem::New, 3), 3 * (1 + 4 + 16));
        assert_eq!(one(HaarSystem::Cube, 2), 7 * 9);
        assert_eq!(one(HaarSystem::Dyadic1D, 4), 15);
    }

    #[test]
    fn square_atom_values() {
        let root = LatticeId::root(CellShape::Square);
        let h0 = HaarAtom::new(HaarSystem::New, root, Kind(0));
        let hp = HaarAtom::new(HaarSystem::New, root, Kind(1));
        assert_eq!(h0.eval(&[0.25, 0.75]), 1.0);
        assert_eq!(h0.eval(&[0.25, 0.25]), -1.0);
        for x in [[0.1, 0.2], [0.7, 0.4], [0.5, 0.0]] {
            assert_eq!(hp.eval(&x), 0.0);
        }
        assert_eq!(hp.eval(&[0.75, 0.75]), SQRT_2);
        assert_eq!(h0.eval(&[1.0, 0.5]), 0.0);
    }

    #[test]
    fn triangle_atom_values() {
        let sys = HaarSystem::Triangle { a: 0.0, b: 1.0 };
        let root = LatticeId::root(CellShape::Triangle);
        let h0 = HaarAtom::new(sys, root, Kind(0));
        // centroid of the inverted middle child
        assert!((h0.eval(&[1.0 / 3.0, 1.0 / 3.0]) - SQRT_2).abs() < 1e-15);
        assert!((h0.eval(&[0.1, 0.1]) - SQRT_2).abs() < 1e-15);
        assert!((h0.eval(&[0.7, 0.1]) + SQRT_2).abs() < 1e-15);
        let hp = HaarAtom::new(sys, root, Kind(1));
        let hm = HaarAtom::new(sys, root, Kind(2));
        let mut seen = Vec::new();
        for h in [hp, hm] {
            for (_, v) in h.pieces() {
                seen.push(v);
                assert!((v.abs() - 2.0).abs() < 1e-15);
            }
        }
        assert_eq!(seen.len(), 4);
        let down = HaarAtom::new(sys, LatticeId::new(0, [0, 0, 0], Some(Orientation::Down)), Kind(0));
        assert!((down.eval(&[2.0 / 3.0, 2.0 / 3.0]) - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn gram_is_identity_for_every_system() {
        for sys in HaarSystem::catalogue() {
            let depth = if sys.dim() == 3 { 1 } else { 2 };
            let r = gram_check(&sys, &LatticeId::root(sys.shape()), depth);
            assert!(r.max_off_diagonal <= 1e-12, "{sys}: {r:?}");
            assert!(r.max_norm_deviation <= 1e-12, "{sys}: {r:?}");
            assert!(r.max_abs_mean <= 1e-12, "{sys}: {r:?}");
        }
    }

    #[test]
    fn span_identities_of_square_kinds() {
        let root = LatticeId::root(CellShape::Square);
        let at = |s, k, x: &[f64]| HaarAtom::new(s, root, Kind(k)).eval(x);
        for i in 0..16 {
            for j in 0..16 {
                let x = [(i as f64 + 0.5) / 16.0, (j as f64 + 0.5) / 16.0];
                let p = at(HaarSystem::New, 1, &x);
                let m = at(HaarSystem::New, 2, &x);
                let h2 = at(HaarSystem::Orig, 1, &x);
                let h3 = at(HaarSystem::Orig, 2, &x);
                assert!((p + m - SQRT_2 * h2).abs() < 1e-15);
                assert!((p - m - SQRT_2 * h3).abs() < 1e-15);
                assert_eq!(p * m, 0.0);
            }
        }
    }
}
