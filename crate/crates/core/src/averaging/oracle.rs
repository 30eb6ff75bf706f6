//! Averaged kernels computed directly from the atoms, by exact overlap
//! areas of their constancy pieces.

use num_complex::Complex64;

use crate::basis::{HaarAtom, HaarSystem, Kind, LatticeId, Orientation, Piece};
use crate::geometry::{translate_ring, convex_overlap_area};
use crate::special::{GKind, UnitComplex};

/// `∫ h(u) h(u + d) du` for a planar atom.
pub fn autocorrelation(atom: &HaarAtom, d: [f64; 2]) -> f64 {
    let pieces: Vec<(Vec<[f64; 2]>, f64)> = atom
        .pieces()
        .into_iter()
        .map(|(p, v)| match p {
            Piece::Polygon(r) => (r, v),
            _ => panic!("autocorrelation needs a planar system"),
        })
        .collect();
    let mut acc = 0.0;
    for (p, u) in &pieces {
        for (q, v) in &pieces {
            // u ∈ P and u + d ∈ Q  ⇔  u ∈ P ∩ (Q − d)
            let shifted = translate_ring(q, [-d[0], -d[1]]);
            acc += u * v * convex_overlap_area(p, &shifted);
        }
    }
    acc
}

/// Cells of the root lattice whose translates by the period lattice tile
/// the plane once.
fn period_cells(system: &HaarSystem) -> Vec<LatticeId> {
    match system {
        HaarSystem::Triangle { .. } => vec![
            LatticeId::new(0, [0, 0, 0], Some(Orientation::Up)),
            LatticeId::new(0, [0, 0, 0], Some(Orientation::Down)),
        ],
        _ => vec![LatticeId::new(0, [0; 3], None)],
    }
}

/// Kernel of the translation average of the single-scale transform with
/// multipliers `sigma` per kind, evaluated at `d`.
pub fn averaged_kernel_oracle(system: &HaarSystem, sigma: &[UnitComplex], d: [f64; 2]) -> Complex64 {
    let det = system.reference_map().det().abs();
    let mut acc = Complex64::new(0.0, 0.0);
    for cell in period_cells(system) {
        for (k, s) in sigma.iter().enumerate() {
            let atom = HaarAtom::new(*system, cell, Kind(k as u8));
            acc += s.value() * autocorrelation(&atom, d);
        }
    }
    acc / det
}

/// `½(R(d) + R(−d))` for the reference triangle atoms, computed from the up
/// and down cells.
pub fn triangle_g_oracle(kind: GKind, d: [f64; 2]) -> f64 {
    let sys = HaarSystem::Triangle { a: 0.0, b: 1.0 };
    let k = Kind(kind as u8);
    period_cells(&sys)
        .into_iter()
        .map(|c| autocorrelation(&HaarAtom::new(sys, c, k), d))
        .sum::<f64>()
        * 0.5
}
