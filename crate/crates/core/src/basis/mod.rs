//! Haar systems: lattices, atoms, step functions and exact (de)composition.

mod atom;
mod lattice;
mod step;
mod system;

pub use atom::{
    atoms_in, cell_measure, cell_piece, cells_in, eval_atom, gram_check, inner_product, locate,
    GramReport, HaarAtom, Piece,
};
pub use lattice::{LatticeId, Orientation};
pub use step::{
    decompose, generation_cells, interior_point, reconstruct, reconstruct_filtered,
    HaarCoefficients, StepFunction,
};
pub use system::{CellShape, HaarSystem, Kind};
