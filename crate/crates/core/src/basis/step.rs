use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::atom::{cell_measure, cell_piece, cells_in, locate, HaarAtom, Piece};
use super::lattice::LatticeId;
use super::system::{CellShape, HaarSystem, Kind};
use crate::error::{Error, Result};

/// Piecewise-constant function on the cells `level` generations below a
/// root cell. Values are stored in path order: the child digit chosen at
/// the first generation is the most significant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub system: HaarSystem,
    pub root: LatticeId,
    pub level: u32,
    pub values: Vec<Complex64>,
}

impl StepFunction {
    pub fn zeros(system: HaarSystem, root: LatticeId, level: u32) -> Self {
        let n = system.branching().pow(level);
        StepFunction {
            system,
            root,
            level,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_values(
        system: HaarSystem,
        root: LatticeId,
        level: u32,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        let n = system.branching().pow(level);
        if values.len() != n {
            return Err(Error::ResolutionMismatch(format!(
                "level {level} needs {n} values, got {}",
                values.len()
            )));
        }
        Ok(StepFunction {
            system,
            root,
            level,
            values,
        })
    }

    /// Samples `f` at a point inside each leaf cell.
    pub fn from_fn<F: Fn(&[f64]) -> Complex64>(
        system: HaarSystem,
        root: LatticeId,
        level: u32,
        f: F,
    ) -> Self {
        let values = leaf_cells(&system, &root, level)
            .iter()
            .map(|c| f(&interior_point(&system, c)))
            .collect();
        StepFunction {
            system,
            root,
            level,
            values,
        }
    }

    /// Projection of an atom onto this grid; exact when `level` exceeds
    /// the atom's generation.
    pub fn from_atom(atom: &HaarAtom, root: LatticeId, level: u32) -> Self {
        StepFunction::from_fn(atom.system, root, level, |x| Complex64::new(atom.eval(x), 0.0))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn leaf_measure(&self) -> f64 {
        cell_measure(&self.system, &self.root) / self.len() as f64
    }

    pub fn leaf_cells(&self) -> Vec<LatticeId> {
        leaf_cells(&self.system, &self.root, self.level)
    }

    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.leaf_measure()
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.len() as f64
    }

    pub fn subtract_mean(&mut self) {
        let m = self.mean();
        for v in &mut self.values {
            *v -= m;
        }
    }

    /// `‖f‖_p`, computed exactly from the cell values.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let w = self.leaf_measure();
        if p.is_infinite() {
            return self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        (self.values.iter().map(|v| v.norm().powf(p)).sum::<f64>() * w).powf(p.recip())
    }

    /// Index of the leaf containing the physical point `x`.
    pub fn leaf_index(&self, x: &[f64]) -> Option<usize> {
        let shape = self.system.shape();
        let mut cell = locate(&self.system, x, self.root.scale - self.level as i32);
        let c = self.system.branching();
        let mut idx = 0usize;
        let mut place = 1usize;
        for _ in 0..self.level {
            let (p, d) = cell.parent(shape);
            idx += d * place;
            place *= c;
            cell = p;
        }
        (cell == self.root).then_some(idx)
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.leaf_index(x)
            .map_or(Complex64::new(0.0, 0.0), |i| self.values[i])
    }

    /// Same function on a finer grid.
    pub fn refined(&self, level: u32) -> Result<StepFunction> {
        if level < self.level {
            return Err(Error::ResolutionMismatch(format!(
                "cannot refine level {} to coarser level {level}",
                self.level
            )));
        }
        let rep = self.system.branching().pow(level - self.level);
        let values = self
            .values
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, rep))
            .collect();
        Ok(StepFunction {
            system: self.system,
            root: self.root,
            level,
            values,
        })
    }

    pub fn same_grid(&self, other: &StepFunction) -> bool {
        self.system == other.system && self.root == other.root && self.level == other.level
    }

    pub fn max_abs_diff(&self, other: &StepFunction) -> f64 {
        assert!(self.same_grid(other), "functions on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn linear_combination(&self, a: Complex64, other: &StepFunction, b: Complex64) -> StepFunction {
        assert!(self.same_grid(other), "functions on different grids");
        StepFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            ..self.clone()
        }
    }

    /// Row-major grid (`grid[iy][ix]`) for square-cell systems.
    pub fn to_grid(&self) -> Result<Vec<Vec<Complex64>>> {
        if self.system.shape() != CellShape::Square {
            return Err(Error::UnsupportedParams(
                "grid layout exists only for square cells".into(),
            ));
        }
        let n = 1usize << self.level;
        let mut grid = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for (i, &v) in self.values.iter().enumerate() {
            let (ix, iy) = morton_to_xy(i, self.level);
            grid[iy][ix] = v;
        }
        Ok(grid)
    }

    pub fn from_grid(system: HaarSystem, root: LatticeId, grid: &[Vec<Complex64>]) -> Result<Self> {
        if system.shape() != CellShape::Square {
            return Err(Error::UnsupportedParams(
                "grid layout exists only for square cells".into(),
            ));
        }
        let n = grid.len();
        if n == 0 || !n.is_power_of_two() || grid.iter().any(|r| r.len() != n) {
            return Err(Error::ResolutionMismatch(
                "grid must be square with a power-of-two side".into(),
            ));
        }
        let level = n.trailing_zeros();
        let mut values = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, v) in values.iter_mut().enumerate() {
            let (ix, iy) = morton_to_xy(i, level);
            *v = grid[iy][ix];
        }
        Ok(StepFunction {
            system,
            root,
            level,
            values,
        })
    }
}

fn morton_to_xy(i: usize, level: u32) -> (usize, usize) {
    let (mut x, mut y) = (0, 0);
    for k in 0..level {
        let d = (i >> (2 * (level - 1 - k))) & 3;
        x = (x << 1) | (d & 1);
        y = (y << 1) | (d >> 1);
    }
    (x, y)
}

pub(crate) fn leaf_cells(system: &HaarSystem, root: &LatticeId, level: u32) -> Vec<LatticeId> {
    let shape = system.shape();
    let mut cur = vec![*root];
    for _ in 0..level {
        cur = cur.iter().flat_map(|c| c.children(shape)).collect();
    }
    cur
}

/// Centroid of a cell in physical coordinates.
pub fn interior_point(system: &HaarSystem, cell: &LatticeId) -> Vec<f64> {
    match cell_piece(system, cell) {
        Piece::Interval(a, b) => vec![0.5 * (a + b)],
        Piece::Box3(lo, hi) => (0..3).map(|i| 0.5 * (lo[i] + hi[i])).collect(),
        Piece::Polygon(r) => {
            let n = r.len() as f64;
            vec![
                r.iter().map(|p| p[0]).sum::<f64>() / n,
                r.iter().map(|p| p[1]).sum::<f64>() / n,
            ]
        }
    }
}

/// Coefficients `⟨f, h⟩` of every atom in `atoms_in` order, plus the mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarCoefficients {
    pub system: HaarSystem,
    pub root: LatticeId,
    pub depth: u32,
    pub mean: Complex64,
    pub coeffs: Vec<Complex64>,
}

impl HaarCoefficients {
    pub fn atoms(&self) -> Vec<HaarAtom> {
        super::atom::atoms_in(&self.system, &self.root, self.depth)
    }

    pub fn iter(&self) -> impl Iterator<Item = (HaarAtom, Complex64)> + '_ {
        self.atoms().into_iter().zip(self.coeffs.iter().copied())
    }

    /// Position of `atom` in the coefficient vector.
    pub fn position(&self, atom: &HaarAtom) -> Option<usize> {
        let shape = self.system.shape();
        let g = self.root.scale - atom.cell.scale;
        if atom.system != self.system || g < 0 || g as u32 >= self.depth {
            return None;
        }
        let c = self.system.branching();
        let mut cell = atom.cell;
        let mut idx = 0usize;
        let mut place = 1usize;
        for _ in 0..g {
            let (p, d) = cell.parent(shape);
            idx += d * place;
            place *= c;
            cell = p;
        }
        if cell != self.root {
            return None;
        }
        let before: usize = (0..g as u32).map(|k| c.pow(k)).sum();
        let nk = self.system.kind_count();
        Some((before + idx) * nk + atom.kind.0 as usize)
    }

    pub fn get(&self, atom: &HaarAtom) -> Option<Complex64> {
        self.position(atom).map(|i| self.coeffs[i])
    }

    /// Generation and kind of the coefficient at `position`.
    pub fn layout(&self) -> Vec<(u32, Kind)> {
        let c = self.system.branching();
        let nk = self.system.kind_count();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for g in 0..self.depth {
            for _ in 0..c.pow(g) {
                for k in 0..nk {
                    out.push((g, Kind(k as u8)));
                }
            }
        }
        out
    }
}

pub fn decompose(
    f: &StepFunction,
    system: &HaarSystem,
    root: &LatticeId,
    depth: u32,
) -> Result<HaarCoefficients> {
    if f.system != *system || f.root != *root {
        return Err(Error::InvalidConfig(
            "function is defined on a different system or root cell".into(),
        ));
    }
    if f.level < depth {
        return Err(Error::ResolutionMismatch(format!(
            "function has {} levels, decomposition needs {depth}",
            f.level
        )));
    }
    let c = system.branching();
    let kinds = system.kind_defs();
    let leaf = f.leaf_measure();
    // sums[g][i] = ∫ over cell i of generation g
    let mut sums: Vec<Vec<Complex64>> = vec![f.values.iter().map(|v| v * leaf).collect()];
    for _ in 0..f.level {
        let next: Vec<Complex64> = sums
            .last()
            .unwrap()
            .chunks(c)
            .map(|ch| ch.iter().sum())
            .collect();
        sums.push(next);
    }
    sums.reverse();
    let root_measure = cell_measure(system, root);
    let mut coeffs = Vec::new();
    for g in 0..depth as usize {
        let amp = (root_measure / c.pow(g as u32) as f64).sqrt().recip();
        let child = &sums[g + 1];
        for cell in 0..c.pow(g as u32) {
            let block = &child[cell * c..(cell + 1) * c];
            for k in kinds {
                let v: Complex64 = block.iter().zip(k.values).map(|(s, w)| s * *w).sum();
                coeffs.push(v * amp);
            }
        }
    }
    Ok(HaarCoefficients {
        system: *system,
        root: *root,
        depth,
        mean: sums[0][0] / root_measure,
        coeffs,
    })
}

/// `mean·χ_root + Σ c·h` on a grid of the given level.
pub fn reconstruct(coeffs: &HaarCoefficients, level: u32) -> Result<StepFunction> {
    reconstruct_filtered(coeffs, level, true, |_, _, _| true)
}

/// Partial sum over the atoms selected by `keep(generation, cell, kind)`.
pub fn reconstruct_filtered<K>(
    coeffs: &HaarCoefficients,
    level: u32,
    with_mean: bool,
    keep: K,
) -> Result<StepFunction>
where
    K: Fn(u32, usize, Kind) -> bool,
{
    if level < coeffs.depth {
        return Err(Error::ResolutionMismatch(format!(
            "cannot place {} generations on a grid of {level} levels",
            coeffs.depth
        )));
    }
    let sys = &coeffs.system;
    let c = sys.branching();
    let kinds = sys.kind_defs();
    let nk = kinds.len();
    let root_measure = cell_measure(sys, &coeffs.root);
    let mut cur = vec![if with_mean {
        coeffs.mean
    } else {
        Complex64::new(0.0, 0.0)
    }];
    let mut offset = 0;
    for g in 0..coeffs.depth {
        let amp = (root_measure / c.pow(g) as f64).sqrt().recip();
        let mut next = Vec::with_capacity(cur.len() * c);
        for (cell, &base) in cur.iter().enumerate() {
            let cs = &coeffs.coeffs[offset + cell * nk..offset + (cell + 1) * nk];
            for d in 0..c {
                let mut v = base;
                for (k, def) in kinds.iter().enumerate() {
                    if def.values[d] != 0.0 && keep(g, cell, Kind(k as u8)) {
                        v += cs[k] * (def.values[d] * amp);
                    }
                }
                next.push(v);
            }
        }
        offset += cur.len() * nk;
        cur = next;
    }
    let f = StepFunction {
        system: *sys,
        root: coeffs.root,
        level: coeffs.depth,
        values: cur,
    };
    f.refined(level)
}

/// Cell path of each generation-`g` cell, used for diagnostics.
pub fn generation_cells(system: &HaarSystem, root: &LatticeId, g: u32) -> Vec<LatticeId> {
    cells_in(system, root, g + 1).pop().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::atom::atoms_in;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_fn(sys: HaarSystem, level: u32, seed: u64) -> StepFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let root = LatticeId::root(sys.shape());
        let n = sys.branching().pow(level);
        let vals = (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let mut f = StepFunction::from_values(sys, root, level, vals).unwrap();
        f.subtract_mean();
        f
    }

    #[test]
    fn one_dimensional_atom_coefficient() {
        let sys = HaarSystem::Dyadic1D;
        let root = LatticeId::root(sys.shape());
        let f = StepFunction::from_fn(sys, root, 3, |x| {
            Complex64::new(if x[0] < 0.5 { -1.0 } else { 1.0 }, 0.0)
        });
        let c = decompose(&f, &sys, &root, 3).unwrap();
        assert!((c.coeffs[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(c.coeffs[1..].iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn atom_has_single_coefficient() {
        for sys in HaarSystem::catalogue() {
            let root = LatticeId::root(sys.shape());
            let depth = if sys.dim() == 3 { 2 } else { 3 };
            let atoms = atoms_in(&sys, &root, depth);
            for (i, a) in atoms.iter().enumerate().step_by(5) {
                let f = StepFunction::from_atom(a, root, depth);
                let c = decompose(&f, &sys, &root, depth).unwrap();
                for (j, v) in c.coeffs.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((v - want).norm() < 1e-12, "{sys} atom {i} coeff {j}: {v}");
                }
                assert_eq!(c.position(a), Some(i));
            }
        }
    }

    #[test]
    fn round_trip() {
        for sys in HaarSystem::catalogue() {
            let level = match sys.dim() {
                1 => 8,
                2 => 4,
                _ => 3,
            };
            let f = random_fn(sys, level, 5);
            let root = f.root;
            let c = decompose(&f, &sys, &root, level).unwrap();
            let g = reconstruct(&c, level).unwrap();
            assert!(f.max_abs_diff(&g) < 1e-12, "{sys}");
        }
    }

    #[test]
    fn resolution_mismatch() {
        let f = random_fn(HaarSystem::New, 2, 1);
        assert!(matches!(
            decompose(&f, &HaarSystem::New, &f.root, 3),
            Err(Error::ResolutionMismatch(_))
        ));
    }

    #[test]
    fn leaf_lookup_agrees_with_sampling() {
        for sys in HaarSystem::catalogue() {
            let root = LatticeId::root(sys.shape());
            let level = if sys.dim() == 3 { 2 } else { 3 };
            let cells = leaf_cells(&sys, &root, level);
            let f = StepFunction::zeros(sys, root, level);
            for (i, c) in cells.iter().enumerate() {
                assert_eq!(f.leaf_index(&interior_point(&sys, c)), Some(i), "{sys}");
            }
        }
    }

    #[test]
    fn grid_round_trip() {
        let f = random_fn(HaarSystem::New, 3, 9);
        let g = f.to_grid().unwrap();
        let back = StepFunction::from_grid(HaarSystem::New, f.root, &g).unwrap();
        assert_eq!(f, back);
        // Row 0 is the bottom row.
        let pt = [0.1 / 8.0 + 3.0 / 8.0, 0.1 / 8.0];
        assert_eq!(f.eval(&pt), g[0][3]);
    }

    #[test]
    fn lp_norm_of_constant_modulus() {
        let sys = HaarSystem::New;
        let root = LatticeId::root(sys.shape());
        let f = StepFunction::from_fn(sys, root, 2, |_| Complex64::new(0.0, 2.0));
        for p in [1.0, 1.5, 2.0, 4.0] {
            assert!((f.lp_norm(p) - 2.0).abs() < 1e-14);
        }
    }
}
