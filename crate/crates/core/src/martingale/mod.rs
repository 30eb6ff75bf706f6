//! Martingale transforms of Haar expansions, their filtrations, and
//! empirical norm estimates.

mod norms;

use std::collections::HashMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{
    atoms_in, decompose, reconstruct_filtered, HaarAtom, HaarCoefficients, HaarSystem, Kind,
    LatticeId, StepFunction,
};
use crate::error::{Error, Result};
use crate::special::UnitComplex;

pub use norms::{
    empirical_norm_ratio, near_extremal_search, p_star, random_mean_zero, NormRatioReport,
    SigmaMode,
};

/// Unimodular multipliers: one per kind, optionally overridden per atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignChoice {
    pub per_kind: Vec<UnitComplex>,
    pub overrides: Vec<(LatticeId, Kind, UnitComplex)>,
}

impl SignChoice {
    pub fn per_kind(per_kind: Vec<UnitComplex>) -> Self {
        SignChoice {
            per_kind,
            overrides: Vec::new(),
        }
    }

    pub fn identity(system: &HaarSystem) -> Self {
        SignChoice::per_kind(vec![UnitComplex::ONE; system.kind_count()])
    }

    /// `σ = −1` on `Kind(0)` and `+1` elsewhere.
    pub fn minus_first(system: &HaarSystem) -> Self {
        let mut s = SignChoice::identity(system);
        s.per_kind[0] = UnitComplex::MINUS_ONE;
        s
    }

    pub fn random_per_kind<R: Rng>(system: &HaarSystem, rng: &mut R) -> Self {
        SignChoice::per_kind(
            (0..system.kind_count())
                .map(|_| UnitComplex::from_angle(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)))
                .collect(),
        )
    }

    /// Independent uniform multipliers on every atom of the tree.
    pub fn random_per_atom<R: Rng>(
        system: &HaarSystem,
        root: &LatticeId,
        depth: u32,
        rng: &mut R,
    ) -> Self {
        let mut s = SignChoice::identity(system);
        s.overrides = atoms_in(system, root, depth)
            .into_iter()
            .map(|a| {
                let u = UnitComplex::from_angle(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
                (a.cell, a.kind, u)
            })
            .collect();
        s
    }

    pub fn with_override(mut self, atom: &HaarAtom, sigma: UnitComplex) -> Self {
        self.overrides.retain(|(c, k, _)| !(*c == atom.cell && *k == atom.kind));
        self.overrides.push((atom.cell, atom.kind, sigma));
        self
    }

    /// Independent of the atom's cell, as required for averaging.
    pub fn is_homogeneous(&self) -> bool {
        self.overrides.is_empty()
    }

    pub fn conj(&self) -> Self {
        SignChoice {
            per_kind: self.per_kind.iter().map(|u| u.conj()).collect(),
            overrides: self
                .overrides
                .iter()
                .map(|&(c, k, u)| (c, k, u.conj()))
                .collect(),
        }
    }

    pub fn validate(&self, system: &HaarSystem) -> Result<()> {
        if self.per_kind.len() != system.kind_count() {
            return Err(Error::InvalidConfig(format!(
                "{} has {} kinds, got {} signs",
                system.name(),
                system.kind_count(),
                self.per_kind.len()
            )));
        }
        Ok(())
    }

    /// Multiplier of each coefficient in `atoms_in` order.
    pub fn multipliers(&self, coeffs: &HaarCoefficients) -> Vec<Complex64> {
        let table: HashMap<(LatticeId, Kind), UnitComplex> = self
            .overrides
            .iter()
            .map(|&(c, k, u)| ((c, k), u))
            .collect();
        coeffs
            .atoms()
            .iter()
            .map(|a| {
                table
                    .get(&(a.cell, a.kind))
                    .copied()
                    .unwrap_or(self.per_kind[a.kind.0 as usize])
                    .value()
            })
            .collect()
    }
}

fn transformed(coeffs: &HaarCoefficients, sigma: &SignChoice) -> HaarCoefficients {
    let m = sigma.multipliers(coeffs);
    HaarCoefficients {
        coeffs: coeffs.coeffs.iter().zip(m).map(|(c, s)| c * s).collect(),
        ..coeffs.clone()
    }
}

/// `T_σ f = Σ σ_h ⟨f, h⟩ h` over the atoms of `depth` generations.
pub fn apply_transform(
    f: &StepFunction,
    system: &HaarSystem,
    sigma: &SignChoice,
    depth: u32,
) -> Result<StepFunction> {
    sigma.validate(system)?;
    let c = decompose(f, system, &f.root, depth)?;
    reconstruct_filtered(&transformed(&c, sigma), f.level, false, |_, _, _| true)
}

/// Sum of the components of `f` of the given kinds.
pub fn project_kinds(f: &StepFunction, depth: u32, kinds: &[Kind]) -> Result<StepFunction> {
    let c = decompose(f, &f.system, &f.root, depth)?;
    reconstruct_filtered(&c, f.level, false, |_, _, k| kinds.contains(&k))
}

/// Step `m ≥ 1` adds the kinds of `group` at `generation`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepLabel {
    pub generation: u32,
    pub group: usize,
}

/// The martingales `X_m` (partial sums of f) and `Y_m` (of `T_σ f`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MartingaleRun {
    pub groups: Vec<Vec<Kind>>,
    /// `labels[m]` describes step `m`; step 0 is the mean.
    pub labels: Vec<Option<StepLabel>>,
    pub x: Vec<StepFunction>,
    pub y: Vec<StepFunction>,
}

pub fn build_run(
    f: &StepFunction,
    system: &HaarSystem,
    sigma: &SignChoice,
    depth: u32,
) -> Result<MartingaleRun> {
    build_run_with_groups(f, system, sigma, depth, system.filtration_groups())
}

/// As `build_run`, with an explicit split of each generation into steps.
pub fn build_run_with_groups(
    f: &StepFunction,
    system: &HaarSystem,
    sigma: &SignChoice,
    depth: u32,
    groups: Vec<Vec<Kind>>,
) -> Result<MartingaleRun> {
    sigma.validate(system)?;
    let cx = decompose(f, system, &f.root, depth)?;
    let cy = transformed(&cx, sigma);
    let x0 = reconstruct_filtered(&cx, f.level, true, |_, _, _| false)?;
    let mut labels = vec![None];
    let mut xs = vec![x0.clone()];
    let mut ys = vec![x0];
    for g in 0..depth {
        for (s, group) in groups.iter().enumerate() {
            let keep = |gen: u32, _: usize, k: Kind| gen == g && group.contains(&k);
            let dx = reconstruct_filtered(&cx, f.level, false, keep)?;
            let dy = reconstruct_filtered(&cy, f.level, false, keep)?;
            let one = Complex64::new(1.0, 0.0);
            xs.push(xs.last().unwrap().linear_combination(one, &dx, one));
            ys.push(ys.last().unwrap().linear_combination(one, &dy, one));
            labels.push(Some(StepLabel {
                generation: g,
                group: s,
            }));
        }
    }
    Ok(MartingaleRun {
        groups,
        labels,
        x: xs,
        y: ys,
    })
}

impl MartingaleRun {
    /// Leaf partition generating the filtration at step `m`.
    pub fn partition(&self, m: usize) -> Vec<usize> {
        let f = &self.x[0];
        let sys = f.system;
        let c = sys.branching();
        let n = f.len();
        let Some(label) = self.labels[m] else {
            return vec![0; n];
        };
        // digits that no kind added so far separates share a class
        let added: Vec<Kind> = self.groups[..=label.group].iter().flatten().copied().collect();
        let signature = |d: usize| -> Vec<u64> {
            added
                .iter()
                .map(|&k| sys.child_values(k)[d].to_bits())
                .collect()
        };
        let mut class_of = vec![0usize; c];
        let mut reps: Vec<Vec<u64>> = Vec::new();
        for (d, slot) in class_of.iter_mut().enumerate() {
            let s = signature(d);
            *slot = match reps.iter().position(|r| *r == s) {
                Some(i) => i,
                None => {
                    reps.push(s);
                    reps.len() - 1
                }
            };
        }
        let below = c.pow(f.level - label.generation - 1);
        (0..n)
            .map(|i| {
                let cell = i / (below * c);
                let digit = (i / below) % c;
                cell * c + class_of[digit]
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubordinationReport {
    /// `max (|ΔY| − |ΔX|)` over steps and cells.
    pub max_violation: f64,
    /// `max ||ΔY| − |ΔX||`.
    pub max_increment_gap: f64,
    /// Largest deviation of `X_m` or `Y_m` from constancy on its partition.
    pub measurability: f64,
    /// Largest `|E(X_{m+1} | F_m) − X_m|`, and likewise for `Y`.
    pub martingale_gap: f64,
}

fn partition_means(f: &StepFunction, part: &[usize]) -> HashMap<usize, Complex64> {
    let mut acc: HashMap<usize, (Complex64, usize)> = HashMap::new();
    for (v, &p) in f.values.iter().zip(part) {
        let e = acc.entry(p).or_insert((Complex64::new(0.0, 0.0), 0));
        e.0 += v;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(k, (s, n))| (k, s / n as f64))
        .collect()
}

pub fn check_subordination(run: &MartingaleRun) -> SubordinationReport {
    let mut viol: f64 = f64::NEG_INFINITY;
    let mut gap: f64 = 0.0;
    let mut meas: f64 = 0.0;
    let mut mart: f64 = 0.0;
    for m in 0..run.x.len() {
        let part = run.partition(m);
        for f in [&run.x[m], &run.y[m]] {
            let means = partition_means(f, &part);
            for (v, p) in f.values.iter().zip(&part) {
                meas = meas.max((v - means[p]).norm());
            }
        }
        if m + 1 < run.x.len() {
            for (cur, next) in [(&run.x[m], &run.x[m + 1]), (&run.y[m], &run.y[m + 1])] {
                let means = partition_means(next, &part);
                for (v, p) in cur.values.iter().zip(&part) {
                    mart = mart.max((v - means[p]).norm());
                }
            }
        }
        if m > 0 {
            for i in 0..run.x[m].len() {
                let dx = (run.x[m].values[i] - run.x[m - 1].values[i]).norm();
                let dy = (run.y[m].values[i] - run.y[m - 1].values[i]).norm();
                viol = viol.max(dy - dx);
                gap = gap.max((dy - dx).abs());
            }
        }
    }
    SubordinationReport {
        max_violation: if viol.is_finite() { viol } else { 0.0 },
        max_increment_gap: gap,
        measurability: meas,
        martingale_gap: mart,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::CellShape;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn root() -> LatticeId {
        LatticeId::root(CellShape::Square)
    }

    #[test]
    fn identity_and_minus_first() {
        let sys = HaarSystem::New;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_mean_zero(&sys, &root(), 3, &mut rng);
        let g = apply_transform(&f, &sys, &SignChoice::identity(&sys), 3).unwrap();
        assert!(f.max_abs_diff(&g) < 1e-13);

        let h0 = StepFunction::from_atom(&HaarAtom::new(sys, root(), Kind(0)), root(), 2);
        let t = apply_transform(&h0, &sys, &SignChoice::minus_first(&sys), 2).unwrap();
        let neg = h0.linear_combination(Complex64::new(-1.0, 0.0), &h0, Complex64::new(0.0, 0.0));
        assert!(t.max_abs_diff(&neg) < 1e-14);
    }

    #[test]
    fn conjugate_undoes_transform() {
        let sys = HaarSystem::Triangle { a: 0.3, b: 0.9 };
        let r = LatticeId::root(sys.shape());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_mean_zero(&sys, &r, 3, &mut rng);
        let s = SignChoice::random_per_atom(&sys, &r, 3, &mut rng);
        let back = apply_transform(&apply_transform(&f, &sys, &s, 3).unwrap(), &sys, &s.conj(), 3).unwrap();
        assert!(f.max_abs_diff(&back) < 1e-12);
    }

    #[test]
    fn kind_projections_sum_to_identity() {
        let sys = HaarSystem::New;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_mean_zero(&sys, &root(), 3, &mut rng);
        let one = Complex64::new(1.0, 0.0);
        let mut sum = StepFunction::zeros(sys, root(), 3);
        for k in sys.kinds() {
            sum = sum.linear_combination(one, &project_kinds(&f, 3, &[k]).unwrap(), one);
        }
        assert!(sum.max_abs_diff(&f) < 1e-13);
    }

    #[test]
    fn run_of_single_atom() {
        let sys = HaarSystem::New;
        let f = StepFunction::from_atom(&HaarAtom::new(sys, root(), Kind(0)), root(), 1);
        let run = build_run(&f, &sys, &SignChoice::identity(&sys), 1).unwrap();
        assert!(run.x[0].values.iter().all(|v| v.norm() < 1e-15));
        assert!(run.x[1].max_abs_diff(&f) < 1e-15);
        assert!(run.x.last().unwrap().max_abs_diff(&f) < 1e-15);
    }

    #[test]
    fn new_runs_are_subordinate() {
        let sys = HaarSystem::New;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_mean_zero(&sys, &root(), 3, &mut rng);
        let s = SignChoice::random_per_atom(&sys, &root(), 3, &mut rng);
        let rep = check_subordination(&build_run(&f, &sys, &s, 3).unwrap());
        assert!(rep.max_increment_gap <= 1e-12, "{rep:?}");
        assert!(rep.measurability <= 1e-12, "{rep:?}");
        assert!(rep.martingale_gap <= 1e-12, "{rep:?}");
    }

    #[test]
    fn orig_three_kind_step_is_not() {
        let sys = HaarSystem::Orig;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_mean_zero(&sys, &root(), 2, &mut rng);
        let s = SignChoice::per_kind(vec![UnitComplex::ONE, UnitComplex::MINUS_ONE, UnitComplex::ONE]);
        let rep = check_subordination(&build_run(&f, &sys, &s, 2).unwrap());
        assert!(rep.max_violation > 1e-3, "{rep:?}");
    }

    #[test]
    fn zero_function_run() {
        let sys = HaarSystem::Cube;
        let r = LatticeId::root(sys.shape());
        let f = StepFunction::zeros(sys, r, 2);
        let rep = check_subordination(&build_run(&f, &sys, &SignChoice::identity(&sys), 2).unwrap());
        assert_eq!(rep.max_violation, 0.0);
    }
}
