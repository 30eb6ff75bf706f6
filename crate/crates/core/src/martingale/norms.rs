use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_transform, SignChoice};
use crate::basis::{HaarSystem, LatticeId, StepFunction};
use crate::error::{Error, Result};
use crate::special::UnitComplex;

/// `max(p, p/(p−1))`.
pub fn p_star(p: f64) -> f64 {
    p.max(p / (p - 1.0))
}

/// Cellwise i.i.d. standard complex Gaussians with the mean removed.
pub fn random_mean_zero<R: Rng>(system: &HaarSystem, root: &LatticeId, level: u32, rng: &mut R) -> StepFunction {
    let n = system.branching().pow(level);
    let values = (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    let mut f = StepFunction::from_values(*system, *root, level, values).expect("sized by system");
    f.subtract_mean();
    f
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SigmaMode {
    Fixed(SignChoice),
    RandomPerKind,
    RandomPerAtom,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRatioReport {
    pub p: f64,
    pub trials: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// `p* − 1`.
    pub bound: f64,
}

impl NormRatioReport {
    pub fn within_bound(&self, slack: f64) -> bool {
        self.max_ratio <= self.bound + slack
    }
}

/// Grid depth used for random test functions: 64 cells in every dimension.
pub fn default_level(system: &HaarSystem) -> u32 {
    match system.dim() {
        1 => 6,
        2 => 3,
        _ => 2,
    }
}

fn draw_sigma<R: Rng>(mode: &SigmaMode, system: &HaarSystem, root: &LatticeId, depth: u32, rng: &mut R) -> SignChoice {
    match mode {
        SigmaMode::Fixed(s) => s.clone(),
        SigmaMode::RandomPerKind => SignChoice::random_per_kind(system, rng),
        SigmaMode::RandomPerAtom => SignChoice::random_per_atom(system, root, depth, rng),
    }
}

/// Largest `‖T_σ f‖_p / ‖f‖_p` over random mean-zero `f` (and random `σ`
/// unless fixed). Trial `i` uses stream `i` of a generator seeded by `seed`.
pub fn empirical_norm_ratio(
    system: &HaarSystem,
    mode: &SigmaMode,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<NormRatioReport> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidConfig(format!("p must lie in (1, ∞), got {p}")));
    }
    system.validate()?;
    let root = LatticeId::root(system.shape());
    let level = default_level(system);
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let f = random_mean_zero(system, &root, level, &mut rng);
            let s = draw_sigma(mode, system, &root, level, &mut rng);
            let g = apply_transform(&f, system, &s, level)?;
            Ok(g.lp_norm(p) / f.lp_norm(p))
        })
        .collect::<Result<_>>()?;
    Ok(NormRatioReport {
        p,
        trials,
        max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        bound: p_star(p) - 1.0,
    })
}

/// Stochastic hill climb on `(f, σ ∈ {±1})` for a large `‖T_σ f‖_p/‖f‖_p`.
pub fn near_extremal_search(
    system: &HaarSystem,
    p: f64,
    restarts: usize,
    iterations: usize,
    seed: u64,
) -> Result<f64> {
    system.validate()?;
    let root = LatticeId::root(system.shape());
    let level = default_level(system);
    let atoms = crate::basis::atoms_in(system, &root, level);
    let best: Vec<f64> = (0..restarts)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut f = random_mean_zero(system, &root, level, &mut rng);
            for v in &mut f.values {
                v.im = 0.0;
            }
            f.subtract_mean();
            let mut s = SignChoice::identity(system);
            for a in &atoms {
                let u = if rng.random::<bool>() {
                    UnitComplex::ONE
                } else {
                    UnitComplex::MINUS_ONE
                };
                s = s.with_override(a, u);
            }
            let ratio = |f: &StepFunction, s: &SignChoice| -> Result<f64> {
                Ok(apply_transform(f, system, s, level)?.lp_norm(p) / f.lp_norm(p))
            };
            let mut cur = ratio(&f, &s)?;
            for it in 0..iterations {
                if it % 3 == 0 {
                    let i = rng.random_range(0..s.overrides.len());
                    let mut s2 = s.clone();
                    s2.overrides[i].2 = -s2.overrides[i].2;
                    let r2 = ratio(&f, &s2)?;
                    if r2 > cur {
                        s = s2;
                        cur = r2;
                    }
                } else {
                    let mut f2 = f.clone();
                    let scale = 0.3 * rng.random::<f64>();
                    for v in &mut f2.values {
                        let z: f64 = rng.sample(StandardNormal);
                        v.re += scale * z;
                    }
                    f2.subtract_mean();
                    let r2 = ratio(&f2, &s)?;
                    if r2 > cur {
                        f = f2;
                        cur = r2;
                    }
                }
            }
            Ok(cur)
        })
        .collect::<Result<_>>()?;
    Ok(best.into_iter().fold(f64::NEG_INFINITY, f64::max))
}
