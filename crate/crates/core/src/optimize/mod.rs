//! Parameter searches for the smallest constant `C` in each kernel family:
//! a coarse grid scan, then downhill-simplex refinement.

mod report;
mod simplex;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{constant_for, diagonal_constant, ConstantResult};
use crate::error::{Error, Result};
use crate::quad::QuadConfig;
use crate::special::{KernelSpec, UnitComplex};

pub use report::{fmt_sig, log_csv, summary_json};
pub use simplex::{nelder_mead, SimplexConfig, SimplexOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `(b, φ)` with `σ = (1, −1, −1)`.
    New,
    /// `(b, ϑ)` with `σ₀ = 1`, `σ± = e^{±iϑ}`.
    Diagonal,
    /// `(a, b, arg σ₊, arg σ₋)` with `σ₀ = 1`.
    Triangle,
}

impl Family {
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::New => &["b", "phi"],
            Family::Diagonal => &["b", "theta"],
            Family::Triangle => &["a", "b", "arg_sigma_plus", "arg_sigma_minus"],
        }
    }

    /// Search box used when none is given. The diagonal box uses `b ≤ 1`,
    /// which loses nothing because `(b, ϑ) ↦ (1/b, −ϑ)` preserves `|I|`.
    pub fn default_bounds(self) -> Vec<(f64, f64)> {
        match self {
            Family::New => vec![(0.5, 2.5), (FRAC_PI_4, 3.0 * FRAC_PI_4)],
            Family::Diagonal => vec![(0.05, 1.0), (-PI, PI)],
            Family::Triangle => vec![(-1.0, 2.0), (0.05, 2.0), (-PI, PI), (-PI, PI)],
        }
    }

    pub fn spec_at(self, p: &[f64]) -> KernelSpec {
        match self {
            Family::New => KernelSpec::optimal_new(p[0], p[1]),
            Family::Diagonal => KernelSpec::diagonal(p[0], p[1]),
            Family::Triangle => KernelSpec::triangle(
                p[0],
                p[1],
                UnitComplex::from_angle(p[2]),
                UnitComplex::from_angle(p[3]),
            ),
        }
    }

    pub fn evaluate(self, p: &[f64], cfg: &QuadConfig) -> Result<ConstantResult> {
        match self {
            Family::Diagonal => diagonal_constant(p[0], p[1], cfg),
            _ => constant_for(&self.spec_at(p), cfg),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub family: Family,
    /// `(lo, hi)` per parameter, in the order of [`Family::param_names`].
    pub bounds: Vec<(f64, f64)>,
    /// Grid points per axis in the first stage, endpoints included.
    pub grid: usize,
    /// Stage 1 is the grid; every further stage is a simplex refinement.
    pub stages: u32,
    /// How many of the best grid points seed the first refinement.
    pub starts: usize,
    pub seed: u64,
    pub quad: QuadConfig,
    pub simplex: SimplexConfig,
}

impl SearchSpec {
    pub fn new(family: Family) -> Self {
        SearchSpec {
            family,
            bounds: family.default_bounds(),
            grid: match family {
                Family::Triangle => 7,
                _ => 21,
            },
            stages: 2,
            starts: 3,
            seed: 0,
            quad: QuadConfig::default(),
            simplex: SimplexConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let names = self.family.param_names();
        if self.bounds.len() != names.len() {
            return Err(Error::InvalidConfig(format!(
                "{} bounds given, family needs {}",
                self.bounds.len(),
                names.len()
            )));
        }
        for (&(lo, hi), name) in self.bounds.iter().zip(names) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidConfig(format!("empty range for {name}: [{lo}, {hi}]")));
            }
            let ok = match *name {
                "b" => lo > 0.0,
                "phi" => lo > 0.0 && hi < PI,
                "theta" | "arg_sigma_plus" | "arg_sigma_minus" => lo >= -PI && hi <= PI,
                _ => true,
            };
            if !ok {
                return Err(Error::InvalidConfig(format!(
                    "range for {name} leaves the parameter domain: [{lo}, {hi}]"
                )));
            }
        }
        if self.grid < 2 {
            return Err(Error::InvalidConfig("grid needs at least 2 points per axis".into()));
        }
        if self.stages < 1 {
            return Err(Error::InvalidConfig("at least one stage is required".into()));
        }
        if self.starts < 1 {
            return Err(Error::InvalidConfig("at least one refinement start is required".into()));
        }
        self.quad.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalStatus {
    Ok,
    /// Identity-average sign pattern, excluded from the ranking.
    Degenerate,
    /// Quadrature gave up; the point is skipped.
    NonConvergence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub stage: u32,
    pub params: Vec<f64>,
    #[serde(rename = "C")]
    pub c: f64,
    pub err: f64,
    pub status: EvalStatus,
}

impl EvalRecord {
    /// Value used for ranking: `+∞` unless the point is admissible.
    pub fn objective(&self) -> f64 {
        match self.status {
            EvalStatus::Ok if self.c.is_finite() => self.c,
            _ => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub family: Family,
    pub param_names: Vec<String>,
    pub best_params: Vec<f64>,
    #[serde(rename = "best_C")]
    pub best_c: f64,
    pub best_err: f64,
    /// Best `C` after each stage.
    pub stage_best: Vec<f64>,
    pub log: Vec<EvalRecord>,
}

fn record(family: Family, stage: u32, p: &[f64], cfg: &QuadConfig) -> EvalRecord {
    match family.evaluate(p, cfg) {
        Ok(r) => EvalRecord {
            stage,
            params: p.to_vec(),
            c: r.c,
            err: r.c_err(),
            status: if r.degenerate {
                EvalStatus::Degenerate
            } else {
                EvalStatus::Ok
            },
        },
        Err(e) => {
            let (c, err) = match e {
                Error::NonConvergence { estimate, achieved } => {
                    let i = estimate.norm() / (2.0 * std::f64::consts::LN_2);
                    (1.0 / i, achieved)
                }
                _ => (f64::NAN, f64::NAN),
            };
            EvalRecord {
                stage,
                params: p.to_vec(),
                c,
                err,
                status: EvalStatus::NonConvergence,
            }
        }
    }
}

fn grid_points(bounds: &[(f64, f64)], n: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![Vec::new()];
    for &(lo, hi) in bounds {
        let axis: Vec<f64> = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        pts = pts
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    pts
}

fn best_of(log: &[EvalRecord]) -> Option<&EvalRecord> {
    log.iter()
        .filter(|r| r.objective().is_finite())
        .min_by(|a, b| a.objective().total_cmp(&b.objective()))
}

/// Grid scan followed by `stages − 1` simplex refinements. Deterministic
/// for a given spec.
pub fn search(spec: &SearchSpec) -> Result<SearchResult> {
    spec.validate()?;
    let family = spec.family;
    let dim = spec.bounds.len();
    let spacing: Vec<f64> = spec
        .bounds
        .iter()
        .map(|&(lo, hi)| (hi - lo) / (spec.grid - 1) as f64)
        .collect();

    let mut log: Vec<EvalRecord> = grid_points(&spec.bounds, spec.grid)
        .par_iter()
        .map(|p| record(family, 1, p, &spec.quad))
        .collect();
    let mut stage_best = vec![best_of(&log).map_or(f64::INFINITY, |r| r.c)];

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for stage in 2..=spec.stages {
        let starts: Vec<Vec<f64>> = if stage == 2 {
            let mut ranked: Vec<&EvalRecord> =
                log.iter().filter(|r| r.objective().is_finite()).collect();
            ranked.sort_by(|a, b| a.objective().total_cmp(&b.objective()));
            ranked.iter().take(spec.starts).map(|r| r.params.clone()).collect()
        } else {
            best_of(&log).map(|r| vec![r.params.clone()]).unwrap_or_default()
        };
        let shrink = 0.25f64.powi(stage as i32 - 2);
        for start in starts {
            let step: Vec<f64> = (0..dim)
                .map(|i| {
                    let sign = if stage > 2 && rng.random_bool(0.5) { -1.0 } else { 1.0 };
                    sign * spacing[i] * shrink
                })
                .collect();
            nelder_mead(
                |p| {
                    let r = record(family, stage, p, &spec.quad);
                    let f = r.objective();
                    log.push(r);
                    f
                },
                &start,
                &step,
                &spec.bounds,
                &spec.simplex,
            );
        }
        stage_best.push(best_of(&log).map_or(f64::INFINITY, |r| r.c));
    }

    let best = best_of(&log).cloned();
    Ok(SearchResult {
        family,
        param_names: family.param_names().iter().map(|s| s.to_string()).collect(),
        best_params: best.as_ref().map(|r| r.params.clone()).unwrap_or_default(),
        best_c: best.as_ref().map_or(f64::INFINITY, |r| r.c),
        best_err: best.as_ref().map_or(f64::NAN, |r| r.err),
        stage_best,
        log,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignPattern {
    /// `(σ₀, σ₊, σ₋)` as ±1.
    pub sigma: [f64; 3],
    #[serde(rename = "C")]
    pub c: f64,
    pub degenerate: bool,
}

/// Every real sign pattern with `σ₀ = 1` for the parallelogram family at
/// `(b, φ)`, best admissible first. Degenerate patterns sort last.
pub fn search_sign_patterns(b: f64, phi: f64, cfg: &QuadConfig) -> Result<Vec<SignPattern>> {
    let pm = |s: f64| if s > 0.0 { UnitComplex::ONE } else { UnitComplex::MINUS_ONE };
    let mut out = Vec::new();
    for sp in [1.0, -1.0] {
        for sm in [1.0, -1.0] {
            let spec = KernelSpec::new_family(b, phi, [UnitComplex::ONE, pm(sp), pm(sm)]);
            let r = constant_for(&spec, cfg)?;
            out.push(SignPattern {
                sigma: [1.0, sp, sm],
                c: r.c,
                degenerate: r.degenerate,
            });
        }
    }
    out.sort_by(|a, b| a.degenerate.cmp(&b.degenerate).then(a.c.total_cmp(&b.c)));
    Ok(out)
}

/// `C` at `(b, ϑ)` and at its mirror `(1/b, −ϑ)`.
pub fn diagonal_mirror(b: f64, theta: f64, cfg: &QuadConfig) -> Result<(ConstantResult, ConstantResult)> {
    Ok((diagonal_constant(b, theta, cfg)?, diagonal_constant(1.0 / b, -theta, cfg)?))
}

/// The conjectured optimum of the parallelogram family.
pub const SQRT2_RECTANGLE: [f64; 2] = [std::f64::consts::SQRT_2, FRAC_PI_2];

#[cfg(test)]
mod tests {
    use super::*;

    fn small(family: Family) -> SearchSpec {
        SearchSpec {
            grid: 5,
            ..SearchSpec::new(family)
        }
    }

    #[test]
    fn grid_enumerates_in_lexicographic_order() {
        let g = grid_points(&[(0.0, 1.0), (10.0, 12.0)], 3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], vec![0.0, 10.0]);
        assert_eq!(g[1], vec![0.0, 11.0]);
        assert_eq!(g[8], vec![1.0, 12.0]);
    }

    #[test]
    fn stages_improve_monotonically_and_best_is_log_minimum() {
        let spec = SearchSpec {
            stages: 3,
            ..small(Family::New)
        };
        let r = search(&spec).unwrap();
        assert_eq!(r.stage_best.len(), 3);
        for w in r.stage_best.windows(2) {
            assert!(w[1] <= w[0]);
        }
        let min = r
            .log
            .iter()
            .map(EvalRecord::objective)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min, r.best_c);
    }

    #[test]
    fn search_is_reproducible() {
        let spec = SearchSpec {
            stages: 3,
            seed: 5,
            ..small(Family::Diagonal)
        };
        assert_eq!(search(&spec).unwrap(), search(&spec).unwrap());
    }

    #[test]
    fn degenerate_diagonal_point_never_wins() {
        // The grid contains ϑ = 0, the identity average.
        let spec = SearchSpec {
            bounds: vec![(0.5, 1.0), (-0.2, 0.2)],
            grid: 3,
            stages: 1,
            ..SearchSpec::new(Family::Diagonal)
        };
        let r = search(&spec).unwrap();
        assert!(r.log.iter().any(|e| e.status == EvalStatus::Degenerate));
        assert!(r.best_params[1] != 0.0);
    }

    #[test]
    fn optimal_square_signs() {
        let pats = search_sign_patterns(1.0, FRAC_PI_2, &QuadConfig::default()).unwrap();
        assert_eq!(pats[0].sigma, [1.0, -1.0, -1.0]);
        assert!((pats[0].c - crate::constants::closed_form_c_unit()).abs() < 1e-6);
        assert!(pats.last().unwrap().degenerate);
    }

    #[test]
    fn diagonal_mirror_preserves_modulus() {
        for (b, t) in [(0.4, 1.9), (0.8, -2.6), (0.65, 0.3)] {
            let (a, m) = diagonal_mirror(b, t, &QuadConfig::default()).unwrap();
            assert!((a.integral_i.norm() - m.integral_i.norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = SearchSpec::new(Family::New);
        s.bounds[0] = (-1.0, 2.0);
        assert!(search(&s).is_err());
        let mut s = SearchSpec::new(Family::New);
        s.bounds.pop();
        assert!(search(&s).is_err());
        let s = SearchSpec {
            grid: 1,
            ..SearchSpec::new(Family::Triangle)
        };
        assert!(search(&s).is_err());
    }
}
