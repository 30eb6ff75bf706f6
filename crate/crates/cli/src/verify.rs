//! The `verify` suites: each check reports the largest observed discrepancy
//! against its tolerance.

use std::f64::consts::PI;

use haar_averager::averaging::{
    calibre_average, convolve_kernel, homogenized_profile, kr_truncated, mc_average_translations,
    triangle_g_oracle, SeriesTruncation, TestFunction,
};
use haar_averager::basis::{gram_check, HaarSystem, LatticeId};
use haar_averager::constants::{
    closed_form_c_unit, closed_form_i_sqrt2, constant_for, diagonal_j, new_reduced_real, planar_constant,
};
use haar_averager::martingale::{
    build_run, check_subordination, empirical_norm_ratio, random_mean_zero, SigmaMode, SignChoice,
};
use haar_averager::quad::{McConfig, QuadConfig};
use haar_averager::special::{triangle_g, GKind, KernelSpec, UnitComplex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Suite, VerifyArgs};
use crate::commands::{emit_json, num};
use crate::manifest::RunManifest;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Expect {
    /// Pass when `max_violation ≤ tolerance`.
    AtMost,
    /// Pass when `max_violation > tolerance`: the check demonstrates a failure.
    Above,
}

struct Check {
    check: &'static str,
    system: String,
    params: Value,
    max_violation: f64,
    tolerance: f64,
    expect: Expect,
}

impl Check {
    fn le(check: &'static str, system: impl ToString, params: Value, v: f64, tol: f64) -> Self {
        Check {
            check,
            system: system.to_string(),
            params,
            max_violation: v,
            tolerance: tol,
            expect: Expect::AtMost,
        }
    }

    fn pass(&self) -> bool {
        match self.expect {
            Expect::AtMost => self.max_violation <= self.tolerance,
            Expect::Above => self.max_violation > self.tolerance,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "check": self.check,
            "system": self.system,
            "params": self.params,
            "max_violation": num(self.max_violation),
            "tolerance": num(self.tolerance),
            "expect": self.expect,
            "pass": self.pass(),
        })
    }
}

type Out = Result<Vec<Check>, CliError>;

fn gram() -> Out {
    Ok(HaarSystem::catalogue()
        .into_iter()
        .map(|sys| {
            let r = gram_check(&sys, &LatticeId::root(sys.shape()), 2);
            let v = r.max_off_diagonal.max(r.max_norm_deviation).max(r.max_abs_mean);
            Check::le("gram", sys, json!({"depth": 2, "atoms": r.atoms}), v, 1e-12)
        })
        .collect())
}

fn norms(a: &VerifyArgs) -> Out {
    let mut out = Vec::new();
    for sys in HaarSystem::catalogue() {
        for p in [4.0 / 3.0, 2.0, 3.0, 4.0] {
            let r = empirical_norm_ratio(&sys, &SigmaMode::RandomPerAtom, p, a.trials, a.seed)?;
            out.push(Check::le(
                "norm_bound",
                sys,
                json!({"p": p, "trials": a.trials, "bound": r.bound, "max_ratio": r.max_ratio}),
                r.max_ratio - r.bound,
                1e-9,
            ));
            if p == 2.0 {
                out.push(Check::le(
                    "l2_isometry",
                    sys,
                    json!({"trials": a.trials}),
                    (r.max_ratio - 1.0).abs().max((r.min_ratio - 1.0).abs()),
                    1e-10,
                ));
            }
        }
    }
    Ok(out)
}

fn subordination(a: &VerifyArgs) -> Out {
    let sys = HaarSystem::New;
    let root = LatticeId::root(sys.shape());
    let mut gap: f64 = 0.0;
    let mut structure: f64 = 0.0;
    for t in 0..a.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        rng.set_stream(t as u64);
        let f = random_mean_zero(&sys, &root, 3, &mut rng);
        let s = SignChoice::random_per_atom(&sys, &root, 3, &mut rng);
        let r = check_subordination(&build_run(&f, &sys, &s, 3)?);
        gap = gap.max(r.max_increment_gap);
        structure = structure.max(r.measurability).max(r.martingale_gap);
    }

    let orig = HaarSystem::Orig;
    let mut worst: f64 = f64::NEG_INFINITY;
    for t in 0..a.trials.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ 0x0517);
        rng.set_stream(t as u64);
        let f = random_mean_zero(&orig, &root, 2, &mut rng);
        let s = SignChoice::per_kind(vec![UnitComplex::ONE, UnitComplex::MINUS_ONE, UnitComplex::ONE]);
        worst = worst.max(check_subordination(&build_run(&f, &orig, &s, 2)?).max_violation);
    }
    Ok(vec![
        Check::le("subordination_equal_increments", sys, json!({"runs": a.trials}), gap, 1e-12),
        Check::le("martingale_structure", sys, json!({"runs": a.trials}), structure, 1e-12),
        Check {
            check: "three_kind_step_not_subordinate",
            system: orig.to_string(),
            params: json!({"runs": a.trials.max(1), "sigma": ["1", "-1", "1"]}),
            max_violation: worst,
            tolerance: 0.0,
            expect: Expect::Above,
        },
    ])
}

fn averaging(a: &VerifyArgs) -> Out {
    let s = [UnitComplex::ONE, UnitComplex::from_angle(2.0), UnitComplex::MINUS_ONE];
    let cfg = QuadConfig::default();
    let mut out = Vec::new();
    for (i, sys) in [
        HaarSystem::New,
        HaarSystem::Parallelogram { b: 1.2, phi: 1.2 },
        HaarSystem::Triangle { a: 0.3, b: 0.9 },
    ]
    .into_iter()
    .enumerate()
    {
        let kernel = sys.kernel_spec(s).expect("closed-form kernel").compile()?;
        let mut worst: f64 = f64::NEG_INFINITY;
        let points = 5;
        for j in 0..points {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            rng.set_stream((i * 1000 + j) as u64);
            let f = TestFunction::random(&mut rng, 0.5);
            let x = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
            let mc = mc_average_translations(&sys, &s, &f, x, &McConfig::new(a.samples, rng.random()))?;
            let q = convolve_kernel(&kernel, &f, x, &cfg)?.value;
            worst = worst.max((mc.value - q).norm() - 4.0 * mc.stderr);
        }
        out.push(Check::le(
            "mc_vs_kernel_convolution",
            sys,
            json!({"points": points, "samples": a.samples, "margin": "4 stderr"}),
            worst,
            1e-12,
        ));
    }
    Ok(out)
}

fn series(a: &VerifyArgs) -> Out {
    let cfg = QuadConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let specs = [
        KernelSpec::optimal_new(1.0, PI / 2.0),
        KernelSpec::optimal_new(1.3, 1.1),
        KernelSpec::triangle(0.3, 0.9, UnitComplex::from_angle(1.0), UnitComplex::MINUS_ONE),
    ];
    let mut out = Vec::new();
    for spec in specs {
        let k = spec.compile()?;
        let t = SeriesTruncation::new(rng.random_range(1.0..2.0), -20, 20)?;
        let mut dbl: f64 = 0.0;
        for _ in 0..20 {
            let x = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
            let lhs = kr_truncated(&k, &t.shifted(1), [2.0 * x[0], 2.0 * x[1]])?;
            let rhs = kr_truncated(&k, &t, x)? / 4.0;
            dbl = dbl.max((lhs - rhs).norm() / rhs.norm().max(1e-300));
        }
        out.push(Check::le("kr_doubling", spec.family_name(), json!({"points": 20}), dbl, 1e-12));

        let mut cal: f64 = 0.0;
        for i in 0..8 {
            let phi = 2.0 * PI * (i as f64 + 0.37) / 8.0;
            let lhs = calibre_average(&k, phi, -40, 40, &cfg)?;
            let rhs = homogenized_profile(&k, phi, &cfg)?;
            cal = cal.max((lhs - rhs).norm());
        }
        out.push(Check::le("calibre_average", spec.family_name(), json!({"angles": 8}), cal, 1e-8));
    }
    Ok(out)
}

fn triangle(a: &VerifyArgs) -> Out {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut table: f64 = 0.0;
    for _ in 0..100 {
        let d = [rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2)];
        for k in GKind::ALL {
            table = table.max((triangle_g(k, d[0], d[1]) - triangle_g_oracle(k, d)).abs());
        }
    }
    let mut sym: f64 = 0.0;
    for _ in 0..500 {
        let (x, y) = (rng.random_range(-1.1..1.1), rng.random_range(-1.1..1.1));
        let g = triangle_g_oracle(GKind::Zero, [x, y]);
        sym = sym
            .max((g - triangle_g_oracle(GKind::Zero, [y, x])).abs())
            .max((g - triangle_g_oracle(GKind::Zero, [-x, -y])).abs());
    }
    Ok(vec![
        Check::le("g0_at_origin", "triangle", json!({}), (triangle_g(GKind::Zero, 0.0, 0.0) - 1.0).abs(), 0.0),
        Check::le("g_tables_vs_oracle", "triangle", json!({"points": 100}), table, 1e-6),
        Check::le("g0_symmetries", "triangle", json!({"pairs": 500}), sym, 1e-12),
    ])
}

fn diagonal(a: &VerifyArgs) -> Out {
    let cfg = QuadConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..10 {
        let b = rng.random_range(0.2..3.0);
        let t = rng.random_range(-PI..PI);
        let (j1, e1) = diagonal_j(1.0 / b, t, &cfg)?;
        let (j2, e2) = diagonal_j(b, -t, &cfg)?;
        worst = worst.max((j1 + j2).abs() - (e1 + e2) - 1e-12);
    }
    Ok(vec![Check::le(
        "j_mirror_antisymmetry",
        "diagonal",
        json!({"points": 10, "margin": "combined quadrature error"}),
        worst,
        0.0,
    )])
}

fn constants(a: &VerifyArgs) -> Out {
    let cfg = QuadConfig::default();
    let unit = constant_for(&KernelSpec::optimal_new(1.0, PI / 2.0), &cfg)?;
    let root2 = constant_for(&KernelSpec::optimal_new(2f64.sqrt(), PI / 2.0), &cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut reduced: f64 = 0.0;
    let mut phase: f64 = 0.0;
    for _ in 0..3 {
        let spec = KernelSpec::optimal_new(rng.random_range(0.6..2.2), rng.random_range(0.9..2.2));
        let g = planar_constant(&spec, &cfg)?;
        reduced = reduced.max((g.raw_integral.re - new_reduced_real(&spec, &cfg)?.value.re).abs());
        let angles = [rng.random_range(-PI..PI), rng.random_range(-PI..PI), rng.random_range(-PI..PI)];
        let s = angles.map(UnitComplex::from_angle);
        for spec in [
            KernelSpec::Diagonal {
                b: rng.random_range(0.4..2.0),
                sigma0: s[0],
                sigma_plus: s[1],
                sigma_minus: s[2],
            },
            KernelSpec::Triangle {
                a: rng.random_range(-0.8..1.5),
                b: rng.random_range(0.4..1.8),
                sigma0: s[0],
                sigma_plus: s[1],
                sigma_minus: s[2],
            },
        ] {
            let fast = constant_for(&spec, &cfg)?;
            let slow = planar_constant(&spec, &cfg)?;
            reduced = reduced.max((fast.integral_i - slow.integral_i).norm());
            let rot = UnitComplex::from_angle(rng.random_range(-PI..PI));
            let turned = constant_for(&spec.with_sigmas(s.map(|u| u * rot)), &cfg)?;
            phase = phase.max((turned.integral_i.norm() - fast.integral_i.norm()).abs());
        }
    }
    Ok(vec![
        Check::le("c_unit_square", "new", json!({"b": 1.0, "phi": PI / 2.0, "C": unit.c}), (unit.c - closed_form_c_unit()).abs(), 1e-6),
        Check::le(
            "i_sqrt2_rectangle",
            "new",
            json!({"b": 2f64.sqrt(), "phi": PI / 2.0, "I": root2.raw_integral.re}),
            (root2.raw_integral.norm() - closed_form_i_sqrt2()).abs(),
            1e-8,
        ),
        Check::le("reduced_vs_planar", "all", json!({"points_per_family": 3}), reduced, 1e-7),
        Check::le("global_phase_invariance", "all", json!({}), phase, 1e-10),
    ])
}

pub fn run(a: &VerifyArgs) -> Result<(), CliError> {
    let suites: Vec<Suite> = match a.suite {
        Suite::All => vec![
            Suite::Gram,
            Suite::Norms,
            Suite::Subordination,
            Suite::Averaging,
            Suite::Series,
            Suite::Triangle,
            Suite::Diagonal,
            Suite::Constants,
        ],
        s => vec![s],
    };
    let mut checks = Vec::new();
    for s in suites {
        checks.extend(match s {
            Suite::Gram => gram(),
            Suite::Norms => norms(a),
            Suite::Subordination => subordination(a),
            Suite::Averaging => averaging(a),
            Suite::Series => series(a),
            Suite::Triangle => triangle(a),
            Suite::Diagonal => diagonal(a),
            Suite::Constants => constants(a),
            Suite::All => unreachable!(),
        }?);
    }
    let all = checks.iter().all(Check::pass);
    let v = json!({
        "manifest": RunManifest::new("verify", a, vec![a.seed]).to_value(),
        "checks": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
        "all_pass": all,
    });
    emit_json(a.out.as_deref(), &v)?;
    if all {
        Ok(())
    } else {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.pass()).map(|c| c.check).collect();
        Err(CliError::CheckFailed(failed.join(", ")))
    }
}
