use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use haar_averager::averaging::{convolve_kernel, homogenized_profile, mc_average_translations, TestFunction};
use haar_averager::basis::{LatticeId, StepFunction};
use haar_averager::constants::{constant_for, planar_constant};
use haar_averager::martingale::{apply_transform, SignChoice};
use haar_averager::optimize::{fmt_sig, log_csv, search, search_sign_patterns, summary_json, Family, SearchSpec};
use haar_averager::quad::McConfig;
use haar_averager::special::UnitComplex;
use haar_averager::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{
    parse_angle, parse_sigma, ConstantArgs, FamilyArg, KernelDumpArgs, McCheckArgs, OptimizeArgs,
    TransformArgs,
};
use crate::manifest::RunManifest;
use crate::CliError;

/// A JSON number rounded to twelve significant digits; `null` if not finite.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(fmt_sig(x).parse::<f64>().expect("formatted float parses"))
    } else {
        Value::Null
    }
}

pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn emit_json(path: Option<&Path>, v: &Value) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    emit(path, &s)
}

fn usage_on_config(e: Error) -> CliError {
    match e {
        Error::InvalidConfig(m) | Error::UnsupportedParams(m) | Error::ResolutionMismatch(m) => {
            CliError::Usage(m)
        }
        other => CliError::Core(other),
    }
}

pub fn constant(a: &ConstantArgs) -> Result<(), CliError> {
    let spec = a.kernel.spec()?;
    let cfg = a.quad.config();
    let r = if a.planar {
        planar_constant(&spec, &cfg)
    } else {
        constant_for(&spec, &cfg)
    }
    .map_err(usage_on_config)?;
    let sigma: Vec<Value> = spec.sigmas().iter().map(|s| num(s.principal())).collect();
    let v = json!({
        "manifest": RunManifest::new("constant", a, vec![]).to_value(),
        "family": spec.family_name(),
        "params": a.kernel.params(),
        "sigma_angles": sigma,
        "I_re": num(r.integral_i.re),
        "I_im": num(r.integral_i.im),
        "raw_I_re": num(r.raw_integral.re),
        "raw_I_im": num(r.raw_integral.im),
        "C": num(r.c),
        "err_est": num(r.err_est),
        "cells_used": r.cells_used,
        "degenerate": r.degenerate,
        "method": r.method,
    });
    emit_json(a.out.as_deref(), &v)
}

fn family(f: FamilyArg) -> Family {
    match f {
        FamilyArg::New => Family::New,
        FamilyArg::Diagonal => Family::Diagonal,
        FamilyArg::Triangle => Family::Triangle,
    }
}

fn parse_bounds(s: &str) -> Result<Vec<(f64, f64)>, CliError> {
    s.split(',')
        .map(|pair| {
            let (lo, hi) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("bound `{pair}` is not lo:hi")))?;
            Ok((
                parse_angle(lo).map_err(CliError::Usage)?,
                parse_angle(hi).map_err(CliError::Usage)?,
            ))
        })
        .collect()
}

fn out_paths(out: &[PathBuf]) -> Option<(PathBuf, PathBuf)> {
    match out {
        [] => None,
        [prefix] => Some((prefix.with_extension("csv"), prefix.with_extension("json"))),
        [csv, js, ..] => Some((csv.clone(), js.clone())),
    }
}

pub fn optimize(a: &OptimizeArgs) -> Result<(), CliError> {
    let manifest = RunManifest::new("optimize", a, vec![a.seed]);
    let cfg = a.quad.config();
    if a.sign_patterns {
        if !(a.phi > 0.0 && a.phi < PI) {
            return Err(CliError::Usage(format!("--phi must lie in (0, π), got {}", a.phi)));
        }
        let pats = search_sign_patterns(a.b, a.phi, &cfg).map_err(usage_on_config)?;
        let rows: Vec<Value> = pats
            .iter()
            .map(|p| json!({"sigma": p.sigma, "C": num(p.c), "degenerate": p.degenerate}))
            .collect();
        let best = pats.iter().find(|p| !p.degenerate);
        let v = json!({
            "manifest": manifest.to_value(),
            "b": a.b,
            "phi": a.phi,
            "patterns": rows,
            "best_sigma": best.map(|p| p.sigma),
            "best_C": best.map_or(Value::Null, |p| num(p.c)),
        });
        let path = out_paths(&a.out).map(|(_, j)| j);
        return emit_json(path.as_deref(), &v);
    }

    let fam = family(a.family);
    let mut spec = SearchSpec::new(fam);
    if let Some(g) = a.grid {
        spec.grid = g;
    }
    if let Some(b) = &a.bounds {
        spec.bounds = parse_bounds(b)?;
    }
    spec.stages = a.stages;
    spec.starts = a.starts;
    spec.seed = a.seed;
    spec.quad = cfg;
    let result = search(&spec).map_err(usage_on_config)?;
    let summary = json!({
        "manifest": manifest.to_value(),
        "search": {
            "bounds": spec.bounds,
            "grid": spec.grid,
            "stages": spec.stages,
            "starts": spec.starts,
        },
        "summary": summary_json(&result),
    });
    match out_paths(&a.out) {
        Some((csv, js)) => {
            let text = manifest.csv_comment() + &log_csv(&result);
            emit(Some(&csv), &text)?;
            emit_json(Some(&js), &summary)?;
            emit_json(None, &summary["summary"])
        }
        None => emit_json(None, &summary),
    }
}

const GRID_HEADER: &str = "nx,ny,x0,y0,h";

struct GridFile {
    x0: f64,
    y0: f64,
    h: f64,
    grid: Vec<Vec<Complex64>>,
}

fn parse_grid(text: &str) -> Result<GridFile, CliError> {
    let bad = |m: String| CliError::Usage(format!("input grid: {m}"));
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    if header.replace(' ', "") != GRID_HEADER {
        return Err(bad(format!("expected header `{GRID_HEADER}`, found `{header}`")));
    }
    let dims: Vec<&str> = lines
        .next()
        .ok_or_else(|| bad("missing dimension row".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    if dims.len() != 5 {
        return Err(bad("dimension row needs five fields".into()));
    }
    let nx: usize = dims[0].parse().map_err(|_| bad(format!("bad nx `{}`", dims[0])))?;
    let ny: usize = dims[1].parse().map_err(|_| bad(format!("bad ny `{}`", dims[1])))?;
    let f = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")));
    let (x0, y0, h) = (f(dims[2])?, f(dims[3])?, f(dims[4])?);
    let mut grid = Vec::with_capacity(ny);
    for (row, line) in lines.enumerate() {
        let vals: Vec<f64> = line.split(',').map(|s| f(s.trim())).collect::<Result<_, _>>()?;
        if vals.len() != 2 * nx {
            return Err(bad(format!("row {row} has {} fields, expected {}", vals.len(), 2 * nx)));
        }
        grid.push(vals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
    }
    if grid.len() != ny {
        return Err(bad(format!("{} rows, expected {ny}", grid.len())));
    }
    Ok(GridFile { x0, y0, h, grid })
}

fn write_grid(manifest: &RunManifest, g: &GridFile) -> String {
    let n = g.grid.len();
    let mut s = manifest.csv_comment();
    let _ = writeln!(s, "{GRID_HEADER}");
    let _ = writeln!(s, "{n},{n},{},{},{}", fmt_sig(g.x0), fmt_sig(g.y0), fmt_sig(g.h));
    for row in &g.grid {
        let cells: Vec<String> = row
            .iter()
            .map(|v| format!("{},{}", fmt_sig(v.re), fmt_sig(v.im)))
            .collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

pub fn transform(a: &TransformArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.input)?;
    let input = parse_grid(&text)?;
    let system = a.system.system();
    let root = LatticeId::root(system.shape());
    let f = StepFunction::from_grid(system, root, &input.grid).map_err(usage_on_config)?;
    let sigma = parse_sigma(&a.sigma).map_err(CliError::Usage)?;
    let choice = SignChoice::per_kind(sigma);
    choice.validate(&system).map_err(usage_on_config)?;
    let depth = a.depth.unwrap_or(f.level);
    let g = apply_transform(&f, &system, &choice, depth).map_err(usage_on_config)?;
    let out = GridFile {
        grid: g.to_grid().map_err(usage_on_config)?,
        ..input
    };
    let manifest = RunManifest::new("transform", a, vec![]);
    emit(a.output.as_deref(), &write_grid(&manifest, &out))
}

pub fn kernel_dump(a: &KernelDumpArgs) -> Result<(), CliError> {
    let spec = a.kernel.spec()?;
    let kernel = spec.compile().map_err(usage_on_config)?;
    let manifest = RunManifest::new("kernel-dump", a, vec![]);
    let mut s = manifest.csv_comment();
    if a.homogenized {
        if a.angles == 0 {
            return Err(CliError::Usage("--angles must be at least 1".into()));
        }
        let cfg = a.quad.config();
        let vals: Vec<(f64, Complex64)> = (0..a.angles)
            .into_par_iter()
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / a.angles as f64;
                homogenized_profile(&kernel, phi, &cfg).map(|v| (phi, v))
            })
            .collect::<Result<_, _>>()?;
        s.push_str("angle,re,im\n");
        for (phi, v) in vals {
            let _ = writeln!(s, "{},{},{}", fmt_sig(phi), fmt_sig(v.re), fmt_sig(v.im));
        }
    } else {
        if a.n < 2 {
            return Err(CliError::Usage("--n must be at least 2".into()));
        }
        let e = a.extent.unwrap_or_else(|| {
            kernel
                .support()
                .vertices()
                .iter()
                .map(|v| v[0].abs().max(v[1].abs()))
                .fold(0.0, f64::max)
        });
        s.push_str("x,y,re,im\n");
        let step = 2.0 * e / (a.n - 1) as f64;
        for j in 0..a.n {
            let y = -e + step * j as f64;
            for i in 0..a.n {
                let x = -e + step * i as f64;
                let v = kernel.eval(x, y);
                let _ = writeln!(s, "{},{},{},{}", fmt_sig(x), fmt_sig(y), fmt_sig(v.re), fmt_sig(v.im));
            }
        }
    }
    emit(a.out.as_deref(), &s)
}

pub fn mc_check(a: &McCheckArgs) -> Result<(), CliError> {
    let system = a.system()?;
    let sigma = parse_sigma(&a.sigma).map_err(CliError::Usage)?;
    let s3: [UnitComplex; 3] = sigma
        .clone()
        .try_into()
        .map_err(|_| CliError::Usage("--sigma needs one angle per kind (three)".into()))?;
    let spec = system
        .kernel_spec(s3)
        .ok_or_else(|| CliError::Usage(format!("no closed-form kernel for {system}")))?;
    let kernel = spec.compile().map_err(usage_on_config)?;
    let cfg = a.quad.config();
    let mut rows = Vec::new();
    let mut all = true;
    let mut worst: f64 = 0.0;
    for i in 0..a.points {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        rng.set_stream(i as u64);
        let f = TestFunction::random(&mut rng, 0.5);
        let x = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        let mc_seed: u64 = rng.random();
        let mc = mc_average_translations(&system, &sigma, &f, x, &McConfig::new(a.samples, mc_seed))
            .map_err(usage_on_config)?;
        let q = convolve_kernel(&kernel, &f, x, &cfg)?.value;
        let diff = (mc.value - q).norm();
        let pass = diff <= 4.0 * mc.stderr + 1e-12;
        all &= pass;
        worst = worst.max(diff / mc.stderr.max(1e-300));
        rows.push(json!({
            "x": [num(x[0]), num(x[1])],
            "mc_re": num(mc.value.re),
            "mc_im": num(mc.value.im),
            "stderr": num(mc.stderr),
            "quad_re": num(q.re),
            "quad_im": num(q.im),
            "z": num(diff / mc.stderr.max(1e-300)),
            "pass": pass,
        }));
    }
    let v = json!({
        "manifest": RunManifest::new("mc-check", a, vec![a.seed]).to_value(),
        "system": system.to_string(),
        "samples": a.samples,
        "points": rows,
        "max_z": num(worst),
        "all_pass": all,
    });
    emit_json(a.out.as_deref(), &v)?;
    if all {
        Ok(())
    } else {
        Err(CliError::CheckFailed("Monte-Carlo and quadrature disagree beyond 4 standard errors".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_round_trip() {
        let text = "# comment\nnx,ny,x0,y0,h\n2,2,0,0,0.5\n1,0,2,0\n3,0,4,-1\n";
        let g = parse_grid(text).unwrap();
        assert_eq!(g.grid[1][1], Complex64::new(4.0, -1.0));
        let m = RunManifest::new("transform", &json!({}), vec![]);
        let again = parse_grid(&write_grid(&m, &g)).unwrap();
        assert_eq!(again.grid, g.grid);
    }

    #[test]
    fn malformed_grids_are_usage_errors() {
        for bad in [
            "",
            "a,b\n",
            "nx,ny,x0,y0,h\n2,2,0,0\n",
            "nx,ny,x0,y0,h\n2,2,0,0,1\n1,0\n1,0,1,0\n",
            "nx,ny,x0,y0,h\n2,2,0,0,1\n1,0,1,0\n",
        ] {
            assert!(matches!(parse_grid(bad), Err(CliError::Usage(_))), "{bad:?}");
        }
    }

    #[test]
    fn twelve_digit_json_numbers() {
        assert_eq!(num(2.007138402388904).to_string(), "2.00713840239");
        assert_eq!(num(f64::INFINITY), Value::Null);
    }

    #[test]
    fn bounds_parse() {
        assert_eq!(parse_bounds("0.5:2.5,pi/4:3pi/4").unwrap()[1].0, PI / 4.0);
        assert!(parse_bounds("1-2").is_err());
    }
}
