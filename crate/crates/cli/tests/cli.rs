use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_haar-averager"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("haar-averager-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Drops the `"timestamp_unix":N` field so outputs can be compared.
fn strip_timestamp(s: &str) -> String {
    let key = "\"timestamp_unix\":";
    let mut out = String::new();
    let mut rest = s;
    while let Some(i) = rest.find(key) {
        out.push_str(&rest[..i + key.len()]);
        rest = rest[i + key.len()..].trim_start_matches([' ', '0', '1', '2', '3', '4', '5', '6', '7', '8', '9']);
    }
    out.push_str(rest);
    out
}

#[test]
fn constant_for_sqrt2_rectangle() {
    let out = run(&["constant", "--family", "new", "--b", "1.4142135624", "--phi", "1.5707963268"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert!((v["C"].as_f64().unwrap() - 2.00714).abs() < 5e-6, "{v}");
    assert_eq!(v["family"], "new");
    assert!(v["I_re"].is_number() && v["I_im"].is_number() && v["err_est"].is_number());
    assert_eq!(v["manifest"]["subcommand"], "constant");
}

#[test]
fn negative_side_is_a_usage_error() {
    let out = run(&["constant", "--family", "new", "--b", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--b") && err.contains("--help"), "{err}");
}

#[test]
fn bad_angle_and_unknown_subcommand_exit_2() {
    assert_eq!(run(&["constant", "--phi", "4"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["constant", "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn verify_all_passes() {
    let out = run(&["verify", "--suite", "all", "--seed", "7"]);
    let v = json_of(&out);
    assert_eq!(out.status.code(), Some(0), "{v}");
    assert_eq!(v["all_pass"], true);
    for c in v["checks"].as_array().unwrap() {
        for key in ["check", "system", "params", "max_violation", "pass"] {
            assert!(c.get(key).is_some(), "{c}");
        }
    }
}

#[test]
fn output_files_reproduce_except_timestamp() {
    let a = scratch("c1.json");
    let b = scratch("c2.json");
    for p in [&a, &b] {
        let out = run(&["constant", "--family", "triangle", "--a", "0.3", "--b", "0.9", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    // argv differs only in the output path
    let norm = |p: &PathBuf| strip_timestamp(&fs::read_to_string(p).unwrap()).replace(p.to_str().unwrap(), "OUT");
    assert_eq!(norm(&a), norm(&b));
    let v: Value = serde_json::from_str(&fs::read_to_string(&a).unwrap()).unwrap();
    assert!(v["manifest"]["timestamp_unix"].as_u64().unwrap() > 0);
}

#[test]
fn optimize_writes_csv_and_json() {
    let prefix = scratch("opt");
    let out = run(&[
        "optimize", "--family", "new", "--grid", "5", "--stages", "2", "--seed", "3", "--out",
        prefix.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(prefix.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# manifest: {"));
    assert_eq!(lines.next().unwrap(), "stage,status,b,phi,C,err");
    assert!(lines.count() >= 25);
    let js: Value = serde_json::from_str(&fs::read_to_string(prefix.with_extension("json")).unwrap()).unwrap();
    let c = js["summary"]["best_C"].as_f64().unwrap();
    assert!(c > 2.0 && c < 2.02, "{js}");
    assert_eq!(js["manifest"]["seeds"][0], 3);
}

#[test]
fn optimize_sign_patterns_on_unit_square() {
    let out = run(&["optimize", "--sign-patterns", "--b", "1", "--phi", "pi/2"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["best_sigma"], serde_json::json!([1.0, -1.0, -1.0]));
    assert!((v["best_C"].as_f64().unwrap() - 2.0697783483).abs() < 1e-6);
}

fn write_grid(path: &PathBuf, vals: &[[f64; 4]; 4]) {
    let mut s = String::from("nx,ny,x0,y0,h\n4,4,0,0,0.25\n");
    for row in vals {
        let cells: Vec<String> = row.iter().map(|v| format!("{v},0")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    fs::write(path, s).unwrap();
}

fn read_grid(path: &PathBuf) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(2)
        .map(|l| l.split(',').step_by(2).map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn transform_identity_and_negation() {
    let vals = [
        [1.0, 2.0, 0.5, -1.0],
        [3.0, -2.0, 0.0, 4.0],
        [0.25, 1.5, -3.0, 2.0],
        [1.0, 1.0, 1.0, -0.5],
    ];
    let input = scratch("grid.csv");
    write_grid(&input, &vals);
    let mean: f64 = vals.iter().flatten().sum::<f64>() / 16.0;

    let id = scratch("grid_id.csv");
    let out = run(&["transform", "--input", input.to_str().unwrap(), "--output", id.to_str().unwrap(), "--system", "orig", "--sigma", "0,0,0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let g = read_grid(&id);
    for (r, row) in g.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            // the transform only acts on Haar atoms, so the mean is dropped
            assert!((v - (vals[r][c] - mean)).abs() < 1e-10, "{v}");
        }
    }

    let neg = scratch("grid_neg.csv");
    let out = run(&["transform", "--input", input.to_str().unwrap(), "--output", neg.to_str().unwrap(), "--sigma", "pi,pi,pi"]);
    assert!(out.status.success());
    let g = read_grid(&neg);
    for (r, row) in g.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            assert!((v - (mean - vals[r][c])).abs() < 1e-10, "{v}");
        }
    }

    fs::write(&input, "nx,ny,x0,y0,h\n3,3,0,0,1\n1,0,1,0,1,0\n1,0,1,0,1,0\n1,0,1,0,1,0\n").unwrap();
    assert_eq!(run(&["transform", "--input", input.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn kernel_dump_grid_and_profile() {
    let out = run(&["kernel-dump", "--family", "new", "--n", "11"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "x,y,re,im");
    assert_eq!(rows.len(), 1 + 121);
    // F(0,0) = c1·α(0)² − ... for σ = (1,−1,−1): −β(0)α(0) − α(0)² + α(0)β(0) = −1
    let centre: Vec<f64> = rows[1 + 5 * 11 + 5].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((centre[2] + 1.0).abs() < 1e-12, "{centre:?}");

    let out = run(&["kernel-dump", "--homogenized", "--angles", "8"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "angle,re,im");
    assert_eq!(rows.len(), 9);
}

#[test]
fn mc_check_small_run() {
    let out = run(&["mc-check", "--system", "triangle", "--a", "0.3", "--b", "0.9", "--points", "2", "--samples", "20000"]);
    let v = json_of(&out);
    assert_eq!(out.status.code(), Some(0), "{v}");
    assert_eq!(v["points"].as_array().unwrap().len(), 2);
}

#[test]
fn thread_count_from_environment() {
    let out = bin()
        .args(["constant", "--family", "diagonal", "--b", "0.7", "--theta", "2"])
        .env("HAAR_AVERAGER_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = bin().args(["constant"]).env("HAAR_AVERAGER_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
