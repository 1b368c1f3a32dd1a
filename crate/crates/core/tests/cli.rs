use std::fs;

use contextuality::cli::{main_with_args, mixing_table};
use contextuality::io::{parse_matrix_csv, parse_matrix_json, parse_trajectory_csv};

struct Output {
    code: u8,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = main_with_args(std::iter::once("contextuality").chain(args.iter().copied()), &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

#[test]
fn verify_passes_and_reports_each_check() {
    let o = run(&["verify"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(o.stdout.lines().count(), 11);
    assert!(o.stdout.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn verify_json() {
    let o = run(&["verify", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 11);
}

#[test]
fn corrupted_square_is_an_invariant_failure() {
    let o = run(&["verify", "--corrupt-observable", "1"]);
    assert_eq!(o.code, 2);
    assert!(o.stdout.contains("FAIL  context products"));
}

#[test]
fn matrix_csv_is_24_by_24() {
    let o = run(&["matrix"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout.lines().count(), 24);
    let m = parse_matrix_csv(&o.stdout).unwrap();
    assert_eq!(m.get(0, 0), 1.0 / 6.0);
}

#[test]
fn noisy_matrix_json_has_error_block() {
    let o = run(&["matrix", "--noise", "0.9", "--format", "json"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let m = parse_matrix_json(&o.stdout).unwrap();
    assert_eq!(m.n(), 48);
    for (to, from) in [(24, 24), (47, 30), (40, 47)] {
        assert!((m.get(to, from) - 0.1 / 24.0).abs() < 1e-15);
    }
    assert!(m.column_sum_error() < 1e-12);
}

#[test]
fn out_of_range_noise_is_rejected() {
    for cmd in ["matrix", "simulate", "coupon", "mixing"] {
        let o = run(&[cmd, "--noise", "1.5"]);
        assert_eq!(o.code, 1, "{cmd}");
        assert!(o.stderr.contains("domain error"), "{cmd}: {}", o.stderr);
    }
}

#[test]
fn unknown_flag_is_a_validation_error() {
    assert_eq!(run(&["simulate", "--rondus", "5"]).code, 1);
}

#[test]
fn simulate_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = run(&[
            "simulate",
            "--rounds",
            "20000",
            "--noise",
            "0.9",
            "--seed",
            "42",
            "--quiet",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        assert!(o.stdout.is_empty());
    }
    for name in ["trajectory.csv", "report.json"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
    let records = parse_trajectory_csv(&fs::read_to_string(a.path().join("trajectory.csv")).unwrap()).unwrap();
    assert_eq!(records.len(), 20_000);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn different_seeds_differ() {
    let x = run(&["simulate", "--rounds", "5000", "--noise", "0.9", "--seed", "1"]);
    let y = run(&["simulate", "--rounds", "5000", "--noise", "0.9", "--seed", "2"]);
    assert_ne!(x.stdout, y.stdout);
}

#[test]
fn perfect_simulation_reports_six() {
    for mode in ["chain", "quantum"] {
        let o = run(&["simulate", "--rounds", "3000", "--mode", mode]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["value"], 6.0);
        assert_eq!(v["violated"], true);
        assert_eq!(v["bound"], 4.0);
    }
}

#[test]
fn burn_in_must_leave_rounds() {
    let o = run(&["simulate", "--rounds", "10", "--burn-in", "10"]);
    assert_eq!(o.code, 1);
}

#[test]
fn single_point_sweep() {
    let o = run(&["sweep", "--grid", "1.0", "--rounds", "2000"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "p,empirical,analytic,std_error,violated");
    assert!(lines[1].ends_with(",true"));
}

#[test]
fn malformed_grid_is_rejected() {
    assert_eq!(run(&["sweep", "--grid", "a:b"]).code, 1);
}

#[test]
fn mixing_crossings_respect_bound() {
    for eps in [1e-3, 1e-5, 1e-10] {
        let t = mixing_table(eps, None).unwrap();
        let bound = t.bound.unwrap();
        let crossing = t.crossing.unwrap();
        assert!(crossing as f64 <= bound.ceil());
        assert!(t.distances[crossing] <= eps);
        assert!(t.distances[crossing - 1] > eps);
    }
    let o = run(&["mixing", "--epsilon", "1e-5"]);
    assert!(o.stdout.contains("bound = 22.04"), "{}", o.stdout);
}

#[test]
fn mixing_rejects_bad_epsilon() {
    for eps in ["0", "1", "-0.1"] {
        let flag = format!("--epsilon={eps}");
        assert_eq!(run(&["mixing", &flag]).code, 1, "{eps}");
    }
}

#[test]
fn noisy_mixing_has_finite_bound() {
    let t = mixing_table(1e-3, Some(0.9)).unwrap();
    let bound = t.bound.unwrap();
    assert!(bound.is_finite());
    assert!(t.crossing.unwrap() as f64 <= bound.ceil());
}

#[test]
fn coupon_reports_statistics() {
    let o = run(&["coupon", "--trials", "1", "--seed", "3"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["completed"], 1);
    assert_eq!(v["variance"], 0.0);
    assert!(v["mean"].as_f64().unwrap() >= 24.0);
    assert!((v["analytic"].as_f64().unwrap() - 90.623).abs() < 1e-3);
    assert_eq!(run(&["coupon", "--trials", "0"]).code, 1);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"rounds": 4000, "noise": 0.9, "seed": 5}"#).unwrap();
    let path = cfg.to_str().unwrap();
    let from_file = run(&["simulate", "--config", path]);
    let explicit = run(&["simulate", "--rounds", "4000", "--noise", "0.9", "--seed", "5"]);
    assert_eq!(from_file.code, 0, "{}", from_file.stderr);
    assert_eq!(from_file.stdout, explicit.stdout);
    let overridden = run(&["simulate", "--config", path, "--noise", "1.0"]);
    let v: serde_json::Value = serde_json::from_str(&overridden.stdout).unwrap();
    assert_eq!(v["value"], 6.0);

    fs::write(&cfg, r#"{"rounds": 4000, "nosie": 0.9}"#).unwrap();
    assert_eq!(run(&["simulate", "--config", path]).code, 1);
}

#[test]
fn missing_config_is_an_io_error() {
    assert_eq!(run(&["verify", "--config", "/nonexistent/cfg.json"]).code, 3);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let target = blocker.join("matrix.csv");
    let o = run(&["matrix", "--out", target.to_str().unwrap()]);
    assert_eq!(o.code, 3, "{}", o.stderr);
}

#[test]
fn matrix_out_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("m.csv");
    let o = run(&["matrix", "--quiet", "--out", target.to_str().unwrap()]);
    assert_eq!(o.code, 0);
    let data = fs::read(&target).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(
        manifest["outputs"][0]["sha256"],
        contextuality::io::sha256_hex(&data).as_str()
    );
}
