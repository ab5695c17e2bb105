use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn umbrella() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_umbrella"));
    cmd.env_remove("UMBRELLA_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    umbrella().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn error_record(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr)
        .unwrap_or_else(|e| panic!("stderr is not a JSON record ({e}): {}", String::from_utf8_lossy(&o.stderr)))
}

struct Artifact {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    meta: Value,
}

fn run_to_file(dir: &Path, name: &str, args: &[&str]) -> (PathBuf, Artifact) {
    let path = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--output", path.to_str().unwrap()]);
    let out = run(&full);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    let meta_path = PathBuf::from(format!("{}.meta.json", path.display()));
    let meta = serde_json::from_str(&std::fs::read_to_string(meta_path).unwrap()).unwrap();
    (path, Artifact { header, rows, meta })
}

fn column(a: &Artifact, name: &str) -> Vec<f64> {
    let i = a.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    a.rows.iter().map(|r| r[i].parse::<f64>().unwrap()).collect()
}

fn check_artifact(a: &Artifact, expected: &[&str]) {
    assert_eq!(a.header, expected);
    assert_eq!(a.meta["rows"].as_u64().unwrap() as usize, a.rows.len());
    assert_eq!(a.meta["columns"], serde_json::json!(expected));
    assert!(a.meta["timings"]["compute_seconds"].as_f64().unwrap() >= 0.0);
    for row in &a.rows {
        assert_eq!(row.len(), expected.len());
        for cell in row {
            if let Ok(x) = cell.parse::<f64>() {
                if x.is_finite() && cell.contains('e') {
                    assert_eq!(format!("{x:.16e}"), *cell, "lossy number {cell}");
                }
            }
        }
    }
}

#[test]
fn verdict_of_unstable_quartic() {
    let out = run(&["verdict", "--a1", "1", "--a2", "3", "--a3", "1", "--a4", "6"]);
    assert!(out.status.success());
    let s = stdout(&out);
    assert!(s.lines().next() == Some("Unstable"), "{s}");
    assert!(s.contains("right_count=2"), "{s}");
}

#[test]
fn ziegler_undamped_load() {
    let out = run(&["ziegler", "--b", "0"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("2.0857864"), "{}", stdout(&out));
}

#[test]
fn umbrella_sample_rows_and_residuals() {
    let dir = TempDir::new().unwrap();
    let (_, a) = run_to_file(dir.path(), "umbrella.csv", &["umbrella-sample", "--grid", "100"]);
    check_artifact(&a, &["x1", "x2", "y1", "y2", "y3", "a1", "a2", "a3", "residual"]);
    assert_eq!(a.rows.len(), 10_000);
    assert!(column(&a, "residual").iter().all(|&r| r <= 1e-12));
}

#[test]
fn every_table_reads_back() {
    let dir = TempDir::new().unwrap();
    let cases: &[(&[&str], &[&str])] = &[
        (
            &["verdict", "--a1", "1", "--a2", "3", "--a3", "1", "--a4", "6"],
            &["a1", "a2", "a3", "a4", "label", "left_count", "imag_count", "right_count", "boundary_resolved"],
        ),
        (
            &["verdict", "--samples", "500", "--seed", "7"],
            &["samples", "compared", "skipped_near_boundary", "disagreements"],
        ),
        (
            &["bottema-limit", "--deltas", "0.1,0.01"],
            &["delta", "nu_undamped", "nu_damped_limit", "nu_damped_approx", "nu_bisected"],
        ),
        (&["ziegler", "--b", "0:0.2:3"], &["b", "p_cr_analytic", "p_cr_bisected"]),
        (
            &["hulten", "--eta1", "0.01,0.03", "--eta2", "0.02"],
            &["omega1", "omega2", "eta1", "eta2", "mu_undamped", "mu_critical"],
        ),
        (&["gyro-spectrum", "--omegas", "0,1,2"], &["omega", "index", "re", "im", "pairing_error"]),
        (
            &["gyro-spectrum", "--collision", "--omegas", "0.5,6"],
            &["omega0", "freq0", "mu_squared", "d1", "n1", "gamma_star", "chain_residual"],
        ),
        (&["gyro-umbrella", "--gammas", "1.5,2"], &["delta", "nu", "omega_cr_analytic", "omega_cr_bisected"]),
        (
            &["maxwell-bloch", "--omegas", "-2:2:5", "--nus", "-1:1:5"],
            &[
                "omega",
                "delta",
                "nu",
                "kappa",
                "label",
                "left_count",
                "imag_count",
                "right_count",
                "boundary_resolved",
                "stable_closed_form",
            ],
        ),
        (&["floquet", "--points", "7"], &["eta", "max_modulus", "stable", "eta_b_analytic_lo", "eta_b_analytic_hi"]),
        (&["beck", "--d1", "0.0001", "--d2", "0,0.25"], &["d1", "d2", "q_cr_numeric", "q_cr_be12"]),
        (&["baroclinic", "--alphas", "0.2:1.2:6"], &["alpha", "U_cI", "U_cR"]),
        (&["baroclinic", "--shears", "0:0.3:7", "--r", "0.01"], &["U", "re_c1", "im_c1", "re_c2", "im_c2"]),
        (
            &["sweep", "--system", "hulten", "--axis", "mu=0:0.3:4", "--axis", "eta1=0:0.1:3", "--set", "eta2=0.05"],
            &["mu", "eta1", "label", "left_count", "imag_count", "right_count", "boundary_resolved"],
        ),
    ];
    for (i, (args, columns)) in cases.iter().enumerate() {
        let (_, a) = run_to_file(dir.path(), &format!("t{i}.csv"), args);
        check_artifact(&a, columns);
        assert!(!a.rows.is_empty(), "{args:?}");
        assert_eq!(a.meta["command"]["subcommand"], args[0]);
    }
}

#[test]
fn floquet_table_matches_resonance() {
    let dir = TempDir::new().unwrap();
    let (_, a) = run_to_file(dir.path(), "f.csv", &["floquet", "--alpha", "1", "--eps", "0.05", "--points", "5"]);
    let stable: Vec<&str> = a.rows.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(stable, ["true", "true", "false", "true", "true"]);
    let lo = column(&a, "eta_b_analytic_lo")[0];
    assert!((lo - 2f64.sqrt() * 0.95).abs() < 1e-12);
    let (_, d) = run_to_file(dir.path(), "g.csv", &["floquet", "--kappa", "0.5", "--points", "2"]);
    let width = 0.05 * (2.0f64 - 0.125).sqrt();
    assert!((column(&d, "eta_b_analytic_hi")[0] - 2f64.sqrt() * (1.0 + width)).abs() < 1e-12);
}

#[test]
fn lifted_tongue_leaves_bounds_empty() {
    let dir = TempDir::new().unwrap();
    let (_, a) = run_to_file(dir.path(), "f.csv", &["floquet", "--kappa", "3", "--points", "3"]);
    assert!(a.rows.iter().all(|r| r[3].is_empty() && r[4].is_empty() && r[2] == "true"));
}

#[test]
fn json_output_has_columns_and_rows() {
    let out = run(&["ziegler", "--b", "0,0.1", "--format", "json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["columns"], serde_json::json!(["b", "p_cr_analytic", "p_cr_bisected"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!((rows[1][1].as_f64().unwrap() - (41.0 / 28.0 + 0.005)).abs() < 1e-12);
}

#[test]
fn sidecar_reruns_to_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let (path, a) = run_to_file(
        dir.path(),
        "sweep.csv",
        &["sweep", "--system", "ziegler", "--axis", "b=0:0.5:21", "--axis", "p=0:3:31"],
    );
    let argv: Vec<String> =
        a.meta["argv"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    let again = dir.path().join("again.csv");
    let replayed: Vec<String> = argv[1..]
        .iter()
        .map(|s| if s == path.to_str().unwrap() { again.to_str().unwrap().to_string() } else { s.clone() })
        .collect();
    let out = umbrella().args(&replayed).env("UMBRELLA_THREADS", "1").output().unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["maxwell-bloch", "--omegas", "-3:3:31", "--nus", "-2:2:31", "--kappa", "0.5"];
    let one = umbrella().args(args).env("UMBRELLA_THREADS", "1").output().unwrap();
    let four = umbrella().args(args).env("UMBRELLA_THREADS", "4").output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn parse_errors_exit_two() {
    for args in [
        &["verdict", "--a1", "1"][..],
        &["no-such-command"],
        &["ziegler", "--b", "x"],
        &["sweep", "--system", "quartic", "--axis", "a9=0:1:3"],
        &["sweep", "--system", "ziegler", "--axis", "b=0:1:3", "--set", "b=1"],
        &["umbrella-sample", "--band", "-1"],
        &["floquet", "--unknown-key", "1"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let rec = error_record(&out);
        assert_eq!(rec["kind"], "config");
        assert_eq!(rec["exit_code"], 2);
    }
    let out = umbrella().args(["ziegler"]).env("UMBRELLA_THREADS", "0").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn computation_errors_exit_one() {
    for args in [
        &["ziegler", "--b", "-1"][..],
        &["bottema-limit", "--d11", "-1", "--d22", "0"],
        &["gyro-umbrella", "--k11", "1", "--k22", "4"],
        &["beck", "--n-modes", "3"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(error_record(&out)["kind"], "computation");
    }
}
