use std::fs;
use std::process::{Command, Output};

fn schwinger(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schwinger")).args(args).env_remove("SCHWINGER_OUT_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn selftest_prints_table() {
    let o = schwinger(&["selftest"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert!(lines.len() >= 18, "{text}");
    assert!(text.contains("even_shell_sum") && text.contains("fcs_brute_force_12"));
    let failed = lines.iter().any(|l| l.starts_with("FAIL"));
    assert_eq!(o.status.code(), Some(if failed { 1 } else { 0 }));
}

#[test]
fn missing_flag_is_a_validation_error() {
    let o = schwinger(&["verify-ising", "--W", "1", "--am", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--L"), "{}", stderr(&o));
}

#[test]
fn bad_value_is_a_validation_error() {
    let o = schwinger(&["verify-ising", "--L", "0", "--W", "1", "--am", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_ising_example() {
    let o = schwinger(&["verify-ising", "--L", "3", "--W", "2", "--am", "0.7", "--aq", "1.3", "--theta", "0.9"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["result"]["max_abs_deviation"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["command"], "verify-ising");
}

#[test]
fn config_keys_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"L": 2, "W": 1, "am": 0.5, "bogus": 1}"#).unwrap();
    let o = schwinger(&["verify-ising", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"));

    fs::write(&cfg, r#"{"L": 2, "W": 1, "am": 0.5}"#).unwrap();
    let o = schwinger(&["verify-ising", "--config", cfg.to_str().unwrap(), "--W", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["params"]["lattice"]["cutoff"], 2);
    assert_eq!(v["params"]["lattice"]["size"], 2);
}

#[test]
fn output_is_independent_of_thread_count() {
    let run = |threads: &str| {
        let o = schwinger(&["--threads", threads, "ground", "--L", "5", "--W", "2", "--am", "0.3", "--levels", "2"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        o.stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn files_land_in_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = schwinger(&["bounds", "--am", "1", "--L", "20", "--mode", "ground", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "W,empirical,bound");
    assert!(csv.starts_with("# "));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("bounds.json")).unwrap()).unwrap();
    assert_eq!(json["command"], "bounds");

    let env_dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_schwinger"))
        .args(["resources", "--epsilon", "0.01", "--mode", "T0"])
        .env("SCHWINGER_OUT_DIR", env_dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(env_dir.path().join("resources.json").exists());
}

#[test]
fn quench_csv_has_bond_columns() {
    let o = schwinger(&[
        "quench", "--kind", "string", "--d", "4", "--L", "4", "--W", "2", "--am", "0.5", "--t-final", "1", "--dt", "0.5",
        "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    let want: Vec<String> = std::iter::once("t".to_string()).chain((0..7).map(|k| format!("bond_{k}"))).collect();
    assert_eq!(header, want.join(","));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn quench_outside_sector_is_rejected() {
    let o = schwinger(&["quench", "--kind", "string", "--d", "4", "--L", "4", "--W", "0", "--am", "0.5", "--t-final", "1", "--dt", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}
