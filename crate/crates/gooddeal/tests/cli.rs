//! End-to-end tests of the `gooddeal` binary: exit codes, determinism of
//! written reports, format and flag handling.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gooddeal"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn value_report_is_deterministic_and_carries_provenance() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let first = run(&["value", "--out", a.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&first.stderr));
    let second = run(&["value", "--out", b.to_str().unwrap()]);
    assert_eq!(second.status.code(), Some(0));

    let (bytes_a, bytes_b) = (read(&a, "value.csv"), read(&b, "value.csv"));
    assert_eq!(bytes_a, bytes_b, "reruns must be byte-identical");

    let text = String::from_utf8(bytes_a).expect("utf-8 csv");
    let mut lines = text.split("\r\n");
    let provenance = lines.next().expect("provenance line");
    assert!(provenance.starts_with("# gooddeal "), "got: {provenance}");
    assert!(provenance.contains("config_sha256="), "got: {provenance}");
    let header = lines.next().expect("header line");
    assert!(header.starts_with("method,pi_u_0,"), "got: {header}");
}

#[test]
fn json_format_parses_and_echoes_the_config_hash() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out = tmp.path().join("j");
    let result = run(&["value", "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_slice(&read(&out, "value.json")).expect("valid json");
    assert_eq!(doc["tool"], "gooddeal");
    assert_eq!(doc["table"], "value");
    let sha = doc["config_sha256"].as_str().expect("hash field");
    assert_eq!(sha.len(), 64);
    let columns = doc["columns"].as_array().expect("columns");
    let rows = doc["rows"].as_array().expect("rows");
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].as_array().expect("row").len(), columns.len());
}

#[test]
fn malformed_config_exits_2() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let config = tmp.path().join("bad.cfg");
    std::fs::write(&config, "numerics.bogus = 3\n").expect("write config");
    let result = run(&["--config", config.to_str().unwrap(), "value"]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("error:"));
}

#[test]
fn invalid_scenario_exits_2() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let config = tmp.path().join("rho.cfg");
    std::fs::write(&config, "put.rho = 1.5\n").expect("write config");
    let result = run(&["--config", config.to_str().unwrap(), "value"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn unknown_sweep_parameter_exits_2() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let result = run(&["--out", tmp.path().to_str().unwrap(), "sweep", "kappa"]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("kappa"));
}

#[test]
fn check_passes_honestly_and_rejects_a_tampered_hedge() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let config = tmp.path().join("light.cfg");
    // Light but statistically sufficient battery (matches the unit-tested
    // cell size that resolves a doubled hedge at three standard errors).
    std::fs::write(
        &config,
        "numerics.n_paths = 6000\nnumerics.n_steps = 32\nnumerics.seed = 101\n",
    )
    .expect("write config");
    let honest = run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        tmp.path().join("honest").to_str().unwrap(),
        "--grid",
        "200x200",
        "check",
    ]);
    assert_eq!(
        honest.status.code(),
        Some(0),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&honest.stdout),
        String::from_utf8_lossy(&honest.stderr)
    );

    let tampered_config = tmp.path().join("tampered.cfg");
    std::fs::write(
        &tampered_config,
        "numerics.n_paths = 6000\nnumerics.n_steps = 32\nnumerics.seed = 101\n\
         numerics.hedge_multiplier = 2.0\n",
    )
    .expect("write config");
    let tampered = run(&[
        "--config",
        tampered_config.to_str().unwrap(),
        "--out",
        tmp.path().join("tampered").to_str().unwrap(),
        "--grid",
        "200x200",
        "check",
    ]);
    assert_eq!(tampered.status.code(), Some(1), "a doubled hedge must fail the battery");
    let stdout = String::from_utf8_lossy(&tampered.stdout);
    assert!(stdout.contains("supermartingale: fail"), "stdout: {stdout}");
}

#[test]
fn simulate_depends_on_the_seed_only() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let dirs = ["s1", "s2", "s3"];
    for (dir, seed) in dirs.iter().zip(["9", "9", "10"]) {
        let result = run(&[
            "--out",
            tmp.path().join(dir).to_str().unwrap(),
            "--paths",
            "4096",
            "--seed",
            seed,
            "simulate",
        ]);
        assert_eq!(result.status.code(), Some(0));
    }
    let (one, two, three) = (
        read(&tmp.path().join("s1"), "tracking.csv"),
        read(&tmp.path().join("s2"), "tracking.csv"),
        read(&tmp.path().join("s3"), "tracking.csv"),
    );
    assert_eq!(one, two, "same seed must reproduce the report bitwise");
    assert_ne!(one, three, "a different seed must change the sample");
}

#[test]
fn pde_grid_override_shapes_the_table() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let result = run(&[
        "--out",
        tmp.path().to_str().unwrap(),
        "--grid",
        "50x40",
        "pde",
    ]);
    assert_eq!(result.status.code(), Some(0));
    let text = String::from_utf8(read(tmp.path(), "pde.csv")).expect("utf-8 csv");
    // Provenance + header + one row per (time, space) node, CRLF-terminated.
    let rows = text.trim_end().split("\r\n").count();
    assert_eq!(rows, 2 + 50 * 40);
}

#[test]
fn hedge_accepts_time_and_level_flags() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let result = run(&[
        "--out",
        tmp.path().to_str().unwrap(),
        "hedge",
        "--time",
        "0.25",
        "--level",
        "90",
    ]);
    assert_eq!(result.status.code(), Some(0));
    let text = String::from_utf8(read(tmp.path(), "hedge.csv")).expect("utf-8 csv");
    let data = text.split("\r\n").nth(2).expect("data row");
    assert!(data.starts_with("0.25,90,"), "got: {data}");
}
