//! End-to-end tests of the `avoider` binary: command output, exit
//! codes, artifact determinism, and config-file round-trips.

use std::path::Path;
use std::process::{Command, Output};

fn avoider(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avoider"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn lemma41_reports_exact_and_asymptotic() {
    let out = avoider(&[
        "lemma41",
        "--alpha",
        "sqrt2@1e-12",
        "--beta",
        "1",
        "--eps",
        "1/10",
        "--window",
        "0:10000",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["command"], "lemma41");
    assert!(v["exact"].is_string());
    assert!(v["asymptotic"].is_string());
    let rel = v["relative_error_approx"].as_f64().unwrap();
    assert!(rel < 0.02, "relative error {rel}");
    assert_eq!(v["approximate_inputs"][0]["field"], "alpha");
}

#[test]
fn verify_large_pass_and_fail_exit_codes() {
    let ok = avoider(&[
        "verify-large",
        "--kind",
        "power_strip",
        "--b",
        "2",
        "--eps",
        "1/4",
        "--window",
        "0:50",
    ]);
    let v = stdout_json(&ok);
    assert_eq!(v["min_measure"], "1/4");
    assert_eq!(v["pass"], true);

    // an unreachable override target must fail with exit code 1
    let fail = avoider(&[
        "verify-large",
        "--kind",
        "power_strip",
        "--b",
        "2",
        "--eps",
        "1/4",
        "--window",
        "0:50",
        "--target",
        "9/10",
    ]);
    assert_eq!(fail.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&fail.stdout).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn usage_errors_exit_two() {
    let out = avoider(&["verify-large", "--kind", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    let out = avoider(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    // schema violation in a sequence spec reports the field path
    let out = avoider(&[
        "orbit",
        "--sequence",
        r#"{"kind":"geometric","b":"not-a-number"}"#,
        "--x",
        "1/3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("b"));
}

#[test]
fn precision_shortfall_exits_three() {
    // the sieve holds no 100th prime below 10
    let out = avoider(&[
        "orbit",
        "--sequence",
        r#"{"kind":"prime_power","exponents":["1/2"],"coeffs":["1"],"sieve_limit":10}"#,
        "--x",
        "1/3",
        "--n",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sieve"), "stderr: {err}");
}

#[test]
fn construct_artifact_is_deterministic_and_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("intervals.json");
    let run = |path: &Path| {
        let out = avoider(&[
            "construct",
            "--kind",
            "lemma2",
            "--epsilon",
            "1/2",
            "--y",
            "golden@1e-12",
            "--emit",
            path.to_str().unwrap(),
            "--window",
            "-10:10",
        ]);
        let stdout = out.stdout.clone();
        (stdout_json(&out), stdout)
    };
    let (v1, s1) = run(&path);
    let b1 = std::fs::read(&path).unwrap();
    let (v2, s2) = run(&path);
    let b2 = std::fs::read(&path).unwrap();
    assert_eq!(v1, v2);
    assert_eq!(s1, s2, "reports must be byte-identical");
    assert_eq!(b1, b2, "artifacts must be byte-identical");

    // quadruple wire format with exact strings
    let set: serde_json::Value = serde_json::from_slice(&b1).unwrap();
    let first = set.as_array().unwrap().first().unwrap();
    assert_eq!(first.as_array().unwrap().len(), 4);
    assert_eq!(v1["descriptor"]["kind"], "lemma2");
}

#[test]
fn scan_csv_has_header_and_hash() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let out = avoider(&[
        "scan",
        "--kind",
        "power_strip",
        "--b",
        "2",
        "--eps",
        "1/4",
        "--sequence",
        r#"{"kind":"integer_power","b":2}"#,
        "--x-grid",
        "1/3:1/3:6",
        "--t-grid",
        "0:1/4:4",
        "--depth",
        "100",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["cells"], 24);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let comment = lines.next().unwrap();
    assert!(comment.starts_with("# config_hash="));
    assert_eq!(lines.next().unwrap(), "x,t,witness_index");
    assert_eq!(text.lines().count(), 2 + 24);
    // the comment hash matches the report hash
    assert_eq!(
        comment.trim_start_matches("# config_hash="),
        v["config_hash"].as_str().unwrap()
    );
}

#[test]
fn probe_and_dim_est_pipeline() {
    let out = avoider(&[
        "probe",
        "--sequence",
        r#"{"kind":"integer_power","b":2}"#,
        "--delta",
        "1/2",
        "--n",
        "500",
        "--grid",
        "0:1/64:65",
    ]);
    let v = stdout_json(&out);
    let hits = v["hit_count"].as_u64().unwrap();
    assert!(hits >= 2, "at least the trivial dilations 0 and 1");

    let out = avoider(&[
        "dim-est",
        "--sequence",
        r#"{"kind":"integer_power","b":2}"#,
        "--delta",
        "1/2",
        "--n",
        "500",
        "--grid",
        "0:1/64:65",
        "--scales",
        "1/4,1/8,1/16,1/32,1/64",
    ]);
    let v = stdout_json(&out);
    assert!(v["slope"].as_f64().unwrap() >= 0.0);
    assert_eq!(v["counts"].as_array().unwrap().len(), 5);
}

#[test]
fn orbit_density_and_chung_erdos() {
    let out = avoider(&[
        "orbit",
        "--sequence",
        r#"{"kind":"polynomial","coeffs":["0","1"]}"#,
        "--x",
        "golden@1e-9",
        "--n",
        "1000",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["n_terms"], 1000);
    let gap = v["max_gap"].as_str().unwrap();
    assert!(gap.contains('/'));

    let out = avoider(&[
        "density",
        "--sequence",
        r#"{"kind":"block","f":"double_exponential"}"#,
        "--n",
        "3",
        "--h-range",
        "0:300",
        "--max-terms",
        "10",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["ratio"], "1");
    assert_eq!(v["best_offset"], "256");

    let out = avoider(&[
        "chung-erdos",
        "--mus",
        "golden@1e-6,sqrt2@1e-6,sqrt3@1e-6",
        "--eps",
        "1/10",
        "--window",
        "0:2000",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["holds"], true);
}

#[test]
fn config_file_runs_identically_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(
        &cfg,
        r#"{
            "command": "lemma41",
            "alpha": "sqrt2@1e-12",
            "beta": "1",
            "eps": "1/10",
            "window": "0:1000"
        }"#,
    )
    .unwrap();
    let from_file = avoider(&["run", "--config", cfg.to_str().unwrap()]);
    let top_level = avoider(&["--config", cfg.to_str().unwrap()]);
    let from_flags = avoider(&[
        "lemma41",
        "--alpha",
        "sqrt2@1e-12",
        "--beta",
        "1",
        "--eps",
        "1/10",
        "--window",
        "0:1000",
    ]);
    assert_eq!(from_file.stdout, from_flags.stdout, "byte-identical reports");
    assert_eq!(top_level.stdout, from_flags.stdout, "byte-identical reports");

    // missing both forms is a usage error
    let none = avoider(&[]);
    assert_eq!(none.status.code(), Some(2));
}

#[test]
fn witness_certification_and_precision_exit() {
    // exact inputs: witness certified
    let out = avoider(&[
        "witness",
        "--kind",
        "power_strip",
        "--b",
        "2",
        "--eps",
        "1/4",
        "--sequence",
        r#"{"kind":"integer_power","b":2}"#,
        "--x",
        "1/3",
        "--t",
        "0",
        "--depth",
        "100",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["witness_index"], 1);
    assert_eq!(v["certified"], true);
    assert_eq!(v["upgrade"]["verdict"], "escapes_infinitely_often");

    // a coarse approximant (golden@1e-2 = 13/8, error 1/104) against a
    // strip whose boundary sits 1/1000 below the witness point: the
    // propagated error 4/104 swamps the 1/1000 margin -> exit 3
    let out = avoider(&[
        "witness",
        "--kind",
        "power_strip",
        "--b",
        "2",
        "--eps",
        "1/1000",
        "--sequence",
        r#"{"kind":"integer_power","b":2}"#,
        "--x",
        "golden@1e-2",
        "--t",
        "0",
        "--depth",
        "12",
    ]);
    assert_eq!(out.status.code(), Some(3), "uncertified witness must exit 3");
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["certified"], false);
    assert_eq!(v["witness_index"], 2);
    assert_eq!(v["margin"], "1/1000");
}
