//! End-to-end tests of the binary: worked examples, exit-code contract,
//! exact CSV headers, and seed determinism across worker counts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pacbayes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pacbayes"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

#[test]
fn compute_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "compute.json",
        r#"{"emp_gibbs_risk": 0.1, "kl_div": 0.5, "n": 101, "delta": 0.05,
            "bound": {"kind": "pac_bayes_chernoff",
                      "psi": {"kind": "subgaussian", "sigma2": 0.25}}}"#,
    );
    let json = stdout_json(&pacbayes(&["bound", "compute", "--config", &config]));
    let value = json["report"]["value"].as_f64().unwrap();
    assert!((value - 0.3013808927181927).abs() < 1e-6, "value {value}");
    // Config echo for provenance.
    assert_eq!(json["config"]["n"], 101);
}

#[test]
fn compare_emits_one_report_per_kind() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "compare.json",
        r#"{"emp_gibbs_risk": 0.1, "kl_div": 0.0, "n": 101, "delta": 0.05,
            "bounds": [{"kind": "mcallester"}, {"kind": "seeger"},
                       {"kind": "chernoff_binary_kl"}]}"#,
    );
    let json = stdout_json(&pacbayes(&["bound", "compare", "--config", &config]));
    let reports = json["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    assert_eq!(reports[0]["kind"], "mcallester");
    assert_eq!(reports[2]["kind"], "chernoff_binary_kl");
}

#[test]
fn missing_delta_exits_2_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "missing.json",
        r#"{"emp_gibbs_risk": 0.1, "kl_div": 0.5, "n": 101,
            "bound": {"kind": "mcallester"}}"#,
    );
    let out = pacbayes(&["bound", "compute", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("delta"), "stderr: {stderr}");
}

#[test]
fn malformed_json_exits_2_with_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "broken.json", "{\n  \"emp_gibbs_risk\": 0.1,,\n}");
    let out = pacbayes(&["bound", "compute", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
    assert!(stderr.contains("column"), "stderr: {stderr}");
}

#[test]
fn domain_error_exits_3_naming_the_offender() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "bad_delta.json",
        r#"{"emp_gibbs_risk": 0.1, "kl_div": 0.5, "n": 101, "delta": 1.5,
            "bound": {"kind": "mcallester"}}"#,
    );
    let out = pacbayes(&["bound", "compute", "--config", &config]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta"));
}

#[test]
fn posterior_optimize_fixed_lambda_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let class = write(
        dir.path(),
        "class.json",
        r#"{"n": 2, "models": [
            {"emp_risk": 0.2, "prior": 0.5, "psi": {"kind": "subgaussian", "sigma2": 0.2}},
            {"emp_risk": 0.4, "prior": 0.5, "psi": {"kind": "subgaussian", "sigma2": 0.0}}]}"#,
    );
    let json = stdout_json(&pacbayes(&[
        "posterior",
        "optimize",
        "--class",
        &class,
        "--delta",
        "0.05",
        "--fixed-lambda",
        "1.0",
    ]));
    let w = json["weights"].as_array().unwrap();
    assert!((w[0].as_f64().unwrap() - 0.524979).abs() < 1e-6);
    assert!((w[1].as_f64().unwrap() - 0.475021).abs() < 1e-6);
    assert_eq!(json["map_index"], 0);
}

#[test]
fn single_model_class_returns_point_mass() {
    let dir = tempfile::tempdir().unwrap();
    let class = write(
        dir.path(),
        "single.json",
        r#"{"n": 101, "models": [
            {"emp_risk": 0.3, "prior": 1.0, "psi": {"kind": "subgaussian", "sigma2": 0.25}}]}"#,
    );
    let json = stdout_json(&pacbayes(&[
        "posterior", "optimize", "--class", &class, "--delta", "0.05",
    ]));
    assert_eq!(json["weights"].as_array().unwrap().len(), 1);
    assert_eq!(json["weights"][0], 1.0);
}

#[test]
fn non_simplex_prior_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let class = write(
        dir.path(),
        "bad_prior.json",
        r#"{"n": 101, "models": [
            {"emp_risk": 0.3, "prior": 0.7, "psi": {"kind": "subgaussian", "sigma2": 0.25}},
            {"emp_risk": 0.1, "prior": 0.7, "psi": {"kind": "subgaussian", "sigma2": 0.25}}]}"#,
    );
    let out = pacbayes(&[
        "posterior", "optimize", "--class", &class, "--delta", "0.05",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

fn coverage_config(dir: &Path) -> String {
    write(
        dir,
        "coverage.json",
        r#"{"environment": {"kind": "bernoulli", "ps": [0.1, 0.3, 0.5]},
            "bound": "chernoff_binary_kl",
            "posterior_rule": {"rule": "gibbs", "beta": 50.0},
            "n": 60, "delta": 0.05, "trials": 300, "seed": 7}"#,
    )
}

#[test]
fn coverage_writes_exact_csv_header_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = coverage_config(dir.path());
    let out_base = dir.path().join("cov");
    let json = stdout_json(&pacbayes(&[
        "validate",
        "coverage",
        "--config",
        &config,
        "--out",
        out_base.to_str().unwrap(),
    ]));
    assert_eq!(json["passed"], true);
    assert_eq!(json["trials"], 300);

    let csv = fs::read_to_string(dir.path().join("cov.csv")).unwrap();
    assert!(csv.starts_with("trial_id,bound,gibbs_true_risk,gibbs_emp_risk,violated\n"));
    assert_eq!(csv.lines().count(), 301);
    let summary = fs::read_to_string(dir.path().join("cov.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(parsed["config"]["seed"], 7);
}

#[test]
fn coverage_is_byte_identical_across_worker_counts_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let config = coverage_config(dir.path());
    let mut bodies = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "8"), ("c", "1")] {
        let base = dir.path().join(name);
        let out = pacbayes(&[
            "validate",
            "coverage",
            "--config",
            &config,
            "--workers",
            workers,
            "--out",
            base.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        bodies.push(fs::read(dir.path().join(format!("{name}.csv"))).unwrap());
    }
    assert_eq!(bodies[0], bodies[1], "1 vs 8 workers");
    assert_eq!(bodies[0], bodies[2], "rerun with the same seed");
}

#[test]
fn seed_flag_overrides_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = coverage_config(dir.path());
    let a = stdout_json(&pacbayes(&[
        "validate", "coverage", "--config", &config, "--seed", "123",
    ]));
    let b = stdout_json(&pacbayes(&[
        "validate", "coverage", "--config", &config, "--seed", "123",
    ]));
    assert_eq!(a, b);
    assert_eq!(a["config"]["seed"], 123);
}

#[test]
fn lemma2_zero_threshold_row_is_total_mass() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "lemma2.json",
        r#"{"environment": {"kind": "bernoulli", "ps": [0.5]},
            "model_index": 0, "n": 50, "c_grid": [0.0, 1.0], "trials": 2000, "seed": 4}"#,
    );
    let json = stdout_json(&pacbayes(&["validate", "lemma2", "--config", &config]));
    assert_eq!(json["dominated"], true);
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows[0]["c"], 0.0);
    assert_eq!(rows[0]["survival"], 1.0);
    assert_eq!(rows[0]["exponential_bound"], 1.0);
}

#[test]
fn expmoment_rejects_m_at_n_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "expmoment.json",
        r#"{"environment": {"kind": "bernoulli", "ps": [0.3]},
            "model_index": 0, "n": 60, "m": 60, "trials": 100, "seed": 4}"#,
    );
    let out = pacbayes(&["validate", "expmoment", "--config", &config]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains('m'));
}

#[test]
fn cgf_estimate_two_sample_file() {
    let dir = tempfile::tempdir().unwrap();
    let samples = write(dir.path(), "losses.csv", "loss\n0\n1\n");
    let out = pacbayes(&[
        "cgf",
        "estimate",
        "--samples",
        &samples,
        "--lambda-grid",
        "0:1:0.5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,cgf"));
    let last = lines.last().unwrap();
    let cgf_at_one: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((cgf_at_one - 0.120114507).abs() < 1e-6, "row: {last}");
}

#[test]
fn cgf_estimate_constant_losses_give_zero_curve() {
    let dir = tempfile::tempdir().unwrap();
    let samples = write(dir.path(), "const.csv", "0.3\n0.3\n0.3\n");
    let out = pacbayes(&[
        "cgf",
        "estimate",
        "--samples",
        &samples,
        "--lambda-grid",
        "0:2:0.25",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for line in text.lines().skip(1) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, 0.0, "line: {line}");
    }
}

#[test]
fn cgf_estimate_unreadable_csv_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let samples = write(dir.path(), "garbage.csv", "0.5\nwat\n1.0\n");
    let out = pacbayes(&["cgf", "estimate", "--samples", &samples]);
    assert_eq!(out.status.code(), Some(2));
    let missing = pacbayes(&["cgf", "estimate", "--samples", "/nonexistent/file.csv"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn cgf_logsobolev_reports_the_variance_gradient_limit() {
    let dir = tempfile::tempdir().unwrap();
    let d = 3.58_f64.sqrt();
    let samples = write(
        dir.path(),
        "pairs.csv",
        &format!("loss,grad_norm2\n{},839\n{},839\n", 2.0 - d, 2.0 + d),
    );
    let json = stdout_json(&pacbayes(&["cgf", "logsobolev", "--samples", &samples]));
    let limit = json["limit"].as_f64().unwrap();
    assert!((limit - 0.0042669845).abs() < 1e-6, "limit {limit}");
    let c = json["empirical_c"].as_f64().unwrap();
    assert!(c > 0.0 && c < 0.005, "C {c}");
    assert_eq!(json["assumption_failure"], false);
}
