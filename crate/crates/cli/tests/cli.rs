use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn needlekit(args: &[&str], out: &Path, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_needlekit"));
    cmd.args(args).arg("--out").arg(out);
    match threads {
        Some(n) => cmd.env("NEEDLEKIT_THREADS", n),
        None => cmd.env_remove("NEEDLEKIT_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn cheeger_of_log_linear_is_its_slope() {
    let dir = TempDir::new().unwrap();
    let o = needlekit(&["cheeger", "--model", r#"{"kind":"log_linear","h":1}"#, "--svg"], dir.path(), None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("cheeger.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[0][1], "true");
    assert_eq!(rows[0][2], "-inf");
    let curve = csv_rows(&dir.path().join("cheeger_curve.csv"));
    assert!(curve.iter().all(|r| (r[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12));
    assert!(fs::read_to_string(dir.path().join("cheeger_curve.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn verify_iso_is_deterministic_across_runs_and_threads() {
    let args = ["verify-iso", "--trials", "1000", "--seed", "7"];
    let mut outputs = Vec::new();
    for threads in [None, Some("1"), Some("4")] {
        let dir = TempDir::new().unwrap();
        let o = needlekit(&args, dir.path(), threads);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(dir.path().join("iso.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let dir = TempDir::new().unwrap();
    needlekit(&["verify-iso", "--trials", "1000", "--seed", "8"], dir.path(), None);
    assert_ne!(fs::read(dir.path().join("iso.csv")).unwrap(), outputs[0]);
}

#[test]
fn needles_on_product_strip_are_its_rows() {
    let dir = TempDir::new().unwrap();
    let model = r#"{"kind":"product_strip","h":1,"n_rows":5,"n_cols":60,"spacing":0.1}"#;
    let o = needlekit(&["needles", "--model", model], dir.path(), None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("needles.csv"));
    let mut ids: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    ids.dedup();
    assert_eq!(ids.len(), 5);
    assert_eq!(rows.len(), 300);
    let summary = csv_rows(&dir.path().join("needle_summary.csv"));
    assert!(summary.iter().all(|r| !r[7].is_empty()), "every needle is a strip row");
    let flow = csv_rows(&dir.path().join("flow.csv"));
    assert!(!flow.is_empty());
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("needles.json")).unwrap()).unwrap();
    assert_eq!(json["rows_matched"], 5);
}

#[test]
fn malformed_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"domain": [0, 1], "breakpoints": [0.5], "values": []}"#).unwrap();
    let o = needlekit(&["entropy", "--space", bad.to_str().unwrap()], dir.path(), None);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));

    let o = needlekit(&["cheeger", "--model", r#"{"kind":"sphere"}"#], dir.path(), None);
    assert_eq!(code(&o), 2);
    // Finite-mass space has no Cheeger constant in this sense.
    let o = needlekit(&["cheeger", "--model", r#"{"kind":"tent","a":1,"b":1}"#], dir.path(), None);
    assert_eq!(code(&o), 2);
    let o = needlekit(&["verify-iso", "--trials", "3"], dir.path(), Some("zero"));
    assert_eq!(code(&o), 2);
    let o = needlekit(&["needles", "--space", data("square.json").to_str().unwrap()], dir.path(), None);
    assert_eq!(code(&o), 2);
    assert!(!dir.path().join("counterexample.json").exists());
}

#[test]
fn failed_expectation_writes_a_replayable_counterexample() {
    let dir = TempDir::new().unwrap();
    let model = r#"{"kind":"product_strip","h":1,"n_rows":4,"n_cols":60,"spacing":0.1}"#;
    let o = needlekit(&["split-detect", "--model", model, "--expect", "split"], dir.path(), None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!dir.path().join("counterexample.json").exists());

    let o = needlekit(&["split-detect", "--model", model, "--wedge", "0.5", "--expect", "split"], dir.path(), None);
    assert_eq!(code(&o), 1);
    let cx = dir.path().join("counterexample.json");
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&cx).unwrap()).unwrap();
    assert_eq!(json["check"], "split");
    assert_eq!(json["observed"]["splits"], false);

    let replay = TempDir::new().unwrap();
    let o = needlekit(&["replay", cx.to_str().unwrap()], replay.path(), None);
    assert_eq!(code(&o), 1);
    assert!(replay.path().join("replay.json").exists());

    // The same instance with the expectation flipped holds.
    let mut flipped = json.clone();
    flipped["expect_split"] = serde_json::Value::Bool(false);
    let path = replay.path().join("flipped.json");
    fs::write(&path, serde_json::to_vec(&flipped).unwrap()).unwrap();
    assert_eq!(code(&needlekit(&["replay", path.to_str().unwrap()], replay.path(), None)), 0);
}

#[test]
fn single_instance_checks_on_sample_inputs() {
    let dir = TempDir::new().unwrap();
    let p = |n: &str| data(n).to_str().unwrap().to_string();
    let o = needlekit(
        &["verify-lemma41", "--space", &p("exp_interval.json"), "--set", &p("tail_set.json"), "--h", "0.9", "--r", "10"],
        dir.path(),
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let row = &csv_rows(&dir.path().join("lemma41.csv"))[0];
    assert!((row[4].parse::<f64>().unwrap() - (-9f64).exp()).abs() < 1e-15);
    assert_eq!(row[7], "pass");

    let o = needlekit(&["verify-iso", "--space", &p("kinked_line.json"), "--set", &p("two_sets.json")], dir.path(), None);
    assert_eq!(code(&o), 0);
    let o = needlekit(
        &["verify-convexity", "--space", &p("lebesgue_window.json"), "--mu0", &p("mu0.json"), "--mu1", &p("mu1.json")],
        dir.path(),
        None,
    );
    assert_eq!(code(&o), 0);
    assert_eq!(csv_rows(&dir.path().join("convexity.csv")).len(), 11);

    let o = needlekit(&["needles", "--space", &p("square.json"), "--omega", &p("square_left.json")], dir.path(), None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&dir.path().join("flow.csv")).len(), 4);
}

#[test]
fn violated_inequality_exits_1_and_replays() {
    // A negative tolerance demands m+ >= (1 + 1e-3) h m, which the equality case misses.
    let dir = TempDir::new().unwrap();
    let space = dir.path().join("line.json");
    fs::write(&space, r#"{"domain": ["-inf", "inf"], "breakpoints": [0], "values": [0], "end_slopes": [1, 1]}"#)
        .unwrap();
    let set = dir.path().join("set.json");
    fs::write(&set, r#"[["-inf", 0]]"#).unwrap();
    let o = needlekit(
        &["verify-iso", "--space", space.to_str().unwrap(), "--set", set.to_str().unwrap(), "--tol=-1e-3"],
        dir.path(),
        None,
    );
    assert_eq!(code(&o), 1);
    let cx = dir.path().join("counterexample.json");
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&cx).unwrap()).unwrap();
    assert_eq!(json["check"], "isoperimetry");
    assert_eq!(code(&needlekit(&["replay", cx.to_str().unwrap()], dir.path(), None)), 1);
}

#[test]
fn profiles_and_entropy() {
    let dir = TempDir::new().unwrap();
    let o = needlekit(&["profile", "--milman", "1", "--points", "4", "--svg"], dir.path(), None);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&dir.path().join("milman.csv"));
    assert_eq!(rows.last().unwrap(), &vec!["0.5".to_string(), "1.0".to_string()]);
    assert!(dir.path().join("milman.svg").exists());

    let o = needlekit(&["profile", "--model", r#"{"kind":"truncated_exp","h":1,"d":1}"#, "--points", "3"], dir.path(), None);
    assert_eq!(code(&o), 0);
    assert_eq!(csv_rows(&dir.path().join("profile.csv")).len(), 3);

    let o = needlekit(&["entropy", "--model", r#"{"kind":"log_linear","h":2}"#, "--x0", "1"], dir.path(), None);
    assert_eq!(code(&o), 0);
    let row = &csv_rows(&dir.path().join("entropy.csv"))[0];
    assert_eq!(row[1], "2.0");
    assert!((row[2].parse::<f64>().unwrap() - 2.0).abs() < 1e-9);

    let o = needlekit(&["rigidity1d", "--model", r#"{"kind":"log_linear","h":2}"#], dir.path(), None);
    assert_eq!(code(&o), 0);
    assert_eq!(csv_rows(&dir.path().join("rigidity.csv"))[0][0], "true");
}

#[test]
fn random_suites_pass_with_default_tolerances() {
    let dir = TempDir::new().unwrap();
    for args in [
        vec!["verify-convexity", "--trials", "40", "--quantiles", "2000"],
        vec!["verify-lemma41", "--trials", "300"],
        vec!["verify-lemma42", "--trials", "1500"],
    ] {
        let o = needlekit(&args, dir.path(), None);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let lemma42 = csv_rows(&dir.path().join("lemma42.csv"));
    assert!(lemma42.iter().any(|r| r[13] == "pass"));
    assert_eq!(lemma42.iter().filter(|r| r[0] == "contrapositive" && r[13] == "hypothesis_fails").count(), 8);
    let convexity = csv_rows(&dir.path().join("convexity.csv"));
    assert_eq!(convexity.last().unwrap()[6], "detected");
}
