//! End-to-end checks of the binary: exit codes, report layout, and
//! determinism of the emitted artifacts.

use std::fs;
use std::path::Path;
use std::process::Command;

use fairmech_cli::source_file::render_source;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fairmech"))
}

fn write_d2(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("d2.json");
    fs::write(&path, render_source(&fairmech::instances::d2()).unwrap()).unwrap();
    path
}

#[test]
fn info_prints_the_catalog() {
    let tmp = tempfile::tempdir().unwrap();
    let source = write_d2(tmp.path());
    let out = bin().args(["info", "--source"]).arg(&source).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("H(X|S) = 1"));
    assert!(text.contains("H(T|S) = 1"));
    assert!(text.contains("I(X,S;T) = 2"));
    assert!(text.contains("log2(I(X;T|S)+1)+4 = 5"));
    assert!(text.contains("[X,T] = 1"));
}

#[test]
fn run_writes_reports_and_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let source = write_d2(tmp.path());
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args(["run", "--problem", "both", "--rate", "1.0", "--seed", "3", "--source"])
        .arg(&source)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "r,design,utility_p1,utility_p2,secrecy,rate_p1,rate_p2,L1,L2,L3,L1_prime,upper,oracle,feasible"
    );
    // Designs A, B, C and the irrelevance-problem construction at r = 1.
    assert_eq!(lines.len(), 5);
    assert!(out_dir.join("run_p1_A_r1.json").exists());
    assert!(out_dir.join("run_p2_P2_r1.json").exists());
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("run_p1_A_r1.json")).unwrap())
            .unwrap();
    assert_eq!(record["status"], "ok");
    assert_eq!(record["measures"]["secrecy"], 0.0);
    assert_eq!(record["measures"]["feasible_p1"], true);
    assert_eq!(record["bounds_p1"]["upper"], 1.0);
}

#[test]
fn malformed_source_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.json");
    fs::write(&path, "{ not json").unwrap();
    let out = bin()
        .args(["run", "--rate", "0.5", "--source"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unnormalized_source_reports_the_deficit() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("deficit.json");
    fs::write(
        &path,
        r#"{"s_alphabet":["s0"],"x_alphabet":["x0","x1"],"t_alphabet":["t0"],
           "pmf":[[["1/2"],["3/8"]]]}"#,
    )
    .unwrap();
    let out = bin()
        .args(["run", "--rate", "0.5", "--source"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1/8"), "stderr: {err}");
}

#[test]
fn bad_config_values_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let source = write_d2(tmp.path());
    for args in [
        vec!["run", "--rate", "-1.0"],
        vec!["run", "--rate", "0.5", "--design", "Z"],
        vec!["run"],
    ] {
        let out = bin()
            .args(&args)
            .arg("--source")
            .arg(&source)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn out_of_regime_designs_are_recorded_not_fatal() {
    let tmp = tempfile::tempdir().unwrap();
    let source = write_d2(tmp.path());
    let out_dir = tmp.path().join("out");
    // Design A requires r <= H(X|S) = 1; at r = 1.5 the run is recorded
    // with a status flag and the sweep completes.
    let out = bin()
        .args(["run", "--rate", "1.5", "--design", "A", "--source"])
        .arg(&source)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("run_p1_A_r1.5.json")).unwrap())
            .unwrap();
    assert_eq!(record["status"], "regime_error");
    assert!(record["error"].as_str().unwrap().contains("requires"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let source = write_d2(tmp.path());
    let (dir_a, dir_b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&dir_a, &dir_b] {
        let out = bin()
            .args([
                "run",
                "--problem",
                "both",
                "--rate",
                "0.5",
                "--rate",
                "1.0",
                "--oracle-budget",
                "1500",
                "--seed",
                "11",
                "--source",
            ])
            .arg(&source)
            .arg("--out")
            .arg(dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let mut names: Vec<String> = fs::read_dir(&dir_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.contains(&"summary.csv".to_string()));
    for name in names {
        let a = fs::read(dir_a.join(&name)).unwrap();
        let b = fs::read(dir_b.join(&name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between identical reruns");
    }
}

#[test]
fn config_file_drives_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let source = write_d2(tmp.path());
    let out_dir = tmp.path().join("out");
    let config = tmp.path().join("config.json");
    fs::write(
        &config,
        serde_json::json!({
            "source": source.to_str().unwrap(),
            "problem": "p1",
            "rates": {"min": 0.5, "max": 1.0, "steps": 2},
            "designs": ["B"],
            "arithmetic": "exact",
            "output": out_dir.to_str().unwrap(),
        })
        .to_string(),
    )
    .unwrap();
    let out = bin().args(["run", "--config"]).arg(&config).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3); // header + 2 rates x design B
    assert!(csv.contains("0.5,B"));
    assert!(csv.contains("1,B"));
}
