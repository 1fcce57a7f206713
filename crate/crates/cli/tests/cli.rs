use std::path::PathBuf;
use std::process::Command;

fn airship() -> Command {
    Command::new(env!("CARGO_BIN_EXE_airship"))
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn json(out: &[u8]) -> serde_json::Value {
    serde_json::from_slice(out).expect("stdout is JSON")
}

#[test]
fn run_writes_log_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = airship()
        .args(["run", scenario("pch_step.toml").to_str().unwrap(), "--out"])
        .arg(dir.path())
        .args(["--override", "duration=5"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out.stdout);
    assert_eq!(v["status"]["state"], "completed");
    assert_eq!(v["metrics"]["rows"], 500);
    let csv = dir.path().join("pch_step.csv");
    assert!(csv.exists());
    assert!(dir.path().join("pch_step.json").exists());

    let m = airship().arg("metrics").arg(&csv).output().unwrap();
    assert!(m.status.success());
    assert_eq!(json(&m.stdout)["metrics"], v["metrics"]);
}

#[test]
fn seed_flag_changes_turbulent_run() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        let out = airship()
            .args([
                "run",
                scenario("case3_turbulence.toml").to_str().unwrap(),
                "--out",
            ])
            .arg(dir.path().join(seed))
            .args(["--seed", seed, "--override", "duration=10"])
            .output()
            .unwrap();
        assert!(out.status.success());
        json(&out.stdout)["metrics"]["tracking"]["u_c"]["rms"]
            .as_f64()
            .unwrap()
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn aborted_run_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = airship()
        .args(["run", scenario("pch_step.toml").to_str().unwrap(), "--out"])
        .arg(dir.path())
        .args([
            "--override",
            "initial.attitude_deg=[0,88,0]",
            "--override",
            "initial.trim=false",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out.stdout);
    assert_eq!(v["status"]["state"], "aborted");
    assert!(v["status"]["reason"].as_str().unwrap().contains("singularity"));
}

#[test]
fn bad_override_is_an_error() {
    let out = airship()
        .args([
            "run",
            scenario("pch_step.toml").to_str().unwrap(),
            "--override",
            "controller.no_such_gain=1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn sweep_runs_each_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = airship()
        .args([
            "sweep",
            scenario("pch_step.toml").to_str().unwrap(),
            "--param",
            "controller.pch",
        ])
        .args(["--values", "true,false", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out.stdout);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let hedge = |i: usize| rows[i]["run"]["metrics"]["pch_activity"].as_f64().unwrap();
    assert!(hedge(0) > 0.0);
    assert_eq!(hedge(1), 0.0);
    assert!(dir.path().join("pch_step_true.csv").exists());
    assert!(dir.path().join("pch_step_false.csv").exists());
}
