use std::path::Path;
use std::process::{Command, Output};

use pinchtape::model::{cable_lengths, forward_kinematics};
use pinchtape::units::format_sig;
use pinchtape::{JointState, ManipulatorParams};

fn pinchtape(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinchtape"))
        .args(args)
        .env_remove("PINCHTAPE_PARAMS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    let prefix = format!("{key} = ");
    let line = text
        .lines()
        .find(|l| l.starts_with(&prefix))
        .unwrap_or_else(|| panic!("no '{key}' in {text}"));
    line[prefix.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn fk_matches_library_output() {
    let o = pinchtape(&["fk", "0.432", "0.265", "16.7deg"]);
    assert_eq!(o.status.code(), Some(0));
    let p = forward_kinematics(
        &JointState::new(0.432, 0.265, 16.7f64.to_radians()),
        &ManipulatorParams::default(),
    )
    .unwrap();
    let text = stdout(&o);
    assert!(text.contains(&format!("x = {} m", format_sig(p.x))));
    assert!(text.contains(&format!("y = {} m", format_sig(p.y))));
    assert!((value(&text, "x") - 0.0762).abs() < 5e-4);
    assert!((value(&text, "y") - 0.6858).abs() < 5e-4);

    let o = pinchtape(&["fk", "0.5", "0.5", "0"]);
    let text = stdout(&o);
    assert_eq!(value(&text, "x"), 0.0);
    assert_eq!(value(&text, "y"), 1.0);
}

#[test]
fn fk_rejects_joint_limit() {
    let o = pinchtape(&["fk", "0.5", "0.5", "80deg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("joint limit"));
}

#[test]
fn parse_failures_are_usage_errors() {
    assert_eq!(pinchtape(&["fk", "0.5", "x", "0"]).status.code(), Some(2));
    assert_eq!(pinchtape(&["fk", "0.5", "0.5", "12furlongs"]).status.code(), Some(2));
    assert_eq!(
        pinchtape(&["--unit", "grad", "fk", "0.5", "0.5", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn ik_and_radian_unit() {
    let text = stdout(&pinchtape(&["ik", "0.076", "0.686", "--theta", "10deg"]));
    assert!((value(&text, "l1") - 0.254).abs() < 5e-3);
    assert!((value(&text, "l2") - 0.438).abs() < 5e-3);
    let text = stdout(&pinchtape(&["--unit", "rad", "ik", "0.076", "0.686", "--theta", "0.2"]));
    assert_eq!(value(&text, "theta"), 0.2);
    let o = pinchtape(&["ik", "0.076", "0.686", "--count", "3"]);
    assert_eq!(stdout(&o).lines().count(), 4);
    assert_eq!(pinchtape(&["ik", "0", "2.5"]).status.code(), Some(1));
}

#[test]
fn cables_and_inverse() {
    let o = pinchtape(&["cables", "0.5", "0.5", "30deg", "--d", "0.02"]);
    let text = stdout(&o);
    let c = cable_lengths(&JointState::new(0.5, 0.5, 30f64.to_radians()), 0.02);
    assert!(text.contains(&format!("cL = {} m", format_sig(c.c_l))));
    assert!((value(&text, "cL") - 1.010353).abs() < 5e-7);
    assert!((value(&text, "cR") - 0.989647).abs() < 5e-7);

    let cl = format_sig(c.c_l);
    let cr = format_sig(c.c_r);
    let text = stdout(&pinchtape(&["theta-from-cables", &cl, &cr, "--d", "0.02"]));
    assert!((value(&text, "theta") - 30.0).abs() < 1e-6);
    assert_eq!(
        pinchtape(&["theta-from-cables", "1.2", "1.0", "--d", "0.02"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn stiffness_outputs() {
    let text = stdout(&pinchtape(&["stiffness", "--kappa", "0"]));
    assert_eq!(value(&text, "M"), 0.0);
    let text = stdout(&pinchtape(&["stiffness", "--theta", "10deg"]));
    assert!((value(&text, "pinched") - 0.055).abs() < 1e-9);
    assert!((value(&text, "unpinched") - 0.654).abs() < 1e-9);
}

#[test]
fn stiffness_curves_feed_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = pinchtape(&["--out", out, "stiffness", "--curves"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = dir.path().join("moment_unpinched.csv");
    let o = pinchtape(&["stiffness", "--calibrate", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!((value(&stdout(&o), "peak_moment") - 0.654).abs() < 1e-6);
}

#[test]
fn workspace_writes_symmetric_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = pinchtape(&["--out", out, "workspace", "--resolution", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("workspace.csv")).unwrap();
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 40 * 20);
    for row in rows.chunks(40) {
        for i in 0..40 {
            let (a, b) = (&row[i], &row[39 - i]);
            assert_eq!(a[2], b[2]);
            assert_eq!(a[0].trim_start_matches('-'), b[0].trim_start_matches('-'));
        }
    }
    let svg = std::fs::read_to_string(dir.path().join("workspace.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(value(&stdout(&o), "reachable fraction") > 0.1);
}

#[test]
fn workspace_zero_area_warns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = pinchtape(&[
        "--out",
        out,
        "--format",
        "csv",
        "workspace",
        "--x-min",
        "0",
        "--x-max",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let text = std::fs::read_to_string(dir.path().join("workspace.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(!dir.path().join("workspace.svg").exists());
}

#[test]
fn demos() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for name in ["stationary-bend", "stationary-bend-uncoordinated"] {
        let o = pinchtape(&["--out", out, "demo", name]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(dir.path().join(format!("{name}.csv")).exists());
        assert!(dir.path().join(format!("{name}.svg")).exists());
    }
    let text = stdout(&pinchtape(&["--out", out, "demo", "stationary-bend-uncoordinated"]));
    assert!(text.contains("PASS expect_fail:l1_constant"));
    let o = pinchtape(&["demo", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("reach-two-targets"));
    assert_eq!(stdout(&pinchtape(&["demo"])).lines().count(), 6);
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn simulate_scenario_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let good = dir.path().join("extend.json");
    write(
        &good,
        r#"{
            "initial": {"l1_m": 0.3, "l2_m": 0.4, "theta_rad": 0.0},
            "segments": [{"duration_s": 1.0, "rates": {"q1": 0.05, "q2": 0.0, "cL": 0.05, "cR": 0.05}}],
            "dt_s": 0.01,
            "checks": ["within_limits", "target:(0, 0.75)"]
        }"#,
    );
    let o = pinchtape(&["--out", out, "--format", "csv", "simulate", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let log = std::fs::read_to_string(dir.path().join("extend.csv")).unwrap();
    assert_eq!(log.lines().count(), 102);

    let failing = dir.path().join("fail.json");
    write(
        &failing,
        &std::fs::read_to_string(&good).unwrap().replace("0.75", "0.8"),
    );
    assert_eq!(
        pinchtape(&["--out", out, "simulate", failing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );

    let bad = dir.path().join("bad.json");
    write(&bad, "{\"dt_s\": 0.01}");
    assert_eq!(pinchtape(&["simulate", bad.to_str().unwrap()]).status.code(), Some(2));

    let missing = dir.path().join("missing.json");
    assert_eq!(
        pinchtape(&["simulate", missing.to_str().unwrap()]).status.code(),
        Some(3)
    );
}

#[test]
fn params_file_and_env() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.json");
    write(&params, r#"{"theta_limit": 1.5}"#);
    let o = pinchtape(&["--params", params.to_str().unwrap(), "fk", "0.5", "0.5", "80deg"]);
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_pinchtape"))
        .args(["fk", "0.5", "0.5", "80deg"])
        .env("PINCHTAPE_PARAMS", &params)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    write(&params, r#"{"theta_limt": 1.5}"#);
    assert_eq!(
        pinchtape(&["--params", params.to_str().unwrap(), "fk", "0.5", "0.5", "0"])
            .status
            .code(),
        Some(2)
    );
}
