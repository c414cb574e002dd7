use std::path::Path;
use std::process::{Command, Output};

fn dicke_lab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dicke-lab")).args(args).current_dir(cwd).output().expect("binary runs")
}

#[test]
fn success_writes_artifacts_and_echoes_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dicke_lab(&["fixed-points", "--j", "4.5", "--g", "1.5", "--out", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let listed = String::from_utf8(out.stdout).unwrap();
    assert!(listed.lines().any(|l| l.ends_with("fixed_points.json")));
    let echo: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("run/config.json")).unwrap()).unwrap();
    assert_eq!(echo["command"], "fixed-points");
    assert_eq!(echo["g"], 1.5);
    assert_eq!(echo["mode"], "integrable");

    // the echo replays to the same artifacts
    let again = dicke_lab(&["fixed-points", "--config", "run/config.json", "--out", "replay"], tmp.path());
    assert_eq!(again.status.code(), Some(0));
    for f in ["fixed_points.json", "fixed_points.csv", "fixed_points.svg"] {
        assert_eq!(
            std::fs::read(tmp.path().join("run").join(f)).unwrap(),
            std::fs::read(tmp.path().join("replay").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn negative_energy_flag_is_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dicke_lab(
        &["trajectory", "--j", "4.5", "--g", "0.75", "--mode", "symmetric", "--energy", "-5.5", "--t-final", "2"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("dicke-out/trajectory.csv").exists());
}

#[test]
fn config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.toml"), "jj = 3\n").unwrap();
    for args in [
        &["wigner", "--j", "4.3"][..],
        &["wigner", "--config", "bad.toml"],
        &["scan-entropy", "--j", "4.5", "--mode", "integrable", "--g-prime", "0.2"],
        &["trajectory", "--j", "4.5", "--g", "0.75"],
        &["wigner"],
        &["scan-entropy", "--j", "4.5", "--lambda", "2:1:0.1"],
    ] {
        let out = dicke_lab(args, tmp.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("dicke-lab: "));
    }
    let out = dicke_lab(&["wigner", "--config", "bad.toml"], tmp.path());
    assert!(String::from_utf8_lossy(&out.stderr).contains("jj"));
}

#[test]
fn truncation_failure_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dicke_lab(&["scan-entropy", "--j", "0.5", "--lambda", "0:80:40"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncation did not converge"));
}
