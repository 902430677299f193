use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn inertial(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inertial"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn analyze_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = inertial(&["analyze", "--shape", "sinsq", "--steps", "400", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("inertial_report.json")).unwrap()).unwrap();
    assert_eq!(report["chi"].as_array().unwrap().len(), 401);
    // linear θ at constant Ω has constant χ
    assert!(report["max_eta_i"].as_f64().unwrap() < 1e-10);
}

#[test]
fn stirap_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"preset": "fig1a", "shapes": ["cubic", "sinsq"], "sweep": "area", "values": [0, 10, 20], "steps": 300}"#,
    );
    let out = dir.path().join("run");
    let o = inertial(&["stirap", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("stirap_area.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    let m = manifest(&out);
    assert_eq!(m["preset"], "fig1a");
    assert_eq!(m["steps"], 300);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn gates_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"preset": "fig3_phase", "shapes": ["quartic"], "sweep": "omega_max", "values": [50e6], "steps": 1000}"#,
    );
    let out = dir.path().join("run");
    let o = inertial(&["gates", "--gate", "phase", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("gates.csv")).unwrap();
    let line = csv.lines().nth(1).unwrap();
    let x: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
    assert!(x > 0.0 && x < 0.05, "{line}");
}

#[test]
fn seeded_montecarlo_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"preset": "fig2", "shapes": ["quartic"], "sweep": "noise_seed", "values": [3, 9], "noise": "fig2", "steps": 400}"#,
    );
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = inertial(&["montecarlo", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out.join("montecarlo_realizations.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 3);
}

#[test]
fn tomography_writes_chi() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = inertial(&["tomography", "--gate", "phase", "--shape", "quartic", "--tf", "1e-6", "--steps", "1000", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let re = fs::read_to_string(dir.path().join("chi_re.csv")).unwrap();
    assert_eq!(re.lines().count(), 5);
    let f = manifest(dir.path())["fidelity"].as_f64().unwrap();
    assert!(f > 0.9 && f <= 1.0 + 1e-9, "{f}");
}

#[test]
fn rejects_foreign_preset_and_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"preset": "fig1a", "shapes": ["cubic"], "sweep": "area", "values": [1]}"#,
    );
    let o = inertial(&["table1", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not belong"));

    let o = inertial(&["gates", "--gate", "toffoli"]);
    assert!(!o.status.success());
    let o = inertial(&["stirap", "--config", "/nonexistent/config.json"]);
    assert!(!o.status.success());
}
