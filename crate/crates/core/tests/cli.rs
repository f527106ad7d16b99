use std::path::{Path, PathBuf};

use surftrap::cli::run;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name).to_string_lossy().into_owned()
}

fn surftrap(args: &[&str]) -> i32 {
    run(std::iter::once("surftrap").chain(args.iter().copied()))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn metrics_writes_summary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(surftrap(&["metrics", "--layout", &data("asymmetric_40_400_160.json"), "--out", out]), 0);
    let summary = json(dir.path().join("summary.json"));
    let result = &summary["result"];
    assert!((result["h_um"].as_f64().unwrap() - 80.57).abs() < 0.05);
    assert!(result["alpha_deg"].is_number());
    assert_eq!(summary["config_sha256"].as_str().unwrap().len(), 64);
    let manifest = json(dir.path().join("manifest.json"));
    assert_eq!(manifest["status"], "complete");
}

#[test]
fn explicit_layout_matches_parametric() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(surftrap(&["metrics", "--layout", &data("explicit_five_wire.json"), "--out", a.path().to_str().unwrap()]), 0);
    let sym = write(a.path(), "sym.json", r#"{"type": "symmetric", "w_c": 40, "w_r": 180}"#);
    assert_eq!(surftrap(&["metrics", "--layout", sym.to_str().unwrap(), "--out", b.path().to_str().unwrap()]), 0);
    let ra = &json(a.path().join("summary.json"))["result"];
    let rb = &json(b.path().join("summary.json"))["result"];
    for key in ["h_um", "depth_ev", "q"] {
        let (va, vb) = (ra[key].as_f64().unwrap(), rb[key].as_f64().unwrap());
        assert!((va - vb).abs() <= 1e-6 * vb.abs(), "{key}: {va} vs {vb}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(surftrap(&["metrics", "--layout", "/nonexistent/layout.json", "--out", out]), 2);
    assert_eq!(surftrap(&["metrics", "--layout", &data("asymmetric_40_400_160.json"), "--vrf", "0", "--out", out]), 2);
    assert_eq!(surftrap(&["no-such-command"]), 2);
    assert_eq!(surftrap(&["--threads", "0", "validate"]), 2);
    let bad = write(dir.path(), "bad.json", r#"{"type": "asymmetric", "w_c": -4, "w_r_up": 100, "w_r_down": 100}"#);
    assert_eq!(surftrap(&["metrics", "--layout", bad.to_str().unwrap(), "--out", out]), 2);
    let garbage = write(dir.path(), "garbage.json", "{ not json");
    assert_eq!(surftrap(&["metrics", "--layout", garbage.to_str().unwrap(), "--out", out]), 2);
}

#[test]
fn empty_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "empty.json",
        r#"{"grid": {"w_c": {"lo": 50, "hi": 40, "step": 10}, "w_r": {"lo": 140, "hi": 200, "step": 20}}}"#,
    );
    let out = dir.path().join("o");
    assert_eq!(
        surftrap(&["sweep-symmetric", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]),
        2
    );
}

#[test]
fn unreachable_depth_is_reported_in_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "deep.json", r#"{"target_depth_ev": 5.0}"#);
    let out = dir.path().join("o");
    let code = surftrap(&[
        "axial",
        "--layout",
        &data("split_150_300_700.json"),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let summary = json(out.join("summary.json"));
    let err = summary["result"]["calibration"]["error"].as_str().unwrap();
    assert!(err.contains("unreachable"), "{err}");
    assert_eq!(summary["result"]["transitions"], 1);
    assert!(out.join("ramp.csv").exists());
    assert!(out.join("axial_step_15.csv").exists());
}

#[test]
fn sweep_outputs_have_headers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"grid": {"w_c": {"lo": 50, "hi": 60, "step": 10}, "w_r": {"lo": 140, "hi": 150, "step": 10}}, "f_rf_mhz": [22]}"#,
    );
    let out = dir.path().join("o");
    assert_eq!(surftrap(&["sweep-symmetric", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let csv = std::fs::read_to_string(out.join("sweep_symmetric.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("w_c_um,w_r_up_um,w_r_down_um,V_rf_V,f_rf_MHz"));
    assert_eq!(lines.count(), 4);
    assert!(std::fs::read_to_string(out.join("fig3_height.svg")).unwrap().starts_with("<svg"));
}
