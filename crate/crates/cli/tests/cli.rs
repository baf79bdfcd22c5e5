//! End-to-end tests of the `paramp` binary: workflows, exit codes, and the
//! machine-readable error channel.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn paramp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_paramp"))
}

fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("cfg.json");
    std::fs::write(
        &path,
        r#"{
  "taper": {
    "z_source": 50.0,
    "z_load": 18.0,
    "gamma_max": 0.31622776601683794,
    "f_cutoff": 2e9,
    "gap": 3e-6,
    "substrate_eps_r": 11.9
  },
  "resonator": {
    "capacitance": 4e-12,
    "josephson_inductance": 69e-12,
    "flux_bias": 0.2,
    "pump_frequency": 17.2e9,
    "pump_amplitude": 0.02
  },
  "environment": { "type": "constant", "impedance": 18.0 },
  "frequency_grid": { "start_hz": 2.5e9, "stop_hz": 12e9, "points": 401 }
}"#,
    )
    .unwrap();
    path
}

fn error_kind(output: &Output) -> String {
    let stderr = String::from_utf8_lossy(&output.stderr);
    let parsed: serde_json::Value =
        serde_json::from_str(stderr.trim()).unwrap_or_else(|_| panic!("bad stderr: {stderr}"));
    parsed["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn design_taper_writes_profile_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = paramp()
        .args(["design-taper", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("taper_summary.json")).unwrap(),
    )
    .unwrap();
    let ripple = summary["ripple_a"].as_f64().unwrap();
    assert!((ripple - 1.0592).abs() < 1e-3, "ripple_a = {ripple}");

    let profile = std::fs::read_to_string(dir.path().join("taper_profile.csv")).unwrap();
    assert!(profile.starts_with("z_m,impedance_ohm,width_m\n"));
    assert_eq!(profile.lines().count(), 402);
}

#[test]
fn doubling_cutoff_halves_the_length() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let read_length = |out_dir: &Path| -> f64 {
        let summary: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(out_dir.join("taper_summary.json")).unwrap(),
        )
        .unwrap();
        summary["length_m"].as_f64().unwrap()
    };

    let d2 = dir.path().join("f2");
    let d4 = dir.path().join("f4");
    for (out_dir, setting) in [(&d2, "taper.f_cutoff=2e9"), (&d4, "taper.f_cutoff=4e9")] {
        let out = paramp()
            .args(["design-taper", "--config"])
            .arg(&cfg)
            .args(["--set", setting])
            .arg("--out-dir")
            .arg(out_dir)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let ratio = read_length(&d2) / read_length(&d4);
    assert!((ratio - 2.0).abs() < 1e-9, "length ratio {ratio}");
}

#[test]
fn infeasible_design_exits_2_with_kind() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = paramp()
        .args(["design-taper", "--config"])
        .arg(&cfg)
        .args(["--set", "taper.gamma_max=0.6"])
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "DesignInfeasible");
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = paramp()
        .args(["design-taper", "--config"])
        .arg(&cfg)
        .args(["--set", "taper.not_a_field=1"])
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "InvalidSpec");
}

#[test]
fn missing_config_exits_3() {
    let out = paramp()
        .args(["design-taper", "--config", "/nonexistent/cfg.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_kind(&out), "IoError");
}

#[test]
fn empty_grid_simulation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = paramp()
        .args(["simulate-sparams", "--config"])
        .arg(&cfg)
        .args(["--set", "frequency_grid.points=0"])
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_kind(&out), "IoError");
}

#[test]
fn simulate_sparams_emits_touchstone_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = paramp()
        .args(["simulate-sparams", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let s2p = std::fs::read_to_string(dir.path().join("sparams.s2p")).unwrap();
    assert!(s2p.starts_with("# GHz S RI R 50\n"));
    assert_eq!(s2p.lines().count(), 402);
    let csv = std::fs::read_to_string(dir.path().join("sparams_db.csv")).unwrap();
    assert!(csv.starts_with("freq_hz,s11_db,s21_db\n"));
}

#[test]
fn tune_curve_roundtrips_through_tuning_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = paramp()
        .args(["tune-curve", "--config"])
        .arg(&cfg)
        .args(["--set", "tune_curve.start_phi0=-0.45"])
        .args(["--set", "tune_curve.stop_phi0=0.45"])
        .args(["--set", "tune_curve.points=81"])
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());

    let fit = paramp()
        .args(["fit", "tuning", "--data"])
        .arg(dir.path().join("tune_curve.csv"))
        .args(["--config"])
        .arg(&cfg)
        .args(["--set", "resonator.josephson_inductance=80e-12"])
        .output()
        .unwrap();
    assert!(
        fit.status.success(),
        "{}",
        String::from_utf8_lossy(&fit.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_slice(&fit.stdout).expect("fit emits JSON on stdout");
    let lj = report["params"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["name"] == "josephson_inductance")
        .unwrap()["value"]
        .as_f64()
        .unwrap();
    assert!((lj - 69e-12).abs() / 69e-12 < 1e-6, "L_J = {lj}");
    assert_eq!(report["converged"], serde_json::json!(true));
}

#[test]
fn compression_without_saturation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("flat.csv");
    let mut text = String::from("p_in_dbm,gain_db\n");
    for i in 0..8 {
        text.push_str(&format!("{},20.0\n", -130 + i));
    }
    std::fs::write(&data, text).unwrap();
    let out = paramp()
        .args(["fit", "compression", "--data"])
        .arg(&data)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "NoCompression");
}

#[test]
fn noise_without_requests_exits_2() {
    let out = paramp().arg("noise").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "InvalidSpec");
}

#[test]
fn noise_temperature_direction() {
    let out = paramp()
        .args([
            "noise",
            "--snr-db",
            "9.017557479",
            "--t-second",
            "2.3",
            "--t-second-max",
            "2.9",
            "--gain-db",
            "20",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let lo = report["noise_temperature"]["t_first_stage_k_min"]
        .as_f64()
        .unwrap();
    let hi = report["noise_temperature"]["t_first_stage_k_max"]
        .as_f64()
        .unwrap();
    // 0.3 K at T_second = 2.6 K scales linearly with the range ends
    assert!((lo - 0.3 * 2.3 / 2.6).abs() < 1e-6);
    assert!((hi - 0.3 * 2.9 / 2.6).abs() < 1e-6);
}

#[test]
fn thread_cap_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = paramp()
        .env("PARAMP_THREADS", "1")
        .args(["simulate-sparams", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());

    let bad = paramp()
        .env("PARAMP_THREADS", "zero")
        .args(["simulate-sparams", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    if cfg!(feature = "parallel") {
        assert_eq!(bad.status.code(), Some(2));
    }
}
