use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sgi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgi")).args(args).output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = sgi(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

/// (header, rows) of a CSV with `#` comment lines.
fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"))
}

#[test]
fn default_run_reports_test_case_frequency() {
    let v = ok_json(&["run", "--set", "numerics.mc_samples=10000"]);
    assert_eq!(v["schema_version"], 1);
    let hz = v["summary"]["libration_hz_bias"].as_f64().unwrap();
    assert!((hz / 1e3 - 2.86).abs() < 0.005, "{hz}");
    assert!(v["config"]["field"]["b0"].as_f64().is_some());
    assert!(v["monte_carlo"]["rms"].as_f64().unwrap() > 0.0);
}

#[test]
fn identical_arms_have_no_phase() {
    let v = ok_json(&["run", "--spin-arm1", "0,0,0", "--spin-arm2", "0,0,0", "--set", "numerics.mc_samples=10000"]);
    assert_eq!(v["summary"]["delta_phi"].as_f64().unwrap(), 0.0);
}

#[test]
fn quadratic_ramp_cancels_phase() {
    let v = ok_json(&["run", "--ramp", "quadratic", "--set", "numerics.mc_samples=10000"]);
    assert!(v["summary"]["delta_phi"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn run_writes_trajectory_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("paths.csv");
    let summary = dir.path().join("run.csv");
    let out = sgi(&[
        "run",
        "--format",
        "csv",
        "--set",
        "numerics.record_stride=100",
        "--set",
        "numerics.mc_samples=10000",
        "--trajectory",
        traj.to_str().unwrap(),
        "--out",
        summary.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&std::fs::read_to_string(&traj).unwrap());
    assert_eq!(h[..5], ["t [s]", "arm", "xi [m]", "zeta [m]", "theta_prime [rad]"]);
    assert!(rows.len() > 20 && rows.iter().any(|r| r[1] == "1") && rows.iter().any(|r| r[1] == "2"));
    let (h, rows) = read_csv(&std::fs::read_to_string(&summary).unwrap());
    assert_eq!(rows.len(), 1);
    let cfg: Value = serde_json::from_str(&rows[0][col(&h, "resolved_config")]).unwrap();
    assert_eq!(cfg["numerics"]["record_stride"], 100);
}

#[test]
fn fig5_peaks_near_multiples_of_pi() {
    let out = sgi(&["sweep", "--experiment", "fig5", "--no-series", "--points", "200"]);
    assert!(out.status.success());
    let (h, rows) = read_csv(&String::from_utf8(out.stdout).unwrap());
    let (u, c, err) = (col(&h, "omega_t"), col(&h, "c_theta_wavepacket"), col(&h, "error"));
    let pts: Vec<(f64, Option<f64>)> = rows
        .iter()
        .map(|r| (r[u].parse().unwrap(), if r[err].is_empty() { r[c].parse().ok() } else { None }))
        .collect();
    for n in 1..=3 {
        let target = n as f64 * std::f64::consts::PI;
        let i = pts
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 .0 - target).abs().total_cmp(&(b.1 .0 - target).abs()))
            .unwrap()
            .0;
        let peak = pts[i].1.unwrap();
        // neighbours within ±0.3 rad are all lower
        for (x, y) in &pts {
            if (x - target).abs() < 0.3 && (x - pts[i].0).abs() > 1e-12 {
                assert!(y.is_none_or(|y| y < peak), "n={n}: C({x}) = {y:?} >= {peak}");
            }
        }
    }
}

#[test]
fn degenerate_sweep_gives_two_close_rows() {
    let out = sgi(&["sweep", "--var", "b0", "--min", "10 G", "--max", "10.000001 G", "--points", "2", "--no-series"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 2);
    assert_eq!(h[1], "b0 [T]");
    let c = col(&h, "delta_phi [rad]");
    let (a, b): (f64, f64) = (rows[0][c].parse().unwrap(), rows[1][c].parse().unwrap());
    assert!((a - b).abs() < 1e-4 * a.abs(), "{a} {b}");
}

#[test]
fn sweep_rows_carry_resolved_config() {
    let out = sgi(&["sweep", "--experiment", "fig7", "--points", "3", "--set", "numerics.steps_per_pulse=200"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# sgi: "));
    let (h, rows) = read_csv(&text);
    let (var, cfg) = (col(&h, "b0 [T]"), col(&h, "resolved_config"));
    for r in &rows {
        let scn: Value = serde_json::from_str(&r[cfg]).unwrap();
        assert_eq!(scn["numerics"]["steps_per_pulse"], 200);
        assert_eq!(scn["field"]["b0"].as_f64().unwrap(), r[var].parse::<f64>().unwrap());
    }
}

#[test]
fn per_point_failures_stay_in_row() {
    // the ramp exhausts the bias at large g, which must not abort the sweep
    let out = sgi(&[
        "sweep",
        "--experiment",
        "fig9",
        "--no-series",
        "--var",
        "g_xi",
        "--min",
        "0 m/s^2",
        "--max",
        "9.8 m/s^2",
        "--points",
        "3",
        "--set",
        "field.b_grad=\"0.4 G/nm\"",
        "--set",
        "numerics.steps_per_pulse=200",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&String::from_utf8(out.stdout).unwrap());
    let e = col(&h, "error");
    assert!(rows[0][e].is_empty());
    assert!(!rows[2][e].is_empty());
}

#[test]
fn output_is_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let p = dir.path().join(name);
        let out = sgi(&[
            "--threads",
            threads,
            "sweep",
            "--experiment",
            "fig4",
            "--points",
            "6",
            "--set",
            "numerics.steps_per_pulse=200",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(p).unwrap()
    };
    let a = run("1", "a.csv");
    assert_eq!(a, run("1", "b.csv"));
    assert_eq!(a, run("2", "c.csv"));
}

#[test]
fn run_is_deterministic_for_a_seed() {
    let a = sgi(&["run", "--seed", "5", "--set", "numerics.mc_samples=10000"]).stdout;
    let b = sgi(&["run", "--seed", "5", "--set", "numerics.mc_samples=10000"]).stdout;
    let c = sgi(&["run", "--seed", "6", "--set", "numerics.mc_samples=10000"]).stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn fig3_writes_both_cases() {
    let out = sgi(&["sweep", "--experiment", "fig3"]);
    assert!(out.status.success());
    let (h, rows) = read_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(h[0], "case");
    assert!(rows.iter().any(|r| r[0] == "ideal") && rows.iter().any(|r| r[0] == "tilted"));
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn config_errors_exit_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[field]\nb0 = \"10 G\"\nb_gradient = \"1 G/nm\"\n").unwrap();
    let out = sgi(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("b_gradient") && msg.contains("line 3"), "{msg}");

    let out = sgi(&["run", "--set", "field.b0=\"-1 G\""]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("b0"));

    let out = sgi(&["run", "--set", "sequence.t_pulse=25"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sequence.t_pulse"));

    for args in [
        &["sweep", "--var", "b0", "--min", "2 G", "--max", "2 G"][..],
        &["sweep", "--var", "b0", "--min", "2", "--max", "3 G"],
        &["sweep", "--points", "1"],
        &["run", "--spin-arm1", "0,0"],
        &["run", "--set", "numerics.mc_samples=100"],
        &["run", "--config", "/nonexistent/sgi.toml"],
        &["frobnicate"],
    ] {
        assert_eq!(code(&sgi(args)), 2, "{args:?}");
    }
}

#[test]
fn numerical_failure_exits_3_with_stage() {
    // a ramp that runs the bias through zero fails inside the dynamics
    let out = sgi(&[
        "run",
        "--ramp",
        "quadratic",
        "--set",
        "environment.g_xi=\"9.8 m/s^2\"",
        "--set",
        "field.b_grad=\"0.4 G/nm\"",
        "--set",
        "field.b0=\"5 G\"",
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage"));
}

#[test]
fn validate_quick_passes() {
    let out = sgi(&["validate", "--quick"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 7 && !text.contains("FAIL"));
    let v = ok_json(&["validate", "--quick", "--json"]);
    assert_eq!(v["pass"], true);
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sgi.toml");
    std::fs::write(&cfg, "[field]\nb0 = \"20 G\"\n[numerics]\nmc_samples = 10000\n").unwrap();
    let v = ok_json(&["run", "--config", cfg.to_str().unwrap()]);
    assert!((v["config"]["field"]["b0"].as_f64().unwrap() - 2e-3).abs() < 1e-15);
    assert!(Path::new(&cfg).exists());
}
