use std::fs;
use std::path::Path;
use std::process::Command;

use entsim::run::{format_number, TRAJECTORY_HEADER};
use entsim::{parse_config, run};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(dir: &Path, body: &str) -> String {
    format!(r#"{{"out": {:?}, {body}}}"#, dir.to_str().unwrap())
}

fn run_in(dir: &Path, body: &str) -> entsim::RunOutput {
    run(&parse_config(&config(dir, body)).unwrap()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines
        .next()
        .unwrap()
        .split(',')
        .position(|h| h == name)
        .unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn trajectory_mode_writes_one_csv_per_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        r#""mode": "trajectory", "omega_y": 0.1, "omega_L": 10, "initial_state": "product10", "t_max": 2"#,
    );
    assert_eq!(out.files.len(), 4);
    let full = fs::read_to_string(dir.path().join("trajectory_full.csv")).unwrap();
    let none = fs::read_to_string(dir.path().join("trajectory_none.csv")).unwrap();
    assert_eq!(full.lines().next().unwrap(), TRAJECTORY_HEADER);
    assert_eq!(full.lines().count(), 2002);
    let (cf, cn) = (column(&full, "concurrence"), column(&none, "concurrence"));
    // early generation is stronger with the coherent terms on
    for k in [100, 500, 1000] {
        assert!(
            cf[k] > cn[k],
            "τ = {}: {} vs {}",
            k as f64 * 1e-3,
            cf[k],
            cn[k]
        );
    }
}

#[test]
fn coefficients_mode_far_from_plate() {
    let dir = tempfile::tempdir().unwrap();
    run_in(
        dir.path(),
        r#""mode": "coefficients", "omega_y": 1e8, "omega_L": 1"#,
    );
    let csv = fs::read_to_string(dir.path().join("coefficients.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("b1,b2,b3,d,delta"));
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((row[0] - 0.25).abs() < 1e-6);
    assert!((row[1] - 0.25).abs() < 1e-6);
    assert!(row[4].abs() < 1e-6);
    assert_eq!(lines.next(), None);
}

#[test]
fn oracle_check_mode_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        r#""mode": "oracle-check", "omega_y": 1, "omega_L": 1, "initial_state": "product10", "t_max": 10"#,
    );
    let report = out.report.unwrap();
    assert!(report.trim_end().ends_with("PASS"), "{report}");
}

#[test]
fn sweep_mode_rows_and_infinite_marker() {
    let dir = tempfile::tempdir().unwrap();
    run_in(
        dir.path(),
        r#""mode": "sweep", "geometry": {"omega_y": 1, "omega_L": {"start": 0.5, "stop": 1.5, "count": 3}},
           "initial_state": "antisymmetric", "t_max": 5, "scenarios": ["none", "full"]"#,
    );
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "omega_y,omega_L,scenario,max_concurrence,tau_of_max,survival_time,generated"
    );
    assert_eq!(lines.len(), 7);
    let scenarios: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(scenarios, ["none", "full", "none", "full", "none", "full"]);
    // still decaying at τ = 5
    assert!(lines[1..]
        .iter()
        .all(|l| l.split(',').nth(5) == Some("inf")));
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let body = r#""mode": "sweep", "geometry": {"omega_y": {"start": 0.8, "stop": 1.2, "count": 2},
                  "omega_L": {"start": 0.05, "stop": 3, "count": 4, "spacing": "log"}},
                  "initial_state": "product10", "t_max": 60"#;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_in(a.path(), body);
    run_in(b.path(), body);
    let read = |d: &Path| fs::read(d.join("sweep.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn formatted_numbers_round_trip_to_the_last_digit() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for precision in [1, 6, 12, 17] {
        for _ in 0..20_000 {
            let v = rng.random_range(-1.0f64..1.0) * 10f64.powi(rng.random_range(-300..300));
            let text = format_number(v, precision);
            let back: f64 = text.parse().unwrap();
            // one unit in the last printed place
            let exponent = v.abs().log10().floor();
            let ulp = 10f64.powf(exponent - (precision as f64 - 1.0));
            assert!((back - v).abs() <= ulp, "{v} -> {text}");
            if precision == 17 {
                assert_eq!(back, v);
            }
        }
    }
}

fn entsim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_entsim"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let ok = entsim(&[
        "--mode",
        "coefficients",
        "--omega-y",
        "1",
        "--omega-l",
        "2",
        "--out",
        out,
    ]);
    assert_eq!(ok.status.code(), Some(0));

    let bad = entsim(&[
        "--mode",
        "coefficients",
        "--omega-y",
        "1",
        "--omega-l",
        "-1",
        "--out",
        out,
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("geometry.omega_L"));

    let missing = entsim(&["--config", "/definitely/not/here.json"]);
    assert_eq!(missing.status.code(), Some(3));

    // survival cannot be classified: concurrence still rising at t_max
    let short = entsim(&[
        "--mode",
        "sweep",
        "--omega-y",
        "0.1",
        "--omega-l",
        "0.5",
        "--initial-state",
        "product10",
        "--t-max",
        "1",
        "--out",
        out,
    ]);
    assert_eq!(short.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&short.stderr).contains("omega_L = 0.5"));

    let blocked = dir.path().join("file");
    fs::write(&blocked, "").unwrap();
    let io = entsim(&[
        "--mode",
        "coefficients",
        "--omega-y",
        "1",
        "--omega-l",
        "2",
        "--out",
        blocked.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(io.status.code(), Some(3));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    fs::write(
        &path,
        config(
            dir.path(),
            r#""mode": "trajectory", "omega_y": 1, "omega_L": 10, "initial_state": "ground""#,
        ),
    )
    .unwrap();
    let out = entsim(&[
        "--config",
        path.to_str().unwrap(),
        "--mode",
        "coefficients",
        "--omega-l",
        "3",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("coefficients.csv")).unwrap();
    let expected = entanglement_core::compute_raw_coefficients(1.0, 3.0).unwrap();
    let b1: f64 = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((b1 - expected.b1).abs() < 1e-12);
}
