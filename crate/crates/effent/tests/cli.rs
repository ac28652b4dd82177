//! End-to-end tests of the `effent` binary: output schemas, determinism,
//! and exit-code conventions.

use std::process::{Command, Output};

fn effent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_effent"))
        .args(args)
        .env_remove("EFFENT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_state(path: &std::path::Path, rho: &effent::qcore::DensityMatrix) {
    let json = serde_json::to_string(&effent::io::DensityJson::from_density(rho)).unwrap();
    std::fs::write(path, json).unwrap();
}

#[test]
fn quality_of_named_channels() {
    let out = stdout_json(&effent(&["quality", "--channel", "amplitude-damping:0.36"]));
    assert!((out["q"].as_f64().unwrap() - 0.8).abs() < 1e-9);

    let out = stdout_json(&effent(&["quality", "--channel", "identity:3", "--d", "3"]));
    assert!((out["q"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    // SSR dephasing breaks entanglement entirely
    let out = stdout_json(&effent(&["quality", "--channel", "ssr"]));
    assert!(out["q"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn gconc_and_effective_on_bell_state() {
    let dir = std::env::temp_dir().join("effent_cli_test_bell");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bell.json");
    let bell = effent::qcore::max_entangled(2).unwrap().density();
    write_state(&path, &bell);
    let path = path.to_str().unwrap();

    let out = stdout_json(&effent(&["gconc", "--state", path]));
    assert_eq!(out["method"], "pure");
    assert!((out["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let out = stdout_json(&effent(&[
        "effective",
        "--state",
        path,
        "--channel-a",
        "identity",
        "--channel-b",
        "amplitude-damping:0.36",
    ]));
    assert_eq!(out["kind"], "exact");
    assert!((out["value"].as_f64().unwrap() - 0.8).abs() < 1e-9);
    assert!((out["q_a"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((out["q_b"].as_f64().unwrap() - 0.8).abs() < 1e-9);
}

#[test]
fn bec_subcommand_matches_closed_form() {
    let out = stdout_json(&effent(&["bec", "--dist", "wrapped-normal:0,1.0", "--theta", "0.7"]));
    let expected = (-0.5f64).exp();
    assert!((out["g_abs"].as_f64().unwrap() - expected).abs() < 1e-9);
    assert!((out["q_factor"].as_f64().unwrap() - expected).abs() < 1e-6);

    // exact simulation agrees with the α² → ∞ limit at modest α²
    let out = stdout_json(&effent(&[
        "bec",
        "--dist",
        "delta:0.0",
        "--theta",
        "0.5",
        "--exact",
        "--alpha-sq",
        "100",
        "--trunc",
        "170",
    ]));
    assert!(out["exact"]["distance_to_limit"].as_f64().unwrap() < 1e-2);
    assert!(out["exact"]["norm_loss"].as_f64().unwrap() < 1e-6);
}

#[test]
fn sweep_writes_csv() {
    let dir = std::env::temp_dir().join("effent_cli_test_sweep");
    std::fs::create_dir_all(&dir).unwrap();
    let csv_path = dir.join("sweep.csv");
    let out = effent(&[
        "sweep",
        "--family",
        "wrapped-normal",
        "--sigma",
        "0:2:0.5",
        "--theta",
        "0.7",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "param,g_abs,q_factor");
    assert_eq!(lines.len(), 6); // header + inclusive grid 0,0.5,...,2
    let first: Vec<&str> = lines[1].split(',').collect();
    assert!((first[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn deterministic_output_is_byte_identical() {
    let dir = std::env::temp_dir().join("effent_cli_test_det");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("mixed.json");
    // rank-2 mixed two-qubit state: the roof optimizer's stochastic restarts
    // must still give byte-identical output for a fixed seed
    use effent::qcore::cr;
    let bell = effent::qcore::max_entangled(2).unwrap().density();
    let product = effent::qcore::PureState::from_amplitudes(
        &[cr(1.0), cr(0.0), cr(0.0), cr(0.0)],
        vec![2, 2],
    )
    .unwrap()
    .density();
    let m = bell.matrix() * cr(0.7) + product.matrix() * cr(0.3);
    let rho = effent::qcore::DensityMatrix::new(m, vec![2, 2], 1e-9).unwrap();
    write_state(&path, &rho);
    let path = path.to_str().unwrap();

    let a = effent(&["gconc", "--state", path, "--seed", "7", "--restarts", "4"]);
    let b = effent(&["gconc", "--state", path, "--seed", "7", "--restarts", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    // EFFENT_SEED env var acts as the fallback seed
    let c = Command::new(env!("CARGO_BIN_EXE_effent"))
        .args(["gconc", "--state", path, "--restarts", "4"])
        .env("EFFENT_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(c.stdout, a.stdout);
}

#[test]
fn exit_codes_classify_errors() {
    // validation failure: exit 2, no partial stdout
    let out = effent(&["quality", "--channel", "amplitude-damping:1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    let out = effent(&["bec", "--dist", "double-rect:3.0,1.0", "--theta", "0.5"]);
    assert_eq!(out.status.code(), Some(2));

    // numerical failure: severe truncation makes the exact simulation lose norm
    let out = effent(&[
        "bec", "--dist", "delta:0.0", "--theta", "0.5", "--exact",
        "--alpha-sq", "100", "--trunc", "40",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());

    // missing file names the problem on stderr
    let out = effent(&["gconc", "--state", "/nonexistent/state.json"]);
    assert_eq!(out.status.code(), Some(2));
}
