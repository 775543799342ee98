use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qfidelity::measures::analyze;
use qfidelity::random::{hilbert_schmidt_state, rng};
use serde_json::{json, Value};
use tempfile::TempDir;

fn qfidelity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfidelity"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Value {
    let out = qfidelity(args);
    assert!(
        out.status.success(),
        "{args:?} exited with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

fn write_matrix(dir: &TempDir, name: &str, re: [[f64; 4]; 4]) -> PathBuf {
    let path = dir.path().join(name);
    let im = [[0.0; 4]; 4];
    let doc = json!({"basis": "AB-comp", "re": re, "im": im});
    fs::write(&path, doc.to_string()).unwrap();
    path
}

fn family_file(dir: &TempDir, value: f64) -> PathBuf {
    let path = dir.path().join(format!("family_{value}.json"));
    run_ok(&["family", &value.to_string(), "--out", path.to_str().unwrap()]);
    path
}

fn bell_file(dir: &TempDir) -> PathBuf {
    write_matrix(
        dir,
        "bell.json",
        [[0.5, 0.0, 0.0, 0.5], [0.0; 4], [0.0; 4], [0.5, 0.0, 0.0, 0.5]],
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_family_and_bell() {
    let dir = TempDir::new().unwrap();
    let r = run_ok(&["analyze", s(&family_file(&dir, 0.4))]);
    assert!((f(&r["singlet_fraction"]) - 0.4).abs() < 1e-9);
    assert!((f(&r["concurrence"]) - 0.4).abs() < 1e-9);
    assert!((f(&r["negativity"]) - 0.121110).abs() < 1e-6);
    assert_eq!(r["entangled"], true);

    let r = run_ok(&["analyze", s(&bell_file(&dir))]);
    for key in ["singlet_fraction", "concurrence", "negativity", "teleport_fidelity"] {
        assert!((f(&r[key]) - 1.0).abs() < 1e-9, "{key}");
    }
}

#[test]
fn trace_two_file_is_rejected() {
    let dir = TempDir::new().unwrap();
    let path = write_matrix(&dir, "bad.json", [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0; 4], [0.0; 4]]);
    let out = qfidelity(&["analyze", s(&path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trace"));

    let out = qfidelity(&["analyze", s(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validation_tolerance_can_be_loosened() {
    let dir = TempDir::new().unwrap();
    let e = 1e-7;
    let path = write_matrix(
        &dir,
        "loose.json",
        [[0.25 + e, 0.0, 0.0, 0.0], [0.0, 0.25, 0.0, 0.0], [0.0, 0.0, 0.25, 0.0], [0.0, 0.0, 0.0, 0.25]],
    );
    assert_eq!(qfidelity(&["analyze", s(&path)]).status.code(), Some(2));
    run_ok(&["--validation-tol", "1e-6", "analyze", s(&path)]);
}

#[test]
fn fstar_reports() {
    let dir = TempDir::new().unwrap();
    let r = run_ok(&["fstar", s(&family_file(&dir, 0.4))]);
    assert!((f(&r["fstar"]) - 8.0 / 15.0).abs() < 1e-6);
    assert!((f(&r["teleport_fidelity"]) - (2.0 * 8.0 / 15.0 + 1.0) / 3.0).abs() < 1e-6);
    assert!(f(&r["duality_gap"]).abs() < 1e-6);
    assert_eq!(r["filter_trivial"], false);
    let a = &r["filter_a"];
    let ratio = f(&a["re"][0][0]) / f(&a["re"][1][1]);
    assert!((ratio - 1.0 / 3.0).abs() < 1e-4, "{ratio}");
    assert!(f(&a["re"][0][1]).abs() < 1e-6 && f(&a["re"][1][0]).abs() < 1e-6);

    let r = run_ok(&["fstar", s(&family_file(&dir, 0.8))]);
    assert!((f(&r["fstar"]) - 0.8).abs() < 1e-6);
    assert_eq!(r["filter_trivial"], true);

    let mixed = write_matrix(
        &dir,
        "mixed.json",
        [[0.25, 0.0, 0.0, 0.0], [0.0, 0.25, 0.0, 0.0], [0.0, 0.0, 0.25, 0.0], [0.0, 0.0, 0.0, 0.25]],
    );
    let r = run_ok(&["fstar", s(&mixed)]);
    assert_eq!(f(&r["fstar"]), 0.5);
    assert_eq!(f(&r["mixing_p"]), 0.0);
}

#[test]
fn fstar_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let path = family_file(&dir, 0.55);
    let a = qfidelity(&["fstar", s(&path)]);
    let b = qfidelity(&["fstar", s(&path)]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn normal_form_reports() {
    let dir = TempDir::new().unwrap();
    // Werner state 0.6|ψ−⟩⟨ψ−| + 0.1 I.
    let werner = write_matrix(
        &dir,
        "werner.json",
        [[0.1, 0.0, 0.0, 0.0], [0.0, 0.4, -0.3, 0.0], [0.0, -0.3, 0.4, 0.0], [0.0, 0.0, 0.0, 0.1]],
    );
    let r = run_ok(&["normal-form", s(&werner)]);
    assert!((f(&r["fidelity_nf"]) - 0.7).abs() < 1e-9);

    let r = run_ok(&["normal-form", s(&family_file(&dir, 0.4))]);
    assert!(f(&r["fidelity_nf"]) > 0.5);
    assert_eq!(r["entangled"], true);

    let product = write_matrix(&dir, "00.json", [[1.0, 0.0, 0.0, 0.0], [0.0; 4], [0.0; 4], [0.0; 4]]);
    let out = qfidelity(&["normal-form", s(&product)]);
    assert_eq!(out.status.code(), Some(4));
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("nx,ny,nz,ox,oy,oz"));
    lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn bloch_image_of_bell_state() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bell.csv");
    let summary = run_ok(&["bloch-image", s(&bell_file(&dir)), "--mode", "lu", "-n", "100", "--out", s(&out)]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 100);
    for row in rows {
        let norm = (row[3] * row[3] + row[4] * row[4] + row[5] * row[5]).sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
    }
    let sidecar: Value = serde_json::from_str(&fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(sidecar, summary);
    assert!((f(&sidecar["avg_fidelity"]) - 1.0).abs() < 1e-12);
    assert_eq!(sidecar["m"].as_array().unwrap().len(), 3);
    assert_eq!(sidecar["c"].as_array().unwrap().len(), 3);
}

#[test]
fn bloch_image_modes_and_determinism() {
    let dir = TempDir::new().unwrap();
    let state = family_file(&dir, 0.4);
    let image = |mode: &str, name: &str| {
        let out = dir.path().join(name);
        let v = run_ok(&["bloch-image", s(&state), "--mode", mode, "-n", "200", "--seed", "5", "--out", s(&out)]);
        (v, fs::read(&out).unwrap())
    };
    let (lu, lu_csv) = image("lu", "lu.csv");
    let (locc, _) = image("locc", "locc.csv");
    let (slocc, _) = image("slocc", "slocc.csv");
    assert!((f(&lu["avg_fidelity"]) - 0.6).abs() < 1e-9);
    assert!((f(&locc["avg_fidelity"]) - 31.0 / 45.0).abs() < 1e-6);
    let nf = run_ok(&["normal-form", s(&state)]);
    let want = (2.0 * f(&nf["fidelity_nf"]) + 1.0) / 3.0;
    assert!((f(&slocc["avg_fidelity"]) - want).abs() < 1e-9);

    let (_, again) = image("lu", "lu_again.csv");
    assert_eq!(lu_csv, again);
}

#[test]
fn random_states_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("states");
    let r = run_ok(&["random", "--count", "10", "--rank", "4", "--seed", "7", "--out", s(&out)]);
    let files: Vec<PathBuf> = r["files"].as_array().unwrap().iter().map(|p| p.as_str().unwrap().into()).collect();
    assert_eq!(files.len(), 10);

    let mut gen = rng(7);
    for path in &files {
        let rho = hilbert_schmidt_state(&mut gen, 4).unwrap();
        let want = analyze(&rho).unwrap();
        let got = run_ok(&["analyze", s(path)]);
        assert!((f(&got["singlet_fraction"]) - want.singlet_fraction).abs() < 1e-12);
        assert!((f(&got["concurrence"]) - want.concurrence).abs() < 1e-12);
        assert!((f(&got["negativity"]) - want.negativity).abs() < 1e-12);
    }

    let again = dir.path().join("again");
    run_ok(&["random", "--count", "10", "--rank", "4", "--seed", "7", "--out", s(&again)]);
    for path in &files {
        let name = path.file_name().unwrap();
        assert_eq!(fs::read(path).unwrap(), fs::read(again.join(name)).unwrap());
    }
}

#[test]
fn random_rank_one_states_are_pure() {
    let dir = TempDir::new().unwrap();
    let r = run_ok(&["random", "--count", "5", "--rank", "1", "--seed", "2", "--out", s(dir.path())]);
    for path in r["files"].as_array().unwrap() {
        let v: Value = serde_json::from_str(&fs::read_to_string(path.as_str().unwrap()).unwrap()).unwrap();
        let entry = |i: usize, j: usize| (f(&v["re"][i][j]), f(&v["im"][i][j]));
        // Tr ρ² = Σ |ρ_ij|².
        let purity: f64 = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| {
                let (re, im) = entry(i, j);
                re * re + im * im
            })
            .sum();
        assert!((purity - 1.0).abs() < 1e-12);
    }
    assert_eq!(qfidelity(&["random", "--rank", "5", "--out", s(dir.path())]).status.code(), Some(2));
}

#[test]
fn verify_passes() {
    let r = run_ok(&["verify"]);
    assert_eq!(r["n_states"], 200);
    assert_eq!(r["passed"], true);
    assert!(r["suites"].as_array().unwrap().iter().all(|s| s["passed"] == true));
}

#[test]
fn verify_catches_wrong_transpose_convention() {
    let out = qfidelity(&["verify", "-n", "10", "--inject-transpose-bug"]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let suite = r["suites"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["name"] == "k-cost-consistency")
        .unwrap();
    assert_eq!(suite["passed"], false);
    // The failing case carries the state and filters needed to replay it.
    let failure = &suite["failure"];
    assert_eq!(failure["state"]["basis"], "AB-comp");
    assert_eq!(failure["filters"].as_array().unwrap().len(), 2);
}
