//! CLI contract tests: exit codes, JSON input handling, and output shapes.

use std::io::Write;
use std::process::{Command, Output};

fn demonlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_demonlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_temp(content: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(content.as_bytes()).unwrap();
    f
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(demonlab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(demonlab(&["szilard", "--case", "c1"]).status.code(), Some(1));
    let out = demonlab(&["verify", "--suite", "bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn malformed_json_exits_1_with_location() {
    let f = write_temp("{ \"p_s0\": [0.5, 0.5], ");
    let out = demonlab(&["szilard", "--case", "c1", "--params", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line") && err.contains("column"), "{err}");
}

#[test]
fn c1_table_from_params_file() {
    let f = write_temp(
        r#"{
            "p_s0": [0.5, 0.5],
            "p_sigma1_given_s0": {"rows": 2, "cols": 2, "data": [0.8, 0.2, 0.2, 0.8]},
            "p_s2_given_sigma1": {"rows": 2, "cols": 2, "data": [0.9, 0.1, 0.1, 0.9]}
        }"#,
    );
    let path = f.path().to_str().unwrap();
    let out = demonlab(&["szilard", "--case", "c1", "--params", path]);
    assert_eq!(out.status.code(), Some(0));
    let table: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(table["legs"].as_array().unwrap().len(), 4);

    // matches the symmetric-kernel closed forms cell-for-cell
    let bsc_out = demonlab(&["bsc", "table", "--l", "0.5", "--alpha", "0.8", "--beta", "0.9"]);
    let bsc_table: serde_json::Value = serde_json::from_slice(&bsc_out.stdout).unwrap();
    for k in 0..4 {
        for col in ["system", "joint"] {
            let a = table["legs"][k][col]["direct"].as_f64().unwrap();
            let b = bsc_table["legs"][k][col]["closed_form"].as_f64().unwrap();
            assert!((a - b).abs() < 1e-10, "leg {k} {col}: {a} vs {b}");
        }
    }

    // markdown and csv renderings
    let md = demonlab(&["szilard", "--case", "c1", "--params", path, "--format", "markdown"]);
    assert!(String::from_utf8_lossy(&md.stdout).contains("| 1<-0 |"));
    let csv = demonlab(&[
        "szilard", "--case", "c1", "--params", path, "--format", "csv",
        "--temperature", "2.0",
    ]);
    let text = String::from_utf8_lossy(&csv.stdout).to_string();
    assert!(text.starts_with("leg,system_direct"));
    assert!(text.contains("erasure_h_sigma1"));
}

#[test]
fn q1_table_from_params_file() {
    let s = 1.0 / 2f64.sqrt();
    let f = write_temp(&format!(
        r#"{{
            "a_init": [[[{s}, 0.0], [0.0, 0.0]], [[0.0, 0.0], [{s}, 0.0]]],
            "a_meas": [
                [[1,0],[0,0],[0,0],[0,0]],
                [[0,0],[1,0],[0,0],[0,0]],
                [[0,0],[0,0],[0,0],[1,0]],
                [[0,0],[0,0],[1,0],[0,0]]
            ],
            "feedback": [
                [[[1,0],[0,0]],[[0,0],[1,0]]],
                [[[0,0],[1,0]],[[1,0],[0,0]]]
            ]
        }}"#
    ));
    let out = demonlab(&["szilard", "--case", "q1", "--params", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // perfect measurement of a uniform bit frees one bit of volume entropy
    let ln2 = std::f64::consts::LN_2;
    assert!((table["terms"]["volume_entropy_2"].as_f64().unwrap() - ln2).abs() < 1e-10);
}

#[test]
fn non_isometric_measurement_rejected() {
    let f = write_temp(
        r#"{
            "a_init": [[[1.0, 0.0]], [[0.0, 0.0]]],
            "a_meas": [
                [[1,0],[0,0],[0,0],[0,0]],
                [[0,0],[1,0],[0,0],[0,0]],
                [[0,0],[0,0],[0.5,0],[0,0]],
                [[0,0],[0,0],[0,0],[1,0]]
            ],
            "feedback": [
                [[[1,0],[0,0]],[[0,0],[1,0]]],
                [[[1,0],[0,0]],[[0,0],[1,0]]]
            ]
        }"#,
    );
    let out = demonlab(&["szilard", "--case", "q1", "--params", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("a_meas"));
}

#[test]
fn reverse_modes_and_seed_determinism() {
    let f = write_temp(
        r#"{
            "initial": [0.3, 0.2, 0.25, 0.25],
            "steps": [
                {"rows": 4, "cols": 4, "data": [
                    0.7, 0.1, 0.1, 0.2,
                    0.1, 0.7, 0.2, 0.1,
                    0.1, 0.1, 0.6, 0.2,
                    0.1, 0.1, 0.1, 0.5
                ]}
            ],
            "dim_th": 2,
            "dim_x": 2
        }"#,
    );
    let path = f.path().to_str().unwrap();
    let exact = demonlab(&["reverse", "--params", path]);
    assert_eq!(exact.status.code(), Some(0), "{}", String::from_utf8_lossy(&exact.stderr));
    let exact_v: serde_json::Value = serde_json::from_slice(&exact.stdout).unwrap();
    assert!(exact_v["sigma"]["mean_sigma"].is_f64());

    // Monte Carlo requires samples and seed
    assert_eq!(demonlab(&["reverse", "--params", path, "--mode", "mc"]).status.code(), Some(1));
    let mc = |seed: &str| {
        demonlab(&["reverse", "--params", path, "--mode", "mc", "--samples", "2000", "--seed", seed])
    };
    let a = mc("7");
    let b = mc("7");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    // Monte Carlo mean is consistent with the exact mean
    let a_v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let mean_mc = a_v["sigma"]["mean_sigma"].as_f64().unwrap();
    let se = a_v["sigma"]["std_error"].as_f64().unwrap();
    let mean_exact = exact_v["sigma"]["mean_sigma"].as_f64().unwrap();
    assert!((mean_mc - mean_exact).abs() < 5.0 * se + 1e-12);
}

#[test]
fn ledger_check_exit_codes() {
    let balanced = write_temp(
        r#"{
            "ledgers": [
                {"system": "a", "d_q": 1.0, "d_e": 1.0, "d_w": 0.0, "d_s": 0.1},
                {"system": "b", "d_q": -1.0, "d_e": -1.0, "d_w": 0.0, "d_s": -0.05}
            ],
            "thermal_edges": [["a", "b"]],
            "mechanical_edges": []
        }"#,
    );
    assert_eq!(
        demonlab(&["ledger", "check", "--params", balanced.path().to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let broken = write_temp(
        r#"{
            "ledgers": [{"system": "a", "d_q": 1.0, "d_e": 0.0, "d_w": 0.0, "d_s": 0.0}],
            "thermal_edges": [],
            "mechanical_edges": []
        }"#,
    );
    assert_eq!(
        demonlab(&["ledger", "check", "--params", broken.path().to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_out_file_and_fast_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = demonlab(&[
        "verify", "--suite", "ledger", "--seed", "1",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["overall"], "pass");
    assert_eq!(report["suite"], "ledger");
}
