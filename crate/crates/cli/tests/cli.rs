use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

use mgc_core::{matchgate_twirl, vacuum_projector, vacuum_state, OperatorExpansion, C64};

fn mgc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mgc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn dim_table() {
    let rows = json_of(&mgc(&["dim", "--n", "1..3", "--k", "2"]));
    let dims: Vec<u64> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            assert_eq!(r["dim_matchgate"], r["dim_clifford_matchgate"]);
            r["dim_matchgate"].as_u64().unwrap()
        })
        .collect();
    assert_eq!(dims, [3, 5, 7]);

    let rows = json_of(&mgc(&["dim", "--n", "1", "--k", "3..4"]));
    assert_eq!(rows[0]["dim_matchgate"], 10);
    assert_eq!(rows[0]["equal"], true);
    assert_eq!(rows[1]["dim_matchgate"], 35);
    assert_eq!(rows[1]["dim_clifford_matchgate"], 36);
    assert_eq!(rows[1]["equal"], false);
}

#[test]
fn gt_basis_metadata() {
    let doc = json_of(&mgc(&["basis", "--n", "1", "--k", "2", "--which", "gt"]));
    assert_eq!(doc["size"], 3);
    assert_eq!(doc["elements"].as_array().unwrap().len(), 3);
    assert_eq!(doc["gram_is_identity"], true);
    let doc = json_of(&mgc(&[
        "basis", "--n", "1", "--k", "4", "--which", "pattern",
    ]));
    assert_eq!(doc["size"], 36);
    assert_eq!(doc["gram_is_identity"], true);
    let doc = json_of(&mgc(&[
        "basis", "--n", "1", "--k", "4", "--which", "pairing",
    ]));
    assert_eq!(doc["span_rank"], 35);
}

#[test]
fn sre_lists_both_modes() {
    let rows = json_of(&mgc(&["sre", "--n", "2"]));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for (r, mode) in rows.iter().zip(["closed", "direct"]) {
        assert_eq!(r["mode"], mode);
        assert!((r["value"].as_f64().unwrap() - 1.25f64.log2()).abs() < 1e-9);
    }
}

#[test]
fn twirl_of_replicated_vacuum() {
    let input = scratch("vac.json");
    std::fs::write(&input, vacuum_state(1, 2).unwrap().to_json().to_string()).unwrap();
    let out = json_of(&mgc(&["twirl", "--input", input.to_str().unwrap()]));
    let t = OperatorExpansion::from_json(&out).unwrap();
    let want = vacuum_projector(1, 2).unwrap().scale_real(0.5);
    assert!(t.max_abs_diff(&want) < 1e-10);
}

#[test]
fn basis_round_trip_through_twirl() {
    let basis = scratch("basis.json");
    let out = mgc(&[
        "basis",
        "--n",
        "1",
        "--k",
        "3",
        "--out",
        basis.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let w = OperatorExpansion::from_keys(
        1,
        3,
        (0..40u64).map(|i| {
            (
                (i * 7 + 3) % 64,
                C64::new(1.0 / (1.0 + i as f64), (i % 5) as f64 - 2.0),
            )
        }),
    )
    .unwrap();
    let input = scratch("w.json");
    std::fs::write(&input, w.to_json().to_string()).unwrap();
    let out = json_of(&mgc(&[
        "twirl",
        "--input",
        input.to_str().unwrap(),
        "--basis",
        basis.to_str().unwrap(),
    ]));
    let projected = OperatorExpansion::from_json(&out).unwrap();
    assert!(projected.max_abs_diff(&matchgate_twirl(&w).unwrap()) < 1e-10);
}

#[test]
fn monte_carlo_output_is_deterministic() {
    let args = [
        "frame-potential",
        "--n",
        "1",
        "--k",
        "2",
        "--kind",
        "unitary",
        "--mode",
        "mc",
        "--samples",
        "500",
        "--seed",
        "7",
        "--format",
        "csv",
    ];
    let a = mgc(&args);
    let b = mgc(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let value = text.lines().nth(1).unwrap().split(',').nth(4).unwrap();
    // 17 significant digits in scientific notation
    assert!(value.contains('e'));
    assert_eq!(
        value
            .split('e')
            .next()
            .unwrap()
            .replace(['.', '-'], "")
            .len(),
        17
    );
}

#[test]
fn nongauss_measures() {
    let state = scratch("state.json");
    std::fs::write(&state, "[0.5, 0.5, -0.5, 0.5]").unwrap();
    let rows = json_of(&mgc(&["nongauss", "--state", state.to_str().unwrap()]));
    let faf = rows[0]["value"].as_f64().unwrap();
    let phi0 = rows[1]["value"].as_f64().unwrap();
    assert!(faf > 0.01);
    assert!(phi0 < 1.0 - 1e-3);
    let vac = scratch("vac-state.json");
    std::fs::write(&vac, "[[1, 0], [0, 0]]").unwrap();
    let rows = json_of(&mgc(&["nongauss", "--state", vac.to_str().unwrap()]));
    assert!(rows[0]["value"].as_f64().unwrap().abs() < 1e-12);
    assert!((rows[1]["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(rows[2]["value"].as_f64().unwrap() < 1e-10);
}

#[test]
fn exit_codes() {
    assert_eq!(mgc(&["dim", "--n", "x"]).status.code(), Some(2));
    assert_eq!(
        mgc(&["basis", "--n", "9", "--k", "5"]).status.code(),
        Some(3)
    );
    let bad = scratch("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(
        mgc(&["twirl", "--input", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let unnormalized = scratch("unnormalized.json");
    std::fs::write(&unnormalized, "[1, 1]").unwrap();
    assert_eq!(
        mgc(&["nongauss", "--state", unnormalized.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn quick_verify_report() {
    let start = std::time::Instant::now();
    let out = mgc(&["verify", "--level", "quick", "--seed", "3"]);
    assert!(start.elapsed().as_secs() < 60);
    let rows: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 12);
    let any_failed = rows.iter().any(|r| r["status"] == "fail");
    assert!(rows
        .iter()
        .all(|r| ["pass", "fail", "skipped"].contains(&r["status"].as_str().unwrap())));
    assert_eq!(out.status.code(), Some(if any_failed { 1 } else { 0 }));
}
