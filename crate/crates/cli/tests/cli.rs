use std::path::PathBuf;
use std::process::{Command, Output};

use typsub_cli::load_density_matrix;

fn typsub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_typsub")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("typsub-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    let _ = std::fs::remove_file(&path);
    path
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn presets() {
    let mixed = load_density_matrix("maximally-mixed", 3).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 1.0 / 3.0 } else { 0.0 };
            assert!((mixed.matrix()[(i, j)].re - want).abs() < 1e-15);
        }
    }
    let diag = load_density_matrix("diag:0.9,0.1", 2).unwrap();
    assert_eq!(diag.matrix()[(0, 0)].re, 0.9);
    assert_eq!(diag.matrix()[(1, 1)].re, 0.1);
    let pure = load_density_matrix("pure", 2).unwrap();
    assert_eq!(pure.matrix()[(0, 0)].re, 1.0);
    assert!(load_density_matrix("diag:0.9,0.1", 3).is_err());
    assert!(load_density_matrix("diag:0.9,x", 2).is_err());
}

#[test]
fn json_density_matrix() {
    let good = scratch("good.json");
    std::fs::write(&good, r#"{"d": 2, "re": [[0.5, 0.25], [0.25, 0.5]], "im": [[0, 0.1], [-0.1, 0]]}"#).unwrap();
    let rho = load_density_matrix(good.to_str().unwrap(), 2).unwrap();
    assert_eq!(rho.matrix()[(0, 1)].im, 0.1);

    let bad_trace = scratch("trace.json");
    std::fs::write(&bad_trace, r#"{"d": 2, "re": [[0.49, 0], [0, 0.49]], "im": [[0, 0], [0, 0]]}"#).unwrap();
    let err = load_density_matrix(bad_trace.to_str().unwrap(), 2).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    let msg = err.to_string();
    assert!(msg.contains("|tr - 1|") && msg.contains("2.000e-2"), "{msg}");

    let bad_schema = scratch("schema.json");
    std::fs::write(&bad_schema, r#"{"d": 2, "re": [[1, 0], [0, 0]]}"#).unwrap();
    assert_eq!(load_density_matrix(bad_schema.to_str().unwrap(), 2).unwrap_err().exit_code(), 1);

    assert_eq!(load_density_matrix("/nonexistent/rho.json", 2).unwrap_err().exit_code(), 1);
}

#[test]
fn overlap_curve_increases() {
    let out = typsub(&[
        "overlap-curve",
        "--d",
        "2",
        "--rho",
        "diag:0.9,0.1",
        "--h",
        "0.469",
        "--eps",
        "0.2",
        "--n",
        "16,64,256",
    ]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert!(csv.starts_with("n,overlap,delta,fidelity_lower_bound\n"));
    assert!(!csv.contains('\r'));
    let overlap = column(&csv, "overlap");
    assert_eq!(overlap.len(), 3);
    assert!(overlap.windows(2).all(|w| w[0] < w[1]), "{overlap:?}");
    for (o, d) in overlap.iter().zip(column(&csv, "delta")) {
        assert!((o + d - 1.0).abs() < 1e-11);
    }
}

#[test]
fn find_basis_json() {
    let out = typsub(&["find-basis", "--d", "2", "--rho", "pure", "--h", "0.5", "--tol", "1e-9", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let achieved = doc["achieved_entropy"].as_f64().unwrap();
    assert!((achieved - 0.5).abs() <= 1e-9);
    let t = doc["t"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&t));
    assert_eq!(doc["basis"]["re"].as_array().unwrap().len(), 2);
    assert_eq!(doc["basis"]["im"][1].as_array().unwrap().len(), 2);
}

#[test]
fn rate_table_decreases() {
    let out = typsub(&["rate-table", "--d", "2", "--h", "0.5", "--eps", "0.01", "--n", "10,100,1000"]);
    assert!(out.status.success());
    let rate = column(&stdout(&out), "rate");
    assert!(rate.windows(2).all(|w| w[1] < w[0]), "{rate:?}");
    assert!(rate[2] > 0.51 && rate[2] < 0.58, "{rate:?}");
}

#[test]
fn fidelity_curve_columns() {
    let out =
        typsub(&["fidelity-curve", "--d", "2", "--rho", "diag:0.9,0.1", "--h", "0.7", "--eps", "0.25", "--n", "4,6"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = stdout(&out);
    let f = column(&csv, "fidelity");
    let projected = column(&csv, "projected_term");
    let residual = column(&csv, "residual_term");
    let bound = column(&csv, "lower_bound");
    for i in 0..f.len() {
        assert!((f[i] - projected[i] - residual[i]).abs() < 1e-11);
        assert!(f[i] + 1e-11 >= bound[i]);
    }
}

#[test]
fn typical_stats_matches_library() {
    let out = typsub(&["typical-stats", "--d", "2", "--n", "8", "--h", "0.5", "--eps", "0.1", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let row = &doc["rows"][0];
    let keys: Vec<&String> = row.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["n", "type_classes", "cardinality", "log2_cardinality", "log2_bound", "probability"]);
    // types (1,7) and (7,1) have entropy 0.5436; 8 + 8 sequences
    assert_eq!(row["cardinality"], "16");
    assert_eq!(row["probability"].as_f64().unwrap(), 16.0 / 256.0);
}

#[test]
fn identical_runs_are_byte_identical() {
    for args in [
        &["upsilon-dim", "--d", "2", "--n", "4,5", "--h", "1", "--eps", "0.1", "--samples", "24", "--seed", "11"][..],
        &["overlap-curve", "--d", "3", "--rho", "diag:0.6,0.3,0.1", "--h", "1.4", "--eps", "0.1", "--n", "8,32"][..],
    ] {
        let mut files = Vec::new();
        for run in 0..2 {
            let path = scratch(&format!("{}-{run}.csv", args[0]));
            let mut full = args.to_vec();
            let p = path.to_str().unwrap().to_string();
            full.extend(["--output", &p]);
            assert!(typsub(&full).status.success());
            files.push(std::fs::read(&path).unwrap());
        }
        assert!(!files[0].is_empty());
        assert_eq!(files[0], files[1]);
    }
}

#[test]
fn exit_codes_and_no_partial_output() {
    let cases: [(&[&str], i32); 6] = [
        (&["rate-table", "--d", "2", "--h", "0.5", "--eps", "-1", "--n", "10"], 1),
        (&["rate-table", "--d", "two", "--h", "0.5", "--eps", "0.1", "--n", "10"], 1),
        (&["find-basis", "--d", "2", "--rho", "pure", "--h", "1.5"], 1),
        (&["overlap-curve", "--d", "2", "--rho", "/nonexistent.json", "--h", "0.5", "--eps", "0.1", "--n", "8"], 1),
        (&["fidelity-curve", "--d", "2", "--rho", "diag:0.9,0.1", "--h", "0.7", "--eps", "0.2", "--n", "14"], 2),
        (&["typical-stats", "--d", "9", "--n", "40", "--h", "2", "--eps", "0.1"], 2),
    ];
    for (i, (args, code)) in cases.iter().enumerate() {
        let path = scratch(&format!("error-{i}.csv"));
        let mut full = args.to_vec();
        let p = path.to_str().unwrap().to_string();
        full.extend(["--output", &p]);
        let out = typsub(&full);
        assert_eq!(out.status.code(), Some(*code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!path.exists(), "{args:?} wrote output");
        let stderr = String::from_utf8(out.stderr).unwrap();
        assert_eq!(stderr.trim_end().lines().count(), 1, "{stderr}");
    }
}
