//! End-to-end CLI tests against the built `ngf` binary.

use std::path::Path;
use std::process::{Command, Output};

fn ngf(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ngf"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn assert_code(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        stdout(output),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn init_schema_vertex_edge_query_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    assert_code(&ngf(&["init", "store.ngf", "--seed", "1"], d), 0);
    assert_code(
        &ngf(
            &[
                "schema",
                "add",
                "store.ngf",
                "--side",
                "vertex",
                "--json",
                r#"{"type_name":"Face","keys":{"embedding":{"tensor":{"shape":[2],"axes":["anonymous"]}},"name":{"string":null}}}"#,
            ],
            d,
        ),
        0,
    );
    assert_code(
        &ngf(
            &[
                "schema",
                "add",
                "store.ngf",
                "--side",
                "edge",
                "--json",
                r#"{"type_name":"KNOWS"}"#,
            ],
            d,
        ),
        0,
    );

    let a = ngf(
        &[
            "vertex",
            "add",
            "store.ngf",
            "--type",
            "Face",
            "--attrs",
            r#"{"embedding":{"tensor":{"shape":[2],"data":[1.0,2.0]}},"name":{"string":"alice"}}"#,
            "--seed",
            "2",
        ],
        d,
    );
    assert_code(&a, 0);
    let a_id = stdout(&a).trim().to_string();

    let b = ngf(
        &[
            "vertex",
            "add",
            "store.ngf",
            "--type",
            "Face",
            "--attrs",
            r#"{"embedding":{"tensor":{"shape":[2],"data":[1.0,2.0]}},"name":{"string":"bob"}}"#,
            "--seed",
            "3",
        ],
        d,
    );
    assert_code(&b, 0);
    let b_id = stdout(&b).trim().to_string();

    let edge = ngf(
        &[
            "edge",
            "add",
            "store.ngf",
            "--type",
            "KNOWS",
            "--source",
            &a_id,
            "--target",
            &b_id,
            "--seed",
            "4",
        ],
        d,
    );
    assert_code(&edge, 0);

    // superposed edge with direction amplitudes
    let superposed = ngf(
        &[
            "edge",
            "add",
            "store.ngf",
            "--type",
            "KNOWS",
            "--source",
            &a_id,
            "--target",
            &b_id,
            "--amplitudes",
            "0.6,0.8,0",
            "--seed",
            "5",
        ],
        d,
    );
    assert_code(&superposed, 0);

    let query = ngf(
        &[
            "query",
            "store.ngf",
            "--entity",
            "vertex",
            "--type",
            "Face",
            "--key",
            "name",
            "--equals",
            r#"{"string":"alice"}"#,
        ],
        d,
    );
    assert_code(&query, 0);
    let query_text = stdout(&query);
    let lines: Vec<&str> = query_text.lines().collect();
    assert_eq!(lines.len(), 1);
    assert!(lines[0].contains(&a_id));

    let edges = ngf(&["query", "store.ngf", "--entity", "edge"], d);
    assert_code(&edges, 0);
    assert_eq!(stdout(&edges).lines().count(), 2);
}

#[test]
fn calibrate_reports_balanced_error_rates() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("pairs.csv"),
        "distance,label\n0.1,same\n0.2,same\n0.3,same\n0.4,same\n0.35,diff\n0.5,diff\n0.6,diff\n0.7,diff\n",
    )
    .unwrap();
    let out = ngf(
        &["calibrate", "pairs.csv", "--alpha", "1", "--beta", "0"],
        d,
    );
    assert_code(&out, 0);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // fnr ≈ fpr at the returned threshold on this sample (sweep oracle)
    assert_eq!(json["fnr_at_t"], json["fpr_at_t"]);
    assert!((json["threshold"].as_f64().unwrap() - 0.375).abs() <= 1e-12);
}

#[test]
fn flow_check_unbalanced_path_exits_2_with_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_code(&ngf(&["init", "store.ngf", "--seed", "1"], d), 0);
    assert_code(
        &ngf(
            &[
                "schema",
                "add",
                "store.ngf",
                "--side",
                "vertex",
                "--json",
                r#"{"type_name":"node"}"#,
            ],
            d,
        ),
        0,
    );
    assert_code(
        &ngf(
            &[
                "schema",
                "add",
                "store.ngf",
                "--side",
                "edge",
                "--json",
                r#"{"type_name":"pipe"}"#,
            ],
            d,
        ),
        0,
    );
    let mut ids = Vec::new();
    for seed in 0..3 {
        let v = ngf(
            &[
                "vertex",
                "add",
                "store.ngf",
                "--type",
                "node",
                "--seed",
                &seed.to_string(),
            ],
            d,
        );
        assert_code(&v, 0);
        ids.push(stdout(&v).trim().to_string());
    }
    let ab = ngf(
        &[
            "edge",
            "add",
            "store.ngf",
            "--type",
            "pipe",
            "--source",
            &ids[0],
            "--target",
            &ids[1],
            "--seed",
            "10",
        ],
        d,
    );
    assert_code(&ab, 0);
    let ab_id = stdout(&ab).trim().to_string();
    let bc = ngf(
        &[
            "edge",
            "add",
            "store.ngf",
            "--type",
            "pipe",
            "--source",
            &ids[1],
            "--target",
            &ids[2],
            "--seed",
            "11",
        ],
        d,
    );
    assert_code(&bc, 0);
    let bc_id = stdout(&bc).trim().to_string();

    let scenario = serde_json::json!({
        "cargo": {"cargo_id": "water", "unit": "l"},
        "edges": [
            {"edge_id": ab_id, "flux": 5.0},
            {"edge_id": bc_id, "flux": 4.0},
        ],
        "sources": [ids[0]],
        "sinks": [ids[2]],
    });
    std::fs::write(d.join("scenario.json"), scenario.to_string()).unwrap();

    let out = ngf(&["flow", "check", "store.ngf", "scenario.json"], d);
    assert_code(&out, 2);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["passed"], serde_json::json!(false));
    assert_eq!(
        report["conservation"][0]["vertex"],
        serde_json::json!(ids[1])
    );
    assert!((report["conservation"][0]["residual"].as_f64().unwrap() - 1.0).abs() <= 1e-12);

    // a balanced circulation passes with exit 0
    let balanced = serde_json::json!({
        "cargo": {"cargo_id": "water", "unit": "l"},
        "edges": [
            {"edge_id": ab_id, "flux": 5.0},
            {"edge_id": bc_id, "flux": 5.0},
        ],
        "sources": [ids[0]],
        "sinks": [ids[2]],
    });
    std::fs::write(d.join("balanced.json"), balanced.to_string()).unwrap();
    assert_code(&ngf(&["flow", "check", "store.ngf", "balanced.json"], d), 0);

    // max flow over declared capacities
    let caps = serde_json::json!({
        "cargo": {"cargo_id": "water", "unit": "l"},
        "edges": [
            {"edge_id": ab_id, "flux": 0.0, "capacity": 7.0},
            {"edge_id": bc_id, "flux": 0.0, "capacity": 3.0},
        ],
    });
    std::fs::write(d.join("caps.json"), caps.to_string()).unwrap();
    let out = ngf(
        &[
            "flow",
            "maxflow",
            "store.ngf",
            "caps.json",
            "--source",
            &ids[0],
            "--sink",
            &ids[2],
        ],
        d,
    );
    assert_code(&out, 0);
    let result: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(result["value"], serde_json::json!(3.0));
}

#[test]
fn hypergram_cycle_and_topology() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_code(&ngf(&["init", "store.ngf", "--seed", "1"], d), 0);

    let cell = ngf(
        &[
            "hypergram",
            "create",
            "store.ngf",
            "--kind",
            "histogram",
            "--bins",
            "2",
            "--shards",
            "4",
            "--seed",
            "2",
        ],
        d,
    );
    assert_code(&cell, 0);
    let cell_id = stdout(&cell).trim().to_string();

    assert_code(
        &ngf(
            &[
                "hypergram",
                "accumulate",
                "store.ngf",
                "--cell",
                &cell_id,
                "--delta",
                r#"{"histogram":[1.0,0.0]}"#,
            ],
            d,
        ),
        0,
    );
    assert_code(
        &ngf(
            &[
                "hypergram",
                "accumulate",
                "store.ngf",
                "--cell",
                &cell_id,
                "--delta",
                r#"{"histogram":[0.0,2.0]}"#,
                "--shard",
                "3",
            ],
            d,
        ),
        0,
    );
    let out = ngf(
        &["hypergram", "reconcile", "store.ngf", "--cell", &cell_id],
        d,
    );
    assert_code(&out, 0);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["value"]["histogram"], serde_json::json!([1.0, 2.0]));
    assert_eq!(json["version"], serde_json::json!(1));

    // shape mismatch is a data error: exit 2
    let bad = ngf(
        &[
            "hypergram",
            "accumulate",
            "store.ngf",
            "--cell",
            &cell_id,
            "--delta",
            r#"{"histogram":[1.0,0.0,0.0]}"#,
        ],
        d,
    );
    assert_code(&bad, 2);

    assert_code(
        &ngf(
            &[
                "topology",
                "generate",
                "store.ngf",
                "--extents",
                "3x3",
                "--seed",
                "5",
            ],
            d,
        ),
        0,
    );
    let describe = ngf(
        &["topology", "describe", "store.ngf", "--metric-dim", "2"],
        d,
    );
    assert_code(&describe, 0);
    let json: serde_json::Value = serde_json::from_str(&stdout(&describe)).unwrap();
    assert_eq!(json["connectional_dimensionality"], serde_json::json!(4));
}

#[test]
fn kernel_compare_from_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_code(&ngf(&["init", "store.ngf", "--seed", "1"], d), 0);
    assert_code(
        &ngf(
            &[
                "schema",
                "add",
                "store.ngf",
                "--side",
                "vertex",
                "--json",
                r#"{"type_name":"T","keys":{"e":{"tensor":{"shape":[4],"axes":["anonymous"]}}}}"#,
            ],
            d,
        ),
        0,
    );
    let mut ids = Vec::new();
    for (seed, data) in [(2, "[1.0,0.0,0.0,0.0]"), (3, "[0.0,1.0,0.0,0.0]")] {
        let v = ngf(
            &[
                "vertex",
                "add",
                "store.ngf",
                "--type",
                "T",
                "--attrs",
                &format!(r#"{{"e":{{"tensor":{{"shape":[4],"data":{data}}}}}}}"#),
                "--seed",
                &seed.to_string(),
            ],
            d,
        );
        assert_code(&v, 0);
        ids.push(stdout(&v).trim().to_string());
    }

    // dirac at epsilon 0: differing tensors are unequal
    let exact = ngf(
        &[
            "kernel-compare",
            "store.ngf",
            "--a",
            &ids[0],
            "--b",
            &ids[1],
            "--mask",
            "e",
            "--epsilon",
            "0",
        ],
        d,
    );
    assert_code(&exact, 0);
    let json: serde_json::Value = serde_json::from_str(&stdout(&exact)).unwrap();
    assert_eq!(json["verdict"], serde_json::json!(false));

    // gaussian sigma 2 at epsilon 0.5: smoothing overlaps the peaks
    let smoothed = ngf(
        &[
            "kernel-compare",
            "store.ngf",
            "--a",
            &ids[0],
            "--b",
            &ids[1],
            "--mask",
            "e",
            "--sigma",
            "2",
            "--epsilon",
            "0.5",
        ],
        d,
    );
    assert_code(&smoothed, 0);
    let json: serde_json::Value = serde_json::from_str(&stdout(&smoothed)).unwrap();
    assert_eq!(json["verdict"], serde_json::json!(true));
}

#[test]
fn import_export_roundtrip_via_cli() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_code(&ngf(&["init", "a.ngf", "--seed", "1"], d), 0);
    let schema = r#"{"type_name":"Face","keys":{"name":{"string":null}}}"#;
    assert_code(
        &ngf(
            &[
                "schema", "add", "a.ngf", "--side", "vertex", "--json", schema,
            ],
            d,
        ),
        0,
    );
    assert_code(
        &ngf(
            &[
                "vertex",
                "add",
                "a.ngf",
                "--type",
                "Face",
                "--attrs",
                r#"{"name":{"string":"zoe"}}"#,
                "--seed",
                "2",
            ],
            d,
        ),
        0,
    );
    assert_code(&ngf(&["export", "a.ngf", "dump.jsonl"], d), 0);

    assert_code(&ngf(&["init", "b.ngf", "--seed", "3"], d), 0);
    assert_code(
        &ngf(
            &[
                "schema", "add", "b.ngf", "--side", "vertex", "--json", schema,
            ],
            d,
        ),
        0,
    );
    let imported = ngf(&["import", "b.ngf", "dump.jsonl", "--seed", "4"], d);
    assert_code(&imported, 0);
    assert!(stdout(&imported).contains("imported 1 vertices"));

    let query = ngf(&["query", "b.ngf", "--entity", "vertex"], d);
    assert_code(&query, 0);
    assert!(stdout(&query).contains("zoe"));
}

#[test]
fn exit_codes_for_usage_data_and_io() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    // usage: unknown flag
    assert_code(&ngf(&["init", "store.ngf", "--bogus"], d), 1);
    // usage: bad side value
    assert_code(&ngf(&["init", "store.ngf", "--seed", "1"], d), 0);
    assert_code(
        &ngf(
            &[
                "schema",
                "add",
                "store.ngf",
                "--side",
                "middle",
                "--json",
                "{}",
            ],
            d,
        ),
        1,
    );
    // data: adding a vertex of an unregistered type
    assert_code(
        &ngf(
            &[
                "vertex",
                "add",
                "store.ngf",
                "--type",
                "Ghost",
                "--seed",
                "2",
            ],
            d,
        ),
        2,
    );
    // data: duplicate schema registration
    let schema = r#"{"type_name":"T"}"#;
    assert_code(
        &ngf(
            &[
                "schema",
                "add",
                "store.ngf",
                "--side",
                "vertex",
                "--json",
                schema,
            ],
            d,
        ),
        0,
    );
    assert_code(
        &ngf(
            &[
                "schema",
                "add",
                "store.ngf",
                "--side",
                "vertex",
                "--json",
                schema,
            ],
            d,
        ),
        2,
    );
    // i/o: missing store file
    assert_code(&ngf(&["export", "missing.ngf", "out.jsonl"], d), 3);
    // help exits 0
    assert_code(&ngf(&["--help"], d), 0);
}
