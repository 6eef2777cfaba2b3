//! Every JSON document the binary prints validates against its schema in
//! `docs/schemas`.

mod support;

use serde_json::Value;
use support::{data, path, qasmap, schema};

fn validator(name: &str) -> jsonschema::Validator {
    let text = std::fs::read_to_string(schema(name)).unwrap();
    let s: Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&s).unwrap_or_else(|e| panic!("{name}: bad schema: {e}"))
}

fn assert_valid(name: &str, args: &[&str]) -> Value {
    let r = qasmap(args);
    assert!(r.code == 0 || r.code == 1, "{args:?}: exit {} {}", r.code, r.stderr);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", r.stdout));
    let v = validator(name);
    let errors: Vec<String> = v
        .iter_errors(&doc)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    assert!(errors.is_empty(), "{args:?} against {name}:\n{}", errors.join("\n"));
    doc
}

#[test]
fn degrees() {
    assert_valid(
        "degrees",
        &["degrees", "--map", path(&data("qas.map")), "--n", "3", "--json"],
    );
    assert_valid(
        "degrees",
        &["degrees", "--family", path(&data("ref.family")), "--n", "2", "--json"],
    );
}

#[test]
fn certificates() {
    for (file, n) in [("qas.map", "3"), ("ref.map", "4"), ("id.map", "2"), ("mono.map", "3")] {
        assert_valid("certificate", &["infer-qas", "--map", path(&data(file)), "--n", n]);
    }
}

#[test]
fn spectral() {
    assert_valid("spectral", &["lambda", "--d", "3", "--h", "1", "--n0", "1"]);
    assert_valid("spectral", &["lambda", "--d", "4", "--h", "4", "--n0", "1", "--n", "8"]);
    assert_valid(
        "spectral",
        &["lambda", "--d", "5", "--h", "3", "--n0", "3", "--precision", "200"],
    );
}

#[test]
fn family_documents() {
    assert_valid("family-gen", &["family-gen", "--seed", "3", "--json"]);
    for file in ["qas.family", "ref.family"] {
        assert_valid("family-check", &["family-check", "--family", path(&data(file))]);
    }
}

#[test]
fn green_documents() {
    assert_valid(
        "green-point",
        &[
            "green-point",
            "--map",
            path(&data("mono.map")),
            "--point",
            "1,i,0.5",
            "--telescope",
            "3",
        ],
    );
    assert_valid(
        "green-point",
        &[
            "green-point",
            "--family",
            path(&data("qas.family")),
            "--point",
            "0.3,1-i,0.2",
            "--precision",
            "128",
        ],
    );
    let meta = assert_valid(
        "grid-meta",
        &[
            "green-grid",
            "--family",
            path(&data("qas.family")),
            "--resolution",
            "9",
            "--n",
            "20",
            "--json",
        ],
    );
    assert!(meta["laplacian_max"].is_number());
}

#[test]
fn verify_all_documents() {
    let doc = assert_valid(
        "verify-all",
        &["verify-all", "--family", path(&data("qas.family")), "--samples", "40"],
    );
    assert_eq!(doc["passed"], true);
    let doc = assert_valid("verify-all", &["verify-all", "--map", path(&data("ref.map"))]);
    assert_eq!(doc["passed"], false);
    assert_valid(
        "verify-all",
        &["verify-all", "--map", path(&data("mono.map")), "--samples", "20"],
    );
}

#[test]
fn schemas_are_closed() {
    // An unknown field must be rejected, so the schemas really pin the shape.
    let r = qasmap(&["infer-qas", "--map", path(&data("qas.map")), "--n", "2"]);
    let mut doc: Value = serde_json::from_str(&r.stdout).unwrap();
    let v = validator("certificate");
    assert!(v.is_valid(&doc));
    doc["extra"] = Value::Bool(true);
    assert!(!v.is_valid(&doc));
}
