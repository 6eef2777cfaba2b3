mod support;

use serde_json::Value;
use support::{data, path, qasmap, qasmap_env};

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("invalid JSON ({e}):\n{s}"))
}

#[test]
fn degrees_of_shipped_maps() {
    let r = qasmap(&["degrees", "--map", path(&data("qas.map")), "--n", "4"]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "1 3 8 21 55\n"));
    // The literal reference instance loses degree twice per step.
    let r = qasmap(&["degrees", "--map", path(&data("ref.map")), "--n", "4"]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "1 3 7 16 37\n"));
    let r = qasmap(&["degrees", "--family", path(&data("ref.family")), "--n", "3"]);
    assert_eq!(r.stdout, "1 3 7 16\n");
}

#[test]
fn identity_is_stable() {
    let r = qasmap(&["infer-qas", "--map", path(&data("id.map")), "--n", "3"]);
    assert_eq!(r.code, 0);
    let v = json(&r.stdout);
    assert_eq!(v["verdict"], "AS");
    assert_eq!(v["degrees"], serde_json::json!(["1", "1", "1", "1"]));
}

#[test]
fn certificate_fields() {
    let r = qasmap(&["infer-qas", "--map", path(&data("qas.map")), "--n", "4"]);
    assert_eq!(r.code, 0);
    let v = json(&r.stdout);
    assert_eq!(v["verdict"], "QAS");
    assert_eq!(v["n0"], 1);
    assert_eq!(v["H"], "z");
    assert_eq!((v["h"].as_u64(), v["d"].as_u64()), (Some(1), Some(3)));
    assert_eq!(v["verified_to"], 4);
    assert_eq!(v["degrees"], serde_json::json!(["1", "3", "8", "21", "55"]));

    let r = qasmap(&["infer-qas", "--map", path(&data("ref.map")), "--n", "4"]);
    assert_eq!(r.code, 1);
    let v = json(&r.stdout);
    assert_eq!(
        (v["verdict"].as_str(), v["witness"].as_u64()),
        (Some("NotQAS"), Some(3))
    );
}

#[test]
fn lambda_report() {
    let r = qasmap(&["lambda", "--d", "3", "--h", "1", "--n0", "1", "--precision", "256"]);
    assert_eq!(r.code, 0);
    let v = json(&r.stdout);
    let lam = (3.0 + 5f64.sqrt()) / 2.0;
    assert!((v["lambda_f64"].as_f64().unwrap() - lam).abs() < 1e-15);
    assert!(v["lambda"]
        .as_str()
        .unwrap()
        .starts_with("2.618033988749894848204586834365638117720"));
    assert_eq!(v["r"], 1);
    // t^2 - 4t + 4 has a double root at 2.
    let v = json(&qasmap(&["lambda", "--d", "4", "--h", "4", "--n0", "1"]).stdout);
    assert_eq!((v["r"].as_u64(), v["lambda_f64"].as_f64()), (Some(2), Some(2.0)));
    // d = 3, h = 2: the dominant root is 2 with P(1) = 0 exactly.
    let v = json(&qasmap(&["lambda", "--d", "3", "--h", "2", "--n0", "1", "--n", "3"]).stdout);
    assert_eq!(v["degrees"], serde_json::json!(["1", "3", "7", "15"]));
}

#[test]
fn exit_codes() {
    // input errors
    assert_eq!(qasmap(&["degrees", "--map", "/nonexistent.map", "--n", "2"]).code, 2);
    assert_eq!(
        qasmap(&["lambda", "--d", "3", "--h", "2", "--n0", "1", "--precision", "16"]).code,
        2
    );
    assert_eq!(qasmap(&["lambda", "--d", "2", "--h", "1", "--n0", "1"]).code, 2);
    assert_eq!(qasmap(&["frobnicate"]).code, 2);
    assert_eq!(qasmap(&["degrees", "--n", "2"]).code, 2);
    let bad = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(bad.path(), "vars z w t\nmap z^2\nmap w^2\nmap t\n").unwrap();
    let r = qasmap(&["degrees", "--map", path(bad.path()), "--n", "2"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("degree"));
    // resource caps
    let r = qasmap(&["degrees", "--map", path(&data("qas.map")), "--n", "30"]);
    assert_eq!(r.code, 3);
    let r = qasmap(&[
        "degrees",
        "--map",
        path(&data("qas.map")),
        "--n",
        "4",
        "--max-terms",
        "50",
    ]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    // negative verdicts
    assert_eq!(qasmap(&["verify-all", "--map", path(&data("ref.map"))]).code, 1);
    let r = qasmap(&["green-point", "--map", path(&data("ref.map")), "--point", "1,2,3"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("no stability certificate"));
    // help is not an error
    assert_eq!(qasmap(&["--help"]).code, 0);
}

#[test]
fn green_point_on_monomial_map() {
    let r = qasmap(&[
        "green-point",
        "--map",
        path(&data("mono.map")),
        "--point",
        "2,1,1",
        "--n",
        "60",
    ]);
    assert_eq!(r.code, 0);
    let v = json(&r.stdout);
    assert!((v["u"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    assert_eq!(v["mode"], "AS");
    let r = qasmap(&[
        "green-point",
        "--map",
        path(&data("mono.map")),
        "--point",
        "-1+i,0.5i,0.25",
        "--precision",
        "160",
        "--telescope",
        "4",
    ]);
    let v = json(&r.stdout);
    assert!((v["u"].as_f64().unwrap() - 2f64.sqrt().ln()).abs() < 1e-12);
    assert_eq!(v["precision"], serde_json::json!({"kind": "bits", "bits": 160}));
    assert!(v["telescope"]["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn green_point_on_divisor() {
    let r = qasmap(&[
        "green-point",
        "--family",
        path(&data("qas.family")),
        "--point",
        "0,1,0.5",
    ]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("divisor"), "{}", r.stderr);
}

#[test]
fn family_gen_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("f.family");
    let map = dir.path().join("f.map");
    let r = qasmap(&[
        "family-gen",
        "--seed",
        "11",
        "--out",
        path(&fam),
        "--map-out",
        path(&map),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let again = qasmap(&["family-gen", "--seed", "11"]);
    assert_eq!(again.stdout, std::fs::read_to_string(&fam).unwrap());
    assert_ne!(again.stdout, qasmap(&["family-gen", "--seed", "12"]).stdout);

    let r = qasmap(&["family-check", "--family", path(&fam)]);
    let v = json(&r.stdout);
    assert_eq!(v["certificate"]["verdict"], "QAS");
    assert_eq!(v["certificate_matches_family"], true);
    assert_eq!(r.code, i32::from(v["verdict"] == "FAIL"));
    // The written map file is the induced map.
    let r = qasmap(&["degrees", "--map", path(&map), "--n", "3"]);
    assert_eq!(r.stdout, "1 3 8 21\n");

    let r = qasmap(&["family-gen", "--deg-q", "1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("degenerates"));
}

#[test]
fn family_check_of_shipped_instances() {
    let r = qasmap(&["family-check", "--family", path(&data("qas.family"))]);
    assert_eq!(r.code, 0);
    assert_eq!(json(&r.stdout)["verdict"], "PASS");
    let r = qasmap(&["family-check", "--family", path(&data("ref.family"))]);
    assert_eq!(r.code, 1);
    let v = json(&r.stdout);
    assert_eq!(v["preflight"]["cor3_pencil"]["verdict"], "FAIL");
    assert_eq!(
        v["preflight"]["cor3_pencil"]["witness"],
        serde_json::json!(["0", "0", "1"])
    );
    assert_eq!(v["certificate"]["verdict"], "NotQAS");
}

#[test]
fn grid_exports() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str, threads: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let pgm = dir.path().join(format!("{tag}.pgm"));
        let r = qasmap_env(
            &[
                "green-grid",
                "--family",
                path(&data("qas.family")),
                "--resolution",
                "17",
                "--n",
                "30",
                "--csv",
                path(&csv),
                "--pgm",
                path(&pgm),
            ],
            &[(qasmap_cli::THREADS_ENV, threads)],
        );
        assert_eq!(r.code, 0, "{}", r.stderr);
        let side = std::fs::read_to_string(pgm.with_extension("json")).unwrap();
        (
            std::fs::read_to_string(csv).unwrap(),
            std::fs::read_to_string(pgm).unwrap(),
            side,
        )
    };
    let (csv, pgm, side) = run("a", "1");
    assert_eq!(csv.lines().count(), 1 + 17 * 17);
    assert_eq!(csv.lines().next(), Some("x,y,u,status"));
    let mut header = pgm.lines();
    assert_eq!(header.next(), Some("P2"));
    assert_eq!(header.next(), Some("17 17"));
    assert_eq!(header.next(), Some("65535"));
    let px: Vec<u32> = header
        .flat_map(|l| l.split(' ').map(|p| p.parse::<u32>().unwrap()))
        .collect();
    assert_eq!(px.len(), 17 * 17);
    assert!(px.contains(&1) && px.contains(&65535));
    // Only the center (1, 0, 0.5) fails: w = 0 sends it into {z = 0}.
    let meta = json(&side);
    assert_eq!(meta["ok_nodes"], 17 * 17 - 1);
    assert!(csv.contains("\n0.0,0.0,,HitDivisor\n"));
    assert_eq!(meta["n_iters"], 30);
    assert_eq!(meta["certificate_digest"].as_str().unwrap().len(), 64);
    // Worker count does not change any byte.
    assert_eq!(run("b", "3"), (csv, pgm, side));
}

#[test]
fn grid_marks_divisor_nodes() {
    // The slice (x, 1 + iy, 0.5) crosses {z = 0} at x = 0, and at x = 0.5
    // the plane {z = t}, which F maps into {z = 0}.
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("g.csv");
    let r = qasmap(&[
        "green-grid",
        "--family",
        path(&data("qas.family")),
        "--base",
        "0,1,0.5",
        "--e1",
        "1,0,0",
        "--e2",
        "0,i,0",
        "--x-range",
        "-1,1",
        "--y-range",
        "-1,1",
        "--resolution",
        "5",
        "--csv",
        path(&csv),
        "--json",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(json(&r.stdout)["ok_nodes"], 15);
    for row in std::fs::read_to_string(&csv).unwrap().lines().skip(1) {
        let f: Vec<&str> = row.split(',').collect();
        let on_divisor = f[0] == "0.0" || f[0] == "0.5";
        assert_eq!(f[3] == "HitDivisor", on_divisor, "{row}");
        assert_eq!(f[2].is_empty(), on_divisor, "{row}");
    }
    let r = qasmap(&["green-grid", "--map", path(&data("mono.map")), "--resolution", "100000"]);
    assert_eq!(r.code, 3);
}

#[test]
fn verify_all_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let r = qasmap(&["verify-all", "--family", path(&data("qas.family")), "--out", path(&out)]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), r.stdout);
    let v = json(&r.stdout);
    assert_eq!(v["passed"], true);
    let names: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    for want in [
        "family_preflight",
        "lifting_recurrence",
        "sn_identity",
        "functional_equation",
        "homogeneity",
        "telescope",
    ] {
        assert!(names.contains(&want), "{want} missing");
    }
    let r = qasmap(&["verify-all", "--map", path(&data("mono.map")), "--samples", "10"]);
    assert_eq!(r.code, 0);
    let r = qasmap(&["verify-all", "--map", path(&data("id.map"))]);
    assert_eq!(r.code, 1);
}
