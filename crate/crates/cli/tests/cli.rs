use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn pnets(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pnets")).args(args).output().unwrap()
}

fn pnets_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_pnets"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Value of a `key: value` line.
fn field(text: &str, key: &str) -> f64 {
    let prefix = format!("{key}: ");
    let line = text.lines().find(|l| l.starts_with(&prefix)).unwrap_or_else(|| panic!("no {key} in {text}"));
    line[prefix.len()..].parse().unwrap()
}

fn write_catalog(dir: &Path, name: &str) -> String {
    let o = pnets(&["catalog", "--name", name]);
    assert!(o.status.success());
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, &o.stdout).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn catalog_output_feeds_eval() {
    let cat = pnets(&["catalog", "--name", "sqp"]);
    assert!(cat.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&cat.stdout).unwrap();
    assert_eq!(doc["catalog"]["expected_quotient"]["value"], 50.625);
    let ev = pnets_stdin(&["eval", "-"], &cat.stdout);
    assert!(ev.status.success());
    assert!((field(&stdout(&ev), "L^3/V") - 50.625).abs() < 1e-9);
}

#[test]
fn catalog_listing_and_parameters() {
    let list = stdout(&pnets(&["catalog"]));
    assert_eq!(list.lines().count(), 9);
    assert!(list.lines().any(|l| l.starts_with("bnn\t")));
    let cds = pnets(&["catalog", "--name", "cds", "--param", "0.2"]);
    let doc: serde_json::Value = serde_json::from_slice(&cds.stdout).unwrap();
    assert_eq!(doc["catalog"]["params"][0][1], 0.2);
    assert_eq!(pnets(&["catalog", "--name", "srs"]).status.code(), Some(2));
    assert_eq!(pnets(&["catalog", "--name", "cds", "--param", "2"]).status.code(), Some(2));
}

#[test]
fn table_roots() {
    let o = pnets(&["table", "--dim", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let expected = [("dia", 2.75), ("cds", 3.00), ("bnn", 3.60), ("sqp", 3.70), ("pcu", 3.00)];
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), expected.len());
    for (row, (name, root)) in rows.iter().zip(expected) {
        let cols: Vec<&str> = row.split('\t').collect();
        assert_eq!(cols[0], name);
        assert!((cols[4].parse::<f64>().unwrap() - root).abs() <= 0.01, "{row}");
    }
}

#[test]
fn optimize_diamond_and_reuse_the_result() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("best.json");
    let out = out.to_str().unwrap();
    let o = pnets(&["optimize", "--topology", "D4", "--dim", "3", "--seed", "7", "--restarts", "10", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!((field(&stdout(&o), "best value") - 20.7846).abs() < 1e-4);

    let ev = pnets(&["eval", out]);
    assert!((field(&stdout(&ev), "L^3/V") - 20.7846).abs() < 1e-4);
    let cl = stdout(&pnets(&["classify", out]));
    assert!(cl.contains("topology: D4") && cl.contains("irreducible: true"));

    let again = pnets(&["optimize", "--topology", "D4", "--dim", "3", "--seed", "7", "--restarts", "10", "--out", out]);
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn optimize_usage_errors() {
    assert_eq!(pnets(&["optimize", "--topology", "Q7", "--dim", "3"]).status.code(), Some(2));
    assert_eq!(pnets(&["optimize", "--topology", "D7", "--dim", "3"]).status.code(), Some(2));
    assert_eq!(pnets(&["optimize", "--topology", "B3", "--dim", "4"]).status.code(), Some(2));
    assert_eq!(pnets(&["optimize", "--dim", "3"]).status.code(), Some(2));
    assert_eq!(pnets(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn verify_catalog_networks() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["dia", "sqp", "pcu"] {
        let path = write_catalog(dir.path(), name);
        let o = pnets(&["verify", &path, "--json"]);
        assert!(o.status.success());
        let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(r["slack"].as_f64().unwrap().abs() < 1e-9 * r["measured"].as_f64().unwrap());
        assert_eq!(r["equality_certificate"]["passed"], true);
    }
}

#[test]
fn bad_inputs_fail_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(pnets(&["eval", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(pnets(&["eval", "/nonexistent/net.json"]).status.code(), Some(1));

    // pcu with one loop doubled: the lift falls apart.
    let pcu = pnets(&["catalog", "--name", "pcu"]).stdout;
    let mut doc: serde_json::Value = serde_json::from_slice(&pcu).unwrap();
    doc["edges"][2]["shift"] = serde_json::json!([0, 0, 2]);
    std::fs::write(&bad, doc.to_string()).unwrap();
    let o = pnets(&["eval", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("valid: false"));
}

#[test]
fn export_writes_obj_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let src = write_catalog(dir.path(), "dia");
    let obj = dir.path().join("dia.obj");
    let json = dir.path().join("dia2.json");
    let o = pnets(&["export", &src, "--obj", obj.to_str().unwrap(), "--cells", "2", "--json", json.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("l ")).count(), 4 * 8);

    let a = stdout(&pnets(&["eval", &src]));
    let b = stdout(&pnets(&["eval", json.to_str().unwrap()]));
    assert_eq!(a, b);
    assert_eq!(pnets(&["export", &src]).status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical() {
    let a = pnets(&["catalog", "--name", "bnn"]);
    let b = pnets(&["catalog", "--name", "bnn"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&pnets(&["table"])), stdout(&pnets(&["table", "--dim", "3"])));
}
