use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pseudogeo::export::parse_curve_csv;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudogeo")).args(args).output().expect("spawn")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudogeo")).current_dir(dir).args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn catalog_listing() {
    let o = run(&["catalog"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["ex1", "ex1exp", "c1c3", "dd", "clairaut", "mink-sphere"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{} missing", name);
    }
    assert!(text.contains("1/16"));
}

#[test]
fn catalog_json_and_entry() {
    let o = run(&["catalog", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 6);

    let o = run(&["catalog", "mink-sphere"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("embedding:") && text.contains("induced:"));

    assert_eq!(run(&["catalog", "nope"]).status.code(), Some(1));
}

#[test]
fn classify_examples() {
    let o = run(&["classify", "--metric", "catalog:dd", "--eps", "-1", "--point", "0,0", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["case"], "D_s");

    let o = run(&["classify", "--metric", "catalog:ex1", "--scan", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let text = v.to_string();
    assert!(text.contains("C2") && !text.contains("C1") && !text.contains("C3"));
    assert!(stderr(&o).contains("genericity") || text.contains("genericity"));

    let o = run(&["classify", "--metric", "a=1;b=0;c=1", "--scan"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no S0"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["classify", "--metric", "a=1;b=0;c=q", "--point", "0,0"]).status.code(), Some(1));
    assert_eq!(run(&["classify", "--metric", "catalog:ex1", "--point", "0"]).status.code(), Some(1));
    assert_eq!(run(&["--jobs", "0", "catalog"]).status.code(), Some(1));
    // a point off S0 is a numeric failure
    assert_eq!(run(&["classify", "--metric", "catalog:ex1", "--point", "0,0.5"]).status.code(), Some(2));
    assert_eq!(run(&["check", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["check", "cubic"]).status.code(), Some(0));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn check_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["--jobs", "2", "check", "classify", "--json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let reports = if v.is_array() { v[0].clone() } else { v };
    assert_eq!(reports["passed"], true);
    assert!(!reports["checks"].as_array().unwrap().is_empty());
}

#[test]
fn integrate_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let o = run(&["integrate", "--metric", "catalog:dd", "--eps", "-1", "--from", "0.3,0.2,2.5", "--len", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let c = parse_curve_csv(&text).unwrap();
    assert!(c.samples.len() > 5);
    assert!(c.termination.is_some() && c.causal_type.is_some());
    // every float printed is the exact bit pattern: reprinting gives the same text
    let again = run(&["integrate", "--metric", "catalog:dd", "--eps", "-1", "--from", "0.3,0.2,2.5", "--len", "2"]);
    assert_eq!(stdout(&again), text);
    for (line, s) in text.lines().skip(1).zip(&c.samples) {
        let x: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(x.to_bits(), s.x.to_bits());
    }
}

#[test]
fn tolerance_env_override() {
    let o = Command::new(env!("CARGO_BIN_EXE_pseudogeo"))
        .env("PSEUDOGEO_TOL", "rel_tol=bogus")
        .args(["integrate", "--metric", "catalog:ex1exp", "--from", "0.1,-0.2,0.5", "--len", "0.1"])
        .output()
        .unwrap();
    assert_ne!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_pseudogeo"))
        .env("PSEUDOGEO_TOL", "rel_tol=1e-11")
        .args(["integrate", "--metric", "catalog:ex1exp", "--from", "0.1,-0.2,0.5", "--len", "0.1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn metric_from_toml_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("saddle.toml");
    fs::write(&p, "a = \"-1 - 0*x\"\nb = 0\nc = \"1\"\nbbox = [-2, 2, -1, 1]\n").unwrap();
    let spec = format!("@{}", p.display());
    let o = run(&["integrate", "--metric", &spec, "--from", "0,0,0.5", "--len", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c = parse_curve_csv(&stdout(&o)).unwrap();
    assert_eq!(c.causal_type.map(|t| t.label()), Some("timelike"));

    fs::write(&p, "a = \"1\"\nq = \"2\"\n").unwrap();
    assert_eq!(run(&["integrate", "--metric", &spec, "--from", "0,0,0"]).status.code(), Some(1));
}

fn polylines(svg: &str) -> usize {
    let doc = roxmltree::Document::parse(svg).expect("well-formed SVG");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    doc.descendants().filter(|n| n.has_tag_name("polyline")).count()
}

#[test]
fn grid_portrait_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &str, seed: &str| {
        vec!["portrait".to_string(), "--metric".into(), "catalog:ex1exp".into(), "--count".into(), "6".into(), "--len".into(), "2".into(), "--seed".into(), seed.into(), "--out".into(), out.into()]
    };
    let run_args = |a: Vec<String>| run_in(dir.path(), &a.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(run_args(args("a.svg", "7")).status.code(), Some(0));
    assert_eq!(run_args(args("b.svg", "7")).status.code(), Some(0));
    assert_eq!(run_args(args("c.svg", "8")).status.code(), Some(0));
    let a = fs::read_to_string(dir.path().join("a.svg")).unwrap();
    let b = fs::read_to_string(dir.path().join("b.svg")).unwrap();
    let c = fs::read_to_string(dir.path().join("c.svg")).unwrap();
    assert!(polylines(&a) > 0);
    assert_eq!(a.replace("a.svg", ""), b.replace("b.svg", ""));
    assert_ne!(a, c);
    let traces: Vec<_> = fs::read_dir(dir.path().join("a_traces")).unwrap().collect();
    assert_eq!(traces.len(), 6);
    for t in ["curve_000.csv", "curve_005.csv"] {
        let x = fs::read_to_string(dir.path().join("a_traces").join(t)).unwrap();
        let y = fs::read_to_string(dir.path().join("b_traces").join(t)).unwrap();
        assert_eq!(x, y);
        parse_curve_csv(&x).unwrap();
    }
}

#[test]
fn family_portraits() {
    let dir = tempfile::tempdir().unwrap();
    for (args, min_members) in [
        (vec!["portrait", "--metric", "catalog:ex1", "--family", "--out", "fig7r.svg"], 5),
        (vec!["portrait", "--metric", "catalog:clairaut", "--family", "--out", "clair.svg"], 10),
    ] {
        let o = run_in(dir.path(), &args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let out = args.last().unwrap();
        let svg = fs::read_to_string(dir.path().join(out)).unwrap();
        assert!(polylines(&svg) > 0);
        let json = dir.path().join(Path::new(out).with_extension("json"));
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
        let n = v["family"]["members"].as_array().unwrap().len();
        assert!(n >= min_members, "{}: {} members", out, n);
        assert_eq!(v["traces"].as_array().unwrap().len(), n);
    }
    // the Clairaut family never enters the Riemannian strip y < 0
    for e in fs::read_dir(dir.path().join("clair_traces")).unwrap() {
        let c = parse_curve_csv(&fs::read_to_string(e.unwrap().path()).unwrap()).unwrap();
        assert!(c.samples.iter().all(|s| s.y >= 0.0));
    }
}
