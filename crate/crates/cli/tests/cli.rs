use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn data(name: &str) -> String {
    root().join("tests/data").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arithdyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn validate(command: &str, out: &Output) -> Value {
    assert!(out.stderr.is_empty(), "{}", stderr(out));
    let path = root().join("schemas").join(format!("{command}.schema.json"));
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let compiled = JSONSchema::compile(&schema).expect("schema compiles");
    let doc: Value = serde_json::from_slice(&out.stdout).expect("output is json");
    if let Err(errors) = compiled.validate(&doc) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{command} output fails its schema:\n{}", msgs.join("\n"));
    }
    doc
}

#[test]
fn height_single_point() {
    let o = run(&["height", "--point", "3/2,5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "3/2,5: h_nv = log 10 ≈ 2.30258509299\n");
}

#[test]
fn height_point_file_one_line_each() {
    let o = run(&["height", "--points", &data("points.txt")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("-7/3,1/4: h_nv = log 28"));
}

#[test]
fn malformed_rational_is_input_error() {
    for p in ["1/0,2", "x,1", "1,2,3"] {
        let o = run(&["height", "--point", p]);
        assert_eq!(o.status.code(), Some(2), "{p}");
        assert!(stderr(&o).starts_with("error: "), "{p}: {}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn bad_point_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pts.txt");
    fs::write(&path, "1,1\n# c\n2,1/x\n").unwrap();
    let o = run(&["height", "--points", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn bad_map_document_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    fs::write(&path, r#"{"type":"henon","a":"0","p":"x^2"}"#).unwrap();
    let o = run(&["dyndeg", "--map", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["dyndeg", "--map", "/nonexistent/map.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dyndeg_reports() {
    let o = run(&["dyndeg", "--map", &data("henon3.json")]);
    assert!(stdout(&o).starts_with("d=3 δ=3 δ₋=3 regular=true"), "{}", stdout(&o));
    let o = run(&["dyndeg", "--map", &data("triangular.json")]);
    assert!(stdout(&o).contains("δ=1 δ₋=1 regular=false"), "{}", stdout(&o));
    let o = run(&["dyndeg", "--map", &data("composite.json")]);
    assert!(stdout(&o).contains("δ=6"), "{}", stdout(&o));
    let o = run(&["dyndeg", "--map", &data("henon4.json"), "--n", "4"]);
    assert!(stdout(&o).contains("degrees=4,16,64,256"), "{}", stdout(&o));
}

#[test]
fn canheight_refuses_degree_one() {
    let o = run(&["canheight", "--map", &data("triangular.json"), "--point", "3,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("triangularizable"), "{}", stderr(&o));
}

#[test]
fn canheight_residual_within_budget() {
    let o = run(&["canheight", "--map", &data("henon2.json"), "--point", "3,0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = validate("canheight", &o);
    let p = &doc["points"][0];
    let budget = doc["residual_budget"].as_f64().unwrap();
    assert!(p["residual"].as_f64().unwrap() <= budget);
    let (hp, hm, h) = (
        p["hplus"]["value"].as_f64().unwrap(),
        p["hminus"]["value"].as_f64().unwrap(),
        p["hhat"]["value"].as_f64().unwrap(),
    );
    assert!((hp + hm - h).abs() < 1e-11);
}

#[test]
fn engine_flag_validation() {
    let base = ["canheight", "--map", &data("henon2.json"), "--point", "3,0"];
    for extra in [
        &["--depth", "1"][..],
        &["--patience", "0"],
        &["--digit-cap", "999"],
        &["--format", "yaml"],
    ] {
        let args: Vec<&str> = base.iter().copied().chain(extra.iter().copied()).collect();
        assert_eq!(run(&args).status.code(), Some(2), "{extra:?}");
    }
    let o = run(&["canheight", "--map", &data("henon2.json"), "--point", "3,0", "--depth", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("depth=6"));
}

#[test]
fn periodic_exit_codes() {
    let m = data("henon2.json");
    assert_eq!(run(&["periodic", "--map", &m, "--point", "0,0"]).status.code(), Some(0));
    assert_eq!(run(&["periodic", "--map", &m, "--point", "3,0"]).status.code(), Some(1));
    let o = run(&["periodic", "--map", &data("triangular.json"), "--point", "3,0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("undecided"));
}

#[test]
fn periodic_on_degree_one_finds_cycles() {
    // (x, y) -> (y, x) has every point of period at most 2.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("swap.json");
    fs::write(&path, r#"{"type":"pair","p":"y","q":"x","pinv":"y","qinv":"x"}"#).unwrap();
    let o = run(&["periodic", "--map", path.to_str().unwrap(), "--point", "1,2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("period 2"));
}

#[test]
fn orbit_rejects_periodic_point() {
    let o = run(&["orbit", "--map", &data("henon2.json"), "--point", "0,0", "--T", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("periodic"), "{}", stderr(&o));
}

#[test]
fn orbit_csv_layout() {
    let o = run(&[
        "orbit", "--map", &data("henon2.json"), "--point", "3,0", "--T-grid", "5:9:3", "--radius", "2", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let blocks: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(blocks.len(), 2);
    let orbit: Vec<&str> = blocks[0].lines().collect();
    assert_eq!(orbit[0], "l,x,y,h_nv,hhat");
    assert_eq!(orbit.len(), 1 + 5);
    assert!(orbit[3].starts_with("0,3,0,"));
    let counts: Vec<&str> = blocks[1].lines().collect();
    assert_eq!(counts[0], "T,count,predicted,lower,upper");
    assert_eq!(counts.len(), 1 + 3);
}

#[test]
fn orbit_bad_grid() {
    for g in ["5:9", "9:5:3", "a:b:c", "5:9:0"] {
        let o = run(&["orbit", "--map", &data("henon2.json"), "--point", "3,0", "--T-grid", g]);
        assert_eq!(o.status.code(), Some(2), "{g}");
    }
}

#[test]
fn orbit_notes_naive_digit_cap() {
    // Non-integral inverse keeps the naive scan exact, so the cap is hit.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    fs::write(&path, r#"{"type":"henon","a":"2","p":"x^2"}"#).unwrap();
    let o = run(&["orbit", "--map", path.to_str().unwrap(), "--point", "1,2", "--T-grid", "5:21:2", "--digit-cap", "10000"]);
    // Canonical counts succeed; the naive scan hitting its cap is reported.
    assert!(matches!(o.status.code(), Some(0) | Some(1)), "{}", stderr(&o));
    assert!(stdout(&o).contains("naive counts unavailable: digit cap"), "{}", stdout(&o));
}

#[test]
fn digit_cap_is_resource_exit() {
    let o = run(&["canheight", "--map", &data("henon2.json"), "--point", "3,0", "--depth", "20", "--digit-cap", "10000"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("digit cap"), "{}", stderr(&o));
}

#[test]
fn schemas_reject_malformed_documents() {
    let path = root().join("schemas/dyndeg.schema.json");
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let compiled = JSONSchema::compile(&schema).unwrap();
    let good: Value = serde_json::from_slice(&run(&["dyndeg", "--map", &data("henon2.json"), "--format", "json"]).stdout).unwrap();
    assert!(compiled.is_valid(&good));
    let mut extra = good.clone();
    extra["surprise"] = Value::Bool(true);
    assert!(!compiled.is_valid(&extra));
    let mut wrong = good.clone();
    wrong["delta"] = Value::String("2".into());
    assert!(!compiled.is_valid(&wrong));
}

#[test]
fn picard_table_and_errors() {
    let o = run(&["picard", "--d", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("class H# E1 E2 E3 F1 F2 F3"), "{text}");
    assert!(text.contains("closed_form=true"));
    assert_eq!(run(&["picard", "--d", "1"]).status.code(), Some(2));
    let o = run(&["picard", "--d", "5", "--format", "json"]);
    let doc = validate("picard", &o);
    assert_eq!(doc["checks"]["all"], Value::Bool(true));
}

#[test]
fn json_outputs_match_schemas() {
    let cases: Vec<(&str, Vec<String>)> = vec![
        ("height", vec!["height".into(), "--points".into(), data("points.txt")]),
        ("dyndeg", vec!["dyndeg".into(), "--map".into(), data("conjugated.json")]),
        ("canheight", vec!["canheight".into(), "--map".into(), data("composite.json"), "--points".into(), data("orbit_points.txt"), "--c-lower".into(), "0.5".into()]),
        ("orbit", vec!["orbit".into(), "--map".into(), data("henon2.json"), "--points".into(), data("orbit_points.txt"), "--T-grid".into(), "5:11:4".into()]),
        ("periodic", vec!["periodic".into(), "--map".into(), data("henon2.json"), "--points".into(), data("points.txt")]),
        ("periodic", vec!["periodic".into(), "--map".into(), data("triangular.json"), "--point".into(), "1,1".into()]),
    ];
    for (cmd, mut args) in cases {
        args.extend(["--format".into(), "json".into()]);
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = run(&refs);
        let doc = validate(cmd, &o);
        assert_eq!(doc["command"], Value::String(cmd.into()));
    }
}

#[test]
fn parallel_matches_serial() {
    for cmd in ["canheight", "orbit"] {
        let mut args = vec![cmd, "--map", "", "--points", "", "--format", "json"];
        let (m, p) = (data("henon2.json"), data("orbit_points.txt"));
        args[2] = &m;
        args[4] = &p;
        let serial = run(&args);
        args.push("--parallel");
        let parallel = run(&args);
        assert_eq!(serial.stdout, parallel.stdout, "{cmd}");
    }
}

#[test]
fn negative_coordinates_parse() {
    let o = run(&["height", "--point", "-1/2,-3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("log 6"));
}
