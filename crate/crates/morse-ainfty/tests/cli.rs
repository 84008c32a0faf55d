use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morse-ainfty")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], "morse-ainfty/1");
    v
}

fn tmp(name: &str, body: &str) -> String {
    let p = std::env::temp_dir().join(format!("morse-ainfty-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn trees_lists_catalan_many() {
    let out = run(&["trees", "--d", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["count"], 5);
    assert_eq!(v["trees"].as_array().unwrap().len(), 5);
    assert_eq!(run(&["trees", "--d", "1"]).status.code(), Some(4));
}

#[test]
fn homology_of_bundled_instances() {
    let cases = [
        ("interval-D.json", "D", vec![0, 1]),
        ("interval-N.json", "N", vec![1, 0]),
        ("circle4.json", "N", vec![1, 1]),
        ("annulus-D.json", "D", vec![0, 1, 1]),
    ];
    for (file, variant, betti) in cases {
        let out = run(&["homology", "--complex", &data(file), "--variant", variant]);
        assert_eq!(out.status.code(), Some(0), "{file}");
        let v = report(&out);
        assert_eq!(v["betti"], serde_json::json!(betti), "{file}");
        assert_eq!(v["d_squared_zero"], true);
    }
    let v = report(&run(&["homology", "--mesh", &data("torus.json"), "--variant", "N"]));
    assert_eq!(v["betti"], serde_json::json!([1, 2, 1]));
}

#[test]
fn verify_ainfty_on_the_torus() {
    let out = run(&["verify-ainfty", "--mesh", &data("torus.json"), "--maxd", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["report"]["ok"], true);
    assert_eq!(v["structure"]["generators"].as_array().unwrap().len(), 4);
}

#[test]
fn products_pairing_is_unimodular() {
    let v = report(&run(&["products", "--mesh", &data("torus.json")]));
    assert_eq!(v["unimodular"], true);
}

#[test]
fn reports_are_byte_identical() {
    let args = ["verify-ainfty", "--mesh", &data("torus-symmetric.json"), "--maxd", "3", "--seed", "2"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let one = Command::new(env!("CARGO_BIN_EXE_morse-ainfty")).args(args).env("MORSE_AINFTY_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, one.stdout);
    let c = run(&["continuation", "--setup", &data("circle-continuation.json")]);
    assert_eq!(c.status.code(), Some(0));
    assert_eq!(c.stdout, run(&["continuation", "--setup", &data("circle-continuation.json")]).stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["homology", "--mesh", "/nonexistent/mesh.json"]).status.code(), Some(4));
    let junk = tmp("junk.json", "{not json");
    assert_eq!(run(&["verify-ainfty", "--structure", &junk]).status.code(), Some(4));
    let bad_eps = run(&["homology", "--mesh", &data("torus.json"), "--epsilon", "-1/2"]);
    assert_eq!(bad_eps.status.code(), Some(4));

    let out = run(&["homology", "--mesh", &data("torus-symmetric.json"), "--max-retries", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(report(&out)["error"]["kind"], "degenerate");
    assert_eq!(run(&["homology", "--mesh", &data("torus-symmetric.json")]).status.code(), Some(0));

    // m_1 with m_1^2 != 0
    let broken = r#"{"generators": [{"name": "a", "degree": 0}, {"name": "b", "degree": 1}, {"name": "c", "degree": 2}],
        "ops": {"1": [{"in": ["a"], "out": [{"gen": "b", "coeff": 1}]}, {"in": ["b"], "out": [{"gen": "c", "coeff": 1}]}]}}"#;
    let out = run(&["verify-ainfty", "--structure", &tmp("broken.json", broken)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["report"]["ok"], false);
}

#[test]
fn convert_convention_round_trip() {
    let v = report(&run(&["verify-ainfty", "--mesh", &data("torus.json"), "--maxd", "3"]));
    let keller = tmp("keller.json", &v["structure"].to_string());
    let out = run(&["convert-convention", "--structure", &keller]);
    assert_eq!(out.status.code(), Some(0));
    let lh = report(&out);
    assert_eq!(lh["to"], "LH");
    assert_eq!(lh["output_report"]["ok"], true);
    let lh_file = tmp("lh.json", &lh["structure"].to_string());
    let back = report(&run(&["convert-convention", "--structure", &lh_file]));
    assert_eq!(back["structure"], v["structure"]);
}

#[test]
fn svg_figures() {
    let out = run(&["homology", "--mesh", &data("torus.json"), "--format", "svg"]);
    assert_eq!(out.status.code(), Some(0));
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.starts_with("<svg"));
    assert_eq!(s.matches("<circle").count(), 4);
    assert_eq!(run(&["trees", "--d", "3", "--format", "svg"]).status.code(), Some(1));
}
