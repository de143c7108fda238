use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ym"))
        .args(args)
        .output()
        .expect("run ym")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(dir: &TempDir, rel: &str) -> String {
    dir.path().join(rel).to_string_lossy().into_owned()
}

fn generated(family: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    let out = ym(&["generate", family, "-o", &path(&dir, "in")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    dir
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn compute_writes_report_and_grid() {
    let dir = generated("fixtures");
    let out = ym(&[
        "compute",
        &path(&dir, "in/sawtooth.json"),
        "--grid",
        "65",
        "-o",
        &path(&dir, "out"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&dir.path().join("out/measure_report.json"));
    assert_eq!(report["schema"], "ym/1");
    let names: Vec<&str> = report["measures"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["density", "pushforward"]);
    let grid = std::fs::read_to_string(dir.path().join("out/grid.csv")).unwrap();
    assert!(grid.starts_with("y,"));
    assert_eq!(grid.lines().count(), 66);
}

#[test]
fn compute_rejects_overlapping_pieces() {
    let dir = generated("fixtures");
    let out = ym(&["compute", &path(&dir, "in/overlap.json"), "-o", &path(&dir, "out")]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("overlap"));
}

#[test]
fn verify_names_the_failing_normalization() {
    let dir = generated("fixtures");
    let out = ym(&[
        "verify",
        &path(&dir, "in/tampered.json"),
        "--samples",
        "10000",
        "-o",
        &path(&dir, "out"),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("normalization"), "{}", stderr(&out));
    let report = json(&dir.path().join("out/verify_report.json"));
    assert_eq!(report["pass"], false);
    assert_eq!(report["measure"], "claimed");
}

#[test]
fn verify_passes_on_a_small_sample() {
    let dir = generated("fixtures");
    let out = ym(&[
        "verify",
        &path(&dir, "in/two-step.json"),
        "--samples",
        "20000",
        "--beta",
        "cos(y)",
        "-o",
        &path(&dir, "out"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&dir.path().join("out/verify_report.json"));
    assert_eq!(report["identity"]["entries"].as_array().unwrap().len(), 6);
}

#[test]
fn missing_and_malformed_inputs() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&ym(&["compute", &path(&dir, "absent.json")])), 3);
    std::fs::write(dir.path().join("bad.json"), "{not json").unwrap();
    assert_eq!(
        code(&ym(&["compute", &path(&dir, "bad.json"), "-o", &path(&dir, "out")])),
        4
    );
    std::fs::write(
        dir.path().join("expr.json"),
        r#"{"domain":[0,1],"kind":"invertible","pieces":[{"interval":[0,1],"expr":"x +"}],"K":[0,1]}"#,
    )
    .unwrap();
    assert_eq!(
        code(&ym(&["compute", &path(&dir, "expr.json"), "-o", &path(&dir, "out")])),
        4
    );
    assert_eq!(code(&ym(&["frobnicate"])), 4);
    assert_eq!(code(&ym(&["--help"])), 0);
}

#[test]
fn empty_directory_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    std::fs::create_dir(dir.path().join("empty")).unwrap();
    let out = ym(&["converge", &path(&dir, "empty"), "-o", &path(&dir, "out")]);
    assert_eq!(code(&out), 4);
    let out = ym(&["scenario-monotone", &path(&dir, "empty"), "-o", &path(&dir, "out")]);
    assert_eq!(code(&out), 4);
}

#[test]
fn converge_annotates_concentration() {
    let dir = generated("concentration");
    let out = ym(&["converge", &path(&dir, "in"), "-o", &path(&dir, "out")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let eq = json(&dir.path().join("out/equivalence.json"));
    assert_eq!(eq["outcome"], "annotated-inconclusive");
    assert!(eq["annotation"].as_str().unwrap().contains("uniform-integrability"));
    let density = json(&dir.path().join("out/density_probe.json"));
    assert_eq!(density["uniform_integrability"]["fired"], true);
}

#[test]
fn converge_oscillation_is_equivalent() {
    let dir = generated("fixtures");
    let out = ym(&[
        "converge",
        "--oscillate",
        &path(&dir, "in/oscillation3.json"),
        "--levels",
        "4",
        "-o",
        &path(&dir, "out"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let eq = json(&dir.path().join("out/equivalence.json"));
    assert_eq!(eq["outcome"], "equivalent");
    let csv = std::fs::read_to_string(dir.path().join("out/density_values.csv")).unwrap();
    assert!(csv.starts_with("set,l=1,l=2,l=4,l=8"));
}

#[test]
fn scenario_reports_the_witness_set() {
    let dir = generated("crossing");
    let out = ym(&["scenario-monotone", &path(&dir, "in"), "-o", &path(&dir, "out")]);
    assert_eq!(code(&out), 1);
    assert!(
        stderr(&out).contains("set values decrease on [0, 0.5] from member 1 to 2"),
        "{}",
        stderr(&out)
    );
    let report = json(&dir.path().join("out/scenario.json"));
    assert_eq!(report["witness"]["set"], "[0, 0.5]");
}

#[test]
fn scenario_passes_on_equal_densities() {
    let dir = generated("constant");
    let out = ym(&["scenario-monotone", &path(&dir, "in"), "-o", &path(&dir, "out")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn generate_checks_levels() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&ym(&["generate", "poly", "--levels", "1", "-o", &path(&dir, "out")])),
        4
    );
    assert_eq!(
        code(&ym(&["generate", "poly", "--levels", "3", "-o", &path(&dir, "out")])),
        0
    );
    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names, ["01.json", "02.json", "03.json"]);
}
