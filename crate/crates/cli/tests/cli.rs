//! End-to-end tests driving the compiled `sdl` binary: determinism of
//! generated artifacts, the exit-code contract, and the file formats of
//! every subcommand.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sdl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdl")).args(args).output().expect("binary runs")
}

fn sdl_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdl"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn write_json(path: &Path, text: &str) {
    fs::write(path, text).expect("write test input");
}

/// Generate an instance into `dir` and return its path.
fn gen_instance(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let path_str = path.to_str().expect("utf-8 path").to_string();
    let mut full: Vec<&str> = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", path_str.as_str()]);
    let out = sdl(&full);
    assert_eq!(code(&out), 0, "gen failed: {}", stderr(&out));
    path
}

#[test]
fn gen_is_byte_deterministic() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = gen_instance(dir.path(), "a.json", &["--topology", "tree", "--n", "9", "--seed", "7"]);
    let b = gen_instance(dir.path(), "b.json", &["--topology", "tree", "--n", "9", "--seed", "7"]);
    let c = gen_instance(dir.path(), "c.json", &["--topology", "tree", "--n", "9", "--seed", "8"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn gen_star_has_four_vertices() {
    let out = sdl(&["gen", "--topology", "star", "--k", "3"]);
    assert_eq!(code(&out), 0);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("instance JSON");
    assert_eq!(value["vertices"].as_array().expect("vertex array").len(), 4);
    assert_eq!(value["edges"].as_array().expect("edge array").len(), 3);
}

#[test]
fn gen_rejects_degenerate_path() {
    let out = sdl(&["gen", "--n", "1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("n"), "stderr should explain: {}", stderr(&out));
}

#[test]
fn unknown_flags_are_rejected() {
    let out = sdl(&["gen", "--frobnicate", "3"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn beckmann_solves_a_segment() {
    let dir = tempfile::tempdir().expect("tempdir");
    let inst = gen_instance(dir.path(), "i.json", &["--topology", "path", "--n", "2"]);
    let data = dir.path().join("g.json");
    write_json(&data, "{\"values\":[-1.0,1.0]}");
    let out = sdl(&["beckmann", "--instance", inst.to_str().unwrap(), "--data", data.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let sol: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("solution JSON");
    // Single edge with m = 1 and lumped vertex masses 3/2: the unique flow
    // with divergence g = (-1, 1) is L = 3/2, so the value is L^2/2 = 9/8.
    let l = sol["L"][0].as_f64().unwrap();
    assert!((l - 1.5).abs() < 1e-9, "L = {l}");
    assert!((sol["value"].as_f64().unwrap() - 1.125).abs() < 1e-9);
    assert!(sol["residual"].as_f64().unwrap() <= 1e-10);
    assert!(sol["gap"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn beckmann_rejects_imbalanced_data() {
    let dir = tempfile::tempdir().expect("tempdir");
    let inst = gen_instance(dir.path(), "i.json", &["--topology", "path", "--n", "2"]);
    let data = dir.path().join("g.json");
    write_json(&data, "{\"values\":[1.0,1.0]}");
    let out = sdl(&["beckmann", "--instance", inst.to_str().unwrap(), "--data", data.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("infeasible"), "{}", stderr(&out));
}

#[test]
fn decompose_writes_the_path_plan() {
    let dir = tempfile::tempdir().expect("tempdir");
    let inst = gen_instance(dir.path(), "i.json", &["--topology", "path", "--n", "4"]);
    let flow = dir.path().join("j.json");
    write_json(&flow, "{\"J\":[1,1,1]}");
    let out = sdl(&["decompose", "--instance", inst.to_str().unwrap(), "--flow", flow.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let plan: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("plan JSON");
    let paths = plan["paths"].as_array().expect("path array");
    assert_eq!(paths.len(), 1);
    assert_eq!(paths[0]["vertices"], serde_json::json!([0, 1, 2, 3]));
    assert_eq!(paths[0]["weight"], serde_json::json!(1));
}

#[test]
fn decompose_strips_circulations() {
    let dir = tempfile::tempdir().expect("tempdir");
    let inst = gen_instance(dir.path(), "i.json", &["--topology", "grid", "--rows", "2", "--cols", "2"]);
    // Edges of the 2x2 grid in canonical order: (0,1), (0,2), (1,3), (2,3).
    // J = (1, -1, 1, -1) is the unit circulation 0 -> 1 -> 3 -> 2 -> 0.
    let flow = dir.path().join("j.json");
    write_json(&flow, "{\"J\":[1,-1,1,-1]}");
    let out = sdl(&["decompose", "--instance", inst.to_str().unwrap(), "--flow", flow.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let plan: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("plan JSON");
    assert_eq!(plan["paths"].as_array().expect("path array").len(), 0);
    assert!(stderr(&out).contains("cycle mass removed 4"), "{}", stderr(&out));
}

#[test]
fn verify_passes_on_a_segment() {
    let dir = tempfile::tempdir().expect("tempdir");
    let inst = gen_instance(dir.path(), "i.json", &["--topology", "path", "--n", "2"]);
    let field = dir.path().join("f.json");
    write_json(&field, "{\"values\":[0.0,1.0]}");
    let report_path = dir.path().join("report.json");
    let out = sdl(&[
        "verify",
        "--instance",
        inst.to_str().unwrap(),
        "--field",
        field.to_str().unwrap(),
        "--p",
        "2",
        "-o",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).expect("report JSON");
    assert!((report["E_W"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(report["passed"], serde_json::json!(true));
}

#[test]
fn verify_fails_on_impossible_tolerance() {
    let dir = tempfile::tempdir().expect("tempdir");
    let inst = gen_instance(dir.path(), "i.json", &["--topology", "path", "--n", "3"]);
    let field = dir.path().join("f.json");
    write_json(&field, "{\"values\":[0.0,0.3,1.1]}");
    let report_path = dir.path().join("report.json");
    let out = sdl(&[
        "verify",
        "--instance",
        inst.to_str().unwrap(),
        "--field",
        field.to_str().unwrap(),
        "--p",
        "1.5",
        "--tol",
        "1e-20",
        "-o",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("chain_collapses"), "{}", stderr(&out));
    // The report is still written so the failure can be inspected.
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).expect("report JSON");
    assert_eq!(report["passed"], serde_json::json!(false));
}

#[test]
fn verify_rejects_missing_instance() {
    let out = sdl(&["verify", "--instance", "/nonexistent/i.json", "--random-fields", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_random_fields_are_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().expect("tempdir");
    let inst = gen_instance(dir.path(), "i.json", &["--topology", "tree", "--n", "8", "--seed", "3"]);
    let args = [
        "verify",
        "--instance",
        inst.to_str().unwrap(),
        "--random-fields",
        "3",
        "--seed",
        "11",
        "--format",
        "csv",
    ];
    let serial = sdl_env(&args, "SDL_THREADS", "1");
    let parallel = sdl_env(&args, "SDL_THREADS", "3");
    assert_eq!(code(&serial), 0, "{}", stderr(&serial));
    assert_eq!(code(&parallel), 0, "{}", stderr(&parallel));
    assert_eq!(serial.stdout, parallel.stdout);
    let text = stdout(&serial);
    let mut lines = text.lines();
    assert!(lines.next().expect("header").starts_with("source,p,q,F,E_lip"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn report_aggregates_a_directory() {
    let dir = tempfile::tempdir().expect("tempdir");
    let reports = dir.path().join("reports");
    fs::create_dir(&reports).expect("mkdir");
    let inst = gen_instance(dir.path(), "i.json", &["--topology", "star", "--k", "3"]);
    let field = dir.path().join("f.json");
    write_json(&field, "{\"values\":[0.0,1.0,1.0,-1.0]}");
    let single = reports.join("a.json");
    let batch = reports.join("b.json");
    let run_one = sdl(&[
        "verify",
        "--instance",
        inst.to_str().unwrap(),
        "--field",
        field.to_str().unwrap(),
        "-o",
        single.to_str().unwrap(),
    ]);
    assert_eq!(code(&run_one), 0, "{}", stderr(&run_one));
    let run_two = sdl(&[
        "verify",
        "--instance",
        inst.to_str().unwrap(),
        "--random-fields",
        "2",
        "--seed",
        "5",
        "-o",
        batch.to_str().unwrap(),
    ]);
    assert_eq!(code(&run_two), 0, "{}", stderr(&run_two));

    let csv = sdl(&["report", "--dir", reports.to_str().unwrap()]);
    assert_eq!(code(&csv), 0, "{}", stderr(&csv));
    let text = stdout(&csv);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "header plus three rows: {text}");
    assert!(lines[1].starts_with("a,"));
    assert!(lines[2].starts_with("b[0],"));
    assert!(lines[3].starts_with("b[1],"));

    let json = sdl(&["report", "--dir", reports.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&json), 0);
    let records: serde_json::Value = serde_json::from_str(&stdout(&json)).expect("record array");
    assert_eq!(records.as_array().expect("array").len(), 3);
}

#[test]
fn report_rejects_an_empty_directory() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = sdl(&["report", "--dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("no report files"), "{}", stderr(&out));
}

#[test]
fn report_names_the_offending_file() {
    let dir = tempfile::tempdir().expect("tempdir");
    write_json(&dir.path().join("bad.json"), "{\"not\": \"a report\"}");
    let out = sdl(&["report", "--dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("bad.json"), "{}", stderr(&out));
}
