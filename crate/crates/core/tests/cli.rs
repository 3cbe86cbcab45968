use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_galois-scaffold"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name)
}

fn run(args: &[&str], cfg: &Path) -> Output {
    bin().args(args).arg("--config").arg(cfg).output().unwrap()
}

fn temp_config(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("galois-scaffold-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
    path
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn analyze_degree_three() {
    let cert = json(&run(&["analyze"], &config("degree3.toml")));
    assert_eq!(cert["extension"]["breaks"], serde_json::json!([1]));
    assert_eq!(cert["extension"]["different"], 4);
    assert_eq!(cert["extension"]["i0"], 2);
    assert_eq!(cert["seed"], 7);
    assert_eq!(cert["tool"]["name"], "galois-scaffold");
}

#[test]
fn roundtrip_degree_three_is_stable() {
    let cert = json(&run(&["roundtrip"], &config("degree3.toml")));
    let r = &cert["result"];
    assert_eq!(r["semistable"], true);
    assert_eq!(r["stable"], true);
    assert_eq!(r["scaffold_precision"], "inf");
    assert!(r["scaffold"]["certified_precision"].as_i64().unwrap() >= 1);
}

#[test]
fn json_parses_back_and_text_has_diagram_table() {
    let out = run(&["diagram"], &config("degree3.toml"));
    let again: Value = serde_json::from_str(&String::from_utf8(out.stdout.clone()).unwrap()).unwrap();
    assert_eq!(again, json(&out));
    let text = run(&["diagram", "--format", "text"], &config("degree3.toml"));
    let text = String::from_utf8(text.stdout).unwrap();
    assert!(text.contains("d(beta)"));
    assert!(text.contains("N(beta)   [-1,0] [-3,2]"));
}

#[test]
fn not_semistable_is_a_verdict() {
    let out = run(&["falsify"], &config("p3_noncongruent.toml"));
    let cert = json(&out);
    assert_eq!(cert["result"]["verdict"], "not semistable");
    assert_eq!(cert["result"]["criterion_c"]["verdict"], "falsified");
}

#[test]
fn seed_flag_is_recorded() {
    let cert = json(&run(&["falsify", "--seed", "99"], &config("biquadratic.toml")));
    assert_eq!(cert["seed"], 99);
}

#[test]
fn malformed_config_exits_with_one() {
    let path = temp_config("bad.toml", "[extension]\np = 3\ngenerators = [{ exponent = 1 }]\nwat = 2\n");
    let out = run(&["analyze"], &path);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("wat"), "{err}");
    assert!(err.contains("line"), "{err}");
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(bin().output().unwrap().status.code(), Some(1));
    assert_eq!(bin().arg("analyze").output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["bogus"]).output().unwrap().status.code(), Some(1));
    let out = run(&["analyze", "--format", "xml"], &config("degree3.toml"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn precondition_failures_exit_with_one() {
    let path = temp_config("divisible.toml", "[extension]\np = 3\ngenerators = [{ exponent = 3 }]\n");
    assert_eq!(run(&["analyze"], &path).status.code(), Some(1));
    assert_eq!(run(&["diagram"], &config("biquadratic.toml")).status.code(), Some(1));
}

#[test]
fn precision_ceiling_exits_with_two() {
    let path = temp_config(
        "ceiling.toml",
        "cap = 1\nmax_cap = 2\n[extension]\np = 3\ngenerators = [{ exponent = 1 }, { exponent = 4 }]\n[xi]\npreset = \"sigma-minus-one\"\ngenerator = 2\n",
    );
    let out = run(&["diagram"], &path);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn retries_are_recorded() {
    let path = temp_config(
        "retry.toml",
        "cap = 1\nmax_cap = 64\n[extension]\np = 3\ngenerators = [{ exponent = 1 }, { exponent = 4 }]\n[xi]\npreset = \"sigma-minus-one\"\ngenerator = 2\n",
    );
    let cert = json(&run(&["diagram"], &path));
    assert_eq!(cert["retries"].as_array().unwrap().len(), 3);
    assert_eq!(cert["cap"], 8);
    let err = String::from_utf8(run(&["diagram", "--cap", "1"], &path).stderr).unwrap();
    assert!(err.is_empty(), "{err}");
}

#[test]
fn task_mismatch_is_rejected() {
    let path = temp_config("task.toml", "task = \"falsify\"\n[extension]\np = 2\ngenerators = [{ exponent = 1 }]\n");
    assert_eq!(run(&["analyze"], &path).status.code(), Some(1));
    assert!(run(&["falsify"], &path).status.success());
}
