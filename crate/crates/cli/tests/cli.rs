//! Exit codes, reports and files produced by the `keller` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
}

fn corpus_file(id: &str) -> String {
    corpus_dir().join(format!("{id}.json")).display().to_string()
}

fn keller(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_keller"))
        .args(args)
        .env_remove("KELLER_TIMEOUT")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn report_lines(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn write_matrix(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn zero_matrix_holds_by_a_fast_path() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write_matrix(
        dir.path(),
        "zero4.json",
        r#"{"n": 4, "entries": [["0","0","0","0"],["0","0","0","0"],["0","0","0","0"],["0","0","0","0"]]}"#,
    );
    let out = keller(&["check", "c1", "--matrix", &zero]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("fast path"));
}

#[test]
fn injectivity_on_example1() {
    let out = keller(&["check", "jc", "--matrix", &corpus_file("example1")]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn zk_certificate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("runs.jsonl");
    let certs = dir.path().join("certs");
    let args = [
        "check",
        "zk",
        "--matrix",
        &corpus_file("example2"),
        "--k",
        "17",
        "--variant",
        "thm19",
        "--cofactors",
        "--json",
        report.to_str().unwrap(),
        "--cert-dir",
        certs.to_str().unwrap(),
    ];
    let out = keller(&args);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let lines = report_lines(&report);
    assert_eq!(lines.len(), 1);
    let r = &lines[0];
    assert_eq!(r["command"], "check zk");
    assert_eq!(r["outcome"], "HOLDS");
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["tool"], "keller");
    assert!(r["version"].is_string());
    assert_eq!(r["input_hash"].as_str().unwrap().len(), 64);
    assert_eq!(r["config"]["variant"], "thm19");
    assert_eq!(r["results"]["17"]["status"], "HOLDS");
    let cert = r["certificates"][0].as_str().unwrap().to_string();
    let verify = keller(&["verify-cert", "--cert", &cert]);
    assert_eq!(code(&verify), 0, "{}", stdout(&verify));

    // Same inputs reproduce the same verdicts and certificate bytes.
    let first = fs::read(&cert).unwrap();
    assert_eq!(code(&keller(&args)), 0);
    assert_eq!(fs::read(&cert).unwrap(), first);
    let lines = report_lines(&report);
    assert_eq!(lines.len(), 2);
    let strip = |v: &Value| {
        let mut v = v["results"]["17"].clone();
        v["stats"]["elapsed_secs"] = Value::Null;
        v
    };
    assert_eq!(strip(&lines[0]), strip(&lines[1]));

    // A tampered certificate is rejected.
    let text = fs::read_to_string(&cert).unwrap().replacen("\"1\"", "\"2\"", 1);
    let bad = write_matrix(dir.path(), "bad.cert.json", &text);
    assert_eq!(code(&keller(&["verify-cert", "--cert", &bad])), 1);
}

#[test]
fn input_hash_ignores_formatting() {
    let dir = tempfile::tempdir().unwrap();
    let compact = write_matrix(dir.path(), "a.json", r#"{"n":2,"entries":[["1","-1"],["1","-1"]]}"#);
    let spaced = write_matrix(
        dir.path(),
        "b.json",
        "{\n  \"entries\": [ [\"1\", \"-2/2\"],\n [ \"1\",\"-1\" ] ],\n  \"n\": 2\n}\n",
    );
    let hash = |file: &str| {
        let out = keller(&["check", "c1", "--matrix", file, "--json", "-"]);
        assert_eq!(code(&out), 0);
        let v: Value = serde_json::from_str(stdout(&out).trim()).unwrap();
        v["input_hash"].as_str().unwrap().to_string()
    };
    assert_eq!(hash(&compact), hash(&spaced));
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write_matrix(dir.path(), "broken.json", "{\"n\": 2,\n \"entries\": [[\"1\", \"x/\"], [\"0\", \"0\"]]}");
    let out = keller(&["check", "c1", "--matrix", &broken]);
    assert_eq!(code(&out), 64);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
    assert_eq!(code(&keller(&["check", "c1"])), 64);
    assert_eq!(code(&keller(&["frobnicate"])), 64);
    assert_eq!(code(&keller(&["check", "c1", "--matrix", "/nonexistent.json"])), 64);
    assert_eq!(code(&keller(&["check", "c1", "--matrix", &corpus_file("a0"), "--order", "weird"])), 64);
    // Not a Druzkowski matrix: the injectivity check has no meaning.
    let id = write_matrix(dir.path(), "id.json", r#"{"n": 2, "entries": [["1","0"],["0","1"]]}"#);
    assert_eq!(code(&keller(&["check", "jc", "--matrix", &id])), 64);
    assert_eq!(code(&keller(&["--help"])), 0);
}

#[test]
fn timeout_precedence() {
    let e5 = corpus_file("example5");
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_keller"));
        cmd.args(["check", "c1", "--no-fast-paths", "--matrix", &e5]);
        cmd.env_remove("KELLER_TIMEOUT");
        if let Some(e) = env {
            cmd.env("KELLER_TIMEOUT", e);
        }
        if let Some(f) = flag {
            cmd.args(["--timeout", f]);
        }
        code(&cmd.output().unwrap())
    };
    assert_eq!(run(None, None), 0);
    assert_eq!(run(Some("0.000001"), None), 2);
    assert_eq!(run(Some("0.000001"), Some("120")), 0);
    assert_eq!(run(None, Some("0.000001")), 2);
    assert_eq!(run(Some("soon"), None), 64);
}

#[test]
fn failing_check_exits_one() {
    // A = -I: y = 0 solves the fixed-witness rows at Z_3.
    let dir = tempfile::tempdir().unwrap();
    let neg = write_matrix(
        dir.path(),
        "neg.json",
        r#"{"n": 3, "entries": [["-1","0","0"],["0","-1","0"],["0","0","-1"]]}"#,
    );
    let out = keller(&["check", "zk", "--matrix", &neg, "--variant", "thm18", "--k", "3"]);
    assert_eq!(code(&out), 1, "{}", stdout(&out));
}

#[test]
fn druzkowski_modes() {
    assert_eq!(code(&keller(&["is-druzkowski", "--matrix", &corpus_file("a0")])), 0);
    let out = keller(&["is-druzkowski", "--matrix", &corpus_file("example6"), "--trials", "64", "--seed", "3"]);
    assert_eq!(code(&out), 0);
    let dir = tempfile::tempdir().unwrap();
    let id = write_matrix(dir.path(), "id.json", r#"{"n": 2, "entries": [["1","0"],["0","1"]]}"#);
    assert_eq!(code(&keller(&["is-druzkowski", "--matrix", &id])), 1);
}

#[test]
fn transformations_write_matrix_files() {
    let dir = tempfile::tempdir().unwrap();
    let conj = dir.path().join("conj.json");
    let out = keller(&[
        "conjugate",
        "--matrix",
        &corpus_file("a0"),
        "--diag",
        "2,-1/3",
        "--out",
        conj.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&keller(&["is-druzkowski", "--matrix", conj.to_str().unwrap()])), 0);
    assert_eq!(code(&keller(&["check", "c1", "--matrix", conj.to_str().unwrap()])), 0);
    assert_eq!(code(&keller(&["conjugate", "--matrix", &corpus_file("a0"), "--diag", "1,0"])), 64);

    let out = keller(&["normalize", "--matrix", &corpus_file("a0"), "--witness", "0,5"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["k"], 1);
    assert_eq!(v["witness"], serde_json::json!(["1", "0"]));

    let rnd = dir.path().join("r.json");
    let args = ["random", "--family", "triangular", "--n", "4", "--seed", "9", "--out", rnd.to_str().unwrap()];
    assert_eq!(code(&keller(&args)), 0);
    let first = fs::read(&rnd).unwrap();
    assert_eq!(code(&keller(&args)), 0);
    assert_eq!(fs::read(&rnd).unwrap(), first);
    let out = keller(&["check", "c1", "--matrix", rnd.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("triangular"));
}

#[test]
fn slices_and_oracle() {
    assert_eq!(code(&keller(&["explore-slice", "--n", "2", "--k", "2", "--rank", "1"])), 0);
    assert_eq!(code(&keller(&["explore-slice", "--n", "9", "--k", "3", "--rank", "1"])), 64);
    assert_eq!(code(&keller(&["oracle", "--matrix", &corpus_file("a0")])), 0);
    assert_eq!(code(&keller(&["oracle", "--matrix", &corpus_file("example1")])), 64);
}

#[test]
fn corpus_run_structural_and_single_entry() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("corpus.jsonl");
    let out = keller(&["corpus", "run", "--structural", "--json", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let r = &report_lines(&report)[0];
    assert_eq!(r["outcome"], "OK");
    assert!(r["results"].as_array().unwrap().len() >= 7);

    let out = keller(&["corpus", "run", "--only", "example5"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("example5") && !text.contains("example1"));
    assert_eq!(code(&keller(&["corpus", "run", "--only", "nosuch"])), 64);
}

#[test]
fn corrupted_corpus_entry_is_named() {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(corpus_dir()).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
    }
    let target = dir.path().join("example3.json");
    let text = fs::read_to_string(&target).unwrap().replacen("\"1\"", "\"2\"", 1);
    fs::write(&target, text).unwrap();
    let out = keller(&["corpus", "run", "--structural", "--corpus-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("MISMATCH example3"), "{text}");
    assert!(!text.contains("MISMATCH example5"));
}
