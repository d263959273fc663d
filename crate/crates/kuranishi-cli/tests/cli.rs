use std::path::PathBuf;
use std::process::{Command, Output};

use kuranishi_cli::report::explain;
use kuranishi_cli::{exit, run_text, RunFlags};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kuranishi"))
}

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn corpus() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(scenarios())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().map(|e| e == "toml").unwrap_or(false))
        .collect();
    v.sort();
    v
}

fn tmp(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kuranishi-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad json: {e}\n{}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn cohomology_of_elliptic_structure_sheaf() {
    let out = bin().args(["run", "--format", "json"]).arg(scenarios().join("ell_structure_sheaf.toml")).args(["--task", "cohomology"]).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::OK));
    let r = json(&out);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["sections"]["end"]["h1"], 1);
    assert!(r["summary"].as_array().unwrap().iter().any(|l| l == "h¹(O) = 1"));
}

#[test]
fn paper_example_is_built_in() {
    let out = bin().args(["run", "--task", "paper-example", "--format", "json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::OK), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["sections"]["atiyah"]["zero"], true);
    assert_eq!(r["sections"]["restriction"]["surjective"], false);
}

#[test]
fn text_format_is_default() {
    let out = bin().args(["run", "--task", "paper-example"]).output().unwrap();
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.starts_with("kuranishi report, schema 1"));
    assert!(s.contains("At(E₁) = 0"));
    assert!(s.contains("hash: "));
}

#[test]
fn malformed_transition_entry_names_line_and_column() {
    let body = "[curve]\nkind = \"elliptic\"\n\n[bundle]\nrank = 1\n[[bundle.transitions]]\ncharts = [0, 1]\nmatrix = [[\"x + * y\"]]\n";
    let p = tmp("bad_expr.toml", body);
    let out = bin().arg("run").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::PARSE));
    let err = String::from_utf8(out.stderr).unwrap();
    // "x + * y" starts at column 13 of line 8; the '*' is 4 bytes in.
    assert!(err.contains("bad_expr.toml:8:17:"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_toml_is_a_parse_error() {
    let p = tmp("bad_toml.toml", "[curve\nkind = 1\n");
    let out = bin().arg("run").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::PARSE));
    assert!(String::from_utf8(out.stderr).unwrap().contains("bad_toml.toml:1:"));
}

#[test]
fn unknown_task_is_a_usage_error() {
    let out = bin().args(["run", "--task", "moduli"]).arg(scenarios().join("ell_structure_sheaf.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::USAGE));
    let unknown_block = tmp("unknown_task.toml", "task = \"moduli\"\n[curve]\nkind = \"line\"\n[bundle]\nrank = 1\n");
    let out = bin().arg("run").arg(&unknown_block).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::PARSE));
}

#[test]
fn missing_scenario_file() {
    let out = bin().args(["run", "/nonexistent/scenario.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::IO));
    let out = bin().args(["run", "--task", "kuranishi"]).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::USAGE));
}

#[test]
fn invalid_connection_emits_report_and_fails() {
    // A pole at p1 that D does not allow.
    let body = "[curve]\nkind = \"elliptic\"\n[bundle]\nrank = 1\n[connection]\nmatrix = [[\"1/(x - 1)\"]]\n";
    let p = tmp("bad_conn.toml", body);
    let rp = p.with_extension("json");
    let out = bin().arg("run").arg(&p).args(["--format", "json", "--report"]).arg(&rp).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::VALIDATION));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&rp).unwrap()).unwrap();
    assert_eq!(r["status"], "validation-failed");
    let (s, w) = explain(&std::fs::read_to_string(&rp).unwrap()).unwrap();
    assert!(w.is_none());
    assert!(s.contains("The run failed") || s.contains("checks fail"), "{s}");
}

#[test]
fn unresolved_label_is_a_validation_failure() {
    let body = "[curve]\nkind = \"line\"\n[bundle]\nrank = 1\n[connection]\npoles = { q = 1 }\nmatrix = [[\"0\"]]\n";
    let r = run_text(body, &RunFlags::default());
    let f = r.expect_err("unknown label q");
    assert_eq!(f.code(), exit::VALIDATION);
    let rep = f.report().unwrap();
    assert!(!rep.verification.passed());
}

#[test]
fn hash_excludes_timing_and_matches_content() {
    let flags = RunFlags { order: Some(2), ..RunFlags::default() };
    let text = std::fs::read_to_string(scenarios().join("ell_trivial_connection.toml")).unwrap();
    let mut a = run_text(&text, &flags).unwrap();
    let b = run_text(&text, &flags).unwrap();
    assert_eq!(a.determinism_hash, b.determinism_hash);
    assert_eq!(a.render_text(false), b.render_text(false));
    a.timing_ms += 1000;
    assert_eq!(a.compute_hash(), b.determinism_hash);
    a.summary.push("extra".into());
    assert_ne!(a.compute_hash(), b.determinism_hash);
}

#[test]
fn corpus_runs_are_deterministic_and_explainable() {
    for p in corpus() {
        let mut hashes = Vec::new();
        for _ in 0..2 {
            let out = bin().arg("run").arg(&p).args(["--order", "2", "--format", "json"]).output().unwrap();
            assert_eq!(out.status.code(), Some(exit::OK), "{}: {}", p.display(), String::from_utf8_lossy(&out.stderr));
            let r = json(&out);
            hashes.push(r["determinism_hash"].as_str().unwrap().to_string());
            let (s, w) = explain(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
            assert!(w.is_none());
            assert!(s.starts_with("Task "), "{s}");
        }
        assert_eq!(hashes[0], hashes[1], "{}", p.display());
    }
}

#[test]
fn explain_kuranishi_summaries() {
    let text = std::fs::read_to_string(scenarios().join("ell_trivial_connection.toml")).unwrap();
    let rep = run_text(&text, &RunFlags { order: Some(3), ..RunFlags::default() }).unwrap();
    let (s, _) = explain(&rep.to_json()).unwrap();
    assert!(s.contains("T¹ = ⟨2⟩, T² = ⟨1⟩."), "{s}");
    assert!(s.contains("unobstructed to order 3"), "{s}");

    let text = std::fs::read_to_string(scenarios().join("ell_rank2_trivial_connection.toml")).unwrap();
    let rep = run_text(&text, &RunFlags { order: Some(2), ..RunFlags::default() }).unwrap();
    let (s, _) = explain(&rep.to_json()).unwrap();
    assert!(s.contains("T¹ = ⟨8⟩, T² = ⟨4⟩."), "{s}");
    assert!(s.contains("f₂ = ("), "{s}");
    assert!(!s.contains("unobstructed"), "{s}");
}

#[test]
fn explain_lists_failures_first_and_warns_on_version() {
    let text = std::fs::read_to_string(scenarios().join("ell_structure_sheaf.toml")).unwrap();
    let rep = run_text(&text, &RunFlags { order: Some(2), ..RunFlags::default() }).unwrap();
    let mut v: Value = serde_json::from_str(&rep.to_json()).unwrap();
    v["schema_version"] = Value::from(99);
    let checks = v["verification"]["checks"].as_array_mut().unwrap();
    checks.push(serde_json::json!({"name": "deliberately broken", "passed": false, "detail": "x"}));
    let (s, w) = explain(&v.to_string()).unwrap();
    assert!(w.unwrap().contains("schema version 99"));
    let fail = s.find("FAIL deliberately broken (x)").expect("failure listed");
    let pass = s.find("  pass ").expect("passing listed");
    assert!(fail < pass, "{s}");
    assert!(explain("not json").is_err());
}

#[test]
fn explain_subcommand() {
    let p = tmp("paper.json", "");
    let out = bin().args(["run", "--task", "paper-example", "--format", "json", "--report"]).arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::OK));
    let out = bin().arg("explain").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::OK));
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("All 10 checks pass."), "{s}");
    let bad = tmp("garbage.json", "{");
    let out = bin().arg("explain").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::PARSE));
}
