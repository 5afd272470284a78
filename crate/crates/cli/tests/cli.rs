//! End-to-end tests for the `gradsum` binary: every subcommand, every
//! documented exit code, and the shape of the machine-readable outputs.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::NamedTempFile;

fn gradsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradsum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn source_file(program: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().expect("temp file");
    f.write_all(program.as_bytes()).expect("write");
    f
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn golden(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/golden")
        .join(name)
        .display()
        .to_string()
}

// ======================================================================
// relations
// ======================================================================

#[test]
fn relations_prints_aligned_tables() {
    for table in ["subsum", "precision", "dcons-sum"] {
        let out = gradsum(&["relations", "--table", table]);
        assert!(out.status.success(), "{table} failed");
        let text = stdout(&out);
        assert!(text.starts_with(&format!("{table} (row, column):")));
        // Header plus one row per constructor, each naming the constructor.
        assert_eq!(text.lines().count(), 10, "{table} line count");
        for con in ["+?1", "+*2", "+"] {
            assert!(text.contains(con), "{table} missing {con}");
        }
    }
    let out = gradsum(&["relations", "--table", "cast-class"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 5);
    for class in ["safe", "backward", "matchcast"] {
        assert!(text.contains(class), "missing {class}");
    }
}

#[test]
fn relations_json_matches_the_library_tables() {
    let out = gradsum(&["relations", "--table", "subsum", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["table"], "subsum");
    assert_eq!(v["rows"]["+?1"]["+1"], true);
    assert_eq!(v["rows"]["+1"]["+?1"], false);
    assert_eq!(v["rows"]["+*1"]["+"], true);
    assert_eq!(v["rows"]["+"]["+1"], false);
    assert_eq!(v["rows"].as_object().unwrap().len(), 8);

    let out = gradsum(&["relations", "--table", "cast-class", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["rows"]["+1"]["+2"], "matchcast");
    assert_eq!(v["rows"]["+1"]["+1"], "safe");
    assert_eq!(v["rows"].as_object().unwrap().len(), 3);
}

// ======================================================================
// check / synth / fragment
// ======================================================================

#[test]
fn check_accepts_a_well_typed_program() {
    let f = source_file("((inj2 ()) : (Unit +2 Unit))");
    let out = gradsum(&["check", f.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "Unit +2 Unit");
}

#[test]
fn check_against_an_explicit_goal_type() {
    let f = source_file("inj2 ()");
    let out = gradsum(&[
        "check",
        f.path().to_str().unwrap(),
        "--type",
        "Unit +? Unit",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "Unit +? Unit");

    // The same term does not check against a left-committed sum.
    let out = gradsum(&[
        "check",
        f.path().to_str().unwrap(),
        "--type",
        "Unit +1 Unit",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn type_errors_exit_1_with_a_source_position() {
    let f = source_file("(fn x => x) ()");
    let out = gradsum(&["synth", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains(":1:"), "no position in: {err}");
    assert!(err.contains("type error"), "no message in: {err}");
}

#[test]
fn parse_errors_exit_2() {
    let f = source_file("case of");
    for cmd in ["check", "synth", "elaborate", "run"] {
        let out = gradsum(&[cmd, f.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{cmd} exit code");
        assert!(stderr(&out).contains("parse error"), "{cmd} message");
    }
}

#[test]
fn missing_files_are_reported_as_errors() {
    let out = gradsum(&["synth", "/no/such/file.gsum"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("/no/such/file.gsum"));
}

#[test]
fn derivations_emit_as_json_trees() {
    let f = source_file("((inj1 ()) : (Unit +1 Unit))");
    let out = gradsum(&[
        "synth",
        f.path().to_str().unwrap(),
        "--emit-derivation",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["rule"], "SynAnno");
    assert_eq!(v["dir"], "synth");
    assert_eq!(v["type"], "Unit +1 Unit");
    let intro = &v["children"][0];
    assert_eq!(intro["rule"], "ChkSumIntro");
    assert_eq!(intro["side"]["relation"], "subsum");
    assert_eq!(intro["side"]["left"], "+?1");
    assert_eq!(intro["side"]["right"], "+1");
    assert!(intro["children"][0]["children"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn fragment_checkers_accept_their_own_terms_and_reject_foreign_ones() {
    let static_prog = source_file("((inj1 ()) : (Unit +1 Unit))");
    let dynamic_prog = source_file("((inj1 ()) : (Unit +? Unit))");

    let path = static_prog.path().to_str().unwrap().to_owned();
    let out = gradsum(&["fragment", &path, "--static"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "Unit +1 Unit");
    let out = gradsum(&["fragment", &path, "--dynamic"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("outside this fragment"));

    let path = dynamic_prog.path().to_str().unwrap().to_owned();
    let out = gradsum(&["fragment", &path, "--dynamic"]);
    assert!(out.status.success());
    let out = gradsum(&["fragment", &path, "--static"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fragment_requires_exactly_one_checker_flag() {
    let f = source_file("()");
    let path = f.path().to_str().unwrap().to_owned();
    let out = gradsum(&["fragment", &path]);
    assert!(!out.status.success());
    let out = gradsum(&["fragment", &path, "--static", "--dynamic"]);
    assert!(!out.status.success());
}

// ======================================================================
// elaborate / run
// ======================================================================

#[test]
fn elaborate_reproduces_the_pinned_migration_translation() {
    let out = gradsum(&["elaborate", &golden("migration_f2_xq.gsum")]);
    assert!(out.status.success());
    let expected = std::fs::read_to_string(golden("migration_f2_xq.expected.txt")).unwrap();
    assert_eq!(stdout(&out).trim(), expected.trim());
}

#[test]
fn elaborate_json_reports_both_types() {
    let out = gradsum(&[
        "elaborate",
        &golden("migration_f2_xq.gsum"),
        "--saturate",
        "--emit",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["mode"], "saturating");
    assert_eq!(v["source_type"], "Unit");
    assert_eq!(v["target_type"], "Unit");
    let term = v["term"].as_str().unwrap();
    assert!(term.contains("<+2 => +>"), "saturated cast missing: {term}");
}

#[test]
fn run_reduces_the_migration_program_to_unit() {
    let path = golden("migration_f2_xq.gsum");
    for extra in [None, Some("--saturate")] {
        let mut args = vec!["run", path.as_str()];
        args.extend(extra);
        let out = gradsum(&args);
        assert!(out.status.success(), "args {args:?}");
        assert_eq!(stdout(&out).trim(), "()");
    }
}

#[test]
fn run_trace_shows_each_step_and_its_rule() {
    let out = gradsum(&["run", &golden("migration_f2_xq.gsum"), "--trace"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("[ReduceCaseTwo]"), "trace: {text}");
    assert!(text.contains("[ReduceBeta]"), "trace: {text}");
    let arrows = text.matches("--> ").count();
    assert_eq!(arrows, 4, "step count in: {text}");
}

#[test]
fn run_exits_3_on_matchfail() {
    let f = source_file("((case ((inj1 ()) : (Unit +? Unit)) of inj2 x => x) : Unit)");
    let out = gradsum(&["run", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout(&out).trim(), "matchfail");
}

#[test]
fn run_exits_1_when_the_step_budget_runs_out() {
    // A redex that needs one step, with none allowed.
    let f = source_file("((fn x => x) : (Unit -> Unit)) ()");
    let out = gradsum(&["run", f.path().to_str().unwrap(), "--max-steps", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no value after 0 steps"));
}

// ======================================================================
// fuzz
// ======================================================================

#[test]
fn fuzz_runs_a_small_suite_clean() {
    let out = gradsum(&[
        "fuzz",
        "--suite",
        "fragments",
        "--count",
        "40",
        "--seed",
        "11",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("suite fragments:"), "report: {text}");
    assert!(text.contains("0 failures"), "report: {text}");
    assert!(text.trim_end().ends_with("ok"), "report: {text}");
}

#[test]
fn fuzz_json_reports_cases_and_coverage() {
    let out = gradsum(&[
        "fuzz",
        "--suite",
        "translation",
        "--count",
        "25",
        "--seed",
        "3",
        "--size",
        "12",
        "--depth",
        "1",
        "--json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["suite"], "translation");
    assert!(v["cases"].as_u64().unwrap() > 0);
    assert!(v["failures"].as_array().unwrap().is_empty());
    assert!(!v["coverage"].as_object().unwrap().is_empty());
}

#[test]
fn fuzz_rejects_unknown_suites() {
    let out = gradsum(&["fuzz", "--suite", "nope", "--count", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown suite"));
    assert!(stderr(&out).contains("relations-oracle"));
}
