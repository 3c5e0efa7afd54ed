//! End-to-end tests of the command-line surface: output grammar, JSON
//! round-trips, exit codes, and byte determinism.

use std::process::{Command, Output};

fn akform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_akform"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 output")
}

#[test]
fn validate_reports_flags() {
    for id in ["torus8", "h12xT3"] {
        let out = akform(&["validate", id]);
        assert!(out.status.success());
        let text = stdout(&out);
        assert!(text.contains("almost Kahler (d omega = 0): yes"), "{}", text);
        assert!(text.contains("integrable: no"), "{}", text);
    }
}

#[test]
fn check_prints_witness_in_canonical_order() {
    let out = akform(&["check", "torus8", "--form", "phi[1,2,~2,~3]", "--op", "bc"]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out).trim(),
        "not harmonic; witness: delbar-condition = V4(g)*phi[2,4,~1,~2,~3]"
    );
    let out = akform(&["check", "torus8", "--form", "phi[1,2,~2,~3]", "--op", "del"]);
    assert_eq!(stdout(&out).trim(), "harmonic");
}

#[test]
fn decompose_prints_components_ascending() {
    let out = akform(&["decompose", "torus8", "--form", "2*phi[2,~1,4,~4]"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r=0: phi[2,3,~1,~3] - phi[2,4,~1,~4]");
    assert_eq!(lines[1], "r=1: -i*phi[2,~1]");
}

#[test]
fn harmonic_json_roundtrips() {
    let out = akform(&["harmonic", "h12xT3", "--op", "delbar", "--bidegree", "2,2", "--json"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(value["dim"], 16);
    let m = akform::model::Model::load("h12xT3").unwrap();
    let space = akform::harmonic::harmonic_space(&m, akform::harmonic::HarmonicOp::Delbar, 2, 2);
    for (i, lit) in value["basis"].as_array().unwrap().iter().enumerate() {
        let reparsed =
            akform::parse::parse_form(lit.as_str().unwrap(), m.n, &m.functions).unwrap();
        assert_eq!(reparsed, space.basis[i], "basis[{}] does not round-trip", i);
    }
}

#[test]
fn missing_model_file_exits_2() {
    let out = akform(&["harmonic", "missing.ak", "--op", "bc", "--bidegree", "2,2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8(out.stderr).unwrap().is_empty());
}

#[test]
fn bad_usage_exits_2() {
    let out = akform(&["harmonic", "torus8", "--op", "zz", "--bidegree", "2,2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = akform(&["nosuchcommand"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reproduce_passes_and_is_deterministic() {
    for id in ["torus8", "h12xT3"] {
        let a = akform(&["reproduce", id]);
        assert!(a.status.success(), "reproduce {} failed:\n{}", id, stdout(&a));
        let b = akform(&["reproduce", id]);
        assert_eq!(a.stdout, b.stdout, "non-deterministic output for {}", id);
    }
}

#[test]
fn audit_failure_exit_code() {
    // primitive-descent-2-2 genuinely fails on the torus model, so the
    // process reports it through exit status 1.
    let out = akform(&["audit", "torus8", "--name", "primitive-descent-2-2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
    let out = akform(&["audit", "torus8", "--name", "inclusion-2-2"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn audit_not_applicable_exits_2() {
    let out = akform(&["audit", "torus8", "--name", "thm-kk-structure(d,2)"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_quick_run() {
    let out = akform(&["selftest", "--cases", "5", "--model", "h12xT3"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("result: PASS"));
}

#[test]
fn check_applies_operator_expressions() {
    let out = akform(&["check", "torus8", "--form", "phi[1,2,~2,~3]", "--expr", "delbar"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "V4(g)*phi[2,4,~1,~2,~3]");
    let out = akform(&["check", "torus8", "--form", "phi[1]", "--expr", "del delbar star"]);
    assert_eq!(stdout(&out).trim(), "0");
}

#[test]
fn operator_zero_audit() {
    let out = akform(&["audit", "h12xT3", "--name", "zero(star lapBC - lapA star)"]);
    assert_eq!(out.status.code(), Some(0));
    let out = akform(&["audit", "torus8", "--name", "zero(Lam delbar - delbar Lam + i delstar)"]);
    assert_eq!(out.status.code(), Some(0));
    // A genuinely nonzero operator fails the audit.
    let out = akform(&["audit", "torus8", "--name", "zero(L)"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unicode_rendering_is_opt_in() {
    let out = akform(&["--unicode", "decompose", "torus8", "--form", "2*phi[2,~1,4,~4]"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\u{03c6}"), "expected unicode phi in {}", text);
}
