//! End-to-end checks of the command-line interface and its exit codes.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_classtowers"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn classify_prints_the_dossier() {
    let out = run(&["classify", "255"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("(m, n) = (1, 1)"));
    assert!(text.contains("M_{0,0} = <32,35>"));
    assert!(text.contains("h2(Q(sqrt(-17))) = 4"));
}

#[test]
fn classify_rejects_with_exit_code_2() {
    let out = run(&["classify", "105"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rejected"));
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn size_guard_violations_exit_2() {
    let out = run(&["group", "12", "12"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn size_guard_env_override_is_honored() {
    let with_guard = |bits: &str| {
        Command::new(env!("CARGO_BIN_EXE_classtowers"))
            .args(["group", "4", "4"]) // order 2^11
            .env("CLASSTOWERS_SIZE_GUARD", bits)
            .output()
            .expect("binary runs")
    };
    assert_eq!(with_guard("10").status.code(), Some(2));
    assert_eq!(with_guard("11").status.code(), Some(0));
}

#[test]
fn pattern_1_2_contains_six_elementary_components() {
    let out = run(&["pattern", "1", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let tau1 = text
        .lines()
        .find(|l| l.starts_with("tau1"))
        .expect("tau1 line");
    assert_eq!(tau1.matches("(1,1,1)").count(), 6);
}

#[test]
fn classify3_emits_the_label_pair() {
    let out = run(&["classify3", "2", "E8", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("G      = <729,54>-#2;2"));
    assert!(text.contains("G/G''  = <729,54>-#1;2"));

    let out = run(&["classify3", "1", "E8", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["classify3", "2", "E8", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn survey_csv_and_summary_streams_are_separate() {
    let out = run(&["survey", "0", "1000"]);
    assert!(out.status.success());
    let data = stdout(&out);
    let mut lines = data.lines();
    assert_eq!(lines.next(), Some("d,p1,p2,q,m,n,legendre_p2_q,position"));
    assert_eq!(lines.next(), Some("255,17,5,3,1,1,-1,<32,35>"));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("accepted = 3"));
    assert!(!data.contains("accepted"), "summary must not pollute the data stream");
}

#[test]
fn survey_json_is_an_array_of_objects() {
    let out = run(&["survey", "0", "700", "--format", "json"]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    let arr = parsed.as_array().expect("array");
    assert_eq!(arr.len(), 2); // 255 and 595
    assert_eq!(arr[0]["d"], 255);
    assert_eq!(arr[0]["position"], "<32,35>");
}

#[test]
fn group_prints_class_coclass_and_presentation() {
    let out = run(&["group", "2", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("order 128 = 2^7"));
    assert!(text.contains("class = 3, coclass = 4"));
    assert!(text.contains("P 1 : g2^4"));
}

#[test]
fn verify_reports_all_cells() {
    let out = run(&["verify", "2", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.matches("PASS").count(), 4);
}

#[test]
fn classgroup_prints_structure() {
    let out = run(&["classgroup", "-68", "--forms"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("h = 4"));
    assert!(text.contains("invariants = (4)"));
    assert!(text.contains("(3,2,6)"));
}
