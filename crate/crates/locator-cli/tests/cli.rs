//! End-to-end checks of the command-line tool.

use std::fs;
use std::process::Command;

fn locator() -> Command {
    Command::new(env!("CARGO_BIN_EXE_locator"))
}

fn write_tmp(name: &str, content: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("locator-cli-tests");
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

#[test]
fn solve_triangle_reports_non_locatable() {
    let graph = write_tmp("k3.txt", "3\n0 1\n1 2\n0 2\n");
    let out = locator()
        .args(["solve", "--graph"])
        .arg(&graph)
        .args(["--m", "1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"locatable\": false"));
    assert!(text.contains("\"certificate_verified\": true"));
    assert!(text.contains("\"format_version\": 1"));
}

#[test]
fn verify_exits_nonzero_on_evasion() {
    let graph = write_tmp("star.txt", "4\n0 1\n0 2\n0 3\n");
    let out = locator()
        .args(["verify", "--graph"])
        .arg(&graph)
        .args(["--m", "1", "--strategy", "always:b:0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"kind\": \"evasion_found\""));
    assert!(text.contains("witness_trace"));
}

#[test]
fn verify_matching_strategy_succeeds() {
    let graph = write_tmp("p4.txt", "4\n0 1\n1 2\n2 3\n");
    let out = locator()
        .args(["verify", "--graph"])
        .arg(&graph)
        .args(["--m", "12", "--strategy", "matching"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"kind\": \"all_captured\""));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let graph = write_tmp("k3b.txt", "3\n0 1\n1 2\n0 2\n");
    let run = || {
        let out = locator()
            .args(["simulate", "--graph"])
            .arg(&graph)
            .args([
                "--m",
                "2",
                "--strategy",
                "optimal",
                "--robber",
                "random:9",
                "--bound",
                "50",
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn short_subdivisions_of_complete_graphs_are_delegated() {
    // K_13 has minimum maximal matchings of size 6; at m = 6 < k+1 the
    // matching route does not apply and the complete-graph family is
    // handled by cited work instead.
    let mut lines = String::from("13\n");
    for u in 0..13 {
        for v in (u + 1)..13 {
            lines.push_str(&format!("{u} {v}\n"));
        }
    }
    let graph = write_tmp("k13.txt", &lines);
    let out = locator()
        .args(["verify", "--graph"])
        .arg(&graph)
        .args(["--m", "6", "--strategy", "matching"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("delegated to cited work"), "stderr: {err}");
}

#[test]
fn mixed_length_files_are_rejected() {
    let graph = write_tmp("mixed.txt", "3\n0 1 6\n1 2\n");
    let out = locator()
        .args(["mmm", "--graph"])
        .arg(&graph)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("mixes edges"), "stderr: {err}");
}

#[test]
fn check_mmm_lemma_r2_lists_both_graphs() {
    let out = locator().args(["check-mmm-lemma", "2"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"holds\": true"));
    assert!(text.contains("K_4"));
    assert!(text.contains("K_{2,2}"));
}
