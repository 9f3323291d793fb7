//! End-to-end checks of the command-line interface, driving the built
//! binary the way a user would.

mod common;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qdag"))
}

fn workdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qdag-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_fork(dir: &Path) -> PathBuf {
    let path = dir.join("fork.bn");
    std::fs::write(&path, common::FORK_TEXT).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Parses `Var value number` lines into (var, value, number) triples.
fn value_lines(text: &str) -> Vec<(String, String, f64)> {
    text.lines()
        .filter(|line| !line.starts_with("Pr(e)"))
        .filter_map(|line| {
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                [var, value, number] => {
                    number.parse().ok().map(|p| (var.to_string(), value.to_string(), p))
                }
                _ => None,
            }
        })
        .collect()
}

/// Parses every `Pr(e) = number` line.
fn normalizer_lines(text: &str) -> Vec<f64> {
    text.lines()
        .filter(|l| l.starts_with("Pr(e)"))
        .filter_map(|l| l.split_whitespace().last()?.parse().ok())
        .collect()
}

#[test]
fn compile_then_eval_reproduces_the_worked_values() {
    let dir = workdir();
    let network = write_fork(&dir);
    let artifact = dir.join("fork.qdag");

    let out = bin()
        .args(["compile", "--network"])
        .arg(&network)
        .args(["--evidence", "C", "--query", "B", "-o"])
        .arg(&artifact)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = bin().arg("eval").arg(&artifact).args(["--set", "C=ON"]).output().unwrap();
    assert!(out.status.success());
    let values = value_lines(&stdout(&out));
    assert_eq!(values.len(), 2);
    assert_eq!((values[0].0.as_str(), values[0].1.as_str()), ("B", "ON"));
    assert!((values[0].2 - 0.3475).abs() < 1e-9);
    assert!((values[1].2 - 0.2725).abs() < 1e-9);

    let out = bin()
        .arg("eval")
        .arg(&artifact)
        .args(["--unknown", "C", "--normalize"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let pr_e = normalizer_lines(&text)[0];
    assert!((pr_e - 1.0).abs() < 1e-9);
    let values = value_lines(&text);
    assert!((values[0].2 - 0.635).abs() < 1e-9);
    assert!((values[1].2 - 0.365).abs() < 1e-9);
}

#[test]
fn verify_reports_success_within_tolerance() {
    let dir = workdir();
    let network = write_fork(&dir);
    let out = bin()
        .args(["verify", "--network"])
        .arg(&network)
        .args(["--evidence", "C", "--query", "B"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("max abs deviation"));
    assert!(text.contains("ok (tolerance"));
}

#[test]
fn stats_reports_node_counts_and_clusters() {
    let dir = workdir();
    let network = write_fork(&dir);
    let artifact = dir.join("stats.qdag");
    let out = bin()
        .args(["compile", "--network"])
        .arg(&network)
        .args(["--evidence", "C", "--query", "B", "-o"])
        .arg(&artifact)
        .output()
        .unwrap();
    assert!(out.status.success());

    let out = bin().arg("stats").arg(&artifact).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("nodes 21"), "{text}");
    assert!(text.contains("  num 7"));
    assert!(text.contains("  esn 2"));
    assert!(text.contains("  mul 8"));
    assert!(text.contains("  add 4"));
    assert!(text.contains("queries 2"));
    assert!(text.contains("C: 2 esns"));

    let out = bin()
        .args(["stats", "--network"])
        .arg(&network)
        .args(["--evidence", "C"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("clusters 2"), "{text}");
    assert!(text.contains("{A B}"));
    assert!(text.contains("{A C}"));
    assert!(text.contains("separator {A}"));
}

#[test]
fn repl_streams_updated_posteriors() {
    let dir = workdir();
    let network = write_fork(&dir);
    let artifact = dir.join("repl.qdag");
    assert!(bin()
        .args(["compile", "--network"])
        .arg(&network)
        .args(["--evidence", "C", "--query", "B", "-o"])
        .arg(&artifact)
        .status()
        .unwrap()
        .success());

    let mut child = bin()
        .arg("repl")
        .arg(&artifact)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"set C=ON\nset C=ON\nshow\nunset C\nquit\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);

    // set C=ON prints the conditioned posterior
    let normalizers = normalizer_lines(&text);
    assert!((normalizers[0] - 0.62).abs() < 1e-9, "{text}");
    let first = value_lines(&text);
    assert!((first[0].2 - 0.3475 / 0.62).abs() < 1e-9);
    // setting the same value again reports no change
    assert!(text.contains("(no change, 0 nodes recomputed)"));
    // show echoes the current evidence
    assert!(text.contains("evidence C = ON"));
    // unset restores the prior
    assert!((normalizers.last().unwrap() - 1.0).abs() < 1e-9, "{text}");
}

#[test]
fn errors_exit_nonzero_with_diagnostics() {
    let dir = workdir();

    // missing file
    let out = bin().args(["eval"]).arg(dir.join("absent.qdag")).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));

    // invalid network (bad row sum)
    let bad = dir.join("bad.bn");
    std::fs::write(&bad, "network bad\nvariable A { x y }\ncpt A { .5 .6 }\n").unwrap();
    let out = bin().args(["compile", "--network"]).arg(&bad).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sums to"));

    // unknown evidence value at eval time
    let network = write_fork(&dir);
    let artifact = dir.join("err.qdag");
    assert!(bin()
        .args(["compile", "--network"])
        .arg(&network)
        .args(["--evidence", "C", "-o"])
        .arg(&artifact)
        .status()
        .unwrap()
        .success());
    let out = bin().arg("eval").arg(&artifact).args(["--set", "C=MAYBE"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a value"));

    // malformed dag file
    let mangled = dir.join("mangled.qdag");
    std::fs::write(&mangled, "QDAG 1\nNODE 0 MUL 2 4 5\n").unwrap();
    let out = bin().arg("eval").arg(&mangled).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ahead of its declaration"));
}

#[test]
fn compile_without_query_answers_every_variable() {
    let dir = workdir();
    let network = write_fork(&dir);
    let out = bin()
        .args(["compile", "--network"])
        .arg(&network)
        .args(["--evidence", "C"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    for var in ["A", "B", "C"] {
        assert!(text.contains(&format!("QUERY {var}")), "missing QUERY {var}");
    }
}
