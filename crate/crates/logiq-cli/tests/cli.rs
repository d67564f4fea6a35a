//! End-to-end CLI checks: every documented subcommand is reachable, artifacts
//! are reproducible byte-for-byte, and bad configs fail with diagnostics.

use std::path::Path;
use std::process::Command;

fn logiq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_logiq"))
}

fn read(dir: &Path, name: &str) -> String {
    let mut found = None;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() && path.join(name).exists() {
            found = Some(std::fs::read_to_string(path.join(name)).unwrap());
        }
    }
    found.unwrap_or_else(|| panic!("{name} not found under {}", dir.display()))
}

#[test]
fn qft_noiseless_summary_reports_unit_fidelities() {
    let dir = std::env::temp_dir().join("logiq-cli-qft");
    let _ = std::fs::remove_dir_all(&dir);
    let out = logiq()
        .args([
            "qft",
            "--method",
            "ancilla",
            "--noise",
            "zero",
            "--shots",
            "4",
            "--seed",
            "9",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("1.000"), "summary shows F1 = F2 = 1: {stdout}");
    let summary = read(&dir, "summary.txt");
    assert!(summary.contains("QFT fidelity bounds"));
    let manifest = read(&dir, "manifest.json");
    assert!(manifest.contains("config_hash"));
}

#[test]
fn resources_table_matches_published_counts() {
    let dir = std::env::temp_dir().join("logiq-cli-res");
    let _ = std::fs::remove_dir_all(&dir);
    let out = logiq()
        .args(["resources", "--method", "ancilla", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("11-11"), "injections: {stdout}");
    assert!(stdout.contains("13-14"), "logical TQ: {stdout}");
    assert!(stdout.contains("28"), "physical qubits: {stdout}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = std::env::temp_dir().join("logiq-cli-repro");
    let _ = std::fs::remove_dir_all(&dir);
    let run = || {
        let out = logiq()
            .args([
                "t-bench",
                "--method",
                "two",
                "--noise",
                "h2-1",
                "--lengths",
                "4,8,12",
                "--circuits",
                "2",
                "--shots",
                "20",
                "--seed",
                "3",
                "--out",
            ])
            .arg(&dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (read(&dir, "results.json"), read(&dir, "decay.csv"))
    };
    let first = run();
    let second = run();
    assert_eq!(first, second, "artifacts must be reproducible");
    // Decay CSV has the fixed column header.
    assert!(first.1.starts_with("L,survival,shots,retention\n"));
}

#[test]
fn emit_qasm_writes_parseable_programs() {
    let dir = std::env::temp_dir().join("logiq-cli-emit");
    let _ = std::fs::remove_dir_all(&dir);
    let out = logiq()
        .args(["emit-qasm", "--method", "recursive", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let sub = entry.unwrap().path();
        if sub.is_dir() {
            for f in std::fs::read_dir(&sub).unwrap() {
                let p = f.unwrap().path();
                if p.extension().is_some_and(|e| e == "qasm") {
                    let text = std::fs::read_to_string(&p).unwrap();
                    assert!(text.starts_with("OPENQASM 2.0;\n"));
                    logiq_core::ir::qasm::parse_qasm(&text).unwrap();
                    count += 1;
                }
            }
        }
    }
    assert_eq!(count, 16, "one program per basis state");
}

#[test]
fn config_file_run_and_unknown_key_rejection() {
    let dir = std::env::temp_dir().join("logiq-cli-cfg");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("good.json");
    std::fs::write(
        &good,
        format!(
            r#"{{"protocol":"resources","noise":"zero","shots":1,"seed":1,"method":"recursive","out":{:?}}}"#,
            dir.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = logiq().args(["run", "--config"]).arg(&good).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("15-18"));

    let bad = dir.join("bad.json");
    std::fs::write(
        &bad,
        r#"{"protocol":"rb","noise":"zero","shots":1,"seed":1,"bogus_key":true}"#,
    )
    .unwrap();
    let out = logiq().args(["run", "--config"]).arg(&bad).output().unwrap();
    assert!(!out.status.success(), "unknown keys must be rejected");
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus_key"));
}

#[test]
fn bad_noise_preset_is_a_named_error() {
    let out = logiq().args(["rb", "--noise", "h9-9", "--shots", "1"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("h9-9"));
}
