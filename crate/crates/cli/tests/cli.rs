//! Command line behavior: exit codes, usage errors, environment variable
//! fallbacks and subcommand output shapes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/biochem")
}

fn cli() -> Command {
    let mut command = Command::new(env!("CARGO_BIN_EXE_collabmarket"));
    for (key, _) in std::env::vars() {
        if key.starts_with("COLLABMARKET_") {
            command.env_remove(key);
        }
    }
    command
}

fn run(args: &[&str]) -> Output {
    cli().args(args).output().expect("binary runs")
}

fn ingest_fixture(dir: &Path) -> PathBuf {
    let ledger = dir.join("ledger.jsonl");
    let out = run(&[
        "ingest",
        "--registry",
        fixture_dir().to_str().unwrap(),
        "--publications",
        fixture_dir().join("publications.jsonl").to_str().unwrap(),
        "--window",
        "2001:2003",
        "--out",
        ledger.to_str().unwrap(),
        "--summary",
        dir.join("summary.csv").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    ledger
}

#[test]
fn performance_emits_one_row_per_university() {
    let tmp = tempfile::tempdir().unwrap();
    let ledger = ingest_fixture(tmp.path());
    let out = run(&[
        "performance",
        "--registry",
        fixture_dir().to_str().unwrap(),
        "--ledger",
        ledger.to_str().unwrap(),
        "--sds",
        "BIO/10",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    // header plus 49 data rows
    assert_eq!(stdout.lines().count(), 50);
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let ledger = ingest_fixture(tmp.path());
    let out = run(&[
        "correspondence",
        "--registry",
        fixture_dir().to_str().unwrap(),
        "--ledger",
        ledger.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("--sds"), "{stderr}");
    assert!(stderr.lines().any(|l| l.starts_with("error: usage:")), "{stderr}");
}

#[test]
fn unknown_subcommand_exits_one_with_help() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("Usage"), "{stderr}");
}

#[test]
fn help_exits_zero_and_lists_table_kinds() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn missing_input_file_is_an_io_error() {
    let out = run(&[
        "market",
        "--registry",
        fixture_dir().to_str().unwrap(),
        "--ledger",
        "/nonexistent/ledger.jsonl",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.lines().any(|l| l.starts_with("error: io:")), "{stderr}");
}

#[test]
fn invalid_registry_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    for (file, contents) in [
        ("regions.csv", "id,name\nR1,North\n"),
        ("universities.csv", "id,name,region_id\nU1,Uni,R9\n"),
        ("enterprises.csv", "id,name,region_id\n"),
        ("sds.csv", "id,name,discipline\n"),
        ("staff.csv", "university_id,sds_id,researcher_count\n"),
    ] {
        std::fs::write(tmp.path().join(file), contents).unwrap();
    }
    let out = run(&[
        "market",
        "--registry",
        tmp.path().to_str().unwrap(),
        "--ledger",
        "unused.jsonl",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.lines().any(|l| l.starts_with("error: validation:")), "{stderr}");
}

#[test]
fn environment_variables_back_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let ledger = ingest_fixture(tmp.path());
    let out = cli()
        .args(["performance"])
        .env("COLLABMARKET_REGISTRY", fixture_dir())
        .env("COLLABMARKET_LEDGER", &ledger)
        .env("COLLABMARKET_SDS", "BIO/10")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // explicit flag wins over the environment
    let out = cli()
        .args(["focus", "--region", "LAZ"])
        .env("COLLABMARKET_REGISTRY", fixture_dir())
        .env("COLLABMARKET_LEDGER", &ledger)
        .env("COLLABMARKET_REGION", "LOM")
        .env("COLLABMARKET_SDS", "BIO/10")
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("E-LAZ-1"), "{stdout}");
    assert!(!stdout.contains("E-LOM-1"), "{stdout}");
}

#[test]
fn synth_output_is_reproducible_and_ingestable() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let out = run(&[
            "synth",
            "--seed",
            "42",
            "--pubs",
            "25",
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in [
        "regions.csv",
        "universities.csv",
        "enterprises.csv",
        "sds.csv",
        "staff.csv",
        "publications.jsonl",
    ] {
        assert_eq!(
            std::fs::read(a.join(file)).unwrap(),
            std::fs::read(b.join(file)).unwrap(),
            "{file} differs between identical seeds"
        );
    }
    // synthetic output feeds straight back into ingest
    let out = run(&[
        "ingest",
        "--registry",
        a.to_str().unwrap(),
        "--publications",
        a.join("publications.jsonl").to_str().unwrap(),
        "--window",
        "2001:2003",
        "--out",
        tmp.path().join("ledger.jsonl").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("accepted,25"), "{summary}");
    assert!(summary.contains("rejected,0"), "{summary}");
}

#[test]
fn verify_reports_clean_sweep() {
    let out = run(&["verify", "--seeds", "40", "--pubs", "20"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let summary: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(summary["mismatches"], 0);
    assert_eq!(summary["status"], "ok");
}

#[test]
fn plotdata_is_rejected_for_plain_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let ledger = ingest_fixture(tmp.path());
    let out = run(&[
        "market",
        "--registry",
        fixture_dir().to_str().unwrap(),
        "--ledger",
        ledger.to_str().unwrap(),
        "--format",
        "plotdata",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
