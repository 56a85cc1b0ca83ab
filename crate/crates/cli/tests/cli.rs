use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qenv_core::certificate::{sha256_hex, Certificate, Verdict};
use qenv_core::linalg::int::int;
use qenv_core::presentation::Presentation;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name).to_str().unwrap().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn qenv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qenv")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = qenv(args);
    assert!(out.status.success(), "{:?}: {}", args, String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn derived_of_c2_is_trivial() {
    assert_eq!(ok(&["derived", "--group", &fixture("c2.mtab")]), "1\n");
    assert_eq!(ok(&["derived", "--group", &fixture("g64_149.mtab")]), "8\n");
    assert_eq!(ok(&["derived", "--group", &fixture("s4.perm")]), "12\n");
}

#[test]
fn envelope_of_s3() {
    let out = scratch("s3.fpres");
    let stdout = ok(&["envelope", "--group", &fixture("s3.mtab"), "--out", out.to_str().unwrap()]);
    assert!(stdout.contains("generators: 6\n") && stdout.contains("raw_relators: 36\n"), "{}", stdout);
    let p = Presentation::parse_fpres(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(p.generator_count(), 6);

    // A(S3) abelianises to Z^3, so its class-1 3-quotient is C3^3.
    let q = ok(&["quotient", "--presentation", out.to_str().unwrap(), "--prime", "3", "--class", "1"]);
    assert!(q.contains("order: 27\n"), "{}", q);
}

#[test]
fn q8_text_report_round_trips() {
    let path = scratch("q8.txt");
    let stdout = ok(&["certify", "--group", &fixture("q8.mtab"), "--report", path.to_str().unwrap(), "--with-oracle"]);
    assert_eq!(stdout, "verdict: INCONCLUSIVE\n");
    let text = fs::read_to_string(&path).unwrap();
    let cert = Certificate::parse_text(&text).unwrap();
    assert_eq!(cert.to_text(), text);
    assert_eq!((cert.group_order, cert.derived_order, cert.verdict), (8, 2, Verdict::Inconclusive));
    assert_eq!(cert.oracle_invariant_factors, Some(vec![]));
    assert_eq!(cert.fixture_checksum, sha256_hex(&fs::read(fixture("q8.mtab")).unwrap()));
}

#[test]
fn json_report_is_selected_by_extension() {
    let path = scratch("g64.json");
    ok(&["certify", "--group", &fixture("g64_149.mtab"), "--report", path.to_str().unwrap()]);
    let text = fs::read_to_string(&path).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["verdict"], "NONTRIVIAL");
    assert_eq!(value["quotient_derived_order"], "16");
    let cert = Certificate::parse_json(&text).unwrap();
    assert_eq!(cert.quotient_order, int(1 << 52));
    assert_eq!(cert.to_json().unwrap(), text);
}

#[test]
fn perturbed_cochain_is_rejected() {
    let path = scratch("s3_bad.txt");
    fs::write(&path, "2 3 1/3\n").unwrap();
    let out = ok(&["verify-cocycle", "--group", &fixture("s3.mtab"), "--cochain", path.to_str().unwrap()]);
    assert!(out.starts_with("NOT_COCYCLE "), "{}", out);

    fs::write(&path, "# zero cochain\n").unwrap();
    let out = ok(&[
        "verify-cocycle",
        "--group",
        &fixture("s3.mtab"),
        "--cochain",
        path.to_str().unwrap(),
        "--check-coboundary",
    ]);
    assert_eq!(out, "COCYCLE\ncoboundary: yes\n");
}

#[test]
fn oracle_report_and_system_dump() {
    let report = scratch("d8_oracle.json");
    let dir = scratch("d8_system");
    let out = ok(&[
        "oracle",
        "--group",
        &fixture("d8.mtab"),
        "--report",
        report.to_str().unwrap(),
        "--dump-system",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out, "oracle_invariant_factors: []\norder: 1\n");
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(value["class_count"], 5);
    let m = fs::read_to_string(dir.join("M.txt")).unwrap();
    assert!(m.starts_with("512 36 "), "{}", m.lines().next().unwrap());
    assert!(fs::read_to_string(dir.join("B.txt")).unwrap().starts_with("36 5 "));
}

#[test]
fn errors_exit_nonzero() {
    let missing = qenv(&["derived", "--group", "/nonexistent/g.mtab"]);
    assert_eq!(missing.status.code(), Some(1));
    let wrong_ext = qenv(&["derived", "--group", &fixture("gap_reference.txt")]);
    assert_eq!(wrong_ext.status.code(), Some(1));
    let capped = qenv(&["oracle", "--group", &fixture("g64_149.mtab"), "--oracle-cap", "32"]);
    assert_eq!(capped.status.code(), Some(1));
    let usage = qenv(&["certify"]);
    assert_eq!(usage.status.code(), Some(2));
    let not_prime = qenv(&["certify", "--group", &fixture("c2.mtab"), "--prime", "4"]);
    assert_eq!(not_prime.status.code(), Some(1));
}

#[test]
fn exhausted_budget_has_its_own_exit_code() {
    let out = qenv(&["oracle", "--group", &fixture("g64_149.mtab"), "--time-budget", "0"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("time budget"));
}
