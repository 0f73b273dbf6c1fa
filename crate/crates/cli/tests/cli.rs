use std::path::Path;
use std::process::{Command, Output};

fn tbi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tbi-dram"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_reports_every_check() {
    let out = tbi(&["verify", "--preset", "DDR4-3200", "--n", "256"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.lines().count() >= 6);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
}

#[test]
fn simulate_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = tbi(&[
        "simulate",
        "--preset",
        "DDR3-800,DDR4-3200",
        "--n",
        "200",
        "--audit",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("audit: 0 violation(s)"), "{text}");

    let csv = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2);
    let table = std::fs::read_to_string(out_dir.join("table.txt")).unwrap();
    assert!(table.contains("DDR3-800") && table.contains("DDR4-3200"));

    // A tolerance nobody can miss and one nobody can meet.
    let results = out_dir.join("results.csv");
    let loose = tbi(&[
        "compare",
        "--results",
        results.to_str().unwrap(),
        "--tolerance-pp",
        "100",
    ]);
    assert_eq!(loose.status.code(), Some(0), "{}", stdout(&loose));
    assert!(stdout(&loose).contains("0 failure(s)"));
    let strict = tbi(&[
        "compare",
        "--results",
        results.to_str().unwrap(),
        "--tolerance-pp",
        "0",
    ]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn trace_writes_a_command_listing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let out = tbi(&[
        "trace",
        "--preset",
        "LPDDR4-2133",
        "--scheme",
        "optimized",
        "--phase",
        "read",
        "--n",
        "64",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let trace = std::fs::read_to_string(&path).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("cycle,command,bank,row,column"));
    let reads = lines.filter(|l| l.split(',').nth(1) == Some("RD")).count();
    assert_eq!(reads, 64 * 65 / 2);
}

#[test]
fn preset_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/presets/DDR3-800.cfg");
    let path = dir.path().join("custom.cfg");
    std::fs::copy(src, &path).unwrap();
    let out = tbi(&[
        "simulate",
        "--preset",
        path.to_str().unwrap(),
        "--scheme",
        "optimized",
        "--n",
        "64",
        "--refresh",
        "off",
        "--out",
        dir.path().join("run").to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("custom"));
}

#[test]
fn errors_exit_with_two() {
    let unknown = tbi(&["verify", "--preset", "DDR9-1"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("error"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "config,scheme\nx,y\n").unwrap();
    let malformed = tbi(&["compare", "--results", bad.to_str().unwrap()]);
    assert_eq!(malformed.status.code(), Some(2));

    let zero = tbi(&[
        "simulate",
        "--preset",
        "DDR3-800",
        "--n",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(zero.status.code(), Some(2));
}
