use std::path::Path;
use std::process::{Command, Output};

fn trine(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trine"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn trine")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn theta_curve_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = trine(&["theta-curve"], dir.path());
    assert!(out.status.success());
    let csv = read(&dir.path().join("theta_curve.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "alpha,theta_opt_rad,info_bits");
    assert_eq!(lines[1], "0.000000,0.523599,0.584963");
    assert_eq!(lines.len(), 72);
}

#[test]
fn single_point_range() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["theta-curve", "--alpha-min", "0.03", "--alpha-max", "0.03"];
    assert!(trine(&args, dir.path()).status.success());
    assert_eq!(read(&dir.path().join("theta_curve.csv")).lines().count(), 2);
}

#[test]
fn theta_family_file() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "theta-family",
        "--alpha-min",
        "0",
        "--alpha-max",
        "0.06",
        "--alpha-step",
        "0.03",
    ];
    assert!(trine(&args, dir.path()).status.success());
    let csv = read(&dir.path().join("theta_family.csv"));
    assert_eq!(csv.lines().next(), Some("alpha,theta_deg,info_bits"));
    assert_eq!(csv.lines().count(), 1 + 3 * 11);
}

#[test]
fn envelope_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let out = trine(&["envelope", "--format", "jsonl", "--alpha-step", "0.01"], dir.path());
    assert!(out.status.success());
    let text = read(&dir.path().join("envelope.jsonl"));
    let row = text.lines().find(|l| l.contains("\"alpha\":0.03,")).unwrap();
    assert!(row.contains("\"info_envelope\":0.742332"), "{row}");
}

#[test]
fn envelope_outside_gamma1_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = trine(&["envelope", "--alpha-max", "0.07"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn povm_file_and_regimes() {
    let dir = tempfile::tempdir().unwrap();
    assert!(trine(&["povm", "--alpha", "0.03"], dir.path()).status.success());
    let csv = read(&dir.path().join("povm.csv"));
    assert!(csv.contains("\nindex,p_weight,phi_rad,theta_rad,x,y,z\n"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 7);
    assert!(csv.lines().last().unwrap().starts_with("# completeness_residual="));

    assert!(trine(&["povm", "--alpha", "0.2"], dir.path()).status.success());
    assert_eq!(
        read(&dir.path().join("povm.csv"))
            .lines()
            .filter(|l| !l.starts_with('#'))
            .count(),
        4
    );

    assert_eq!(trine(&["povm", "--alpha", "0.9"], dir.path()).status.code(), Some(2));
}

#[test]
fn usage_and_io_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        trine(&["theta-curve", "--alpha-step", "0"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(trine(&["bogus"], dir.path()).status.code(), Some(2));

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    assert_eq!(trine(&["theta-curve"], &blocker.join("sub")).status.code(), Some(3));
}

#[test]
fn verify_passes_and_fault_fails() {
    let dir = tempfile::tempdir().unwrap();
    let ok = trine(&["verify"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    let report = String::from_utf8(ok.stdout).unwrap();
    assert!(report.contains("gamma1 = 0.0613"));
    assert!(!report.contains("FAIL"));

    let other_seed = trine(&["verify", "--seed", "7"], dir.path());
    assert_eq!(other_seed.status.code(), Some(0));

    let bad = trine(&["verify", "--inject-fault", "0.5"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    let report = read(&dir.path().join("verify.txt"));
    assert!(report.lines().any(|l| l.starts_with("FAIL completeness")));
}

#[test]
fn cache_file_is_written_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("gamma1.cfg");
    let cache_arg = cache.to_str().unwrap();
    assert!(trine(&["povm", "--cache", cache_arg], dir.path()).status.success());
    let first = read(&dir.path().join("povm.csv"));
    assert!(read(&cache).contains("gamma1 = 0.0613"));
    assert!(trine(&["povm", "--cache", cache_arg], dir.path()).status.success());
    assert_eq!(read(&dir.path().join("povm.csv")), first);
}

#[test]
fn output_independent_of_threads() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for cmd in ["theta-curve", "envelope", "verify"] {
        assert!(trine(&[cmd, "--threads", "1"], a.path()).status.success());
        assert!(trine(&[cmd, "--threads", "4"], b.path()).status.success());
    }
    for name in ["theta_curve.csv", "envelope.csv", "verify.txt"] {
        assert_eq!(read(&a.path().join(name)), read(&b.path().join(name)), "{name}");
    }
}
