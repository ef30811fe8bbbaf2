//! End-to-end checks of the command-line interface: schemas, determinism
//! under a fixed seed, and exit codes.

use std::process::Command;

fn laxtower() -> Command {
    Command::new(env!("CARGO_BIN_EXE_laxtower"))
}

#[test]
fn verify_virasoro_emits_csv_and_succeeds() {
    let out = laxtower()
        .args(["verify", "--suite", "virasoro", "--seed", "1", "--probes", "2"])
        .output()
        .expect("spawns");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "check_id,anchor,params,defect,tol,pass"
    );
    for line in lines {
        assert_eq!(line.split(',').count(), 6, "bad row: {line}");
        assert!(line.ends_with("true"), "check failed: {line}");
    }
}

#[test]
fn verify_is_deterministic_under_a_seed() {
    let run = || {
        let out = laxtower()
            .args(["verify", "--suite", "involution", "--seed", "9", "--probes", "2"])
            .output()
            .expect("spawns");
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn verify_rmatrix_filter() {
    let out = laxtower()
        .args([
            "verify", "--suite", "involution", "--probes", "2", "--rmatrix", "ddym",
        ])
        .output()
        .expect("spawns");
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        assert!(line.contains("[ddym"), "unexpected row: {line}");
    }
}

#[test]
fn unknown_suite_is_a_config_error() {
    let out = laxtower()
        .args(["verify", "--suite", "nonsense"])
        .output()
        .expect("spawns");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown verify suite"));
}

#[test]
fn evolve_reports_flat_conserved_series() {
    let out = laxtower()
        .args([
            "evolve",
            "--hierarchy",
            "dtoda",
            "--flow",
            "1",
            "--T",
            "0.1",
            "--dt",
            "1e-3",
            "--modes",
            "16",
            "--init",
            "u0=0.1*cos;u1=1",
        ])
        .output()
        .expect("spawns");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# hierarchy = dtoda")));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(data[0].starts_with("t,tr_pow_1"));
    assert!(data.len() > 2);
    // The mean of u0 (first casimir column) must be flat.
    let header: Vec<&str> = data[0].split(',').collect();
    let cas_idx = header.iter().position(|h| *h == "casimir_0").unwrap();
    let first: f64 = data[1].split(',').nth(cas_idx).unwrap().parse().unwrap();
    let last: f64 = data
        .last()
        .unwrap()
        .split(',')
        .nth(cas_idx)
        .unwrap()
        .parse()
        .unwrap();
    assert!((first - last).abs() < 1e-10);
}

#[test]
fn evolve_writes_files_with_manifest() {
    let dir = std::env::temp_dir().join("laxtower-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("run.csv");
    let out = laxtower()
        .args([
            "evolve",
            "--hierarchy",
            "benny",
            "--flow",
            "2",
            "--T",
            "0.05",
            "--dt",
            "1e-3",
            "--modes",
            "16",
            "--init",
            "u0=0.1*sin;um1=1",
            "--out",
        ])
        .arg(&out_path)
        .output()
        .expect("spawns");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let fields = std::fs::read_to_string(&out_path).unwrap();
    assert!(fields.starts_with("t,x,u[0],u[-1]"));
    let manifest =
        std::fs::read_to_string(dir.join("run.csv.manifest.txt")).unwrap();
    assert!(manifest.contains("hierarchy = benny"));
    assert!(manifest.contains("dt = 0.001"));
    let conserved =
        std::fs::read_to_string(dir.join("run.csv.conserved.csv")).unwrap();
    assert!(conserved.starts_with("t,tr_pow_1"));
}

#[test]
fn evolve_blowup_is_reported_as_failure() {
    let out = laxtower()
        .args([
            "evolve",
            "--hierarchy",
            "benny",
            "--flow",
            "2",
            "--T",
            "3",
            "--dt",
            "2e-3",
            "--modes",
            "16",
            "--init",
            "u0=2*sin;um1=1",
        ])
        .output()
        .expect("spawns");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("aborted") || err.contains("stability"),
        "stderr: {err}"
    );
}

#[test]
fn reduce_benny_second_structure() {
    let out = laxtower()
        .args([
            "reduce", "--family", "benny", "--n", "0", "--modes", "16", "--probes", "5",
        ])
        .output()
        .expect("spawns");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("extended-vs-table[benny;n=0]"));
    assert!(text.contains("dirac-probe[benny;n=0;p=0]"));
    for line in text.lines().skip(1) {
        assert!(line.ends_with("true"), "check failed: {line}");
    }
}

#[test]
fn operators_recursion_for_dtoda() {
    let out = laxtower()
        .args([
            "operators", "--family", "dtoda", "--check", "recursion", "--probes", "4",
        ])
        .output()
        .expect("spawns");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("recursion[dtoda;R^1B0=B1]"));
    assert!(text.contains("recursion[dtoda;R^2B0=B2]"));
    assert!(!text.contains("recursion[benny"));
}
