//! End-to-end binary tests: exit codes, strict config rejection, output
//! determinism, and the no-write-on-failure rule.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_peetre"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("peetre-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, contents).unwrap();
    p
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary should run")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const WEIGHTED_5: &str = r#"{"kind":"weighted_l1","weights":[1,2,4,8,16],"p":1}"#;

#[test]
fn kcurve_writes_csv_and_is_deterministic() {
    let dir = workdir("kcurve");
    let couple = write(&dir, "weighted.json", WEIGHTED_5);
    let out1 = dir.join("curve1.csv");
    let out2 = dir.join("curve2.csv");
    for out in [&out1, &out2] {
        let st = run(bin()
            .args(["kcurve", "--couple"])
            .arg(&couple)
            .args(["--x", "basis:4", "--tmin", "1e-6", "--tmax", "1", "--points", "40", "--out"])
            .arg(out));
        assert!(st.status.success(), "{}", stderr_of(&st));
    }
    let text = fs::read_to_string(&out1).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,K,err"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 40);
    for pair in rows.windows(2) {
        assert!(pair[1][0] > pair[0][0]);
        assert!(pair[1][1] >= pair[0][1]);
    }
    assert_eq!(
        fs::read(&out1).unwrap(),
        fs::read(&out2).unwrap(),
        "same config must give byte-identical output"
    );
}

#[test]
fn kcurve_is_identical_under_thread_cap() {
    let dir = workdir("threads");
    let couple = write(&dir, "weighted.json", WEIGHTED_5);
    let serial = dir.join("serial.csv");
    let threaded = dir.join("threaded.csv");
    let st = run(bin()
        .env("K_THREADS", "1")
        .args(["kcurve", "--couple"])
        .arg(&couple)
        .args(["--x", "ones:5", "--tmin", "1e-4", "--tmax", "2", "--points", "64", "--out"])
        .arg(&serial));
    assert!(st.status.success(), "{}", stderr_of(&st));
    let st = run(bin()
        .env("K_THREADS", "4")
        .args(["kcurve", "--couple"])
        .arg(&couple)
        .args(["--x", "ones:5", "--tmin", "1e-4", "--tmax", "2", "--points", "64", "--out"])
        .arg(&threaded));
    assert!(st.status.success(), "{}", stderr_of(&st));
    assert_eq!(fs::read(&serial).unwrap(), fs::read(&threaded).unwrap());

    let st = run(bin()
        .env("K_THREADS", "zero")
        .args(["kcurve", "--couple"])
        .arg(&couple)
        .args(["--x", "ones:5", "--tmin", "1e-4", "--tmax", "2", "--points", "8", "--out"])
        .arg(dir.join("never.csv")));
    assert_eq!(st.status.code(), Some(2));
    assert!(!dir.join("never.csv").exists());
}

#[test]
fn nonconvex_numeric_couple_is_rejected_without_writing() {
    let dir = workdir("nonconvex");
    let couple = write(&dir, "bad.json", r#"{"kind":"lq_lp","q":2,"p":0.5}"#);
    let out = dir.join("curve.csv");
    let st = run(bin()
        .args(["kcurve", "--couple"])
        .arg(&couple)
        .args(["--x", "ones:3", "--tmin", "0.1", "--tmax", "1", "--points", "5", "--out"])
        .arg(&out));
    assert_eq!(st.status.code(), Some(2));
    assert!(!out.exists(), "validation failure must not write files");
}

#[test]
fn unknown_config_keys_are_rejected_with_the_key_name() {
    let dir = workdir("unknown-key");
    let couple = write(
        &dir,
        "bad.json",
        r#"{"kind":"weighted_l1","weights":[1,2],"wat":3}"#,
    );
    let st = run(bin()
        .args(["kcurve", "--couple"])
        .arg(&couple)
        .args(["--x", "basis:1", "--tmin", "0.1", "--tmax", "1", "--points", "5", "--out"])
        .arg(dir.join("curve.csv")));
    assert_eq!(st.status.code(), Some(2));
    assert!(stderr_of(&st).contains("wat"));
}

#[test]
fn strictbound_prints_the_frozen_value() {
    let st = run(bin().args(["strictbound", "--theta", "0.5", "--q", "1", "--N0", "4"]));
    assert!(st.status.success());
    let stdout = String::from_utf8_lossy(&st.stdout);
    assert_eq!(stdout.trim(), "1.4571067811865475e0");
}

#[test]
fn certify_emits_the_half_level_certificate() {
    let dir = workdir("certify");
    let out = dir.join("cert.json");
    let st = run(bin()
        .args(["certify", "--family", "lqlp", "--p", "1", "--N", "8", "--out"])
        .arg(&out));
    assert!(st.status.success(), "{}", stderr_of(&st));
    let cert: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(cert["slow_decay"].as_bool().unwrap());
    assert!((cert["c"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert_eq!(cert["entries"].as_array().unwrap().len(), 8);
    for (i, e) in cert["entries"].as_array().unwrap().iter().enumerate() {
        assert_eq!(e["n"].as_u64().unwrap() as usize, i + 1);
        assert!(e["b_n"].as_f64().unwrap() >= 1.0);
    }
}

#[test]
fn decompose_contraction_failure_exits_one_with_diagnostics() {
    let dir = workdir("decompose");
    let couple = write(&dir, "weighted.json", WEIGHTED_5);
    let out = dir.join("trace.json");

    // t0 = 1 at the top basis vector: K equals the X norm, no contraction
    let st = run(bin()
        .args(["decompose", "--couple"])
        .arg(&couple)
        .args(["--x", "basis:4", "--t0", "1", "--rho", "0.6", "--m", "4", "--out"])
        .arg(&out));
    assert_eq!(st.status.code(), Some(1));
    assert!(!out.exists(), "failed run must not write the trace file");
    let diag: serde_json::Value = serde_json::from_str(stderr_of(&st).trim()).unwrap();
    assert_eq!(diag["status"], "failed");
    assert_eq!(diag["partial_trace"]["status"]["kind"], "contraction_failed");

    // small t0 succeeds and records the collapse step
    let st = run(bin()
        .args(["decompose", "--couple"])
        .arg(&couple)
        .args(["--x", "ones:5", "--t0", "0.03125", "--rho", "0.6", "--m", "4", "--out"])
        .arg(&out));
    assert!(st.status.success(), "{}", stderr_of(&st));
    let trace: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(trace["status"]["kind"], "converged");
    assert_eq!(trace["steps"].as_array().unwrap().len(), 1);
}

#[test]
fn phi_csv_respects_its_caps() {
    let dir = workdir("phi");
    let couple = write(
        &dir,
        "w8.json",
        r#"{"kind":"weighted_l1","weights":[1,2,4,8,16,32,64,128]}"#,
    );
    let out = dir.join("phi.csv");
    let st = run(bin()
        .args(["phi", "--sigma", "dyadic:8", "--couple"])
        .arg(&couple)
        .args(["--tmin", "1e-4", "--tmax", "4", "--points", "30", "--out"])
        .arg(&out));
    assert!(st.status.success(), "{}", stderr_of(&st));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,phi,const_cap,linear_cap"));
    let mut prev_phi = 0.0f64;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let (phi, const_cap, linear_cap) = (v[1], v[2], v[3]);
        assert!(phi >= prev_phi);
        assert!(phi <= const_cap.min(linear_cap) * (1.0 + 1e-15));
        prev_phi = phi;
    }
}

#[test]
fn reiter_check_requires_a_seed_and_is_reproducible() {
    let dir = workdir("reiter");
    let st = run(bin().args(["reiter-check", "--samples", "20"]));
    assert_eq!(st.status.code(), Some(2), "missing --seed must be a usage error");

    let out1 = dir.join("r1.json");
    let out2 = dir.join("r2.json");
    for out in [&out1, &out2] {
        let st = run(bin()
            .args(["reiter-check", "--seed", "7", "--samples", "40", "--dim", "16", "--kmax", "24", "--out"])
            .arg(out));
        assert!(st.status.success(), "{}", stderr_of(&st));
    }
    assert_eq!(fs::read(&out1).unwrap(), fs::read(&out2).unwrap());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out1).unwrap()).unwrap();
    assert!(report["spread"].as_f64().unwrap() >= 1.0);
    assert!(report["spread"].as_f64().unwrap() <= 10.0);

    // an impossible spread limit turns the report into a failed assertion
    let st = run(bin().args([
        "reiter-check", "--seed", "7", "--samples", "40", "--dim", "16", "--kmax", "24",
        "--max-spread", "1.0",
    ]));
    assert_eq!(st.status.code(), Some(1));
    let diag: serde_json::Value = serde_json::from_str(stderr_of(&st).trim()).unwrap();
    assert_eq!(diag["status"], "failed");
}

#[test]
fn interpnorm_reports_value_and_tail() {
    let dir = workdir("interpnorm");
    let couple = write(&dir, "weighted.json", WEIGHTED_5);
    let out = dir.join("norm.json");
    let st = run(bin()
        .args(["interpnorm", "--couple"])
        .arg(&couple)
        .args(["--x", "basis:2", "--theta", "0.5", "--q", "1", "--kmax", "30", "--out"])
        .arg(&out));
    assert!(st.status.success(), "{}", stderr_of(&st));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report["value"].as_f64().unwrap() > 0.0);
    assert_eq!(report["k_max"].as_u64(), Some(30));
    assert!(report["tail_bound"].as_f64().unwrap() > 0.0);
}
