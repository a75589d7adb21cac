use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use shearframe::verify::VerifyConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shearframe"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn write_signal(path: &Path, d: usize, n: usize, f: impl Fn(usize) -> f64) {
    let bytes: Vec<u8> = (0..n.pow(d as u32))
        .flat_map(|i| f(i).to_le_bytes())
        .collect();
    std::fs::write(path, bytes).unwrap();
    let meta = serde_json::json!({"d": d, "N": n, "dtype": "f64"});
    std::fs::write(format!("{}.json", path.display()), meta.to_string()).unwrap();
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn frame_build_then_roundtrip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let frame = dir.path().join("frame.bin");
    let sig = dir.path().join("sig.bin");
    let out = run(&[
        "frame",
        "build",
        "--d",
        "2",
        "--N",
        "256",
        "--variant",
        "smooth",
        "--out",
        s(&frame),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    write_signal(&sig, 2, 256, |i| ((i * 7919) % 257) as f64 / 257.0 - 0.5);
    let out = run(&[
        "transform",
        "roundtrip",
        "--input",
        s(&sig),
        "--frame",
        s(&frame),
    ]);
    assert!(out.status.success());
    assert!(stdout_json(&out)["relative_error"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn forward_then_inverse_recovers_samples() {
    let dir = tempfile::tempdir().unwrap();
    let (frame, sig, coef, back) = (
        dir.path().join("f.bin"),
        dir.path().join("s.bin"),
        dir.path().join("c.bin"),
        dir.path().join("r.bin"),
    );
    assert!(run(&[
        "frame",
        "build",
        "--d",
        "2",
        "--N",
        "32",
        "--out",
        s(&frame)
    ])
    .status
    .success());
    write_signal(&sig, 2, 32, |i| (i as f64 * 0.37).sin());
    assert!(run(&[
        "transform",
        "forward",
        "--input",
        s(&sig),
        "--frame",
        s(&frame),
        "--out",
        s(&coef)
    ])
    .status
    .success());
    assert!(run(&[
        "transform",
        "inverse",
        "--input",
        s(&coef),
        "--frame",
        s(&frame),
        "--out",
        s(&back)
    ])
    .status
    .success());
    let a = std::fs::read(&sig).unwrap();
    let b = std::fs::read(&back).unwrap();
    assert_eq!(a.len(), b.len());
    let worst = a
        .chunks_exact(8)
        .zip(b.chunks_exact(8))
        .map(|(x, y)| {
            (f64::from_le_bytes(x.try_into().unwrap()) - f64::from_le_bytes(y.try_into().unwrap()))
                .abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn norm_of_zeros_is_zero_in_every_space() {
    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("zeros.bin");
    write_signal(&sig, 2, 32, |_| 0.0);
    for space in ["bAB", "fAB", "BAB", "FAB", "b", "f", "B", "F"] {
        let out = run(&[
            "norm",
            "--space",
            space,
            "--alpha",
            "0",
            "--p",
            "2",
            "--q",
            "2",
            "--input",
            s(&sig),
        ]);
        assert!(out.status.success(), "{space}");
        let rec = stdout_json(&out);
        assert_eq!(rec["space"], space);
        assert_eq!(rec["value"].as_f64(), Some(0.0));
    }
}

#[test]
fn csv_input_is_accepted_for_two_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("sig.csv");
    let rows: Vec<String> = (0..16)
        .map(|r| {
            (0..16)
                .map(|c| ((r * 16 + c) % 5).to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    std::fs::write(&sig, rows.join("\n")).unwrap();
    let out = run(&[
        "norm",
        "--space",
        "B",
        "--alpha",
        "-0.5",
        "--p",
        "inf",
        "--q",
        "inf",
        "--input",
        s(&sig),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout_json(&out)["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&["verify", "--d", "2", "--bogus"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["norm", "--space", "BAB"]).status.code(), Some(2));
    assert_eq!(
        run(&[
            "transform",
            "roundtrip",
            "--input",
            "/nonexistent/x.bin",
            "--frame",
            "/nonexistent/f.bin"
        ])
        .status
        .code(),
        Some(3)
    );
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("sub/none/report.json");
    let out = run(&[
        "verify",
        "--suite",
        "overlaps",
        "--d",
        "2",
        "--N",
        "64",
        "--out",
        s(&report),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = bin()
        .args(["windows", "dump", "--grid", "4"])
        .env("SHEARFRAME_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_reports_are_reproducible_apart_from_the_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("r{k}.json"));
        let out = bin()
            .args([
                "verify",
                "--suite",
                "energy",
                "--d",
                "2",
                "--N",
                "64",
                "--seed",
                "3",
                "--out",
                s(&path),
            ])
            .env("SHEARFRAME_WORKERS", "1")
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stdout)
        );
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert!(v["timestamp"]["unix_seconds"].is_u64());
        v.as_object_mut().unwrap().remove("timestamp");
        reports.push(serde_json::to_string(&v).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn failing_check_exits_nonzero_and_config_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let mut vc = VerifyConfig::new(2, 64, 0).unwrap();
    vc.thresholds.parseval = -1.0;
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        serde_json::json!({"suite": "parseval", "verify": vc}).to_string(),
    )
    .unwrap();
    let report = dir.path().join("report.csv");
    let out = run(&[
        "--config",
        s(&cfg),
        "verify",
        "--suite",
        "energy",
        "--d",
        "2",
        "--N",
        "64",
        "--format",
        "csv",
        "--out",
        s(&report),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("check,bound,value,limit,kind,pass\n"));
    assert!(text.lines().skip(1).all(|l| l.starts_with("parseval,")));
    assert!(text.contains(",false"));
}

#[test]
fn csv_numbers_round_trip_at_seventeen_digits() {
    let out = run(&["windows", "dump", "--grid", "33"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let bank = shearframe::WindowBank::default();
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(v[3], bank.psi1_hat(v[0]));
        assert_eq!(v[4], bank.psi2_hat(v[0]));
    }
}

#[test]
fn lattice_enumeration_counts_bands() {
    let out = run(&["lattice", "enumerate", "--d", "3", "--jmax", "1"]);
    assert!(out.status.success());
    let rows = String::from_utf8(out.stdout).unwrap().lines().count() - 1;
    // (2^{j+1} + 1)^{d-1} shears per cone and scale
    assert_eq!(rows, 3 * (9 + 25));
}
