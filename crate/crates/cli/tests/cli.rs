use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scpcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scpcc"))
        .args(args)
        .env_remove("SCPCC_THREADS")
        .output()
        .expect("failed to run scpcc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../codes").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_shipped_codes() {
    for name in ["csoc-k2-m13-j4.json", "csoc-k8-m58-j4.json"] {
        let out = scpcc(&["validate", "--code", s(&shipped(name))]);
        assert!(out.status.success(), "{name}");
        assert!(stdout(&out).starts_with("valid"));
    }
}

#[test]
fn validate_rejects_collision() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"k": 2, "m": 6, "J": 3, "generators": [[0, 1, 3], [0, 2, 6]]}"#).unwrap();
    let out = scpcc(&["validate", "--code", s(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("invalid"));
}

#[test]
fn analyze_reports_latency() {
    let out = scpcc(&["analyze", "--block-size", "400", "--window", "3", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["latency"]["decoding"], 1200);
}

#[test]
fn empty_snr_list_is_a_usage_error() {
    let out = scpcc(&["simulate", "--ebno="]);
    assert!(!out.status.success());
    let out = scpcc(&["simulate", "--max-frames", "1"]);
    assert!(!out.status.success());
}

#[test]
fn fig6_requires_high_rate_code() {
    let out = scpcc(&["simulate", "--preset", "fig6", "--ebno", "3"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("k = 8"));
    let out = scpcc(&[
        "simulate", "--preset", "fig6", "--ebno", "3", "--code", s(&shipped("csoc-k2-m13-j4.json")),
    ]);
    assert!(!out.status.success());
}

#[test]
fn encode_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("payload.bin");
    let frames = dir.path().join("frames.bin");
    let output = dir.path().join("decoded.bin");
    let payload: Vec<u8> = (0..700u32).map(|i| (i * 37 % 251) as u8).collect();
    fs::write(&input, &payload).unwrap();
    let params = ["--block-size", "200", "--frame-blocks", "4"];

    let mut args = vec!["encode", "--input", s(&input), "--out", s(&frames)];
    args.extend(params);
    assert!(scpcc(&args).status.success());

    let mut args = vec!["decode", "--input", s(&frames), "--out", s(&output), "--ebno", "5", "--seed", "3"];
    args.extend(params);
    let out = scpcc(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(&output).unwrap(), payload);

    let out = scpcc(&["decode", "--input", s(&frames), "--out", s(&output), "--block-size", "100"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("hash"));
}

#[test]
fn simulate_is_thread_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for threads in ["1", "8"] {
        let path = dir.path().join(format!("t{threads}.csv"));
        let out = scpcc(&[
            "--threads", threads, "simulate", "--block-size", "100", "--frame-blocks", "4", "--ebno", "1.5,2.5",
            "--max-frames", "24", "--min-errors", "1000000", "--seed", "9", "--out", s(&path),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        csvs.push(fs::read(&path).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert!(!csvs[0].is_empty());
}

#[test]
fn gen_interleaver_writes_permutation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pi.txt");
    assert!(scpcc(&["gen-interleaver", "--length", "64", "--seed", "5", "--out", s(&path)]).status.success());
    let text = fs::read_to_string(&path).unwrap();
    let mut idx: Vec<usize> = text.split_whitespace().map(|t| t.parse().unwrap()).collect();
    idx.sort_unstable();
    assert_eq!(idx, (0..64).collect::<Vec<_>>());
}

#[test]
fn search_code_output_validates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("found.json");
    let out = scpcc(&["search-code", "--k", "2", "--j", "3", "--max-m", "40", "--out", s(&path)]);
    assert!(out.status.success());
    assert!(scpcc(&["validate", "--code", s(&path)]).status.success());
}
