mod common;

use scpcc::harness::{
    config_path, load_results, resume, run_or_resume, run_sweep, run_sweep_with, Execution, SimConfig, SimMode,
};
use scpcc::{CsocCode, Error, ScPccParams};

fn config(ebno: Vec<f64>) -> SimConfig {
    let mut p = ScPccParams::new(CsocCode::rate_two_thirds_j4(), 96, 1, 4);
    p.window = 3;
    p.extrinsic_scale = 0.6;
    let mut c = SimConfig::new(p, ebno);
    c.seed = 42;
    c.batch_frames = 3;
    c
}

#[test]
fn split_runs_match_a_single_run() {
    let mut short = config(vec![1.0, 2.0]);
    short.min_bit_errors = u64::MAX;
    short.max_frames = 4;
    let partial = run_sweep(&short).unwrap();
    assert!(partial.iter().all(|s| s.frames == 4));

    let mut long = short.clone();
    long.max_frames = 11;
    let resumed = resume(&long, &short.hash(), partial).unwrap();
    assert_eq!(resumed, run_sweep(&long).unwrap());
}

#[test]
fn resume_through_files_matches_a_single_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ber.csv");
    let mut c = config(vec![1.5]);
    c.min_bit_errors = u64::MAX;
    c.max_frames = 5;
    c.output = Some(out.clone());
    run_or_resume(&c, Execution::Sequential).unwrap();
    assert!(config_path(&out).exists());

    c.max_frames = 9;
    let resumed = run_or_resume(&c, Execution::Sequential).unwrap();
    let (hash, stored) = load_results(&out).unwrap();
    assert_eq!(hash, c.hash());
    assert_eq!(stored, resumed);

    let mut fresh = c.clone();
    fresh.output = None;
    assert_eq!(resumed, run_sweep(&fresh).unwrap());
}

#[test]
fn resume_rejects_a_different_configuration() {
    let mut c = config(vec![1.0]);
    c.max_frames = 2;
    let stats = run_sweep(&c).unwrap();
    let mut other = c.clone();
    other.seed += 1;
    assert!(matches!(resume(&other, &c.hash(), stats.clone()), Err(Error::ConfigHashMismatch { .. })));
    other = c.clone();
    other.params.window = 2;
    assert!(matches!(resume(&other, &c.hash(), stats), Err(Error::ConfigHashMismatch { .. })));
}

#[test]
fn sequential_and_parallel_agree() {
    let mut c = config(vec![1.0, 2.0]);
    c.min_bit_errors = 50;
    let seq = run_sweep_with(&c, Execution::Sequential).unwrap();
    #[cfg(feature = "parallel")]
    assert_eq!(seq, run_sweep_with(&c, Execution::Parallel).unwrap());
    c.batch_frames = 1;
    assert_eq!(seq, run_sweep_with(&c, Execution::Sequential).unwrap());
}

#[test]
fn uncoded_ber_matches_the_q_function() {
    let mut c = config(vec![0.0, 4.0, 6.0]);
    c.mode = SimMode::Uncoded;
    c.min_bit_errors = 2000;
    for s in run_sweep(&c).unwrap() {
        let expected = common::q_function((2.0 * 10f64.powf(s.ebno_db / 10.0)).sqrt());
        let sigma = (expected * (1.0 - expected) / s.bits as f64).sqrt();
        assert!((s.ber() - expected).abs() < 5.0 * sigma, "{} dB: {} vs {}", s.ebno_db, s.ber(), expected);
    }
}

#[test]
fn disjoint_seeds_agree_statistically() {
    let mut a = config(vec![1.0]);
    a.min_bit_errors = 3000;
    let mut b = a.clone();
    b.seed = 7;
    let (sa, sb) = (&run_sweep(&a).unwrap()[0], &run_sweep(&b).unwrap()[0]);
    assert_ne!(sa.bit_errors, sb.bit_errors);
    let rel = (sa.ber() - sb.ber()).abs() / sa.ber().max(sb.ber());
    assert!(rel < 0.2, "{} vs {}", sa.ber(), sb.ber());
}
