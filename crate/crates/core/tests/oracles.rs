mod common;

use approx::assert_abs_diff_eq;
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scpcc::csoc::{validate_self_orthogonality, CsocCode};
use scpcc::threshold::{decode_block, BoxPlusMode, LlrBlock};

fn hard(x: f64) -> u8 {
    u8::from(x < 0.0)
}

/// Draws a toy block of length `m + 1` and checks every time-0 extrinsic
/// against full enumeration.
fn extrinsic_matches_enumeration(code: &CsocCode, rng: &mut ChaCha8Rng) -> f64 {
    let (k, n) = (code.k(), code.m() + 1);
    let info: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.random_range(-4.0..4.0)).collect()).collect();
    let parity: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
    let apriori: Vec<f64> = (0..k * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let out = decode_block(code, &LlrBlock::new(info.clone(), parity.clone()).unwrap(), &apriori, BoxPlusMode::Exact).unwrap();

    let rel = |s: usize, t: usize| if s == k { parity[t].abs() } else { info[s][t].abs() + apriori[s * n + t] };
    let syndrome = |d: usize| {
        syndrome_symbols(code.generators(), d)
            .iter()
            .fold(0, |acc, &(s, t)| acc ^ if s == k { hard(parity[t]) } else { hard(info[s][t]) })
    };
    let mut worst: f64 = 0.0;
    for i in 0..k {
        let expected = brute_force_extrinsic(code.generators(), i, rel, syndrome);
        worst = worst.max((out.extrinsic(i)[0] - expected).abs());
    }
    worst
}

#[test]
fn extrinsic_equals_exact_posterior_on_toy_blocks() {
    let code = CsocCode::rate_two_thirds_j4();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        assert!(extrinsic_matches_enumeration(&code, &mut rng) < 1e-9);
    }
}

#[test]
fn extrinsic_oracle_on_a_three_stream_code() {
    let code = CsocCode::new(vec![vec![0, 1, 3], vec![0, 4, 9], vec![0, 6, 13]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        assert!(extrinsic_matches_enumeration(&code, &mut rng) < 1e-9);
    }
}

/// Error patterns of weight at most `J / 2` on the symbols checking
/// `e_0^(0)` never cause a wrong decision on `e_0^(0)`.
#[test]
fn guaranteed_correction_under_equal_reliability() {
    let code = CsocCode::rate_two_thirds_j4();
    let (k, n) = (code.k(), code.m() + 1);
    let mut support: Vec<(usize, usize)> =
        code.generators()[0].iter().flat_map(|&d| syndrome_symbols(code.generators(), d)).collect();
    support.sort_unstable();
    support.dedup();

    let decide = |errors: &[(usize, usize)]| {
        let mut info = vec![vec![1.0; n]; k];
        let mut parity = vec![1.0; n];
        for &(s, t) in errors {
            if s == k {
                parity[t] = -1.0;
            } else {
                info[s][t] = -1.0;
            }
        }
        let out = decode_block(&code, &LlrBlock::new(info, parity).unwrap(), &vec![0.0; k * n], BoxPlusMode::Approx).unwrap();
        out.errors(0)[0]
    };

    let expect = |errors: &[(usize, usize)]| u8::from(errors.contains(&(0, 0)));
    let mut cases = 1;
    assert_eq!(decide(&[]), 0);
    for (a, &x) in support.iter().enumerate() {
        assert_eq!(decide(&[x]), expect(&[x]), "{x:?}");
        cases += 1;
        for &y in &support[a + 1..] {
            assert_eq!(decide(&[x, y]), expect(&[x, y]), "{x:?} {y:?}");
            cases += 1;
        }
    }
    assert!(cases > 100);
}

fn tap_sets() -> impl Strategy<Value = Vec<Vec<usize>>> {
    (1usize..=3, 0usize..=8, 1usize..=3).prop_flat_map(|(k, m, j)| {
        let j = j.min(m + 1);
        prop::collection::vec(proptest::sample::subsequence((0..=m).collect::<Vec<_>>(), j), k)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn validator_agrees_with_enumeration(taps in tap_sets()) {
        let report = validate_self_orthogonality(&taps).unwrap();
        prop_assert_eq!(report.valid, differences_distinct(&taps));
        prop_assert_eq!(report.valid, orthogonal_by_enumeration(&taps));
    }
}

#[test]
fn shipped_code_passes_both_oracles() {
    let code = CsocCode::rate_two_thirds_j4();
    assert!(differences_distinct(code.generators()));
    assert!(orthogonal_by_enumeration(code.generators()));
    let report = validate_self_orthogonality(code.generators()).unwrap();
    assert!(report.valid);
    assert_abs_diff_eq!(code.nu() as f64, 28.0);
}
