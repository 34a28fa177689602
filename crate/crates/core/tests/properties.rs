use proptest::prelude::*;
use scpcc::codec::{encode_frame, ScPccParams};
use scpcc::coupling::{CouplingMap, CouplingPath, Interleaver};
use scpcc::csoc::{encode_block, form_syndromes, CsocCode};

fn code() -> CsocCode {
    CsocCode::rate_two_thirds_j4()
}

fn streams(k: usize, n: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
    prop::collection::vec(prop::collection::vec(0u8..2, n), k)
}

fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

proptest! {
    #[test]
    fn encoding_is_linear(a in streams(2, 40), b in streams(2, 40)) {
        let c = code();
        let sum: Vec<Vec<u8>> = a.iter().zip(&b).map(|(x, y)| xor(x, y)).collect();
        let lhs = encode_block(&c, &sum).unwrap();
        let rhs = xor(&encode_block(&c, &a).unwrap(), &encode_block(&c, &b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    /// Syndromes depend only on the error pattern, not on the codeword.
    #[test]
    fn syndromes_see_only_errors(u in streams(2, 40), e in streams(2, 40), ep in prop::collection::vec(0u8..2, 40)) {
        let c = code();
        let parity = encode_block(&c, &u).unwrap();
        let noisy: Vec<Vec<u8>> = u.iter().zip(&e).map(|(x, y)| xor(x, y)).collect();
        let with_codeword = form_syndromes(&c, &noisy, &xor(&parity, &ep)).unwrap();
        let zeros = vec![vec![0u8; 40]; 2];
        let alone = form_syndromes(&c, &e, &xor(&encode_block(&c, &zeros).unwrap(), &ep)).unwrap();
        prop_assert_eq!(with_codeword, alone);
    }

    #[test]
    fn codewords_have_zero_syndrome(u in streams(2, 30)) {
        let c = code();
        let parity = encode_block(&c, &u).unwrap();
        prop_assert!(form_syndromes(&c, &u, &parity).unwrap().iter().all(|&s| s == 0));
    }

    /// Gathering every coupled block and scattering it back restores the
    /// store, and every source bit is visited exactly once per path.
    #[test]
    fn gather_scatter_round_trip(
        sub in 1usize..6,
        m_sc in 0usize..4,
        frame in 1usize..5,
        seed in any::<u64>(),
        permuted in any::<bool>(),
    ) {
        let t = sub * (m_sc + 1);
        let map = CouplingMap::new(t, m_sc, frame, Interleaver::new(t, Some(seed))).unwrap();
        let path = if permuted { CouplingPath::Permuted } else { CouplingPath::Plain };
        let store: Vec<f64> = (0..t * frame).map(|i| i as f64).collect();
        let mut rebuilt = vec![-1.0; t * frame];
        let mut visits = vec![0usize; t * frame];
        for tau in 0..map.coupled_len() {
            let block = map.gather(&store, path, tau).unwrap();
            for (c, v) in block.iter().enumerate() {
                match map.source(path, tau, c) {
                    Some((s, p)) => {
                        visits[s * t + p] += 1;
                        prop_assert_eq!(*v, store[s * t + p]);
                    }
                    None => prop_assert_eq!(*v, f64::INFINITY),
                }
            }
            map.scatter(&mut rebuilt, path, tau, &block).unwrap();
        }
        prop_assert_eq!(rebuilt, store);
        prop_assert!(visits.iter().all(|&v| v == 1));
    }

    /// The coupled frame encoder is linear over GF(2).
    #[test]
    fn frame_encoding_is_linear(a in prop::collection::vec(0u8..2, 96), b in prop::collection::vec(0u8..2, 96)) {
        let p = ScPccParams::new(code(), 48, 1, 2);
        let fa = encode_frame(&p, &a).unwrap().transmitted_order();
        let fb = encode_frame(&p, &b).unwrap().transmitted_order();
        let fab = encode_frame(&p, &xor(&a, &b)).unwrap().transmitted_order();
        prop_assert_eq!(fab, xor(&fa, &fb));
    }

    #[test]
    fn interleaver_is_a_bijection(len in 1usize..200, seed in any::<u64>()) {
        let il = Interleaver::new(len, Some(seed));
        let mut seen = vec![false; len];
        for p in 0..len {
            let q = il.forward(p);
            prop_assert!(!seen[q]);
            seen[q] = true;
            prop_assert_eq!(il.inverse(q), p);
        }
    }
}
