//! Reference computations written independently of the library internals.
#![allow(dead_code)]

/// Positive differences of every tap pair are distinct within and across generators.
pub fn differences_distinct(generators: &[Vec<usize>]) -> bool {
    let mut seen = std::collections::HashSet::new();
    for g in generators {
        for (a, &x) in g.iter().enumerate() {
            for &y in &g[a + 1..] {
                if !seen.insert(y.abs_diff(x)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Symbols `(stream, time)` entering syndrome `d`, with stream `k` the parity.
pub fn syndrome_symbols(generators: &[Vec<usize>], d: usize) -> Vec<(usize, usize)> {
    let k = generators.len();
    let mut out = vec![(k, d)];
    for (alpha, taps) in generators.iter().enumerate() {
        for &b in taps {
            if b <= d {
                out.push((alpha, d - b));
            }
        }
    }
    out
}

/// Orthogonality by enumeration: for every stream `i`, no symbol other
/// than `e_0^(i)` appears in two of the syndromes that check `e_0^(i)`.
pub fn orthogonal_by_enumeration(generators: &[Vec<usize>]) -> bool {
    for (i, taps) in generators.iter().enumerate() {
        let mut seen = std::collections::HashSet::new();
        for &d in taps {
            for s in syndrome_symbols(generators, d) {
                if s != (i, 0) && !seen.insert(s) {
                    return false;
                }
            }
        }
    }
    true
}

/// Exact extrinsic LLR on `e_0^(i)` from the syndromes at the taps of
/// generator `i`, by summing the probabilities of every error pattern on
/// the symbols those syndromes involve.
///
/// `rel(stream, time)` is the error-symbol LLR (positive: no error),
/// `syndrome(d)` the observed syndrome bit.
pub fn brute_force_extrinsic(
    generators: &[Vec<usize>],
    i: usize,
    rel: impl Fn(usize, usize) -> f64,
    syndrome: impl Fn(usize) -> u8,
) -> f64 {
    let checks: Vec<(usize, Vec<(usize, usize)>)> =
        generators[i].iter().map(|&d| (d, syndrome_symbols(generators, d))).collect();
    let mut vars: Vec<(usize, usize)> = checks.iter().flat_map(|(_, s)| s.iter().copied()).collect();
    vars.sort_unstable();
    vars.dedup();
    let target = vars.iter().position(|&v| v == (i, 0)).expect("e_0 is checked");
    let p1: Vec<f64> = vars.iter().map(|&(s, t)| 1.0 / (1.0 + rel(s, t).exp())).collect();
    let masks: Vec<(u64, u8)> = checks
        .iter()
        .map(|(d, syms)| {
            let m = syms.iter().fold(0u64, |m, s| m | 1 << vars.iter().position(|v| v == s).unwrap());
            (m, syndrome(*d))
        })
        .collect();
    let (mut num, mut den) = (0.0, 0.0);
    for pattern in 0u64..1 << vars.len() {
        if masks.iter().any(|&(m, s)| ((pattern & m).count_ones() & 1) as u8 != s) {
            continue;
        }
        let mut p = 1.0;
        for (v, &q) in p1.iter().enumerate() {
            p *= if pattern >> v & 1 == 1 { q } else { 1.0 - q };
        }
        if pattern >> target & 1 == 1 {
            den += p;
        } else {
            num += p;
        }
    }
    (num / den).ln() - rel(i, 0)
}

/// Standard normal upper tail.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}
