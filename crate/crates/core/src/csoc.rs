//! Convolutional self-orthogonal codes (CSOCs).
//!
//! A `(k+1, k, m)` systematic feedforward code is described by `k` generator
//! tap sets. Tap set `i` lists the nonzero positions of `g_i = (g_{i,0}, ..., g_{i,m})`.
//! The parity bit at time `l` is
//!
//! ```text
//!     p_l = XOR_{i < k} XOR_{b in taps(g_i)} u^{(i)}_{l-b}
//! ```
//!
//! and the syndrome of a received word is the re-encoded hard information
//! XOR the hard parity.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated self-orthogonal component code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CodeFile", into = "CodeFile")]
pub struct CsocCode {
    k: usize,
    m: usize,
    j: usize,
    generators: Vec<Vec<usize>>,
}

impl CsocCode {
    /// Builds a code from tap sets, checking structure, uniform tap count
    /// and self-orthogonality. The memory `m` is the largest tap.
    pub fn new(generators: Vec<Vec<usize>>) -> Result<Self> {
        let report = validate_self_orthogonality(&generators)?;
        let j = generators[0].len();
        for (g, taps) in generators.iter().enumerate().skip(1) {
            if taps.len() != j {
                return Err(Error::NonUniformTapCount {
                    generator: g,
                    expected: j,
                    found: taps.len(),
                });
            }
        }
        if let Some(v) = report.violation {
            return Err(Error::NotSelfOrthogonal(v));
        }
        let m = generators.iter().flat_map(|t| t.last().copied()).max().unwrap_or(0);
        Ok(Self {
            k: generators.len(),
            m,
            j,
            generators,
        })
    }

    /// Builds a code from generator bit strings, leftmost character is `g_{i,0}`.
    pub fn from_bit_strings<S: AsRef<str>>(generators: &[S]) -> Result<Self> {
        let taps = generators
            .iter()
            .enumerate()
            .map(|(g, s)| parse_bit_string(g, s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(taps)
    }

    /// The rate-2/3, `J = 4`, `m = 13` code used for the rate-1/2 turbo experiments.
    pub fn rate_two_thirds_j4() -> Self {
        Self::new(vec![vec![0, 3, 4, 12], vec![0, 2, 7, 13]]).expect("shipped code is valid")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of orthogonal checks per information symbol.
    pub fn j(&self) -> usize {
        self.j
    }

    /// Encoder termination length `k(m+1)`.
    pub fn nu(&self) -> usize {
        self.k * (self.m + 1)
    }

    pub fn generators(&self) -> &[Vec<usize>] {
        &self.generators
    }

    /// Total number of nonzero generator taps, `kJ`.
    pub fn tap_count(&self) -> usize {
        self.generators.iter().map(Vec::len).sum()
    }

    /// Generator `i` as a bit string of length `m + 1`.
    pub fn bit_string(&self, i: usize) -> String {
        let mut s = vec![b'0'; self.m + 1];
        for &t in &self.generators[i] {
            s[t] = b'1';
        }
        String::from_utf8(s).unwrap()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let raw: CodeFile = serde_json::from_str(&text)?;
        raw.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

fn parse_bit_string(g: usize, s: &str) -> Result<Vec<usize>> {
    s.trim()
        .chars()
        .enumerate()
        .filter_map(|(pos, c)| match c {
            '1' => Some(Ok(pos)),
            '0' => None,
            other => Some(Err(Error::MalformedTaps {
                generator: g,
                reason: format!("unexpected character {other:?} in bit string"),
            })),
        })
        .collect()
}

/// On-disk code description. Generators may be bit strings or tap lists.
#[derive(Debug, Serialize, Deserialize)]
struct CodeFile {
    k: usize,
    m: usize,
    #[serde(rename = "J")]
    j: usize,
    generators: Vec<GeneratorSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum GeneratorSpec {
    Bits(String),
    Taps(Vec<usize>),
}

impl TryFrom<CodeFile> for CsocCode {
    type Error = Error;

    fn try_from(file: CodeFile) -> Result<Self> {
        let taps = file
            .generators
            .into_iter()
            .enumerate()
            .map(|(g, spec)| match spec {
                GeneratorSpec::Bits(s) => parse_bit_string(g, &s),
                GeneratorSpec::Taps(t) => Ok(t),
            })
            .collect::<Result<Vec<_>>>()?;
        if taps.len() != file.k {
            return Err(Error::InconsistentCode(format!(
                "k = {} but {} generators given",
                file.k,
                taps.len()
            )));
        }
        let code = CsocCode::new(taps)?;
        if code.m != file.m {
            return Err(Error::InconsistentCode(format!(
                "m = {} but the largest tap is {}",
                file.m, code.m
            )));
        }
        if code.j != file.j {
            return Err(Error::InconsistentCode(format!(
                "J = {} but generators have {} taps",
                file.j, code.j
            )));
        }
        Ok(code)
    }
}

impl From<CsocCode> for CodeFile {
    fn from(code: CsocCode) -> Self {
        CodeFile {
            k: code.k,
            m: code.m,
            j: code.j,
            generators: code.generators.into_iter().map(GeneratorSpec::Taps).collect(),
        }
    }
}

/// A pair of tap positions `(high, low)` of one generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TapPair {
    pub generator: usize,
    pub high: usize,
    pub low: usize,
}

/// Two tap pairs with the same positive difference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub difference: usize,
    pub first: TapPair,
    pub second: TapPair,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "difference {} occurs as {}-{} in generator {} and as {}-{} in generator {}",
            self.difference,
            self.first.high,
            self.first.low,
            self.first.generator,
            self.second.high,
            self.second.low,
            self.second.generator
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub valid: bool,
    pub violation: Option<Violation>,
}

/// Checks tap sets for self-orthogonality.
///
/// The orthogonal checks on every information error symbol share no other
/// symbol iff all positive pairwise tap differences are distinct within each
/// generator and disjoint across generators. Structurally malformed tap
/// sets (empty, unsorted, duplicated) are an error rather than a report.
pub fn validate_self_orthogonality(generators: &[Vec<usize>]) -> Result<OrthogonalityReport> {
    if generators.is_empty() {
        return Err(Error::InconsistentCode("no generators".into()));
    }
    for (g, taps) in generators.iter().enumerate() {
        if taps.is_empty() {
            return Err(Error::MalformedTaps {
                generator: g,
                reason: "empty tap set".into(),
            });
        }
        if let Some(w) = taps.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::MalformedTaps {
                generator: g,
                reason: format!("taps not strictly increasing at {} -> {}", w[0], w[1]),
            });
        }
    }

    let mut seen: HashMap<usize, TapPair> = HashMap::new();
    for (g, taps) in generators.iter().enumerate() {
        for (a, &high) in taps.iter().enumerate() {
            for &low in &taps[..a] {
                let pair = TapPair {
                    generator: g,
                    high,
                    low,
                };
                if let Some(&first) = seen.get(&(high - low)) {
                    return Ok(OrthogonalityReport {
                        valid: false,
                        violation: Some(Violation {
                            difference: high - low,
                            first,
                            second: pair,
                        }),
                    });
                }
                seen.insert(high - low, pair);
            }
        }
    }
    Ok(OrthogonalityReport {
        valid: true,
        violation: None,
    })
}

/// Parity sequence of `k` information streams of equal length `N`.
///
/// The encoder starts in the zero state; symbols before time 0 are zero.
pub fn encode_block(code: &CsocCode, info: &[Vec<u8>]) -> Result<Vec<u8>> {
    let n = check_streams(code, info)?;
    let mut parity = vec![0u8; n];
    for (taps, stream) in code.generators.iter().zip(info) {
        for &b in taps {
            for (p, &u) in parity[b.min(n)..].iter_mut().zip(stream) {
                *p ^= u;
            }
        }
    }
    Ok(parity)
}

/// Syndrome bits `s_l = encode(hard_info)_l XOR hard_parity_l`.
pub fn form_syndromes(code: &CsocCode, hard_info: &[Vec<u8>], hard_parity: &[u8]) -> Result<Vec<u8>> {
    let mut s = encode_block(code, hard_info)?;
    if hard_parity.len() != s.len() {
        return Err(Error::LengthMismatch {
            expected: s.len(),
            found: hard_parity.len(),
        });
    }
    for (s, &p) in s.iter_mut().zip(hard_parity) {
        *s ^= p;
    }
    Ok(s)
}

fn check_streams(code: &CsocCode, info: &[Vec<u8>]) -> Result<usize> {
    if info.len() != code.k {
        return Err(Error::LengthMismatch {
            expected: code.k,
            found: info.len(),
        });
    }
    let n = info[0].len();
    if let Some(bad) = info.iter().find(|s| s.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    Ok(n)
}

/// One error symbol taking part in an orthogonal check, relative to the
/// symbol being decoded. `stream == k` denotes the parity stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Participant {
    pub stream: usize,
    pub offset: usize,
}

/// A single orthogonal check: syndrome `s_{l + offset}` and every other
/// error symbol it contains within the decoding horizon.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub offset: usize,
    pub participants: Vec<Participant>,
}

/// Orthogonal check sets for every information stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckSet {
    pub streams: Vec<Vec<Check>>,
}

/// Expands the syndrome equations into orthogonal check sets.
///
/// For stream `i` and tap `d` of `g_i`, the check at syndrome offset `d`
/// contains `(alpha, d - b)` for every tap `b <= d` of `g_alpha`, plus the
/// parity symbol at offset `d`, minus the decoded symbol `(i, 0)` itself.
/// Symbols before the decoded one are assumed already cancelled by feedback.
pub fn build_check_sets(code: &CsocCode) -> CheckSet {
    let streams = code
        .generators
        .iter()
        .enumerate()
        .map(|(i, taps)| {
            taps.iter()
                .map(|&d| {
                    let mut participants: Vec<Participant> = code
                        .generators
                        .iter()
                        .enumerate()
                        .flat_map(|(alpha, g)| {
                            g.iter().filter(move |&&b| b <= d).map(move |&b| Participant {
                                stream: alpha,
                                offset: d - b,
                            })
                        })
                        .filter(|p| !(p.stream == i && p.offset == 0))
                        .collect();
                    participants.push(Participant {
                        stream: code.k,
                        offset: d,
                    });
                    Check {
                        offset: d,
                        participants,
                    }
                })
                .collect()
        })
        .collect();
    CheckSet { streams }
}

const SEARCH_RESTARTS: u64 = 256;
const BACKTRACK_BUDGET: u64 = 50_000_000;

/// Searches for a `k`-generator code with `J` taps per generator and memory
/// at most `max_m`.
///
/// Taps are first added greedily round-robin, each generator taking the
/// smallest position whose new differences are unused. The first attempt
/// visits generators in a seed-dependent order; later attempts also skip
/// feasible positions at random. If no greedy attempt fits within `max_m`,
/// a depth-first backtracking search over the same space runs with a node
/// budget. Returns `None` when both are exhausted.
pub fn search_csoc(k: usize, j: usize, max_m: usize, seed: u64) -> Option<CsocCode> {
    if k == 0 || j == 0 {
        return None;
    }
    (0..SEARCH_RESTARTS)
        .find_map(|attempt| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(attempt);
            let skip = if attempt == 0 { 0.0 } else { 0.15 };
            greedy_attempt(k, j, max_m, skip, &mut rng)
        })
        .or_else(|| Backtrack::new(k, j, max_m).run())
        .and_then(|g| CsocCode::new(g).ok())
}

fn greedy_attempt(k: usize, j: usize, max_m: usize, skip: f64, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<usize>>> {
    let mut generators = vec![vec![0usize]; k];
    let mut used = vec![false; max_m + 1];
    let mut order: Vec<usize> = (0..k).collect();
    for _ in 1..j {
        order.shuffle(rng);
        for &g in &order {
            let taps = &generators[g];
            let start = taps.last().unwrap() + 1;
            let pos = (start..=max_m).find(|&x| {
                taps.iter().all(|&t| !used[x - t]) && (skip == 0.0 || !rng.random_bool(skip))
            })?;
            for &t in taps {
                used[pos - t] = true;
            }
            generators[g].push(pos);
        }
    }
    Some(generators)
}

/// Exhaustive generator-by-generator search. Every generator starts at
/// tap 0 and generators are ordered by their second tap.
struct Backtrack {
    k: usize,
    j: usize,
    max_m: usize,
    used: Vec<bool>,
    generators: Vec<Vec<usize>>,
    nodes: u64,
}

impl Backtrack {
    fn new(k: usize, j: usize, max_m: usize) -> Self {
        Self {
            k,
            j,
            max_m,
            used: vec![false; max_m + 1],
            generators: vec![vec![0]; k],
            nodes: 0,
        }
    }

    fn run(mut self) -> Option<Vec<Vec<usize>>> {
        if self.j == 1 {
            return Some(self.generators);
        }
        self.extend(0).then_some(self.generators)
    }

    fn extend(&mut self, g: usize) -> bool {
        if g == self.k {
            return true;
        }
        if self.generators[g].len() == self.j {
            return self.extend(g + 1);
        }
        self.nodes += 1;
        if self.nodes > BACKTRACK_BUDGET {
            return false;
        }
        let last = *self.generators[g].last().unwrap();
        let start = if self.generators[g].len() == 1 && g > 0 {
            self.generators[g - 1][1] + 1
        } else {
            last + 1
        };
        // Remaining taps of this generator need at least that many positions.
        let remaining = self.j - self.generators[g].len();
        let Some(end) = (self.max_m + 1).checked_sub(remaining - 1) else {
            return false;
        };
        for x in start..end {
            if self.generators[g].iter().any(|&t| self.used[x - t]) {
                continue;
            }
            for &t in &self.generators[g] {
                self.used[x - t] = true;
            }
            self.generators[g].push(x);
            if self.extend(g) {
                return true;
            }
            self.generators[g].pop();
            for &t in &self.generators[g] {
                self.used[x - t] = false;
            }
        }
        false
    }
}
