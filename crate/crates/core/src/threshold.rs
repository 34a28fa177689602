//! APP threshold decoding of a single CSOC block.
//!
//! The decoder works on error symbols `e = y_hard XOR x`. Every LLR it
//! receives as a priori information and every extrinsic value it returns
//! refers to an error symbol: positive means "the hard decision is right".
//! Because both component decoders of a turbo scheme see the same channel
//! hard decisions, these values can be exchanged between them unchanged.

use serde::{Deserialize, Serialize};

use crate::csoc::{build_check_sets, CsocCode};
use crate::error::{Error, Result};

/// Magnitude used in place of infinite reliabilities.
pub const DEFAULT_LLR_CAP: f64 = 300.0;

/// Check-node combining rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxPlusMode {
    /// `ln((1 + e^(a+b)) / (e^a + e^b))`.
    Exact,
    /// `sign(a) sign(b) min(|a|, |b|)`.
    #[default]
    Approx,
}

impl std::str::FromStr for BoxPlusMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "approx" => Ok(Self::Approx),
            other => Err(Error::InvalidParams(format!("unknown box-plus mode {other:?}"))),
        }
    }
}

/// Box-plus of two LLRs. `+inf` is the identity and `0` the annihilator.
pub fn boxplus(a: f64, b: f64, mode: BoxPlusMode) -> f64 {
    match mode {
        BoxPlusMode::Approx => boxplus_approx(a, b),
        BoxPlusMode::Exact => boxplus_exact(a, b),
    }
}

#[inline]
fn boxplus_approx(a: f64, b: f64) -> f64 {
    let mag = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -mag
    } else {
        mag
    }
}

#[inline]
fn boxplus_exact(a: f64, b: f64) -> f64 {
    if a.is_infinite() {
        return if a > 0.0 { b } else { -b };
    }
    if b.is_infinite() {
        return if b > 0.0 { a } else { -a };
    }
    boxplus_approx(a, b) + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

/// Reliability of an error symbol: channel LLR magnitude plus a priori LLR.
///
/// Channel values are expected already scaled by `4 Es/N0`.
#[inline]
pub fn reliability(channel_llr_magnitude: f64, apriori: f64) -> f64 {
    channel_llr_magnitude + apriori
}

/// Soft channel values of one component-code block.
///
/// Information LLRs are stored stream-major (`info[i * n + l]`). Positive
/// LLR means bit 0.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrBlock {
    k: usize,
    n: usize,
    info: Vec<f64>,
    parity: Vec<f64>,
}

impl LlrBlock {
    pub fn new(info: Vec<Vec<f64>>, parity: Vec<f64>) -> Result<Self> {
        let k = info.len();
        let n = parity.len();
        if let Some(bad) = info.iter().find(|s| s.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Self {
            k,
            n,
            info: info.concat(),
            parity,
        })
    }

    /// Builds a block from a flat stream-major information buffer.
    pub fn from_flat(k: usize, info: Vec<f64>, parity: Vec<f64>) -> Result<Self> {
        let n = parity.len();
        if info.len() != k * n {
            return Err(Error::LengthMismatch {
                expected: k * n,
                found: info.len(),
            });
        }
        Ok(Self { k, n, info, parity })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn info(&self, stream: usize) -> &[f64] {
        &self.info[stream * self.n..(stream + 1) * self.n]
    }

    pub fn info_flat(&self) -> &[f64] {
        &self.info
    }

    pub fn info_flat_mut(&mut self) -> &mut [f64] {
        &mut self.info
    }

    pub fn parity(&self) -> &[f64] {
        &self.parity
    }

    pub fn parity_mut(&mut self) -> &mut [f64] {
        &mut self.parity
    }
}

/// Result of one threshold-decoding pass. All buffers are stream-major.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DecodeOutput {
    pub k: usize,
    pub n: usize,
    /// Information estimates `u = y_hard XOR e`.
    pub decisions: Vec<u8>,
    /// Estimated error symbols.
    pub errors: Vec<u8>,
    /// Extrinsic LLR on each error symbol, captured before feedback.
    pub extrinsic: Vec<f64>,
}

impl DecodeOutput {
    pub fn decisions(&self, stream: usize) -> &[u8] {
        &self.decisions[stream * self.n..(stream + 1) * self.n]
    }

    pub fn errors(&self, stream: usize) -> &[u8] {
        &self.errors[stream * self.n..(stream + 1) * self.n]
    }

    pub fn extrinsic(&self, stream: usize) -> &[f64] {
        &self.extrinsic[stream * self.n..(stream + 1) * self.n]
    }

    pub fn flips(&self) -> usize {
        self.errors.iter().filter(|&&e| e == 1).count()
    }
}

#[derive(Clone, Debug)]
struct CheckPlan {
    offset: usize,
    /// `(stream, offset)` of every participant.
    participants: Vec<(usize, usize)>,
}

/// Reusable threshold decoder for one component code.
///
/// Holds the expanded check sets and scratch buffers so repeated calls on
/// blocks of the same length do not allocate.
#[derive(Clone, Debug)]
pub struct ThresholdDecoder {
    code: CsocCode,
    mode: BoxPlusMode,
    cap: f64,
    checks: Vec<Vec<CheckPlan>>,
    /// Participant indices into `rel` for the current block length, all
    /// checks of all streams back to back.
    flat: Vec<u32>,
    /// Per stream, `(offset, end)` of each check in `flat`, sorted by offset.
    spans: Vec<Vec<(usize, usize)>>,
    flat_n: usize,
    rel: Vec<f64>,
    syndromes: Vec<u8>,
}

impl ThresholdDecoder {
    pub fn new(code: &CsocCode, mode: BoxPlusMode) -> Self {
        let checks = build_check_sets(code)
            .streams
            .into_iter()
            .map(|cs| {
                let mut plans: Vec<CheckPlan> = cs
                    .into_iter()
                    .map(|c| CheckPlan {
                        offset: c.offset,
                        participants: c.participants.iter().map(|p| (p.stream, p.offset)).collect(),
                    })
                    .collect();
                plans.sort_by_key(|p| p.offset);
                plans
            })
            .collect();
        Self {
            code: code.clone(),
            mode,
            cap: DEFAULT_LLR_CAP,
            checks,
            flat: Vec::new(),
            spans: Vec::new(),
            flat_n: usize::MAX,
            rel: Vec::new(),
            syndromes: Vec::new(),
        }
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = cap;
        self
    }

    pub fn code(&self) -> &CsocCode {
        &self.code
    }

    pub fn mode(&self) -> BoxPlusMode {
        self.mode
    }

    fn prepare(&mut self, n: usize) {
        if self.flat_n == n {
            return;
        }
        self.flat.clear();
        self.spans.clear();
        for plans in &self.checks {
            let mut spans = Vec::with_capacity(plans.len());
            for p in plans {
                self.flat.extend(p.participants.iter().map(|&(s, off)| (s * n + off) as u32));
                spans.push((p.offset, self.flat.len()));
            }
            self.spans.push(spans);
        }
        self.flat_n = n;
    }

    /// Decodes one block; see [`decode_block`].
    pub fn decode(&mut self, channel: &LlrBlock, apriori: &[f64]) -> Result<DecodeOutput> {
        let mut out = DecodeOutput::default();
        self.decode_into(channel, apriori, &mut out)?;
        Ok(out)
    }

    /// Decodes one block into `out`, reusing its buffers.
    pub fn decode_into(&mut self, channel: &LlrBlock, apriori: &[f64], out: &mut DecodeOutput) -> Result<()> {
        let k = self.code.k();
        let n = channel.len();
        if channel.k() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                found: channel.k(),
            });
        }
        if apriori.len() != k * n {
            return Err(Error::LengthMismatch {
                expected: k * n,
                found: apriori.len(),
            });
        }
        if (k + 1) * n > u32::MAX as usize {
            return Err(Error::InvalidParams(format!("block length {n} is too large")));
        }
        if n < self.code.m() + 1 {
            return Err(Error::InvalidParams(format!(
                "block length {n} is shorter than the constraint length {}",
                self.code.m() + 1
            )));
        }
        self.prepare(n);
        let cap = self.cap;

        out.k = k;
        out.n = n;
        out.decisions.clear();
        out.decisions.resize(k * n, 0);
        out.errors.clear();
        out.errors.resize(k * n, 0);
        out.extrinsic.clear();
        out.extrinsic.resize(k * n, 0.0);

        // Hard decisions, reliabilities and syndromes.
        self.rel.clear();
        self.rel.resize((k + 1) * n, 0.0);
        self.syndromes.clear();
        self.syndromes.resize(n, 0);
        for (l, &lam) in channel.parity().iter().enumerate() {
            self.syndromes[l] = u8::from(lam < 0.0);
            self.rel[k * n + l] = lam.abs().min(cap);
        }
        for (i, taps) in self.code.generators().iter().enumerate() {
            let stream = channel.info(i);
            for l in 0..n {
                let hard = u8::from(stream[l] < 0.0);
                out.decisions[i * n + l] = hard;
                self.rel[i * n + l] = reliability(stream[l].abs(), apriori[i * n + l]).clamp(-cap, cap);
                if hard == 1 {
                    for &b in taps {
                        if l + b < n {
                            self.syndromes[l + b] ^= 1;
                        }
                    }
                }
            }
        }

        for l in 0..n {
            for i in 0..k {
                let mut ext = 0.0;
                let mut start = if i == 0 { 0 } else { self.spans[i - 1].last().map_or(0, |s| s.1) };
                for &(offset, end) in &self.spans[i] {
                    let s = l + offset;
                    if s >= n {
                        break;
                    }
                    let w = self.weight(&self.flat[start..end], l);
                    start = end;
                    ext += if self.syndromes[s] == 0 { w } else { -w };
                }
                out.extrinsic[i * n + l] = ext;
                if ext + self.rel[i * n + l] < 0.0 {
                    out.errors[i * n + l] = 1;
                }
            }
            // Feedback once all k decisions at time l are made.
            for (i, taps) in self.code.generators().iter().enumerate() {
                if out.errors[i * n + l] == 1 {
                    out.decisions[i * n + l] ^= 1;
                    for &d in taps {
                        if l + d < n {
                            self.syndromes[l + d] ^= 1;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn weight(&self, parts: &[u32], base: usize) -> f64 {
        let rel = &self.rel[base..];
        match self.mode {
            BoxPlusMode::Approx => {
                let mut neg = false;
                let mut mag = f64::INFINITY;
                for &p in parts {
                    let r = rel[p as usize];
                    neg ^= r < 0.0;
                    let a = r.abs();
                    mag = if a < mag { a } else { mag };
                }
                if neg {
                    -mag
                } else {
                    mag
                }
            }
            BoxPlusMode::Exact => parts
                .iter()
                .map(|&p| rel[p as usize])
                .reduce(boxplus_exact)
                .unwrap_or(self.cap),
        }
    }
}

/// Threshold-decodes one block with syndrome feedback.
///
/// Time units are processed in order. At each time the `k` decisions are
/// made from the same syndrome state, then every syndrome checking a
/// corrected symbol is flipped. `apriori` holds one LLR per information
/// error symbol (stream-major, zero for "no information").
pub fn decode_block(code: &CsocCode, channel: &LlrBlock, apriori: &[f64], mode: BoxPlusMode) -> Result<DecodeOutput> {
    ThresholdDecoder::new(code, mode).decode(channel, apriori)
}
