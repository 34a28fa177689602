//! SC-PCC frame encoder and rate accounting.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::coupling::{CouplingMap, CouplingPath, Interleaver};
use crate::csoc::{encode_block, CsocCode};
use crate::error::{Error, Result};
use crate::threshold::BoxPlusMode;

/// Whether each component-encoder block is flushed back to the zero state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// Append `m + 1` zero time units (`nu = k(m+1)` zero bits) to every block.
    #[default]
    TerminateBlocks,
    /// Encode each block from the zero state without flushing.
    Unterminated,
}

/// Full codec and decoder configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScPccParams {
    pub code: CsocCode,
    /// Source block size `T` in bits.
    pub block_size: usize,
    /// Coupling memory `m_sc`; zero gives an uncoupled PCC.
    pub coupling_memory: usize,
    /// Number of source blocks `L` per frame.
    pub frame_blocks: usize,
    /// Interleaver seed; `null` selects the identity permutation.
    pub interleaver_seed: Option<u64>,
    /// Window size `w`, in coupled blocks.
    pub window: usize,
    /// `I_V`.
    pub vertical_iterations: usize,
    /// `I_H`.
    pub horizontal_iterations: usize,
    #[serde(default)]
    pub boxplus: BoxPlusMode,
    /// Multiplies every a priori value gathered from the other decoder.
    #[serde(default = "default_scale")]
    pub extrinsic_scale: f64,
    #[serde(default)]
    pub termination: Termination,
}

fn default_scale() -> f64 {
    1.0
}

impl ScPccParams {
    /// Coupled code with the given shape and default decoder settings
    /// (`w = 2(m_sc + 1)`, `I_V = 1`, `I_H = 4`, seeded interleaver).
    pub fn new(code: CsocCode, block_size: usize, coupling_memory: usize, frame_blocks: usize) -> Self {
        Self {
            code,
            block_size,
            coupling_memory,
            frame_blocks,
            interleaver_seed: Some(1),
            window: 2 * (coupling_memory + 1),
            vertical_iterations: 1,
            horizontal_iterations: 4,
            boxplus: BoxPlusMode::default(),
            extrinsic_scale: 1.0,
            termination: Termination::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.block_size == 0 || self.block_size % (self.coupling_memory + 1) != 0 {
            return bad(format!(
                "T = {} must be a positive multiple of m_sc + 1 = {}",
                self.block_size,
                self.coupling_memory + 1
            ));
        }
        if self.frame_blocks == 0 {
            return bad("L must be at least 1".into());
        }
        if self.window < self.coupling_memory + 1 {
            return bad(format!(
                "window w = {} must be at least m_sc + 1 = {}",
                self.window,
                self.coupling_memory + 1
            ));
        }
        if self.vertical_iterations == 0 || self.horizontal_iterations == 0 {
            return bad("I_V and I_H must be at least 1".into());
        }
        if !self.extrinsic_scale.is_finite() || self.extrinsic_scale < 0.0 {
            return bad(format!("extrinsic scale {} must be finite and non-negative", self.extrinsic_scale));
        }
        if self.block_time_units() < self.code.m() + 1 {
            return bad(format!(
                "component blocks of {} time units are shorter than the constraint length {}; terminate blocks or increase T",
                self.block_time_units(),
                self.code.m() + 1
            ));
        }
        Ok(())
    }

    /// Information time units per coupled block, `ceil(T / k)`.
    pub fn data_time_units(&self) -> usize {
        self.block_size.div_ceil(self.code.k())
    }

    /// Time units per component-encoder block including termination.
    pub fn block_time_units(&self) -> usize {
        match self.termination {
            Termination::TerminateBlocks => self.data_time_units() + self.code.m() + 1,
            Termination::Unterminated => self.data_time_units(),
        }
    }

    /// Number of coupled blocks `L + m_sc`.
    pub fn coupled_blocks(&self) -> usize {
        self.frame_blocks + self.coupling_memory
    }

    pub fn source_bits(&self) -> usize {
        self.frame_blocks * self.block_size
    }

    /// Bits on the channel for one frame.
    pub fn transmitted_bits(&self) -> usize {
        self.source_bits() + 2 * self.coupled_blocks() * self.block_time_units()
    }

    pub fn interleaver(&self) -> Interleaver {
        Interleaver::new(self.block_size, self.interleaver_seed)
    }

    pub fn coupling_map(&self) -> Result<CouplingMap> {
        CouplingMap::new(self.block_size, self.coupling_memory, self.frame_blocks, self.interleaver())
    }

    /// Short content hash of the canonical JSON form.
    pub fn hash(&self) -> String {
        crate::content_hash(self)
    }
}

/// An exact rational code rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rate {
    pub num: u64,
    pub den: u64,
}

impl Rate {
    pub fn new(num: u64, den: u64) -> Self {
        let g = gcd(num, den).max(1);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} ({:.4})", self.num, self.den, self.value())
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateConvention {
    /// `T / (T + 2T/k + nu)`, counting all `nu` termination inputs as overhead.
    Formula,
    /// `T / (T + 2T/k + 2(m+1))`: only the flushing parity bits are overhead.
    #[default]
    Transmitted,
}

/// Per-block code rate of a terminated (or unterminated) SC-PCC.
pub fn code_rate(params: &ScPccParams, convention: RateConvention) -> Rate {
    let t = params.block_size as u64;
    let k = params.code.k() as u64;
    let tail = match params.termination {
        Termination::TerminateBlocks => 1,
        Termination::Unterminated => 0,
    };
    match convention {
        RateConvention::Formula => {
            let nu = params.code.nu() as u64 * tail;
            Rate::new(k * t, k * t + 2 * t + k * nu)
        }
        RateConvention::Transmitted => Rate::new(t, t + 2 * params.block_time_units() as u64),
    }
}

/// Limit of the rate for large `T`, `k / (k + 2)`.
pub fn asymptotic_rate(k: usize) -> Rate {
    Rate::new(k as u64, k as u64 + 2)
}

/// Encoder output for one frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodedFrame {
    pub block_size: usize,
    pub parity_len: usize,
    /// `L * T` systematic bits, `v0_t = u_t`.
    pub systematic: Vec<u8>,
    /// Parity of encoder 1 and 2, `(L + m_sc) * parity_len` bits each.
    pub parity: [Vec<u8>; 2],
}

impl CodedFrame {
    pub fn coupled_blocks(&self) -> usize {
        self.parity[0].len() / self.parity_len
    }

    pub fn systematic_block(&self, t: usize) -> &[u8] {
        &self.systematic[t * self.block_size..(t + 1) * self.block_size]
    }

    /// Parity block of encoder `which` (0 or 1) at coupled time `tau`.
    pub fn parity_block(&self, which: usize, tau: usize) -> &[u8] {
        &self.parity[which][tau * self.parity_len..(tau + 1) * self.parity_len]
    }

    /// All transmitted bits in coupled-time order: `v0_t` (for `t < L`), `v1_t`, `v2_t`.
    pub fn transmitted_order(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.systematic.len() + 2 * self.parity[0].len());
        for tau in 0..self.coupled_blocks() {
            if tau * self.block_size < self.systematic.len() {
                out.extend_from_slice(self.systematic_block(tau));
            }
            out.extend_from_slice(self.parity_block(0, tau));
            out.extend_from_slice(self.parity_block(1, tau));
        }
        out
    }

    /// Inverse of [`CodedFrame::transmitted_order`].
    pub fn from_transmitted_order(bits: &[u8], frame_blocks: usize, block_size: usize, parity_len: usize, coupled: usize) -> Result<Self> {
        let expected = frame_blocks * block_size + 2 * coupled * parity_len;
        if bits.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: bits.len(),
            });
        }
        let mut frame = CodedFrame {
            block_size,
            parity_len,
            systematic: Vec::with_capacity(frame_blocks * block_size),
            parity: [Vec::new(), Vec::new()],
        };
        let mut rest = bits;
        for tau in 0..coupled {
            if tau < frame_blocks {
                frame.systematic.extend_from_slice(&rest[..block_size]);
                rest = &rest[block_size..];
            }
            for p in &mut frame.parity {
                p.extend_from_slice(&rest[..parity_len]);
                rest = &rest[parity_len..];
            }
        }
        Ok(frame)
    }
}

/// Channel LLRs for one frame, laid out like [`CodedFrame`].
#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedFrame {
    pub block_size: usize,
    pub parity_len: usize,
    pub systematic: Vec<f64>,
    pub parity: [Vec<f64>; 2],
}

impl ReceivedFrame {
    /// Maps every bit of a coded frame to `+magnitude` (bit 0) or `-magnitude` (bit 1).
    pub fn noiseless(frame: &CodedFrame, magnitude: f64) -> Self {
        Self::map(frame, |b| if b == 0 { magnitude } else { -magnitude })
    }

    pub fn map(frame: &CodedFrame, mut f: impl FnMut(u8) -> f64) -> Self {
        let systematic = frame.systematic.iter().map(|&b| f(b)).collect();
        let p0 = frame.parity[0].iter().map(|&b| f(b)).collect();
        let p1 = frame.parity[1].iter().map(|&b| f(b)).collect();
        Self {
            block_size: frame.block_size,
            parity_len: frame.parity_len,
            systematic,
            parity: [p0, p1],
        }
    }

    pub fn parity_block(&self, which: usize, tau: usize) -> &[f64] {
        &self.parity[which][tau * self.parity_len..(tau + 1) * self.parity_len]
    }
}

/// Demultiplexes a coupled block round-robin into `k` streams of `len` time units.
pub(crate) fn demux_bits(block: &[u8], k: usize, len: usize) -> Vec<Vec<u8>> {
    let mut streams = vec![vec![0u8; len]; k];
    for (c, &b) in block.iter().enumerate() {
        streams[c % k][c / k] = b;
    }
    streams
}

/// A configured SC-PCC encoder.
#[derive(Clone, Debug)]
pub struct ScPccEncoder {
    params: ScPccParams,
    map: CouplingMap,
}

impl ScPccEncoder {
    pub fn new(params: ScPccParams) -> Result<Self> {
        params.validate()?;
        let map = params.coupling_map()?;
        Ok(Self { params, map })
    }

    pub fn params(&self) -> &ScPccParams {
        &self.params
    }

    pub fn coupling_map(&self) -> &CouplingMap {
        &self.map
    }

    pub fn encode(&self, source: &[u8]) -> Result<CodedFrame> {
        let p = &self.params;
        if source.len() != p.source_bits() {
            return Err(Error::LengthMismatch {
                expected: p.source_bits(),
                found: source.len(),
            });
        }
        let len = p.block_time_units();
        let mut parity = [Vec::with_capacity(p.coupled_blocks() * len), Vec::with_capacity(p.coupled_blocks() * len)];
        for tau in 0..p.coupled_blocks() {
            for (out, path) in parity.iter_mut().zip([CouplingPath::Plain, CouplingPath::Permuted]) {
                let coupled = self.map.gather_bits(source, path, tau)?;
                let streams = demux_bits(&coupled, p.code.k(), len);
                out.extend(encode_block(&p.code, &streams)?);
            }
        }
        Ok(CodedFrame {
            block_size: p.block_size,
            parity_len: len,
            systematic: source.to_vec(),
            parity,
        })
    }
}

/// Encodes one frame of `L * T` source bits.
pub fn encode_frame(params: &ScPccParams, source: &[u8]) -> Result<CodedFrame> {
    ScPccEncoder::new(params.clone())?.encode(source)
}

const FRAME_MAGIC: &[u8; 8] = b"SCPCCFR1";

/// Bit-packed container of encoded frames.
///
/// Layout: magic, params hash (16 ASCII hex digits), payload length in
/// bytes (u64 LE), frame count, bits per frame (u64 LE each), then each
/// frame's bits in transmitted order, packed MSB first and padded to a byte.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameFile {
    pub params_hash: String,
    pub payload_bytes: u64,
    pub frames: Vec<Vec<u8>>,
}

impl FrameFile {
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let bits = self.frames.first().map_or(0, Vec::len);
        if self.frames.iter().any(|f| f.len() != bits) {
            return Err(Error::Format("frames differ in length".into()));
        }
        if self.params_hash.len() != 16 {
            return Err(Error::Format("params hash must be 16 hex digits".into()));
        }
        w.write_all(FRAME_MAGIC)?;
        w.write_all(self.params_hash.as_bytes())?;
        w.write_all(&self.payload_bytes.to_le_bytes())?;
        w.write_all(&(self.frames.len() as u64).to_le_bytes())?;
        w.write_all(&(bits as u64).to_le_bytes())?;
        for f in &self.frames {
            w.write_all(&pack_bits(f))?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != FRAME_MAGIC {
            return Err(Error::Format("not an encoded frame file".into()));
        }
        let mut hash = [0u8; 16];
        r.read_exact(&mut hash)?;
        let params_hash = String::from_utf8(hash.to_vec()).map_err(|_| Error::Format("bad params hash".into()))?;
        let mut word = [0u8; 8];
        let mut next = |r: &mut dyn Read| -> Result<u64> {
            r.read_exact(&mut word)?;
            Ok(u64::from_le_bytes(word))
        };
        let payload_bytes = next(&mut r)?;
        let count = next(&mut r)? as usize;
        let bits = next(&mut r)? as usize;
        let mut frames = Vec::with_capacity(count);
        let mut buf = vec![0u8; bits.div_ceil(8)];
        for _ in 0..count {
            r.read_exact(&mut buf)?;
            frames.push(unpack_bits(&buf, bits));
        }
        Ok(Self {
            params_hash,
            payload_bytes,
            frames,
        })
    }
}

/// Packs bits MSB first.
pub fn pack_bits(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b & 1) << (7 - i))))
        .collect()
}

pub fn unpack_bits(bytes: &[u8], bits: usize) -> Vec<u8> {
    (0..bits).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: usize, m_sc: usize, l: usize) -> ScPccParams {
        ScPccParams::new(CsocCode::rate_two_thirds_j4(), t, m_sc, l)
    }

    #[test]
    fn rate_examples() {
        let p = params(1200, 1, 10);
        let f = code_rate(&p, RateConvention::Formula);
        let t = code_rate(&p, RateConvention::Transmitted);
        assert_eq!(f, Rate::new(1200, 2428));
        assert_eq!(f, t);
        assert!((f.value() - 0.4942).abs() < 1e-4);
        assert_eq!(asymptotic_rate(2), Rate::new(1, 2));
    }

    #[test]
    fn rate_conventions_coincide_for_k2() {
        for t in [24, 400, 1000, 9990] {
            let p = params(t, 0, 1);
            assert_eq!(code_rate(&p, RateConvention::Formula), code_rate(&p, RateConvention::Transmitted));
        }
    }

    #[test]
    fn params_validation() {
        assert!(params(1200, 1, 2).validate().is_ok());
        assert!(params(1201, 1, 2).validate().is_err());
        let mut p = params(1200, 1, 2);
        p.window = 1;
        assert!(p.validate().is_err());
        let mut p = params(1200, 1, 2);
        p.horizontal_iterations = 0;
        assert!(p.validate().is_err());
        let mut p = params(20, 0, 2);
        p.termination = Termination::Unterminated;
        assert!(p.validate().is_err());
    }

    #[test]
    fn zero_source_gives_zero_frame() {
        let p = params(40, 1, 3);
        let f = encode_frame(&p, &vec![0; 120]).unwrap();
        assert!(f.systematic.iter().chain(&f.parity[0]).chain(&f.parity[1]).all(|&b| b == 0));
        assert_eq!(f.coupled_blocks(), 4);
        assert_eq!(f.parity_len, 20 + 14);
        assert_eq!(f.transmitted_order().len(), p.transmitted_bits());
    }

    #[test]
    fn uncoupled_single_block_is_a_pcc() {
        let mut p = params(40, 0, 1);
        p.interleaver_seed = Some(5);
        let src: Vec<u8> = (0..40).map(|i| ((i * 11) % 7 < 3) as u8).collect();
        let f = encode_frame(&p, &src).unwrap();
        let il = p.interleaver();
        let mut permuted = vec![0u8; 40];
        for (pos, &b) in src.iter().enumerate() {
            permuted[il.forward(pos)] = b;
        }
        let len = p.block_time_units();
        let p1 = encode_block(&p.code, &demux_bits(&src, 2, len)).unwrap();
        let p2 = encode_block(&p.code, &demux_bits(&permuted, 2, len)).unwrap();
        assert_eq!(f.parity[0], p1);
        assert_eq!(f.parity[1], p2);
    }

    #[test]
    fn transmitted_order_round_trip() {
        let p = params(40, 1, 3);
        let src: Vec<u8> = (0..120).map(|i| (i % 3 == 0) as u8).collect();
        let f = encode_frame(&p, &src).unwrap();
        let back = CodedFrame::from_transmitted_order(&f.transmitted_order(), 3, 40, f.parity_len, 4).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn frame_file_round_trip() {
        let file = FrameFile {
            params_hash: "0123456789abcdef".into(),
            payload_bytes: 3,
            frames: vec![vec![1, 0, 1, 1, 0, 0, 0, 1, 1, 1], vec![0; 10]],
        };
        let mut buf = Vec::new();
        file.write_to(&mut buf).unwrap();
        assert_eq!(FrameFile::read_from(&buf[..]).unwrap(), file);
        assert!(FrameFile::read_from(&b"garbage-file-contents"[..]).is_err());
    }
}
