//! BPSK over AWGN and conversion of channel outputs to LLRs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::codec::{CodedFrame, ReceivedFrame};

/// An operating point given as `Eb/N0` in dB and the code rate used to
/// convert it to `Es/N0`. Symbols have unit energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrPoint {
    pub eb_n0_db: f64,
    pub rate: f64,
}

impl SnrPoint {
    pub fn new(eb_n0_db: f64, rate: f64) -> Self {
        Self { eb_n0_db, rate }
    }

    /// Recovers the point from a linear `Es/N0`.
    pub fn from_es_n0(es_n0: f64, rate: f64) -> Self {
        Self {
            eb_n0_db: 10.0 * (es_n0 / rate).log10(),
            rate,
        }
    }

    /// Linear `Es/N0 = R * 10^(Eb/N0 / 10)`.
    pub fn es_n0(&self) -> f64 {
        self.rate * 10f64.powf(self.eb_n0_db / 10.0)
    }

    /// Noise variance per real dimension, `1 / (2 Es/N0)`.
    pub fn noise_variance(&self) -> f64 {
        0.5 / self.es_n0()
    }
}

/// BPSK symbol of a bit: `+1` for 0, `-1` for 1.
#[inline]
pub fn bpsk(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Channel outputs `y = x + n`, `n ~ N(0, sigma^2)`.
pub fn transmit<R: Rng + ?Sized>(bits: &[u8], snr: SnrPoint, rng: &mut R) -> Vec<f64> {
    let sigma = snr.noise_variance().sqrt();
    bits.iter()
        .map(|&b| bpsk(b) + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Scaled channel LLR `4 (Es/N0) y`; positive favours bit 0.
#[inline]
pub fn to_llr(y: f64, snr: SnrPoint) -> f64 {
    4.0 * snr.es_n0() * y
}

/// Hard decision of a soft value; zero decides bit 0.
#[inline]
pub fn hard_decision(v: f64) -> u8 {
    u8::from(v < 0.0)
}

/// Sends a coded frame through the channel and returns its LLRs.
///
/// Bits are drawn in transmitted order (systematic, parity 1, parity 2 per
/// coupled time) so the noise realization depends only on the RNG stream.
pub fn receive_frame<R: Rng + ?Sized>(frame: &CodedFrame, snr: SnrPoint, rng: &mut R) -> ReceivedFrame {
    let ys = transmit(&frame.transmitted_order(), snr, rng);
    let llrs: Vec<f64> = ys.into_iter().map(|y| to_llr(y, snr)).collect();
    let mut out = ReceivedFrame {
        block_size: frame.block_size,
        parity_len: frame.parity_len,
        systematic: Vec::with_capacity(frame.systematic.len()),
        parity: [Vec::new(), Vec::new()],
    };
    let frame_blocks = frame.systematic.len() / frame.block_size;
    let mut rest = &llrs[..];
    for tau in 0..frame.coupled_blocks() {
        if tau < frame_blocks {
            out.systematic.extend_from_slice(&rest[..frame.block_size]);
            rest = &rest[frame.block_size..];
        }
        for p in &mut out.parity {
            p.extend_from_slice(&rest[..frame.parity_len]);
            rest = &rest[frame.parity_len..];
        }
    }
    out
}

/// Random generator for frame `frame` at SNR index `snr_index` of a run.
///
/// Every frame gets its own ChaCha stream, so results do not depend on the
/// order frames are simulated in.
pub fn frame_rng(master_seed: u64, snr_index: usize, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((snr_index as u64) << 40) | frame);
    rng
}
