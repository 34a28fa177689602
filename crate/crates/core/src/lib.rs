//! Spatially coupled parallel-concatenated codes built from convolutional
//! self-orthogonal component codes, with iterative APP threshold decoding
//! over a sliding window.
//!
//! - [`csoc`]: component codes, orthogonality checks, encoding, syndromes, code search
//! - [`threshold`]: one-pass APP threshold decoding of a component block
//! - [`coupling`]: interleaver and coupled source matrices
//! - [`codec`]: frame encoder, parameters and rates
//! - [`window`]: sliding-window turbo decoder
//! - [`channel`]: BPSK/AWGN and LLRs
//! - [`analysis`]: latency, memory and operation counts
//! - [`harness`]: reproducible Monte Carlo sweeps
//! - [`presets`]: experiment configurations

pub mod analysis;
pub mod channel;
pub mod codec;
pub mod coupling;
pub mod csoc;
mod error;
pub mod harness;
pub mod presets;
pub mod threshold;
pub mod window;

pub use codec::{code_rate, encode_frame, CodedFrame, RateConvention, ReceivedFrame, ScPccParams, Termination};
pub use csoc::CsocCode;
pub use error::{Error, Result};
pub use harness::{run_sweep, BerStats, SimConfig};
pub use threshold::{boxplus, decode_block, BoxPlusMode};
pub use window::{decode_frame, WindowDecoder};

use sha2::{Digest, Sha256};

/// First 16 hex digits of the SHA-256 of a value's JSON form.
pub(crate) fn content_hash<T: serde::Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config types serialize");
    Sha256::digest(&json)[..8].iter().map(|b| format!("{b:02x}")).collect()
}
