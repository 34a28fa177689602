//! Latency, memory and operation-count estimates for window decoding.
//!
//! All operation counts are per `T` decoded bits and per component decoder,
//! then multiplied by the `2 w I_V I_H` component runs of one window
//! position. The tap-count term `nu * gamma` is either the empirical
//! estimate `nu / (1.5 k (k - 1))` or the true count `kJ` of the code.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::codec::ScPccParams;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Latency {
    /// Symbols received before decoding can start, `w T`.
    pub decoding: u64,
    /// Structural minimum from coupling alone, `(m_sc + 1) T`.
    pub minimum: u64,
    /// Recommended default window `2 (m_sc + 1)`.
    pub default_window: u64,
}

pub fn latency(params: &ScPccParams) -> Latency {
    let t = params.block_size as u64;
    let span = params.coupling_memory as u64 + 1;
    Latency {
        decoding: params.window as u64 * t,
        minimum: span * t,
        default_window: 2 * span,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Memory {
    pub encoder: u64,
    pub decoder: u64,
}

/// Coupled encoder `T(m_sc + 1) + 2 nu` and window decoder `T(w + 1) + 8 nu`.
pub fn memory(params: &ScPccParams) -> Memory {
    let t = params.block_size as u64;
    let nu = params.code.nu() as u64;
    Memory {
        encoder: t * (params.coupling_memory as u64 + 1) + 2 * nu,
        decoder: t * (params.window as u64 + 1) + 8 * nu,
    }
}

/// Uncoupled PCC encoder `T + 2 nu` and decoder `T + 8 nu`.
pub fn pcc_memory(params: &ScPccParams) -> Memory {
    let t = params.block_size as u64;
    let nu = params.code.nu() as u64;
    Memory {
        encoder: t + 2 * nu,
        decoder: t + 8 * nu,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    Empirical,
    #[default]
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpCounts<N> {
    pub mul: N,
    pub add: N,
    pub boxplus: N,
    /// `mul + add + boxplus` for one component decoder.
    pub per_decoder: N,
    /// `per_decoder * 2 w I_V I_H`.
    pub per_window_position: N,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Operations {
    Empirical { taps: f64, counts: OpCounts<f64> },
    Exact { taps: u64, counts: OpCounts<u64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub latency: Latency,
    pub memory: Memory,
    pub pcc_memory: Memory,
    pub operations: Operations,
    /// Component decoder runs per window position, `2 w I_V I_H`.
    pub vertical_factor: u64,
    /// Information symbols decidable in parallel at each time unit.
    pub parallelism: u64,
}

/// Empirical nonzero-tap estimate `nu / (1.5 k (k - 1))`.
pub fn empirical_taps(k: usize, nu: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::EmpiricalUndefined);
    }
    Ok(nu as f64 / (1.5 * (k * (k - 1)) as f64))
}

fn vertical_factor(params: &ScPccParams) -> u64 {
    2 * (params.window * params.vertical_iterations * params.horizontal_iterations) as u64
}

pub fn computation(params: &ScPccParams, mode: CountMode) -> Result<ComplexityReport> {
    let t = params.block_size as u64;
    let k = params.code.k() as u64;
    let factor = vertical_factor(params);
    let operations = match mode {
        CountMode::Exact => {
            let taps = params.code.tap_count() as u64;
            let mul = t * (k + 1);
            let add = t * (k + 2 * taps + 1);
            let boxplus = t * taps;
            let per_decoder = mul + add + boxplus;
            Operations::Exact {
                taps,
                counts: OpCounts {
                    mul,
                    add,
                    boxplus,
                    per_decoder,
                    per_window_position: factor * per_decoder,
                },
            }
        }
        CountMode::Empirical => {
            let taps = empirical_taps(params.code.k(), params.code.nu())?;
            let (t, k) = (t as f64, k as f64);
            let mul = t * (k + 1.0);
            let add = t * (k + 2.0 * taps + 1.0);
            let boxplus = t * taps;
            let per_decoder = mul + add + boxplus;
            Operations::Empirical {
                taps,
                counts: OpCounts {
                    mul,
                    add,
                    boxplus,
                    per_decoder,
                    per_window_position: factor as f64 * per_decoder,
                },
            }
        }
    };
    Ok(ComplexityReport {
        latency: latency(params),
        memory: memory(params),
        pcc_memory: pcc_memory(params),
        operations,
        vertical_factor: factor,
        parallelism: k,
    })
}

impl fmt::Display for ComplexityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |f: &mut fmt::Formatter<'_>, name: &str, v: String| writeln!(f, "{name:<34} {v:>16}");
        row(f, "decoding latency (symbols)", self.latency.decoding.to_string())?;
        row(f, "minimum latency (symbols)", self.latency.minimum.to_string())?;
        row(f, "default window", self.latency.default_window.to_string())?;
        row(f, "encoder memory", self.memory.encoder.to_string())?;
        row(f, "decoder memory", self.memory.decoder.to_string())?;
        row(f, "PCC encoder memory", self.pcc_memory.encoder.to_string())?;
        row(f, "PCC decoder memory", self.pcc_memory.decoder.to_string())?;
        match &self.operations {
            Operations::Exact { taps, counts } => {
                row(f, "nonzero taps (exact)", taps.to_string())?;
                row(f, "multiplications / T bits", counts.mul.to_string())?;
                row(f, "additions / T bits", counts.add.to_string())?;
                row(f, "box-plus / T bits", counts.boxplus.to_string())?;
                row(f, "per component decoder", counts.per_decoder.to_string())?;
                row(f, "per window position", counts.per_window_position.to_string())?;
            }
            Operations::Empirical { taps, counts } => {
                row(f, "nonzero taps (empirical)", format!("{taps:.3}"))?;
                row(f, "multiplications / T bits", format!("{:.1}", counts.mul))?;
                row(f, "additions / T bits", format!("{:.1}", counts.add))?;
                row(f, "box-plus / T bits", format!("{:.1}", counts.boxplus))?;
                row(f, "per component decoder", format!("{:.1}", counts.per_decoder))?;
                row(f, "per window position", format!("{:.1}", counts.per_window_position))?;
            }
        }
        row(f, "vertical iterations / position", self.vertical_factor.to_string())?;
        row(f, "parallel decisions per time unit", self.parallelism.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csoc::CsocCode;

    fn params(t: usize, m_sc: usize, w: usize) -> ScPccParams {
        let mut p = ScPccParams::new(CsocCode::rate_two_thirds_j4(), t, m_sc, 4);
        p.window = w;
        p
    }

    #[test]
    fn latency_examples() {
        assert_eq!(latency(&params(400, 1, 3)).decoding, 1200);
        let p = params(400, 1, 4);
        assert_eq!(latency(&p).decoding, 4 * 400);
        assert_eq!(latency(&p).default_window, 4);
        assert_eq!(latency(&params(1200, 0, 1)).decoding, 1200);
    }

    #[test]
    fn memory_examples() {
        assert_eq!(memory(&params(1200, 1, 3)), Memory { encoder: 2456, decoder: 5024 });
        let pcc = params(1200, 0, 1);
        assert_eq!(memory(&pcc).decoder, 2 * 1200 + 8 * 28);
        assert_eq!(pcc_memory(&pcc), Memory { encoder: 1256, decoder: 1424 });
    }

    #[test]
    fn computation_examples() {
        let p = params(1200, 1, 3);
        let Operations::Exact { taps, counts } = computation(&p, CountMode::Exact).unwrap().operations else {
            panic!()
        };
        assert_eq!(taps, 8);
        assert_eq!(counts.per_decoder, 30 * 1200);

        let mut p = p;
        p.vertical_iterations = 1;
        p.horizontal_iterations = 4;
        let r = computation(&p, CountMode::Empirical).unwrap();
        let Operations::Empirical { taps, counts } = r.operations else { panic!() };
        assert!((taps - 28.0 / 3.0).abs() < 1e-12);
        assert!((counts.per_decoder - 34.0 * 1200.0).abs() < 1e-6);
        assert_eq!(r.vertical_factor, 24);
        assert!((counts.per_window_position - 24.0 * counts.per_decoder).abs() < 1e-6);
    }

    #[test]
    fn empirical_rejects_single_stream_codes() {
        let p = ScPccParams::new(CsocCode::new(vec![vec![0, 1]]).unwrap(), 40, 0, 1);
        assert!(matches!(computation(&p, CountMode::Empirical), Err(Error::EmpiricalUndefined)));
        assert!(computation(&p, CountMode::Exact).is_ok());
    }
}
