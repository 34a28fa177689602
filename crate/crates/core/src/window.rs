//! Sliding-window iterative threshold decoding of SC-PCC frames.
//!
//! Two component threshold decoders work on every coupled time `tau`:
//! decoder 1 on `(Y_tau, r1_tau)` and decoder 2 on `(Y~_tau, r2_tau)`. Their
//! extrinsic outputs live in an [`ExtrinsicStore`] indexed by source bit,
//! so a value written at one coupled time is read back wherever the same
//! source bit appears in the complementary decoder, possibly at a
//! neighbouring time.
//!
//! Schedule for target block `t` and window `[t, t + w - 1]`:
//!
//! ```text
//! repeat I_H times:
//!     for tau = t ..= t+w-1: I_V vertical iterations at tau
//!     for tau = t+w-1 ..= t: I_V vertical iterations at tau
//! decide source block t - m_sc, advance t
//! ```
//!
//! A vertical iteration is decoder 1 followed by decoder 2 at one `tau`.
//! Window positions past the end of the frame count as visited but cost
//! nothing.

use serde::{Deserialize, Serialize};

use crate::codec::{ReceivedFrame, ScPccParams};
use crate::coupling::{CouplingMap, CouplingPath};
use crate::error::{Error, Result};
use crate::threshold::{DecodeOutput, LlrBlock, ThresholdDecoder};

/// Latest extrinsic LLR of each source bit from each component decoder.
///
/// Values refer to error symbols relative to the channel hard decision.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtrinsicStore {
    /// Written by decoder 1 (plain path).
    pub plain: Vec<f64>,
    /// Written by decoder 2 (permuted path).
    pub permuted: Vec<f64>,
}

impl ExtrinsicStore {
    pub fn new(source_bits: usize) -> Self {
        Self {
            plain: vec![0.0; source_bits],
            permuted: vec![0.0; source_bits],
        }
    }

    pub fn reset(&mut self) {
        self.plain.fill(0.0);
        self.permuted.fill(0.0);
    }
}

/// Which component decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    First,
    Second,
}

impl Component {
    fn path(self) -> CouplingPath {
        match self {
            Component::First => CouplingPath::Plain,
            Component::Second => CouplingPath::Permuted,
        }
    }

    fn index(self) -> usize {
        match self {
            Component::First => 0,
            Component::Second => 1,
        }
    }
}

/// One component-decoder invocation, recorded when tracing is enabled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub target: usize,
    pub tau: usize,
    pub component: Component,
}

/// Counters and statistics of one frame decode.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeReport {
    /// Vertical iterations scheduled, including those on clipped positions.
    pub vertical_iterations: u64,
    /// Component decoder runs actually performed.
    pub component_decodes: u64,
    pub window_positions: u64,
    /// Threshold-rule corrections made while each target was in the window.
    pub flips_per_target: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEvent>>,
}

impl DecodeReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Decoder state for one frame.
#[derive(Clone, Debug)]
pub struct WindowDecoder {
    params: ScPccParams,
    map: CouplingMap,
    component: ThresholdDecoder,
    block_units: usize,
    channel: Vec<f64>,
    parity: [Vec<f64>; 2],
    store: ExtrinsicStore,
    target: usize,
    report: DecodeReport,
    tracing: bool,
    // scratch
    gathered: Vec<f64>,
    apriori: Vec<f64>,
    block: LlrBlock,
    out: DecodeOutput,
}

impl WindowDecoder {
    pub fn new(params: ScPccParams) -> Result<Self> {
        params.validate()?;
        let map = params.coupling_map()?;
        let component = ThresholdDecoder::new(&params.code, params.boxplus);
        let k = params.code.k();
        let n = params.block_time_units();
        let t = params.block_size;
        Ok(Self {
            map,
            component,
            block_units: n,
            channel: vec![0.0; params.source_bits()],
            parity: [Vec::new(), Vec::new()],
            store: ExtrinsicStore::new(params.source_bits()),
            target: 0,
            report: DecodeReport::default(),
            tracing: false,
            gathered: vec![0.0; t],
            apriori: vec![0.0; k * n],
            block: LlrBlock::from_flat(k, vec![0.0; k * n], vec![0.0; n])?,
            out: DecodeOutput::default(),
            params,
        })
    }

    pub fn params(&self) -> &ScPccParams {
        &self.params
    }

    pub fn coupling_map(&self) -> &CouplingMap {
        &self.map
    }

    /// Records every component decoder call in the report.
    pub fn set_tracing(&mut self, on: bool) {
        self.tracing = on;
    }

    /// Loads a received frame and clears all decoding state.
    pub fn load(&mut self, received: &ReceivedFrame) -> Result<()> {
        let p = &self.params;
        let parity_total = p.coupled_blocks() * self.block_units;
        if received.systematic.len() != p.source_bits() {
            return Err(Error::LengthMismatch {
                expected: p.source_bits(),
                found: received.systematic.len(),
            });
        }
        if received.parity_len != self.block_units {
            return Err(Error::LengthMismatch {
                expected: self.block_units,
                found: received.parity_len,
            });
        }
        for par in &received.parity {
            if par.len() != parity_total {
                return Err(Error::LengthMismatch {
                    expected: parity_total,
                    found: par.len(),
                });
            }
        }
        self.channel.copy_from_slice(&received.systematic);
        self.parity = received.parity.clone();
        self.store.reset();
        self.target = 0;
        self.report = DecodeReport {
            trace: self.tracing.then(Vec::new),
            ..DecodeReport::default()
        };
        Ok(())
    }

    pub fn store(&self) -> &ExtrinsicStore {
        &self.store
    }

    pub fn report(&self) -> &DecodeReport {
        &self.report
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn set_target(&mut self, t: usize) -> Result<()> {
        self.check_tau(t)?;
        self.target = t;
        Ok(())
    }

    fn check_tau(&self, tau: usize) -> Result<()> {
        if tau >= self.params.coupled_blocks() {
            return Err(Error::OutOfRange {
                index: tau,
                len: self.params.coupled_blocks(),
            });
        }
        Ok(())
    }

    /// A priori values (length `T`, coupled order) that `component` would use at `tau`.
    pub fn apriori(&self, component: Component, tau: usize) -> Result<Vec<f64>> {
        let source = match component {
            Component::First => &self.store.permuted,
            Component::Second => &self.store.plain,
        };
        let scale = self.params.extrinsic_scale;
        let mut v = self.map.gather(source, component.path(), tau)?;
        for x in &mut v {
            *x = scaled(*x, scale);
        }
        Ok(v)
    }

    /// Decoder 1 then decoder 2 at coupled time `tau`, one pass each.
    pub fn vertical_iteration(&mut self, tau: usize) -> Result<()> {
        self.check_tau(tau)?;
        self.report.vertical_iterations += 1;
        self.run_component(Component::First, tau)?;
        self.run_component(Component::Second, tau)
    }

    fn run_component(&mut self, which: Component, tau: usize) -> Result<()> {
        let k = self.params.code.k();
        let n = self.block_units;
        let t = self.params.block_size;
        let path = which.path();
        let scale = self.params.extrinsic_scale;

        // Channel values, demultiplexed round-robin; padding and termination are known zeros.
        self.map.gather_into(&self.channel, path, tau, &mut self.gathered)?;
        {
            let info = self.block.info_flat_mut();
            info.fill(f64::INFINITY);
            for (c, &v) in self.gathered.iter().enumerate() {
                info[(c % k) * n + c / k] = v;
            }
        }
        self.block
            .parity_mut()
            .copy_from_slice(&self.parity[which.index()][tau * n..(tau + 1) * n]);

        let other = match which {
            Component::First => &self.store.permuted,
            Component::Second => &self.store.plain,
        };
        self.map.gather_into(other, path, tau, &mut self.gathered)?;
        self.apriori.fill(0.0);
        for (c, &v) in self.gathered.iter().enumerate() {
            self.apriori[(c % k) * n + c / k] = scaled(v, scale);
        }

        self.component.decode_into(&self.block, &self.apriori, &mut self.out)?;

        for (c, g) in self.gathered.iter_mut().enumerate().take(t) {
            *g = self.out.extrinsic[(c % k) * n + c / k];
        }
        let own = match which {
            Component::First => &mut self.store.plain,
            Component::Second => &mut self.store.permuted,
        };
        self.map.scatter(own, path, tau, &self.gathered)?;

        self.report.component_decodes += 1;
        if let Some(slot) = self.report.flips_per_target.get_mut(self.target) {
            *slot += self.out.flips() as u64;
        }
        if let Some(trace) = self.report.trace.as_mut() {
            trace.push(TraceEvent {
                target: self.target,
                tau,
                component: which,
            });
        }
        Ok(())
    }

    /// Forward then backward sweep over the current window with `I_V`
    /// vertical iterations per block.
    pub fn horizontal_iteration(&mut self) -> Result<()> {
        let start = self.target;
        let w = self.params.window;
        let last = self.params.coupled_blocks() - 1;
        let iv = self.params.vertical_iterations;
        let visit = |this: &mut Self, tau: usize| -> Result<()> {
            for _ in 0..iv {
                if tau <= last {
                    this.vertical_iteration(tau)?;
                } else {
                    this.report.vertical_iterations += 1;
                }
            }
            Ok(())
        };
        for tau in start..start + w {
            visit(self, tau)?;
        }
        for tau in (start..start + w).rev() {
            visit(self, tau)?;
        }
        Ok(())
    }

    /// Combined LLR of source bit `idx`: channel plus both extrinsics, bit domain.
    pub fn posterior(&self, idx: usize) -> f64 {
        let lam = self.channel[idx];
        let confidence = lam.abs() + self.store.plain[idx] + self.store.permuted[idx];
        if lam < 0.0 {
            -confidence
        } else {
            confidence
        }
    }

    fn decide_block(&self, s: usize, decisions: &mut [u8]) {
        let t = self.params.block_size;
        for (p, d) in decisions[s * t..(s + 1) * t].iter_mut().enumerate() {
            *d = u8::from(self.posterior(s * t + p) < 0.0);
        }
    }

    /// Decodes a whole frame, returning `L * T` information decisions.
    ///
    /// Source block `s` is decided once the window has moved past coupled
    /// time `s + m_sc`, the last block holding any of its sub-blocks.
    pub fn decode(&mut self, received: &ReceivedFrame) -> Result<(Vec<u8>, DecodeReport)> {
        self.load(received)?;
        let coupled = self.params.coupled_blocks();
        let m_sc = self.params.coupling_memory;
        let mut decisions = vec![0u8; self.params.source_bits()];
        self.report.flips_per_target = vec![0; coupled];
        for t in 0..coupled {
            self.target = t;
            for _ in 0..self.params.horizontal_iterations {
                self.horizontal_iteration()?;
            }
            self.report.window_positions += 1;
            if let Some(s) = t.checked_sub(m_sc) {
                self.decide_block(s, &mut decisions);
            }
        }
        Ok((decisions, std::mem::take(&mut self.report)))
    }
}

#[inline]
fn scaled(v: f64, scale: f64) -> f64 {
    if v.is_infinite() {
        v
    } else {
        v * scale
    }
}

/// Decodes one received frame with a fresh decoder.
pub fn decode_frame(params: &ScPccParams, received: &ReceivedFrame) -> Result<(Vec<u8>, DecodeReport)> {
    WindowDecoder::new(params.clone())?.decode(received)
}
