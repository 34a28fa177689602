//! Spatially coupled source matrices and the interleaver.
//!
//! Source block `u_t` (length `T`) is split into `m_sc + 1` contiguous
//! sub-blocks of `B = T / (m_sc + 1)` bits. Sub-block `i` lands in coupled
//! block `U_{t+i}` at the same offset it had in `u_t`, so bit `p` of `u_t`
//! sits at position `p` of `U_{t + p / B}`. The permuted matrix applies the
//! same rule to `u~_t`, where `u~_t[pi(p)] = u_t[p]`.
//!
//! Coupled blocks `0..m_sc` and `L..L+m_sc` contain virtual all-zero
//! sub-blocks; gathers report them as `+inf` (a known zero).

use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed value requesting the identity permutation.
pub const IDENTITY_SEED: Option<u64> = None;

/// A permutation of block positions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interleaver {
    perm: Vec<usize>,
    inverse: Vec<usize>,
    seed: Option<u64>,
}

impl Interleaver {
    /// Uniform random permutation of length `len` (`seed = None` gives the identity).
    pub fn new(len: usize, seed: Option<u64>) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        if let Some(seed) = seed {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            perm.shuffle(&mut rng);
        }
        Self::from_parts(perm, seed)
    }

    pub fn identity(len: usize) -> Self {
        Self::new(len, IDENTITY_SEED)
    }

    /// Wraps an explicit permutation, checking it is a bijection.
    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Format(format!("not a permutation: index {p} repeated or out of range")));
            }
        }
        Ok(Self::from_parts(perm, None))
    }

    fn from_parts(perm: Vec<usize>, seed: Option<u64>) -> Self {
        let mut inverse = vec![0; perm.len()];
        for (p, &q) in perm.iter().enumerate() {
            inverse[q] = p;
        }
        Self { perm, inverse, seed }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Position of source bit `p` in the permuted block.
    #[inline]
    pub fn forward(&self, p: usize) -> usize {
        self.perm[p]
    }

    /// Source bit at permuted position `q`.
    #[inline]
    pub fn inverse(&self, q: usize) -> usize {
        self.inverse[q]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    /// Writes one index per line.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        for p in &self.perm {
            writeln!(w, "{p}")?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let perm = r
            .lines()
            .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
            .map(|l| {
                let l = l?;
                l.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Format(format!("bad permutation entry {l:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_permutation(perm)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Which source matrix a coupled block is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CouplingPath {
    /// `U`, input of component encoder 1.
    Plain,
    /// `U~`, input of component encoder 2.
    Permuted,
}

/// Location of a source bit inside the coupled frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Coordinate {
    pub time: usize,
    pub position: usize,
}

/// Index maps between source bits `(t, p)` and coupled coordinates.
#[derive(Clone, Debug)]
pub struct CouplingMap {
    block_len: usize,
    memory: usize,
    frame_len: usize,
    sub_block: usize,
    interleaver: Interleaver,
}

impl CouplingMap {
    pub fn new(block_len: usize, memory: usize, frame_len: usize, interleaver: Interleaver) -> Result<Self> {
        if block_len == 0 || block_len % (memory + 1) != 0 {
            return Err(Error::InvalidParams(format!(
                "block size {block_len} is not a positive multiple of m_sc + 1 = {}",
                memory + 1
            )));
        }
        if frame_len == 0 {
            return Err(Error::InvalidParams("frame length L must be at least 1".into()));
        }
        if interleaver.len() != block_len {
            return Err(Error::LengthMismatch {
                expected: block_len,
                found: interleaver.len(),
            });
        }
        Ok(Self {
            block_len,
            memory,
            frame_len,
            sub_block: block_len / (memory + 1),
            interleaver,
        })
    }

    /// Block size `T`.
    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// Coupling memory `m_sc`.
    pub fn memory(&self) -> usize {
        self.memory
    }

    /// Number of source blocks `L`.
    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn sub_block_len(&self) -> usize {
        self.sub_block
    }

    /// Number of coupled blocks, `L + m_sc`.
    pub fn coupled_len(&self) -> usize {
        self.frame_len + self.memory
    }

    pub fn interleaver(&self) -> &Interleaver {
        &self.interleaver
    }

    /// Coupled coordinate of source bit `p` of block `t`.
    #[inline]
    pub fn coordinate(&self, path: CouplingPath, t: usize, p: usize) -> Coordinate {
        let position = match path {
            CouplingPath::Plain => p,
            CouplingPath::Permuted => self.interleaver.forward(p),
        };
        Coordinate {
            time: t + position / self.sub_block,
            position,
        }
    }

    /// Source bit `(t, p)` at coupled position `c` of block `tau`, or `None`
    /// for a virtual zero.
    #[inline]
    pub fn source(&self, path: CouplingPath, tau: usize, c: usize) -> Option<(usize, usize)> {
        let t = tau.checked_sub(c / self.sub_block)?;
        if t >= self.frame_len {
            return None;
        }
        let p = match path {
            CouplingPath::Plain => c,
            CouplingPath::Permuted => self.interleaver.inverse(c),
        };
        Some((t, p))
    }

    fn check_time(&self, tau: usize) -> Result<()> {
        if tau >= self.coupled_len() {
            return Err(Error::OutOfRange {
                index: tau,
                len: self.coupled_len(),
            });
        }
        Ok(())
    }

    /// Reads coupled block `tau` from a per-source-bit store (`store[t * T + p]`).
    /// Virtual positions read as `+inf`.
    pub fn gather(&self, store: &[f64], path: CouplingPath, tau: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.block_len];
        self.gather_into(store, path, tau, &mut out)?;
        Ok(out)
    }

    pub fn gather_into(&self, store: &[f64], path: CouplingPath, tau: usize, out: &mut [f64]) -> Result<()> {
        self.check_time(tau)?;
        self.check_store(store.len())?;
        for (c, o) in out.iter_mut().enumerate().take(self.block_len) {
            *o = match self.source(path, tau, c) {
                Some((t, p)) => store[t * self.block_len + p],
                None => f64::INFINITY,
            };
        }
        Ok(())
    }

    /// Writes coupled block `tau` back to the store; virtual positions are dropped.
    pub fn scatter(&self, store: &mut [f64], path: CouplingPath, tau: usize, values: &[f64]) -> Result<()> {
        self.check_time(tau)?;
        self.check_store(store.len())?;
        if values.len() != self.block_len {
            return Err(Error::LengthMismatch {
                expected: self.block_len,
                found: values.len(),
            });
        }
        for (c, &v) in values.iter().enumerate() {
            if let Some((t, p)) = self.source(path, tau, c) {
                store[t * self.block_len + p] = v;
            }
        }
        Ok(())
    }

    /// Coupled source block as bits, virtual positions zero.
    pub fn gather_bits(&self, source: &[u8], path: CouplingPath, tau: usize) -> Result<Vec<u8>> {
        self.check_time(tau)?;
        if source.len() != self.frame_len * self.block_len {
            return Err(Error::LengthMismatch {
                expected: self.frame_len * self.block_len,
                found: source.len(),
            });
        }
        Ok((0..self.block_len)
            .map(|c| self.source(path, tau, c).map_or(0, |(t, p)| source[t * self.block_len + p]))
            .collect())
    }

    fn check_store(&self, len: usize) -> Result<()> {
        if len != self.frame_len * self.block_len {
            return Err(Error::LengthMismatch {
                expected: self.frame_len * self.block_len,
                found: len,
            });
        }
        Ok(())
    }
}
