//! Monte Carlo BER/FER sweeps.
//!
//! Frame `f` at SNR index `s` draws its source bits and noise from its own
//! ChaCha stream keyed by `(seed, s, f)`. Frames are simulated in batches
//! (in parallel with the `parallel` feature) and folded into the running
//! statistics in frame order; a point stops at the first frame index where
//! its stopping rule is met. The results therefore depend on neither the
//! batch size nor the thread count.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::channel::{frame_rng, hard_decision, receive_frame, transmit, SnrPoint};
use crate::codec::{code_rate, RateConvention, ScPccEncoder, ScPccParams};
use crate::error::{Error, Result};
use crate::window::WindowDecoder;

pub const CSV_HEADER: &str = "ebno_db,frames,bits,bit_errors,frame_errors,ber,fer,seed,elapsed_s";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    /// Full encode, channel, window decode.
    #[default]
    Coded,
    /// Uncoded BPSK on `L * T` bits at rate 1; a channel sanity check.
    Uncoded,
}

/// How batches of frames are executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Execution::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Execution::Sequential
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub params: ScPccParams,
    #[serde(default)]
    pub mode: SimMode,
    pub ebno_db: Vec<f64>,
    #[serde(default = "defaults::max_frames")]
    pub max_frames: u64,
    #[serde(default = "defaults::min_bit_errors")]
    pub min_bit_errors: u64,
    #[serde(default = "defaults::min_frames")]
    pub min_frames: u64,
    #[serde(default)]
    pub seed: u64,
    /// Frames per batch; results are flushed after every batch.
    #[serde(default = "defaults::batch_frames")]
    pub batch_frames: u64,
    /// Write measured wall time to `elapsed_s` (otherwise 0, keeping files reproducible).
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

mod defaults {
    pub fn max_frames() -> u64 {
        100_000
    }
    pub fn min_bit_errors() -> u64 {
        100
    }
    pub fn min_frames() -> u64 {
        1
    }
    pub fn batch_frames() -> u64 {
        16
    }
}

/// The fields that determine simulated frames. Stopping limits and output
/// settings are excluded so a run can be resumed with larger limits.
#[derive(Serialize)]
struct Identity<'a> {
    params: &'a ScPccParams,
    mode: SimMode,
    ebno_db: &'a [f64],
    seed: u64,
}

impl SimConfig {
    pub fn new(params: ScPccParams, ebno_db: Vec<f64>) -> Self {
        Self {
            params,
            mode: SimMode::default(),
            ebno_db,
            max_frames: defaults::max_frames(),
            min_bit_errors: defaults::min_bit_errors(),
            min_frames: defaults::min_frames(),
            seed: 0,
            batch_frames: defaults::batch_frames(),
            record_timing: false,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ebno_db.is_empty() {
            return Err(Error::InvalidParams("SNR list is empty".into()));
        }
        if let Some(bad) = self.ebno_db.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("SNR value {bad} is not finite")));
        }
        if self.max_frames == 0 || self.min_frames == 0 || self.batch_frames == 0 {
            return Err(Error::InvalidParams("frame limits and batch size must be positive".into()));
        }
        self.params.validate()
    }

    /// Content hash of everything that affects simulated frames.
    pub fn hash(&self) -> String {
        crate::content_hash(&Identity {
            params: &self.params,
            mode: self.mode,
            ebno_db: &self.ebno_db,
            seed: self.seed,
        })
    }

    fn rate(&self) -> f64 {
        match self.mode {
            SimMode::Coded => code_rate(&self.params, RateConvention::Transmitted).value(),
            SimMode::Uncoded => 1.0,
        }
    }

    fn done(&self, s: &BerStats) -> bool {
        s.frames >= self.max_frames || (s.bit_errors >= self.min_bit_errors && s.frames >= self.min_frames)
    }
}

/// Accumulated error counts at one SNR point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerStats {
    pub ebno_db: f64,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub seed: u64,
    pub elapsed_s: f64,
}

impl BerStats {
    pub fn new(ebno_db: f64, seed: u64) -> Self {
        Self {
            ebno_db,
            frames: 0,
            bits: 0,
            bit_errors: 0,
            frame_errors: 0,
            seed,
            elapsed_s: 0.0,
        }
    }

    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    pub fn fer(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.frame_errors as f64 / self.frames as f64
        }
    }

    /// Binomial standard error of the BER estimate.
    pub fn ber_std_error(&self) -> f64 {
        let p = self.ber();
        (p * (1.0 - p) / self.bits.max(1) as f64).sqrt()
    }

    fn add(&mut self, frame: FrameResult) {
        self.frames += 1;
        self.bits += frame.bits;
        self.bit_errors += frame.bit_errors;
        self.frame_errors += u64::from(frame.bit_errors > 0);
    }

    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6e},{:.6e},{},{:.3}",
            self.ebno_db,
            self.frames,
            self.bits,
            self.bit_errors,
            self.frame_errors,
            self.ber(),
            self.fer(),
            self.seed,
            self.elapsed_s
        )
    }

    fn parse_row(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Format(format!("expected 9 CSV fields, found {}", fields.len())));
        }
        let bad = |name: &str| Error::Format(format!("bad {name} field in {line:?}"));
        let int = |i: usize, name: &str| fields[i].parse::<u64>().map_err(|_| bad(name));
        let real = |i: usize, name: &str| fields[i].parse::<f64>().map_err(|_| bad(name));
        Ok(Self {
            ebno_db: real(0, "ebno_db")?,
            frames: int(1, "frames")?,
            bits: int(2, "bits")?,
            bit_errors: int(3, "bit_errors")?,
            frame_errors: int(4, "frame_errors")?,
            seed: int(7, "seed")?,
            elapsed_s: real(8, "elapsed_s")?,
        })
    }
}

/// Renders results as CSV with [`CSV_HEADER`].
pub fn to_csv(stats: &[BerStats]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for st in stats {
        let _ = writeln!(s, "{}", st.csv_row());
    }
    s
}

pub fn parse_csv(text: &str) -> Result<Vec<BerStats>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Format("missing or unexpected CSV header".into())),
    }
    lines.filter(|l| !l.trim().is_empty()).map(BerStats::parse_row).collect()
}

/// Sidecar file next to a results CSV.
pub fn config_path(results: &Path) -> PathBuf {
    let mut name = results.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

#[derive(Serialize, Deserialize)]
struct ConfigEcho {
    hash: String,
    config: SimConfig,
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes the resolved config and its hash next to `results`.
pub fn write_config_echo(config: &SimConfig, results: &Path) -> Result<()> {
    let echo = ConfigEcho {
        hash: config.hash(),
        config: config.clone(),
    };
    write_atomic(&config_path(results), &(serde_json::to_string_pretty(&echo)? + "\n"))
}

/// Reads a results CSV and the config hash stored beside it.
pub fn load_results(results: &Path) -> Result<(String, Vec<BerStats>)> {
    let echo: ConfigEcho = serde_json::from_str(&std::fs::read_to_string(config_path(results))?)?;
    let stats = parse_csv(&std::fs::read_to_string(results)?)?;
    Ok((echo.hash, stats))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct FrameResult {
    bits: u64,
    bit_errors: u64,
}

/// Everything needed to simulate any frame of a sweep.
struct Simulator {
    config: SimConfig,
    encoder: Option<ScPccEncoder>,
    decoder: Option<WindowDecoder>,
    rate: f64,
}

impl Simulator {
    fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let (encoder, decoder) = match config.mode {
            SimMode::Coded => (
                Some(ScPccEncoder::new(config.params.clone())?),
                Some(WindowDecoder::new(config.params.clone())?),
            ),
            SimMode::Uncoded => (None, None),
        };
        Ok(Self {
            rate: config.rate(),
            config: config.clone(),
            encoder,
            decoder,
        })
    }

    fn frame(&self, decoder: &mut Option<WindowDecoder>, snr_index: usize, frame: u64) -> Result<FrameResult> {
        let snr = SnrPoint::new(self.config.ebno_db[snr_index], self.rate);
        let mut rng = frame_rng(self.config.seed, snr_index, frame);
        let source = random_bits(self.config.params.source_bits(), &mut rng);
        let decisions = match (&self.encoder, decoder.as_mut()) {
            (Some(enc), Some(dec)) => {
                let coded = enc.encode(&source)?;
                let received = receive_frame(&coded, snr, &mut rng);
                dec.decode(&received)?.0
            }
            _ => transmit(&source, snr, &mut rng).into_iter().map(hard_decision).collect(),
        };
        Ok(FrameResult {
            bits: source.len() as u64,
            bit_errors: decisions.iter().zip(&source).filter(|(a, b)| a != b).count() as u64,
        })
    }

    fn batch(&self, snr_index: usize, frames: std::ops::Range<u64>, exec: Execution) -> Result<Vec<FrameResult>> {
        match exec {
            Execution::Sequential => {
                let mut dec = self.decoder.clone();
                frames.map(|f| self.frame(&mut dec, snr_index, f)).collect()
            }
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                frames
                    .into_par_iter()
                    .map_init(|| self.decoder.clone(), |dec, f| self.frame(dec, snr_index, f))
                    .collect()
            }
        }
    }
}

/// Uniform random bits.
pub fn random_bits<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Vec<u8> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let word = rng.next_u64();
        let take = (n - out.len()).min(64);
        out.extend((0..take).map(|b| ((word >> b) & 1) as u8));
    }
    out
}

/// Runs a fresh sweep with the default execution mode.
pub fn run_sweep(config: &SimConfig) -> Result<Vec<BerStats>> {
    run_sweep_with(config, Execution::default())
}

pub fn run_sweep_with(config: &SimConfig, exec: Execution) -> Result<Vec<BerStats>> {
    sweep(config, Vec::new(), exec)
}

/// Continues a previous sweep of the same configuration.
///
/// Each point resumes at the frame index after the last one stored, so a
/// run split into several invocations matches a single longer run.
pub fn resume(config: &SimConfig, existing_hash: &str, existing: Vec<BerStats>) -> Result<Vec<BerStats>> {
    resume_with(config, existing_hash, existing, Execution::default())
}

pub fn resume_with(config: &SimConfig, existing_hash: &str, existing: Vec<BerStats>, exec: Execution) -> Result<Vec<BerStats>> {
    let expected = config.hash();
    if existing_hash != expected {
        return Err(Error::ConfigHashMismatch {
            expected,
            found: existing_hash.to_string(),
        });
    }
    if existing.len() > config.ebno_db.len()
        || existing.iter().zip(&config.ebno_db).any(|(s, &e)| s.ebno_db != e || s.seed != config.seed)
    {
        return Err(Error::Format("stored results do not match the SNR list of the config".into()));
    }
    sweep(config, existing, exec)
}

/// Resumes from the results file at `config.output` if present, otherwise starts fresh.
pub fn run_or_resume(config: &SimConfig, exec: Execution) -> Result<Vec<BerStats>> {
    match &config.output {
        Some(path) if path.exists() && config_path(path).exists() => {
            let (hash, stats) = load_results(path)?;
            resume_with(config, &hash, stats, exec)
        }
        _ => run_sweep_with(config, exec),
    }
}

fn sweep(config: &SimConfig, mut done: Vec<BerStats>, exec: Execution) -> Result<Vec<BerStats>> {
    let sim = Simulator::new(config)?;
    if let Some(out) = &config.output {
        write_config_echo(config, out)?;
    }
    let flush = |stats: &[BerStats]| -> Result<()> {
        match &config.output {
            Some(out) => write_atomic(out, &to_csv(stats)),
            None => Ok(()),
        }
    };

    let mut results = Vec::with_capacity(config.ebno_db.len());
    for (s, &ebno) in config.ebno_db.iter().enumerate() {
        let mut stats = if s < done.len() {
            std::mem::replace(&mut done[s], BerStats::new(ebno, config.seed))
        } else {
            BerStats::new(ebno, config.seed)
        };
        while !config.done(&stats) {
            let start = Instant::now();
            let n = config.batch_frames.min(config.max_frames - stats.frames);
            let first = stats.frames;
            for r in sim.batch(s, first..first + n, exec)? {
                stats.add(r);
                if config.done(&stats) {
                    break;
                }
            }
            if config.record_timing {
                stats.elapsed_s += start.elapsed().as_secs_f64();
            }
            let mut snapshot = results.clone();
            snapshot.push(stats.clone());
            snapshot.extend(done.iter().skip(s + 1).cloned());
            flush(&snapshot)?;
        }
        results.push(stats);
    }
    flush(&results)?;
    Ok(results)
}
