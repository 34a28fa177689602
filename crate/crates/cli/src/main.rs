use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use scpcc::analysis::{computation, CountMode};
use scpcc::channel::{frame_rng, receive_frame, SnrPoint};
use scpcc::codec::{code_rate, FrameFile, RateConvention, ReceivedFrame, ScPccEncoder};
use scpcc::coupling::Interleaver;
use scpcc::csoc::search_csoc;
use scpcc::harness::{run_or_resume, to_csv, Execution, SimConfig};
use scpcc::presets::{preset, PRESET_NAMES};
use scpcc::{BoxPlusMode, CsocCode, Error, ScPccParams, Termination, WindowDecoder};

#[derive(Parser)]
#[command(name = "scpcc", version, about = "Spatially coupled turbo codes with threshold-decoded CSOC components")]
struct Cli {
    /// Worker threads for simulations (defaults to all cores).
    #[arg(long, global = true, env = "SCPCC_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a code file for self-orthogonality.
    Validate {
        #[arg(long)]
        code: PathBuf,
    },
    /// Search for a self-orthogonal code and write it as a code file.
    SearchCode {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        j: usize,
        #[arg(long, default_value_t = 400)]
        max_m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a file into frames of coded bits.
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a frame file back into the original payload.
    Decode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Pass the coded bits through BPSK/AWGN at this Eb/N0 (dB) before decoding.
        #[arg(long)]
        ebno: Option<f64>,
        /// Seed of the channel noise.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the decoder report of every frame as JSON lines.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Monte Carlo BER/FER sweep.
    Simulate(SimulateArgs),
    /// Latency, memory and operation counts.
    Analyze {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, value_enum, default_value_t = Count::Exact)]
        count: Count,
        #[arg(long)]
        json: bool,
    },
    /// Write a random interleaver permutation, one index per line.
    GenInterleaver {
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Count {
    Exact,
    Empirical,
}

#[derive(Clone, Copy, ValueEnum)]
enum Boxplus {
    Exact,
    Approx,
}

/// Code parameters from a params JSON file or from flags.
#[derive(Args, Clone)]
struct CodeArgs {
    /// Params JSON file (overrides the flags below except explicit overrides).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Component code file (default: the built-in rate-2/3, m = 13, J = 4 code).
    #[arg(long)]
    code: Option<PathBuf>,
    #[arg(long = "block-size", default_value_t = 400)]
    block_size: usize,
    #[arg(long = "coupling-memory", default_value_t = 1)]
    coupling_memory: usize,
    #[arg(long = "frame-blocks", default_value_t = 10)]
    frame_blocks: usize,
    /// Window size (default `2 (m_sc + 1)`).
    #[arg(long)]
    window: Option<usize>,
    #[arg(long = "vertical-iterations")]
    vertical_iterations: Option<usize>,
    #[arg(long = "horizontal-iterations")]
    horizontal_iterations: Option<usize>,
    #[arg(long = "interleaver-seed")]
    interleaver_seed: Option<u64>,
    #[arg(long)]
    unterminated: bool,
    #[arg(long, value_enum)]
    boxplus: Option<Boxplus>,
    #[arg(long = "extrinsic-scale")]
    extrinsic_scale: Option<f64>,
}

impl CodeArgs {
    fn params(&self) -> Result<ScPccParams> {
        let mut p = match &self.config {
            Some(path) => serde_json::from_str(&read(path)?).with_context(|| format!("invalid params in {}", path.display()))?,
            None => {
                let code = load_code(self.code.as_deref())?;
                let mut p = ScPccParams::new(code, self.block_size, self.coupling_memory, self.frame_blocks);
                if let Some(w) = self.window {
                    p.window = w;
                }
                if let Some(v) = self.vertical_iterations {
                    p.vertical_iterations = v;
                }
                if let Some(h) = self.horizontal_iterations {
                    p.horizontal_iterations = h;
                }
                if self.interleaver_seed.is_some() {
                    p.interleaver_seed = self.interleaver_seed;
                }
                if self.unterminated {
                    p.termination = Termination::Unterminated;
                }
                p
            }
        };
        self.apply_overrides(&mut p);
        p.validate()?;
        Ok(p)
    }

    fn apply_overrides(&self, p: &mut ScPccParams) {
        if let Some(b) = self.boxplus {
            p.boxplus = match b {
                Boxplus::Exact => BoxPlusMode::Exact,
                Boxplus::Approx => BoxPlusMode::Approx,
            };
        }
        if let Some(s) = self.extrinsic_scale {
            p.extrinsic_scale = s;
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Simulation config JSON (params, SNR list, limits, seed).
    #[arg(long = "sim-config", conflicts_with = "config")]
    sim_config: Option<PathBuf>,
    /// Run every configuration of a published experiment.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
    preset: Option<String>,
    /// Eb/N0 points in dB, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    ebno: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "max-frames")]
    max_frames: Option<u64>,
    #[arg(long = "min-errors")]
    min_errors: Option<u64>,
    #[arg(long = "batch-frames")]
    batch_frames: Option<u64>,
    /// Record wall time per point (makes CSVs run-dependent).
    #[arg(long)]
    timing: bool,
    /// CSV file, or a directory when running a preset. Existing results are resumed.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_code(path: Option<&Path>) -> Result<CsocCode> {
    match path {
        Some(p) => CsocCode::load(p).with_context(|| format!("invalid code file {}", p.display())),
        None => Ok(CsocCode::rate_two_thirds_j4()),
    }
}

fn validate(code: &Path) -> Result<ExitCode> {
    match CsocCode::load(code) {
        Ok(c) => {
            println!("valid");
            println!("k = {}, m = {}, J = {}, nu = {}", c.k(), c.m(), c.j(), c.nu());
            for i in 0..c.k() {
                println!("g{i} = {}", c.bit_string(i));
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::NotSelfOrthogonal(v)) => {
            println!("invalid: {v}");
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(anyhow::Error::new(e).context(format!("cannot validate {}", code.display()))),
    }
}

fn search(k: usize, j: usize, max_m: usize, seed: u64, out: &Path) -> Result<()> {
    let Some(code) = search_csoc(k, j, max_m, seed) else {
        bail!("no self-orthogonal code with k = {k}, J = {j} and m <= {max_m} found");
    };
    code.save(out)?;
    println!("found k = {k}, J = {j}, m = {} -> {}", code.m(), out.display());
    Ok(())
}

fn encode(params: &ScPccParams, input: &Path, out: &Path) -> Result<()> {
    let payload = fs::read(input).with_context(|| format!("cannot read {}", input.display()))?;
    let encoder = ScPccEncoder::new(params.clone())?;
    let per_frame = params.source_bits();
    let mut bits: Vec<u8> = payload.iter().flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1)).collect();
    let count = bits.len().div_ceil(per_frame).max(1);
    bits.resize(count * per_frame, 0);
    let frames = bits
        .chunks(per_frame)
        .map(|src| Ok(encoder.encode(src)?.transmitted_order()))
        .collect::<Result<Vec<_>>>()?;
    let file = FrameFile {
        params_hash: params.hash(),
        payload_bytes: payload.len() as u64,
        frames,
    };
    file.write_to(BufWriter::new(fs::File::create(out)?))?;
    println!("{} bytes -> {} frames of {} coded bits ({})", payload.len(), count, file.frames[0].len(), params.hash());
    Ok(())
}

fn decode(params: &ScPccParams, input: &Path, out: &Path, ebno: Option<f64>, seed: u64, report: Option<&Path>) -> Result<()> {
    let bytes = fs::read(input).with_context(|| format!("cannot read {}", input.display()))?;
    let file = FrameFile::read_from(&bytes[..])?;
    if file.params_hash != params.hash() {
        bail!(
            "frame file was encoded with params {} but the given params hash to {}",
            file.params_hash,
            params.hash()
        );
    }
    let mut decoder = WindowDecoder::new(params.clone())?;
    let rate = code_rate(params, RateConvention::Transmitted).value();
    let mut reports = report.map(fs::File::create).transpose()?.map(BufWriter::new);
    let mut decoded = Vec::with_capacity(file.frames.len() * params.source_bits());
    for (i, bits) in file.frames.iter().enumerate() {
        let coded = scpcc::CodedFrame::from_transmitted_order(
            bits,
            params.frame_blocks,
            params.block_size,
            params.block_time_units(),
            params.coupled_blocks(),
        )?;
        let received = match ebno {
            Some(db) => receive_frame(&coded, SnrPoint::new(db, rate), &mut frame_rng(seed, 0, i as u64)),
            None => ReceivedFrame::noiseless(&coded, 1.0),
        };
        let (dec, rep) = decoder.decode(&received)?;
        if let Some(w) = reports.as_mut() {
            writeln!(w, "{}", serde_json::to_string(&rep)?)?;
        }
        decoded.extend(dec);
    }
    let payload: Vec<u8> = decoded
        .chunks(8)
        .take(file.payload_bytes as usize)
        .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b))
        .collect();
    if payload.len() as u64 != file.payload_bytes {
        bail!("frame file holds fewer bits than its declared payload");
    }
    fs::write(out, &payload)?;
    println!("{} frames -> {} bytes", file.frames.len(), payload.len());
    Ok(())
}

fn sim_config(args: &SimulateArgs, params: ScPccParams) -> SimConfig {
    let mut c = SimConfig::new(params, args.ebno.clone());
    apply_limits(args, &mut c);
    c
}

fn apply_limits(args: &SimulateArgs, c: &mut SimConfig) {
    if !args.ebno.is_empty() {
        c.ebno_db = args.ebno.clone();
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if let Some(m) = args.max_frames {
        c.max_frames = m;
    }
    if let Some(m) = args.min_errors {
        c.min_bit_errors = m;
    }
    if let Some(b) = args.batch_frames {
        c.batch_frames = b;
    }
    c.record_timing |= args.timing;
}

fn run_one(label: &str, config: &SimConfig) -> Result<()> {
    if config.ebno_db.is_empty() {
        bail!("no Eb/N0 points given (use --ebno)");
    }
    let stats = run_or_resume(config, Execution::default())?;
    println!("# {label} ({})", config.hash());
    print!("{}", to_csv(&stats));
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    if let Some(name) = &args.preset {
        let code = args.code.code.as_deref().map(|p| load_code(Some(p))).transpose()?;
        let runs = preset(name, code)?;
        if args.ebno.is_empty() {
            bail!("presets do not fix an SNR grid; pass --ebno");
        }
        if let Some(dir) = &args.out {
            fs::create_dir_all(dir)?;
        }
        for (label, mut params) in runs {
            args.code.apply_overrides(&mut params);
            let mut c = sim_config(args, params);
            c.output = args.out.as_ref().map(|d| d.join(format!("{name}-{label}.csv")));
            run_one(&label, &c)?;
        }
        return Ok(());
    }
    let mut config = match &args.sim_config {
        Some(path) => {
            let mut c: SimConfig =
                serde_json::from_str(&read(path)?).with_context(|| format!("invalid simulation config {}", path.display()))?;
            args.code.apply_overrides(&mut c.params);
            apply_limits(args, &mut c);
            c
        }
        None => sim_config(args, args.code.params()?),
    };
    if args.out.is_some() {
        config.output = args.out.clone();
    }
    run_one("simulate", &config)
}

fn analyze(params: &ScPccParams, count: Count, json: bool) -> Result<()> {
    let mode = match count {
        Count::Exact => CountMode::Exact,
        Count::Empirical => CountMode::Empirical,
    };
    let report = computation(params, mode)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{report}");
    }
    Ok(())
}

fn gen_interleaver(length: usize, seed: u64, out: &Path) -> Result<()> {
    if length == 0 {
        bail!("interleaver length must be positive");
    }
    Interleaver::new(length, Some(seed)).save(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("cannot set thread count")?;
    }
    match cli.command {
        Command::Validate { code } => return validate(&code),
        Command::SearchCode { k, j, max_m, seed, out } => search(k, j, max_m, seed, &out)?,
        Command::Encode { code, input, out } => encode(&code.params()?, &input, &out)?,
        Command::Decode {
            code,
            input,
            out,
            ebno,
            seed,
            report,
        } => decode(&code.params()?, &input, &out, ebno, seed, report.as_deref())?,
        Command::Simulate(args) => simulate(&args)?,
        Command::Analyze { code, count, json } => analyze(&code.params()?, count, json)?,
        Command::GenInterleaver { length, seed, out } => gen_interleaver(length, seed, &out)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
