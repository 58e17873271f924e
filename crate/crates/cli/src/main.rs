use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abspolar::codespec::{parse_spec, serialize_spec};
use abspolar::construction::{construct, McConfig};
use abspolar::crc::{crc_attach, crc_check, CrcSpec};
use abspolar::encoder::{encode, extract_info, place_info};
use abspolar::harness::{count_ops, run_campaign, write_csv, CampaignConfig, DecoderKind, StopRule};
use abspolar::verify::{verify_spec, VerifyConfig};
use abspolar::{CodeSpec, ListConfig, ScDecoder, SclDecoder};
use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "abspolar", version, about = "ABS+ polar code construction, decoding and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code by Monte-Carlo construction and print or save its spec.
    Construct(ConstructArgs),
    /// Encode one payload.
    Encode(EncodeArgs),
    /// Decode one frame.
    Decode(DecodeArgs),
    /// Run an FER campaign and emit CSV.
    Simulate(SimulateArgs),
    /// Check a spec and the decoders against the brute-force oracles.
    Verify(VerifyArgs),
    /// Mean and maximum LLR additions and comparisons per frame.
    CountOps(CountOpsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    /// One character `0`/`1` per bit.
    Bin,
    /// Bits packed most significant first, zero padded to whole digits.
    Hex,
}

#[derive(Args)]
struct ConstructArgs {
    /// log2 of the code length.
    #[arg(long)]
    m: u32,
    /// Payload bits, CRC excluded.
    #[arg(long)]
    k: usize,
    /// CRC generator without the leading term, e.g. 0x07.
    #[arg(long, value_parser = parse_hex_u64, requires = "crc_width")]
    crc_poly: Option<u64>,
    #[arg(long)]
    crc_width: Option<u32>,
    #[arg(long, default_value_t = 2.0)]
    design_ebno_db: f64,
    /// Monte-Carlo frames per estimate.
    #[arg(long, default_value_t = 4000)]
    trials: usize,
    /// Transforms kept per layer; 0 gives a classical code.
    #[arg(long, default_value_t = 1024)]
    budget: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Payload bits; the CRC, if any, is appended.
    #[arg(long)]
    message: String,
    #[arg(long, value_enum, default_value_t = Format::Bin)]
    format: Format,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Hard-decision codeword, read as a noiseless channel.
    #[arg(long, conflicts_with = "llrs")]
    codeword: Option<String>,
    /// File of whitespace-separated channel LLRs, `-` for stdin.
    #[arg(long)]
    llrs: Option<PathBuf>,
    /// List size; 1 decodes with SC.
    #[arg(long, default_value_t = 1)]
    list: usize,
    #[arg(long, value_enum, default_value_t = Format::Bin)]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    /// Campaign file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    decoder: Option<DecoderKind>,
    #[arg(long, value_delimiter = ',')]
    lists: Option<Vec<usize>>,
    /// Eb/N0 grid in dB.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr_db: Option<Vec<f64>>,
    #[arg(long)]
    max_frames: Option<u64>,
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Fill the `seconds` column (output then differs between runs).
    #[arg(long)]
    record_time: bool,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = VerifyConfig::default().tables)]
    tables: usize,
    #[arg(long, default_value_t = VerifyConfig::default().frames)]
    frames: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CountOpsArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value = "sc")]
    decoder: DecoderKind,
    #[arg(long, default_value_t = 1)]
    list: usize,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 2.5, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_hex_u64(s: &str) -> Result<u64, String> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u64::from_str_radix(digits, 16).map_err(|e| e.to_string())
}

fn load_spec(path: &Path) -> Result<CodeSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_spec(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_bits(s: &str, len: usize, format: Format) -> Result<Vec<u8>> {
    let s = s.trim();
    let bits: Vec<u8> = match format {
        Format::Bin => s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => bail!("invalid binary digit {c:?}"),
            })
            .collect::<Result<_>>()?,
        Format::Hex => {
            let mut bits = Vec::with_capacity(4 * s.len());
            for c in s.chars() {
                let d = c.to_digit(16).with_context(|| format!("invalid hex digit {c:?}"))?;
                bits.extend((0..4).rev().map(|i| ((d >> i) & 1) as u8));
            }
            ensure!(bits.len() >= len && bits.len() < len + 4, "expected {len} bits, got {} hex digits", s.len());
            ensure!(bits[len..].iter().all(|&b| b == 0), "nonzero padding bits");
            bits.truncate(len);
            bits
        }
    };
    ensure!(bits.len() == len, "expected {len} bits, got {}", bits.len());
    Ok(bits)
}

fn format_bits(bits: &[u8], format: Format) -> String {
    match format {
        Format::Bin => bits.iter().map(|&b| char::from(b'0' + b)).collect(),
        Format::Hex => bits
            .chunks(4)
            .map(|c| {
                let d = c.iter().enumerate().fold(0u32, |acc, (i, &b)| acc | u32::from(b) << (3 - i));
                char::from_digit(d, 16).expect("nibble")
            })
            .collect(),
    }
}

fn run_construct(a: ConstructArgs) -> Result<()> {
    let crc = match (a.crc_poly, a.crc_width) {
        (Some(poly), Some(width)) => Some(CrcSpec::new(poly, width)?),
        (None, None) => None,
        _ => bail!("--crc-poly and --crc-width go together"),
    };
    let n = 1usize << a.m;
    ensure!(a.k > 0 && a.k <= n, "k = {} outside 1..={n}", a.k);
    let mc = McConfig::new(a.design_ebno_db, a.k as f64 / n as f64, a.trials, a.seed)?;
    let spec = construct(a.m, a.k, crc, &mc, a.budget)?;
    let text = serialize_spec(&spec);
    match a.output {
        Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_encode(a: EncodeArgs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let payload = parse_bits(&a.message, spec.k(), a.format)?;
    let info = match spec.crc() {
        Some(crc) => crc_attach(&payload, crc)?,
        None => payload,
    };
    let x = encode(&spec, &place_info(&spec, &info)?)?;
    println!("{}", format_bits(&x, a.format));
    Ok(())
}

fn read_llrs(path: &Path) -> Result<Vec<f64>> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    text.split_whitespace()
        .map(|t| t.parse::<f64>().with_context(|| format!("invalid LLR {t:?}")))
        .collect()
}

fn run_decode(a: DecodeArgs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let llrs = match (&a.codeword, &a.llrs) {
        (Some(c), None) => parse_bits(c, spec.n(), a.format)?
            .into_iter()
            .map(|b| if b == 0 { 1.0 } else { -1.0 })
            .collect(),
        (None, Some(path)) => read_llrs(path)?,
        _ => bail!("give exactly one of --codeword and --llrs"),
    };
    let u = if a.list == 1 {
        ScDecoder::<f64>::new(&spec).decode(&llrs)?.u
    } else {
        let out = SclDecoder::<f64>::new(&spec, ListConfig::for_spec(&spec, a.list))?.decode(&llrs)?;
        out.best().u.clone()
    };
    let info = extract_info(&spec, &u);
    if let Some(crc) = spec.crc() {
        if !crc_check(&info, crc) {
            log::warn!("decoded word fails its CRC");
        }
    }
    println!("{}", format_bits(&info[..spec.k()], a.format));
    Ok(())
}

fn run_simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => CampaignConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => CampaignConfig {
            spec: a.spec.clone().context("--spec or --config is required")?,
            decoder: a.decoder.context("--decoder or --config is required")?,
            lists: vec![1],
            snr_db: a.snr_db.clone().context("--snr-db or --config is required")?,
            stop: StopRule::default(),
            seed: 0,
            output: None,
            record_time: false,
        },
    };
    if let Some(v) = a.spec {
        cfg.spec = v;
    }
    if let Some(v) = a.decoder {
        cfg.decoder = v;
    }
    if let Some(v) = a.lists {
        cfg.lists = v;
    }
    if let Some(v) = a.snr_db {
        cfg.snr_db = v;
    }
    if let Some(v) = a.max_frames {
        cfg.stop.max_frames = v;
    }
    if let Some(v) = a.min_errors {
        cfg.stop.min_errors = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if a.output.is_some() {
        cfg.output = a.output;
    }
    cfg.record_time |= a.record_time;
    let spec = load_spec(&cfg.spec)?;
    let campaign = cfg.campaign();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.threads.unwrap_or(0))
        .build()
        .context("starting worker threads")?;
    let results = pool.install(|| run_campaign(&spec, &campaign))?;
    let csv = write_csv(&results);
    match &cfg.output {
        Some(path) => std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn run_verify(a: VerifyArgs) -> Result<bool> {
    let spec = load_spec(&a.spec)?;
    let cfg = VerifyConfig {
        tables: a.tables,
        frames: a.frames,
        seed: a.seed,
        ..VerifyConfig::default()
    };
    let checks = verify_spec(&spec, &cfg)?;
    for c in &checks {
        println!("{c}");
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn run_count_ops(a: CountOpsArgs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let stats = count_ops(&spec, a.decoder, a.list, a.trials, a.snr_db, a.seed)?;
    println!("frames,mean_adds,mean_cmps,max_adds,max_cmps");
    println!(
        "{},{:.3},{:.3},{},{}",
        stats.frames,
        stats.mean_additions(),
        stats.mean_comparisons(),
        stats.max_additions,
        stats.max_comparisons
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Construct(a) => run_construct(a).map(|()| true),
        Command::Encode(a) => run_encode(a).map(|()| true),
        Command::Decode(a) => run_decode(a).map(|()| true),
        Command::Simulate(a) => run_simulate(a).map(|()| true),
        Command::Verify(a) => run_verify(a),
        Command::CountOps(a) => run_count_ops(a).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some checks failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
