//! Frame-error-rate campaigns and operation counting.
//!
//! Frames are simulated in fixed-size batches, each frame drawing payload
//! and noise from its own stream, and the stop rule is checked between
//! batches. Results therefore depend only on the configuration, not on the
//! number of worker threads.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arikan::ArikanDecoder;
use crate::channel::{awgn_llrs, frame_rng, noise_variance};
use crate::codespec::CodeSpec;
use crate::crc::crc_attach;
use crate::encoder::{encode, place_info};
use crate::llr::OpCounter;
use crate::sc::ScDecoder;
use crate::scl::{ListConfig, SclDecoder};
use crate::{Error, Result};

/// Frames per batch between stop-rule checks.
pub const BATCH: u64 = 256;

/// CSV header of [`write_csv`].
pub const CSV_HEADER: &str = "snr_db,list,frames,frame_errors,fer,ci_lo,ci_hi,mean_adds,mean_cmps,seconds";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Sc,
    Scl,
    ArikanSc,
    ArikanScl,
}

impl DecoderKind {
    pub fn is_list(self) -> bool {
        matches!(self, Self::Scl | Self::ArikanScl)
    }

    pub fn is_classical(self) -> bool {
        matches!(self, Self::ArikanSc | Self::ArikanScl)
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sc" => Ok(Self::Sc),
            "scl" => Ok(Self::Scl),
            "arikan-sc" => Ok(Self::ArikanSc),
            "arikan-scl" => Ok(Self::ArikanScl),
            _ => Err(Error::InvalidConfig(format!(
                "unknown decoder {s:?} (sc, scl, arikan-sc, arikan-scl)"
            ))),
        }
    }
}

/// Stop rule: a point ends once it has `min_errors` frame errors or
/// `max_frames` frames, whichever comes first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_frames: u64,
    pub min_errors: u64,
}

impl StopRule {
    /// Fewest frame errors for which the interval is considered meaningful.
    pub const CI_MIN_ERRORS: u64 = 20;
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_frames: 1_000_000,
            min_errors: 100,
        }
    }
}

/// One campaign as stored in a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub spec: PathBuf,
    pub decoder: DecoderKind,
    #[serde(default = "default_lists")]
    pub lists: Vec<usize>,
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Fill the `seconds` column; off by default so reruns are byte-identical.
    #[serde(default)]
    pub record_time: bool,
}

fn default_lists() -> Vec<usize> {
    vec![1]
}

impl CampaignConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if cfg.spec.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.spec = dir.join(&cfg.spec);
            }
        }
        Ok(cfg)
    }

    pub fn campaign(&self) -> Campaign {
        Campaign {
            decoder: self.decoder,
            lists: self.lists.clone(),
            snr_db: self.snr_db.clone(),
            stop: self.stop,
            seed: self.seed,
            record_time: self.record_time,
        }
    }
}

/// Campaign parameters for an already loaded code.
#[derive(Clone, Debug, PartialEq)]
pub struct Campaign {
    pub decoder: DecoderKind,
    pub lists: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub stop: StopRule,
    pub seed: u64,
    pub record_time: bool,
}

impl Campaign {
    pub fn new(decoder: DecoderKind, lists: Vec<usize>, snr_db: Vec<f64>) -> Self {
        Self {
            decoder,
            lists,
            snr_db,
            stop: StopRule::default(),
            seed: 0,
            record_time: false,
        }
    }

    pub fn with_stop(mut self, max_frames: u64, min_errors: u64) -> Self {
        self.stop = StopRule { max_frames, min_errors };
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self, spec: &CodeSpec) -> Result<()> {
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("SNR grid must be non-empty and finite".into()));
        }
        if self.stop.max_frames == 0 {
            return Err(Error::InvalidConfig("max_frames must be positive".into()));
        }
        if self.stop.min_errors < StopRule::CI_MIN_ERRORS {
            log::warn!(
                "min_errors = {} is below {}; intervals may be unreliable",
                self.stop.min_errors,
                StopRule::CI_MIN_ERRORS
            );
        }
        if self.decoder.is_list() && (self.lists.is_empty() || self.lists.contains(&0)) {
            return Err(Error::InvalidConfig("list sizes must be positive".into()));
        }
        if self.decoder.is_classical() && !spec.is_classical() {
            return Err(Error::InvalidConfig(
                "classical decoders need a spec without swap/add sets".into(),
            ));
        }
        if spec.k() == 0 {
            return Err(Error::InvalidConfig("spec carries no payload".into()));
        }
        Ok(())
    }

    fn list_sizes(&self) -> Vec<usize> {
        if self.decoder.is_list() {
            self.lists.clone()
        } else {
            vec![1]
        }
    }
}

/// Result of one (SNR, list size) point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub snr_db: f64,
    pub list: usize,
    pub frames: u64,
    pub frame_errors: u64,
    pub ops: OpStats,
    pub seconds: Option<f64>,
}

impl PointResult {
    pub fn fer(&self) -> f64 {
        self.frame_errors as f64 / self.frames as f64
    }

    pub fn ci(&self) -> (f64, f64) {
        wilson_interval(self.frame_errors, self.frames)
    }
}

/// Operation totals and per-frame maxima.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpStats {
    pub frames: u64,
    pub additions: u64,
    pub comparisons: u64,
    pub max_additions: u64,
    pub max_comparisons: u64,
}

impl OpStats {
    fn record(&mut self, ops: &OpCounter) {
        self.frames += 1;
        self.additions += ops.additions;
        self.comparisons += ops.comparisons;
        self.max_additions = self.max_additions.max(ops.additions);
        self.max_comparisons = self.max_comparisons.max(ops.comparisons);
    }

    fn merge(&mut self, other: &Self) {
        self.frames += other.frames;
        self.additions += other.additions;
        self.comparisons += other.comparisons;
        self.max_additions = self.max_additions.max(other.max_additions);
        self.max_comparisons = self.max_comparisons.max(other.max_comparisons);
    }

    pub fn mean_additions(&self) -> f64 {
        self.additions as f64 / self.frames.max(1) as f64
    }

    pub fn mean_comparisons(&self) -> f64 {
        self.comparisons as f64 / self.frames.max(1) as f64
    }
}

/// 95% Wilson score interval for `errors` out of `frames`.
pub fn wilson_interval(errors: u64, frames: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    if frames == 0 {
        return (0.0, 1.0);
    }
    let n = frames as f64;
    let p = errors as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors == frames { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Decodes one frame and reports the decided message.
enum Engine<'a> {
    Sc(ScDecoder<'a, f32>),
    Scl(SclDecoder<'a, f32>),
    ArikanSc(ArikanDecoder),
    ArikanScl(ArikanDecoder, ListConfig),
}

impl<'a> Engine<'a> {
    fn new(spec: &'a CodeSpec, kind: DecoderKind, list: usize) -> Result<Self> {
        let cfg = ListConfig::for_spec(spec, list);
        Ok(match kind {
            DecoderKind::Sc => Self::Sc(ScDecoder::new(spec)),
            DecoderKind::Scl => Self::Scl(SclDecoder::new(spec, cfg)?),
            DecoderKind::ArikanSc => Self::ArikanSc(ArikanDecoder::from_spec(spec)),
            DecoderKind::ArikanScl => {
                cfg.validate(spec)?;
                Self::ArikanScl(ArikanDecoder::from_spec(spec), cfg)
            }
        })
    }

    fn decode(&self, llrs: &[f32]) -> Result<(Vec<u8>, OpCounter)> {
        Ok(match self {
            Self::Sc(d) => {
                let out = d.decode(llrs)?;
                (out.u, out.ops)
            }
            Self::Scl(d) => {
                let mut out = d.decode(llrs)?;
                (out.candidates.swap_remove(0).u, out.ops)
            }
            Self::ArikanSc(d) => {
                let out = d.sc(llrs)?;
                (out.u, out.ops)
            }
            Self::ArikanScl(d, cfg) => {
                let mut out = d.scl(llrs, cfg)?;
                (out.candidates.swap_remove(0).u, out.ops)
            }
        })
    }
}

/// Message and channel output of frame `frame`.
pub fn frame(spec: &CodeSpec, sigma: f64, seed: u64, frame: u64) -> Result<(Vec<u8>, Vec<f32>)> {
    let mut rng = frame_rng(seed, frame);
    let payload: Vec<u8> = (0..spec.k()).map(|_| rng.random_range(0..2u8)).collect();
    let info = match spec.crc() {
        Some(crc) => crc_attach(&payload, crc)?,
        None => payload,
    };
    let u = place_info(spec, &info)?;
    let x = encode(spec, &u)?;
    Ok((u, awgn_llrs(&x, sigma, &mut rng)))
}

#[derive(Default)]
struct Tally {
    frames: u64,
    errors: u64,
    ops: OpStats,
}

fn run_batch(engine: &Engine, spec: &CodeSpec, sigma: f64, seed: u64, frames: std::ops::Range<u64>) -> Result<Tally> {
    let parts: Vec<Result<Tally>> = frames
        .into_par_iter()
        .map(|f| {
            let (u, llrs) = frame(spec, sigma, seed, f)?;
            let (decided, ops) = engine.decode(&llrs)?;
            let mut t = Tally {
                frames: 1,
                errors: u64::from(decided != u),
                ..Tally::default()
            };
            t.ops.record(&ops);
            Ok(t)
        })
        .collect();
    let mut total = Tally::default();
    for p in parts {
        let p = p?;
        total.frames += p.frames;
        total.errors += p.errors;
        total.ops.merge(&p.ops);
    }
    Ok(total)
}

/// Runs every (SNR, list size) point of `campaign`, SNR-major. All points
/// share the same payloads and noise draws, scaled to their SNR.
pub fn run_campaign(spec: &CodeSpec, campaign: &Campaign) -> Result<Vec<PointResult>> {
    campaign.validate(spec)?;
    let rate = spec.k() as f64 / spec.n() as f64;
    let mut results = Vec::new();
    for &snr in &campaign.snr_db {
        let sigma = noise_variance(snr, rate).sqrt();
        for list in campaign.list_sizes() {
            let engine = Engine::new(spec, campaign.decoder, list)?;
            let start = Instant::now();
            let mut tally = Tally::default();
            while tally.frames < campaign.stop.max_frames && tally.errors < campaign.stop.min_errors {
                let end = (tally.frames + BATCH).min(campaign.stop.max_frames);
                let t = run_batch(&engine, spec, sigma, campaign.seed, tally.frames..end)?;
                tally.frames += t.frames;
                tally.errors += t.errors;
                tally.ops.merge(&t.ops);
            }
            let point = PointResult {
                snr_db: snr,
                list,
                frames: tally.frames,
                frame_errors: tally.errors,
                ops: tally.ops,
                seconds: campaign.record_time.then(|| start.elapsed().as_secs_f64()),
            };
            log::info!(
                "{snr} dB, L={list}: {}/{} errors, FER {:.3e}",
                point.frame_errors,
                point.frames,
                point.fer()
            );
            results.push(point);
        }
    }
    Ok(results)
}

/// Results as CSV with [`CSV_HEADER`]; `seconds` is empty when not recorded.
pub fn write_csv(results: &[PointResult]) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in results {
        let (lo, hi) = r.ci();
        let secs = r.seconds.map(|t| format!("{t:.3}")).unwrap_or_default();
        writeln!(
            s,
            "{},{},{},{},{:.6e},{:.6e},{:.6e},{:.3},{:.3},{}",
            r.snr_db,
            r.list,
            r.frames,
            r.frame_errors,
            r.fer(),
            lo,
            hi,
            r.ops.mean_additions(),
            r.ops.mean_comparisons(),
            secs
        )
        .expect("write to string");
    }
    s
}

/// Mean and maximum operation counts of `kind` over `trials` noisy frames
/// at `snr_db`.
pub fn count_ops(spec: &CodeSpec, kind: DecoderKind, list: usize, trials: u64, snr_db: f64, seed: u64) -> Result<OpStats> {
    let campaign = Campaign::new(kind, vec![list], vec![snr_db]);
    campaign.validate(spec)?;
    let engine = Engine::new(spec, kind, list)?;
    let sigma = noise_variance(snr_db, spec.k() as f64 / spec.n() as f64).sqrt();
    Ok(run_batch(&engine, spec, sigma, seed, 0..trials)?.ops)
}
