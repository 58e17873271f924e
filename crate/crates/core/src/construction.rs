//! Code construction: frozen sets from genie-aided Monte-Carlo runs, a
//! Gaussian-approximation reference for classical codes, and a greedy
//! heuristic for the swap/add sets.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{awgn_llrs, frame_rng, noise_variance};
use crate::codespec::{CodeSpec, SpecDraft, Transform};
use crate::crc::CrcSpec;
use crate::encoder::encode_any;
use crate::llr::hard_decision;
use crate::sc::ScDecoder;
use crate::{Error, Result};

/// Frames simulated per parallel work unit; fixed so results do not depend
/// on the thread count.
const CHUNK: usize = 256;

/// Monte-Carlo design point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McConfig {
    pub design_ebno_db: f64,
    /// Rate used to convert Eb/N0 to a noise level.
    pub rate: f64,
    pub trials: usize,
    pub seed: u64,
}

impl McConfig {
    pub const MIN_TRIALS: usize = 1000;

    pub fn new(design_ebno_db: f64, rate: f64, trials: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            design_ebno_db,
            rate,
            trials,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.trials < Self::MIN_TRIALS {
            return Err(Error::InvalidConfig(format!(
                "{} trials, at least {} needed",
                self.trials,
                Self::MIN_TRIALS
            )));
        }
        if !(self.rate > 0.0 && self.rate <= 1.0) || !self.design_ebno_db.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "design point {} dB at rate {}",
                self.design_ebno_db, self.rate
            )));
        }
        Ok(())
    }

    fn sigma(&self) -> f64 {
        noise_variance(self.design_ebno_db, self.rate).sqrt()
    }
}

/// Per-position statistics of genie-aided decoding: errors and the leaf
/// LLR signed so that positive means correct.
#[derive(Clone, Debug, PartialEq)]
pub struct SubchannelStats {
    pub trials: u64,
    pub errors: Vec<u64>,
    pub llr_sum: Vec<f64>,
}

impl SubchannelStats {
    fn zeros(n: usize) -> Self {
        Self {
            trials: 0,
            errors: vec![0; n],
            llr_sum: vec![0.0; n],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        for (a, b) in self.errors.iter_mut().zip(&other.errors) {
            *a += b;
        }
        for (a, b) in self.llr_sum.iter_mut().zip(&other.llr_sum) {
            *a += b;
        }
        self
    }

    pub fn error_rates(&self) -> Vec<f64> {
        self.errors.iter().map(|&e| e as f64 / self.trials as f64).collect()
    }

    pub fn mean_llrs(&self) -> Vec<f64> {
        self.llr_sum.iter().map(|&s| s / self.trials as f64).collect()
    }

    /// 0-based positions from least to most reliable: more errors first,
    /// then smaller mean LLR, then lower index.
    pub fn ranking(&self) -> Vec<usize> {
        let mean = self.mean_llrs();
        let mut idx: Vec<usize> = (0..self.errors.len()).collect();
        idx.sort_by(|&a, &b| {
            self.errors[b]
                .cmp(&self.errors[a])
                .then(mean[a].total_cmp(&mean[b]))
                .then(a.cmp(&b))
        });
        idx
    }

    /// The `n - unfrozen` least reliable positions, 1-based and ascending.
    pub fn frozen_set(&self, unfrozen: usize) -> Vec<usize> {
        let n = self.errors.len();
        let count = n - unfrozen.min(n);
        let seen = self.errors.iter().filter(|&&e| e > 0).count();
        if seen < count {
            log::warn!(
                "only {seen} of {n} positions ever failed; ranking the remaining {} by mean LLR",
                count - seen
            );
        }
        let mut frozen: Vec<usize> = self.ranking()[..count].iter().map(|&i| i + 1).collect();
        frozen.sort_unstable();
        frozen
    }
}

/// Genie-aided decoding of random messages through `spec`'s transforms;
/// its frozen set is ignored.
pub fn genie_stats(spec: &CodeSpec, cfg: &McConfig) -> Result<SubchannelStats> {
    cfg.validate()?;
    let n = spec.n();
    let sigma = cfg.sigma();
    let dec = ScDecoder::<f64>::new(spec);
    let chunks = cfg.trials.div_ceil(CHUNK);
    let parts: Vec<Result<SubchannelStats>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut stats = SubchannelStats::zeros(n);
            for frame in c * CHUNK..((c + 1) * CHUNK).min(cfg.trials) {
                let mut rng = frame_rng(cfg.seed, frame as u64);
                let u: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
                let x = encode_any(spec, &u);
                let llrs: Vec<f64> = awgn_llrs(&x, sigma, &mut rng);
                let out = dec.decode_genie(&llrs, &u)?;
                for (i, (&l, &b)) in out.leaf_llrs.iter().zip(&u).enumerate() {
                    if hard_decision(l) != b {
                        stats.errors[i] += 1;
                    }
                    stats.llr_sum[i] += if b == 0 { l } else { -l };
                }
                stats.trials += 1;
            }
            Ok(stats)
        })
        .collect();
    let mut total = SubchannelStats::zeros(n);
    for p in parts {
        total = total.merge(p?);
    }
    Ok(total)
}

/// Frozen set for `unfrozen` information-plus-CRC positions of a code with
/// `spec`'s transforms.
pub fn mc_frozen_set(spec: &CodeSpec, unfrozen: usize, cfg: &McConfig) -> Result<Vec<usize>> {
    if unfrozen > spec.n() {
        return Err(Error::InvalidConfig(format!("{unfrozen} unfrozen positions exceed n = {}", spec.n())));
    }
    Ok(genie_stats(spec, cfg)?.frozen_set(unfrozen))
}

/// `phi` of the Gaussian approximation (Chung's fit).
fn phi(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < 10.0 {
        (-0.4527 * x.powf(0.86) + 0.0218).exp()
    } else {
        (std::f64::consts::PI / x).sqrt() * (-x / 4.0).exp() * (1.0 - 10.0 / (7.0 * x))
    }
}

fn phi_inv(y: f64) -> f64 {
    if y >= 1.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while phi(hi) > y {
        hi *= 2.0;
        if hi > 1e6 {
            return hi;
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Mean LLR of every classical bit channel under the Gaussian approximation,
/// in message order.
pub fn ga_means(m: u32, design_ebno_db: f64, rate: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(1 << m);
    ga_node(2.0 / noise_variance(design_ebno_db, rate), m, &mut out);
    out
}

// the first half of the message sees the check-node channel
fn ga_node(mean: f64, depth: u32, out: &mut Vec<f64>) {
    if depth == 0 {
        out.push(mean);
        return;
    }
    ga_node(phi_inv(1.0 - (1.0 - phi(mean)).powi(2)), depth - 1, out);
    ga_node(2.0 * mean, depth - 1, out);
}

/// Classical frozen set from the Gaussian approximation.
pub fn ga_frozen_set(m: u32, unfrozen: usize, design_ebno_db: f64, rate: f64) -> Vec<usize> {
    let means = ga_means(m, design_ebno_db, rate);
    let mut idx: Vec<usize> = (0..means.len()).collect();
    idx.sort_by(|&a, &b| means[a].total_cmp(&means[b]).then(a.cmp(&b)));
    let mut frozen: Vec<usize> = idx[..means.len() - unfrozen.min(means.len())]
        .iter()
        .map(|&i| i + 1)
        .collect();
    frozen.sort_unstable();
    frozen
}

/// Greedy search for swap/add sets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreedyConfig {
    pub mc: McConfig,
    /// Information plus CRC positions the code will carry.
    pub unfrozen: usize,
    /// Most transforms kept per layer.
    pub budget: usize,
}

/// Picks swap/add sets layer by layer, from layer 2 down to the leaves.
///
/// A transform at `(layer, j)` only changes the synthesized channels of the
/// messages below nodes `(layer, j)` and `(layer, j+1)`. Every option is
/// scored on that block by the sum of the error rates of its most reliable
/// positions, as many as the current code leaves unfrozen there, and kept
/// if it lowers the sum. Options of one layer are simulated together, four
/// apart, with the same noise as the baseline.
pub fn greedy_abs_sets(m: u32, cfg: &GreedyConfig) -> Result<SpecDraft> {
    cfg.mc.validate()?;
    let n = 1usize << m;
    if cfg.unfrozen > n {
        return Err(Error::InvalidConfig(format!("{} unfrozen positions exceed n = {n}", cfg.unfrozen)));
    }
    let mut draft = SpecDraft::new(m, n, []);
    if cfg.budget == 0 {
        return Ok(draft);
    }
    for layer in 2..=m {
        let base = genie_stats(&CodeSpec::new(&draft)?, &cfg.mc)?;
        let ranking = base.ranking();
        let mut info = vec![false; n];
        for &i in &ranking[n - cfg.unfrozen..] {
            info[i] = true;
        }
        let base_rates = base.error_rates();
        let block = 1usize << (m - layer);
        let mut options: Vec<(f64, usize, Transform)> = Vec::new();
        for offset in [2usize, 4] {
            let positions: Vec<usize> = (offset..1usize << layer).step_by(4).collect();
            if positions.is_empty() {
                continue;
            }
            for kind in [Transform::Swap, Transform::Add] {
                let trial = match kind {
                    Transform::Swap => draft.clone().swap(layer, positions.iter().copied()),
                    Transform::Add => draft.clone().add(layer, positions.iter().copied()),
                };
                let rates = genie_stats(&CodeSpec::new(&trial)?, &cfg.mc)?.error_rates();
                for &j in &positions {
                    let range = (j - 1) * block..(j + 1) * block;
                    let keep = info[range.clone()].iter().filter(|&&b| b).count();
                    if keep == 0 {
                        continue;
                    }
                    let gain = best_sum(&base_rates[range.clone()], keep) - best_sum(&rates[range], keep);
                    if gain > 0.0 {
                        options.push((gain, j, kind));
                    }
                }
            }
        }
        options.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut taken: Vec<usize> = Vec::new();
        for (gain, j, kind) in options {
            if taken.len() == cfg.budget {
                break;
            }
            if taken.iter().any(|&t| t.abs_diff(j) < 4) {
                continue;
            }
            log::debug!("layer {layer}: {kind:?} at {j}, gain {gain:.3e}");
            taken.push(j);
            draft = match kind {
                Transform::Swap => draft.swap(layer, [j]),
                Transform::Add => draft.add(layer, [j]),
            };
        }
        log::info!("layer {layer}: {} transforms", taken.len());
    }
    Ok(draft)
}

fn best_sum(rates: &[f64], keep: usize) -> f64 {
    let mut v = rates.to_vec();
    v.sort_by(f64::total_cmp);
    v[..keep].iter().sum()
}

/// Full construction: transforms (when `budget > 0`), then the frozen set
/// for `k` payload bits plus the CRC.
pub fn construct(
    m: u32,
    k: usize,
    crc: Option<CrcSpec>,
    mc: &McConfig,
    budget: usize,
) -> Result<CodeSpec> {
    let unfrozen = k + crc.map_or(0, |c| c.width());
    let mut draft = greedy_abs_sets(
        m,
        &GreedyConfig {
            mc: *mc,
            unfrozen,
            budget,
        },
    )?;
    let shape = CodeSpec::new(&draft)?;
    draft.frozen = mc_frozen_set(&shape, unfrozen, mc)?;
    draft.k = k;
    draft.crc = crc;
    CodeSpec::new(&draft)
}
