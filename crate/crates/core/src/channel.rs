//! BPSK over AWGN and a binary symmetric channel, producing channel LLRs.
//!
//! Randomness comes from ChaCha8 with one stream per frame: frame `f` of a
//! run seeded with `s` always sees the same draws, whichever thread or
//! process handles it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result, Scalar};

/// Generator for frame `frame` of a run seeded with `seed`.
pub fn frame_rng(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

/// Noise variance of unit-energy BPSK at `ebno_db` for code rate `rate`.
pub fn noise_variance(ebno_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(ebno_db / 10.0))
}

/// AWGN channel with BPSK. `rate` counts CRC bits as overhead, i.e. it is
/// payload bits over code length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AwgnConfig {
    pub ebno_db: f64,
    pub rate: f64,
    pub seed: u64,
}

impl AwgnConfig {
    pub fn new(ebno_db: f64, rate: f64, seed: u64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::InvalidConfig(format!("rate {rate} outside (0, 1]")));
        }
        if !ebno_db.is_finite() {
            return Err(Error::InvalidConfig(format!("Eb/N0 {ebno_db} dB is not finite")));
        }
        Ok(Self { ebno_db, rate, seed })
    }

    pub fn sigma(&self) -> f64 {
        noise_variance(self.ebno_db, self.rate).sqrt()
    }

    /// Transmits `codeword` as frame `frame` of the run.
    pub fn transmit<S: Scalar>(&self, codeword: &[u8], frame: u64) -> Vec<S> {
        awgn_llrs(codeword, self.sigma(), &mut frame_rng(self.seed, frame))
    }
}

/// BPSK `b -> 1 - 2b` plus Gaussian noise of deviation `sigma`, returned as
/// LLRs `2y / sigma^2`.
pub fn awgn_llrs<S: Scalar>(codeword: &[u8], sigma: f64, rng: &mut impl Rng) -> Vec<S> {
    let scale = 2.0 / (sigma * sigma);
    codeword
        .iter()
        .map(|&b| {
            let z: f64 = StandardNormal.sample(rng);
            let y = 1.0 - 2.0 * f64::from(b & 1) + sigma * z;
            S::from_f64_lossy(scale * y)
        })
        .collect()
}

/// Binary symmetric channel. LLR magnitudes are capped at `clamp` so that
/// tiny crossover probabilities stay finite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BscConfig {
    pub p: f64,
    pub clamp: f64,
    pub seed: u64,
}

impl BscConfig {
    pub const DEFAULT_CLAMP: f64 = 1e3;

    pub fn new(p: f64, seed: u64) -> Result<Self> {
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::InvalidConfig(format!("crossover probability {p} outside (0, 0.5)")));
        }
        Ok(Self {
            p,
            clamp: Self::DEFAULT_CLAMP,
            seed,
        })
    }

    pub fn with_clamp(mut self, clamp: f64) -> Self {
        self.clamp = clamp;
        self
    }

    /// `min(ln((1-p)/p), clamp)`.
    pub fn llr_magnitude(&self) -> f64 {
        ((1.0 - self.p) / self.p).ln().min(self.clamp)
    }

    pub fn transmit<S: Scalar>(&self, codeword: &[u8], frame: u64) -> Vec<S> {
        let mut rng = frame_rng(self.seed, frame);
        let mag = self.llr_magnitude();
        codeword
            .iter()
            .map(|&b| {
                let out = (b & 1) ^ u8::from(rng.random_bool(self.p));
                S::from_f64_lossy(if out == 0 { mag } else { -mag })
            })
            .collect()
    }
}
