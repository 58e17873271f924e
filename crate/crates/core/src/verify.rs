//! Self-checks of a code and of the decoders against the brute-force
//! oracles, as run by the `verify` command.
//!
//! Exhaustive checks only run where they are affordable: the max-probability
//! oracles need `m <= 4` and maximum-likelihood enumeration at most
//! [`VerifyConfig::max_ml_bits`] unfrozen bits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::arikan::ArikanDecoder;
use crate::encoder::{encode, encode_in_place, gen_matrix, place_info};
use crate::llr::Family;
use crate::oracle::{
    brute_ml, kernel_discrepancy, verify_lemma1, BinaryInputTable, CodeTables, DbiChannelTable, MAX_M,
};
use crate::{CodeSpec, DecoderOptions, ListConfig, Result, ScDecoder, SclDecoder};

/// Tolerance of the kernel check.
pub const KERNEL_TOL: f64 = 1e-9;
/// Tolerance of the recursive vs direct max-probability check.
pub const LEMMA_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyConfig {
    /// Random channel tables per transform family.
    pub tables: usize,
    /// Random LLR vectors per decoder check.
    pub frames: usize,
    pub max_ml_bits: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            tables: 1000,
            frames: 1000,
            max_ml_bits: 10,
            seed: 0,
        }
    }
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

fn gaussian(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    // mixes reliable and unreliable positions
    let normal = Normal::new(2.0, 2.0).expect("valid deviation");
    (0..n).map(|_| normal.sample(rng)).collect()
}

/// Runs every check that applies to `spec`.
pub fn verify_spec(spec: &CodeSpec, cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = spec.n();
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    for family in Family::ALL {
        for t in 0..cfg.tables {
            let v = DbiChannelTable::random(2 + t % 3, &mut rng);
            worst = worst.max(kernel_discrepancy(&v, family));
        }
    }
    checks.push(Check::new(
        "kernels",
        worst <= KERNEL_TOL,
        format!("{} tables per family, max error {worst:.2e}", cfg.tables),
    ));

    if spec.m() <= 12 {
        let g = gen_matrix(spec)?;
        let mut bad = 0;
        for _ in 0..cfg.frames.min(200) {
            let u: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let mut x = u.clone();
            encode_in_place(spec, &mut x);
            bad += usize::from(x != g.vec_mul(&u));
        }
        checks.push(Check::new("encoder", bad == 0, format!("{bad} mismatches against the generator matrix")));
    }

    let sc = ScDecoder::<f64>::with_options(spec, DecoderOptions::checked());
    let variants = [
        DecoderOptions { reuse: false, ..DecoderOptions::default() },
        DecoderOptions { prune: false, ..DecoderOptions::default() },
        DecoderOptions::full(),
    ];
    let variants: Vec<ScDecoder<f64>> = variants.iter().map(|&o| ScDecoder::with_options(spec, o)).collect();
    let mut differ = 0;
    for _ in 0..cfg.frames {
        let llrs = gaussian(n, &mut rng);
        let base = sc.decode(&llrs)?;
        for d in &variants {
            differ += usize::from(d.decode(&llrs)?.u != base.u);
        }
    }
    checks.push(Check::new(
        "shortcuts",
        differ == 0,
        format!("{differ} differing decisions with reuse or pruning disabled"),
    ));

    let mut failed = 0;
    for _ in 0..cfg.frames.min(100) {
        let info: Vec<u8> = (0..spec.unfrozen_len()).map(|_| rng.random_range(0..2)).collect();
        let u = place_info(spec, &info)?;
        let x = encode(spec, &u)?;
        let llrs: Vec<f64> = x.iter().map(|&b| if b == 0 { 10.0 } else { -10.0 }).collect();
        failed += usize::from(sc.decode(&llrs)?.u != u);
    }
    checks.push(Check::new("noiseless", failed == 0, format!("{failed} noiseless frames misdecoded")));

    if spec.is_classical() {
        let reference = ArikanDecoder::from_spec(spec);
        let mut differ = 0;
        for _ in 0..cfg.frames {
            let llrs = gaussian(n, &mut rng);
            differ += usize::from(sc.decode(&llrs)?.u != reference.sc(&llrs)?.u);
        }
        checks.push(Check::new(
            "classical-reduction",
            differ == 0,
            format!("{differ} frames differ from the classical decoder"),
        ));
    }

    if spec.m() <= MAX_M {
        let w = BinaryInputTable::random(3, &mut rng);
        let ys: Vec<Vec<usize>> = (0..2).map(|_| (0..n).map(|_| rng.random_range(0..3)).collect()).collect();
        let report = verify_lemma1(spec, &w, &ys)?;
        checks.push(Check::new(
            "channel-recursion",
            report.max_abs <= LEMMA_TOL,
            format!("{} comparisons, max error {:.2e}", report.comparisons, report.max_abs),
        ));

        let tables = CodeTables::new(spec)?;
        let mut differ = 0;
        for _ in 0..cfg.frames {
            let llrs = gaussian(n, &mut rng);
            differ += usize::from(sc.decode(&llrs)?.u != tables.sequential_decode(&llrs)?.u);
        }
        checks.push(Check::new(
            "sc-oracle",
            differ == 0,
            format!("{differ} of {} frames differ from brute-force sequential decoding", cfg.frames),
        ));
    }

    let k = spec.unfrozen_len();
    if k <= cfg.max_ml_bits {
        let scl = SclDecoder::<f64>::new(spec, ListConfig::new(1 << k))?;
        let mut differ = 0;
        let frames = cfg.frames.min(200);
        for _ in 0..frames {
            let llrs = gaussian(n, &mut rng);
            let (x, _) = brute_ml(spec, &llrs)?;
            differ += usize::from(scl.decode(&llrs)?.best().codeword != x);
        }
        checks.push(Check::new(
            "full-list-ml",
            differ == 0,
            format!("{differ} of {frames} frames differ from maximum likelihood"),
        ));
    }
    Ok(checks)
}
