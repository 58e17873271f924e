#![allow(dead_code)]

use abspolar::{CodeSpec, SpecDraft};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fig2() -> CodeSpec {
    CodeSpec::new(&SpecDraft::new(3, 4, [1, 2, 3, 4]).swap(3, [4]).add(2, [2])).unwrap()
}

/// Transform patterns for m <= 4, frozen sets left empty.
pub fn small_drafts() -> Vec<(&'static str, SpecDraft)> {
    vec![
        ("m2-classical", SpecDraft::new(2, 4, [])),
        ("m2-add", SpecDraft::new(2, 4, []).add(2, [2])),
        ("m2-swap", SpecDraft::new(2, 4, []).swap(2, [2])),
        ("fig2", SpecDraft::new(3, 8, []).swap(3, [4]).add(2, [2])),
        ("m3-mixed", SpecDraft::new(3, 8, []).swap(3, [2]).add(3, [6])),
        ("m3-add-swap", SpecDraft::new(3, 8, []).add(3, [2]).swap(3, [6]).swap(2, [2])),
        ("m3-classical", SpecDraft::new(3, 8, [])),
        (
            "m4-mixed",
            SpecDraft::new(4, 16, [])
                .swap(4, [2, 10])
                .add(4, [6, 14])
                .add(3, [4])
                .swap(2, [2]),
        ),
        (
            "m4-dense",
            SpecDraft::new(4, 16, [])
                .add(4, [4, 12])
                .swap(4, [8])
                .swap(3, [2, 6])
                .add(2, [2]),
        ),
        ("m4-sparse", SpecDraft::new(4, 16, []).swap(4, [14]).add(3, [2])),
    ]
}

/// The suite with `k` random information positions.
pub fn with_random_frozen(draft: &SpecDraft, k: usize, rng: &mut impl Rng) -> CodeSpec {
    let n = 1usize << draft.m;
    let frozen: Vec<usize> = sample(rng, n, n - k).into_iter().map(|i| i + 1).collect();
    let mut d = draft.clone();
    d.k = k;
    d.frozen = frozen;
    CodeSpec::new(&d).unwrap()
}

/// AWGN-like LLRs around the all-zero codeword, plus random signs from a
/// codeword if given.
pub fn gaussian_llrs(n: usize, sigma: f64, rng: &mut impl Rng) -> Vec<f64> {
    let normal = Normal::new(0.0, sigma).unwrap();
    (0..n)
        .map(|_| {
            let y = 1.0 - 2.0 * f64::from(rng.random_range(0..2u8)) + normal.sample(rng);
            2.0 * y / (sigma * sigma)
        })
        .collect()
}

/// Small integers, so every comparison is exact and ties are frequent.
pub fn integer_llrs(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| f64::from(rng.random_range(-4i32..=4))).collect()
}

/// Random valid swap/add sets on every layer: each even index is taken with
/// probability `density`, keeping the required spacing.
pub fn random_transforms(m: u32, density: f64, rng: &mut impl Rng) -> SpecDraft {
    let n = 1usize << m;
    let mut draft = SpecDraft::new(m, n, []);
    for layer in 2..=m {
        let mut j = 2;
        while j < 1usize << layer {
            if rng.random_bool(density) {
                draft = if rng.random_bool(0.5) {
                    draft.swap(layer, [j])
                } else {
                    draft.add(layer, [j])
                };
                j += 4;
            } else {
                j += 2;
            }
        }
    }
    draft
}

/// A random spec with at least one transform and a random frozen set.
pub fn random_abs_spec(m: u32, rng: &mut impl Rng) -> CodeSpec {
    loop {
        let density = rng.random_range(0.05..0.5);
        let draft = random_transforms(m, density, rng);
        if draft.swap_sets.values().chain(draft.add_sets.values()).all(Vec::is_empty) {
            continue;
        }
        let k = rng.random_range(1..=1usize << m);
        return with_random_frozen(&draft, k, rng);
    }
}
