//! Brute-force reference semantics for small codes.
//!
//! Probability-domain objects ([`DbiChannelTable`], [`transform_table`],
//! [`verify_lemma1`]) check the recursion between max-probability virtual
//! channels. LLR-domain objects ([`LlrOracle`], [`brute_sequential_decode`],
//! [`brute_ml`]) give the values and decisions the decoders must reproduce.
//!
//! Message vectors are indexed as integers with `u_1` as the most
//! significant bit, so all vectors sharing a prefix form one contiguous
//! block.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::Rng;

use crate::codespec::{CodeSpec, Transform};
use crate::encoder::{apply_q, encode_any};
use crate::llr::{Family, Kind, LlrTriple, Shape};
use crate::{Error, Result};

/// Largest `m` handled by the exhaustive machinery.
pub const MAX_M: u32 = 4;

/// Explicit double-bit-input channel `V(y|a,b)` over outputs `0..q`.
#[derive(Clone, Debug, PartialEq)]
pub struct DbiChannelTable {
    probs: Vec<[f64; 4]>,
}

impl DbiChannelTable {
    /// `probs[y][2a+b] = V(y|a,b)`; each input column must sum to 1.
    pub fn new(probs: Vec<[f64; 4]>) -> Result<Self> {
        if probs.is_empty() || probs.len() > 16 {
            return Err(Error::InvalidConfig(format!(
                "output alphabet size {} outside 1..=16",
                probs.len()
            )));
        }
        for col in 0..4 {
            let sum: f64 = probs.iter().map(|p| p[col]).sum();
            if probs.iter().any(|p| p[col].is_nan() || p[col] < 0.0) || (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "column {col} is not a distribution (sum {sum})"
                )));
            }
        }
        Ok(Self { probs })
    }

    /// Random channel with all probabilities bounded away from zero.
    pub fn random<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Self {
        let mut probs: Vec<[f64; 4]> = (0..q)
            .map(|_| std::array::from_fn(|_| rng.random_range(0.05..1.0)))
            .collect();
        for col in 0..4 {
            let sum: f64 = probs.iter().map(|p| p[col]).sum();
            probs.iter_mut().for_each(|p| p[col] /= sum);
        }
        Self { probs }
    }

    /// Noiseless channel: output `y = 2a+b`.
    pub fn perfect() -> Self {
        let probs = (0..4)
            .map(|y| std::array::from_fn(|c| if c == y { 1.0 } else { 0.0 }))
            .collect();
        Self { probs }
    }

    pub fn uniform(q: usize) -> Self {
        Self {
            probs: vec![[1.0 / q as f64; 4]; q],
        }
    }

    pub fn q(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, y: usize, a: u8, b: u8) -> f64 {
        self.probs[y][usize::from(2 * a + b)]
    }

    pub fn column(&self, y: usize) -> &[f64; 4] {
        &self.probs[y]
    }

    pub fn llrs(&self, y: usize) -> LlrTriple<f64> {
        llr_triple(&self.probs[y])
    }
}

/// `(L, R(.;0), R(.;1))` of a four-entry probability column.
pub fn llr_triple(p: &[f64; 4]) -> LlrTriple<f64> {
    LlrTriple::new(
        (p[0].max(p[1]) / p[2].max(p[3])).ln(),
        (p[0] / p[1]).ln(),
        (p[2] / p[3]).ln(),
    )
}

/// Inputs of the two constituent channels given the four local bits.
fn constituent_inputs(kind: Kind, [u1, u2, u3, u4]: [u8; 4]) -> (usize, usize) {
    let (a1, a2, b1, b2) = match kind {
        Kind::Plain => (u1 ^ u2, u3 ^ u4, u2, u4),
        Kind::Swap => (u1 ^ u3, u2 ^ u4, u3, u4),
        Kind::Add => (u1 ^ u2 ^ u3, u3 ^ u4, u2 ^ u3, u4),
    };
    (usize::from(2 * a1 + a2), usize::from(2 * b1 + b2))
}

/// Max-probability of a transformed channel, from the columns `p1`, `p2` of
/// the two constituent channels at their outputs.
pub fn transformed_prob(
    family: Family,
    p1: &[f64; 4],
    p2: &[f64; 4],
    cond: &[u8],
    a: u8,
    b: u8,
) -> f64 {
    let eval = |u: [u8; 4]| {
        let (i1, i2) = constituent_inputs(family.kind, u);
        p1[i1] * p2[i2]
    };
    match family.shape {
        Shape::Down => {
            let mut best = f64::NEG_INFINITY;
            for u3 in 0..2 {
                for u4 in 0..2 {
                    best = best.max(eval([a, b, u3, u4]));
                }
            }
            best
        }
        Shape::Lozenge => eval([cond[0], a, b, 0]).max(eval([cond[0], a, b, 1])),
        Shape::Up => eval([cond[0], cond[1], a, b]),
    }
}

/// Output symbol of a transformed channel: both constituent outputs plus the
/// conditioning bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TransformedOutput {
    pub y1: usize,
    pub y2: usize,
    pub cond: Vec<u8>,
}

/// Materialized transformed channel.
#[derive(Clone, Debug)]
pub struct TransformedTable {
    pub family: Family,
    pub outputs: Vec<TransformedOutput>,
    probs: Vec<[f64; 4]>,
}

impl TransformedTable {
    pub fn prob(&self, o: usize, a: u8, b: u8) -> f64 {
        self.probs[o][usize::from(2 * a + b)]
    }

    pub fn column(&self, o: usize) -> &[f64; 4] {
        &self.probs[o]
    }

    pub fn llrs(&self, o: usize) -> LlrTriple<f64> {
        llr_triple(&self.probs[o])
    }
}

/// Evaluates one of the nine transforms of `v` by direct maximization.
pub fn transform_table(v: &DbiChannelTable, family: Family) -> TransformedTable {
    let conds: Vec<Vec<u8>> = match family.cond_bits() {
        0 => vec![vec![]],
        1 => vec![vec![0], vec![1]],
        _ => vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]],
    };
    let mut outputs = Vec::new();
    let mut probs = Vec::new();
    for y1 in 0..v.q() {
        for y2 in 0..v.q() {
            for cond in &conds {
                let col = std::array::from_fn(|c| {
                    let (a, b) = ((c >> 1) as u8, (c & 1) as u8);
                    transformed_prob(family, v.column(y1), v.column(y2), cond, a, b)
                });
                outputs.push(TransformedOutput { y1, y2, cond: cond.clone() });
                probs.push(col);
            }
        }
    }
    TransformedTable { family, outputs, probs }
}

/// Largest `|kernel - log-ratio|` over all outputs of one transformed table.
pub fn kernel_discrepancy(v: &DbiChannelTable, family: Family) -> f64 {
    let table = transform_table(v, family);
    let mut ops = crate::OpCounter::new();
    let mut worst = 0.0f64;
    for (o, out) in table.outputs.iter().enumerate() {
        let want = table.llrs(o);
        let got = crate::llr::transform_llrs(
            family,
            &v.llrs(out.y1),
            &v.llrs(out.y2),
            &out.cond,
            &mut ops,
        );
        for (g, w) in [(got.l, want.l), (got.r[0], want.r[0]), (got.r[1], want.r[1])] {
            worst = worst.max((g - w).abs());
        }
    }
    worst
}

/// Binary-input channel `W(y|x)` over outputs `0..q`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryInputTable {
    probs: Vec<[f64; 2]>,
}

impl BinaryInputTable {
    pub fn new(probs: Vec<[f64; 2]>) -> Result<Self> {
        for col in 0..2 {
            let sum: f64 = probs.iter().map(|p| p[col]).sum();
            if probs.iter().any(|p| p[col].is_nan() || p[col] < 0.0) || (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "column {col} is not a distribution (sum {sum})"
                )));
            }
        }
        Ok(Self { probs })
    }

    pub fn random<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Self {
        let mut probs: Vec<[f64; 2]> = (0..q)
            .map(|_| [rng.random_range(0.05..1.0), rng.random_range(0.05..1.0)])
            .collect();
        for col in 0..2 {
            let sum: f64 = probs.iter().map(|p| p[col]).sum();
            probs.iter_mut().for_each(|p| p[col] /= sum);
        }
        Self { probs }
    }

    pub fn q(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, y: usize, x: u8) -> f64 {
        self.probs[y][usize::from(x & 1)]
    }
}

/// The six cases of the recursion between consecutive layers, keyed by the
/// transforms near position `2i` of the upper layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LemmaCase {
    /// `2i` is a swap position.
    I,
    /// `2i` is an add position.
    II,
    /// `2(i-1)` is a swap position and `2(i+1)` carries a transform.
    III,
    /// `2(i-1)` is a swap position and `2(i+1)` does not.
    IV,
    /// `2(i-1)` is not a swap position and `2(i+1)` carries a transform.
    V,
    /// No transform at `2(i-1)` (as swap), `2i` or `2(i+1)`.
    VI,
}

impl fmt::Display for LemmaCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LemmaCase::I => "i",
            LemmaCase::II => "ii",
            LemmaCase::III => "iii",
            LemmaCase::IV => "iv",
            LemmaCase::V => "v",
            LemmaCase::VI => "vi",
        };
        f.write_str(s)
    }
}

/// Case of lower phase `i` feeding `layer`.
pub fn lemma_case(spec: &CodeSpec, layer: u32, i: usize) -> LemmaCase {
    let t = |j: usize| if j == 0 { None } else { spec.transform(layer, j) };
    match t(2 * i) {
        Some(Transform::Swap) => LemmaCase::I,
        Some(Transform::Add) => LemmaCase::II,
        None => {
            let prev_swap = t(2 * i - 2) == Some(Transform::Swap);
            let next = t(2 * i + 2).is_some();
            match (prev_swap, next) {
                (true, true) => LemmaCase::III,
                (true, false) => LemmaCase::IV,
                (false, true) => LemmaCase::V,
                (false, false) => LemmaCase::VI,
            }
        }
    }
}

fn kind_at(spec: &CodeSpec, layer: u32, j: usize) -> Kind {
    match spec.transform(layer, j) {
        None => Kind::Plain,
        Some(Transform::Swap) => Kind::Swap,
        Some(Transform::Add) => Kind::Add,
    }
}

/// Identities `V^(j)_layer = (V^(i)_(layer-1))^family` that hold for lower
/// phase `i`, as `(j, family)` pairs.
///
/// The first-child identity `j = 2i-1` is omitted when `2(i-1)` is an add
/// position: that channel's prefix then depends on `u_(2i-1)` itself, and
/// the channel is produced by the add-up transform of phase `i-1` instead.
pub fn lemma_claims(spec: &CodeSpec, layer: u32, i: usize) -> Vec<(usize, Family)> {
    let n = 1usize << layer;
    let mut out = Vec::with_capacity(3);
    let prev_in_i = i > 1 && spec.in_i(layer, 2 * i - 2);
    let kind = kind_at(spec, layer, 2 * i);
    if kind != Kind::Plain || !prev_in_i {
        out.push((2 * i - 1, Family::new(kind, Shape::Down)));
    }
    out.push((2 * i, Family::new(kind, Shape::Lozenge)));
    let next_in_i = spec.in_i(layer, 2 * i + 2);
    if 2 * i < n && (kind != Kind::Plain || !next_in_i) {
        out.push((2 * i + 1, Family::new(kind, Shape::Up)));
    }
    out
}

/// Lower phase and transform that produce channel `j` of `layer` in the
/// decoding recursion.
pub fn lemma_route(spec: &CodeSpec, layer: u32, j: usize) -> (usize, Family) {
    if j.is_multiple_of(2) {
        let i = j / 2;
        return (i, Family::new(kind_at(spec, layer, j), Shape::Lozenge));
    }
    let i = j.div_ceil(2);
    if i > 1 && spec.in_i(layer, 2 * i - 2) {
        (i - 1, Family::new(kind_at(spec, layer, 2 * i - 2), Shape::Up))
    } else {
        (i, Family::new(kind_at(spec, layer, 2 * i), Shape::Down))
    }
}

/// Prefix-block maxima of a score table indexed with `u_1` as MSB:
/// `levels[p][x]` is the maximum over all vectors whose first `p` bits
/// spell `x`.
#[derive(Clone, Debug)]
pub struct PrefixMax {
    levels: Vec<Vec<f64>>,
}

impl PrefixMax {
    pub fn new(scores: Vec<f64>) -> Self {
        let bits = scores.len().trailing_zeros() as usize;
        assert_eq!(scores.len(), 1 << bits);
        let mut levels = vec![Vec::new(); bits + 1];
        levels[bits] = scores;
        for p in (0..bits).rev() {
            let next = &levels[p + 1];
            levels[p] = next.chunks(2).map(|c| c[0].max(c[1])).collect();
        }
        Self { levels }
    }

    pub fn bits(&self) -> usize {
        self.levels.len() - 1
    }

    #[inline]
    pub fn block_max(&self, prefix: u64, len: usize) -> f64 {
        self.levels[len][prefix as usize]
    }

    /// Max-probability of the double-bit channel at phase `j` (1-based),
    /// `b` ignored at the last phase.
    pub fn dbi(&self, j: usize, prefix: u64, a: u8, b: u8) -> f64 {
        let n = self.bits();
        if j < n {
            self.block_max((prefix << 2) | u64::from(2 * a + b), j + 1)
        } else {
            self.block_max((prefix << 1) | u64::from(a), j)
        }
    }
}

fn bits_of(x: u64, len: usize) -> Vec<u8> {
    (0..len).map(|k| ((x >> (len - 1 - k)) & 1) as u8).collect()
}

fn int_of(bits: &[u8]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u64::from(b & 1))
}

/// Codewords of every message of a small code, bit `t` of an entry being
/// codeword position `t+1`.
#[derive(Clone, Debug)]
pub struct CodewordTable {
    n: usize,
    words: Vec<u32>,
}

impl CodewordTable {
    pub fn new(spec: &CodeSpec) -> Result<Self> {
        if spec.m() > MAX_M {
            return Err(Error::TooLarge(format!(
                "exhaustive tables need m <= {MAX_M}, got {}",
                spec.m()
            )));
        }
        let n = spec.n();
        let words = (0..1u64 << n)
            .map(|x| {
                let c = encode_any(spec, &bits_of(x, n));
                c.iter().enumerate().fold(0u32, |acc, (t, &b)| acc | (u32::from(b) << t))
            })
            .collect();
        Ok(Self { n, words })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn word(&self, msg: u64) -> u32 {
        self.words[msg as usize]
    }

    /// `prod_t W(y_t | c_t)` for every message, multiplied in position order.
    pub fn probabilities(&self, w: &BinaryInputTable, y: &[usize]) -> Vec<f64> {
        self.words
            .iter()
            .map(|&c| {
                (0..self.n).fold(1.0, |acc, t| acc * w.prob(y[t], ((c >> t) & 1) as u8))
            })
            .collect()
    }

    /// Log-likelihood scores `-sum_t c_t llr_t` (up to a common constant).
    pub fn scores(&self, llrs: &[f64]) -> Vec<f64> {
        assert_eq!(llrs.len(), self.n);
        let table = |off: usize| -> Vec<f64> {
            (0..256usize)
                .map(|byte| {
                    (0..8)
                        .filter(|&t| off + t < self.n && (byte >> t) & 1 == 1)
                        .fold(0.0, |acc, t| acc - llrs[off + t])
                })
                .collect()
        };
        let (lo, hi) = (table(0), table(8));
        self.words
            .iter()
            .map(|&c| lo[(c & 0xff) as usize] + hi[(c >> 8) as usize])
            .collect()
    }
}

/// Max-probability of channel `j` of a small code, by direct enumeration of
/// continuations (no tables). `y` are the outputs feeding the code.
pub fn approx_dbi_direct(
    code: &CodeSpec,
    w: &BinaryInputTable,
    y: &[usize],
    prefix: &[u8],
    a: u8,
    b: u8,
) -> f64 {
    let n = code.n();
    let j = prefix.len() + 1;
    let fixed: Vec<u8> = if j < n {
        prefix.iter().copied().chain([a, b]).collect()
    } else {
        prefix.iter().copied().chain([a]).collect()
    };
    let free = n - fixed.len();
    let mut best = f64::NEG_INFINITY;
    for tail in 0..1u64 << free {
        let mut u = fixed.clone();
        u.extend(bits_of(tail, free));
        let c = encode_any(code, &u);
        let p = (0..n).fold(1.0, |acc, t| acc * w.prob(y[t], c[t]));
        best = best.max(p);
    }
    best
}

/// Outcome of [`verify_lemma1`].
#[derive(Clone, Debug, Default)]
pub struct Lemma1Report {
    /// Largest absolute difference, recursive vs direct.
    pub max_abs: f64,
    /// Largest difference relative to the direct value.
    pub max_rel: f64,
    pub comparisons: usize,
    /// Cases whose identities were evaluated at least once.
    pub cases: BTreeSet<LemmaCase>,
    pub families: BTreeSet<Family>,
}

impl Lemma1Report {
    fn record(&mut self, got: f64, want: f64) {
        let d = (got - want).abs();
        self.max_abs = self.max_abs.max(d);
        if want > 0.0 {
            self.max_rel = self.max_rel.max(d / want);
        } else if d > 0.0 {
            self.max_rel = f64::INFINITY;
        }
        self.comparisons += 1;
    }

    fn merge(&mut self, other: Lemma1Report) {
        self.max_abs = self.max_abs.max(other.max_abs);
        self.max_rel = self.max_rel.max(other.max_rel);
        self.comparisons += other.comparisons;
        self.cases.extend(other.cases);
        self.families.extend(other.families);
    }
}

struct LemmaRun<'a> {
    spec: &'a CodeSpec,
    w: &'a BinaryInputTable,
    y: &'a [usize],
    direct: HashMap<(u32, usize), PrefixMax>,
    memo: HashMap<(u32, usize, usize, u64), [f64; 4]>,
    report: Lemma1Report,
}

impl LemmaRun<'_> {
    fn stride(&self, layer: u32) -> usize {
        1 << (self.spec.m() - layer)
    }

    fn direct(&mut self, layer: u32, beta: usize) -> &PrefixMax {
        let (spec, w, y) = (self.spec, self.w, self.y);
        let stride = self.stride(layer);
        self.direct.entry((layer, beta)).or_insert_with(|| {
            let ys: Vec<usize> = (0..1usize << layer).map(|t| y[beta - 1 + t * stride]).collect();
            let probs = if layer == 0 {
                vec![w.prob(ys[0], 0), w.prob(ys[0], 1)]
            } else {
                let table = CodewordTable::new(&spec.truncated(layer)).expect("small code");
                table.probabilities(w, &ys)
            };
            PrefixMax::new(probs)
        })
    }

    /// Channel `j` of `layer`, slice `beta`, via the decoding recursion.
    fn recursive(&mut self, layer: u32, beta: usize, j: usize, prefix: u64) -> [f64; 4] {
        if let Some(v) = self.memo.get(&(layer, beta, j, prefix)) {
            return *v;
        }
        let v = if layer == 0 {
            let y = self.y[beta - 1];
            let (p0, p1) = (self.w.prob(y, 0), self.w.prob(y, 1));
            [p0, p0, p1, p1]
        } else {
            let (i, family) = lemma_route(self.spec, layer, j);
            self.claim(layer, beta, i, j, family, prefix)
        };
        for (c, &got) in v.iter().enumerate() {
            let (a, b) = ((c >> 1) as u8, (c & 1) as u8);
            let want = self.direct(layer, beta).dbi(j, prefix, a, b);
            self.report.record(got, want);
        }
        self.memo.insert((layer, beta, j, prefix), v);
        v
    }

    /// Channel `j` of `layer` computed as `family` of lower phase `i`.
    fn claim(
        &mut self,
        layer: u32,
        beta: usize,
        i: usize,
        j: usize,
        family: Family,
        prefix: u64,
    ) -> [f64; 4] {
        let n = 1usize << layer;
        let mut u = bits_of(prefix, j - 1);
        u.resize(n, 0);
        let mut x = u.clone();
        apply_q(self.spec, layer, &mut x);
        let w1 = int_of(&(1..i).map(|t| x[2 * t - 2] ^ x[2 * t - 1]).collect::<Vec<_>>());
        let w2 = int_of(&(1..i).map(|t| x[2 * t - 1]).collect::<Vec<_>>());
        let cond: Vec<u8> = match family.shape {
            Shape::Down => vec![],
            Shape::Lozenge => vec![x[2 * i - 2]],
            Shape::Up => vec![x[2 * i - 2], u[2 * i - 1]],
        };
        let stride = self.stride(layer);
        let p1 = self.recursive(layer - 1, beta, i, w1);
        let p2 = self.recursive(layer - 1, beta + stride, i, w2);
        if layer >= 2 {
            self.report.cases.insert(lemma_case(self.spec, layer, i));
        }
        self.report.families.insert(family);
        std::array::from_fn(|c| {
            transformed_prob(family, &p1, &p2, &cond, (c >> 1) as u8, (c & 1) as u8)
        })
    }
}

fn lemma_run<'a>(
    spec: &'a CodeSpec,
    w: &'a BinaryInputTable,
    y: &'a [usize],
) -> Result<LemmaRun<'a>> {
    if spec.m() > MAX_M {
        return Err(Error::TooLarge(format!("lemma check needs m <= {MAX_M}")));
    }
    if y.len() != spec.n() || y.iter().any(|&v| v >= w.q()) {
        return Err(Error::InvalidConfig("output vector does not fit the channel".into()));
    }
    Ok(LemmaRun {
        spec,
        w,
        y,
        direct: HashMap::new(),
        memo: HashMap::new(),
        report: Lemma1Report::default(),
    })
}

impl LemmaRun<'_> {
    fn check_claim(&mut self, layer: u32, i: usize, j: usize, family: Family) {
        let slices = 1usize << (self.spec.m() - layer);
        for beta in 1..=slices {
            for prefix in 0..1u64 << (j - 1) {
                let got = self.claim(layer, beta, i, j, family, prefix);
                for (c, g) in got.iter().enumerate() {
                    let (a, b) = ((c >> 1) as u8, (c & 1) as u8);
                    let want = self.direct(layer, beta).dbi(j, prefix, a, b);
                    self.report.record(*g, want);
                }
            }
        }
    }
}

/// Checks every identity of [`lemma_claims`] and the decoding recursion
/// against direct maximization, for every layer, slice, phase, prefix and
/// input pair, on each output vector in `outputs`.
pub fn verify_lemma1(
    spec: &CodeSpec,
    w: &BinaryInputTable,
    outputs: &[Vec<usize>],
) -> Result<Lemma1Report> {
    let mut total = Lemma1Report::default();
    for y in outputs {
        let mut run = lemma_run(spec, w, y)?;
        for layer in 1..=spec.m() {
            for i in 1..=1usize << (layer - 1) {
                for (j, family) in lemma_claims(spec, layer, i) {
                    run.check_claim(layer, i, j, family);
                }
            }
        }
        // the recursion itself, top layer, every phase and prefix
        for j in 1..=spec.n() {
            for prefix in 0..1u64 << (j - 1) {
                run.recursive(spec.m(), 1, j, prefix);
            }
        }
        total.merge(run.report);
    }
    Ok(total)
}

/// Checks a single identity `V^(j)_layer = (V^(i)_(layer-1))^family`, which
/// need not be one of [`lemma_claims`].
pub fn verify_identity(
    spec: &CodeSpec,
    w: &BinaryInputTable,
    outputs: &[Vec<usize>],
    layer: u32,
    i: usize,
    j: usize,
    family: Family,
) -> Result<Lemma1Report> {
    if layer == 0 || layer > spec.m() || i == 0 || i > 1 << (layer - 1) || j == 0 || j > 1 << layer {
        return Err(Error::NodeOutOfRange { layer, phase: j });
    }
    let mut total = Lemma1Report::default();
    for y in outputs {
        let mut run = lemma_run(spec, w, y)?;
        run.check_claim(layer, i, j, family);
        total.merge(run.report);
    }
    Ok(total)
}

/// Codeword tables of a small code and of all its truncations, built once
/// and shared by the LLR-domain oracles.
#[derive(Clone, Debug)]
pub struct CodeTables {
    m: u32,
    frozen: Vec<bool>,
    layers: Vec<Option<CodewordTable>>,
}

impl CodeTables {
    pub fn new(spec: &CodeSpec) -> Result<Self> {
        if spec.m() > MAX_M {
            return Err(Error::TooLarge(format!("exhaustive tables need m <= {MAX_M}")));
        }
        let layers = (0..=spec.m())
            .map(|layer| {
                (layer > 0).then(|| CodewordTable::new(&spec.truncated(layer)).expect("small code"))
            })
            .collect();
        let frozen = (1..=spec.n()).map(|i| spec.is_frozen(i)).collect();
        Ok(Self { m: spec.m(), frozen, layers })
    }

    fn check(&self, llrs: &[f64]) -> Result<()> {
        let n = 1usize << self.m;
        if llrs.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: llrs.len() });
        }
        Ok(())
    }

    /// Node values for one channel output.
    pub fn llr_oracle(&self, llrs: &[f64]) -> Result<LlrOracle> {
        self.check(llrs)?;
        let m = self.m;
        let mut tables = HashMap::new();
        for layer in 0..=m {
            let stride = 1usize << (m - layer);
            for beta in 1..=stride {
                let ys: Vec<f64> = (0..1usize << layer).map(|t| llrs[beta - 1 + t * stride]).collect();
                let scores = match &self.layers[layer as usize] {
                    Some(c) => c.scores(&ys),
                    None => vec![0.0, -ys[0]],
                };
                tables.insert((layer, beta), PrefixMax::new(scores));
            }
        }
        Ok(LlrOracle { tables })
    }

    /// Sequential decisions from exhaustive max-likelihood continuations:
    /// at each phase the LLR is the best score with `u_i = 0` minus the best
    /// with `u_i = 1`, the prefix being the earlier decisions.
    pub fn sequential_decode(&self, llrs: &[f64]) -> Result<BruteDecision> {
        self.check(llrs)?;
        let top = self.layers[self.m as usize].as_ref().expect("m >= 1");
        let table = PrefixMax::new(top.scores(llrs));
        let n = 1usize << self.m;
        let mut u = Vec::with_capacity(n);
        let mut leaf_llrs = Vec::with_capacity(n);
        let mut prefix = 0u64;
        for i in 1..=n {
            let l = table.block_max(prefix << 1, i) - table.block_max((prefix << 1) | 1, i);
            let bit = u8::from(!self.frozen[i - 1] && l < 0.0);
            leaf_llrs.push(l);
            u.push(bit);
            prefix = (prefix << 1) | u64::from(bit);
        }
        Ok(BruteDecision { u, leaf_llrs })
    }
}

/// LLR-domain ground truth for every node of a small code's recursion.
#[derive(Clone, Debug)]
pub struct LlrOracle {
    tables: HashMap<(u32, usize), PrefixMax>,
}

impl LlrOracle {
    pub fn new(spec: &CodeSpec, llrs: &[f64]) -> Result<Self> {
        CodeTables::new(spec)?.llr_oracle(llrs)
    }

    /// `(L, R)` of node `(layer, phase)` at slice `beta` given the decided
    /// component bits of earlier phases. `R` is `None` at the last phase.
    pub fn node(&self, layer: u32, beta: usize, prefix: &[u8]) -> (f64, Option<[f64; 2]>) {
        let t = &self.tables[&(layer, beta)];
        let j = prefix.len() + 1;
        let p = int_of(prefix);
        let l = t.block_max(p << 1, j) - t.block_max((p << 1) | 1, j);
        if j == 1usize << layer {
            return (l, None);
        }
        let r = |a: u64| {
            t.block_max((p << 2) | (a << 1), j + 1) - t.block_max((p << 2) | (a << 1) | 1, j + 1)
        };
        (l, Some([r(0), r(1)]))
    }
}

/// Result of [`brute_sequential_decode`].
#[derive(Clone, Debug, PartialEq)]
pub struct BruteDecision {
    pub u: Vec<u8>,
    pub leaf_llrs: Vec<f64>,
}

/// One-shot form of [`CodeTables::sequential_decode`].
pub fn brute_sequential_decode(spec: &CodeSpec, llrs: &[f64]) -> Result<BruteDecision> {
    CodeTables::new(spec)?.sequential_decode(llrs)
}

/// Maximum-likelihood codeword (and message) by enumerating every message
/// with zeros at the frozen positions; the first maximum in Gray-code order
/// wins ties.
pub fn brute_ml(spec: &CodeSpec, llrs: &[f64]) -> Result<(Vec<u8>, Vec<u8>)> {
    let pos = spec.info_positions();
    if pos.len() > 20 {
        return Err(Error::TooLarge(format!("ML enumeration of 2^{} codewords", pos.len())));
    }
    if llrs.len() != spec.n() {
        return Err(Error::LengthMismatch { expected: spec.n(), actual: llrs.len() });
    }
    let n = spec.n();
    let rows: Vec<Vec<u8>> = pos
        .iter()
        .map(|&p| {
            let mut e = vec![0u8; n];
            e[p - 1] = 1;
            encode_any(spec, &e)
        })
        .collect();
    let score = |c: &[u8]| c.iter().zip(llrs).fold(0.0, |acc, (&b, &l)| if b == 1 { acc - l } else { acc });
    let mut c = vec![0u8; n];
    let mut u = vec![0u8; n];
    let mut best = (score(&c), c.clone(), u.clone());
    for step in 1..1u64 << pos.len() {
        let flip = step.trailing_zeros() as usize;
        u[pos[flip] - 1] ^= 1;
        for (x, r) in c.iter_mut().zip(&rows[flip]) {
            *x ^= r;
        }
        let s = score(&c);
        if s > best.0 {
            best = (s, c.clone(), u.clone());
        }
    }
    Ok((best.1, best.2))
}
