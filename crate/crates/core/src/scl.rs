//! LLR-domain SC-list decoding of ABS+ polar codes.

use std::cmp::Ordering;
use std::marker::PhantomData;

use crate::codespec::CodeSpec;
use crate::crc::{crc_check, CrcSpec};
use crate::encoder::extract_info;
use crate::llr::{hard_decision, OpCounter};
use crate::sc::{check_llrs, DecoderOptions, Schedule, State, Step};
use crate::{Error, Result, Scalar};

/// List size and optional CRC used to pick the output path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ListConfig {
    pub list_size: usize,
    pub crc: Option<CrcSpec>,
}

impl ListConfig {
    pub fn new(list_size: usize) -> Self {
        Self {
            list_size,
            crc: None,
        }
    }

    /// List size `list_size` with the CRC declared by `spec`, if any.
    pub fn for_spec(spec: &CodeSpec, list_size: usize) -> Self {
        Self {
            list_size,
            crc: spec.crc().copied(),
        }
    }

    pub fn with_crc(mut self, crc: Option<CrcSpec>) -> Self {
        self.crc = crc;
        self
    }

    pub fn validate(&self, spec: &CodeSpec) -> Result<()> {
        if self.list_size == 0 {
            return Err(Error::InvalidConfig("list size must be at least 1".into()));
        }
        if let Some(crc) = &self.crc {
            if crc.width() >= spec.unfrozen_len() {
                return Err(Error::InvalidConfig(format!(
                    "CRC width {} must be below the {} unfrozen positions",
                    crc.width,
                    spec.unfrozen_len()
                )));
            }
        }
        Ok(())
    }
}

/// One surviving path.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate<S> {
    pub u: Vec<u8>,
    pub codeword: Vec<u8>,
    pub metric: S,
    /// CRC verdict on the unfrozen bits, when a CRC is configured.
    pub crc_ok: Option<bool>,
}

/// Surviving paths, best first.
#[derive(Clone, Debug, PartialEq)]
pub struct SclOutput<S> {
    pub candidates: Vec<Candidate<S>>,
    pub ops: OpCounter,
}

impl<S> SclOutput<S> {
    pub fn best(&self) -> &Candidate<S> {
        &self.candidates[0]
    }
}

/// Metric of the continuation of a path with metric `pm` by `bit`, where
/// `alpha` is the leaf LLR: unchanged when `bit` agrees with the sign of
/// `alpha`, otherwise increased by `|alpha|`.
#[inline]
pub fn path_metric_update<S: Scalar>(pm: S, alpha: S, bit: u8) -> S {
    if bit == hard_decision(alpha) {
        pm
    } else {
        pm + alpha.abs()
    }
}

/// Continuation kept by [`split_and_prune`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Survivor<S> {
    pub parent: usize,
    pub bit: u8,
    pub metric: S,
}

#[derive(Clone, Copy)]
struct Cand<S> {
    metric: S,
    penalty: S,
    parent: usize,
    bit: u8,
}

fn cand_order<S: Scalar>(a: &Cand<S>, b: &Cand<S>) -> Ordering {
    a.metric
        .partial_cmp(&b.metric)
        .expect("finite metrics")
        .then_with(|| a.penalty.partial_cmp(&b.penalty).expect("finite"))
        .then(a.parent.cmp(&b.parent))
        .then(a.bit.cmp(&b.bit))
}

/// Extends every path by both bits and keeps the `list_size` smallest
/// metrics. Equal metrics go to the continuation with the smaller penalty
/// (so rounding never lets a penalized path beat an agreeing one), then to
/// the lower parent index, then to bit 0. Survivors are returned ordered by
/// parent, then bit.
pub fn split_and_prune<S: Scalar>(metrics: &[S], alphas: &[S], list_size: usize) -> Vec<Survivor<S>> {
    assert_eq!(metrics.len(), alphas.len());
    let mut cands: Vec<Cand<S>> = Vec::with_capacity(2 * metrics.len());
    for (parent, (&pm, &alpha)) in metrics.iter().zip(alphas).enumerate() {
        for bit in 0..2u8 {
            let metric = path_metric_update(pm, alpha, bit);
            let penalty = if bit == hard_decision(alpha) { S::zero() } else { alpha.abs() };
            cands.push(Cand { metric, penalty, parent, bit });
        }
    }
    if cands.len() > list_size {
        cands.select_nth_unstable_by(list_size - 1, cand_order);
        cands.truncate(list_size);
    }
    cands.sort_unstable_by(|a, b| a.parent.cmp(&b.parent).then(a.bit.cmp(&b.bit)));
    cands
        .into_iter()
        .map(|c| Survivor {
            parent: c.parent,
            bit: c.bit,
            metric: c.metric,
        })
        .collect()
}

struct Path<S> {
    state: State<S>,
    metric: S,
    /// Index of the last decision in the arena.
    tail: usize,
}

const NONE: usize = usize::MAX;

/// Decided bits of all paths as a tree of `(parent, bit)` records.
#[derive(Default)]
struct Arena {
    nodes: Vec<(usize, u8)>,
}

impl Arena {
    fn push(&mut self, parent: usize, bit: u8) -> usize {
        self.nodes.push((parent, bit));
        self.nodes.len() - 1
    }

    fn bits(&self, mut tail: usize, n: usize) -> Vec<u8> {
        let mut u = vec![0u8; n];
        for slot in u.iter_mut().rev() {
            let (parent, bit) = self.nodes[tail];
            *slot = bit;
            tail = parent;
        }
        debug_assert_eq!(tail, NONE);
        u
    }
}

/// SCL decoder bound to one code.
#[derive(Clone, Debug)]
pub struct SclDecoder<'a, S> {
    spec: &'a CodeSpec,
    cfg: ListConfig,
    opts: DecoderOptions,
    schedule: Schedule,
    _scalar: PhantomData<S>,
}

impl<'a, S: Scalar> SclDecoder<'a, S> {
    pub fn new(spec: &'a CodeSpec, cfg: ListConfig) -> Result<Self> {
        Self::with_options(spec, cfg, DecoderOptions::default())
    }

    pub fn with_options(spec: &'a CodeSpec, cfg: ListConfig, opts: DecoderOptions) -> Result<Self> {
        cfg.validate(spec)?;
        Ok(Self {
            spec,
            cfg,
            opts,
            schedule: Schedule::new(spec, &opts),
            _scalar: PhantomData,
        })
    }

    pub fn config(&self) -> ListConfig {
        self.cfg
    }

    pub fn decode(&self, llrs: &[S]) -> Result<SclOutput<S>> {
        check_llrs(self.spec, llrs)?;
        let n = self.spec.n();
        let mut ops = OpCounter::new();
        let mut arena = Arena::default();
        let mut paths = vec![Path {
            state: State::new(llrs, self.schedule.m),
            metric: S::zero(),
            tail: NONE,
        }];
        let mut metrics = Vec::with_capacity(self.cfg.list_size);
        let mut alphas = Vec::with_capacity(self.cfg.list_size);
        for step in &self.schedule.steps {
            match *step {
                Step::Leaf { frozen: true, .. } => {
                    for p in &mut paths {
                        p.metric = path_metric_update(p.metric, p.state.leaf_llr(), 0);
                        p.state.set_leaf(0);
                        p.tail = arena.push(p.tail, 0);
                    }
                }
                Step::Leaf { frozen: false, .. } => {
                    metrics.clear();
                    alphas.clear();
                    for p in &paths {
                        metrics.push(p.metric);
                        alphas.push(p.state.leaf_llr());
                    }
                    let survivors = split_and_prune(&metrics, &alphas, self.cfg.list_size);
                    let mut uses = vec![0usize; paths.len()];
                    for s in &survivors {
                        uses[s.parent] += 1;
                    }
                    let mut old: Vec<Option<Path<S>>> = paths.drain(..).map(Some).collect();
                    for s in survivors {
                        uses[s.parent] -= 1;
                        let mut p = if uses[s.parent] == 0 {
                            old[s.parent].take().expect("parent alive")
                        } else {
                            let src = old[s.parent].as_ref().expect("parent alive");
                            Path {
                                state: src.state.clone(),
                                metric: src.metric,
                                tail: src.tail,
                            }
                        };
                        p.metric = s.metric;
                        p.state.set_leaf(s.bit);
                        p.tail = arena.push(p.tail, s.bit);
                        paths.push(p);
                    }
                }
                _ => {
                    for p in &mut paths {
                        p.state.exec(step, &self.opts, &mut ops);
                    }
                }
            }
        }
        let mut candidates: Vec<Candidate<S>> = paths
            .iter()
            .map(|p| {
                let u = arena.bits(p.tail, n);
                let crc_ok = self.cfg.crc.map(|crc| crc_check(&extract_info(self.spec, &u), &crc));
                Candidate {
                    codeword: p.state.codeword(),
                    u,
                    metric: p.metric,
                    crc_ok,
                }
            })
            .collect();
        rank(&mut candidates);
        Ok(SclOutput { candidates, ops })
    }
}

/// Orders by metric (stable, so earlier paths win ties) and moves the best
/// CRC-passing candidate to the front.
pub(crate) fn rank<S: Scalar>(candidates: &mut [Candidate<S>]) {
    candidates.sort_by(|a, b| a.metric.partial_cmp(&b.metric).expect("finite metrics"));
    if let Some(i) = candidates.iter().position(|c| c.crc_ok == Some(true)) {
        candidates[..=i].rotate_right(1);
    }
}
