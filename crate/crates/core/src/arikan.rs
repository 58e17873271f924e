//! Classical polar SC and SC-list decoding with min-sum kernels.
//!
//! Kept independent of the ABS+ decoders apart from the two scalar kernels,
//! so that comparing the two on transform-free codes is a real check.
//! Works on the natural-order butterfly `x = (v_a ^ v_b, v_b)`, where `v_a`
//! and `v_b` encode the first and second half of the message.

use std::cmp::Ordering;
use std::rc::Rc;

use crate::codespec::CodeSpec;
use crate::crc::crc_check;
use crate::llr::{f_minus, f_plus, hard_decision, OpCounter};
use crate::sc::ScOutput;
use crate::scl::{Candidate, ListConfig, SclOutput};
use crate::{Error, Result, Scalar};

/// Classical polar decoder for one frozen set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArikanDecoder {
    m: u32,
    frozen: Vec<bool>,
}

impl ArikanDecoder {
    /// `frozen` holds 1-based message positions.
    pub fn new(m: u32, frozen: impl IntoIterator<Item = usize>) -> Result<Self> {
        if m == 0 || m > 24 {
            return Err(Error::InvalidConfig(format!("m = {m} outside 1..=24")));
        }
        let n = 1usize << m;
        let mut mask = vec![false; n];
        for i in frozen {
            if i == 0 || i > n {
                return Err(Error::InvalidConfig(format!("frozen index {i} outside 1..={n}")));
            }
            mask[i - 1] = true;
        }
        Ok(Self { m, frozen: mask })
    }

    /// Decoder for the frozen set of `spec`; its transforms are ignored.
    pub fn from_spec(spec: &CodeSpec) -> Self {
        Self {
            m: spec.m(),
            frozen: (1..=spec.n()).map(|i| spec.is_frozen(i)).collect(),
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.frozen.len()
    }

    fn check<S: Scalar>(&self, llrs: &[S]) -> Result<()> {
        if llrs.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                actual: llrs.len(),
            });
        }
        match llrs.iter().position(|x| !x.is_finite()) {
            Some(i) => Err(Error::NonFiniteLlr(i)),
            None => Ok(()),
        }
    }

    pub fn sc<S: Scalar>(&self, llrs: &[S]) -> Result<ScOutput<S>> {
        self.check(llrs)?;
        let n = self.n();
        let mut bufs: Vec<Vec<S>> = (1..=self.m).map(|d| vec![S::zero(); n >> d]).collect();
        let mut out = ScOutput {
            u: vec![0; n],
            codeword: vec![0; n],
            leaf_llrs: vec![S::zero(); n],
            ops: OpCounter::new(),
        };
        sc_node(
            llrs,
            &mut bufs,
            &self.frozen,
            &mut out.u,
            &mut out.codeword,
            &mut out.leaf_llrs,
            &mut out.ops,
        );
        Ok(out)
    }

    pub fn scl<S: Scalar>(&self, llrs: &[S], cfg: &ListConfig) -> Result<SclOutput<S>> {
        self.check(llrs)?;
        if cfg.list_size == 0 {
            return Err(Error::InvalidConfig("list size must be at least 1".into()));
        }
        let m = self.m as usize;
        let n = self.n();
        let mut ops = OpCounter::new();
        let root = ListPath {
            llr: (0..=m)
                .map(|d| Rc::new(if d == 0 { llrs.to_vec() } else { vec![S::zero(); n >> d] }))
                .collect(),
            left: (0..=m).map(|d| Rc::new(vec![0u8; n >> d])).collect(),
            u: Vec::with_capacity(n),
            metric: S::zero(),
            codeword: Vec::new(),
        };
        let mut paths = vec![root];
        for phase in 0..n {
            for p in &mut paths {
                p.descend(phase, m, &mut ops);
            }
            if self.frozen[phase] {
                for p in &mut paths {
                    let alpha = p.llr[m][0];
                    if hard_decision(alpha) == 1 {
                        p.metric = p.metric + alpha.abs();
                    }
                    p.decide(phase, m, 0);
                }
                continue;
            }
            let mut cands: Vec<Fork<S>> = Vec::with_capacity(2 * paths.len());
            for (parent, p) in paths.iter().enumerate() {
                let alpha = p.llr[m][0];
                let favoured = hard_decision(alpha);
                for bit in 0..2u8 {
                    let penalty = if bit == favoured { S::zero() } else { alpha.abs() };
                    cands.push(Fork {
                        metric: if bit == favoured { p.metric } else { p.metric + alpha.abs() },
                        penalty,
                        parent,
                        bit,
                    });
                }
            }
            cands.sort_by(fork_order);
            cands.truncate(cfg.list_size);
            cands.sort_by_key(|c| (c.parent, c.bit));
            let mut next = Vec::with_capacity(cands.len());
            for (idx, c) in cands.iter().enumerate() {
                let shared = cands.get(idx + 1).is_some_and(|d| d.parent == c.parent);
                let mut child = if shared {
                    paths[c.parent].clone()
                } else {
                    std::mem::replace(&mut paths[c.parent], ListPath::empty())
                };
                child.metric = c.metric;
                child.decide(phase, m, c.bit);
                next.push(child);
            }
            paths = next;
        }
        let mut candidates: Vec<Candidate<S>> = paths
            .into_iter()
            .map(|p| {
                let crc_ok = cfg.crc.map(|crc| {
                    let info: Vec<u8> = p
                        .u
                        .iter()
                        .zip(&self.frozen)
                        .filter(|(_, &f)| !f)
                        .map(|(&b, _)| b)
                        .collect();
                    crc_check(&info, &crc)
                });
                Candidate {
                    u: p.u,
                    codeword: p.codeword,
                    metric: p.metric,
                    crc_ok,
                }
            })
            .collect();
        candidates.sort_by(|a, b| a.metric.partial_cmp(&b.metric).expect("finite metrics"));
        if let Some(i) = candidates.iter().position(|c| c.crc_ok == Some(true)) {
            let c = candidates.remove(i);
            candidates.insert(0, c);
        }
        Ok(SclOutput { candidates, ops })
    }
}

fn sc_node<S: Scalar>(
    llr: &[S],
    bufs: &mut [Vec<S>],
    frozen: &[bool],
    u: &mut [u8],
    x: &mut [u8],
    leaf: &mut [S],
    ops: &mut OpCounter,
) {
    let n = llr.len();
    if n == 1 {
        let bit = if frozen[0] { 0 } else { hard_decision(llr[0]) };
        u[0] = bit;
        x[0] = bit;
        leaf[0] = llr[0];
        return;
    }
    let half = n / 2;
    let (child, rest) = bufs.split_first_mut().expect("one buffer per depth");
    let (y1, y2) = llr.split_at(half);
    for t in 0..half {
        child[t] = f_minus(y1[t], y2[t], ops);
    }
    let (xa, xb) = x.split_at_mut(half);
    let (ua, ub) = u.split_at_mut(half);
    let (fa, fb) = frozen.split_at(half);
    let (la, lb) = leaf.split_at_mut(half);
    sc_node(child, rest, fa, ua, xa, la, ops);
    for t in 0..half {
        child[t] = f_plus(y1[t], y2[t], xa[t], ops);
    }
    sc_node(child, rest, fb, ub, xb, lb, ops);
    for t in 0..half {
        xa[t] ^= xb[t];
    }
}

#[derive(Clone)]
struct ListPath<S> {
    /// `llr[d]` feeds the current node at depth `d` (length `n >> d`).
    llr: Vec<Rc<Vec<S>>>,
    /// `left[d]`: codeword of the last finished left child at depth `d`.
    left: Vec<Rc<Vec<u8>>>,
    u: Vec<u8>,
    metric: S,
    codeword: Vec<u8>,
}

impl<S: Scalar> ListPath<S> {
    fn empty() -> Self {
        Self {
            llr: Vec::new(),
            left: Vec::new(),
            u: Vec::new(),
            metric: S::zero(),
            codeword: Vec::new(),
        }
    }

    /// Computes the leaf LLR of `phase`, starting from the deepest node whose
    /// right branch is entered at this phase.
    fn descend(&mut self, phase: usize, m: usize, ops: &mut OpCounter) {
        let top = if phase == 0 {
            0
        } else {
            let d = m - 1 - phase.trailing_zeros() as usize;
            let (src, dst) = self.llr.split_at_mut(d + 1);
            let parent = &src[d];
            let half = parent.len() / 2;
            let left = &self.left[d + 1];
            let out = Rc::make_mut(&mut dst[0]);
            for t in 0..half {
                out[t] = f_plus(parent[t], parent[half + t], left[t], ops);
            }
            d + 1
        };
        for d in top..m {
            let (src, dst) = self.llr.split_at_mut(d + 1);
            let parent = &src[d];
            let half = parent.len() / 2;
            let out = Rc::make_mut(&mut dst[0]);
            for t in 0..half {
                out[t] = f_minus(parent[t], parent[half + t], ops);
            }
        }
    }

    /// Records `bit` and folds finished right children into their parents.
    fn decide(&mut self, phase: usize, m: usize, bit: u8) {
        self.u.push(bit);
        let mut cur = vec![bit];
        let mut depth = m;
        while depth > 0 && (phase >> (m - depth)) & 1 == 1 {
            let left = &self.left[depth];
            let mut up = Vec::with_capacity(2 * cur.len());
            up.extend(left.iter().zip(&cur).map(|(a, b)| a ^ b));
            up.extend_from_slice(&cur);
            cur = up;
            depth -= 1;
        }
        if depth == 0 {
            self.codeword = cur;
        } else {
            self.left[depth] = Rc::new(cur);
        }
    }
}

struct Fork<S> {
    metric: S,
    penalty: S,
    parent: usize,
    bit: u8,
}

fn fork_order<S: Scalar>(a: &Fork<S>, b: &Fork<S>) -> Ordering {
    a.metric
        .partial_cmp(&b.metric)
        .expect("finite metrics")
        .then_with(|| a.penalty.partial_cmp(&b.penalty).expect("finite penalties"))
        .then((a.parent, a.bit).cmp(&(b.parent, b.bit)))
}
