//! LLR-domain successive-cancellation decoding of ABS+ polar codes.
//!
//! The recursion over the decoding tree depends only on the code, so it is
//! flattened once into a [`Schedule`] of steps. Each step updates the
//! per-layer arrays of a [`State`]:
//!
//! * `L`, `R`: LLR of the first bit and of the second bit given the first,
//!   for the node being processed at each layer;
//! * `saved`: `R` evaluated at the bit decided for that node, read back when
//!   the next phase reuses it;
//! * `M`: intermediate values shared by the middle and right children of a
//!   swap or add node;
//! * `B`, `H`: decided bits and the bit held over to the next phase.
//!
//! Arrays are reference counted per layer so list decoding can clone paths
//! cheaply and copy a layer only when a path writes to it.

use std::marker::PhantomData;
use std::rc::Rc;

use crate::codespec::{CodeSpec, NodeId, Transform};
use crate::llr::{
    blacktriangle_right, dottriangle_right, f_minus, f_plus, hard_decision, lozenge_inputs,
    lozenge_right, triple, Kind, LlrTriple, MidQuad, OpCounter,
};
use crate::{Error, Result, Scalar};

/// Switches for the shortcuts of the decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecoderOptions {
    /// Copy LLRs computed at an earlier step instead of recomputing them.
    pub reuse: bool,
    /// Skip `R` for right-separated nodes. When off, only the last node of
    /// each layer goes without `R`.
    pub prune: bool,
    /// Recompute every reused value and panic if the copy differs.
    pub check_reuse: bool,
    /// Overwrite a layer's bits and LLRs with garbage as soon as they are
    /// no longer supposed to be read.
    pub poison_stale: bool,
}

impl Default for DecoderOptions {
    fn default() -> Self {
        Self {
            reuse: true,
            prune: true,
            check_reuse: false,
            poison_stale: false,
        }
    }
}

impl DecoderOptions {
    /// Every shortcut disabled.
    pub fn full() -> Self {
        Self {
            reuse: false,
            prune: false,
            ..Self::default()
        }
    }

    pub fn checked() -> Self {
        Self {
            check_reuse: true,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Step {
    /// Prepare `(layer+1, 2i-1)`.
    Left {
        layer: u32,
        phase: usize,
        reuse_prev: bool,
        child_rs: bool,
        kind: Kind,
    },
    /// Prepare `(layer+1, 2i)`.
    Middle {
        layer: u32,
        phase: usize,
        left_rs: bool,
        child_rs: bool,
        kind: Kind,
    },
    /// Prepare `(layer+1, 2i+1)`.
    Right {
        layer: u32,
        phase: usize,
        child_rs: bool,
        kind: Kind,
    },
    Leaf {
        phase: usize,
        frozen: bool,
    },
    /// `B[layer] <- B[layer+1]` on the first half.
    TakeLeft { layer: u32 },
    /// `B[layer] <- H[layer]` on the first half.
    Restore { layer: u32 },
    /// `B[layer]` second half `<- B[layer+1]`.
    Stash { layer: u32 },
    Combine { layer: u32, kind: Kind },
    /// `saved[layer] <- R[layer][B[layer]]`.
    Save { layer: u32 },
    Poison { layer: u32 },
}

/// Flattened decoding tree.
#[derive(Clone, Debug)]
pub(crate) struct Schedule {
    pub m: u32,
    pub steps: Vec<Step>,
}

fn kind_of(t: Option<Transform>) -> Kind {
    match t {
        None => Kind::Plain,
        Some(Transform::Swap) => Kind::Swap,
        Some(Transform::Add) => Kind::Add,
    }
}

impl Schedule {
    pub fn new(spec: &CodeSpec, opts: &DecoderOptions) -> Self {
        let mut s = Self {
            m: spec.m(),
            steps: Vec::new(),
        };
        s.build(spec, opts, 0, 1);
        s
    }

    fn rs(spec: &CodeSpec, opts: &DecoderOptions, layer: u32, phase: usize) -> bool {
        if opts.prune {
            spec.right_separated(layer, phase)
        } else {
            phase == 1 << layer
        }
    }

    fn build(&mut self, spec: &CodeSpec, opts: &DecoderOptions, layer: u32, i: usize) {
        let rs = |l, p| Self::rs(spec, opts, l, p);
        if layer == spec.m() {
            self.steps.push(Step::Leaf {
                phase: i,
                frozen: spec.is_frozen(i),
            });
        } else {
            let up = layer + 1;
            let kind = kind_of(spec.transform(up, 2 * i));
            if opts.poison_stale && i > 1 {
                self.steps.push(Step::Poison { layer: up });
            }
            if i > 1 && spec.in_i(up, 2 * i - 2) {
                self.steps.push(Step::Restore { layer });
            } else {
                self.steps.push(Step::Left {
                    layer,
                    phase: i,
                    reuse_prev: i > 1 && !rs(up, 2 * i - 2),
                    child_rs: rs(up, 2 * i - 1),
                    kind,
                });
                self.build(spec, opts, up, 2 * i - 1);
                self.steps.push(Step::TakeLeft { layer });
            }
            self.steps.push(Step::Middle {
                layer,
                phase: i,
                left_rs: rs(up, 2 * i - 1),
                child_rs: rs(up, 2 * i),
                kind,
            });
            self.build(spec, opts, up, 2 * i);
            if kind != Kind::Plain {
                self.steps.push(Step::Stash { layer });
                self.steps.push(Step::Right {
                    layer,
                    phase: i,
                    child_rs: rs(up, 2 * i + 1),
                    kind,
                });
                self.build(spec, opts, up, 2 * i + 1);
            }
            self.steps.push(Step::Combine { layer, kind });
        }
        if !rs(layer, i) {
            self.steps.push(Step::Save { layer });
        }
    }

    /// Nodes in the order their inputs are prepared, root first.
    pub fn node_order(&self) -> Vec<NodeId> {
        let mut out = vec![NodeId::ROOT];
        for step in &self.steps {
            match *step {
                Step::Left { layer, phase, .. } => out.push(NodeId::new(layer + 1, 2 * phase - 1)),
                Step::Middle { layer, phase, .. } => out.push(NodeId::new(layer + 1, 2 * phase)),
                Step::Right { layer, phase, .. } => out.push(NodeId::new(layer + 1, 2 * phase + 1)),
                _ => {}
            }
        }
        out
    }
}

/// Soft values of one slice of a layer.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Slot<S> {
    pub l: S,
    pub r: [S; 2],
    pub saved: S,
}

impl<S: Scalar> Slot<S> {
    fn unset() -> Self {
        let nan = S::nan();
        Self {
            l: nan,
            r: [nan; 2],
            saved: nan,
        }
    }

    #[inline]
    fn triple(&self) -> LlrTriple<S> {
        LlrTriple { l: self.l, r: self.r }
    }
}

/// Per-path decoder arrays. `bits[layer]` holds `B` followed by `H`.
#[derive(Clone, Debug)]
pub(crate) struct State<S> {
    soft: Vec<Rc<Vec<Slot<S>>>>,
    mid: Vec<Rc<Vec<MidQuad<S>>>>,
    bits: Vec<Rc<Vec<u8>>>,
}

/// Value of a node's inputs as prepared by its parent.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeTrace<S> {
    pub node: NodeId,
    /// `L` per slice.
    pub l: Vec<S>,
    /// `R(.;0), R(.;1)` per slice, when the node needs them.
    pub r: Option<Vec<[S; 2]>>,
}

#[track_caller]
fn check_same<S: Scalar>(copied: S, direct: S, what: &str, layer: u32, phase: usize, beta: usize) {
    assert!(
        copied == direct,
        "reused {what} differs from recomputation at ({layer}, {phase}) slice {beta}: {copied:?} vs {direct:?}"
    );
}

impl<S: Scalar> State<S> {
    pub fn new(llrs: &[S], m: u32) -> Self {
        let mut soft = Vec::with_capacity(m as usize + 1);
        let mut mid = Vec::with_capacity(m as usize + 1);
        let mut bits = Vec::with_capacity(m as usize + 1);
        for layer in 0..=m {
            let len = 1usize << (m - layer);
            let mut slots = vec![Slot::unset(); len];
            if layer == 0 {
                for (s, &l) in slots.iter_mut().zip(llrs) {
                    s.l = l;
                }
            }
            soft.push(Rc::new(slots));
            mid.push(Rc::new(vec![MidQuad::unset(); len / 2]));
            bits.push(Rc::new(vec![0; len + len / 2]));
        }
        Self { soft, mid, bits }
    }

    #[inline]
    pub fn leaf_llr(&self) -> S {
        self.soft.last().expect("leaf layer")[0].l
    }

    #[inline]
    pub fn set_leaf(&mut self, bit: u8) {
        Rc::make_mut(self.bits.last_mut().expect("leaf layer"))[0] = bit;
    }

    pub fn codeword(&self) -> Vec<u8> {
        let b = &self.bits[0];
        b[..b.len() * 2 / 3].to_vec()
    }

    pub fn trace(&self, step: &Step) -> Option<NodeTrace<S>> {
        let (layer, node, child_rs) = match *step {
            Step::Left { layer, phase, child_rs, .. } => (layer, 2 * phase - 1, child_rs),
            Step::Middle { layer, phase, child_rs, .. } => (layer, 2 * phase, child_rs),
            Step::Right { layer, phase, child_rs, .. } => (layer, 2 * phase + 1, child_rs),
            _ => return None,
        };
        let soft = &self.soft[layer as usize + 1];
        Some(NodeTrace {
            node: NodeId::new(layer + 1, node),
            l: soft.iter().map(|s| s.l).collect(),
            r: (!child_rs).then(|| soft.iter().map(|s| s.r).collect()),
        })
    }

    /// `B` of `layer` (length `len`) and the child layer's `B` (length `len / 2`).
    #[inline]
    fn bits_pair(&mut self, layer: u32) -> (&mut [u8], &mut [u8], &[u8]) {
        let (lo, hi) = self.bits.split_at_mut(layer as usize + 1);
        let dst = Rc::make_mut(&mut lo[layer as usize]);
        let len = dst.len() * 2 / 3;
        let (b, h) = dst.split_at_mut(len);
        let child = &hi[0][..len / 2];
        (b, h, child)
    }

    /// Runs a non-leaf step.
    pub fn exec(&mut self, step: &Step, opts: &DecoderOptions, ops: &mut OpCounter) {
        match *step {
            Step::Left { layer, phase, reuse_prev, child_rs, kind } => {
                self.left(layer, phase, reuse_prev, child_rs, kind, opts, ops)
            }
            Step::Middle { layer, phase, left_rs, child_rs, kind } => {
                self.middle(layer, phase, left_rs, child_rs, kind, opts, ops)
            }
            Step::Right { layer, phase, child_rs, kind } => {
                self.right(layer, phase, child_rs, kind, opts, ops)
            }
            Step::TakeLeft { layer } => {
                let (b, _, child) = self.bits_pair(layer);
                b[..child.len()].copy_from_slice(child);
            }
            Step::Restore { layer } => {
                let bits = Rc::make_mut(&mut self.bits[layer as usize]);
                let half = bits.len() / 3;
                let (b, h) = bits.split_at_mut(2 * half);
                b[..half].copy_from_slice(h);
            }
            Step::Stash { layer } => {
                let (b, _, child) = self.bits_pair(layer);
                b[child.len()..].copy_from_slice(child);
            }
            Step::Combine { layer, kind } => {
                let (b, h, child) = self.bits_pair(layer);
                let (b1, b2) = b.split_at_mut(child.len());
                let it = b1.iter_mut().zip(b2.iter_mut()).zip(h.iter_mut()).zip(child);
                match kind {
                    Kind::Plain => {
                        for (((r1, r2), _), &rc) in it {
                            *r1 ^= rc;
                            *r2 = rc;
                        }
                    }
                    Kind::Swap => {
                        for (((r1, r2), hold), &rc) in it {
                            *r1 ^= rc;
                            *hold = *r2;
                            *r2 = rc;
                        }
                    }
                    Kind::Add => {
                        for (((r1, r2), hold), &rc) in it {
                            *r1 ^= *r2 ^ rc;
                            *r2 ^= rc;
                            *hold = rc;
                        }
                    }
                }
            }
            Step::Save { layer } => {
                let bits = &self.bits[layer as usize];
                let soft = Rc::make_mut(&mut self.soft[layer as usize]);
                for (s, &bit) in soft.iter_mut().zip(bits.iter()) {
                    s.saved = s.r[usize::from(bit)];
                }
            }
            Step::Poison { layer } => {
                for s in Rc::make_mut(&mut self.soft[layer as usize]).iter_mut() {
                    s.l = S::nan();
                    s.r = [S::nan(); 2];
                }
                let bits = Rc::make_mut(&mut self.bits[layer as usize]);
                let len = bits.len() * 2 / 3;
                bits[..len].fill(2);
            }
            Step::Leaf { .. } => unreachable!("leaves are decided by the caller"),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn left(
        &mut self,
        layer: u32,
        phase: usize,
        reuse_prev: bool,
        child_rs: bool,
        kind: Kind,
        opts: &DecoderOptions,
        ops: &mut OpCounter,
    ) {
        let (lo, hi) = self.soft.split_at_mut(layer as usize + 1);
        let (pa, pb) = lo[layer as usize].split_at(hi[0].len());
        let child = Rc::make_mut(&mut hi[0]);
        let reuse = opts.reuse && reuse_prev;
        let mut scratch = OpCounter::new();
        if kind == Kind::Plain || child_rs {
            for (beta, (c, (a, b))) in child.iter_mut().zip(pa.iter().zip(pb)).enumerate() {
                c.l = if reuse {
                    if opts.check_reuse {
                        let direct = f_minus(a.l, b.l, &mut scratch);
                        check_same(c.saved, direct, "L", layer + 1, 2 * phase - 1, beta);
                    }
                    c.saved
                } else {
                    f_minus(a.l, b.l, ops)
                };
                if !child_rs {
                    c.r = [f_plus(a.l, b.l, 0, ops), f_plus(a.l, b.l, 1, ops)];
                }
            }
            return;
        }
        let mid = Rc::make_mut(&mut self.mid[layer as usize]);
        let it = child.iter_mut().zip(mid.iter_mut()).zip(pa.iter().zip(pb));
        for (beta, ((c, quad), (a, b))) in it.enumerate() {
            c.l = if reuse {
                if opts.check_reuse {
                    let direct = f_minus(a.l, b.l, &mut scratch);
                    check_same(c.saved, direct, "L", layer + 1, 2 * phase - 1, beta);
                }
                c.saved
            } else {
                f_minus(a.l, b.l, ops)
            };
            let (a, b) = (a.triple(), b.triple());
            for u1 in 0..2u8 {
                let (m0, m1, rout) = triple(kind, lozenge_inputs(&a, &b, u1, ops), ops);
                quad.m[usize::from(u1)] = [m0, m1];
                c.r[usize::from(u1)] = rout;
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn middle(
        &mut self,
        layer: u32,
        phase: usize,
        left_rs: bool,
        child_rs: bool,
        kind: Kind,
        opts: &DecoderOptions,
        ops: &mut OpCounter,
    ) {
        let (lo, hi) = self.soft.split_at_mut(layer as usize + 1);
        let (pa, pb) = lo[layer as usize].split_at(hi[0].len());
        let child = Rc::make_mut(&mut hi[0]);
        let bits = &self.bits[layer as usize][..pa.len()];
        let reuse_l = opts.reuse && !left_rs;
        let mut scratch = OpCounter::new();
        if kind == Kind::Plain {
            let it = child.iter_mut().zip(bits).zip(pa.iter().zip(pb));
            for (beta, ((c, &r1), (a, b))) in it.enumerate() {
                c.l = if reuse_l {
                    if opts.check_reuse {
                        let direct = f_plus(a.l, b.l, r1, &mut scratch);
                        check_same(c.saved, direct, "L", layer + 1, 2 * phase, beta);
                    }
                    c.saved
                } else {
                    f_plus(a.l, b.l, r1, ops)
                };
                if !child_rs {
                    let (a, b) = (a.triple(), b.triple());
                    c.r = [lozenge_right(&a, &b, r1, 0, ops), lozenge_right(&a, &b, r1, 1, ops)];
                }
            }
            return;
        }
        let it = child.iter_mut().zip(bits).zip(pa.iter().zip(pb));
        if reuse_l {
            let quads: &[MidQuad<S>] = &self.mid[layer as usize];
            for (beta, (((c, &r1), (a, b)), quad)) in it.zip(quads).enumerate() {
                if opts.check_reuse {
                    let (m0, m1, rout) =
                        triple(kind, lozenge_inputs(&a.triple(), &b.triple(), r1, &mut scratch), &mut scratch);
                    check_same(c.saved, rout, "L", layer + 1, 2 * phase, beta);
                    check_same(quad.get(r1, 0), m0, "M", layer + 1, 2 * phase, beta);
                    check_same(quad.get(r1, 1), m1, "M", layer + 1, 2 * phase, beta);
                }
                c.l = c.saved;
                if !child_rs {
                    c.r = quad.m[usize::from(r1)];
                }
            }
        } else {
            let quads = Rc::make_mut(&mut self.mid[layer as usize]);
            for (((c, &r1), (a, b)), quad) in it.zip(quads.iter_mut()) {
                let (m0, m1, rout) = triple(kind, lozenge_inputs(&a.triple(), &b.triple(), r1, ops), ops);
                quad.m[usize::from(r1)] = [m0, m1];
                c.l = rout;
                if !child_rs {
                    c.r = [m0, m1];
                }
            }
        }
    }

    fn right(
        &mut self,
        layer: u32,
        phase: usize,
        child_rs: bool,
        kind: Kind,
        opts: &DecoderOptions,
        ops: &mut OpCounter,
    ) {
        let (lo, hi) = self.soft.split_at_mut(layer as usize + 1);
        let (pa, pb) = lo[layer as usize].split_at(hi[0].len());
        let child = Rc::make_mut(&mut hi[0]);
        let (b1, b2) = self.bits[layer as usize][..2 * pa.len()].split_at(pa.len());
        let quads = &self.mid[layer as usize];
        let mut scratch = OpCounter::new();
        let it = child.iter_mut().zip(b1.iter().zip(b2)).zip(pa.iter().zip(pb)).zip(quads.iter());
        for (beta, (((c, (&r1, &r2)), (a, b)), quad)) in it.enumerate() {
            let (a, b) = (a.triple(), b.triple());
            c.l = if opts.reuse {
                let v = quad.get(r1, r2);
                if opts.check_reuse {
                    let (m0, m1, _) =
                        triple(kind, lozenge_inputs(&a, &b, r1, &mut scratch), &mut scratch);
                    check_same(v, [m0, m1][usize::from(r2)], "L", layer + 1, 2 * phase + 1, beta);
                }
                v
            } else {
                let (m0, m1, _) = triple(kind, lozenge_inputs(&a, &b, r1, ops), ops);
                [m0, m1][usize::from(r2)]
            };
            if !child_rs {
                c.r = std::array::from_fn(|x| match kind {
                    Kind::Swap => blacktriangle_right(&a, &b, r1, r2, x as u8, ops),
                    _ => dottriangle_right(&a, &b, r1, r2, x as u8, ops),
                });
            }
        }
    }
}

pub(crate) fn check_llrs<S: Scalar>(spec: &CodeSpec, llrs: &[S]) -> Result<()> {
    if llrs.len() != spec.n() {
        return Err(Error::LengthMismatch {
            expected: spec.n(),
            actual: llrs.len(),
        });
    }
    match llrs.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonFiniteLlr(i)),
        None => Ok(()),
    }
}

/// Result of one SC decoding.
#[derive(Clone, Debug, PartialEq)]
pub struct ScOutput<S> {
    /// Decided message, frozen positions included.
    pub u: Vec<u8>,
    pub codeword: Vec<u8>,
    /// LLR each leaf decision was taken on.
    pub leaf_llrs: Vec<S>,
    pub ops: OpCounter,
}

/// SC decoder bound to one code.
#[derive(Clone, Debug)]
pub struct ScDecoder<'a, S> {
    spec: &'a CodeSpec,
    opts: DecoderOptions,
    schedule: Schedule,
    _scalar: PhantomData<S>,
}

impl<'a, S: Scalar> ScDecoder<'a, S> {
    pub fn new(spec: &'a CodeSpec) -> Self {
        Self::with_options(spec, DecoderOptions::default())
    }

    pub fn with_options(spec: &'a CodeSpec, opts: DecoderOptions) -> Self {
        Self {
            spec,
            opts,
            schedule: Schedule::new(spec, &opts),
            _scalar: PhantomData,
        }
    }

    pub fn spec(&self) -> &'a CodeSpec {
        self.spec
    }

    pub fn options(&self) -> DecoderOptions {
        self.opts
    }

    /// Nodes in the order the decoder visits them.
    pub fn node_order(&self) -> Vec<NodeId> {
        self.schedule.node_order()
    }

    pub fn decode(&self, llrs: &[S]) -> Result<ScOutput<S>> {
        self.run(llrs, None, None)
    }

    /// Decodes with every leaf decision replaced by the true bit; the leaf
    /// LLRs then show how each synthesized channel behaves given a correct
    /// past.
    pub fn decode_genie(&self, llrs: &[S], u: &[u8]) -> Result<ScOutput<S>> {
        if u.len() != self.spec.n() {
            return Err(Error::LengthMismatch {
                expected: self.spec.n(),
                actual: u.len(),
            });
        }
        self.run(llrs, Some(u), None)
    }

    /// Decodes and records the inputs prepared for every node.
    pub fn decode_traced(&self, llrs: &[S]) -> Result<(ScOutput<S>, Vec<NodeTrace<S>>)> {
        let mut trace = vec![NodeTrace {
            node: NodeId::ROOT,
            l: llrs.to_vec(),
            r: None,
        }];
        let out = self.run(llrs, None, Some(&mut trace))?;
        Ok((out, trace))
    }

    fn run(
        &self,
        llrs: &[S],
        genie: Option<&[u8]>,
        mut trace: Option<&mut Vec<NodeTrace<S>>>,
    ) -> Result<ScOutput<S>> {
        check_llrs(self.spec, llrs)?;
        let n = self.spec.n();
        let mut state = State::new(llrs, self.schedule.m);
        let mut ops = OpCounter::new();
        let mut u = vec![0u8; n];
        let mut leaf_llrs = vec![S::zero(); n];
        for step in &self.schedule.steps {
            match *step {
                Step::Leaf { phase, frozen } => {
                    let l = state.leaf_llr();
                    let bit = match genie {
                        Some(g) => g[phase - 1],
                        None if frozen => 0,
                        None => hard_decision(l),
                    };
                    state.set_leaf(bit);
                    u[phase - 1] = bit;
                    leaf_llrs[phase - 1] = l;
                }
                _ => {
                    state.exec(step, &self.opts, &mut ops);
                    if let Some(t) = trace.as_deref_mut() {
                        t.extend(state.trace(step));
                    }
                }
            }
        }
        Ok(ScOutput {
            u,
            codeword: state.codeword(),
            leaf_llrs,
            ops,
        })
    }
}
