//! Min-sum kernels for single- and double-bit-input LLRs.
//!
//! Every kernel takes an [`OpCounter`] and records the additions and
//! comparisons it performs, so decoders can report their arithmetic cost.

use std::ops::AddAssign;

use crate::Scalar;

/// Arithmetic operations spent on LLRs.
///
/// Negations are tracked separately from additions since they are free in
/// most hardware implementations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct OpCounter {
    pub additions: u64,
    pub comparisons: u64,
    pub negations: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total(&self) -> u64 {
        self.additions + self.comparisons
    }

    #[inline]
    fn add(&mut self, n: u64) {
        self.additions += n;
    }

    #[inline]
    fn cmp(&mut self, n: u64) {
        self.comparisons += n;
    }
}

impl AddAssign for OpCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.additions += rhs.additions;
        self.comparisons += rhs.comparisons;
        self.negations += rhs.negations;
    }
}

/// LLR description of a double-bit-input channel: `l` for the first bit with
/// the second one unknown, `r[b]` for the second bit given the first is `b`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LlrTriple<S> {
    pub l: S,
    pub r: [S; 2],
}

impl<S: Scalar> LlrTriple<S> {
    pub fn new(l: S, r0: S, r1: S) -> Self {
        Self { l, r: [r0, r1] }
    }

    #[inline]
    pub fn r(&self, bit: u8) -> S {
        self.r[usize::from(bit & 1)]
    }
}

/// Intermediate LLRs kept between the middle and right branch of a swap or
/// add node: `m[a][b]` is the right child's L given first bit `a` and middle
/// bit `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MidQuad<S> {
    pub m: [[S; 2]; 2],
}

impl<S: Scalar> MidQuad<S> {
    /// A quad with every entry unset (NaN).
    pub fn unset() -> Self {
        Self {
            m: [[S::nan(); 2]; 2],
        }
    }

    #[inline]
    pub fn get(&self, a: u8, b: u8) -> S {
        let v = self.m[usize::from(a & 1)][usize::from(b & 1)];
        debug_assert!(!v.is_nan(), "read of unset M entry [{a}][{b}]");
        v
    }
}

impl<S: Scalar> Default for MidQuad<S> {
    fn default() -> Self {
        Self::unset()
    }
}

/// Hard decision with the tie rule `0 -> 0`.
#[inline]
pub fn hard_decision<S: Scalar>(llr: S) -> u8 {
    u8::from(llr < S::zero())
}

#[inline]
fn min0<S: Scalar>(x: S) -> S {
    x.min(S::zero())
}

#[inline]
fn max0<S: Scalar>(x: S) -> S {
    x.max(S::zero())
}

/// `sgn(a) sgn(b) min(|a|, |b|)`.
#[inline]
pub fn f_minus<S: Scalar>(a: S, b: S, ops: &mut OpCounter) -> S {
    ops.cmp(1);
    let m = a.abs().min(b.abs());
    if (a < S::zero()) != (b < S::zero()) {
        -m
    } else {
        m
    }
}

/// `(-1)^u a + b`.
#[inline]
pub fn f_plus<S: Scalar>(a: S, b: S, u: u8, ops: &mut OpCounter) -> S {
    ops.add(1);
    if u & 1 == 0 {
        b + a
    } else {
        b - a
    }
}

/// Swap transform of a lozenge channel conditioned on its first bit.
///
/// Input `(l, r0, r1)` is `L` and `R(.;0), R(.;1)` of the lozenge channel;
/// output is the right child's L for middle bit 0 and 1, and the middle
/// child's L (equivalently the left child's R at that first bit).
#[inline]
pub fn swap_triple<S: Scalar>(l: S, r0: S, r1: S, ops: &mut OpCounter) -> (S, S, S) {
    ops.add(6);
    ops.cmp(6);
    let m0 = l + min0(r0) - min0(r1);
    let m1 = l - max0(r0) + max0(r1);
    let rout = r1 + max0(m0) - max0(m1);
    (m0, m1, rout)
}

/// Add transform of a lozenge channel conditioned on its first bit.
///
/// Same contract as [`swap_triple`]. Note the min/max placement: a variant
/// with `min(0, r1)` in `m0` and `max(0, r1)` in `m1` circulates as well and
/// does not match the exhaustive max-probability evaluation.
#[inline]
pub fn add_triple<S: Scalar>(l: S, r0: S, r1: S, ops: &mut OpCounter) -> (S, S, S) {
    ops.add(6);
    ops.cmp(6);
    ops.negations += 2;
    let m0 = l + min0(r0) + max0(r1);
    let m1 = -l + max0(r0) + min0(r1);
    let rout = -r1 + max0(m0) + min0(m1);
    (m0, m1, rout)
}

/// `R` of the plain lozenge channel: `f-(R1(u1+u2), R2(u2))`.
#[inline]
pub fn lozenge_right<S: Scalar>(
    ra: &LlrTriple<S>,
    rb: &LlrTriple<S>,
    u1: u8,
    u2: u8,
    ops: &mut OpCounter,
) -> S {
    f_minus(ra.r(u1 ^ u2), rb.r(u2), ops)
}

/// `R(.;b)` of the plain triangle channel: `f+(R1(u1+u2), R2(u2), b)`.
#[inline]
pub fn vartriangle_right<S: Scalar>(
    ra: &LlrTriple<S>,
    rb: &LlrTriple<S>,
    u1: u8,
    u2: u8,
    b: u8,
    ops: &mut OpCounter,
) -> S {
    f_plus(ra.r(u1 ^ u2), rb.r(u2), b, ops)
}

/// `R(.;b)` of the swapped triangle channel: `f+(R1(u1+b), R2(b), u2)`.
#[inline]
pub fn blacktriangle_right<S: Scalar>(
    ra: &LlrTriple<S>,
    rb: &LlrTriple<S>,
    u1: u8,
    u2: u8,
    b: u8,
    ops: &mut OpCounter,
) -> S {
    f_plus(ra.r(u1 ^ b), rb.r(b), u2, ops)
}

/// `R(.;b)` of the added triangle channel: `f+(R1(u1+u2+b), R2(u2+b), b)`.
#[inline]
pub fn dottriangle_right<S: Scalar>(
    ra: &LlrTriple<S>,
    rb: &LlrTriple<S>,
    u1: u8,
    u2: u8,
    b: u8,
    ops: &mut OpCounter,
) -> S {
    f_plus(ra.r(u1 ^ u2 ^ b), rb.r(u2 ^ b), b, ops)
}

/// Which adjacent-bit transform a family of virtual channels follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Plain,
    Swap,
    Add,
}

/// Position of a virtual channel among the three children of a node:
/// `Down` has no conditioning bits, `Lozenge` one, `Up` two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Down,
    Lozenge,
    Up,
}

/// One of the nine double-bit transforms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Family {
    pub kind: Kind,
    pub shape: Shape,
}

impl Family {
    pub const ALL: [Family; 9] = {
        const fn f(kind: Kind, shape: Shape) -> Family {
            Family { kind, shape }
        }
        [
            f(Kind::Plain, Shape::Down),
            f(Kind::Plain, Shape::Lozenge),
            f(Kind::Plain, Shape::Up),
            f(Kind::Swap, Shape::Down),
            f(Kind::Swap, Shape::Lozenge),
            f(Kind::Swap, Shape::Up),
            f(Kind::Add, Shape::Down),
            f(Kind::Add, Shape::Lozenge),
            f(Kind::Add, Shape::Up),
        ]
    };

    pub const fn new(kind: Kind, shape: Shape) -> Self {
        Self { kind, shape }
    }

    /// Number of already decided local bits the channel is conditioned on.
    pub fn cond_bits(&self) -> usize {
        match self.shape {
            Shape::Down => 0,
            Shape::Lozenge => 1,
            Shape::Up => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match (self.kind, self.shape) {
            (Kind::Plain, Shape::Down) => "down",
            (Kind::Plain, Shape::Lozenge) => "lozenge",
            (Kind::Plain, Shape::Up) => "up",
            (Kind::Swap, Shape::Down) => "swap-down",
            (Kind::Swap, Shape::Lozenge) => "swap-lozenge",
            (Kind::Swap, Shape::Up) => "swap-up",
            (Kind::Add, Shape::Down) => "add-down",
            (Kind::Add, Shape::Lozenge) => "add-lozenge",
            (Kind::Add, Shape::Up) => "add-up",
        }
    }
}

/// Conditioned lozenge inputs `(L, R(.;0), R(.;1))` for first bit `u1`.
#[inline]
pub fn lozenge_inputs<S: Scalar>(
    a: &LlrTriple<S>,
    b: &LlrTriple<S>,
    u1: u8,
    ops: &mut OpCounter,
) -> (S, S, S) {
    let l = f_plus(a.l, b.l, u1, ops);
    let r0 = lozenge_right(a, b, u1, 0, ops);
    let r1 = lozenge_right(a, b, u1, 1, ops);
    (l, r0, r1)
}

#[inline]
pub(crate) fn triple<S: Scalar>(kind: Kind, (l, r0, r1): (S, S, S), ops: &mut OpCounter) -> (S, S, S) {
    match kind {
        Kind::Swap => swap_triple(l, r0, r1, ops),
        Kind::Add => add_triple(l, r0, r1, ops),
        Kind::Plain => unreachable!("plain channels have no triple"),
    }
}

/// LLR triple of a transformed channel from the triples of its two
/// constituent channels. `cond` holds the conditioning bits (see
/// [`Family::cond_bits`]).
pub fn transform_llrs<S: Scalar>(
    family: Family,
    a: &LlrTriple<S>,
    b: &LlrTriple<S>,
    cond: &[u8],
    ops: &mut OpCounter,
) -> LlrTriple<S> {
    assert_eq!(cond.len(), family.cond_bits(), "conditioning bits");
    let kind = family.kind;
    match (family.shape, kind) {
        (Shape::Down, Kind::Plain) => LlrTriple::new(
            f_minus(a.l, b.l, ops),
            f_plus(a.l, b.l, 0, ops),
            f_plus(a.l, b.l, 1, ops),
        ),
        (Shape::Down, _) => {
            let l = f_minus(a.l, b.l, ops);
            let r0 = triple(kind, lozenge_inputs(a, b, 0, ops), ops).2;
            let r1 = triple(kind, lozenge_inputs(a, b, 1, ops), ops).2;
            LlrTriple::new(l, r0, r1)
        }
        (Shape::Lozenge, Kind::Plain) => {
            let u1 = cond[0];
            LlrTriple::new(
                f_plus(a.l, b.l, u1, ops),
                lozenge_right(a, b, u1, 0, ops),
                lozenge_right(a, b, u1, 1, ops),
            )
        }
        (Shape::Lozenge, _) => {
            let (m0, m1, rout) = triple(kind, lozenge_inputs(a, b, cond[0], ops), ops);
            LlrTriple::new(rout, m0, m1)
        }
        (Shape::Up, Kind::Plain) => {
            let (u1, u2) = (cond[0], cond[1]);
            LlrTriple::new(
                lozenge_right(a, b, u1, u2, ops),
                vartriangle_right(a, b, u1, u2, 0, ops),
                vartriangle_right(a, b, u1, u2, 1, ops),
            )
        }
        (Shape::Up, _) => {
            let (u1, u2) = (cond[0], cond[1]);
            let (m0, m1, _) = triple(kind, lozenge_inputs(a, b, u1, ops), ops);
            let l = if u2 == 0 { m0 } else { m1 };
            let right = match kind {
                Kind::Swap => blacktriangle_right::<S>,
                _ => dottriangle_right::<S>,
            };
            LlrTriple::new(l, right(a, b, u1, u2, 0, ops), right(a, b, u1, u2, 1, ops))
        }
    }
}
