//! ABS+ code specifications and recursion-tree classification.
//!
//! Indices are 1-based throughout, matching the usual notation `u_1 .. u_n`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Deserialize;

use crate::crc::CrcSpec;
use crate::{Error, Result};

/// Adjacent-bit transform applied at an even position `j` of a layer: swap
/// exchanges `x_j` and `x_{j+1}`, add replaces `x_j` by `x_j + x_{j+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transform {
    Swap,
    Add,
}

/// Node `(layer, phase)` of the decoding recursion tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub layer: u32,
    pub phase: usize,
}

impl NodeId {
    pub const ROOT: NodeId = NodeId { layer: 0, phase: 1 };

    pub fn new(layer: u32, phase: usize) -> Self {
        Self { layer, phase }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.layer, self.phase)
    }
}

/// Unvalidated specification, as read from a file or assembled by hand.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpecDraft {
    pub m: u32,
    pub k: usize,
    pub frozen: Vec<usize>,
    pub swap_sets: BTreeMap<u32, Vec<usize>>,
    pub add_sets: BTreeMap<u32, Vec<usize>>,
    pub crc: Option<CrcSpec>,
}

impl SpecDraft {
    pub fn new(m: u32, k: usize, frozen: impl IntoIterator<Item = usize>) -> Self {
        Self {
            m,
            k,
            frozen: frozen.into_iter().collect(),
            ..Self::default()
        }
    }

    pub fn swap(mut self, layer: u32, indices: impl IntoIterator<Item = usize>) -> Self {
        self.swap_sets.entry(layer).or_default().extend(indices);
        self
    }

    pub fn add(mut self, layer: u32, indices: impl IntoIterator<Item = usize>) -> Self {
        self.add_sets.entry(layer).or_default().extend(indices);
        self
    }

    pub fn with_crc(mut self, crc: CrcSpec) -> Self {
        self.crc = Some(crc);
        self
    }

    /// Checks every structural constraint, collecting all violations.
    pub fn validate(&self) -> std::result::Result<(), ViolationReport> {
        let mut v = Vec::new();
        let m = self.m;
        if m == 0 || m > 24 {
            v.push(Violation::BadLength { m });
            return Err(ViolationReport(v));
        }
        let n = 1usize << m;
        let crc_width = self.crc.map_or(0, |c| c.width());
        let unfrozen = self.k + crc_width;
        if unfrozen > n {
            v.push(Violation::InfoTooLong { n, k: self.k, crc_width });
        } else if self.frozen.len() != n - unfrozen {
            v.push(Violation::FrozenCount {
                expected: n - unfrozen,
                actual: self.frozen.len(),
            });
        }
        if let Some(c) = self.crc {
            if c.width() >= self.k {
                v.push(Violation::CrcTooWide { width: c.width(), k: self.k });
            }
        }
        check_list("frozen", &self.frozen, 1, n, &mut v);

        let layers: BTreeSet<u32> = self.swap_sets.keys().chain(self.add_sets.keys()).copied().collect();
        for layer in layers {
            let swap = self.swap_sets.get(&layer).map_or(&[][..], Vec::as_slice);
            let add = self.add_sets.get(&layer).map_or(&[][..], Vec::as_slice);
            if swap.is_empty() && add.is_empty() {
                continue;
            }
            if layer < 2 || layer > m {
                v.push(Violation::LayerOutOfRange { layer, m });
                continue;
            }
            let hi = (1usize << layer) - 1;
            check_list(&format!("swap set of layer {layer}"), swap, 1, hi, &mut v);
            check_list(&format!("add set of layer {layer}"), add, 1, hi, &mut v);
            let s: BTreeSet<usize> = swap.iter().copied().collect();
            let a: BTreeSet<usize> = add.iter().copied().collect();
            for &index in s.intersection(&a) {
                v.push(Violation::Overlap { layer, index });
            }
            let union: BTreeSet<usize> = s.union(&a).copied().collect();
            for &index in &union {
                if index % 2 == 1 {
                    v.push(Violation::OddIndex { layer, index });
                }
            }
            let sorted: Vec<usize> = union.into_iter().collect();
            for w in sorted.windows(2) {
                if w[1] < w[0] + 4 {
                    v.push(Violation::Spacing { layer, first: w[0], second: w[1] });
                }
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(ViolationReport(v))
        }
    }
}

fn check_list(what: &str, list: &[usize], lo: usize, hi: usize, v: &mut Vec<Violation>) {
    let mut seen = BTreeSet::new();
    for &x in list {
        if x < lo || x > hi {
            v.push(Violation::OutOfRange { what: what.to_string(), index: x, lo, hi });
        } else if !seen.insert(x) {
            v.push(Violation::Duplicate { what: what.to_string(), index: x });
        }
    }
}

/// One broken constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    BadLength { m: u32 },
    InfoTooLong { n: usize, k: usize, crc_width: usize },
    FrozenCount { expected: usize, actual: usize },
    CrcTooWide { width: usize, k: usize },
    OutOfRange { what: String, index: usize, lo: usize, hi: usize },
    Duplicate { what: String, index: usize },
    LayerOutOfRange { layer: u32, m: u32 },
    Overlap { layer: u32, index: usize },
    OddIndex { layer: u32, index: usize },
    Spacing { layer: u32, first: usize, second: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadLength { m } => write!(f, "m = {m} is outside 1..=24"),
            Violation::InfoTooLong { n, k, crc_width } => {
                write!(f, "k = {k} plus CRC width {crc_width} exceeds n = {n}")
            }
            Violation::FrozenCount { expected, actual } => {
                write!(f, "frozen set has {actual} indices, expected {expected}")
            }
            Violation::CrcTooWide { width, k } => {
                write!(f, "CRC width {width} is not below k = {k}")
            }
            Violation::OutOfRange { what, index, lo, hi } => {
                write!(f, "{what}: index {index} outside {lo}..={hi}")
            }
            Violation::Duplicate { what, index } => write!(f, "{what}: duplicate index {index}"),
            Violation::LayerOutOfRange { layer, m } => {
                write!(f, "transform layer {layer} outside 2..={m}")
            }
            Violation::Overlap { layer, index } => write!(
                f,
                "layer {layer}: index {index} is in both the swap and the add set"
            ),
            Violation::OddIndex { layer, index } => {
                write!(f, "layer {layer}: transform index {index} is odd")
            }
            Violation::Spacing { layer, first, second } => write!(
                f,
                "layer {layer}: transform indices {first} and {second} are closer than 4"
            ),
        }
    }
}

/// All violations found by [`SpecDraft::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViolationReport(pub Vec<Violation>);

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ViolationReport {}

/// Validated ABS+ code specification with precomputed node tables.
#[derive(Clone, Debug)]
pub struct CodeSpec {
    m: u32,
    k: usize,
    frozen_mask: Vec<bool>,
    crc: Option<CrcSpec>,
    // transforms[layer][j] for 1-based position j
    transforms: Vec<Vec<Option<Transform>>>,
    // right_sep[layer][i] for 1-based phase i
    right_sep: Vec<Vec<bool>>,
}

impl PartialEq for CodeSpec {
    fn eq(&self, other: &Self) -> bool {
        self.draft() == other.draft()
    }
}

impl Eq for CodeSpec {}

impl CodeSpec {
    pub fn new(draft: &SpecDraft) -> Result<Self> {
        draft.validate().map_err(Error::InvalidSpec)?;
        let m = draft.m;
        let n = 1usize << m;
        let mut frozen_mask = vec![false; n + 1];
        for &f in &draft.frozen {
            frozen_mask[f] = true;
        }
        let mut transforms: Vec<Vec<Option<Transform>>> =
            (0..=m).map(|l| vec![None; (1usize << l) + 1]).collect();
        for (&layer, set) in &draft.swap_sets {
            for &j in set {
                transforms[layer as usize][j] = Some(Transform::Swap);
            }
        }
        for (&layer, set) in &draft.add_sets {
            for &j in set {
                transforms[layer as usize][j] = Some(Transform::Add);
            }
        }
        let mut right_sep: Vec<Vec<bool>> =
            (0..=m).map(|l| vec![true; (1usize << l) + 1]).collect();
        for layer in (0..m).rev() {
            let (lo, hi) = right_sep.split_at_mut(layer as usize + 1);
            let below = &hi[0];
            for (i, rs) in lo[layer as usize].iter_mut().enumerate().skip(1) {
                let j = 2 * i;
                *rs = transforms[layer as usize + 1][j].is_none() && below[j];
            }
        }
        Ok(Self {
            m,
            k: draft.k,
            frozen_mask,
            crc: draft.crc,
            transforms,
            right_sep,
        })
    }

    /// Classical polar code with the given frozen set.
    pub fn classical(m: u32, frozen: impl IntoIterator<Item = usize>) -> Result<Self> {
        let frozen: Vec<usize> = frozen.into_iter().collect();
        let k = (1usize << m).saturating_sub(frozen.len());
        Self::new(&SpecDraft::new(m, k, frozen))
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> usize {
        1 << self.m
    }

    /// Payload length (CRC bits excluded).
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn crc(&self) -> Option<&CrcSpec> {
        self.crc.as_ref()
    }

    /// Number of unfrozen positions, payload plus CRC.
    pub fn unfrozen_len(&self) -> usize {
        self.n() - self.frozen().len()
    }

    #[inline]
    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen_mask[i]
    }

    pub fn frozen(&self) -> Vec<usize> {
        (1..=self.n()).filter(|&i| self.frozen_mask[i]).collect()
    }

    /// Unfrozen positions in ascending order.
    pub fn info_positions(&self) -> Vec<usize> {
        (1..=self.n()).filter(|&i| !self.frozen_mask[i]).collect()
    }

    /// Transform at position `j` of `layer`, if `j` belongs to `I^layer`.
    #[inline]
    pub fn transform(&self, layer: u32, j: usize) -> Option<Transform> {
        self.transforms
            .get(layer as usize)
            .and_then(|t| t.get(j))
            .copied()
            .flatten()
    }

    #[inline]
    pub fn in_i(&self, layer: u32, j: usize) -> bool {
        self.transform(layer, j).is_some()
    }

    pub fn swap_set(&self, layer: u32) -> Vec<usize> {
        self.set_of(layer, Transform::Swap)
    }

    pub fn add_set(&self, layer: u32) -> Vec<usize> {
        self.set_of(layer, Transform::Add)
    }

    fn set_of(&self, layer: u32, t: Transform) -> Vec<usize> {
        self.transforms
            .get(layer as usize)
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, x)| **x == Some(t))
                    .map(|(j, _)| j)
                    .collect()
            })
            .unwrap_or_default()
    }

    /// True when no layer carries a transform.
    pub fn is_classical(&self) -> bool {
        self.transforms.iter().flatten().all(Option::is_none)
    }

    /// Same transforms, different frozen set and payload length.
    pub fn with_frozen(&self, k: usize, frozen: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut d = self.draft();
        d.k = k;
        d.frozen = frozen.into_iter().collect();
        Self::new(&d)
    }

    pub fn with_crc(&self, crc: Option<CrcSpec>) -> Result<Self> {
        let mut d = self.draft();
        d.crc = crc;
        Self::new(&d)
    }

    /// The length-`2^layer` code formed by layers `2..=layer`, nothing frozen.
    ///
    /// Its virtual channels are the ones seen by layer `layer` of this code.
    pub fn truncated(&self, layer: u32) -> CodeSpec {
        assert!(layer >= 1 && layer <= self.m, "layer {layer} out of range");
        let mut d = SpecDraft::new(layer, 1 << layer, []);
        for l in 2..=layer {
            let s = self.swap_set(l);
            let a = self.add_set(l);
            if !s.is_empty() {
                d.swap_sets.insert(l, s);
            }
            if !a.is_empty() {
                d.add_sets.insert(l, a);
            }
        }
        CodeSpec::new(&d).expect("sub-spec of a valid spec is valid")
    }

    pub fn draft(&self) -> SpecDraft {
        let mut d = SpecDraft::new(self.m, self.k, self.frozen());
        d.crc = self.crc;
        for layer in 2..=self.m {
            let s = self.swap_set(layer);
            let a = self.add_set(layer);
            if !s.is_empty() {
                d.swap_sets.insert(layer, s);
            }
            if !a.is_empty() {
                d.add_sets.insert(layer, a);
            }
        }
        d
    }

    fn check_node(&self, node: NodeId) -> Result<()> {
        if node.layer > self.m || node.phase == 0 || node.phase > 1usize << node.layer {
            return Err(Error::NodeOutOfRange { layer: node.layer, phase: node.phase });
        }
        Ok(())
    }

    /// Cached right-separation flag; no range checks.
    #[inline]
    pub fn right_separated(&self, layer: u32, phase: usize) -> bool {
        self.right_sep[layer as usize][phase]
    }

    /// Whether the rightmost descent from `node` only uses middle edges.
    pub fn is_right_separated(&self, node: NodeId) -> Result<bool> {
        self.check_node(node)?;
        Ok(self.right_separated(node.layer, node.phase))
    }

    /// Children of an internal node in processing order.
    pub fn children(&self, node: NodeId) -> Result<Vec<NodeId>> {
        self.check_node(node)?;
        if node.layer == self.m {
            return Err(Error::LeafNode { layer: node.layer, phase: node.phase });
        }
        let next = node.layer + 1;
        let i = node.phase;
        let mut out = Vec::with_capacity(3);
        if i == 1 || !self.in_i(next, 2 * (i - 1)) {
            out.push(NodeId::new(next, 2 * i - 1));
        }
        out.push(NodeId::new(next, 2 * i));
        if self.in_i(next, 2 * i) {
            out.push(NodeId::new(next, 2 * i + 1));
        }
        Ok(out)
    }

    /// Nodes in depth-first, left-to-right order.
    pub fn dfs_order(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![NodeId::ROOT];
        while let Some(node) = stack.pop() {
            out.push(node);
            if node.layer < self.m {
                let ch = self.children(node).expect("internal node");
                stack.extend(ch.into_iter().rev());
            }
        }
        out
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    m: u32,
    k: usize,
    frozen: Vec<usize>,
    #[serde(default)]
    layers: Vec<LayerFile>,
    crc: Option<CrcFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    lambda: u32,
    #[serde(default)]
    swap: Vec<usize>,
    #[serde(default)]
    add: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CrcFile {
    poly_hex: String,
    width: u32,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a TOML spec file.
pub fn parse_spec(text: &str) -> Result<CodeSpec> {
    let file: SpecFile = toml::from_str(text).map_err(|e| Error::Syntax {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let mut draft = SpecDraft::new(file.m, file.k, file.frozen);
    let mut seen = BTreeSet::new();
    for layer in file.layers {
        if !seen.insert(layer.lambda) {
            return Err(Error::Syntax {
                line: 0,
                message: format!("layer {} listed twice", layer.lambda),
            });
        }
        draft = draft.swap(layer.lambda, layer.swap).add(layer.lambda, layer.add);
    }
    if let Some(c) = file.crc {
        let hex = c.poly_hex.trim_start_matches("0x").trim_start_matches("0X");
        let poly = u64::from_str_radix(hex, 16).map_err(|e| Error::Syntax {
            line: text
                .find("poly_hex")
                .map_or(0, |off| line_of(text, off)),
            message: format!("bad poly_hex {:?}: {e}", c.poly_hex),
        })?;
        draft.crc = Some(CrcSpec::new(poly, c.width)?);
    }
    CodeSpec::new(&draft)
}

fn write_list(out: &mut String, key: &str, list: &[usize]) {
    const PER_LINE: usize = 16;
    out.push_str(key);
    out.push_str(" = [");
    if list.len() <= PER_LINE {
        let items: Vec<String> = list.iter().map(usize::to_string).collect();
        out.push_str(&items.join(", "));
        out.push_str("]\n");
        return;
    }
    out.push('\n');
    for chunk in list.chunks(PER_LINE) {
        let items: Vec<String> = chunk.iter().map(usize::to_string).collect();
        out.push_str("    ");
        out.push_str(&items.join(", "));
        out.push_str(",\n");
    }
    out.push_str("]\n");
}

/// Canonical TOML form: sorted lists, only layers with transforms.
pub fn serialize_spec(spec: &CodeSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("m = {}\nk = {}\n", spec.m(), spec.k()));
    write_list(&mut out, "frozen", &spec.frozen());
    for layer in 2..=spec.m() {
        let s = spec.swap_set(layer);
        let a = spec.add_set(layer);
        if s.is_empty() && a.is_empty() {
            continue;
        }
        out.push_str(&format!("\n[[layers]]\nlambda = {layer}\n"));
        write_list(&mut out, "swap", &s);
        write_list(&mut out, "add", &a);
    }
    if let Some(c) = spec.crc() {
        out.push_str(&format!(
            "\n[crc]\npoly_hex = \"{:#x}\"\nwidth = {}\n",
            c.poly, c.width
        ));
    }
    out
}
