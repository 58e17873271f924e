//! Layered ABS+ encoding and dense generator matrices over GF(2).

use crate::codespec::{CodeSpec, Transform};
use crate::{Error, Result};

/// Encodes a message with zeros at every frozen position.
pub fn encode(spec: &CodeSpec, u: &[u8]) -> Result<Vec<u8>> {
    check_len(spec.n(), u.len())?;
    if let Some(i) = (1..=spec.n()).find(|&i| spec.is_frozen(i) && u[i - 1] != 0) {
        return Err(Error::NonzeroFrozenBit(i));
    }
    Ok(encode_any(spec, u))
}

/// Multiplies any length-n vector by the generator, ignoring the frozen set.
pub fn encode_any(spec: &CodeSpec, u: &[u8]) -> Vec<u8> {
    assert_eq!(u.len(), spec.n(), "message length");
    let mut x: Vec<u8> = u.iter().map(|b| b & 1).collect();
    encode_in_place(spec, &mut x);
    x
}

/// Butterfly encoding in place. Component vectors of layer `l` are the
/// consecutive blocks of length `2^(m-l)`.
pub fn encode_in_place(spec: &CodeSpec, x: &mut [u8]) {
    encode_down_to(spec, x, 0);
}

/// Component vectors of `layer` for message `u`, concatenated: block
/// `i` (1-based) of length `2^(m-layer)` is the i-th vector.
pub fn component_vectors(spec: &CodeSpec, u: &[u8], layer: u32) -> Vec<u8> {
    assert!(layer <= spec.m());
    let mut x: Vec<u8> = u.iter().map(|b| b & 1).collect();
    encode_down_to(spec, &mut x, layer);
    x
}

fn encode_down_to(spec: &CodeSpec, x: &mut [u8], last: u32) {
    let m = spec.m();
    debug_assert_eq!(x.len(), spec.n());
    for layer in (last..m).rev() {
        let half = 1usize << (m - layer - 1);
        let upper = layer + 1;
        // the transforms of layer `upper` act on its component vectors
        for j in (2..(1usize << upper)).step_by(2) {
            match spec.transform(upper, j) {
                None => {}
                Some(Transform::Swap) => {
                    let (a, b) = x.split_at_mut(j * half);
                    a[(j - 1) * half..].swap_with_slice(&mut b[..half]);
                }
                Some(Transform::Add) => {
                    for t in 0..half {
                        x[(j - 1) * half + t] ^= x[j * half + t];
                    }
                }
            }
        }
        for block in x.chunks_mut(2 * half) {
            let (a, b) = block.split_at_mut(half);
            for (p, q) in a.iter_mut().zip(b.iter()) {
                *p ^= q;
            }
        }
    }
}

/// Applies the adjacent-bit transforms of `layer` to a length-`2^layer`
/// bit vector (`x <- x Q`).
pub fn apply_q(spec: &CodeSpec, layer: u32, x: &mut [u8]) {
    assert_eq!(x.len(), 1usize << layer);
    for j in (2..x.len()).step_by(2) {
        match spec.transform(layer, j) {
            None => {}
            Some(Transform::Swap) => x.swap(j - 1, j),
            Some(Transform::Add) => x[j - 1] ^= x[j],
        }
    }
}

/// Classical polar transform `u F^{(x)m}`.
pub fn encode_arikan(m: u32, u: &[u8]) -> Result<Vec<u8>> {
    check_len(1usize << m, u.len())?;
    let mut x: Vec<u8> = u.iter().map(|b| b & 1).collect();
    let mut half = x.len() / 2;
    while half >= 1 {
        for block in x.chunks_mut(2 * half) {
            let (a, b) = block.split_at_mut(half);
            for (p, q) in a.iter_mut().zip(b.iter()) {
                *p ^= q;
            }
        }
        half /= 2;
    }
    Ok(x)
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// Spreads payload bits over the unfrozen positions in ascending order.
pub fn place_info(spec: &CodeSpec, info: &[u8]) -> Result<Vec<u8>> {
    let pos = spec.info_positions();
    check_len(pos.len(), info.len())?;
    let mut u = vec![0u8; spec.n()];
    for (&p, &b) in pos.iter().zip(info) {
        u[p - 1] = b & 1;
    }
    Ok(u)
}

/// Inverse of [`place_info`].
pub fn extract_info(spec: &CodeSpec, u: &[u8]) -> Vec<u8> {
    spec.info_positions().iter().map(|&p| u[p - 1]).collect()
}

/// Square bit matrix, rows packed into 64-bit words.
#[derive(Clone, PartialEq, Eq)]
pub struct DenseMatrix {
    n: usize,
    words: usize,
    data: Vec<u64>,
}

impl std::fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "DenseMatrix({})", self.n)?;
        for r in 0..self.n.min(64) {
            let row: String = (0..self.n.min(64))
                .map(|c| if self.get(r, c) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {row}")?;
        }
        Ok(())
    }
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self { n, words, data: vec![0; n * words] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// The 2x2 kernel `[[1,0],[1,1]]`.
    pub fn kernel() -> Self {
        let mut m = Self::identity(2);
        m.set(1, 0, true);
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        for w in 0..self.words {
            let v = self.data[src * self.words + w];
            self.data[dst * self.words + w] ^= v;
        }
    }

    /// `self (x) F`.
    pub fn kron_kernel(&self) -> Self {
        let mut out = Self::zeros(2 * self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                if self.get(r, c) {
                    out.set(2 * r, 2 * c, true);
                    out.set(2 * r + 1, 2 * c, true);
                    out.set(2 * r + 1, 2 * c + 1, true);
                }
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n);
        let mut out = Self::zeros(self.n);
        for r in 0..self.n {
            for k in 0..self.n {
                if self.get(r, k) {
                    for w in 0..self.words {
                        out.data[r * self.words + w] ^= rhs.data[k * rhs.words + w];
                    }
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, u: &[u8]) -> Vec<u8> {
        assert_eq!(u.len(), self.n);
        let mut acc = vec![0u64; self.words];
        for (r, &b) in u.iter().enumerate() {
            if b & 1 == 1 {
                for (a, w) in acc.iter_mut().zip(self.row(r)) {
                    *a ^= w;
                }
            }
        }
        (0..self.n)
            .map(|c| ((acc[c / 64] >> (c % 64)) & 1) as u8)
            .collect()
    }

    /// Swaps columns `c` and `c+1` (right multiplication by a swap factor).
    fn swap_cols(&mut self, c: usize) {
        for r in 0..self.n {
            let (a, b) = (self.get(r, c), self.get(r, c + 1));
            self.set(r, c, b);
            self.set(r, c + 1, a);
        }
    }

    /// Column `c` += column `c+1` (right multiplication by an add factor).
    fn add_cols(&mut self, c: usize) {
        for r in 0..self.n {
            let v = self.get(r, c) ^ self.get(r, c + 1);
            self.set(r, c, v);
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..self.n {
            let Some(p) = (rank..self.n).find(|&r| m.get(r, c)) else {
                continue;
            };
            if p != rank {
                for w in 0..m.words {
                    m.data.swap(p * m.words + w, rank * m.words + w);
                }
            }
            for r in 0..self.n {
                if r != rank && m.get(r, c) {
                    m.xor_row_into(rank, r);
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn is_invertible(&self) -> bool {
        self.rank() == self.n
    }
}

/// Order in which the swap and add factors of one layer are multiplied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorOrder {
    SwapsFirst,
    AddsFirst,
}

/// Adjacent-bit transform matrix of `layer`.
pub fn q_matrix(spec: &CodeSpec, layer: u32, order: FactorOrder) -> DenseMatrix {
    let mut q = DenseMatrix::identity(1 << layer);
    let swaps = spec.swap_set(layer);
    let adds = spec.add_set(layer);
    let apply_swaps = |q: &mut DenseMatrix| swaps.iter().for_each(|&j| q.swap_cols(j - 1));
    let apply_adds = |q: &mut DenseMatrix| adds.iter().for_each(|&j| q.add_cols(j - 1));
    match order {
        FactorOrder::SwapsFirst => {
            apply_swaps(&mut q);
            apply_adds(&mut q);
        }
        FactorOrder::AddsFirst => {
            apply_adds(&mut q);
            apply_swaps(&mut q);
        }
    }
    q
}

/// Dense ABS+ generator matrix, built by the layer recursion.
pub fn gen_matrix(spec: &CodeSpec) -> Result<DenseMatrix> {
    if spec.m() > 16 {
        return Err(Error::TooLarge(format!(
            "dense generator for m = {} (limit 16)",
            spec.m()
        )));
    }
    let mut g = DenseMatrix::kernel();
    for layer in 2..=spec.m() {
        g = q_matrix(spec, layer, FactorOrder::SwapsFirst).mul(&g.kron_kernel());
    }
    Ok(g)
}

/// Dense `F^{(x)m}`.
pub fn arikan_matrix(m: u32) -> DenseMatrix {
    let mut g = DenseMatrix::identity(1);
    for _ in 0..m {
        g = g.kron_kernel();
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codespec::SpecDraft;

    fn fig2() -> CodeSpec {
        CodeSpec::new(&SpecDraft::new(3, 4, [1, 2, 3, 4]).swap(3, [4]).add(2, [2])).unwrap()
    }

    fn bits(x: usize, n: usize) -> Vec<u8> {
        (0..n).map(|i| ((x >> (n - 1 - i)) & 1) as u8).collect()
    }

    #[test]
    fn arikan_base_case() {
        assert_eq!(encode_arikan(1, &[1, 1]).unwrap(), vec![0, 1]);
        assert_eq!(encode_arikan(3, &[0; 8]).unwrap(), vec![0; 8]);
        assert!(encode_arikan(2, &[0; 3]).is_err());
    }

    #[test]
    fn arikan_matches_kronecker_power() {
        for m in 1..=6 {
            let g = arikan_matrix(m);
            let n = 1usize << m;
            for i in 0..n {
                let mut u = vec![0u8; n];
                u[i] = 1;
                assert_eq!(encode_arikan(m, &u).unwrap(), g.vec_mul(&u));
            }
        }
    }

    #[test]
    fn fig2_exhaustive_against_matrix() {
        let s = fig2();
        let g = gen_matrix(&s).unwrap();
        assert!(g.is_invertible());
        for x in 0..256 {
            let u = bits(x, 8);
            assert_eq!(encode_any(&s, &u), g.vec_mul(&u), "u = {u:?}");
        }
    }

    #[test]
    fn swap_factor_semantics() {
        let s = CodeSpec::new(&SpecDraft::new(2, 4, []).swap(2, [2])).unwrap();
        let q = q_matrix(&s, 2, FactorOrder::SwapsFirst);
        // x = (a, b, c, d) -> (a, c, b, d)
        assert_eq!(q.vec_mul(&[1, 0, 0, 0]), vec![1, 0, 0, 0]);
        assert_eq!(q.vec_mul(&[0, 1, 0, 0]), vec![0, 0, 1, 0]);
        assert_eq!(q.vec_mul(&[0, 0, 1, 0]), vec![0, 1, 0, 0]);
        let s = CodeSpec::new(&SpecDraft::new(2, 4, []).add(2, [2])).unwrap();
        let q = q_matrix(&s, 2, FactorOrder::SwapsFirst);
        assert_eq!(q.vec_mul(&[0, 1, 1, 0]), vec![0, 0, 1, 0]);
        assert_eq!(q.vec_mul(&[0, 0, 1, 0]), vec![0, 1, 1, 0]);
    }

    #[test]
    fn empty_sets_give_kronecker_power() {
        let s = CodeSpec::classical(4, 1..=8).unwrap();
        assert_eq!(gen_matrix(&s).unwrap(), arikan_matrix(4));
    }

    #[test]
    fn encode_rejects_bad_input() {
        let s = fig2();
        assert!(matches!(encode(&s, &[0; 7]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(
            encode(&s, &[0, 0, 1, 0, 0, 0, 0, 0]),
            Err(Error::NonzeroFrozenBit(3))
        ));
        assert_eq!(encode(&s, &[0; 8]).unwrap(), vec![0; 8]);
    }

    #[test]
    fn info_placement_round_trip() {
        let s = fig2();
        let u = place_info(&s, &[1, 0, 1, 1]).unwrap();
        assert_eq!(u, vec![0, 0, 0, 0, 1, 0, 1, 1]);
        assert_eq!(extract_info(&s, &u), vec![1, 0, 1, 1]);
    }
}
