//! Arithmetic in R = F2[x]/(x^p+1) and R^2, integer lifting, and
//! fixed-weight uniform sampling.

use rand::Rng;
use std::ops::{Add, Mul};

use crate::Error;

/// Indices of the nonzero coefficients, strictly increasing.
pub type SupportSet = Vec<usize>;

/// A polynomial in F2[x]/(x^p+1), bit-packed 64 coefficients per word.
///
/// Coefficient j lives at bit j%64 of word j/64; bits at positions >= p are
/// kept zero by every operation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingElement {
    p: usize,
    words: Vec<u64>,
}

fn word_len(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// Clears the bits at positions >= p in the last word.
fn mask_top(words: &mut [u64], p: usize) {
    if p % 64 != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << (p % 64)) - 1;
        }
    }
}

/// dst ^= src << k, dropping bits that fall beyond dst.
fn xor_shl(dst: &mut [u64], src: &[u64], k: usize) {
    let (wk, bk) = (k / 64, k % 64);
    if bk == 0 {
        for (i, &s) in src.iter().enumerate() {
            if let Some(d) = dst.get_mut(i + wk) {
                *d ^= s;
            }
        }
    } else {
        let mut carry = 0u64;
        for (i, &s) in src.iter().enumerate() {
            if let Some(d) = dst.get_mut(i + wk) {
                *d ^= (s << bk) | carry;
            }
            carry = s >> (64 - bk);
        }
        if let Some(d) = dst.get_mut(src.len() + wk) {
            *d ^= carry;
        }
    }
}

/// dst ^= src >> k.
fn xor_shr(dst: &mut [u64], src: &[u64], k: usize) {
    let (wk, bk) = (k / 64, k % 64);
    for (i, d) in dst.iter_mut().enumerate() {
        let lo = src.get(i + wk).copied().unwrap_or(0);
        if bk == 0 {
            *d ^= lo;
        } else {
            let hi = src.get(i + wk + 1).copied().unwrap_or(0);
            *d ^= (lo >> bk) | (hi << (64 - bk));
        }
    }
}

impl RingElement {
    /// The zero polynomial.
    pub fn zero(p: usize) -> Self {
        assert!(p > 0, "modulus degree must be positive");
        RingElement { p, words: vec![0; word_len(p)] }
    }

    /// The monomial x^j.
    pub fn monomial(p: usize, j: usize) -> Self {
        let mut a = Self::zero(p);
        a.set(j);
        a
    }

    /// Builds an element from the indices of its set coefficients.
    pub fn from_support(p: usize, support: &[usize]) -> Self {
        let mut a = Self::zero(p);
        for &j in support {
            a.set(j);
        }
        a
    }

    /// Builds an element from raw words; bits >= p are cleared.
    pub fn from_words(p: usize, mut words: Vec<u64>) -> Self {
        words.resize(word_len(p), 0);
        mask_top(&mut words, p);
        RingElement { p, words }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, j: usize) -> bool {
        assert!(j < self.p, "coefficient index {j} out of range (p = {})", self.p);
        self.words[j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, j: usize) {
        assert!(j < self.p, "coefficient index {j} out of range (p = {})", self.p);
        self.words[j / 64] |= 1u64 << (j % 64);
    }

    pub fn flip(&mut self, j: usize) {
        assert!(j < self.p, "coefficient index {j} out of range (p = {})", self.p);
        self.words[j / 64] ^= 1u64 << (j % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Number of nonzero coefficients.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of the nonzero coefficients, increasing.
    pub fn support(&self) -> SupportSet {
        let mut out = Vec::with_capacity(self.weight());
        for (i, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push(i * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }

    pub fn xor_assign(&mut self, other: &RingElement) {
        assert_eq!(self.p, other.p, "mismatched moduli {} vs {}", self.p, other.p);
        for (d, s) in self.words.iter_mut().zip(&other.words) {
            *d ^= s;
        }
    }

    /// self ^= x^v * other, with 0 <= v < p.
    fn xor_rotated(&mut self, other: &RingElement, v: usize) {
        debug_assert!(v < self.p);
        if v == 0 {
            self.xor_assign(other);
            return;
        }
        // Split the rotation: bits that stay below p, then the wrapped bits.
        xor_shl(&mut self.words, &other.words, v);
        mask_top(&mut self.words, self.p);
        xor_shr(&mut self.words, &other.words, self.p - v);
    }

    /// x^v * self; any integer v, negative meaning the inverse shift.
    /// Weight is preserved.
    pub fn cyclic_shift(&self, v: i64) -> RingElement {
        let v = v.rem_euclid(self.p as i64) as usize;
        let mut out = RingElement::zero(self.p);
        out.xor_rotated(self, v);
        out
    }

    /// Little-endian coefficient bytes, ceil(p/8) long; coefficient 0 is the
    /// least significant bit of byte 0.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.p.div_ceil(8);
        let mut out = vec![0u8; nbytes];
        for (i, b) in out.iter_mut().enumerate() {
            *b = (self.words[i / 8] >> (8 * (i % 8))) as u8;
        }
        out
    }

    /// Inverse of `to_bytes`; rejects wrong length and nonzero padding bits.
    pub fn from_bytes(p: usize, bytes: &[u8]) -> Result<Self, Error> {
        let nbytes = p.div_ceil(8);
        if bytes.len() != nbytes {
            return Err(Error::Format(format!(
                "ring element payload is {} bytes, expected {nbytes} for p = {p}",
                bytes.len()
            )));
        }
        let mut words = vec![0u64; word_len(p)];
        for (i, &b) in bytes.iter().enumerate() {
            words[i / 8] |= (b as u64) << (8 * (i % 8));
        }
        let mut checked = words.clone();
        mask_top(&mut checked, p);
        if checked != words {
            return Err(Error::Format("nonzero padding bits in ring element payload".into()));
        }
        Ok(RingElement { p, words })
    }
}

impl std::fmt::Debug for RingElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RingElement(p={}, support={:?})", self.p, self.support())
    }
}

impl Add for &RingElement {
    type Output = RingElement;

    /// Coefficient-wise XOR.
    fn add(self, rhs: &RingElement) -> RingElement {
        let mut out = self.clone();
        out.xor_assign(rhs);
        out
    }
}

impl Mul for &RingElement {
    type Output = RingElement;

    /// Product reduced mod x^p+1, accumulated as cyclic shifts of the denser
    /// factor over the sparser factor's support.
    fn mul(self, rhs: &RingElement) -> RingElement {
        assert_eq!(self.p, rhs.p, "mismatched moduli {} vs {}", self.p, rhs.p);
        let (dense, sparse) =
            if self.weight() >= rhs.weight() { (self, rhs) } else { (rhs, self) };
        let mut acc = RingElement::zero(self.p);
        for v in sparse.support() {
            acc.xor_rotated(dense, v);
        }
        acc
    }
}

/// An element of R^2; keys, ephemeral vectors, and the z-part of signatures.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RingPair {
    pub a0: RingElement,
    pub a1: RingElement,
}

impl RingPair {
    pub fn new(a0: RingElement, a1: RingElement) -> Self {
        assert_eq!(a0.p(), a1.p(), "pair components must share the modulus");
        RingPair { a0, a1 }
    }

    pub fn zero(p: usize) -> Self {
        RingPair { a0: RingElement::zero(p), a1: RingElement::zero(p) }
    }

    /// Uniform element of D_{2p,w}: w ones over the flattened 2p positions.
    pub fn sample(p: usize, w: usize, rng: &mut impl Rng) -> Self {
        let support = sample_fixed_weight(2 * p, w, rng);
        Self::from_flat_support(p, &support)
    }

    /// Positions 0..p-1 land in the first component, p..2p-1 in the second.
    pub fn from_flat_support(p: usize, support: &[usize]) -> Self {
        let mut pair = Self::zero(p);
        for &j in support {
            if j < p {
                pair.a0.set(j);
            } else {
                pair.a1.set(j - p);
            }
        }
        pair
    }

    pub fn p(&self) -> usize {
        self.a0.p()
    }

    /// Total weight over both components.
    pub fn weight(&self) -> usize {
        self.a0.weight() + self.a1.weight()
    }

    pub fn is_zero(&self) -> bool {
        self.a0.is_zero() && self.a1.is_zero()
    }

    pub fn add(&self, other: &RingPair) -> RingPair {
        RingPair { a0: &self.a0 + &other.a0, a1: &self.a1 + &other.a1 }
    }

    /// Component-wise product by a scalar ring element.
    pub fn scale(&self, c: &RingElement) -> RingPair {
        RingPair { a0: c * &self.a0, a1: c * &self.a1 }
    }

    /// a0 ‖ a1 in the coefficient byte encoding.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.a0.to_bytes();
        out.extend_from_slice(&self.a1.to_bytes());
        out
    }

    pub fn from_bytes(p: usize, bytes: &[u8]) -> Result<Self, Error> {
        let nbytes = p.div_ceil(8);
        if bytes.len() != 2 * nbytes {
            return Err(Error::Format(format!(
                "ring pair payload is {} bytes, expected {}",
                bytes.len(),
                2 * nbytes
            )));
        }
        Ok(RingPair {
            a0: RingElement::from_bytes(p, &bytes[..nbytes])?,
            a1: RingElement::from_bytes(p, &bytes[nbytes..])?,
        })
    }
}

/// Integer-domain coefficient tallies (1+1=2), one counter per position.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LiftedCounts {
    p: usize,
    counts: Vec<u32>,
}

impl LiftedCounts {
    pub fn zero(p: usize) -> Self {
        LiftedCounts { p, counts: vec![0; p] }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn get(&self, j: usize) -> u32 {
        self.counts[j]
    }

    /// Adds 1 at every set coefficient of `a`.
    pub fn accumulate(&mut self, a: &RingElement) {
        assert_eq!(self.p, a.p(), "mismatched moduli {} vs {}", self.p, a.p());
        for j in a.support() {
            self.counts[j] += 1;
        }
    }

    /// The positions whose count reaches the threshold, as a ring element.
    pub fn threshold(&self, b: u32) -> RingElement {
        let mut out = RingElement::zero(self.p);
        for (j, &c) in self.counts.iter().enumerate() {
            if c >= b {
                out.set(j);
            }
        }
        out
    }
}

/// Uniform draw from D_{n,w}: the sorted support of a weight-w length-n
/// bit sequence. Deterministic given the generator state.
pub fn sample_fixed_weight(n: usize, w: usize, rng: &mut impl Rng) -> SupportSet {
    assert!(w <= n, "requested weight {w} exceeds length {n}");
    let mut idx = rand::seq::index::sample(rng, n, w).into_vec();
    idx.sort_unstable();
    idx
}
