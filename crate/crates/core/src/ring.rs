//! Arithmetic in the negacyclic ring `Z_q[X]/(X^n + 1)` with `q = 2^k`.
//!
//! Coefficients are always stored reduced in `[0, q)`. Because `q` divides
//! `2^64`, products and sums are accumulated with wrapping `u64` arithmetic
//! and masked at the end, which is exact for every supported modulus.
//! Centering into `(-q/2, q/2]` happens only where norms are taken.

use multiversion::multiversion;
use rand::Rng;

use crate::bits::BitString;
use crate::codec::{ByteReader, ParseError};
use crate::error::RingError;

/// Largest supported `log2 q`.
pub const MAX_LOG_Q: u32 = 62;

/// Shape of a ring: dimension `n` (a power of two) and modulus `2^log_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ring {
    n: usize,
    log_q: u32,
}

impl Ring {
    pub fn new(n: usize, log_q: u32) -> Result<Self, RingError> {
        if n == 0 || !n.is_power_of_two() {
            return Err(RingError::BadDimension(n));
        }
        if log_q == 0 || log_q > MAX_LOG_Q {
            return Err(RingError::BadModulus(log_q));
        }
        Ok(Self { n, log_q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_q(&self) -> u32 {
        self.log_q
    }

    pub fn q(&self) -> u64 {
        1u64 << self.log_q
    }

    pub fn mask(&self) -> u64 {
        self.q() - 1
    }

    /// Length of `BitDecomp` of one element, `n * log_q`.
    pub fn bit_len(&self) -> usize {
        self.n * self.log_q as usize
    }

    /// Byte length of the canonical element encoding.
    pub fn encoded_len(&self) -> usize {
        self.n * 8
    }

    /// Maps a reduced coefficient to its representative in `(-q/2, q/2]`.
    #[inline]
    pub fn center(&self, c: u64) -> i64 {
        let half = self.q() >> 1;
        if c > half {
            c as i64 - self.q() as i64
        } else {
            c as i64
        }
    }

    /// Reduces a signed integer into `[0, q)`.
    #[inline]
    pub fn reduce(&self, c: i64) -> u64 {
        (c as u64) & self.mask()
    }

    pub fn zero(&self) -> RingElement {
        RingElement {
            ring: *self,
            coeffs: vec![0; self.n],
        }
    }

    pub fn one(&self) -> RingElement {
        self.constant(1)
    }

    pub fn constant(&self, c: u64) -> RingElement {
        let mut e = self.zero();
        e.coeffs[0] = c & self.mask();
        e
    }

    /// The monomial `X^k` (with `X^n = -1`).
    pub fn monomial(&self, k: usize) -> RingElement {
        let mut e = self.zero();
        let sign_flip = (k / self.n) % 2 == 1;
        e.coeffs[k % self.n] = if sign_flip { self.mask() } else { 1 };
        e
    }

    pub fn element(&self, coeffs: Vec<u64>) -> Result<RingElement, RingError> {
        if coeffs.len() != self.n {
            return Err(RingError::LengthMismatch {
                expected: self.n,
                actual: coeffs.len(),
            });
        }
        if let Some(&c) = coeffs.iter().find(|&&c| c > self.mask()) {
            return Err(RingError::Unreduced(c));
        }
        Ok(RingElement { ring: *self, coeffs })
    }

    /// Builds an element from arbitrary signed coefficients, reducing mod q.
    pub fn from_signed(&self, coeffs: &[i64]) -> Result<RingElement, RingError> {
        if coeffs.len() != self.n {
            return Err(RingError::LengthMismatch {
                expected: self.n,
                actual: coeffs.len(),
            });
        }
        Ok(RingElement {
            ring: *self,
            coeffs: coeffs.iter().map(|&c| self.reduce(c)).collect(),
        })
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> RingElement {
        let mask = self.mask();
        RingElement {
            ring: *self,
            coeffs: (0..self.n).map(|_| rng.next_u64() & mask).collect(),
        }
    }

    pub fn random_vector<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> RingVector {
        RingVector {
            ring: *self,
            elems: (0..len).map(|_| self.random(rng)).collect(),
        }
    }

    pub fn zero_vector(&self, len: usize) -> RingVector {
        RingVector {
            ring: *self,
            elems: vec![self.zero(); len],
        }
    }

    /// Splits a flat signed coefficient vector of length `n * len` into a
    /// ring vector, slot by slot.
    pub fn vector_from_signed(&self, coeffs: &[i64]) -> Result<RingVector, RingError> {
        if !coeffs.len().is_multiple_of(self.n) {
            return Err(RingError::LengthMismatch {
                expected: self.n * (coeffs.len() / self.n + 1),
                actual: coeffs.len(),
            });
        }
        let elems = coeffs
            .chunks(self.n)
            .map(|c| self.from_signed(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RingVector { ring: *self, elems })
    }

    pub fn decode_element(&self, r: &mut ByteReader<'_>) -> Result<RingElement, ParseError> {
        let mut coeffs = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let at = r.offset();
            let c = r.u64_le()?;
            if c > self.mask() {
                return Err(ParseError::invalid(at, "coefficient not reduced mod q"));
            }
            coeffs.push(c);
        }
        Ok(RingElement { ring: *self, coeffs })
    }

    pub fn decode_vector(&self, len: usize, r: &mut ByteReader<'_>) -> Result<RingVector, ParseError> {
        let elems = (0..len)
            .map(|_| self.decode_element(r))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RingVector { ring: *self, elems })
    }

    /// Inverse of [`RingElement::bit_decomp`].
    pub fn from_bit_decomp(&self, bits: &BitString) -> Result<RingElement, RingError> {
        if bits.len() != self.bit_len() {
            return Err(RingError::LengthMismatch {
                expected: self.bit_len(),
                actual: bits.len(),
            });
        }
        let k = self.log_q as usize;
        let coeffs = (0..self.n).map(|i| bits.read_bits(i * k, k)).collect();
        Ok(RingElement { ring: *self, coeffs })
    }
}

/// An element of `R_q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingElement {
    ring: Ring,
    coeffs: Vec<u64>,
}

impl RingElement {
    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn centered(&self) -> Vec<i64> {
        self.coeffs.iter().map(|&c| self.ring.center(c)).collect()
    }

    fn check(&self, other: &Self) -> Result<(), RingError> {
        if self.ring != other.ring {
            return Err(RingError::Mismatch {
                left: self.ring,
                right: other.ring,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, RingError> {
        self.check(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, RingError> {
        self.check(other)?;
        Ok(self.sub_unchecked(other))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, RingError> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn neg(&self) -> Self {
        let mask = self.ring.mask();
        Self {
            ring: self.ring,
            coeffs: self.coeffs.iter().map(|&c| c.wrapping_neg() & mask).collect(),
        }
    }

    /// Multiplication by an integer constant.
    pub fn scale(&self, k: u64) -> Self {
        let mask = self.ring.mask();
        Self {
            ring: self.ring,
            coeffs: self.coeffs.iter().map(|&c| c.wrapping_mul(k) & mask).collect(),
        }
    }

    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        let mask = self.ring.mask();
        Self {
            ring: self.ring,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| a.wrapping_add(b) & mask)
                .collect(),
        }
    }

    pub(crate) fn sub_unchecked(&self, other: &Self) -> Self {
        let mask = self.ring.mask();
        Self {
            ring: self.ring,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| a.wrapping_sub(b) & mask)
                .collect(),
        }
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let ext = negacyclic_extension(&other.coeffs);
        let mut acc = vec![0u64; self.ring.n];
        mul_acc(&mut acc, &self.coeffs, &ext);
        self.ring.masked(acc)
    }

    /// Canonical binary representation: coefficient-major, little-endian
    /// within each `log_q`-bit coefficient.
    pub fn bit_decomp(&self) -> BitString {
        let k = self.ring.log_q as usize;
        let mut bits = BitString::zeros(self.ring.bit_len());
        for (i, &c) in self.coeffs.iter().enumerate() {
            bits.write_bits(i * k, k, c);
        }
        bits
    }

    /// `n` coefficients, each as 8-byte little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.ring.encoded_len());
        self.write_bytes(&mut out);
        out
    }

    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        for &c in &self.coeffs {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
}

impl Ring {
    fn masked(&self, mut acc: Vec<u64>) -> RingElement {
        let mask = self.mask();
        acc.iter_mut().for_each(|c| *c &= mask);
        RingElement {
            ring: *self,
            coeffs: acc,
        }
    }
}

/// A length-`m` vector over `R_q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingVector {
    ring: Ring,
    elems: Vec<RingElement>,
}

impl RingVector {
    pub fn new(ring: Ring, elems: Vec<RingElement>) -> Result<Self, RingError> {
        if let Some(e) = elems.iter().find(|e| e.ring != ring) {
            return Err(RingError::Mismatch {
                left: ring,
                right: e.ring,
            });
        }
        Ok(Self { ring, elems })
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[RingElement] {
        &self.elems
    }

    pub fn get(&self, i: usize) -> &RingElement {
        &self.elems[i]
    }

    fn check(&self, other: &Self) -> Result<(), RingError> {
        if self.ring != other.ring {
            return Err(RingError::Mismatch {
                left: self.ring,
                right: other.ring,
            });
        }
        if self.len() != other.len() {
            return Err(RingError::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, RingError> {
        self.check(other)?;
        Ok(self.zip_with(other, RingElement::add_unchecked))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, RingError> {
        self.check(other)?;
        Ok(self.zip_with(other, RingElement::sub_unchecked))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&RingElement, &RingElement) -> RingElement) -> Self {
        Self {
            ring: self.ring,
            elems: self.elems.iter().zip(&other.elems).map(|(a, b)| f(a, b)).collect(),
        }
    }

    /// Slot-wise product `a_i * x`.
    pub fn scalar_mul(&self, x: &RingElement) -> Result<Self, RingError> {
        if self.ring != x.ring {
            return Err(RingError::Mismatch {
                left: self.ring,
                right: x.ring,
            });
        }
        Ok(self.scalar_mul_unchecked(x))
    }

    pub(crate) fn scalar_mul_unchecked(&self, x: &RingElement) -> Self {
        let ext = negacyclic_extension(&x.coeffs);
        let n = self.ring.n;
        let elems = self
            .elems
            .iter()
            .map(|a| {
                let mut acc = vec![0u64; n];
                mul_acc(&mut acc, &a.coeffs, &ext);
                self.ring.masked(acc)
            })
            .collect();
        Self {
            ring: self.ring,
            elems,
        }
    }

    /// Flat centered coefficients, slot-major.
    pub fn centered(&self) -> Vec<i64> {
        self.elems.iter().flat_map(|e| e.centered()).collect()
    }

    /// Exact squared Euclidean norm of the centered coefficients, saturating
    /// at `u128::MAX`.
    pub fn centered_norm_sq(&self) -> u128 {
        let mut acc: u128 = 0;
        for e in &self.elems {
            for &c in &e.coeffs {
                let v = self.ring.center(c).unsigned_abs() as u128;
                acc = acc.saturating_add(v * v);
            }
        }
        acc
    }

    pub fn centered_norm(&self) -> f64 {
        let sq = self.centered_norm_sq();
        if sq < u128::MAX {
            (sq as f64).sqrt()
        } else {
            self.centered()
                .iter()
                .map(|&c| (c as f64) * (c as f64))
                .sum::<f64>()
                .sqrt()
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len() * self.ring.encoded_len());
        self.write_bytes(&mut out);
        out
    }

    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        for e in &self.elems {
            e.write_bytes(out);
        }
    }
}

/// `[-b, b]` laid out so that row `i` of the negacyclic product matrix is the
/// contiguous window `ext[n - i .. 2n - i]`.
pub(crate) fn negacyclic_extension(b: &[u64]) -> Vec<u64> {
    let mut ext = Vec::with_capacity(2 * b.len());
    ext.extend(b.iter().map(|c| c.wrapping_neg()));
    ext.extend_from_slice(b);
    ext
}

/// `acc += a * b` in `Z_{2^64}[X]/(X^n + 1)`, with `ext` the negacyclic
/// extension of `b`.
#[multiversion(targets(
    "x86_64+avx512f+avx512dq+avx512vl",
    "x86_64+avx2",
    "aarch64+neon"
))]
pub(crate) fn mul_acc(acc: &mut [u64], a: &[u64], ext: &[u64]) {
    let n = acc.len();
    debug_assert_eq!(a.len(), n);
    debug_assert_eq!(ext.len(), 2 * n);
    // Fixed sizes let the accumulator live in registers.
    match n {
        16 => mul_acc_fixed::<16>(acc, a, ext),
        32 => mul_acc_fixed::<32>(acc, a, ext),
        64 => mul_acc_fixed::<64>(acc, a, ext),
        128 => mul_acc_fixed::<128>(acc, a, ext),
        _ => {
            for (i, &ai) in a.iter().enumerate() {
                let row = &ext[n - i..2 * n - i];
                for (o, &w) in acc.iter_mut().zip(row) {
                    *o = o.wrapping_add(ai.wrapping_mul(w));
                }
            }
        }
    }
}

#[inline(always)]
fn mul_acc_fixed<const N: usize>(acc: &mut [u64], a: &[u64], ext: &[u64]) {
    let mut local = [0u64; N];
    local.copy_from_slice(acc);
    for i in 0..N {
        let ai = a[i];
        let row: &[u64; N] = ext[N - i..2 * N - i].try_into().unwrap();
        for j in 0..N {
            local[j] = local[j].wrapping_add(ai.wrapping_mul(row[j]));
        }
    }
    acc.copy_from_slice(&local);
}

/// `acc += r * b` for a ternary `r`, using only additions.
#[multiversion(targets(
    "x86_64+avx512f+avx512dq+avx512vl",
    "x86_64+avx2",
    "aarch64+neon"
))]
pub(crate) fn ternary_mul_acc(acc: &mut [u64], r: &[i8], ext: &[u64]) {
    let n = acc.len();
    debug_assert_eq!(r.len(), n);
    match n {
        16 => ternary_mul_acc_fixed::<16>(acc, r, ext),
        32 => ternary_mul_acc_fixed::<32>(acc, r, ext),
        64 => ternary_mul_acc_fixed::<64>(acc, r, ext),
        128 => ternary_mul_acc_fixed::<128>(acc, r, ext),
        _ => {
            for (l, &rl) in r.iter().enumerate() {
                let row = &ext[n - l..2 * n - l];
                match rl {
                    1 => acc.iter_mut().zip(row).for_each(|(o, &w)| *o = o.wrapping_add(w)),
                    -1 => acc.iter_mut().zip(row).for_each(|(o, &w)| *o = o.wrapping_sub(w)),
                    _ => {}
                }
            }
        }
    }
}

/// Branch-free: each row is added under a sign mask.
#[inline(always)]
fn ternary_mul_acc_fixed<const N: usize>(acc: &mut [u64], r: &[i8], ext: &[u64]) {
    let mut local = [0u64; N];
    local.copy_from_slice(acc);
    for l in 0..N {
        let plus = 0u64.wrapping_sub((r[l] == 1) as u64);
        let minus = 0u64.wrapping_sub((r[l] == -1) as u64);
        let row: &[u64; N] = ext[N - l..2 * N - l].try_into().unwrap();
        for j in 0..N {
            local[j] = local[j].wrapping_add(row[j] & plus).wrapping_sub(row[j] & minus);
        }
    }
    acc.copy_from_slice(&local);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Textbook O(n^2) product with explicit sign tracking, in i128.
    fn schoolbook(a: &RingElement, b: &RingElement) -> RingElement {
        let ring = a.ring();
        let n = ring.n();
        let q = ring.q() as i128;
        let mut out = vec![0i128; n];
        for i in 0..n {
            for j in 0..n {
                let p = a.coeffs()[i] as i128 * b.coeffs()[j] as i128 % q;
                if i + j < n {
                    out[i + j] += p;
                } else {
                    out[i + j - n] -= p;
                }
            }
        }
        let coeffs = out.into_iter().map(|c| c.rem_euclid(q) as u64).collect();
        ring.element(coeffs).unwrap()
    }

    fn ring(n: usize, k: u32) -> Ring {
        Ring::new(n, k).unwrap()
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Ring::new(3, 8).is_err());
        assert!(Ring::new(0, 8).is_err());
        assert!(Ring::new(4, 0).is_err());
        assert!(Ring::new(4, 63).is_err());
        assert!(ring(4, 8).element(vec![0, 0, 0]).is_err());
        assert!(ring(4, 3).element(vec![8, 0, 0, 0]).is_err());
    }

    #[test]
    fn additive_identity_and_wraparound() {
        let r = ring(2, 3);
        let a = r.element(vec![3, 5]).unwrap();
        assert_eq!(a.add(&r.zero()).unwrap(), a);
        let b = r.element(vec![5, 3]).unwrap();
        assert_eq!(a.add(&b).unwrap(), r.zero());
    }

    #[test]
    fn mismatched_rings_are_rejected() {
        let a = ring(4, 8).one();
        let b = ring(4, 9).one();
        let c = ring(8, 8).one();
        assert!(matches!(a.add(&b), Err(RingError::Mismatch { .. })));
        assert!(matches!(a.mul(&c), Err(RingError::Mismatch { .. })));
    }

    #[test]
    fn x_times_x_wraps_negatively() {
        let r = Ring::new(2, 4).unwrap();
        let x = r.monomial(1);
        // X^2 = -1
        assert_eq!(x.mul(&x).unwrap().coeffs(), &[15, 0]);
    }

    #[test]
    fn multiplicative_identity() {
        let r = ring(64, 35);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let a = r.random(&mut rng);
        assert_eq!(a.mul(&r.one()).unwrap(), a);
        assert_eq!(r.one().mul(&a).unwrap(), a);
    }

    #[test]
    fn monomial_powers() {
        let r = ring(8, 10);
        assert_eq!(r.monomial(3).mul(&r.monomial(5)).unwrap(), r.monomial(8));
        assert_eq!(r.monomial(8), r.constant(r.mask()));
        assert_eq!(r.monomial(16), r.one());
    }

    #[test]
    fn mul_matches_schoolbook_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for &(n, k) in &[(1, 5), (2, 8), (4, 13), (64, 35), (128, 62)] {
            let r = ring(n, k);
            for _ in 0..50 {
                let a = r.random(&mut rng);
                let b = r.random(&mut rng);
                assert_eq!(a.mul(&b).unwrap(), schoolbook(&a, &b), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn ternary_kernel_matches_generic_multiply() {
        let r = ring(64, 35);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..20 {
            let c = r.random(&mut rng);
            let t: Vec<i8> = (0..64).map(|_| rng.random_range(-1i8..=1)).collect();
            let mut acc = vec![0u64; 64];
            ternary_mul_acc(&mut acc, &t, &negacyclic_extension(&c.coeffs));
            let t_elem = r.from_signed(&t.iter().map(|&v| v as i64).collect::<Vec<_>>()).unwrap();
            assert_eq!(r.masked(acc), c.mul(&t_elem).unwrap());
        }
    }

    #[test]
    fn scalar_mul_vec_edge_cases() {
        let r = ring(16, 20);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let a = r.random_vector(5, &mut rng);
        assert_eq!(a.scalar_mul(&r.zero()).unwrap(), r.zero_vector(5));
        assert_eq!(a.scalar_mul(&r.one()).unwrap(), a);
        let x = r.random(&mut rng);
        let got = a.scalar_mul(&x).unwrap();
        for (slot, ai) in got.elems().iter().zip(a.elems()) {
            assert_eq!(slot, &schoolbook(ai, &x));
        }
    }

    #[test]
    fn centered_norm_cases() {
        let r = ring(4, 8);
        assert_eq!(r.zero_vector(3).centered_norm(), 0.0);
        let mut v = r.zero_vector(2);
        v.elems[1].coeffs[2] = r.q() - 1;
        assert_eq!(v.centered_norm(), 1.0);
        // q/2 stays positive.
        v.elems[0].coeffs[0] = r.q() / 2;
        assert_eq!(v.centered_norm_sq(), 128 * 128 + 1);
    }

    #[test]
    fn centered_norm_matches_naive_sum() {
        let r = ring(64, 40);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..20 {
            let v = r.random_vector(10, &mut rng);
            let naive: f64 = v
                .elems()
                .iter()
                .flat_map(|e| e.coeffs().iter())
                .map(|&c| {
                    let c = c as i128;
                    let q = r.q() as i128;
                    let centered = if c > q / 2 { c - q } else { c };
                    (centered * centered) as f64
                })
                .sum::<f64>()
                .sqrt();
            let got = v.centered_norm();
            assert!((got - naive).abs() <= 1e-9 * naive, "{got} vs {naive}");
        }
    }

    #[test]
    fn bit_decomp_small_example() {
        let r = ring(2, 3);
        let x = r.element(vec![5, 1]).unwrap();
        let bits: Vec<bool> = x.bit_decomp().iter().collect();
        assert_eq!(bits, [true, false, true, true, false, false]);
        assert_eq!(r.zero().bit_decomp(), BitString::zeros(6));
    }

    #[test]
    fn bit_decomp_round_trips() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for &(n, k) in &[(2, 3), (8, 17), (64, 35)] {
            let r = ring(n, k);
            for _ in 0..1000 {
                let x = r.random(&mut rng);
                assert_eq!(r.from_bit_decomp(&x.bit_decomp()).unwrap(), x);
            }
        }
    }

    #[test]
    fn bit_decomp_is_injective_on_random_pairs() {
        let r = ring(8, 11);
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        for _ in 0..10_000 {
            let a = r.random(&mut rng);
            let b = r.random(&mut rng);
            if a != b {
                assert_ne!(a.bit_decomp(), b.bit_decomp());
            }
        }
    }

    #[test]
    fn byte_encoding_round_trips() {
        let r = ring(8, 30);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let v = r.random_vector(3, &mut rng);
        let bytes = v.to_bytes();
        assert_eq!(bytes.len(), 3 * 8 * 8);
        let mut reader = ByteReader::new(&bytes);
        assert_eq!(r.decode_vector(3, &mut reader).unwrap(), v);
        assert!(reader.is_empty());
    }

    fn arb_elem(n: usize, k: u32) -> impl Strategy<Value = RingElement> {
        let r = ring(n, k);
        proptest::collection::vec(0..r.q(), n).prop_map(move |c| r.element(c).unwrap())
    }

    fn arb_triple() -> impl Strategy<Value = (RingElement, RingElement, RingElement)> {
        prop_oneof![Just((2usize, 13u32)), Just((4, 20)), Just((64, 35))]
            .prop_flat_map(|(n, k)| (arb_elem(n, k), arb_elem(n, k), arb_elem(n, k)))
    }

    proptest! {
        #[test]
        fn ring_axioms((a, b, c) in arb_triple()) {
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
            prop_assert_eq!(
                a.mul(&b).unwrap().mul(&c).unwrap(),
                a.mul(&b.mul(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(
                a.mul(&b.add(&c).unwrap()).unwrap(),
                a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(a.mul(&b).unwrap(), schoolbook(&a, &b));
        }

        #[test]
        fn add_matches_integer_addition((a, b, _c) in arb_triple()) {
            let q = a.ring().q() as u128;
            let expected: Vec<u64> = a.coeffs().iter().zip(b.coeffs())
                .map(|(&x, &y)| ((x as u128 + y as u128) % q) as u64)
                .collect();
            let sum = a.add(&b).unwrap();
            prop_assert_eq!(sum.coeffs(), expected.as_slice());
            prop_assert_eq!(a.sub(&b).unwrap().add(&b).unwrap(), a.clone());
        }
    }
}
