//! Fixed-length bit strings with GF(2) helpers.

use rand::Rng;

use crate::codec::{ByteReader, ParseError};
use crate::error::RingError;

/// A packed bit string of fixed logical length. Bit `i` lives in word
/// `i / 64` at position `i % 64`; bits past `len` are always zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut out = Self::zeros(0);
        for b in bits {
            if out.len.is_multiple_of(64) {
                out.words.push(0);
            }
            out.words[out.len / 64] |= (b as u64) << (out.len % 64);
            out.len += 1;
        }
        out
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut out = Self::zeros(len);
        for w in &mut out.words {
            *w = rng.next_u64();
        }
        out.clear_tail();
        out
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Writes the low `width` bits of `value` little-endian at `start`.
    pub(crate) fn write_bits(&mut self, start: usize, width: usize, value: u64) {
        debug_assert!(width <= 64 && start + width <= self.len);
        for t in 0..width {
            if (value >> t) & 1 == 1 {
                self.words[(start + t) / 64] |= 1u64 << ((start + t) % 64);
            }
        }
    }

    pub(crate) fn read_bits(&self, start: usize, width: usize) -> u64 {
        debug_assert!(width <= 64 && start + width <= self.len);
        (0..width).fold(0u64, |acc, t| {
            let bit = (self.words[(start + t) / 64] >> ((start + t) % 64)) & 1;
            acc | (bit << t)
        })
    }

    pub fn xor(&self, other: &Self) -> Result<Self, RingError> {
        self.check_len(other)?;
        Ok(Self {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// Inner product over GF(2).
    pub fn dot_mod2(&self, other: &Self) -> Result<bool, RingError> {
        self.check_len(other)?;
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        Ok(ones % 2 == 1)
    }

    fn check_len(&self, other: &Self) -> Result<(), RingError> {
        if self.len != other.len {
            return Err(RingError::LengthMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(())
    }

    /// Bits packed little-endian within bytes, `ceil(len / 8)` bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        self.write_bytes(&mut out);
        out
    }

    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        let nbytes = self.encoded_len();
        let start = out.len();
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.truncate(start + nbytes);
    }

    pub fn encoded_len(&self) -> usize {
        self.len.div_ceil(8)
    }

    /// Decodes `len` bits, rejecting nonzero padding bits.
    pub fn decode(len: usize, r: &mut ByteReader<'_>) -> Result<Self, ParseError> {
        let at = r.offset();
        let bytes = r.take(len.div_ceil(8))?;
        let mut out = Self::zeros(len);
        for (i, chunk) in bytes.chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            out.words[i] = u64::from_le_bytes(buf);
        }
        let before = out.words.clone();
        out.clear_tail();
        if before != out.words {
            return Err(ParseError::invalid(at + len / 8, "nonzero padding bits"));
        }
        Ok(out)
    }

    pub fn from_bytes(len: usize, bytes: &[u8]) -> Result<Self, ParseError> {
        let mut r = ByteReader::new(bytes);
        let out = Self::decode(len, &mut r)?;
        r.finish()?;
        Ok(out)
    }
}
