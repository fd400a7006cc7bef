//! Gadget trapdoors over a power-of-two modulus.
//!
//! The public vector is `a = [abar | g_j - sum_i abar_i * r_ij]` with gadget
//! `g_j = 2^(j-1)` and a ternary matrix `r`. Given `c = a*s + e`, combining
//! with `r` yields `u_j = 2^(j-1) * s + small`, and `s` falls out one bit at a
//! time starting from the top level, which isolates the lowest bit.

use rand::Rng;

use crate::codec::{ByteReader, ParseError};
use crate::error::RingError;
use crate::ring::{negacyclic_extension, ternary_mul_acc, Ring, RingElement, RingVector};

/// Secret ternary matrix `r` (`m_bar` rows, one column per gadget level).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetTrapdoor {
    ring: Ring,
    m_bar: usize,
    /// Coefficients in `{-1, 0, 1}`, ordered row, column, coefficient.
    r: Vec<i8>,
}

impl GadgetTrapdoor {
    pub fn new(ring: Ring, m_bar: usize, r: Vec<i8>) -> Result<Self, RingError> {
        let expected = m_bar * ring.log_q() as usize * ring.n();
        if r.len() != expected {
            return Err(RingError::LengthMismatch {
                expected,
                actual: r.len(),
            });
        }
        if let Some(&bad) = r.iter().find(|&&c| !(-1..=1).contains(&c)) {
            return Err(RingError::Unreduced(bad as u64));
        }
        Ok(Self { ring, m_bar, r })
    }

    pub fn random<R: Rng + ?Sized>(ring: Ring, m_bar: usize, rng: &mut R) -> Self {
        let len = m_bar * ring.log_q() as usize * ring.n();
        let r = (0..len).map(|_| rng.random_range(-1i8..=1)).collect();
        Self { ring, m_bar, r }
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn m_bar(&self) -> usize {
        self.m_bar
    }

    pub fn levels(&self) -> usize {
        self.ring.log_q() as usize
    }

    /// Total length `m = m_bar + levels` of the public vector.
    pub fn width(&self) -> usize {
        self.m_bar + self.levels()
    }

    /// Entry `r_ij` (zero-based `j`) as signed coefficients.
    pub fn entry(&self, i: usize, j: usize) -> &[i8] {
        let n = self.ring.n();
        let at = (i * self.levels() + j) * n;
        &self.r[at..at + n]
    }

    /// Entry `r_ij` as a ring element.
    pub fn entry_element(&self, i: usize, j: usize) -> RingElement {
        let c: Vec<i64> = self.entry(i, j).iter().map(|&v| v as i64).collect();
        self.ring.from_signed(&c).expect("entry has ring length")
    }

    /// `acc_j = sum_i x_i * r_ij` for each level `j`, over raw accumulators.
    fn mix(&self, x: &[RingElement]) -> Vec<Vec<u64>> {
        let n = self.ring.n();
        let mut acc = vec![vec![0u64; n]; self.levels()];
        for (i, xi) in x.iter().enumerate() {
            let ext = negacyclic_extension(xi.coeffs());
            for (j, out) in acc.iter_mut().enumerate() {
                ternary_mul_acc(out, self.entry(i, j), &ext);
            }
        }
        acc
    }

    /// Completes `abar` (length `m_bar`) into the public vector `a`.
    pub fn public_vector(&self, abar: &RingVector) -> Result<RingVector, RingError> {
        if abar.ring() != self.ring {
            return Err(RingError::Mismatch {
                left: self.ring,
                right: abar.ring(),
            });
        }
        if abar.len() != self.m_bar {
            return Err(RingError::LengthMismatch {
                expected: self.m_bar,
                actual: abar.len(),
            });
        }
        let mask = self.ring.mask();
        let mut elems = abar.elems().to_vec();
        for (j, acc) in self.mix(abar.elems()).into_iter().enumerate() {
            let mut coeffs: Vec<u64> = acc.into_iter().map(|c| c.wrapping_neg() & mask).collect();
            coeffs[0] = coeffs[0].wrapping_add(1u64 << j) & mask;
            elems.push(self.ring.element(coeffs)?);
        }
        RingVector::new(self.ring, elems)
    }

    /// `u_j = c_{m_bar + j} + sum_i c_i * r_ij` for every gadget level.
    pub fn combine(&self, c: &RingVector) -> Result<Vec<RingElement>, RingError> {
        if c.ring() != self.ring {
            return Err(RingError::Mismatch {
                left: self.ring,
                right: c.ring(),
            });
        }
        if c.len() != self.width() {
            return Err(RingError::LengthMismatch {
                expected: self.width(),
                actual: c.len(),
            });
        }
        let mask = self.ring.mask();
        let acc = self.mix(&c.elems()[..self.m_bar]);
        acc.into_iter()
            .zip(&c.elems()[self.m_bar..])
            .map(|(acc, top)| {
                let coeffs = acc
                    .iter()
                    .zip(top.coeffs())
                    .map(|(&a, &t)| a.wrapping_add(t) & mask)
                    .collect();
                self.ring.element(coeffs)
            })
            .collect()
    }

    /// Packed 2-bit codes (`00` = 0, `01` = +1, `10` = -1), LSB-first within
    /// each byte, after `m_bar` and the level count as 2-byte little-endian.
    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.m_bar as u16).to_le_bytes());
        out.extend_from_slice(&(self.levels() as u16).to_le_bytes());
        for chunk in self.r.chunks(4) {
            let mut byte = 0u8;
            for (k, &c) in chunk.iter().enumerate() {
                let code = match c {
                    1 => 0b01,
                    -1 => 0b10,
                    _ => 0b00,
                };
                byte |= code << (2 * k);
            }
            out.push(byte);
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_bytes(&mut out);
        out
    }

    pub fn decode(ring: Ring, r: &mut ByteReader<'_>) -> Result<Self, ParseError> {
        let at = r.offset();
        let m_bar = r.u16_le()? as usize;
        let levels = r.u16_le()?;
        if levels as u32 != ring.log_q() {
            return Err(ParseError::invalid(at + 2, "trapdoor level count does not match modulus"));
        }
        let count = m_bar * levels as usize * ring.n();
        let start = r.offset();
        let bytes = r.take(count.div_ceil(4))?;
        let mut coeffs = Vec::with_capacity(count);
        for (b, &byte) in bytes.iter().enumerate() {
            for k in 0..4 {
                let code = (byte >> (2 * k)) & 0b11;
                if b * 4 + k >= count {
                    if code != 0 {
                        return Err(ParseError::invalid(start + b, "nonzero trapdoor padding"));
                    }
                    continue;
                }
                coeffs.push(match code {
                    0b00 => 0,
                    0b01 => 1,
                    0b10 => -1,
                    _ => return Err(ParseError::invalid(start + b, "invalid trapdoor code")),
                });
            }
        }
        Ok(Self {
            ring,
            m_bar,
            r: coeffs,
        })
    }
}

/// Samples `abar` uniformly and a ternary `r`, returning the public vector
/// and its trapdoor.
pub fn gen_trap<R: Rng + ?Sized>(ring: Ring, m_bar: usize, rng: &mut R) -> (RingVector, GadgetTrapdoor) {
    let abar = ring.random_vector(m_bar, rng);
    let trapdoor = GadgetTrapdoor::random(ring, m_bar, rng);
    let a = trapdoor.public_vector(&abar).expect("shapes agree by construction");
    (a, trapdoor)
}

/// Recovers `s` from `u_j = 2^(j-1) * s + noise_j`. Exact whenever every
/// centered noise coefficient is below `q/4` in magnitude; returns `None` on
/// a decoding tie, which can only happen when that condition fails.
pub fn gadget_decode(u: &[RingElement], ring: Ring) -> Option<RingElement> {
    let k = ring.log_q() as usize;
    if u.len() != k || k < 2 || u.iter().any(|e| e.ring() != ring) {
        return None;
    }
    let q = ring.q();
    let mask = ring.mask();
    let quarter = q >> 2;
    let mut coeffs = vec![0u64; ring.n()];
    for (p, out) in coeffs.iter_mut().enumerate() {
        let mut known = 0u64;
        for t in 0..k {
            let level = k - 1 - t;
            let residual = u[level].coeffs()[p].wrapping_sub(known << level) & mask;
            let bit = residual >= quarter && residual < q - quarter;
            let rest = ring.center(residual.wrapping_sub((bit as u64) << (k - 1)) & mask);
            if rest.unsigned_abs() >= quarter {
                return None;
            }
            known |= (bit as u64) << t;
        }
        *out = known;
    }
    Some(ring.element(coeffs).expect("decoded coefficients are reduced"))
}

/// Inverts `c` and also returns the residual `c - a*s`.
pub(crate) fn invert_with_residual(
    a: &RingVector,
    trapdoor: &GadgetTrapdoor,
    c: &RingVector,
    bound_sq: u128,
) -> Result<Option<(RingElement, RingVector)>, RingError> {
    if a.ring() != c.ring() {
        return Err(RingError::Mismatch {
            left: a.ring(),
            right: c.ring(),
        });
    }
    if a.len() != c.len() {
        return Err(RingError::LengthMismatch {
            expected: a.len(),
            actual: c.len(),
        });
    }
    let u = trapdoor.combine(c)?;
    let Some(s) = gadget_decode(&u, c.ring()) else {
        return Ok(None);
    };
    let residual = c.sub(&a.scalar_mul_unchecked(&s))?;
    if residual.centered_norm_sq() > bound_sq {
        return Ok(None);
    }
    Ok(Some((s, residual)))
}

/// Recovers `s` from `c = a*s + e`, accepting only if `|c - a*s|^2 <=
/// bound_sq` (squared, compared exactly).
pub fn trap_invert(
    a: &RingVector,
    trapdoor: &GadgetTrapdoor,
    c: &RingVector,
    bound_sq: u128,
) -> Result<Option<RingElement>, RingError> {
    Ok(invert_with_residual(a, trapdoor, c, bound_sq)?.map(|(s, _)| s))
}
