//! The Ring-LWE noisy trapdoor claw-free family.
//!
//! Key `(a, v = a*s + e)`. Branch `b` maps `x` to a Gaussian of width `B_P`
//! centred on `a*x + b*v`, so `x0 = x1 + s` is a claw: both branches are
//! centred on `a*x0` up to the small key noise `e`.

use std::sync::OnceLock;

use rand::Rng;

use crate::codec::{ByteReader, ParseError, ParseErrorKind};
use crate::error::RingError;
use crate::gadget::{gen_trap, invert_with_residual, GadgetTrapdoor};
use crate::gauss::{DiscreteGaussian, GaussParams};
use crate::params::Params;
use crate::ring::{RingElement, RingVector};

pub use crate::params::hellinger_bound;

pub const KEY_MAGIC: &[u8; 4] = b"PQNT";
pub const KEY_VERSION: u8 = 0x01;

/// An unnormalized density kept as its natural log, since values at real
/// parameters underflow `f64` (`exp(-1000)` and below).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Density {
    log: f64,
}

impl Density {
    pub const ZERO: Self = Self {
        log: f64::NEG_INFINITY,
    };
    pub const ONE: Self = Self { log: 0.0 };

    pub fn from_log(log: f64) -> Self {
        Self { log }
    }

    pub fn log(self) -> f64 {
        self.log
    }

    /// The density itself; may underflow to zero for in-support points.
    pub fn value(self) -> f64 {
        self.log.exp()
    }

    /// True exactly outside the support.
    pub fn is_zero(self) -> bool {
        self.log == f64::NEG_INFINITY
    }
}

/// Public key `(a, v)`.
#[derive(Clone, Debug)]
pub struct NtcfKey {
    params: Params,
    a: RingVector,
    v: RingVector,
    sampler: OnceLock<DiscreteGaussian>,
}

impl PartialEq for NtcfKey {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.a == other.a && self.v == other.v
    }
}

impl Eq for NtcfKey {}

impl NtcfKey {
    pub fn new(params: Params, a: RingVector, v: RingVector) -> Result<Self, RingError> {
        for vec in [&a, &v] {
            if vec.ring() != params.ring() {
                return Err(RingError::Mismatch {
                    left: params.ring(),
                    right: vec.ring(),
                });
            }
            if vec.len() != params.m() {
                return Err(RingError::LengthMismatch {
                    expected: params.m(),
                    actual: vec.len(),
                });
            }
        }
        Ok(Self {
            params,
            a,
            v,
            sampler: OnceLock::new(),
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn a(&self) -> &RingVector {
        &self.a
    }

    pub fn v(&self) -> &RingVector {
        &self.v
    }

    fn eval_gauss(&self) -> GaussParams {
        GaussParams::new(self.params.eval_noise(), self.params.noise_dim()).expect("validated parameters")
    }

    fn sampler(&self) -> &DiscreteGaussian {
        self.sampler.get_or_init(|| DiscreteGaussian::new(self.eval_gauss()))
    }

    fn check_shape(&self, x: &RingElement, y: &RingVector) -> Result<(), RingError> {
        let ring = self.params.ring();
        if x.ring() != ring || y.ring() != ring {
            return Err(RingError::Mismatch {
                left: ring,
                right: if x.ring() != ring { x.ring() } else { y.ring() },
            });
        }
        if y.len() != self.params.m() {
            return Err(RingError::LengthMismatch {
                expected: self.params.m(),
                actual: y.len(),
            });
        }
        Ok(())
    }

    /// `y - a*x - b*v`.
    pub fn residual(&self, b: bool, x: &RingElement, y: &RingVector) -> Result<RingVector, RingError> {
        self.check_shape(x, y)?;
        let mut r = y.sub(&self.a.scalar_mul_unchecked(x))?;
        if b {
            r = r.sub(&self.v)?;
        }
        Ok(r)
    }

    /// Branch density from a precomputed residual.
    pub fn density_of_residual(&self, residual: &RingVector) -> Density {
        Density::from_log(self.eval_gauss().log_rho_of_norm_sq(residual.centered_norm_sq()))
    }

    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        let p = &self.params;
        out.extend_from_slice(KEY_MAGIC);
        out.push(KEY_VERSION);
        for field in [
            p.n() as u64,
            p.log_q() as u64,
            p.m_bar() as u64,
            p.key_noise(),
            p.eval_noise(),
            p.inversion_const(),
            p.lambda() as u64,
        ] {
            out.extend_from_slice(&field.to_le_bytes());
        }
        self.a.write_bytes(out);
        self.v.write_bytes(out);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_bytes(&mut out);
        out
    }

    pub fn decode(r: &mut ByteReader<'_>) -> Result<Self, ParseError> {
        let start = r.offset();
        if r.take(4)? != KEY_MAGIC {
            return Err(ParseError::new(start, ParseErrorKind::BadMagic));
        }
        let version = r.u8()?;
        if version != KEY_VERSION {
            return Err(ParseError::new(start + 4, ParseErrorKind::Version(version)));
        }
        let at = r.offset();
        let mut f = [0u64; 7];
        for v in &mut f {
            *v = r.u64_le()?;
        }
        let [n, k_g, m_bar, key_noise, eval_noise, c_t, lambda] = f;
        let to_usize = |v: u64| usize::try_from(v).map_err(|_| ParseError::invalid(at, "parameter out of range"));
        let params = Params::new(
            to_usize(lambda)?,
            to_usize(n)?,
            u32::try_from(k_g).map_err(|_| ParseError::invalid(at + 8, "log2 q out of range"))?,
            to_usize(m_bar)?,
            key_noise,
            eval_noise,
            c_t,
        )
        .map_err(|_| ParseError::invalid(at, "parameters violate constraints"))?;
        // Refuse to allocate for bodies the input cannot contain.
        let body = (2 * params.m() as u128) * params.ring().encoded_len() as u128;
        if body > r.remaining() as u128 {
            return Err(ParseError::new(
                r.offset(),
                ParseErrorKind::Truncated {
                    needed: usize::try_from(body - r.remaining() as u128).unwrap_or(usize::MAX),
                },
            ));
        }
        let ring = params.ring();
        let a = ring.decode_vector(params.m(), r)?;
        let v = ring.decode_vector(params.m(), r)?;
        Ok(Self::new(params, a, v).expect("decoded with matching shape"))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ParseError> {
        let mut r = ByteReader::new(bytes);
        let key = Self::decode(&mut r)?;
        r.finish()?;
        Ok(key)
    }
}

/// Secret side: gadget trapdoor, the key, `s`, and the key noise `e` (which
/// is determined by the rest and kept to avoid recomputing it).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NtcfTrapdoor {
    key: NtcfKey,
    gadget: GadgetTrapdoor,
    s: RingElement,
    e: RingVector,
}

/// Both preimages of an image together with their branch residuals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Claw {
    pub x0: RingElement,
    pub x1: RingElement,
    /// `y - a*x0`
    pub residual0: RingVector,
    /// `y - a*x1 - v`
    pub residual1: RingVector,
}

impl NtcfTrapdoor {
    pub fn key(&self) -> &NtcfKey {
        &self.key
    }

    pub fn params(&self) -> &Params {
        &self.key.params
    }

    pub fn gadget(&self) -> &GadgetTrapdoor {
        &self.gadget
    }

    pub fn secret(&self) -> &RingElement {
        &self.s
    }

    pub fn key_noise(&self) -> &RingVector {
        &self.e
    }

    /// Both preimages from one trapdoor inversion.
    pub fn claw(&self, y: &RingVector) -> Result<Option<Claw>, RingError> {
        let Some((x0, residual0)) =
            invert_with_residual(&self.key.a, &self.gadget, y, self.params().inversion_sq())?
        else {
            return Ok(None);
        };
        let x1 = x0.sub(&self.s)?;
        let residual1 = residual0.sub(&self.e)?;
        Ok(Some(Claw {
            x0,
            x1,
            residual0,
            residual1,
        }))
    }

    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        self.key.write_bytes(out);
        self.s.write_bytes(out);
        self.gadget.write_bytes(out);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_bytes(&mut out);
        out
    }

    /// Decodes and checks that the trapdoor matches the key.
    pub fn decode(r: &mut ByteReader<'_>) -> Result<Self, ParseError> {
        let key = NtcfKey::decode(r)?;
        let params = key.params;
        let ring = params.ring();
        let s = ring.decode_element(r)?;
        let at = r.offset();
        let gadget = GadgetTrapdoor::decode(ring, r)?;
        if gadget.m_bar() != params.m_bar() {
            return Err(ParseError::invalid(at, "trapdoor width does not match parameters"));
        }
        let abar = RingVector::new(ring, key.a.elems()[..params.m_bar()].to_vec()).expect("same ring");
        if gadget.public_vector(&abar).expect("shapes checked") != key.a {
            return Err(ParseError::invalid(at, "trapdoor does not match public key"));
        }
        let e = key.v.sub(&key.a.scalar_mul_unchecked(&s)).expect("same shape");
        let limit = (params.key_noise() as u128).pow(2) * params.noise_dim() as u128;
        if e.centered_norm_sq() > limit {
            return Err(ParseError::invalid(at, "secret does not match public key"));
        }
        Ok(Self { key, gadget, s, e })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ParseError> {
        let mut r = ByteReader::new(bytes);
        let t = Self::decode(&mut r)?;
        r.finish()?;
        Ok(t)
    }
}

/// Samples a key and its trapdoor: `s` uniform, `e` Gaussian of width `B_V`
/// (zero when `B_V = 0`).
pub fn gen_f<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> (NtcfKey, NtcfTrapdoor) {
    let ring = params.ring();
    let (a, gadget) = gen_trap(ring, params.m_bar(), rng);
    let s = ring.random(rng);
    let e = if params.key_noise() == 0 {
        ring.zero_vector(params.m())
    } else {
        let g = GaussParams::new(params.key_noise(), params.noise_dim()).expect("positive width");
        let coeffs = DiscreteGaussian::new(g).sample(rng);
        ring.vector_from_signed(&coeffs).expect("length n m")
    };
    let v = a.scalar_mul_unchecked(&s).add(&e).expect("same shape");
    let key = NtcfKey::new(*params, a, v).expect("shapes agree by construction");
    let trapdoor = NtcfTrapdoor {
        key: key.clone(),
        gadget,
        s,
        e,
    };
    (key, trapdoor)
}

/// Unnormalized branch density at `y`, computed from the public key alone.
pub fn density_fprime(
    key: &NtcfKey,
    b: bool,
    x: &RingElement,
    y: &RingVector,
) -> Result<Density, RingError> {
    Ok(key.density_of_residual(&key.residual(b, x, y)?))
}

/// `a*x + b*v + noise` for a given noise vector.
pub fn image_with_noise(
    key: &NtcfKey,
    b: bool,
    x: &RingElement,
    noise: &RingVector,
) -> Result<RingVector, RingError> {
    let mut y = key.a.scalar_mul(x)?.add(noise)?;
    if b {
        y = y.add(&key.v)?;
    }
    Ok(y)
}

/// One draw of the evaluation noise.
pub fn sample_noise<R: Rng + ?Sized>(key: &NtcfKey, rng: &mut R) -> RingVector {
    let coeffs = key.sampler().sample(rng);
    key.params
        .ring()
        .vector_from_signed(&coeffs)
        .expect("sampler output matches the noise dimension")
}

/// Draws `y` from branch `b` at `x`.
pub fn sample_image<R: Rng + ?Sized>(
    key: &NtcfKey,
    b: bool,
    x: &RingElement,
    rng: &mut R,
) -> Result<RingVector, RingError> {
    let noise = sample_noise(key, rng);
    image_with_noise(key, b, x, &noise)
}

/// Support test `|y - a*x - b*v|^2 <= B_P^2 n m`, exact and trapdoor-free.
/// Stops at the first ring slot that pushes the norm over the bound.
pub fn chk_f(key: &NtcfKey, b: bool, x: &RingElement, y: &RingVector) -> Result<bool, RingError> {
    key.check_shape(x, y)?;
    let ring = key.params.ring();
    let bound = key.params.support_sq();
    let ext = crate::ring::negacyclic_extension(x.coeffs());
    let mut acc: u128 = 0;
    let mut prod = vec![0u64; ring.n()];
    for i in 0..key.params.m() {
        prod.iter_mut().for_each(|c| *c = 0);
        crate::ring::mul_acc(&mut prod, key.a.get(i).coeffs(), &ext);
        let yi = y.get(i).coeffs();
        let vi = key.v.get(i).coeffs();
        for t in 0..ring.n() {
            let mut r = yi[t].wrapping_sub(prod[t]);
            if b {
                r = r.wrapping_sub(vi[t]);
            }
            let c = ring.center(r & ring.mask()).unsigned_abs() as u128;
            acc += c * c;
        }
        if acc > bound {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Preimage of `y` on branch `b`, or `None` if `y` has no admissible
/// preimage.
pub fn inv_f(trapdoor: &NtcfTrapdoor, b: bool, y: &RingVector) -> Result<Option<RingElement>, RingError> {
    Ok(trapdoor.claw(y)?.map(|c| if b { c.x1 } else { c.x0 }))
}

/// `(x0, x1)` with `x0 = x1 + s`, both mapping to `y`.
pub fn claw_pair(trapdoor: &NtcfTrapdoor, y: &RingVector) -> Result<Option<(RingElement, RingElement)>, RingError> {
    Ok(trapdoor.claw(y)?.map(|c| (c.x0, c.x1)))
}
