//! Truncated discrete Gaussian over `Z^dim`.
//!
//! The density is `rho(v) = exp(-pi * |v|^2 / B^2)` restricted to
//! `|v| <= B * sqrt(dim)`. Because the untruncated joint density factors over
//! coordinates, sampling each coordinate from the one-dimensional law and
//! rejecting whole vectors that leave the ball gives the truncated law.
//!
//! One coordinate is drawn by envelope rejection: the support is cut into
//! blocks, a block is chosen from an alias table with weight
//! `len * max_rho(block)`, a point is chosen uniformly inside it and kept with
//! probability `rho(x) / max_rho(block)`. A precomputed per-block lower bound
//! skips the `exp` on most draws.

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use thiserror::Error;

/// Beyond `pi * t^2 / B^2 = 746` the density underflows to zero in `f64`.
const LOG_UNDERFLOW: f64 = 746.0;

/// Blocks per unit of width; larger means fewer slow-path rejections.
const BLOCKS_PER_WIDTH: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GaussError {
    #[error("Gaussian width must be at least 1")]
    Width,
    #[error("Gaussian dimension must be at least 1")]
    Dimension,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GaussParams {
    width: u64,
    dim: usize,
}

impl GaussParams {
    pub fn new(width: u64, dim: usize) -> Result<Self, GaussError> {
        if width == 0 {
            return Err(GaussError::Width);
        }
        if dim == 0 {
            return Err(GaussError::Dimension);
        }
        Ok(Self { width, dim })
    }

    pub fn width(&self) -> u64 {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `B^2 * dim`, the squared support radius.
    pub fn norm_bound_sq(&self) -> u128 {
        (self.width as u128) * (self.width as u128) * self.dim as u128
    }

    pub fn in_support(&self, norm_sq: u128) -> bool {
        norm_sq <= self.norm_bound_sq()
    }

    /// `ln rho` for a vector with the given squared norm, `-inf` outside the
    /// support.
    pub fn log_rho_of_norm_sq(&self, norm_sq: u128) -> f64 {
        if !self.in_support(norm_sq) {
            return f64::NEG_INFINITY;
        }
        let b = self.width as f64;
        -std::f64::consts::PI * norm_sq as f64 / (b * b)
    }
}

fn norm_sq(v: &[i64]) -> u128 {
    v.iter()
        .map(|&c| (c.unsigned_abs() as u128) * (c.unsigned_abs() as u128))
        .fold(0u128, |a, b| a.saturating_add(b))
}

/// Unnormalized density. Panics if `v.len() != g.dim()`.
pub fn dgauss_rho(g: &GaussParams, v: &[i64]) -> f64 {
    dgauss_log_rho(g, v).exp()
}

/// Natural log of [`dgauss_rho`]; `-inf` outside the support. Stays finite
/// where `dgauss_rho` itself underflows.
pub fn dgauss_log_rho(g: &GaussParams, v: &[i64]) -> f64 {
    assert_eq!(v.len(), g.dim, "vector length does not match Gaussian dimension");
    g.log_rho_of_norm_sq(norm_sq(v))
}

#[derive(Clone, Debug)]
struct Block {
    lo: i64,
    len: u64,
    log_max: f64,
    squeeze: f64,
}

/// Prepared sampler for one [`GaussParams`].
#[derive(Clone, Debug)]
pub struct DiscreteGaussian {
    params: GaussParams,
    blocks: Vec<Block>,
    alias: WeightedAliasIndex<f64>,
    neg_pi_over_b2: f64,
}

impl DiscreteGaussian {
    pub fn new(params: GaussParams) -> Self {
        let b = params.width as f64;
        let neg_pi_over_b2 = -std::f64::consts::PI / (b * b);
        let radius = isqrt(params.norm_bound_sq());
        let tail = (b * (LOG_UNDERFLOW / std::f64::consts::PI).sqrt()).ceil() as u128;
        let bound = radius.min(tail) as i64;
        let width = (params.width / BLOCKS_PER_WIDTH).max(1) as i64;

        let log_rho = |x: i64| neg_pi_over_b2 * (x as f64) * (x as f64);
        let mut blocks = Vec::new();
        let mut weights = Vec::new();
        let mut lo = -bound;
        while lo <= bound {
            let hi = (lo + width - 1).min(bound);
            let nearest = if lo <= 0 && 0 <= hi { 0 } else { lo.abs().min(hi.abs()) };
            let farthest = lo.abs().max(hi.abs());
            let log_max = log_rho(nearest);
            let len = (hi - lo + 1) as u64;
            let weight = len as f64 * log_max.exp();
            if weight > 0.0 {
                blocks.push(Block {
                    lo,
                    len,
                    log_max,
                    squeeze: (log_rho(farthest) - log_max).exp(),
                });
                weights.push(weight);
            }
            lo = hi + 1;
        }
        let alias = WeightedAliasIndex::new(weights).expect("block weights are positive and finite");
        Self {
            params,
            blocks,
            alias,
            neg_pi_over_b2,
        }
    }

    pub fn params(&self) -> GaussParams {
        self.params
    }

    /// One coordinate from the untruncated one-dimensional law (restricted to
    /// the coordinate range any in-support vector can reach).
    pub fn sample_coordinate<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        loop {
            let block = &self.blocks[self.alias.sample(rng)];
            let x = block.lo + rng.random_range(0..block.len) as i64;
            let u: f64 = rng.random();
            if u < block.squeeze {
                return x;
            }
            let accept = (self.neg_pi_over_b2 * (x as f64) * (x as f64) - block.log_max).exp();
            if u < accept {
                return x;
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<i64> {
        let mut out = vec![0i64; self.params.dim];
        self.sample_into(&mut out, rng);
        out
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, out: &mut [i64], rng: &mut R) {
        assert_eq!(out.len(), self.params.dim);
        let bound = self.params.norm_bound_sq();
        loop {
            let mut acc: u128 = 0;
            for c in out.iter_mut() {
                *c = self.sample_coordinate(rng);
                acc += (c.unsigned_abs() as u128).pow(2);
            }
            if acc <= bound {
                return;
            }
        }
    }
}

fn isqrt(v: u128) -> u128 {
    if v < 2 {
        return v;
    }
    let mut x = (v as f64).sqrt() as u128;
    while x * x > v {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= v {
        x += 1;
    }
    x
}
