//! The one-bit hash `H`.
//!
//! The deterministic backend takes the least significant bit of a standard
//! digest (read as a big-endian integer, so the low bit of the last byte).
//! The lazy backend answers fresh inputs with uniform bits and keeps an
//! inspectable table, which the soundness experiments need.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256, Sha512};

use crate::error::OracleError;
use crate::ring::RingElement;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum HashAlg {
    #[default]
    Sha256,
    Sha512,
}

impl HashAlg {
    pub fn name(self) -> &'static str {
        match self {
            HashAlg::Sha256 => "sha256",
            HashAlg::Sha512 => "sha512",
        }
    }

    fn low_bit(self, input: &[u8]) -> bool {
        let last = match self {
            HashAlg::Sha256 => *Sha256::digest(input).last().unwrap(),
            HashAlg::Sha512 => *Sha512::digest(input).last().unwrap(),
        };
        last & 1 == 1
    }
}

impl fmt::Display for HashAlg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HashAlg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "sha256" => Ok(HashAlg::Sha256),
            "sha512" => Ok(HashAlg::Sha512),
            other => Err(format!("unknown hash {other:?} (expected sha256 or sha512)")),
        }
    }
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
enum Backend {
    Deterministic(HashAlg),
    Lazy {
        table: IndexMap<Vec<u8>, bool>,
        rng: ChaCha12Rng,
    },
}

/// A random-oracle instance. Every query is appended to the query log.
#[derive(Clone, Debug)]
pub struct Oracle {
    backend: Backend,
    log: Vec<Vec<u8>>,
}

/// Oracle input for a domain element: its packed bit decomposition.
pub fn oracle_input(x: &RingElement) -> Vec<u8> {
    x.bit_decomp().to_bytes()
}

impl Oracle {
    pub fn deterministic(alg: HashAlg) -> Self {
        Self {
            backend: Backend::Deterministic(alg),
            log: Vec::new(),
        }
    }

    /// Lazily sampled table; fresh answers come from a generator seeded here.
    pub fn lazy(seed: u64) -> Self {
        Self {
            backend: Backend::Lazy {
                table: IndexMap::new(),
                rng: ChaCha12Rng::seed_from_u64(seed),
            },
            log: Vec::new(),
        }
    }

    pub fn is_lazy(&self) -> bool {
        matches!(self.backend, Backend::Lazy { .. })
    }

    /// Short description for transcripts, e.g. `sha256` or `lazy`.
    pub fn describe(&self) -> &'static str {
        match &self.backend {
            Backend::Deterministic(alg) => alg.name(),
            Backend::Lazy { .. } => "lazy",
        }
    }

    pub fn query(&mut self, input: &[u8]) -> bool {
        self.log.push(input.to_vec());
        match &mut self.backend {
            Backend::Deterministic(alg) => alg.low_bit(input),
            Backend::Lazy { table, rng } => {
                if let Some(&bit) = table.get(input) {
                    bit
                } else {
                    let bit = rng.random();
                    table.insert(input.to_vec(), bit);
                    bit
                }
            }
        }
    }

    pub fn query_element(&mut self, x: &RingElement) -> bool {
        self.query(&oracle_input(x))
    }

    /// Reads the table without creating entries.
    pub fn lookup(&self, input: &[u8]) -> Result<Option<bool>, OracleError> {
        match &self.backend {
            Backend::Deterministic(_) => Err(OracleError::Unsupported),
            Backend::Lazy { table, .. } => Ok(table.get(input).copied()),
        }
    }

    /// Table entries in first-query order.
    pub fn table(&self) -> Result<&IndexMap<Vec<u8>, bool>, OracleError> {
        match &self.backend {
            Backend::Deterministic(_) => Err(OracleError::Unsupported),
            Backend::Lazy { table, .. } => Ok(table),
        }
    }

    pub fn query_log(&self) -> &[Vec<u8>] {
        &self.log
    }
}
