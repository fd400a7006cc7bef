//! Verifier side of the two-message protocol.
//!
//! The verifier sends a key, receives `lambda` tuples `(y, m, d)`, inverts
//! each `y` to its claw `(x0, x1)` and checks, over GF(2),
//! `m = d . (bits(x0) ^ bits(x1)) ^ H(x0) ^ H(x1)`. It accepts when all `y`
//! are distinct and strictly more than three quarters of the tuples pass.

use std::collections::HashSet;

use rand::Rng;

use crate::bits::BitString;
use crate::error::ProtocolError;
use crate::ntcf::{gen_f, NtcfKey, NtcfTrapdoor};
use crate::oracle::Oracle;
use crate::params::Params;
use crate::ring::{RingElement, RingVector};

/// One prover answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProverTuple {
    pub y: RingVector,
    pub m: bool,
    pub d: BitString,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub accepted: bool,
    pub count: usize,
    pub per_tuple: Vec<bool>,
    /// False when two tuples repeated a `y`, which rejects outright.
    pub distinct: bool,
}

/// `4 count > 3 lambda`, i.e. `count > 0.75 lambda` without rounding.
pub fn threshold_met(count: usize, lambda: usize) -> bool {
    4 * count > 3 * lambda
}

/// The bit `m` that satisfies the check for claw `(x0, x1)` and mask `d`.
/// Queries `H(x0)` then `H(x1)`.
pub fn expected_m(x0: &RingElement, x1: &RingElement, d: &BitString, oracle: &mut Oracle) -> bool {
    let diff = x0.bit_decomp().xor(&x1.bit_decomp()).expect("same ring");
    let dot = d.dot_mod2(&diff).expect("mask length checked by caller");
    dot ^ oracle.query_element(x0) ^ oracle.query_element(x1)
}

/// Generates the challenge key and the verifier's trapdoor.
pub fn make_challenge<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> (NtcfKey, NtcfTrapdoor) {
    gen_f(params, rng)
}

/// Checks that every tuple has the shape the key expects.
pub fn check_shapes(params: &Params, tuples: &[ProverTuple]) -> Result<(), ProtocolError> {
    if tuples.len() != params.lambda() {
        return Err(ProtocolError::TupleCount {
            expected: params.lambda(),
            actual: tuples.len(),
        });
    }
    for (i, t) in tuples.iter().enumerate() {
        if t.y.ring() != params.ring() || t.y.len() != params.m() {
            return Err(ProtocolError::Shape(format!("tuple {i}: image has the wrong shape")));
        }
        if t.d.len() != params.w() {
            return Err(ProtocolError::Shape(format!(
                "tuple {i}: mask has {} bits, expected {}",
                t.d.len(),
                params.w()
            )));
        }
    }
    Ok(())
}

/// True if two tuples share an image.
pub fn has_repeated_image(tuples: &[ProverTuple]) -> bool {
    let mut seen = HashSet::with_capacity(tuples.len());
    tuples.iter().any(|t| !seen.insert(t.y.to_bytes()))
}

/// Runs the verifier. A tuple whose image has no preimage simply fails.
pub fn verify(trapdoor: &NtcfTrapdoor, tuples: &[ProverTuple], oracle: &mut Oracle) -> Result<Verdict, ProtocolError> {
    let params = trapdoor.params();
    check_shapes(params, tuples)?;
    if has_repeated_image(tuples) {
        return Ok(Verdict {
            accepted: false,
            count: 0,
            per_tuple: vec![false; tuples.len()],
            distinct: false,
        });
    }
    let mut per_tuple = Vec::with_capacity(tuples.len());
    for t in tuples {
        let pass = match trapdoor.claw(&t.y)? {
            Some(c) => t.m == expected_m(&c.x0, &c.x1, &t.d, oracle),
            None => false,
        };
        per_tuple.push(pass);
    }
    let count = per_tuple.iter().filter(|&&p| p).count();
    Ok(Verdict {
        accepted: threshold_met(count, params.lambda()),
        count,
        per_tuple,
        distinct: true,
    })
}
