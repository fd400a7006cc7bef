//! Classical provers.
//!
//! `Honest` reproduces the output law of the quantum prover. After the image
//! is measured the device holds `a0|0,x0> + a1|1,x1>` with `a_c` the square
//! roots of the branch densities at `y`. Measuring in the Hadamard basis
//! after the hash phase kickback gives `d` exactly uniform and the correct
//! `m` with probability `(a0 + a1)^2 / (2 (a0^2 + a1^2))`. Sampling from
//! that law needs both preimages, so the emulator needs the trapdoor. It
//! stands in for a quantum device and is no classical attack.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::bits::BitString;
use crate::error::ProverError;
use crate::ntcf::{image_with_noise, sample_image, sample_noise, Claw, NtcfKey, NtcfTrapdoor};
use crate::oracle::Oracle;
use crate::protocol::{expected_m, ProverTuple};
use crate::ring::{RingElement, RingVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Emulates the quantum prover (needs the trapdoor).
    Honest,
    /// Valid images, uniform `m` and `d`.
    RandomGuess,
    /// Knows one preimage per image and answers as if the other were absent.
    HalfClaw,
    /// Uses the trapdoor to satisfy every equation.
    TrapdoorCheat,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Honest,
        Strategy::RandomGuess,
        Strategy::HalfClaw,
        Strategy::TrapdoorCheat,
    ];

    pub fn needs_trapdoor(self) -> bool {
        matches!(self, Strategy::Honest | Strategy::TrapdoorCheat)
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Honest => "honest",
            Strategy::RandomGuess => "random_guess",
            Strategy::HalfClaw => "half_claw",
            Strategy::TrapdoorCheat => "trapdoor_cheat",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == norm)
            .ok_or_else(|| format!("unknown strategy {s:?}"))
    }
}

/// Probability that the Hadamard measurement of `a0|0,x0> + a1|1,x1>`
/// yields an `m` satisfying the check.
pub fn correct_m_probability(alpha0: f64, alpha1: f64) -> Result<f64, ProverError> {
    let ok = |a: f64| a.is_finite() && a >= 0.0;
    if !ok(alpha0) || !ok(alpha1) || alpha0 + alpha1 == 0.0 {
        return Err(ProverError::Amplitudes);
    }
    let s = alpha0 + alpha1;
    Ok(s * s / (2.0 * (alpha0 * alpha0 + alpha1 * alpha1)))
}

/// Branch amplitudes from log densities, scaled so the larger is 1.
pub fn amplitudes_from_logs(log0: f64, log1: f64) -> Option<(f64, f64)> {
    let top = log0.max(log1);
    if top == f64::NEG_INFINITY {
        return None;
    }
    Some((((log0 - top) / 2.0).exp(), ((log1 - top) / 2.0).exp()))
}

/// The claw through a known preimage: the other branch is one shift of
/// the secret away and its residual differs by the key noise.
fn claw_from_preimage(trapdoor: &NtcfTrapdoor, b: bool, x: RingElement, noise: RingVector) -> Result<Claw, ProverError> {
    let (s, e) = (trapdoor.secret(), trapdoor.key_noise());
    Ok(if b {
        Claw {
            x0: x.add(s)?,
            x1: x,
            residual0: noise.add(e)?,
            residual1: noise,
        }
    } else {
        Claw {
            x1: x.sub(s)?,
            x0: x,
            residual1: noise.sub(e)?,
            residual0: noise,
        }
    })
}

fn honest_tuple<R: Rng + ?Sized>(
    trapdoor: &NtcfTrapdoor,
    oracle: &mut Oracle,
    rng: &mut R,
    always_correct: bool,
) -> Result<ProverTuple, ProverError> {
    let key = trapdoor.key();
    let params = key.params();
    let b: bool = rng.random();
    let x = params.ring().random(rng);
    let noise = sample_noise(key, rng);
    let y = image_with_noise(key, b, &x, &noise)?;
    let claw = claw_from_preimage(trapdoor, b, x, noise)?;
    let d = BitString::random(params.w(), rng);
    let correct = expected_m(&claw.x0, &claw.x1, &d, oracle);
    if always_correct {
        return Ok(ProverTuple { y, m: correct, d });
    }
    let l0 = key.density_of_residual(&claw.residual0).log();
    let l1 = key.density_of_residual(&claw.residual1).log();
    let (a0, a1) = amplitudes_from_logs(l0, l1).ok_or(ProverError::NoClaw)?;
    let p = correct_m_probability(a0, a1)?;
    let m = if rng.random_bool(p.min(1.0)) { correct } else { !correct };
    Ok(ProverTuple { y, m, d })
}

/// Emulates the quantum prover's `lambda` answers.
pub fn prove_honest<R: Rng + ?Sized>(
    trapdoor: &NtcfTrapdoor,
    oracle: &mut Oracle,
    rng: &mut R,
) -> Result<Vec<ProverTuple>, ProverError> {
    (0..trapdoor.params().lambda())
        .map(|_| honest_tuple(trapdoor, oracle, rng, false))
        .collect()
}

/// Runs any strategy; strategies that need the trapdoor fail without one.
pub fn prove<R: Rng + ?Sized>(
    strategy: Strategy,
    key: &NtcfKey,
    oracle: &mut Oracle,
    trapdoor: Option<&NtcfTrapdoor>,
    rng: &mut R,
) -> Result<Vec<ProverTuple>, ProverError> {
    let params = key.params();
    let lambda = params.lambda();
    match strategy {
        Strategy::Honest => prove_honest(trapdoor.ok_or(ProverError::MissingTrapdoor("honest"))?, oracle, rng),
        Strategy::TrapdoorCheat => {
            let t = trapdoor.ok_or(ProverError::MissingTrapdoor("trapdoor_cheat"))?;
            (0..lambda).map(|_| honest_tuple(t, oracle, rng, true)).collect()
        }
        Strategy::RandomGuess => (0..lambda)
            .map(|_| {
                let b: bool = rng.random();
                let x = params.ring().random(rng);
                let y = sample_image(key, b, &x, rng)?;
                let m = rng.random();
                let d = BitString::random(params.w(), rng);
                Ok(ProverTuple { y, m, d })
            })
            .collect(),
        Strategy::HalfClaw => (0..lambda)
            .map(|_| {
                let b: bool = rng.random();
                let x = params.ring().random(rng);
                let y = sample_image(key, b, &x, rng)?;
                let d = BitString::random(params.w(), rng);
                let dot = d.dot_mod2(&x.bit_decomp())?;
                let m = dot ^ oracle.query_element(&x);
                Ok(ProverTuple { y, m, d })
            })
            .collect(),
    }
}

/// [`prove`] for strategies that never touch the trapdoor.
pub fn prove_cheat<R: Rng + ?Sized>(
    strategy: Strategy,
    key: &NtcfKey,
    oracle: &mut Oracle,
    trapdoor: Option<&NtcfTrapdoor>,
    rng: &mut R,
) -> Result<Vec<ProverTuple>, ProverError> {
    prove(strategy, key, oracle, trapdoor, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::HashAlg;
    use crate::params::{build_params, ParamInputs, Params};
    use crate::protocol::{make_challenge, verify};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn small() -> Params {
        build_params(ParamInputs {
            n: 16,
            lambda: 40,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn probability_formula_cases() {
        assert_eq!(correct_m_probability(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(correct_m_probability(1.0, 0.0).unwrap(), 0.5);
        assert!((correct_m_probability(2.0, 1.0).unwrap() - 0.9).abs() < 1e-15);
        assert!(correct_m_probability(0.0, 0.0).is_err());
        assert!(correct_m_probability(-1.0, 1.0).is_err());
        assert!(correct_m_probability(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn amplitudes_handle_underflow() {
        let (a0, a1) = amplitudes_from_logs(-1216.0, -1216.5).unwrap();
        assert_eq!(a0, 1.0);
        assert!((a1 - (-0.25f64).exp()).abs() < 1e-15);
        assert_eq!(amplitudes_from_logs(-5.0, f64::NEG_INFINITY), Some((1.0, 0.0)));
        assert_eq!(amplitudes_from_logs(f64::NEG_INFINITY, f64::NEG_INFINITY), None);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert_eq!("half-claw".parse::<Strategy>().unwrap(), Strategy::HalfClaw);
        assert!(Strategy::Honest.needs_trapdoor() && !Strategy::HalfClaw.needs_trapdoor());
    }

    #[test]
    fn trapdoor_strategies_need_trapdoor() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let (key, _) = make_challenge(&small(), &mut rng);
        let mut o = Oracle::deterministic(HashAlg::Sha256);
        assert!(matches!(
            prove(Strategy::Honest, &key, &mut o, None, &mut rng),
            Err(ProverError::MissingTrapdoor(_))
        ));
        assert!(prove(Strategy::TrapdoorCheat, &key, &mut o, None, &mut rng).is_err());
    }

    #[test]
    fn honest_and_cheat_accept() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let (key, t) = make_challenge(&small(), &mut rng);
        let mut o = Oracle::deterministic(HashAlg::Sha256);
        let tuples = prove_honest(&t, &mut o, &mut rng).unwrap();
        assert!(verify(&t, &tuples, &mut o).unwrap().accepted);
        let tuples = prove(Strategy::TrapdoorCheat, &key, &mut o, Some(&t), &mut rng).unwrap();
        let v = verify(&t, &tuples, &mut o).unwrap();
        assert_eq!(v.count, 40);
    }

    #[test]
    fn known_preimage_claw_matches_inversion() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let (key, t) = make_challenge(&small(), &mut rng);
        for _ in 0..40 {
            let b: bool = rng.random();
            let x = key.params().ring().random(&mut rng);
            let noise = sample_noise(&key, &mut rng);
            let y = image_with_noise(&key, b, &x, &noise).unwrap();
            let ours = claw_from_preimage(&t, b, x, noise).unwrap();
            assert_eq!(t.claw(&y).unwrap().unwrap(), ours);
        }
    }

    #[test]
    fn zero_key_noise_gives_equal_amplitudes() {
        let p = Params::new(40, 16, 32, 3, 0, 320 * 16 * 35, 8).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let (_, t) = make_challenge(&p, &mut rng);
        let mut o = Oracle::deterministic(HashAlg::Sha256);
        for _ in 0..5 {
            let tuples = prove_honest(&t, &mut o, &mut rng).unwrap();
            assert_eq!(verify(&t, &tuples, &mut o).unwrap().count, 40);
        }
    }
}
