//! Soundness experiments.
//!
//! * Variant 1: the real verifier, run against a lazily sampled oracle.
//! * Variant 2: the challenger never inverts. For each tuple it looks in the
//!   oracle's table for entries passing the support check on branch 0 and on
//!   branch 1; with both it checks the equation using the stored bits,
//!   otherwise the tuple counts as a fresh uniform bit.
//! * Variant 3: as variant 2, but rejects outright unless some tuple had both
//!   preimages in the table.
//!
//! Each trial draws a fresh key and oracle from its own seed. The prover
//! runs once per trial and every requested variant judges the same
//! transcript with independent challenger randomness, which is identical to
//! running the variants separately under the same seed schedule.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;

use crate::bits::BitString;
use crate::error::LabError;
use crate::ntcf::{chk_f, NtcfKey, NtcfTrapdoor};
use crate::oracle::{HashAlg, Oracle};
use crate::params::Params;
use crate::protocol::{has_repeated_image, make_challenge, threshold_met, verify, ProverTuple};
use crate::prover::{prove, Strategy};
use crate::ring::{RingElement, RingVector};
use crate::seed::{derive_rng, derive_seed};

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Lazy,
    Hash(HashAlg),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub params: Params,
    pub strategy: Strategy,
    pub trials: usize,
    pub seed: u64,
    pub oracle: OracleKind,
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Pooled two-proportion comparison at 95%.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoProportion {
    pub diff: f64,
    pub half_width: f64,
}

impl TwoProportion {
    pub fn new(x1: u64, n1: u64, x2: u64, n2: u64) -> Self {
        let (a, b) = (n1 as f64, n2 as f64);
        let p1 = x1 as f64 / a;
        let p2 = x2 as f64 / b;
        let pooled = (x1 + x2) as f64 / (a + b);
        let se = (pooled * (1.0 - pooled) * (1.0 / a + 1.0 / b)).sqrt();
        Self {
            diff: p1 - p2,
            half_width: Z95 * se,
        }
    }

    pub fn within(&self) -> bool {
        self.diff.abs() <= self.half_width
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentStats {
    pub variant: u8,
    pub strategy: Strategy,
    pub trials: u64,
    pub accepts: u64,
    pub pass_rate: f64,
    pub pass_ci: (f64, f64),
    pub tuples: u64,
    pub tuple_passes: u64,
    pub per_tuple_rate: f64,
    pub per_tuple_ci: (f64, f64),
    /// Tuples with 0, 1 and 2 table preimages (variants 2 and 3).
    pub db_hit_profile: Option<[u64; 3]>,
    /// Seed of each trial, for replay.
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, Default)]
struct Tally {
    accepts: u64,
    tuples: u64,
    passes: u64,
    hits: [u64; 3],
}

impl ExperimentStats {
    fn from_tally(variant: u8, strategy: Strategy, tally: &Tally, seeds: Vec<u64>) -> Self {
        let trials = seeds.len() as u64;
        Self {
            variant,
            strategy,
            trials,
            accepts: tally.accepts,
            pass_rate: tally.accepts as f64 / trials.max(1) as f64,
            pass_ci: wilson_interval(tally.accepts, trials),
            tuples: tally.tuples,
            tuple_passes: tally.passes,
            per_tuple_rate: tally.passes as f64 / tally.tuples.max(1) as f64,
            per_tuple_ci: wilson_interval(tally.passes, tally.tuples),
            db_hit_profile: (variant != 1).then_some(tally.hits),
            seeds,
        }
    }

    pub fn csv_header() -> &'static str {
        "variant,strategy,trials,accepts,pass_rate,pass_lo,pass_hi,tuples,tuple_passes,per_tuple_rate,tuple_lo,tuple_hi,hits0,hits1,hits2"
    }

    pub fn csv_row(&self) -> String {
        let hits = self
            .db_hit_profile
            .map(|h| format!("{},{},{}", h[0], h[1], h[2]))
            .unwrap_or_else(|| ",,".into());
        format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{},{},{:.6},{:.6},{:.6},{}",
            self.variant,
            self.strategy,
            self.trials,
            self.accepts,
            self.pass_rate,
            self.pass_ci.0,
            self.pass_ci.1,
            self.tuples,
            self.tuple_passes,
            self.per_tuple_rate,
            self.per_tuple_ci.0,
            self.per_tuple_ci.1,
            hits
        )
    }
}

pub fn format_table(stats: &[ExperimentStats]) -> String {
    let mut s = format!(
        "{:<3} {:<15} {:>7} {:>9} {:>19} {:>9} {:>19} {}\n",
        "var", "strategy", "trials", "pass", "95% CI", "tuple", "95% CI", "db hits 0/1/2"
    );
    for st in stats {
        let hits = st
            .db_hit_profile
            .map(|h| format!("{}/{}/{}", h[0], h[1], h[2]))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:<3} {:<15} {:>7} {:>9.5} [{:>7.5}, {:>7.5}] {:>9.5} [{:>7.5}, {:>7.5}] {}",
            st.variant,
            st.strategy.name(),
            st.trials,
            st.pass_rate,
            st.pass_ci.0,
            st.pass_ci.1,
            st.per_tuple_rate,
            st.per_tuple_ci.0,
            st.per_tuple_ci.1,
            hits
        );
    }
    s
}

/// Everything the prover phase of one trial produced.
pub struct TrialSetup {
    pub seed: u64,
    pub key: NtcfKey,
    pub trapdoor: NtcfTrapdoor,
    pub tuples: Vec<ProverTuple>,
    /// Oracle state right after the prover finished.
    pub oracle: Oracle,
}

pub fn trial_seed(cfg: &ExperimentConfig, trial: usize) -> u64 {
    derive_seed(cfg.seed, "trial", trial as u64)
}

/// Key generation and the prover's run for one trial.
pub fn run_prover_phase(cfg: &ExperimentConfig, trial: usize) -> Result<TrialSetup, LabError> {
    let seed = trial_seed(cfg, trial);
    let (key, trapdoor) = make_challenge(&cfg.params, &mut derive_rng(seed, "key", 0));
    let mut oracle = match cfg.oracle {
        OracleKind::Lazy => Oracle::lazy(derive_seed(seed, "oracle", 0)),
        OracleKind::Hash(alg) => Oracle::deterministic(alg),
    };
    let tuples = prove(
        cfg.strategy,
        &key,
        &mut oracle,
        Some(&trapdoor),
        &mut derive_rng(seed, "prover", 0),
    )?;
    Ok(TrialSetup {
        seed,
        key,
        trapdoor,
        tuples,
        oracle,
    })
}

/// Oracle table entries that decode to domain elements, with an index on
/// the first coefficient of `a_0 * x`. Any entry passing the support check
/// for a target image lies within one support radius of it in that
/// coefficient, hence in the target's bucket or a neighbour.
struct TableIndex<'a> {
    key: &'a NtcfKey,
    entries: Vec<(RingElement, bool)>,
    shift: u32,
    buckets: HashMap<u64, Vec<usize>>,
}

impl<'a> TableIndex<'a> {
    fn new(key: &'a NtcfKey, oracle: &Oracle) -> Result<Self, LabError> {
        let params = key.params();
        let ring = params.ring();
        let table = oracle.table().map_err(|_| LabError::OracleMode(2))?;
        let entries: Vec<(RingElement, bool)> = table
            .iter()
            .filter_map(|(bytes, &h)| {
                let bits = BitString::from_bytes(params.w(), bytes).ok()?;
                Some((ring.from_bit_decomp(&bits).ok()?, h))
            })
            .collect();
        let radius = (params.support_sq() as f64).sqrt().ceil() as u64 + 1;
        let shift = (64 - radius.leading_zeros()).min(params.log_q());
        let a0 = key.a().get(0).coeffs();
        let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
        for (i, (x, _)) in entries.iter().enumerate() {
            let c = first_coeff_product(a0, x.coeffs()) & ring.mask();
            buckets.entry(c >> shift).or_default().push(i);
        }
        Ok(Self {
            key,
            entries,
            shift,
            buckets,
        })
    }

    /// Earliest entry passing the support check for `y` on branch `b`.
    fn find(&self, b: bool, y: &RingVector) -> Result<Option<usize>, LabError> {
        let ring = self.key.params().ring();
        let mut target = y.get(0).coeffs()[0];
        if b {
            target = target.wrapping_sub(self.key.v().get(0).coeffs()[0]);
        }
        let target = target & ring.mask();
        let count = ring.q() >> self.shift;
        let centre = target >> self.shift;
        let mut candidates: Vec<usize> = [count - 1, 0, 1]
            .iter()
            .map(|&off| (centre + off) % count)
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .filter_map(|bucket| self.buckets.get(&bucket))
            .flatten()
            .copied()
            .collect();
        candidates.sort_unstable();
        for i in candidates {
            if chk_f(self.key, b, &self.entries[i].0, y).map_err(crate::error::ProtocolError::from)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

/// Coefficient 0 of the negacyclic product, modulo `2^64`.
fn first_coeff_product(a: &[u64], x: &[u64]) -> u64 {
    let n = a.len();
    let mut acc = a[0].wrapping_mul(x[0]);
    for j in 1..n {
        acc = acc.wrapping_sub(a[j].wrapping_mul(x[n - j]));
    }
    acc
}

struct TableVerdict {
    accepted: bool,
    count: usize,
    hits: [u64; 3],
}

/// Table entries matching each tuple on branch 0 and branch 1.
type Lookups = Vec<(Option<usize>, Option<usize>)>;

fn lookup_all(index: &TableIndex<'_>, tuples: &[ProverTuple]) -> Result<Lookups, LabError> {
    tuples
        .iter()
        .map(|t| Ok((index.find(false, &t.y)?, index.find(true, &t.y)?)))
        .collect()
}

/// Variants 2 and 3 on one transcript.
fn judge_from_table<R: Rng + ?Sized>(
    index: &TableIndex<'_>,
    lookups: &Lookups,
    tuples: &[ProverTuple],
    require_claw: bool,
    rng: &mut R,
) -> Result<TableVerdict, LabError> {
    let lambda = index.key.params().lambda();
    let mut hits = [0u64; 3];
    let mut count = 0;
    let mut any_claw = false;
    let distinct = !has_repeated_image(tuples);
    for (t, &(i0, i1)) in tuples.iter().zip(lookups) {
        hits[i0.is_some() as usize + i1.is_some() as usize] += 1;
        let pass = match (i0, i1) {
            (Some(i0), Some(i1)) => {
                any_claw = true;
                let (x0, h0) = &index.entries[i0];
                let (x1, h1) = &index.entries[i1];
                let diff = x0.bit_decomp().xor(&x1.bit_decomp()).expect("same ring");
                let dot = t.d.dot_mod2(&diff).map_err(crate::error::ProtocolError::from)?;
                t.m == (dot ^ h0 ^ h1)
            }
            _ => rng.random(),
        };
        count += pass as usize;
    }
    let accepted = distinct && threshold_met(count, lambda) && (!require_claw || any_claw);
    Ok(TableVerdict { accepted, count, hits })
}

/// Runs several variants over the same trials, one stats record each.
pub fn run_experiments(variants: &[u8], cfg: &ExperimentConfig) -> Result<Vec<ExperimentStats>, LabError> {
    for &v in variants {
        match v {
            1 => {}
            2 | 3 if cfg.oracle == OracleKind::Lazy => {}
            _ => return Err(LabError::OracleMode(v)),
        }
    }
    let mut tallies = vec![Tally::default(); variants.len()];
    let mut seeds = Vec::with_capacity(cfg.trials);
    let lambda = cfg.params.lambda() as u64;
    for trial in 0..cfg.trials {
        let setup = run_prover_phase(cfg, trial)?;
        seeds.push(setup.seed);
        let table = if variants.iter().any(|&v| v != 1) {
            let index = TableIndex::new(&setup.key, &setup.oracle)?;
            let lookups = lookup_all(&index, &setup.tuples)?;
            Some((index, lookups))
        } else {
            None
        };
        for (&v, tally) in variants.iter().zip(tallies.iter_mut()) {
            let (accepted, count) = if v == 1 {
                let mut oracle = setup.oracle.clone();
                let verdict = verify(&setup.trapdoor, &setup.tuples, &mut oracle)?;
                (verdict.accepted, verdict.count)
            } else {
                let mut rng = derive_rng(setup.seed, "challenger", v as u64);
                let (index, lookups) = table.as_ref().expect("built for table variants");
                let tv = judge_from_table(index, lookups, &setup.tuples, v == 3, &mut rng)?;
                for (acc, h) in tally.hits.iter_mut().zip(tv.hits) {
                    *acc += h;
                }
                (tv.accepted, tv.count)
            };
            tally.accepts += accepted as u64;
            tally.tuples += lambda;
            tally.passes += count as u64;
        }
        log::debug!("trial {trial} seed {} done", setup.seed);
    }
    Ok(variants
        .iter()
        .zip(&tallies)
        .map(|(&v, t)| ExperimentStats::from_tally(v, cfg.strategy, t, seeds.clone()))
        .collect())
}

pub fn run_experiment(variant: u8, cfg: &ExperimentConfig) -> Result<ExperimentStats, LabError> {
    Ok(run_experiments(&[variant], cfg)?.remove(0))
}

/// Looks in the oracle table for a pair passing the support check on both
/// branches of some submitted image, as a claw-finding reduction would.
pub fn extract_claw_attempt(
    oracle: &Oracle,
    key: &NtcfKey,
    tuples: &[ProverTuple],
) -> Result<Option<(RingElement, RingElement)>, LabError> {
    let index = TableIndex::new(key, oracle)?;
    for t in tuples {
        if let (Some(i0), Some(i1)) = (index.find(false, &t.y)?, index.find(true, &t.y)?) {
            return Ok(Some((index.entries[i0].0.clone(), index.entries[i1].0.clone())));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{build_params, ParamInputs};

    fn cfg(strategy: Strategy, trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            params: build_params(ParamInputs {
                n: 16,
                lambda: 40,
                ..Default::default()
            })
            .unwrap(),
            strategy,
            trials,
            seed: 7,
            oracle: OracleKind::Lazy,
        }
    }

    #[test]
    fn wilson_interval_basics() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && hi > 0.5 && (0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        // Textbook value for 81/263.
        let (lo, hi) = wilson_interval(81, 263);
        assert!((lo - 0.2553).abs() < 1e-3 && (hi - 0.3662).abs() < 1e-3);
    }

    #[test]
    fn two_proportion_cases() {
        assert!(TwoProportion::new(0, 100, 0, 100).within());
        assert!(TwoProportion::new(50, 100, 55, 100).within());
        assert!(!TwoProportion::new(10, 100, 60, 100).within());
    }

    #[test]
    fn first_coefficient_matches_full_product() {
        use rand::SeedableRng;
        let ring = crate::ring::Ring::new(16, 30).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
        for _ in 0..20 {
            let a = ring.random(&mut rng);
            let x = ring.random(&mut rng);
            let full = a.mul(&x).unwrap().coeffs()[0];
            assert_eq!(first_coeff_product(a.coeffs(), x.coeffs()) & ring.mask(), full);
        }
    }

    #[test]
    fn hash_oracle_only_for_variant_one() {
        let mut c = cfg(Strategy::RandomGuess, 1);
        c.oracle = OracleKind::Hash(HashAlg::Sha256);
        assert!(run_experiment(1, &c).is_ok());
        assert!(matches!(run_experiment(2, &c), Err(LabError::OracleMode(2))));
        assert!(matches!(run_experiment(4, &cfg(Strategy::RandomGuess, 1)), Err(LabError::OracleMode(4))));
    }

    #[test]
    fn hit_profiles_by_strategy() {
        let half = run_experiment(2, &cfg(Strategy::HalfClaw, 3)).unwrap();
        assert_eq!(half.db_hit_profile, Some([0, 120, 0]));
        let cheat = run_experiment(3, &cfg(Strategy::TrapdoorCheat, 3)).unwrap();
        assert_eq!(cheat.db_hit_profile, Some([0, 0, 120]));
        assert_eq!(cheat.accepts, 3);
        let random = run_experiment(3, &cfg(Strategy::RandomGuess, 3)).unwrap();
        assert_eq!(random.db_hit_profile, Some([120, 0, 0]));
        assert_eq!(random.accepts, 0);
    }

    #[test]
    fn joint_run_matches_separate_runs() {
        let c = cfg(Strategy::Honest, 3);
        let joint = run_experiments(&[1, 2, 3], &c).unwrap();
        for (i, v) in [1u8, 2, 3].into_iter().enumerate() {
            assert_eq!(run_experiment(v, &c).unwrap(), joint[i]);
        }
        assert_eq!(joint[0].seeds.len(), 3);
    }

    #[test]
    fn extraction_by_strategy() {
        let c = cfg(Strategy::TrapdoorCheat, 1);
        let s = run_prover_phase(&c, 0).unwrap();
        let (x0, x1) = extract_claw_attempt(&s.oracle, &s.key, &s.tuples).unwrap().unwrap();
        assert_eq!(x0.sub(&x1).unwrap(), *s.trapdoor.secret());
        for st in [Strategy::RandomGuess, Strategy::HalfClaw] {
            let s = run_prover_phase(&cfg(st, 1), 0).unwrap();
            assert_eq!(extract_claw_attempt(&s.oracle, &s.key, &s.tuples).unwrap(), None);
        }
    }
}
