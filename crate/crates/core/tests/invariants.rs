use poq_core::microsim::run_unequal_amplitudes;
use poq_core::ntcf::sample_image;
use poq_core::oracle::oracle_input;
use poq_core::protocol::{has_repeated_image, make_challenge};
use poq_core::prover::{amplitudes_from_logs, correct_m_probability};
use poq_core::*;
use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn small(lambda: usize) -> Params {
    build_params(ParamInputs {
        n: 16,
        lambda,
        ..Default::default()
    })
    .unwrap()
}

#[test]
fn injective_pairs_at_desk_parameters() {
    let p = build_params(ParamInputs::default()).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let (key, td) = make_challenge(&p, &mut rng);
    for b in [false, true] {
        for _ in 0..1000 {
            let x = p.ring().random(&mut rng);
            let y = sample_image(&key, b, &x, &mut rng).unwrap();
            assert_eq!(inv_f(&td, b, &y).unwrap(), Some(x.clone()));
            let other = if b { x.add(td.secret()) } else { x.sub(td.secret()) }.unwrap();
            assert_eq!(inv_f(&td, !b, &y).unwrap(), Some(other));
            let (x0, x1) = claw_pair(&td, &y).unwrap().unwrap();
            assert_eq!(x0.sub(&x1).unwrap(), *td.secret());
        }
    }
}

#[test]
fn images_are_distinct_for_every_strategy() {
    let p = small(40);
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    for strategy in [Strategy::Honest, Strategy::RandomGuess, Strategy::HalfClaw, Strategy::TrapdoorCheat] {
        for _ in 0..100 {
            let (key, td) = make_challenge(&p, &mut rng);
            let mut oracle = Oracle::deterministic(HashAlg::Sha256);
            let tuples = prove(strategy, &key, &mut oracle, Some(&td), &mut rng).unwrap();
            assert!(!has_repeated_image(&tuples), "{strategy}");
        }
    }
}

#[test]
fn honest_masks_are_uniform() {
    let p = small(40);
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let positions: Vec<usize> = (0..64).map(|_| rng.random_range(0..p.w())).collect();
    let mut ones = vec![0u64; positions.len()];
    let mut total = 0u64;
    while total < 100_000 {
        let (_, td) = make_challenge(&p, &mut rng);
        let mut oracle = Oracle::lazy(rng.random());
        for t in prove_honest(&td, &mut oracle, &mut rng).unwrap() {
            for (count, &i) in ones.iter_mut().zip(&positions) {
                *count += t.d.get(i) as u64;
            }
            total += 1;
        }
    }
    for (count, i) in ones.iter().zip(positions) {
        let freq = *count as f64 / total as f64;
        assert!((freq - 0.5).abs() <= 0.01, "bit {i}: {freq}");
    }
}

/// Mean probability of a correct `m` over honest images.
fn mean_correct_probability(key_noise: u64, base: &Params, rng: &mut ChaCha12Rng) -> f64 {
    let p = Params::new(
        base.lambda(),
        base.n(),
        base.log_q(),
        base.m_bar(),
        key_noise,
        base.eval_noise(),
        base.inversion_const(),
    )
    .unwrap();
    let (key, td) = make_challenge(&p, rng);
    let samples = 2000;
    let mut sum = 0.0;
    for _ in 0..samples {
        let b: bool = rng.random();
        let x = p.ring().random(rng);
        let y = sample_image(&key, b, &x, rng).unwrap();
        let claw = td.claw(&y).unwrap().unwrap();
        let l0 = key.density_of_residual(&claw.residual0).log();
        let l1 = key.density_of_residual(&claw.residual1).log();
        let (a0, a1) = amplitudes_from_logs(l0, l1).unwrap();
        sum += correct_m_probability(a0, a1).unwrap();
    }
    sum / samples as f64
}

#[test]
fn larger_key_noise_weakly_lowers_correctness() {
    let base = build_params(ParamInputs {
        n: 16,
        key_noise: 4,
        lambda: 40,
        ..Default::default()
    })
    .unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(4);
    let means: Vec<f64> = [0, 2, 4]
        .iter()
        .map(|&bv| mean_correct_probability(bv, &base, &mut rng))
        .collect();
    assert_eq!(means[0], 1.0);
    assert!(means[0] >= means[1] && means[1] >= means[2], "{means:?}");
    assert!(means[2] < 1.0);
}

#[test]
fn verifier_only_queries_the_claw() {
    let p = small(40);
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let (key, td) = make_challenge(&p, &mut rng);
    let mut prover_oracle = Oracle::deterministic(HashAlg::Sha256);
    let tuples = prove(Strategy::RandomGuess, &key, &mut prover_oracle, None, &mut rng).unwrap();
    let mut oracle = Oracle::lazy(6);
    verify(&td, &tuples, &mut oracle).unwrap();
    let expected: Vec<Vec<u8>> = tuples
        .iter()
        .flat_map(|t| {
            let (x0, x1) = claw_pair(&td, &t.y).unwrap().unwrap();
            [oracle_input(&x0), oracle_input(&x1)]
        })
        .collect();
    assert_eq!(oracle.query_log(), expected.as_slice());
}

#[derive(Debug)]
struct Fixture {
    td: NtcfTrapdoor,
    tuples: Vec<ProverTuple>,
}

fn cheat_fixture(seed: u64) -> Fixture {
    let p = build_params(ParamInputs {
        n: 8,
        lambda: 12,
        ..Default::default()
    })
    .unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let (key, td) = make_challenge(&p, &mut rng);
    let mut oracle = Oracle::deterministic(HashAlg::Sha256);
    let tuples = prove(Strategy::TrapdoorCheat, &key, &mut oracle, Some(&td), &mut rng).unwrap();
    Fixture { td, tuples }
}

fn count(f: &Fixture, flipped: &[bool]) -> usize {
    let tuples: Vec<ProverTuple> = f
        .tuples
        .iter()
        .zip(flipped)
        .map(|(t, &flip)| ProverTuple {
            m: t.m ^ flip,
            ..t.clone()
        })
        .collect();
    verify(&f.td, &tuples, &mut Oracle::deterministic(HashAlg::Sha256))
        .unwrap()
        .count
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn builder_output_meets_distance_gate(
        log_n in 0u32..=8,
        m_bar in 1usize..=6,
        key_noise in 1u64..=8,
        lambda in 1usize..=300,
        inversion_const in 1u64..=64,
    ) {
        let inputs = ParamInputs { n: 1 << log_n, m_bar, key_noise, lambda, inversion_const };
        if let Ok(p) = build_params(inputs) {
            prop_assert!(hellinger_bound(&p) <= 1.0 / 50.0);
            prop_assert!(Params::new(lambda, p.n(), p.log_q(), m_bar, key_noise, p.eval_noise(), inversion_const).is_ok());
        }
    }

    #[test]
    fn repairing_a_tuple_never_lowers_count(seed in 0u64..8, flipped in proptest::collection::vec(any::<bool>(), 12)) {
        let f = cheat_fixture(seed);
        let before = count(&f, &flipped);
        prop_assert_eq!(before, flipped.iter().filter(|&&x| !x).count());
        for i in (0..flipped.len()).filter(|&i| flipped[i]) {
            let mut repaired = flipped.clone();
            repaired[i] = false;
            prop_assert_eq!(count(&f, &repaired), before + 1);
        }
    }

    #[test]
    fn unequal_amplitude_masks_are_uniform(
        theta in 0.0f64..std::f64::consts::FRAC_PI_2,
        log_n in 1u32..=5,
        seed in any::<u64>(),
    ) {
        let n = 1usize << log_n;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let x0 = rng.random_range(0..n);
        let x1 = (x0 + rng.random_range(1..n)) % n;
        let h: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let dist = run_unequal_amplitudes(theta.cos(), theta.sin(), x0, x1, &h).unwrap();
        for d in 0..n {
            prop_assert!((dist.d_marginal(d) - 1.0 / n as f64).abs() < 1e-12);
        }
    }
}
