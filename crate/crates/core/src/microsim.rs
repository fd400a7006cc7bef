//! Exhaustive statevector simulation of the honest prover on toy functions,
//! plus the distance measures used to compare branch distributions.
//!
//! The toy family is `f_b(x) = x + b*s mod N` over `Z_N` with plain binary
//! bit strings. Basis states are labelled `(b, x, y, aux)`; within each `y`
//! block the index is `aux | x << 1 | b << (1 + log N)` so the Hadamard layer
//! acts on the low `log N + 2` bits. All amplitudes are real.

use std::fmt::Write as _;

use crate::error::SimError;

/// Largest toy domain.
pub const MAX_DOMAIN: usize = 1 << 10;

const NORM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ToyTcf {
    domain: usize,
    shift: usize,
}

impl ToyTcf {
    pub fn new(domain: usize, shift: usize) -> Result<Self, SimError> {
        if !(2..=MAX_DOMAIN).contains(&domain) || !domain.is_power_of_two() {
            return Err(SimError::DomainSize(domain));
        }
        Ok(Self {
            domain,
            shift: shift % domain,
        })
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn eval(&self, b: bool, x: usize) -> usize {
        (x + b as usize * self.shift) % self.domain
    }

    /// The claw `(x0, x1)` above image `y`.
    pub fn claw(&self, y: usize) -> (usize, usize) {
        (y, (y + self.domain - self.shift) % self.domain)
    }

    fn bits(&self) -> u32 {
        self.domain.trailing_zeros()
    }
}

/// A real-amplitude state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<f64>,
}

impl StateVector {
    pub fn new(amps: Vec<f64>) -> Self {
        Self { amps }
    }

    /// `sum_x sqrt(f(x)) |x>` for a probability vector `f`.
    pub fn from_density(f: &[f64]) -> Self {
        Self {
            amps: f.iter().map(|p| p.max(0.0).sqrt()).collect(),
        }
    }

    pub fn amps(&self) -> &[f64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }

    fn check_norm(&self, expected: f64) -> Result<(), SimError> {
        let n = self.norm_sq();
        if (n - expected).abs() > NORM_TOL {
            return Err(SimError::Norm(n));
        }
        Ok(())
    }
}

/// In-place unnormalized Walsh-Hadamard butterfly on a power-of-two slice,
/// scaled to be unitary.
fn hadamard_all(v: &mut [f64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    v.iter_mut().for_each(|a| *a *= scale);
}

/// `(b, x, aux)` index inside one `y` block.
fn local_index(bits: u32, b: bool, x: usize, aux: bool) -> usize {
    aux as usize | (x << 1) | ((b as usize) << (1 + bits))
}

/// Applies `|b, x, aux> -> |b, x, aux ^ h(x)>` to one block.
fn apply_oracle(block: &[f64], bits: u32, h: &[bool]) -> Vec<f64> {
    let mut out = vec![0.0; block.len()];
    for (idx, &a) in block.iter().enumerate() {
        let x = (idx >> 1) & ((1 << bits) - 1);
        out[idx ^ h[x] as usize] += a;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircuitOutcome {
    pub y: usize,
    pub m: bool,
    /// Measured `x` register, bit `i` being bit `i` of the mask.
    pub d: usize,
    pub m_prime: bool,
    pub prob: f64,
}

/// Full outcome distribution, including zero-probability outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitDistribution {
    pub toy: ToyTcf,
    pub outcomes: Vec<CircuitOutcome>,
}

pub fn parity(v: usize) -> bool {
    v.count_ones() % 2 == 1
}

impl CircuitDistribution {
    /// Whether an outcome satisfies `m = d . (x0 ^ x1) ^ h(x0) ^ h(x1)`.
    pub fn satisfies(&self, o: &CircuitOutcome, h: &[bool]) -> bool {
        let (x0, x1) = self.toy.claw(o.y);
        o.m == parity(o.d & (x0 ^ x1)) ^ h[x0] ^ h[x1]
    }

    /// Total probability of outcomes that fail the check or have `m' = 0`.
    pub fn violating_mass(&self, h: &[bool]) -> f64 {
        self.outcomes
            .iter()
            .filter(|o| !o.m_prime || !self.satisfies(o, h))
            .map(|o| o.prob)
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.outcomes.iter().map(|o| o.prob).sum()
    }

    /// Marginal law of `d`.
    pub fn d_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.toy.domain()];
        for o in &self.outcomes {
            out[o.d] += o.prob;
        }
        out
    }

    pub fn to_table(&self, min_prob: f64) -> String {
        let mut s = format!("{:>6} {:>2} {:>6} {:>3} {:>14}\n", "y", "m", "d", "m'", "prob");
        for o in self.outcomes.iter().filter(|o| o.prob > min_prob) {
            let _ = writeln!(
                s,
                "{:>6} {:>2} {:>6} {:>3} {:>14.12}",
                o.y, o.m as u8, o.d, o.m_prime as u8, o.prob
            );
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("y,m,d,m_prime,prob\n");
        for o in &self.outcomes {
            let _ = writeln!(s, "{},{},{},{},{:e}", o.y, o.m as u8, o.d, o.m_prime as u8, o.prob);
        }
        s
    }
}

/// Prepares the uniform superposition over `(b, x)` with images, measures
/// the image, kicks the hash into a `|->` target, applies Hadamards to
/// `(b, x, aux)` and measures. Every image outcome is followed exactly.
pub fn run_honest_circuit(toy: ToyTcf, h: &[bool]) -> Result<CircuitDistribution, SimError> {
    let n = toy.domain();
    if h.len() != n {
        return Err(SimError::Dimension(h.len(), n));
    }
    let bits = toy.bits();
    let block = 4 * n;
    let minus = std::f64::consts::FRAC_1_SQRT_2;

    // State preparation over the whole (b, x, y, aux) space.
    let mut state = vec![0.0; n * block];
    let amp = 1.0 / ((2 * n) as f64).sqrt();
    for b in [false, true] {
        for x in 0..n {
            let y = toy.eval(b, x);
            state[y * block + local_index(bits, b, x, false)] = amp * minus;
            state[y * block + local_index(bits, b, x, true)] = -amp * minus;
        }
    }
    StateVector::new(state.clone()).check_norm(1.0)?;

    let mut outcomes = Vec::with_capacity(n * block);
    for y in 0..n {
        let slice = &state[y * block..(y + 1) * block];
        let p_y: f64 = slice.iter().map(|a| a * a).sum();
        if p_y == 0.0 {
            continue;
        }
        let scale = 1.0 / p_y.sqrt();
        let post: Vec<f64> = slice.iter().map(|a| a * scale).collect();
        StateVector::new(post.clone()).check_norm(1.0)?;
        let mut kicked = apply_oracle(&post, bits, h);
        StateVector::new(kicked.clone()).check_norm(1.0)?;
        hadamard_all(&mut kicked);
        StateVector::new(kicked.clone()).check_norm(1.0)?;
        for (idx, a) in kicked.iter().enumerate() {
            outcomes.push(CircuitOutcome {
                y,
                m: (idx >> (1 + bits)) & 1 == 1,
                d: (idx >> 1) & (n - 1),
                m_prime: idx & 1 == 1,
                prob: p_y * a * a,
            });
        }
    }
    Ok(CircuitDistribution { toy, outcomes })
}

/// Law of `(m, d)` for `a0|0,x0> + a1|1,x1>`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoBranchDistribution {
    domain: usize,
    /// Indexed by `m * domain + d`.
    probs: Vec<f64>,
    correct_m: Vec<bool>,
}

impl TwoBranchDistribution {
    pub fn prob(&self, m: bool, d: usize) -> f64 {
        self.probs[m as usize * self.domain + d]
    }

    pub fn d_marginal(&self, d: usize) -> f64 {
        self.prob(false, d) + self.prob(true, d)
    }

    /// `P(m correct | d)`.
    pub fn correct_given(&self, d: usize) -> f64 {
        self.prob(self.correct_m[d], d) / self.d_marginal(d)
    }

    pub fn domain(&self) -> usize {
        self.domain
    }
}

/// Exhaustive Hadamard measurement of a general two-branch state after the
/// hash phase kickback. The domain size is `h.len()`.
pub fn run_unequal_amplitudes(
    alpha0: f64,
    alpha1: f64,
    x0: usize,
    x1: usize,
    h: &[bool],
) -> Result<TwoBranchDistribution, SimError> {
    let n = h.len();
    let toy = ToyTcf::new(n, 0)?;
    if x0 >= n || x1 >= n {
        return Err(SimError::Dimension(x0.max(x1), n));
    }
    if !(alpha0 >= 0.0 && alpha1 >= 0.0) || (alpha0 * alpha0 + alpha1 * alpha1 - 1.0).abs() > NORM_TOL {
        return Err(SimError::Amplitudes);
    }
    let bits = toy.bits();
    let minus = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = vec![0.0; 4 * n];
    for (b, x, a) in [(false, x0, alpha0), (true, x1, alpha1)] {
        v[local_index(bits, b, x, false)] += a * minus;
        v[local_index(bits, b, x, true)] -= a * minus;
    }
    StateVector::new(v.clone()).check_norm(1.0)?;
    let mut kicked = apply_oracle(&v, bits, h);
    hadamard_all(&mut kicked);
    StateVector::new(kicked.clone()).check_norm(1.0)?;
    let mut probs = vec![0.0; 2 * n];
    for (idx, a) in kicked.iter().enumerate() {
        let m = (idx >> (1 + bits)) & 1;
        let d = (idx >> 1) & (n - 1);
        probs[m * n + d] += a * a;
    }
    let correct_m = (0..n).map(|d| parity(d & (x0 ^ x1)) ^ h[x0] ^ h[x1]).collect();
    Ok(TwoBranchDistribution {
        domain: n,
        probs,
        correct_m,
    })
}

fn same_len(a: usize, b: usize) -> Result<(), SimError> {
    if a != b {
        return Err(SimError::Dimension(a, b));
    }
    Ok(())
}

/// Squared Hellinger distance `1 - sum sqrt(f1 f2)`.
pub fn hellinger(f1: &[f64], f2: &[f64]) -> Result<f64, SimError> {
    same_len(f1.len(), f2.len())?;
    Ok(1.0 - f1.iter().zip(f2).map(|(a, b)| (a * b).sqrt()).sum::<f64>())
}

/// Total variation distance `1/2 sum |f1 - f2|`.
pub fn tv_distance(f1: &[f64], f2: &[f64]) -> Result<f64, SimError> {
    same_len(f1.len(), f2.len())?;
    Ok(0.5 * f1.iter().zip(f2).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Trace distance of two normalized pure states, `sqrt(1 - <p1|p2>^2)`.
pub fn trace_distance(psi1: &StateVector, psi2: &StateVector) -> Result<f64, SimError> {
    same_len(psi1.dim(), psi2.dim())?;
    let overlap: f64 = psi1.amps.iter().zip(&psi2.amps).map(|(a, b)| a * b).sum();
    Ok((1.0 - overlap * overlap).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prover::correct_m_probability;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_table(n: usize, rng: &mut ChaCha12Rng) -> Vec<bool> {
        (0..n).map(|_| rng.random()).collect()
    }

    #[test]
    fn toy_rejects_bad_domains() {
        assert!(ToyTcf::new(3, 1).is_err());
        assert!(ToyTcf::new(1, 0).is_err());
        assert!(ToyTcf::new(2048, 0).is_err());
        let t = ToyTcf::new(8, 3).unwrap();
        for y in 0..8 {
            let (x0, x1) = t.claw(y);
            assert_eq!(t.eval(false, x0), y);
            assert_eq!(t.eval(true, x1), y);
        }
    }

    #[test]
    fn hadamard_is_involution() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let v: Vec<f64> = (0..32).map(|_| rng.random::<f64>() - 0.5).collect();
        let mut w = v.clone();
        hadamard_all(&mut w);
        hadamard_all(&mut w);
        for (a, b) in v.iter().zip(&w) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn four_element_domain_satisfies_check() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let toy = ToyTcf::new(4, 1).unwrap();
        for _ in 0..10 {
            let h = random_table(4, &mut rng);
            let dist = run_honest_circuit(toy, &h).unwrap();
            assert!((dist.total_mass() - 1.0).abs() < 1e-12);
            assert!(dist.violating_mass(&h) < 1e-12);
        }
    }

    #[test]
    fn degenerate_shift_forces_m_zero() {
        let toy = ToyTcf::new(2, 0).unwrap();
        for h in [[false, false], [true, false], [false, true], [true, true]] {
            let dist = run_honest_circuit(toy, &h).unwrap();
            let wrong: f64 = dist.outcomes.iter().filter(|o| o.m).map(|o| o.prob).sum();
            assert!(wrong < 1e-12);
            assert!(dist.violating_mass(&h) < 1e-12);
        }
    }

    #[test]
    fn d_marginal_is_uniform() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let toy = ToyTcf::new(8, 3).unwrap();
        let dist = run_honest_circuit(toy, &random_table(8, &mut rng)).unwrap();
        for p in dist.d_marginal() {
            assert!((p - 1.0 / 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unequal_amplitude_cases() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let h = random_table(16, &mut rng);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let eq = run_unequal_amplitudes(r, r, 3, 9, &h).unwrap();
        let one = run_unequal_amplitudes(1.0, 0.0, 3, 9, &h).unwrap();
        let tilt = run_unequal_amplitudes(2.0 / 5f64.sqrt(), 1.0 / 5f64.sqrt(), 3, 9, &h).unwrap();
        for d in 0..16 {
            assert!((eq.correct_given(d) - 1.0).abs() < 1e-12);
            assert!((one.correct_given(d) - 0.5).abs() < 1e-12);
            assert!((tilt.correct_given(d) - 0.9).abs() < 1e-12);
            assert!((tilt.d_marginal(d) - 1.0 / 16.0).abs() < 1e-12);
        }
        assert!((correct_m_probability(2.0, 1.0).unwrap() - tilt.correct_given(0)).abs() < 1e-12);
        assert!(run_unequal_amplitudes(1.0, 1.0, 0, 1, &h).is_err());
    }

    #[test]
    fn distance_identities() {
        let f = [0.25, 0.25, 0.5];
        let g = [0.0, 0.0, 1.0];
        assert!(hellinger(&f, &f).unwrap().abs() < 1e-15);
        assert_eq!(tv_distance(&f, &f).unwrap(), 0.0);
        let psi = StateVector::from_density(&f);
        assert!(trace_distance(&psi, &psi).unwrap() < 1e-7);
        let a = [0.5, 0.5, 0.0, 0.0];
        let b = [0.0, 0.0, 0.3, 0.7];
        assert_eq!(hellinger(&a, &b).unwrap(), 1.0);
        assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);
        assert!(hellinger(&f, &a).is_err());
        assert!(tv_distance(&g, &f).unwrap() > 0.0);
    }

    #[test]
    fn report_formats() {
        let toy = ToyTcf::new(2, 1).unwrap();
        let dist = run_honest_circuit(toy, &[false, true]).unwrap();
        assert!(dist.to_table(1e-12).lines().count() > 1);
        assert_eq!(dist.to_csv().lines().count(), 1 + dist.outcomes.len());
    }
}
