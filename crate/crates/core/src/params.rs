//! Scheme parameters and the builder that picks the smallest workable modulus.

use std::fmt;

use crate::error::ParamError;
use crate::ring::{Ring, MAX_LOG_Q};

/// Multiplier in `B_P = EVAL_NOISE_FACTOR * n * m * B_V`, large enough that
/// the branch-distance bound lands under 1/50.
pub const EVAL_NOISE_FACTOR: u64 = 320;

/// Ceiling on the branch-distance bound `1 - exp(-2 pi m n B_V / B_P)`.
pub const MAX_BRANCH_DISTANCE: f64 = 1.0 / 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Params {
    lambda: usize,
    n: usize,
    k_g: u32,
    m_bar: usize,
    key_noise: u64,
    eval_noise: u64,
    inversion_const: u64,
}

/// Inputs to [`build_params`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamInputs {
    pub n: usize,
    pub m_bar: usize,
    pub key_noise: u64,
    pub lambda: usize,
    pub inversion_const: u64,
}

impl Default for ParamInputs {
    /// The desk-scale defaults.
    fn default() -> Self {
        Self {
            n: 64,
            m_bar: 3,
            key_noise: 1,
            lambda: 120,
            inversion_const: 8,
        }
    }
}

impl Params {
    /// Validates a fully specified parameter set, listing every violated
    /// constraint.
    pub fn new(
        lambda: usize,
        n: usize,
        k_g: u32,
        m_bar: usize,
        key_noise: u64,
        eval_noise: u64,
        inversion_const: u64,
    ) -> Result<Self, ParamError> {
        let p = Self {
            lambda,
            n,
            k_g,
            m_bar,
            key_noise,
            eval_noise,
            inversion_const,
        };
        let violations = p.violations();
        if violations.is_empty() {
            Ok(p)
        } else {
            Err(ParamError::Infeasible(violations))
        }
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n == 0 || !self.n.is_power_of_two() {
            out.push(format!("n = {} is not a power of two", self.n));
        }
        if !(2..=MAX_LOG_Q).contains(&self.k_g) {
            out.push(format!("log2 q = {} is outside 2..={MAX_LOG_Q}", self.k_g));
        }
        if self.lambda == 0 {
            out.push("lambda must be positive".into());
        }
        if self.m_bar == 0 {
            out.push("m_bar must be positive".into());
        }
        if self.eval_noise == 0 {
            out.push("B_P must be positive".into());
        }
        if self.inversion_const == 0 {
            out.push("C_T must be positive".into());
        }
        if !out.is_empty() {
            return out;
        }
        let floor = (EVAL_NOISE_FACTOR as u128) * (self.n * self.m()) as u128 * self.key_noise as u128;
        if (self.eval_noise as u128) < floor {
            out.push(format!("B_P = {} < {EVAL_NOISE_FACTOR} n m B_V = {floor}", self.eval_noise));
        }
        if !self.inversion_fits() {
            out.push(format!(
                "2 B_P sqrt(n m) > q / (C_T sqrt(n log q)) at log2 q = {}",
                self.k_g
            ));
        }
        let h = hellinger_bound(self);
        if h > MAX_BRANCH_DISTANCE {
            out.push(format!("branch distance bound {h:.5} exceeds 1/50"));
        }
        out
    }

    /// `4 B_P^2 n m C_T^2 n k_g <= q^2`, the squared form of the inversion
    /// tolerance, evaluated exactly.
    fn inversion_fits(&self) -> bool {
        let factors = [
            4u128,
            self.eval_noise as u128,
            self.eval_noise as u128,
            self.n as u128,
            self.m() as u128,
            self.inversion_const as u128,
            self.inversion_const as u128,
            self.n as u128,
            self.k_g as u128,
        ];
        let lhs = factors.iter().try_fold(1u128, |acc, &f| acc.checked_mul(f));
        match lhs {
            Some(lhs) => lhs <= 1u128 << (2 * self.k_g),
            None => false,
        }
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_q(&self) -> u32 {
        self.k_g
    }

    pub fn q(&self) -> u64 {
        1u64 << self.k_g
    }

    pub fn m_bar(&self) -> usize {
        self.m_bar
    }

    pub fn m(&self) -> usize {
        self.m_bar + self.k_g as usize
    }

    /// Key-noise width `B_V`.
    pub fn key_noise(&self) -> u64 {
        self.key_noise
    }

    /// Evaluation-noise width `B_P`.
    pub fn eval_noise(&self) -> u64 {
        self.eval_noise
    }

    /// Inversion constant `C_T`.
    pub fn inversion_const(&self) -> u64 {
        self.inversion_const
    }

    /// Bit length `w = n log2 q` of a domain element.
    pub fn w(&self) -> usize {
        self.n * self.k_g as usize
    }

    /// Number of integer coordinates of a range element, `n m`.
    pub fn noise_dim(&self) -> usize {
        self.n * self.m()
    }

    pub fn ring(&self) -> Ring {
        Ring::new(self.n, self.k_g).expect("validated parameters")
    }

    /// Squared support radius of an evaluation, `B_P^2 n m`.
    pub fn support_sq(&self) -> u128 {
        (self.eval_noise as u128).pow(2) * self.noise_dim() as u128
    }

    /// Squared residual bound accepted by inversion, `(2 B_P sqrt(n m))^2`.
    pub fn inversion_sq(&self) -> u128 {
        4 * self.support_sq()
    }

    /// Same parameters with a different tuple count.
    pub fn with_lambda(self, lambda: usize) -> Result<Self, ParamError> {
        Self::new(
            lambda,
            self.n,
            self.k_g,
            self.m_bar,
            self.key_noise,
            self.eval_noise,
            self.inversion_const,
        )
    }

    /// Plain `key = value` text, one entry per line.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// Parses [`Params::to_text`] output. Derived entries (`q`, `m`, `w`,
    /// `hellinger_bound`) are optional, but must agree when present.
    pub fn from_text(text: &str) -> Result<Self, ParamError> {
        let kv = parse_key_values(text)?;
        let get = |k: &str| -> Result<u64, ParamError> {
            let v = kv
                .iter()
                .find(|(key, _)| key == k)
                .ok_or_else(|| ParamError::Format(format!("missing key {k}")))?;
            v.1.parse::<u64>()
                .map_err(|_| ParamError::Format(format!("{k}: not an unsigned integer: {}", v.1)))
        };
        let p = Self::new(
            get("lambda")? as usize,
            get("n")? as usize,
            u32::try_from(get("k_g")?).map_err(|_| ParamError::Format("k_g out of range".into()))?,
            get("m_bar")? as usize,
            get("B_V")?,
            get("B_P")?,
            get("C_T")?,
        )?;
        for (key, expected) in [("q", p.q()), ("m", p.m() as u64), ("w", p.w() as u64)] {
            if kv.iter().any(|(k, _)| k == key) && get(key)? != expected {
                return Err(ParamError::Format(format!("{key} disagrees with the other entries")));
            }
        }
        Ok(p)
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lambda = {}", self.lambda)?;
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "k_g = {}", self.k_g)?;
        writeln!(f, "q = {}", self.q())?;
        writeln!(f, "m_bar = {}", self.m_bar)?;
        writeln!(f, "m = {}", self.m())?;
        writeln!(f, "B_V = {}", self.key_noise)?;
        writeln!(f, "B_P = {}", self.eval_noise)?;
        writeln!(f, "C_T = {}", self.inversion_const)?;
        writeln!(f, "w = {}", self.w())?;
        writeln!(f, "hellinger_bound = {:.6}", hellinger_bound(self))
    }
}

/// Splits `key = value` lines, skipping blanks and `#` comments.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>, ParamError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ParamError::Format(format!("line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Picks the smallest `log2 q` for which all constraints hold, with
/// `B_P = 320 n m B_V` tracking `m = m_bar + log2 q`.
pub fn build_params(inputs: ParamInputs) -> Result<Params, ParamError> {
    let ParamInputs {
        n,
        m_bar,
        key_noise,
        lambda,
        inversion_const,
    } = inputs;
    let mut problems = Vec::new();
    if n == 0 || !n.is_power_of_two() {
        problems.push(format!("n = {n} is not a power of two"));
    }
    for (name, v) in [
        ("m_bar", m_bar as u64),
        ("B_V", key_noise),
        ("lambda", lambda as u64),
        ("C_T", inversion_const),
    ] {
        if v == 0 {
            problems.push(format!("{name} must be positive"));
        }
    }
    if !problems.is_empty() {
        return Err(ParamError::Infeasible(problems));
    }
    let mut last = Vec::new();
    for k_g in 2..=MAX_LOG_Q {
        let m = (m_bar + k_g as usize) as u128;
        let b_p = EVAL_NOISE_FACTOR as u128 * n as u128 * m * key_noise as u128;
        let Ok(b_p) = u64::try_from(b_p) else {
            last = vec![format!("B_P = 320 n m B_V overflows at log2 q = {k_g}")];
            break;
        };
        match Params::new(lambda, n, k_g, m_bar, key_noise, b_p, inversion_const) {
            Ok(p) => return Ok(p),
            Err(ParamError::Infeasible(v)) => last = v,
            Err(e) => return Err(e),
        }
    }
    last.insert(0, format!("no modulus up to 2^{MAX_LOG_Q} works"));
    Err(ParamError::Infeasible(last))
}

/// `1 - exp(-2 pi m n B_V / B_P)`, the distance bound between the two
/// branch distributions.
pub fn hellinger_bound(p: &Params) -> f64 {
    branch_distance(p.noise_dim() as f64, p.key_noise as f64, p.eval_noise as f64)
}

/// [`hellinger_bound`] on raw values: `1 - exp(-2 pi dim key_noise / eval_noise)`.
pub fn branch_distance(dim: f64, key_noise: f64, eval_noise: f64) -> f64 {
    -(-2.0 * std::f64::consts::PI * dim * key_noise / eval_noise).exp_m1()
}
