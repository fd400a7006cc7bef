//! Python bindings. Seeds are derived exactly as the `poq` command line
//! derives them, so keys and responses produced here match its files.

use poq_core::lab::{ExperimentConfig, OracleKind};
use poq_core::microsim::{run_honest_circuit, ToyTcf};
use poq_core::seed::derive_rng;
use poq_core::{
    build_params, decode_message, encode_message, gen_f, hellinger_bound, prove, run_experiments, verify, HashAlg,
    Message, NtcfKey, NtcfTrapdoor, Oracle, ParamInputs, Strategy,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

fn value_error<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Validated protocol parameters.
#[pyclass(module = "poq", frozen, from_py_object)]
#[derive(Clone)]
struct Params {
    inner: poq_core::Params,
}

#[pymethods]
impl Params {
    #[new]
    #[pyo3(signature = (n = 64, m_bar = 3, key_noise = 1, lambda_ = 120, inversion_const = 8))]
    fn new(n: usize, m_bar: usize, key_noise: u64, lambda_: usize, inversion_const: u64) -> PyResult<Self> {
        let inner = build_params(ParamInputs {
            n,
            m_bar,
            key_noise,
            lambda: lambda_,
            inversion_const,
        })
        .map_err(value_error)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        let inner = poq_core::Params::from_text(text).map_err(value_error)?;
        Ok(Self { inner })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m_bar(&self) -> usize {
        self.inner.m_bar()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn log_q(&self) -> u32 {
        self.inner.log_q()
    }

    #[getter]
    fn q(&self) -> u64 {
        self.inner.q()
    }

    #[getter]
    fn key_noise(&self) -> u64 {
        self.inner.key_noise()
    }

    #[getter]
    fn eval_noise(&self) -> u64 {
        self.inner.eval_noise()
    }

    #[getter]
    fn inversion_const(&self) -> u64 {
        self.inner.inversion_const()
    }

    #[getter]
    fn lambda_(&self) -> usize {
        self.inner.lambda()
    }

    #[getter]
    fn w(&self) -> usize {
        self.inner.w()
    }

    #[getter]
    fn hellinger_bound(&self) -> f64 {
        hellinger_bound(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Params(n={}, m_bar={}, key_noise={}, lambda_={}, log_q={}, eval_noise={})",
            self.inner.n(),
            self.inner.m_bar(),
            self.inner.key_noise(),
            self.inner.lambda(),
            self.inner.log_q(),
            self.inner.eval_noise()
        )
    }
}

fn parse_hash(hash: &str) -> PyResult<HashAlg> {
    hash.parse().map_err(value_error)
}

/// Returns `(public_key, secret_key)` as bytes.
#[pyfunction]
#[pyo3(signature = (params, seed = 0))]
fn keygen<'py>(py: Python<'py>, params: &Params, seed: u64) -> (Bound<'py, PyBytes>, Bound<'py, PyBytes>) {
    let (key, trapdoor) = gen_f(&params.inner, &mut derive_rng(seed, "keygen", 0));
    (PyBytes::new(py, &key.to_bytes()), PyBytes::new(py, &trapdoor.to_bytes()))
}

/// Wraps a public key into a CHALLENGE message.
#[pyfunction]
fn challenge<'py>(py: Python<'py>, public_key: &[u8]) -> PyResult<Bound<'py, PyBytes>> {
    let key = NtcfKey::from_bytes(public_key).map_err(value_error)?;
    Ok(PyBytes::new(py, &encode_message(&Message::Challenge(key))))
}

/// Answers a CHALLENGE message with a RESPONSE message.
#[pyfunction]
#[pyo3(signature = (challenge, strategy = "honest", secret_key = None, seed = 0, hash = "sha256"))]
fn respond<'py>(
    py: Python<'py>,
    challenge: &[u8],
    strategy: &str,
    secret_key: Option<&[u8]>,
    seed: u64,
    hash: &str,
) -> PyResult<Bound<'py, PyBytes>> {
    let key = match decode_message(challenge).map_err(value_error)? {
        Message::Challenge(key) => key,
        other => return Err(PyValueError::new_err(format!("expected CHALLENGE, got {}", other.name()))),
    };
    let strategy: Strategy = strategy.parse().map_err(value_error)?;
    let trapdoor = secret_key.map(NtcfTrapdoor::from_bytes).transpose().map_err(value_error)?;
    if trapdoor.as_ref().is_some_and(|t| t.key() != &key) {
        return Err(PyValueError::new_err("secret key does not belong to this challenge"));
    }
    let mut oracle = Oracle::deterministic(parse_hash(hash)?);
    let tuples = prove(
        strategy,
        &key,
        &mut oracle,
        trapdoor.as_ref(),
        &mut derive_rng(seed, "prover", 0),
    )
    .map_err(value_error)?;
    Ok(PyBytes::new(py, &encode_message(&Message::Response(tuples))))
}

/// Checks a RESPONSE message, returning `(accepted, count)`.
#[pyfunction]
#[pyo3(name = "verify", signature = (secret_key, response, hash = "sha256"))]
fn verify_response(secret_key: &[u8], response: &[u8], hash: &str) -> PyResult<(bool, usize)> {
    let trapdoor = NtcfTrapdoor::from_bytes(secret_key).map_err(value_error)?;
    let tuples = match decode_message(response).map_err(value_error)? {
        Message::Response(t) => t,
        other => return Err(PyValueError::new_err(format!("expected RESPONSE, got {}", other.name()))),
    };
    let v = verify(&trapdoor, &tuples, &mut Oracle::deterministic(parse_hash(hash)?)).map_err(value_error)?;
    Ok((v.accepted, v.count))
}

/// Runs lab variants over shared trials; one dict of statistics per variant.
#[pyfunction]
#[pyo3(signature = (params, strategy, trials, seed = 0, variants = vec![1, 2]))]
fn experiment<'py>(
    py: Python<'py>,
    params: &Params,
    strategy: &str,
    trials: usize,
    seed: u64,
    variants: Vec<u8>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = ExperimentConfig {
        params: params.inner,
        strategy: strategy.parse().map_err(value_error)?,
        trials,
        seed,
        oracle: OracleKind::Lazy,
    };
    let stats = py.detach(|| run_experiments(&variants, &cfg)).map_err(value_error)?;
    stats
        .into_iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("variant", s.variant)?;
            d.set_item("strategy", s.strategy.name())?;
            d.set_item("trials", s.trials)?;
            d.set_item("accepts", s.accepts)?;
            d.set_item("pass_rate", s.pass_rate)?;
            d.set_item("pass_ci", s.pass_ci)?;
            d.set_item("tuples", s.tuples)?;
            d.set_item("tuple_passes", s.tuple_passes)?;
            d.set_item("per_tuple_rate", s.per_tuple_rate)?;
            d.set_item("db_hit_profile", s.db_hit_profile)?;
            Ok(d)
        })
        .collect()
}

/// Probability that the emulated measurement yields a correct `m`.
#[pyfunction]
fn correct_m_probability(alpha0: f64, alpha1: f64) -> PyResult<f64> {
    poq_core::prover::correct_m_probability(alpha0, alpha1).map_err(value_error)
}

/// Probability mass of the exact toy circuit that fails the check or ends
/// with `m' = 0`.
#[pyfunction]
fn microsim_violation(domain: usize, shift: usize, table: Vec<bool>) -> PyResult<f64> {
    let toy = ToyTcf::new(domain, shift).map_err(value_error)?;
    let dist = run_honest_circuit(toy, &table).map_err(value_error)?;
    Ok(dist.violating_mass(&table))
}

#[pymodule]
fn poq(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Params>()?;
    m.add_function(wrap_pyfunction!(keygen, m)?)?;
    m.add_function(wrap_pyfunction!(challenge, m)?)?;
    m.add_function(wrap_pyfunction!(respond, m)?)?;
    m.add_function(wrap_pyfunction!(verify_response, m)?)?;
    m.add_function(wrap_pyfunction!(experiment, m)?)?;
    m.add_function(wrap_pyfunction!(correct_m_probability, m)?)?;
    m.add_function(wrap_pyfunction!(microsim_violation, m)?)?;
    Ok(())
}
