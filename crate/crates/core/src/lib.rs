//! Proof-of-quantumness protocol built on a Ring-LWE noisy trapdoor
//! claw-free function family.
//!
//! Desk-scale parameters are for experimentation only and offer no real
//! security.

pub mod bits;
pub mod codec;
pub mod error;
pub mod gadget;
pub mod gauss;
pub mod lab;
pub mod microsim;
pub mod ntcf;
pub mod oracle;
pub mod params;
pub mod protocol;
pub mod prover;
pub mod ring;
pub mod seed;
pub mod service;
pub mod wire;

pub use bits::BitString;
pub use codec::{ByteReader, ParseError, ParseErrorKind};
pub use error::*;
pub use gadget::{gadget_decode, gen_trap, trap_invert, GadgetTrapdoor};
pub use gauss::{dgauss_log_rho, dgauss_rho, DiscreteGaussian, GaussError, GaussParams};
pub use lab::{
    extract_claw_attempt, run_experiment, run_experiments, ExperimentConfig, ExperimentStats, OracleKind,
};
pub use ntcf::{chk_f, claw_pair, density_fprime, gen_f, inv_f, Claw, Density, NtcfKey, NtcfTrapdoor};
pub use oracle::{HashAlg, Oracle};
pub use params::{build_params, hellinger_bound, ParamInputs, Params};
pub use protocol::{verify, ProverTuple, Verdict};
pub use prover::{prove, prove_cheat, prove_honest, Strategy};
pub use ring::{Ring, RingElement, RingVector};
pub use wire::{decode_message, encode_message, Message};
