//! `poq`: command-line front end for the proof-of-quantumness protocol.
//!
//! Exit codes: 0 success or accept, 1 reject, 2 malformed input or usage,
//! 3 infeasible parameters, 4 I/O failure.

use std::fs;
use std::io;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use rand::Rng;

use poq_core::lab::{format_table, ExperimentConfig, OracleKind, TwoProportion};
use poq_core::microsim::{run_honest_circuit, run_unequal_amplitudes, ToyTcf};
use poq_core::prover::correct_m_probability;
use poq_core::seed::derive_rng;
use poq_core::service::{
    respond, serve, Config, ConfigError, KeySource, RespondError, RespondOptions, ServeOptions,
};
use poq_core::wire::FrameError;
use poq_core::{
    decode_message, encode_message, gen_f, prove, run_experiments, verify, HashAlg, LabError, Message, NtcfKey,
    NtcfTrapdoor, Oracle, ParamError, ParseError, ProtocolError, ProverError, Strategy,
};

const EXIT_REJECT: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_IO: u8 = 4;

const EMULATION_NOTICE: &str = "NOTICE: emulation mode. This strategy reads the verifier's secret key to \
reproduce the output law of a quantum prover. It is not a classical attack.";

#[derive(Parser)]
#[command(name = "poq", version, about = "Two-message proof of quantumness over Ring-LWE")]
struct Cli {
    /// Plain-text `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; takes precedence over PQ_SEED and the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct ParamArgs {
    /// Read parameters from a file written by `poq params`.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Ring dimension (power of two).
    #[arg(long)]
    n: Option<usize>,
    /// Number of uniform key columns.
    #[arg(long)]
    m_bar: Option<usize>,
    /// Key noise width.
    #[arg(long)]
    key_noise: Option<u64>,
    /// Tuples per proof.
    #[arg(long)]
    lambda: Option<usize>,
    /// Inversion slack constant.
    #[arg(long)]
    inversion_const: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build and validate a parameter set.
    Params {
        #[command(flatten)]
        p: ParamArgs,
        /// Write the parameter file here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a public key and its secret trapdoor.
    Keygen {
        #[command(flatten)]
        p: ParamArgs,
        /// Public key file.
        #[arg(long)]
        public: PathBuf,
        /// Secret key file.
        #[arg(long)]
        secret: PathBuf,
    },
    /// Wrap a public key in a CHALLENGE message.
    Challenge {
        /// Public key file.
        #[arg(long)]
        public: PathBuf,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer a CHALLENGE with a RESPONSE.
    Prove {
        /// CHALLENGE message file.
        #[arg(long)]
        challenge: PathBuf,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
        /// `honest`, `random_guess`, `half_claw` or `trapdoor_cheat`.
        #[arg(long)]
        strategy: Option<Strategy>,
        /// Secret key, required by the honest and trapdoor_cheat strategies.
        #[arg(long)]
        secret: Option<PathBuf>,
        /// Hash behind the random oracle: `sha256` or `sha512`.
        #[arg(long)]
        hash: Option<HashAlg>,
    },
    /// Check a RESPONSE against the secret key.
    Verify {
        /// Secret key file.
        #[arg(long)]
        secret: PathBuf,
        /// RESPONSE message file.
        #[arg(long)]
        response: PathBuf,
        /// Hash behind the random oracle: `sha256` or `sha512`.
        #[arg(long)]
        hash: Option<HashAlg>,
    },
    /// Run the verifier over TCP.
    Serve {
        #[command(flatten)]
        p: ParamArgs,
        /// Address to listen on.
        #[arg(long)]
        addr: Option<String>,
        /// Use this key for every session; otherwise each session gets a
        /// fresh key derived from the seed.
        #[arg(long)]
        secret: Option<PathBuf>,
        /// Exit after this many sessions.
        #[arg(long)]
        sessions: Option<usize>,
        /// Save each session as `session-NNNNNN.bin` plus a `.txt` summary.
        #[arg(long)]
        transcript_dir: Option<PathBuf>,
        /// Per-read and per-write timeout.
        #[arg(long)]
        timeout_ms: Option<u64>,
        /// Hash behind the random oracle: `sha256` or `sha512`.
        #[arg(long)]
        hash: Option<HashAlg>,
    },
    /// Run the prover against a TCP verifier.
    Respond {
        /// Verifier address.
        #[arg(long)]
        addr: Option<String>,
        /// `honest`, `random_guess`, `half_claw` or `trapdoor_cheat`.
        #[arg(long)]
        strategy: Option<Strategy>,
        /// Secret key, required by the honest and trapdoor_cheat strategies.
        #[arg(long)]
        secret: Option<PathBuf>,
        /// Save the session frames here.
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Per-read and per-write timeout.
        #[arg(long)]
        timeout_ms: Option<u64>,
        /// Hash behind the random oracle: `sha256` or `sha512`.
        #[arg(long)]
        hash: Option<HashAlg>,
    },
    /// Run the soundness experiments and print statistics.
    Experiment {
        #[command(flatten)]
        p: ParamArgs,
        /// Variants to run, e.g. `1,2,3`.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        variants: Vec<u8>,
        /// Strategies to run; all of them by default.
        #[arg(long, value_delimiter = ',')]
        strategy: Vec<Strategy>,
        /// Trials per strategy.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// `lazy`, `sha256` or `sha512`; only variant 1 accepts a hash.
        #[arg(long, default_value = "lazy")]
        oracle: String,
        /// Also write the results as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Exhaustive statevector checks on toy instances.
    Microsim {
        /// Toy domain sizes (powers of two).
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,64")]
        domains: Vec<usize>,
        /// Random oracle tables per instance.
        #[arg(long, default_value_t = 20)]
        tables: usize,
        /// Random amplitude pairs for the closed-form comparison.
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        /// Print the outcome table of one instance, given as `domain,shift`.
        #[arg(long, value_delimiter = ',')]
        show: Option<Vec<usize>>,
        /// Also write the results as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Time key generation, proving and verification.
    Bench {
        #[command(flatten)]
        p: ParamArgs,
        /// Repetitions; the median is reported.
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Param(p) => p.into(),
            ConfigError::Io(io) => io.into(),
            ConfigError::Format(_) => Failure::new(EXIT_PARSE, e.to_string()),
        }
    }
}

impl From<ParamError> for Failure {
    fn from(e: ParamError) -> Self {
        match e {
            ParamError::Infeasible(ref problems) => {
                let mut msg = String::from("infeasible parameters:");
                for p in problems {
                    msg.push_str("\n  - ");
                    msg.push_str(p);
                }
                Failure::new(EXIT_INFEASIBLE, msg)
            }
            other => Failure::new(EXIT_PARSE, other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(EXIT_IO, e.to_string())
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::new(EXIT_PARSE, e.to_string())
    }
}

impl From<ProtocolError> for Failure {
    fn from(e: ProtocolError) -> Self {
        Failure::new(EXIT_PARSE, e.to_string())
    }
}

impl From<ProverError> for Failure {
    fn from(e: ProverError) -> Self {
        Failure::new(EXIT_PARSE, e.to_string())
    }
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        Failure::new(EXIT_PARSE, e.to_string())
    }
}

impl From<RespondError> for Failure {
    fn from(e: RespondError) -> Self {
        match e {
            RespondError::Frame(FrameError::Io(io)) if io.kind() != io::ErrorKind::InvalidData => io.into(),
            other => Failure::new(EXIT_PARSE, other.to_string()),
        }
    }
}

type CliResult = Result<u8, Failure>;

fn load_config(cli: &Cli) -> Result<Config, Failure> {
    let mut cfg = Config::default();
    if let Some(path) = &cli.config {
        cfg.apply_text(&read_text(path)?)?;
    }
    cfg.apply_env()?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn apply_params(cfg: &mut Config, p: &ParamArgs) {
    if let Some(path) = &p.params {
        cfg.params_file = Some(path.clone());
    }
    let inputs = &mut cfg.inputs;
    inputs.n = p.n.unwrap_or(inputs.n);
    inputs.m_bar = p.m_bar.unwrap_or(inputs.m_bar);
    inputs.key_noise = p.key_noise.unwrap_or(inputs.key_noise);
    inputs.lambda = p.lambda.unwrap_or(inputs.lambda);
    inputs.inversion_const = p.inversion_const.unwrap_or(inputs.inversion_const);
}

fn with_path<E: std::fmt::Display>(path: &Path, code: u8) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::new(code, format!("{}: {e}", path.display()))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(with_path(path, EXIT_IO))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(with_path(path, EXIT_IO))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(with_path(path, EXIT_IO))
}

fn load_secret(path: &Path) -> Result<NtcfTrapdoor, Failure> {
    NtcfTrapdoor::from_bytes(&read_bytes(path)?).map_err(with_path(path, EXIT_PARSE))
}

fn trapdoor_for(strategy: Strategy, secret: Option<&Path>) -> Result<Option<NtcfTrapdoor>, Failure> {
    match secret {
        Some(path) => Ok(Some(load_secret(path)?)),
        None if strategy.needs_trapdoor() => Err(Failure::new(
            EXIT_PARSE,
            format!("strategy {strategy} needs --secret (it emulates a quantum device)"),
        )),
        None => Ok(None),
    }
}

fn cmd_params(mut cfg: Config, p: &ParamArgs, out: Option<&Path>) -> CliResult {
    apply_params(&mut cfg, p);
    let params = cfg.resolve_params()?;
    let text = params.to_text();
    match out {
        Some(path) => write_file(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_keygen(mut cfg: Config, p: &ParamArgs, public: &Path, secret: &Path) -> CliResult {
    apply_params(&mut cfg, p);
    let params = cfg.resolve_params()?;
    let (key, trapdoor) = gen_f(&params, &mut derive_rng(cfg.seed, "keygen", 0));
    write_file(public, &key.to_bytes())?;
    write_file(secret, &trapdoor.to_bytes())?;
    println!(
        "wrote {} ({} bytes) and {} ({} bytes)",
        public.display(),
        key.to_bytes().len(),
        secret.display(),
        trapdoor.to_bytes().len()
    );
    Ok(0)
}

fn cmd_challenge(public: &Path, out: &Path) -> CliResult {
    let key = NtcfKey::from_bytes(&read_bytes(public)?).map_err(with_path(public, EXIT_PARSE))?;
    write_file(out, &encode_message(&Message::Challenge(key)))?;
    Ok(0)
}

fn cmd_prove(cfg: Config, challenge: &Path, out: &Path, secret: Option<&Path>) -> CliResult {
    let key = match decode_message(&read_bytes(challenge)?).map_err(with_path(challenge, EXIT_PARSE))? {
        Message::Challenge(key) => key,
        other => return Err(Failure::new(EXIT_PARSE, format!("expected CHALLENGE, got {}", other.name()))),
    };
    let trapdoor = trapdoor_for(cfg.strategy, secret)?;
    if let Some(t) = &trapdoor {
        if t.key() != &key {
            return Err(Failure::new(EXIT_PARSE, "secret key does not belong to this challenge"));
        }
    }
    if cfg.strategy.needs_trapdoor() {
        eprintln!("{EMULATION_NOTICE}");
    }
    let mut oracle = Oracle::deterministic(cfg.hash);
    let tuples = prove(
        cfg.strategy,
        &key,
        &mut oracle,
        trapdoor.as_ref(),
        &mut derive_rng(cfg.seed, "prover", 0),
    )?;
    write_file(out, &encode_message(&Message::Response(tuples)))?;
    Ok(0)
}

fn cmd_verify(cfg: Config, secret: &Path, response: &Path) -> CliResult {
    let trapdoor = load_secret(secret)?;
    let tuples = match decode_message(&read_bytes(response)?).map_err(with_path(response, EXIT_PARSE))? {
        Message::Response(t) => t,
        other => return Err(Failure::new(EXIT_PARSE, format!("expected RESPONSE, got {}", other.name()))),
    };
    let mut oracle = Oracle::deterministic(cfg.hash);
    let v = verify(&trapdoor, &tuples, &mut oracle)?;
    let lambda = trapdoor.params().lambda();
    let word = if v.accepted { "accept" } else { "reject" };
    println!("{word}, count={}/{lambda}", v.count);
    if !v.distinct {
        println!("repeated image");
    }
    Ok(if v.accepted { 0 } else { EXIT_REJECT })
}

fn cmd_serve(cfg: Config, secret: Option<&Path>, sessions: Option<usize>) -> CliResult {
    let keys = match secret {
        Some(path) => KeySource::Fixed(Arc::new(load_secret(path)?)),
        None => KeySource::Fresh {
            params: cfg.resolve_params()?,
            seed: cfg.seed,
        },
    };
    let listener = TcpListener::bind(&cfg.addr)?;
    println!("listening on {}", listener.local_addr()?);
    let transcripts = serve(
        listener,
        ServeOptions {
            keys,
            hash: cfg.hash,
            timeout: cfg.timeout,
            transcript_dir: cfg.transcript_dir.clone(),
            max_sessions: sessions,
        },
    )?;
    for t in &transcripts {
        println!(
            "session {}: {} {} count={}",
            t.index,
            t.status.code(),
            if t.accepted { "accept" } else { "reject" },
            t.count
        );
    }
    Ok(0)
}

fn cmd_respond(cfg: Config, secret: Option<&Path>, transcript: Option<&Path>) -> CliResult {
    let trapdoor = trapdoor_for(cfg.strategy, secret)?;
    if cfg.strategy.needs_trapdoor() {
        eprintln!("{EMULATION_NOTICE}");
    }
    let opts = RespondOptions {
        strategy: cfg.strategy,
        trapdoor: trapdoor.as_ref(),
        hash: cfg.hash,
        seed: cfg.seed,
    };
    let t = respond(cfg.addr.as_str(), &opts, cfg.timeout)?;
    if let Some(path) = transcript {
        write_file(path, &t.bytes)?;
    }
    let word = if t.accepted { "accept" } else { "reject" };
    println!("{word}, count={}", t.count);
    Ok(if t.accepted { 0 } else { EXIT_REJECT })
}

fn parse_oracle(s: &str) -> Result<OracleKind, Failure> {
    if s.eq_ignore_ascii_case("lazy") {
        return Ok(OracleKind::Lazy);
    }
    s.parse::<HashAlg>()
        .map(OracleKind::Hash)
        .map_err(|e| Failure::new(EXIT_PARSE, e))
}

fn cmd_experiment(
    mut cfg: Config,
    p: &ParamArgs,
    variants: &[u8],
    strategies: &[Strategy],
    trials: usize,
    oracle: &str,
    csv: Option<&Path>,
) -> CliResult {
    apply_params(&mut cfg, p);
    let params = cfg.resolve_params()?;
    let oracle = parse_oracle(oracle)?;
    let strategies = if strategies.is_empty() {
        Strategy::ALL.to_vec()
    } else {
        strategies.to_vec()
    };
    let mut all = Vec::new();
    for strategy in strategies {
        let ec = ExperimentConfig {
            params,
            strategy,
            trials,
            seed: cfg.seed,
            oracle,
        };
        let stats = run_experiments(variants, &ec)?;
        let one = stats.iter().find(|s| s.variant == 1);
        let two = stats.iter().find(|s| s.variant == 2);
        if let (Some(a), Some(b)) = (one, two) {
            let t = TwoProportion::new(a.accepts, a.trials, b.accepts, b.trials);
            println!(
                "{strategy}: p1 - p2 = {:+.5}, 95% half-width {:.5} ({})",
                t.diff,
                t.half_width,
                if t.within() { "consistent" } else { "differs" }
            );
        }
        all.extend(stats);
    }
    print!("{}", format_table(&all));
    if let Some(path) = csv {
        let mut text = String::from(poq_core::ExperimentStats::csv_header());
        text.push('\n');
        for s in &all {
            text.push_str(&s.csv_row());
            text.push('\n');
        }
        write_file(path, text.as_bytes())?;
    }
    Ok(0)
}

fn cmd_microsim(cfg: Config, domains: &[usize], tables: usize, pairs: usize, show: Option<&[usize]>, csv: Option<&Path>) -> CliResult {
    let tol = 1e-12;
    let mut rng = derive_rng(cfg.seed, "microsim", 0);
    let mut worst = 0.0f64;
    let mut rows = String::from("domain,shift,table,violating_mass,total_mass\n");
    let start = Instant::now();
    for &n in domains {
        let mut shifts = vec![0, 1, n - 1];
        shifts.dedup();
        for s in shifts {
            let toy = ToyTcf::new(n, s).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
            for table in 0..tables {
                let h: Vec<bool> = (0..n).map(|_| rng.random()).collect();
                let dist = run_honest_circuit(toy, &h).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
                let bad = dist.violating_mass(&h);
                let mass_err = (dist.total_mass() - 1.0).abs();
                worst = worst.max(bad).max(mass_err);
                rows.push_str(&format!("{n},{s},{table},{bad:e},{:.15}\n", dist.total_mass()));
            }
        }
    }
    println!(
        "circuit: {} domains, {tables} tables each, worst violating mass {worst:.3e} ({:.2?})",
        domains.len(),
        start.elapsed()
    );
    let mut worst_amp = 0.0f64;
    for _ in 0..pairs {
        let theta: f64 = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
        let (a0, a1) = (theta.cos(), theta.sin());
        let domain = 8;
        let x0 = rng.random_range(0..domain);
        let x1 = (x0 + rng.random_range(1..domain)) % domain;
        let h: Vec<bool> = (0..domain).map(|_| rng.random()).collect();
        let law = run_unequal_amplitudes(a0, a1, x0, x1, &h).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
        let p = correct_m_probability(a0, a1)?;
        for d in 0..domain {
            worst_amp = worst_amp.max((law.correct_given(d) - p).abs());
            worst_amp = worst_amp.max((law.d_marginal(d) - 1.0 / domain as f64).abs());
        }
    }
    println!("amplitudes: {pairs} pairs, worst deviation from closed form {worst_amp:.3e}");
    if let Some(pick) = show {
        let [n, s] = pick else {
            return Err(Failure::new(EXIT_PARSE, "--show takes domain,shift"));
        };
        let toy = ToyTcf::new(*n, *s).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
        let h: Vec<bool> = (0..*n).map(|_| rng.random()).collect();
        let dist = run_honest_circuit(toy, &h).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
        print!("{}", dist.to_table(tol));
    }
    if let Some(path) = csv {
        write_file(path, rows.as_bytes())?;
    }
    let ok = worst <= tol && worst_amp <= tol;
    println!("{}", if ok { "all checks passed" } else { "CHECK FAILED" });
    Ok(if ok { 0 } else { EXIT_REJECT })
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

fn cmd_bench(mut cfg: Config, p: &ParamArgs, reps: usize) -> CliResult {
    apply_params(&mut cfg, p);
    let params = cfg.resolve_params()?;
    let reps = reps.max(1);
    let (mut kg, mut pr, mut ve) = (Vec::new(), Vec::new(), Vec::new());
    let mut rng = derive_rng(cfg.seed, "bench", 0);
    for _ in 0..reps {
        let t0 = Instant::now();
        let (key, trapdoor) = gen_f(&params, &mut rng);
        let t1 = Instant::now();
        let mut oracle = Oracle::deterministic(cfg.hash);
        let tuples = prove(Strategy::Honest, &key, &mut oracle, Some(&trapdoor), &mut rng)?;
        let t2 = Instant::now();
        let v = verify(&trapdoor, &tuples, &mut oracle)?;
        let t3 = Instant::now();
        if !v.accepted {
            log::warn!("honest run rejected with count {}", v.count);
        }
        kg.push(t1 - t0);
        pr.push(t2 - t1);
        ve.push(t3 - t2);
    }
    println!("n={} log2q={} m={} lambda={} reps={reps}", params.n(), params.log_q(), params.m(), params.lambda());
    println!("keygen  median {:>10.3?}", median(kg));
    println!("prove   median {:>10.3?}  (honest emulation)", median(pr));
    println!("verify  median {:>10.3?}", median(ve));
    Ok(0)
}

fn run(cli: Cli) -> CliResult {
    let mut cfg = load_config(&cli)?;
    match &cli.command {
        Command::Params { p, out } => cmd_params(cfg, p, out.as_deref()),
        Command::Keygen { p, public, secret } => cmd_keygen(cfg, p, public, secret),
        Command::Challenge { public, out } => cmd_challenge(public, out),
        Command::Prove {
            challenge,
            out,
            strategy,
            secret,
            hash,
        } => {
            cfg.strategy = strategy.unwrap_or(cfg.strategy);
            cfg.hash = hash.unwrap_or(cfg.hash);
            let secret = secret.clone().or(cfg.secret_key.clone());
            cmd_prove(cfg, challenge, out, secret.as_deref())
        }
        Command::Verify { secret, response, hash } => {
            cfg.hash = hash.unwrap_or(cfg.hash);
            cmd_verify(cfg, secret, response)
        }
        Command::Serve {
            p,
            addr,
            secret,
            sessions,
            transcript_dir,
            timeout_ms,
            hash,
        } => {
            apply_params(&mut cfg, p);
            cfg.addr = addr.clone().unwrap_or(cfg.addr);
            cfg.hash = hash.unwrap_or(cfg.hash);
            cfg.timeout = timeout_ms.map(Duration::from_millis).unwrap_or(cfg.timeout);
            cfg.transcript_dir = transcript_dir.clone().or(cfg.transcript_dir);
            let secret = secret.clone().or(cfg.secret_key.clone());
            cmd_serve(cfg, secret.as_deref(), *sessions)
        }
        Command::Respond {
            addr,
            strategy,
            secret,
            transcript,
            timeout_ms,
            hash,
        } => {
            cfg.addr = addr.clone().unwrap_or(cfg.addr);
            cfg.strategy = strategy.unwrap_or(cfg.strategy);
            cfg.hash = hash.unwrap_or(cfg.hash);
            cfg.timeout = timeout_ms.map(Duration::from_millis).unwrap_or(cfg.timeout);
            let secret = secret.clone().or(cfg.secret_key.clone());
            cmd_respond(cfg, secret.as_deref(), transcript.as_deref())
        }
        Command::Experiment {
            p,
            variants,
            strategy,
            trials,
            oracle,
            csv,
        } => cmd_experiment(cfg, p, variants, strategy, *trials, oracle, csv.as_deref()),
        Command::Microsim {
            domains,
            tables,
            pairs,
            show,
            csv,
        } => cmd_microsim(cfg, domains, *tables, *pairs, show.as_deref(), csv.as_deref()),
        Command::Bench { p, reps } => cmd_bench(cfg, p, *reps),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
