//! Configuration and TCP sessions.
//!
//! A session is one connection: the verifier sends CHALLENGE, the prover
//! answers with RESPONSE and the verifier closes with VERDICT. Timeouts and
//! malformed input end the session with a rejecting verdict and a status
//! recorded next to the transcript.

use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use crate::error::{ParamError, ProtocolError, ProverError};
use crate::ntcf::{gen_f, NtcfTrapdoor};
use crate::oracle::{HashAlg, Oracle};
use crate::params::{build_params, parse_key_values, ParamInputs, Params};
use crate::protocol::verify;
use crate::prover::{prove, Strategy};
use crate::seed::derive_rng;
use crate::wire::{decode_message, read_frame, write_message, FrameError, Message};

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "PQ_SEED";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Format(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Settings shared by every subcommand. Each field can come from a
/// `key = value` file and be overridden on the command line.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub inputs: ParamInputs,
    pub params_file: Option<PathBuf>,
    pub public_key: Option<PathBuf>,
    pub secret_key: Option<PathBuf>,
    pub hash: HashAlg,
    pub strategy: Strategy,
    pub addr: String,
    pub seed: u64,
    pub timeout: Duration,
    pub transcript_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            inputs: ParamInputs::default(),
            params_file: None,
            public_key: None,
            secret_key: None,
            hash: HashAlg::Sha256,
            strategy: Strategy::Honest,
            addr: "127.0.0.1:7878".into(),
            seed: 0,
            timeout: Duration::from_secs(30),
            transcript_dir: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| ConfigError::Format(format!("{key}: not a valid number: {v}")))
}

impl Config {
    /// Applies `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (k, v) in parse_key_values(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "n" => self.inputs.n = parse_num(key, v)?,
            "m_bar" => self.inputs.m_bar = parse_num(key, v)?,
            "B_V" | "key_noise" => self.inputs.key_noise = parse_num(key, v)?,
            "lambda" => self.inputs.lambda = parse_num(key, v)?,
            "C_T" | "inversion_const" => self.inputs.inversion_const = parse_num(key, v)?,
            "params" => self.params_file = Some(v.into()),
            "public_key" => self.public_key = Some(v.into()),
            "secret_key" => self.secret_key = Some(v.into()),
            "hash" => self.hash = v.parse().map_err(ConfigError::Format)?,
            "strategy" => self.strategy = v.parse().map_err(ConfigError::Format)?,
            "addr" => self.addr = v.into(),
            "seed" => self.seed = parse_num(key, v)?,
            "timeout_ms" => self.timeout = Duration::from_millis(parse_num(key, v)?),
            "transcript_dir" => self.transcript_dir = Some(v.into()),
            other => return Err(ConfigError::Format(format!("unknown key {other}"))),
        }
        Ok(())
    }

    /// Replaces the seed with `PQ_SEED` when that is set.
    pub fn apply_env(&mut self) -> Result<(), ConfigError> {
        self.apply_seed_override(std::env::var(SEED_ENV).ok().as_deref())
    }

    pub fn apply_seed_override(&mut self, value: Option<&str>) -> Result<(), ConfigError> {
        if let Some(v) = value {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| ConfigError::Format(format!("{SEED_ENV} is not a decimal u64: {v}")))?;
        }
        Ok(())
    }

    /// The params file if one is configured, else the builder's output.
    pub fn resolve_params(&self) -> Result<Params, ConfigError> {
        match &self.params_file {
            Some(path) => Ok(Params::from_text(&fs::read_to_string(path)?)?),
            None => Ok(build_params(self.inputs)?),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Verifier,
    Prover,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Verifier => "verifier",
            Role::Prover => "prover",
        })
    }
}

/// How a session ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SessionStatus {
    Completed,
    Parse(String),
    Protocol(String),
    Timeout,
    Io(String),
}

impl SessionStatus {
    pub fn code(&self) -> &'static str {
        match self {
            SessionStatus::Completed => "ok",
            SessionStatus::Parse(_) => "parse_error",
            SessionStatus::Protocol(_) => "protocol_error",
            SessionStatus::Timeout => "timeout",
            SessionStatus::Io(_) => "io_error",
        }
    }

    fn detail(&self) -> Option<&str> {
        match self {
            SessionStatus::Parse(s) | SessionStatus::Protocol(s) | SessionStatus::Io(s) => Some(s),
            _ => None,
        }
    }
}

/// The frames of one session in order, plus how it ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionTranscript {
    pub role: Role,
    pub index: u64,
    pub hash: HashAlg,
    pub bytes: Vec<u8>,
    pub status: SessionStatus,
    pub accepted: bool,
    pub count: u32,
}

impl SessionTranscript {
    fn new(role: Role, index: u64, hash: HashAlg) -> Self {
        Self {
            role,
            index,
            hash,
            bytes: Vec::new(),
            status: SessionStatus::Completed,
            accepted: false,
            count: 0,
        }
    }

    /// `key = value` summary stored beside the binary transcript.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "role = {}\nsession = {}\nhash = {}\nstatus = {}\naccepted = {}\ncount = {}\nbytes = {}\n",
            self.role,
            self.index,
            self.hash,
            self.status.code(),
            self.accepted as u8,
            self.count,
            self.bytes.len()
        );
        if let Some(d) = self.status.detail() {
            s.push_str(&format!("error = {}\n", d.replace('\n', " ")));
        }
        s
    }

    /// Writes `<stem>.bin` and `<stem>.txt` under `dir`.
    pub fn persist(&self, dir: &Path, stem: &str) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let bin = dir.join(format!("{stem}.bin"));
        fs::write(&bin, &self.bytes)?;
        fs::write(dir.join(format!("{stem}.txt")), self.summary())?;
        Ok(bin)
    }
}

fn status_of(err: FrameError) -> SessionStatus {
    match err {
        FrameError::Io(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {
            SessionStatus::Timeout
        }
        FrameError::Io(e) if e.kind() == io::ErrorKind::UnexpectedEof => SessionStatus::Parse(e.to_string()),
        FrameError::Io(e) => SessionStatus::Io(e.to_string()),
        FrameError::Parse(e) => SessionStatus::Parse(e.to_string()),
    }
}

/// Reads one frame, records it and decodes it.
fn receive<S: Read>(s: &mut S, t: &mut SessionTranscript) -> Result<Message, SessionStatus> {
    let frame = read_frame(s).map_err(status_of)?;
    let msg = decode_message(&frame).map_err(|e| SessionStatus::Parse(e.to_string()))?;
    t.bytes.extend_from_slice(&frame);
    Ok(msg)
}

fn send<S: Write>(s: &mut S, msg: &Message, t: &mut SessionTranscript) -> Result<(), SessionStatus> {
    let bytes = write_message(s, msg).map_err(|e| status_of(FrameError::Io(e)))?;
    t.bytes.extend_from_slice(&bytes);
    Ok(())
}

/// Verifier side of one session over any byte stream.
pub fn run_verifier<S: Read + Write>(
    stream: &mut S,
    trapdoor: &NtcfTrapdoor,
    hash: HashAlg,
    index: u64,
) -> SessionTranscript {
    let mut t = SessionTranscript::new(Role::Verifier, index, hash);
    if let Err(status) = send(stream, &Message::Challenge(trapdoor.key().clone()), &mut t) {
        t.status = status;
        return t;
    }
    let outcome = match receive(stream, &mut t) {
        Ok(Message::Response(tuples)) => {
            let mut oracle = Oracle::deterministic(hash);
            verify(trapdoor, &tuples, &mut oracle).map_err(|e: ProtocolError| SessionStatus::Protocol(e.to_string()))
        }
        Ok(other) => Err(SessionStatus::Parse(format!("expected RESPONSE, got {}", other.name()))),
        Err(status) => Err(status),
    };
    match outcome {
        Ok(v) => {
            t.accepted = v.accepted;
            t.count = v.count as u32;
        }
        Err(status) => {
            log::warn!("session {index}: {}", status.code());
            t.status = status;
        }
    }
    let verdict = Message::Verdict {
        accepted: t.accepted,
        count: t.count,
    };
    if let Err(status) = send(stream, &verdict, &mut t) {
        if t.status == SessionStatus::Completed {
            t.status = status;
        }
    }
    t
}

/// Where the verifier's key for each session comes from.
#[derive(Clone)]
pub enum KeySource {
    /// One key for every session.
    Fixed(Arc<NtcfTrapdoor>),
    /// A fresh key per session, drawn from the seed and session index.
    Fresh { params: Params, seed: u64 },
}

impl KeySource {
    fn trapdoor(&self, index: u64) -> Arc<NtcfTrapdoor> {
        match self {
            KeySource::Fixed(t) => Arc::clone(t),
            KeySource::Fresh { params, seed } => Arc::new(gen_f(params, &mut derive_rng(*seed, "session", index)).1),
        }
    }
}

#[derive(Clone)]
pub struct ServeOptions {
    pub keys: KeySource,
    pub hash: HashAlg,
    pub timeout: Duration,
    pub transcript_dir: Option<PathBuf>,
    /// Stop after this many sessions; `None` serves forever.
    pub max_sessions: Option<usize>,
}

fn verifier_connection(mut stream: TcpStream, opts: &ServeOptions, index: u64) -> SessionTranscript {
    let trapdoor = opts.keys.trapdoor(index);
    let mut t = match stream
        .set_read_timeout(Some(opts.timeout))
        .and_then(|_| stream.set_write_timeout(Some(opts.timeout)))
    {
        Ok(()) => run_verifier(&mut stream, &trapdoor, opts.hash, index),
        Err(e) => {
            let mut t = SessionTranscript::new(Role::Verifier, index, opts.hash);
            t.status = SessionStatus::Io(e.to_string());
            t
        }
    };
    let _ = stream.shutdown(std::net::Shutdown::Both);
    if let Some(dir) = &opts.transcript_dir {
        if let Err(e) = t.persist(dir, &format!("session-{index:06}")) {
            log::error!("session {index}: could not save transcript: {e}");
            if t.status == SessionStatus::Completed {
                t.status = SessionStatus::Io(e.to_string());
            }
        }
    }
    log::info!(
        "session {index}: {} accepted={} count={}",
        t.status.code(),
        t.accepted,
        t.count
    );
    t
}

/// Accepts connections and runs each session on its own thread. Returns
/// the transcripts in session order once `max_sessions` have finished.
pub fn serve(listener: TcpListener, opts: ServeOptions) -> io::Result<Vec<SessionTranscript>> {
    let opts = Arc::new(opts);
    let mut handles = Vec::new();
    for (index, conn) in listener.incoming().enumerate() {
        let stream = conn?;
        let shared = Arc::clone(&opts);
        handles.push(thread::spawn(move || verifier_connection(stream, &shared, index as u64)));
        if opts.max_sessions.is_some_and(|max| index + 1 >= max) {
            break;
        }
    }
    handles
        .into_iter()
        .map(|h| h.join().map_err(|_| io::Error::other("session thread panicked")))
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum RespondError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("expected {expected}, got {actual}")]
    Unexpected { expected: &'static str, actual: &'static str },
    #[error("the trapdoor does not belong to the received challenge")]
    KeyMismatch,
    #[error(transparent)]
    Prover(#[from] ProverError),
}

impl From<io::Error> for RespondError {
    fn from(e: io::Error) -> Self {
        RespondError::Frame(FrameError::Io(e))
    }
}

pub struct RespondOptions<'a> {
    pub strategy: Strategy,
    /// Needed only by strategies that emulate the quantum prover or cheat.
    pub trapdoor: Option<&'a NtcfTrapdoor>,
    pub hash: HashAlg,
    pub seed: u64,
}

/// Prover side of one session over any byte stream.
pub fn run_prover<S: Read + Write>(stream: &mut S, opts: &RespondOptions<'_>) -> Result<SessionTranscript, RespondError> {
    let mut t = SessionTranscript::new(Role::Prover, 0, opts.hash);
    let key = match receive(stream, &mut t) {
        Ok(Message::Challenge(key)) => key,
        Ok(other) => {
            return Err(RespondError::Unexpected {
                expected: "CHALLENGE",
                actual: other.name(),
            })
        }
        Err(status) => return Err(status_error(status)),
    };
    if let Some(td) = opts.trapdoor {
        if td.key() != &key {
            return Err(RespondError::KeyMismatch);
        }
    }
    if opts.strategy.needs_trapdoor() {
        log::warn!(
            "strategy {} reads the verifier's trapdoor: this emulates a quantum device and is not a classical attack",
            opts.strategy
        );
    }
    let mut oracle = Oracle::deterministic(opts.hash);
    let tuples = prove(
        opts.strategy,
        &key,
        &mut oracle,
        opts.trapdoor,
        &mut derive_rng(opts.seed, "prover", 0),
    )?;
    send(stream, &Message::Response(tuples), &mut t).map_err(status_error)?;
    match receive(stream, &mut t) {
        Ok(Message::Verdict { accepted, count }) => {
            t.accepted = accepted;
            t.count = count;
            Ok(t)
        }
        Ok(other) => Err(RespondError::Unexpected {
            expected: "VERDICT",
            actual: other.name(),
        }),
        Err(status) => Err(status_error(status)),
    }
}

fn status_error(status: SessionStatus) -> RespondError {
    let kind = match status {
        SessionStatus::Timeout => io::ErrorKind::TimedOut,
        SessionStatus::Parse(_) | SessionStatus::Protocol(_) => io::ErrorKind::InvalidData,
        _ => io::ErrorKind::Other,
    };
    let text = status.detail().unwrap_or(status.code()).to_string();
    io::Error::new(kind, text).into()
}

/// Connects to a verifier and runs one session.
pub fn respond<A: ToSocketAddrs>(
    addr: A,
    opts: &RespondOptions<'_>,
    timeout: Duration,
) -> Result<SessionTranscript, RespondError> {
    let mut stream = TcpStream::connect(addr)?;
    stream.set_read_timeout(Some(timeout))?;
    stream.set_write_timeout(Some(timeout))?;
    run_prover(&mut stream, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntcf::gen_f;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn config_parsing_and_overrides() {
        let mut c = Config::from_text("# comment\nn = 16\nlambda = 40\nseed = 5\nstrategy = half-claw\nhash = sha512\ntimeout_ms = 250\n").unwrap();
        assert_eq!(c.inputs.n, 16);
        assert_eq!(c.inputs.lambda, 40);
        assert_eq!(c.seed, 5);
        assert_eq!(c.strategy, Strategy::HalfClaw);
        assert_eq!(c.hash, HashAlg::Sha512);
        assert_eq!(c.timeout, Duration::from_millis(250));
        c.apply_seed_override(Some("99")).unwrap();
        assert_eq!(c.seed, 99);
        c.apply_seed_override(None).unwrap();
        assert_eq!(c.seed, 99);
        assert!(c.apply_seed_override(Some("-1")).is_err());
        assert!(Config::from_text("colour = blue").is_err());
        assert!(Config::from_text("n = many").is_err());
        assert_eq!(c.resolve_params().unwrap().n(), 16);
    }

    #[test]
    fn summary_lists_status() {
        let mut t = SessionTranscript::new(Role::Verifier, 3, HashAlg::Sha256);
        t.status = SessionStatus::Parse("truncated".into());
        let s = t.summary();
        assert!(s.contains("status = parse_error"));
        assert!(s.contains("error = truncated"));
        assert!(s.contains("hash = sha256"));
    }

    /// In-memory duplex: reads from a fixed buffer, records writes.
    struct Scripted {
        input: io::Cursor<Vec<u8>>,
        output: Vec<u8>,
    }

    impl Read for Scripted {
        fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
            self.input.read(buf)
        }
    }

    impl Write for Scripted {
        fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
            self.output.extend_from_slice(buf);
            Ok(buf.len())
        }
        fn flush(&mut self) -> io::Result<()> {
            Ok(())
        }
    }

    #[test]
    fn garbage_response_gets_rejecting_verdict() {
        let p = build_params(ParamInputs {
            n: 8,
            lambda: 4,
            ..Default::default()
        })
        .unwrap();
        let (_, t) = gen_f(&p, &mut ChaCha12Rng::seed_from_u64(1));
        let mut s = Scripted {
            input: io::Cursor::new(vec![0, 0, 0, 3, 2, 0, 0]),
            output: Vec::new(),
        };
        let tr = run_verifier(&mut s, &t, HashAlg::Sha256, 0);
        assert_eq!(tr.status.code(), "parse_error");
        assert!(!tr.accepted);
        let tail = &s.output[s.output.len() - 10..];
        assert_eq!(tail, &[0, 0, 0, 6, 3, 0, 0, 0, 0, 0]);
        assert_eq!(tr.bytes, s.output);
    }
}
