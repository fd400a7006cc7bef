use std::io::{Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use poq_core::protocol::make_challenge;
use poq_core::service::{respond, serve, KeySource, RespondOptions, ServeOptions, SessionTranscript};
use poq_core::wire::read_frame;
use poq_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

const WAIT: Duration = Duration::from_secs(30);

fn small() -> Params {
    build_params(ParamInputs {
        n: 16,
        lambda: 40,
        ..Default::default()
    })
    .unwrap()
}

fn trapdoor(seed: u64) -> Arc<NtcfTrapdoor> {
    Arc::new(make_challenge(&small(), &mut ChaCha12Rng::seed_from_u64(seed)).1)
}

fn start(keys: KeySource, sessions: usize, timeout: Duration) -> (SocketAddr, JoinHandle<Vec<SessionTranscript>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let opts = ServeOptions {
        keys,
        hash: HashAlg::Sha256,
        timeout,
        transcript_dir: None,
        max_sessions: Some(sessions),
    };
    (addr, thread::spawn(move || serve(listener, opts).unwrap()))
}

fn honest(td: &NtcfTrapdoor, seed: u64) -> RespondOptions<'_> {
    RespondOptions {
        strategy: Strategy::Honest,
        trapdoor: Some(td),
        hash: HashAlg::Sha256,
        seed,
    }
}

/// Reads the challenge, sends `frame` raw, closes the write half and
/// returns the verifier's reply.
fn send_raw(addr: SocketAddr, frame: &[u8]) -> Message {
    let mut s = TcpStream::connect(addr).unwrap();
    s.set_read_timeout(Some(WAIT)).unwrap();
    read_frame(&mut s).unwrap();
    s.write_all(frame).unwrap();
    s.shutdown(Shutdown::Write).unwrap();
    decode_message(&read_frame(&mut s).unwrap()).unwrap()
}

fn valid_response(td: &NtcfTrapdoor) -> Vec<u8> {
    let mut oracle = Oracle::deterministic(HashAlg::Sha256);
    let tuples = prove(
        Strategy::Honest,
        td.key(),
        &mut oracle,
        Some(td),
        &mut ChaCha12Rng::seed_from_u64(9),
    )
    .unwrap();
    encode_message(&Message::Response(tuples))
}

#[test]
fn honest_session_accepts() {
    let td = trapdoor(1);
    let (addr, server) = start(KeySource::Fixed(Arc::clone(&td)), 1, WAIT);
    let client = respond(addr, &honest(&td, 1), WAIT).unwrap();
    let verifier = server.join().unwrap().remove(0);
    assert!(client.accepted && verifier.accepted);
    assert_eq!(verifier.status.code(), "ok");
    assert!(4 * verifier.count > 3 * 40);
    assert_eq!(client.bytes, verifier.bytes);
}

#[test]
fn truncated_response_gets_failing_verdict() {
    let td = trapdoor(2);
    let (addr, server) = start(KeySource::Fixed(Arc::clone(&td)), 2, WAIT);
    let full = valid_response(&td);

    // Consistent length prefix over a body that stops early.
    let mut short = full[..full.len() / 2].to_vec();
    let body_len = (short.len() - 4) as u32;
    short[..4].copy_from_slice(&body_len.to_be_bytes());
    let verdict = send_raw(addr, &short);
    assert_eq!(verdict, Message::Verdict { accepted: false, count: 0 });

    // Stream closed before the announced length arrives.
    let verdict = send_raw(addr, &full[..full.len() - 1]);
    assert_eq!(verdict, Message::Verdict { accepted: false, count: 0 });

    for t in server.join().unwrap() {
        assert_eq!(t.status.code(), "parse_error");
        assert!(t.summary().contains("status = parse_error"));
        assert!(t.summary().contains("accepted = 0"));
    }
}

#[test]
fn concurrent_servers_use_their_own_keys() {
    let (a, b) = (trapdoor(3), trapdoor(4));
    assert_ne!(a.key(), b.key());
    let (addr_a, server_a) = start(KeySource::Fixed(Arc::clone(&a)), 1, WAIT);
    let (addr_b, server_b) = start(KeySource::Fixed(Arc::clone(&b)), 1, WAIT);
    let (ca, cb) = thread::scope(|s| {
        let ha = s.spawn(|| respond(addr_a, &honest(&a, 3), WAIT).unwrap());
        let hb = s.spawn(|| respond(addr_b, &honest(&b, 4), WAIT).unwrap());
        (ha.join().unwrap(), hb.join().unwrap())
    });
    assert!(ca.accepted && cb.accepted);
    let (ta, tb) = (server_a.join().unwrap().remove(0), server_b.join().unwrap().remove(0));
    assert!(ta.bytes.starts_with(&encode_message(&Message::Challenge(a.key().clone()))));
    assert!(tb.bytes.starts_with(&encode_message(&Message::Challenge(b.key().clone()))));

    // A prover holding the wrong trapdoor refuses the session.
    let (addr, server) = start(KeySource::Fixed(Arc::clone(&a)), 1, WAIT);
    assert!(respond(addr, &honest(&b, 5), WAIT).is_err());
    server.join().unwrap();
}

#[test]
fn replay_is_byte_identical() {
    let td = trapdoor(6);
    let run = || {
        let (addr, server) = start(KeySource::Fixed(Arc::clone(&td)), 1, WAIT);
        let client = respond(addr, &honest(&td, 6), WAIT).unwrap();
        (client, server.join().unwrap().remove(0))
    };
    let (c1, s1) = run();
    let (c2, s2) = run();
    assert_eq!(c1.bytes, c2.bytes);
    assert_eq!(s1.bytes, s2.bytes);
    assert_eq!(s1.bytes, c1.bytes);
}

#[test]
fn fresh_keys_differ_per_session_and_replay() {
    let keys = || KeySource::Fresh { params: small(), seed: 8 };
    let challenges = |keys: KeySource| {
        let (addr, server) = start(keys, 2, WAIT);
        let mut out = Vec::new();
        for _ in 0..2 {
            let mut s = TcpStream::connect(addr).unwrap();
            s.set_read_timeout(Some(WAIT)).unwrap();
            out.push(read_frame(&mut s).unwrap());
        }
        server.join().unwrap();
        out
    };
    let first = challenges(keys());
    assert_ne!(first[0], first[1]);
    assert_eq!(challenges(keys()), first);
}

#[test]
fn silent_prover_times_out() {
    let td = trapdoor(7);
    let (addr, server) = start(KeySource::Fixed(td), 1, Duration::from_millis(200));
    let mut s = TcpStream::connect(addr).unwrap();
    s.set_read_timeout(Some(WAIT)).unwrap();
    read_frame(&mut s).unwrap();
    let reply = decode_message(&read_frame(&mut s).unwrap()).unwrap();
    assert_eq!(reply, Message::Verdict { accepted: false, count: 0 });
    let t = server.join().unwrap().remove(0);
    assert_eq!(t.status.code(), "timeout");
    let mut rest = Vec::new();
    assert_eq!(s.read_to_end(&mut rest).unwrap_or(0), 0);
}
