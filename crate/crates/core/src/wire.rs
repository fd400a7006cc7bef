//! Framed messages: 4-byte big-endian length (type byte plus body), 1-byte
//! type, body.
//!
//! * `0x01` challenge: the key file bytes.
//! * `0x02` response: tuple count, `n`, `m` (each `u32` LE), `log2 q` (`u8`),
//!   then per tuple the image, a 0/1 byte for `m` and the packed mask.
//! * `0x03` verdict: a 0/1 accept byte and the count as `u32` LE.

use std::io::{self, Read, Write};

use crate::bits::BitString;
use crate::codec::{ByteReader, ParseError, ParseErrorKind};
use crate::ntcf::NtcfKey;
use crate::protocol::ProverTuple;
use crate::ring::Ring;

pub const TYPE_CHALLENGE: u8 = 0x01;
pub const TYPE_RESPONSE: u8 = 0x02;
pub const TYPE_VERDICT: u8 = 0x03;

/// Largest accepted frame length.
pub const MAX_FRAME: u32 = 64 << 20;

// One message exists per protocol step, so its size does not matter.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Message {
    Challenge(NtcfKey),
    Response(Vec<ProverTuple>),
    Verdict { accepted: bool, count: u32 },
}

impl Message {
    pub fn type_byte(&self) -> u8 {
        match self {
            Message::Challenge(_) => TYPE_CHALLENGE,
            Message::Response(_) => TYPE_RESPONSE,
            Message::Verdict { .. } => TYPE_VERDICT,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Message::Challenge(_) => "CHALLENGE",
            Message::Response(_) => "RESPONSE",
            Message::Verdict { .. } => "VERDICT",
        }
    }
}

fn encode_response(tuples: &[ProverTuple], out: &mut Vec<u8>) {
    let (n, m, k) = tuples
        .first()
        .map(|t| (t.y.ring().n(), t.y.len(), t.y.ring().log_q()))
        .unwrap_or((0, 0, 0));
    out.extend_from_slice(&(tuples.len() as u32).to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(m as u32).to_le_bytes());
    out.push(k as u8);
    for t in tuples {
        t.y.write_bytes(out);
        out.push(t.m as u8);
        t.d.write_bytes(out);
    }
}

fn decode_response(r: &mut ByteReader<'_>) -> Result<Vec<ProverTuple>, ParseError> {
    let count = r.u32_le()? as usize;
    let at = r.offset();
    let n = r.u32_le()? as usize;
    let m = r.u32_le()? as usize;
    let k = r.u8()?;
    if count == 0 {
        if n != 0 || m != 0 || k != 0 {
            return Err(ParseError::invalid(at, "empty response with nonzero shape"));
        }
        return Ok(Vec::new());
    }
    let ring = Ring::new(n, k as u32).map_err(|_| ParseError::invalid(at, "invalid ring shape"))?;
    if m == 0 {
        return Err(ParseError::invalid(at + 4, "zero-length image"));
    }
    let per_tuple = (m as u128) * ring.encoded_len() as u128 + 1 + ring.bit_len().div_ceil(8) as u128;
    let total = per_tuple * count as u128;
    if total > r.remaining() as u128 {
        return Err(ParseError::new(
            r.offset(),
            ParseErrorKind::Truncated {
                needed: usize::try_from(total - r.remaining() as u128).unwrap_or(usize::MAX),
            },
        ));
    }
    let mut tuples = Vec::with_capacity(count);
    for _ in 0..count {
        let y = ring.decode_vector(m, r)?;
        let mbit = r.bit()?;
        let d = BitString::decode(ring.bit_len(), r)?;
        tuples.push(ProverTuple { y, m: mbit, d });
    }
    Ok(tuples)
}

/// Serializes a complete frame.
pub fn encode_message(msg: &Message) -> Vec<u8> {
    let mut body = vec![msg.type_byte()];
    match msg {
        Message::Challenge(key) => key.write_bytes(&mut body),
        Message::Response(tuples) => encode_response(tuples, &mut body),
        Message::Verdict { accepted, count } => {
            body.push(*accepted as u8);
            body.extend_from_slice(&count.to_le_bytes());
        }
    }
    let mut out = Vec::with_capacity(4 + body.len());
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(&body);
    out
}

/// Parses exactly one frame occupying the whole input.
pub fn decode_message(bytes: &[u8]) -> Result<Message, ParseError> {
    let mut r = ByteReader::new(bytes);
    let len = r.u32_be()?;
    if len > MAX_FRAME {
        return Err(ParseError::new(0, ParseErrorKind::LengthOverflow(len as u64)));
    }
    if len == 0 {
        return Err(ParseError::invalid(0, "empty frame"));
    }
    let frame = r.take(len as usize)?;
    r.finish()?;
    let mut r = ByteReader::new(frame);
    let base = 4;
    let ty = r.u8().map_err(|e| e.at_base(base))?;
    let msg = match ty {
        TYPE_CHALLENGE => Message::Challenge(NtcfKey::decode(&mut r).map_err(|e| e.at_base(base))?),
        TYPE_RESPONSE => Message::Response(decode_response(&mut r).map_err(|e| e.at_base(base))?),
        TYPE_VERDICT => {
            let accepted = r.bit().map_err(|e| e.at_base(base))?;
            let count = r.u32_le().map_err(|e| e.at_base(base))?;
            Message::Verdict { accepted, count }
        }
        other => return Err(ParseError::new(base, ParseErrorKind::UnknownType(other))),
    };
    r.finish().map_err(|e| e.at_base(base))?;
    Ok(msg)
}

#[derive(Debug, thiserror::Error)]
pub enum FrameError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Reads one raw frame (length prefix included) from a stream.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Vec<u8>, FrameError> {
    let mut header = [0u8; 4];
    r.read_exact(&mut header)?;
    let len = u32::from_be_bytes(header);
    if len > MAX_FRAME {
        return Err(ParseError::new(0, ParseErrorKind::LengthOverflow(len as u64)).into());
    }
    let mut frame = header.to_vec();
    let got = r.take(len as u64).read_to_end(&mut frame)?;
    if got < len as usize {
        return Err(ParseError::new(
            4 + got,
            ParseErrorKind::Truncated {
                needed: len as usize - got,
            },
        )
        .into());
    }
    Ok(frame)
}

pub fn write_message<W: Write>(w: &mut W, msg: &Message) -> io::Result<Vec<u8>> {
    let bytes = encode_message(msg);
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(bytes)
}
