//! Byte-level decoding helpers shared by the key files and the wire format.

use thiserror::Error;

/// A decoding failure, located at a byte offset of the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("truncated input (needed {needed} more bytes)")]
    Truncated { needed: usize },
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    Version(u8),
    #[error("unknown message type {0:#04x}")]
    UnknownType(u8),
    #[error("length {0} exceeds limit")]
    LengthOverflow(u64),
    #[error("{0} trailing bytes")]
    Trailing(usize),
    #[error("{0}")]
    Invalid(&'static str),
}

impl ParseError {
    pub fn new(offset: usize, kind: ParseErrorKind) -> Self {
        Self { offset, kind }
    }

    pub fn invalid(offset: usize, what: &'static str) -> Self {
        Self::new(offset, ParseErrorKind::Invalid(what))
    }

    /// Shifts the offset, for errors raised while decoding a sub-slice.
    pub fn at_base(mut self, base: usize) -> Self {
        self.offset += base;
        self
    }
}

/// Cursor over a byte slice that reports offsets on failure.
pub struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn offset(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn is_empty(&self) -> bool {
        self.remaining() == 0
    }

    pub fn take(&mut self, len: usize) -> Result<&'a [u8], ParseError> {
        if self.remaining() < len {
            return Err(ParseError::new(
                self.pos,
                ParseErrorKind::Truncated {
                    needed: len - self.remaining(),
                },
            ));
        }
        let out = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8, ParseError> {
        Ok(self.take(1)?[0])
    }

    pub fn u16_le(&mut self) -> Result<u16, ParseError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32_le(&mut self) -> Result<u32, ParseError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u32_be(&mut self) -> Result<u32, ParseError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64_le(&mut self) -> Result<u64, ParseError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A single byte that must be 0 or 1.
    pub fn bit(&mut self) -> Result<bool, ParseError> {
        let at = self.pos;
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(ParseError::invalid(at, "expected a 0/1 byte")),
        }
    }

    pub fn finish(&self) -> Result<(), ParseError> {
        if self.remaining() != 0 {
            return Err(ParseError::new(self.pos, ParseErrorKind::Trailing(self.remaining())));
        }
        Ok(())
    }
}
