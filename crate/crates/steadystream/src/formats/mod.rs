//! Byte-exact readers and writers for trajectories (TUM), grayscale frames
//! (PGM), depth maps (PFM) and point clouds (ASCII PLY).

pub mod pfm;
pub mod pgm;
pub mod ply;
pub mod tum;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    /// `line` is 1-based; for binary payloads it is the first line after the header.
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unsupported magic {0:?}")]
    UnsupportedMagic(String),
    #[error("missing property {0:?}")]
    MissingProperty(&'static str),
    #[error("line {line}: timestamps must be strictly increasing")]
    NonMonotonicTimestamps { line: usize },
    #[error(transparent)]
    Core(#[from] steadystream_core::Error),
}

pub type Result<T> = std::result::Result<T, FormatError>;

pub(crate) fn parse_err(line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::Parse { line, reason: reason.into() }
}

/// Shortest decimal that parses back to the same bits; exponent form outside
/// a readable range. Never more than 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub(crate) fn parse_real(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| parse_err(line, format!("not a number: {tok:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

/// Whitespace-separated header tokens of a netpbm-style file, with `#`
/// comments running to end of line. Tracks the byte offset and line.
pub(crate) struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pub pos: usize,
    pub line: usize,
}

impl<'a> HeaderCursor<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0, line: 1 }
    }

    fn skip_space(&mut self, comments: bool) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' && comments {
                while let Some(&c) = self.bytes.get(self.pos) {
                    if c == b'\n' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                if b == b'\n' {
                    self.line += 1;
                }
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// Next token, or `None` at end of input.
    pub fn token(&mut self, comments: bool) -> Option<&'a str> {
        self.skip_space(comments);
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || (comments && b == b'#') {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).ok()
    }

    pub fn expect_token(&mut self, what: &str) -> Result<&'a str> {
        let line = self.line;
        self.token(true).ok_or_else(|| parse_err(line, format!("missing {what}")))
    }

    pub fn expect_usize(&mut self, what: &str, max: usize) -> Result<usize> {
        let line = self.line;
        let tok = self.expect_token(what)?;
        match tok.parse::<usize>() {
            Ok(v) if (1..=max).contains(&v) => Ok(v),
            _ => Err(parse_err(line, format!("bad {what} {tok:?}"))),
        }
    }

    /// Consumes the single whitespace byte that ends a binary header.
    pub fn end_header(&mut self) -> Result<()> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                if *b == b'\n' {
                    self.line += 1;
                }
                self.pos += 1;
                Ok(())
            }
            _ => Err(parse_err(self.line, "header must end with one whitespace byte")),
        }
    }

    /// Errors if anything other than whitespace (and comments, if allowed) remains.
    pub fn expect_end(&mut self, comments: bool) -> Result<()> {
        self.skip_space(comments);
        if self.pos < self.bytes.len() {
            return Err(parse_err(self.line, "trailing data after payload"));
        }
        Ok(())
    }

    pub fn rest(&self) -> &'a [u8] {
        &self.bytes[self.pos..]
    }
}
