use std::fmt;

use crate::{Error, Result};

/// A finite word over {0, 1}: the slope code of a piecewise-linear path.
///
/// Bits are packed LSB-first into bytes (bit `j` lives at
/// `bytes[j / 8] >> (j % 8)`); the packed form is also what the compression
/// proxy consumes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryCode {
    bytes: Vec<u8>,
    len: usize,
}

impl BinaryCode {
    /// Builds a code from explicit bits. Empty input is rejected.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Result<Self> {
        let mut bytes = Vec::new();
        let mut len = 0usize;
        for bit in bits {
            if len.is_multiple_of(8) {
                bytes.push(0);
            }
            if bit {
                bytes[len / 8] |= 1 << (len % 8);
            }
            len += 1;
        }
        if len == 0 {
            return Err(Error::InvalidCode("empty code".into()));
        }
        Ok(Self { bytes, len })
    }

    /// Wraps pre-packed bytes; bits past `len` must be zero.
    pub(crate) fn from_packed(bytes: Vec<u8>, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidCode("empty code".into()));
        }
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::InvalidCode(format!(
                "packed length {} does not match bit count {len}",
                bytes.len()
            )));
        }
        Ok(Self { bytes, len })
    }

    /// Parses a string of '0'/'1' characters.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(Error::InvalidCode(format!("unexpected character {other:?}")))
                }
            }
        }
        Self::from_bits(bits)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit `j` (0-based).
    pub fn bit(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        (self.bytes[j / 8] >> (j % 8)) & 1 == 1
    }

    /// LSB-first packed bytes (trailing bits zero).
    pub fn packed_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |j| self.bit(j))
    }
}

impl fmt::Display for BinaryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}
