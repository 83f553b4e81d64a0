//! Finite bit strings: machine outputs, programs, and targets.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A finite bit string. Ordering is lexicographic (shorter strings win
/// ties on a shared prefix), which keeps report maps deterministic.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// `count` repetitions of `bit`.
    pub fn repeated(bit: bool, count: usize) -> Self {
        Self(vec![bit; count])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    /// True when `self` is a proper prefix of `other`.
    pub fn is_proper_prefix_of(&self, other: &Self) -> bool {
        self.len() < other.len() && other.0[..self.len()] == self.0[..]
    }

    /// Hex rendering: bits packed into bytes first-bit-highest, the last
    /// byte zero-padded on the right. The empty string renders as `""`
    /// (length disambiguates).
    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.0.len().div_ceil(8) * 2);
        for chunk in self.0.chunks(8) {
            let mut byte = 0u8;
            for (i, &bit) in chunk.iter().enumerate() {
                if bit {
                    byte |= 1 << (7 - i);
                }
            }
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    /// Inverse of [`Self::to_hex`] given the original bit count.
    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        if hex.len() != len.div_ceil(8) * 2 {
            return Err(Error::Parse {
                line: 0,
                message: format!("hex `{hex}` does not encode {len} bits"),
            });
        }
        let mut bits = Vec::with_capacity(len);
        for (i, pair) in hex.as_bytes().chunks(2).enumerate() {
            let text = std::str::from_utf8(pair).map_err(|_| Error::Parse {
                line: 0,
                message: format!("invalid hex `{hex}`"),
            })?;
            let byte = u8::from_str_radix(text, 16).map_err(|_| Error::Parse {
                line: 0,
                message: format!("invalid hex `{hex}`"),
            })?;
            for j in 0..8 {
                if i * 8 + j < len {
                    bits.push(byte >> (7 - j) & 1 == 1);
                }
            }
        }
        Ok(Self(bits))
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &bit in &self.0 {
            write!(f, "{}", if bit { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = Error;

    /// Parses `0`/`1` text; whitespace is allowed and ignored, so program
    /// listings can group opcodes for readability.
    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::new();
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                c if c.is_whitespace() => {}
                other => {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("invalid bit character `{other}`"),
                    })
                }
            }
        }
        Ok(Self(bits))
    }
}

impl FromIterator<bool> for Bits {
    fn from_iter<T: IntoIterator<Item = bool>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}
