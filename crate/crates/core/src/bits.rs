//! Bit strings with hex/binary text forms and symbol packing.
//!
//! Packing is MSB-first: an m-bit symbol occupies m consecutive bits with its
//! most significant bit first, symbols in index order.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<bool> {
        self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    /// Bits `[start, end)` as a new string.
    pub fn slice(&self, start: usize, end: usize) -> Bits {
        Bits(self.0[start..end].to_vec())
    }

    /// Parses hex digits (MSB first). Each digit contributes four bits.
    pub fn from_hex(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix("0x").unwrap_or(s);
        let mut out = Vec::with_capacity(s.len() * 4);
        for ch in s.chars() {
            let Some(d) = ch.to_digit(16) else {
                return invalid(format!("'{ch}' is not a hex digit"));
            };
            out.extend((0..4).rev().map(|b| (d >> b) & 1 == 1));
        }
        Ok(Self(out))
    }

    /// Parses a string of '0'/'1' characters; '_' separators are ignored.
    pub fn from_binary(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix("0b").unwrap_or(s);
        s.chars()
            .filter(|&c| c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => invalid(format!("'{other}' is not a binary digit")),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    /// Accepts `0b…`/all-binary strings as binary and everything else as hex.
    /// A string made only of 0/1 is read as binary when its length is not a
    /// plausible hex length for the expected bit count.
    pub fn parse(s: &str, expected_len: Option<usize>) -> Result<Self> {
        let t = s.trim();
        if t.starts_with("0b") {
            return Self::from_binary(t);
        }
        if t.starts_with("0x") {
            return Self::from_hex(t);
        }
        let binary_like = !t.is_empty() && t.chars().all(|c| c == '0' || c == '1' || c == '_');
        match expected_len {
            Some(n) if binary_like && t.chars().filter(|&c| c != '_').count() == n => {
                Self::from_binary(t)
            }
            _ => Self::from_hex(t),
        }
    }

    /// Lowercase hex, MSB first; a trailing partial nibble is zero-padded.
    pub fn to_hex(&self) -> String {
        self.0
            .chunks(4)
            .map(|c| {
                let v = c
                    .iter()
                    .chain(std::iter::repeat(&false))
                    .take(4)
                    .fold(0u32, |acc, &b| (acc << 1) | b as u32);
                char::from_digit(v, 16).expect("nibble")
            })
            .collect()
    }

    pub fn to_binary(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Packs into `width`-bit unsigned symbols; length must be a multiple of `width`.
    pub fn to_symbols(&self, width: u32) -> Result<Vec<u16>> {
        let w = width as usize;
        if w == 0 || !self.0.len().is_multiple_of(w) {
            return invalid(format!(
                "{} bits do not split into {width}-bit symbols",
                self.0.len()
            ));
        }
        Ok(self
            .0
            .chunks(w)
            .map(|c| c.iter().fold(0u16, |acc, &b| (acc << 1) | b as u16))
            .collect())
    }

    pub fn from_symbols(symbols: &[u16], width: u32) -> Self {
        let mut out = Vec::with_capacity(symbols.len() * width as usize);
        for &s in symbols {
            out.extend((0..width).rev().map(|b| (s >> b) & 1 == 1));
        }
        Self(out)
    }

    /// Number of positions where `self` and `other` differ.
    pub fn hamming(&self, other: &Bits) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl From<Vec<bool>> for Bits {
    fn from(v: Vec<bool>) -> Self {
        Self(v)
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({}:{})", self.0.len(), self.to_hex())
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Serialized as `"<len>:<hex>"` so lengths that are not multiples of four
/// survive a round trip.
impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.len().is_multiple_of(4) {
            s.serialize_str(&self.to_hex())
        } else {
            s.serialize_str(&format!("{}:{}", self.0.len(), self.to_hex()))
        }
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let (len, hex) = match s.split_once(':') {
            Some((l, h)) => (Some(l.parse::<usize>().map_err(serde::de::Error::custom)?), h),
            None => (None, s.as_str()),
        };
        let mut bits = Bits::from_hex(hex).map_err(serde::de::Error::custom)?;
        if let Some(l) = len {
            if l > bits.0.len() {
                return Err(serde::de::Error::custom("bit length exceeds hex digits"));
            }
            bits.0.truncate(l);
        }
        Ok(bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_is_msb_first() {
        let b = Bits::from_hex("a5").unwrap();
        assert_eq!(b.to_binary(), "10100101");
        assert_eq!(b.to_hex(), "a5");
        assert!(Bits::from_hex("xz").is_err());
    }

    #[test]
    fn symbol_packing() {
        let b = Bits::from_binary("1010_0101_1111").unwrap();
        assert_eq!(b.to_symbols(4).unwrap(), vec![0xa, 0x5, 0xf]);
        assert!(b.to_symbols(8).is_err());
        assert_eq!(Bits::from_symbols(&[0xa, 0x5, 0xf], 4), b);
    }

    #[test]
    fn parse_prefers_binary_when_length_matches() {
        let b = Bits::parse("0101", Some(4)).unwrap();
        assert_eq!(b.to_binary(), "0101");
        let h = Bits::parse("0101", Some(16)).unwrap();
        assert_eq!(h.len(), 16);
    }

    #[test]
    fn serde_keeps_odd_lengths() {
        let b = Bits::from_binary("101").unwrap();
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(s, "\"3:a\"");
        let back: Bits = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
    }
}
