use serde::{Deserialize, Serialize};
use std::fmt;

/// Packed bit sequence, most-significant bit first within each byte.
///
/// Unused trailing bits of the last byte are always zero.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitStream {
    bytes: Vec<u8>,
    len: usize,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    /// Wrap packed bytes holding `len` bits. Padding bits are cleared.
    pub fn from_packed(mut bytes: Vec<u8>, len: usize) -> Option<Self> {
        if bytes.len() != len.div_ceil(8) {
            return None;
        }
        let tail = len % 8;
        if tail != 0 {
            if let Some(last) = bytes.last_mut() {
                *last &= 0xffu8 << (8 - tail);
            }
        }
        Some(Self { bytes, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn push(&mut self, bit: bool) {
        let offset = self.len % 8;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().expect("byte just ensured") |= 0x80 >> offset;
        }
        self.len += 1;
    }

    pub fn get(&self, index: usize) -> Option<bool> {
        (index < self.len).then(|| self.bytes[index / 8] & (0x80 >> (index % 8)) != 0)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bytes[i / 8] & (0x80 >> (i % 8)) != 0)
    }

    pub fn ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn zeros(&self) -> usize {
        self.len - self.ones()
    }

    /// Bits as `0`/`1` bytes, the layout the test routines consume.
    pub fn to_bit_vec(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    pub fn complement(&self) -> BitStream {
        BitStream::from_packed(self.bytes.iter().map(|b| !b).collect(), self.len)
            .expect("same length")
    }

    pub fn reversed(&self) -> BitStream {
        let mut out = BitStream::with_capacity(self.len);
        for i in (0..self.len).rev() {
            out.push(self.get(i).expect("in range"));
        }
        out
    }

    pub fn to_ascii_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }
}

impl FromIterator<bool> for BitStream {
    fn from_iter<T: IntoIterator<Item = bool>>(iter: T) -> Self {
        let mut s = BitStream::new();
        for b in iter {
            s.push(b);
        }
        s
    }
}

impl Extend<bool> for BitStream {
    fn extend<T: IntoIterator<Item = bool>>(&mut self, iter: T) {
        for b in iter {
            self.push(b);
        }
    }
}

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            write!(f, "BitStream({:?})", self.to_ascii_string())
        } else {
            write!(f, "BitStream(len={}, ones={})", self.len, self.ones())
        }
    }
}

impl std::str::FromStr for BitStream {
    type Err = char;

    /// Parses `0`/`1` characters; anything else is returned as the error.
    fn from_str(s: &str) -> Result<Self, char> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(other),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_and_counts() {
        let s: BitStream = "1011000001".parse().unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(s.ones(), 4);
        assert_eq!(s.zeros(), 6);
        assert_eq!(s.as_bytes(), &[0b1011_0000, 0b0100_0000]);
        assert_eq!(s.get(9), Some(true));
        assert_eq!(s.get(10), None);
    }

    #[test]
    fn complement_keeps_padding_clear() {
        let s: BitStream = "101".parse().unwrap();
        let c = s.complement();
        assert_eq!(c.to_ascii_string(), "010");
        assert_eq!(c.as_bytes(), &[0b0100_0000]);
    }

    #[test]
    fn from_packed_checks_length() {
        assert!(BitStream::from_packed(vec![0xff], 9).is_none());
        let s = BitStream::from_packed(vec![0xff], 3).unwrap();
        assert_eq!(s.as_bytes(), &[0b1110_0000]);
    }

    #[test]
    fn rejects_other_chars() {
        assert_eq!("0120".parse::<BitStream>(), Err('2'));
    }
}
