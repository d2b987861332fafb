//! On-disk bit file layouts.
//!
//! * ASCII: one `0`/`1` character per bit. Writers append a single trailing
//!   newline; readers ignore `\n` and `\r` anywhere.
//! * Packed: an 8-byte little-endian bit count followed by `ceil(N/8)` bytes,
//!   most-significant bit first within each byte, zero padded.

use super::BitStream;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("unexpected byte {byte:#04x} at offset {offset} in ASCII bit file")]
    InvalidAscii { offset: usize, byte: u8 },
    #[error("packed bit file too short for its header")]
    MissingHeader,
    #[error("packed bit file declares {declared} bits but carries {payload} payload bytes")]
    LengthMismatch { declared: u64, payload: usize },
    #[error("unknown bit format {0:?} (expected ascii or packed)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BitFormat {
    Ascii,
    Packed,
}

impl fmt::Display for BitFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BitFormat::Ascii => "ascii",
            BitFormat::Packed => "packed",
        })
    }
}

impl FromStr for BitFormat {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, FormatError> {
        match s {
            "ascii" => Ok(BitFormat::Ascii),
            "packed" => Ok(BitFormat::Packed),
            other => Err(FormatError::UnknownFormat(other.to_string())),
        }
    }
}

pub fn encode_ascii(bits: &BitStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(bits.len() + 1);
    out.extend(bits.iter().map(|b| if b { b'1' } else { b'0' }));
    out.push(b'\n');
    out
}

pub fn decode_ascii(data: &[u8]) -> Result<BitStream, FormatError> {
    let mut bits = BitStream::with_capacity(data.len());
    for (offset, &byte) in data.iter().enumerate() {
        match byte {
            b'0' => bits.push(false),
            b'1' => bits.push(true),
            b'\n' | b'\r' => {}
            _ => return Err(FormatError::InvalidAscii { offset, byte }),
        }
    }
    Ok(bits)
}

pub fn encode_packed(bits: &BitStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + bits.as_bytes().len());
    out.extend_from_slice(&(bits.len() as u64).to_le_bytes());
    out.extend_from_slice(bits.as_bytes());
    out
}

pub fn decode_packed(data: &[u8]) -> Result<BitStream, FormatError> {
    let header: [u8; 8] = data
        .get(..8)
        .ok_or(FormatError::MissingHeader)?
        .try_into()
        .expect("slice of 8");
    let declared = u64::from_le_bytes(header);
    let payload = &data[8..];
    let mismatch = FormatError::LengthMismatch {
        declared,
        payload: payload.len(),
    };
    let len = usize::try_from(declared).map_err(|_| mismatch.clone())?;
    if payload.len() != len.div_ceil(8) {
        return Err(mismatch);
    }
    BitStream::from_packed(payload.to_vec(), len).ok_or(mismatch)
}

pub fn encode(bits: &BitStream, format: BitFormat) -> Vec<u8> {
    match format {
        BitFormat::Ascii => encode_ascii(bits),
        BitFormat::Packed => encode_packed(bits),
    }
}

pub fn decode(data: &[u8], format: BitFormat) -> Result<BitStream, FormatError> {
    match format {
        BitFormat::Ascii => decode_ascii(data),
        BitFormat::Packed => decode_packed(data),
    }
}

/// Packed when the header is consistent with the payload size, else ASCII.
///
/// An ASCII file cannot pass the packed check: its first 8 bytes decode to
/// a count of at least `0x0a0a0a0a0a0a0a0a` bits.
pub fn decode_auto(data: &[u8]) -> Result<(BitStream, BitFormat), FormatError> {
    match decode_packed(data) {
        Ok(bits) => Ok((bits, BitFormat::Packed)),
        Err(_) => decode_ascii(data).map(|b| (b, BitFormat::Ascii)),
    }
}
