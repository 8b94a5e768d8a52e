//! Bit sequences as `Vec<u8>` of 0/1 values, with ASCII and serde helpers.

use crate::{Error, Result};

/// Parse an ASCII `'0'`/`'1'` string. Whitespace is skipped so that
/// line-wrapped files can be read directly.
pub fn parse_ascii(text: &str) -> Result<Vec<u8>> {
    let mut bits = Vec::with_capacity(text.len());
    for (offset, ch) in text.char_indices() {
        match ch {
            '0' => bits.push(0),
            '1' => bits.push(1),
            c if c.is_whitespace() => {}
            _ => return Err(Error::MalformedBits(offset)),
        }
    }
    Ok(bits)
}

pub fn to_ascii(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

/// Big-endian 8-bit expansion of each byte.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|&b| (0..8).rev().map(move |k| (b >> k) & 1)).collect()
}

/// Pack bits MSB-first; a trailing partial byte is zero-padded on the right.
pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8).map(|chunk| chunk.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | ((b & 1) << (7 - k)))).collect()
}

/// Lowercase hex of the MSB-first packing of `bits`.
pub fn to_hex(bits: &[u8]) -> String {
    bits_to_bytes(bits).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn ones_fraction(bits: &[u8]) -> f64 {
    if bits.is_empty() {
        return 0.0;
    }
    bits.iter().filter(|&&b| b != 0).count() as f64 / bits.len() as f64
}

/// Serde adapter storing a bit vector as a `'0'`/`'1'` string.
pub mod serde_ascii {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::to_ascii(bits))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        if text.chars().any(char::is_whitespace) {
            return Err(D::Error::custom("bit string must not contain whitespace"));
        }
        super::parse_ascii(&text).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_zero_is_eight_zero_bits() {
        assert_eq!(to_ascii(&bytes_to_bits(&[0])), "00000000");
        assert_eq!(to_ascii(&bytes_to_bits(&[0x80, 0x01])), "1000000000000001");
    }

    #[test]
    fn hex_of_packed_bits() {
        let bits = parse_ascii("1111000000001010").unwrap();
        assert_eq!(to_hex(&bits), "f00a");
    }

    #[test]
    fn rejects_foreign_characters() {
        assert!(matches!(parse_ascii("0102"), Err(Error::MalformedBits(3))));
        assert_eq!(parse_ascii("01\n10").unwrap(), vec![0, 1, 1, 0]);
    }
}
