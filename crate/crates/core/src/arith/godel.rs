use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use super::print::{print_arith, ArithFormat};
use super::{ArithError, ArithFormula};

/// A finite string over {0,1}, most significant bit first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitString(pub Vec<bool>);

impl BitString {
    /// Big-endian, eight bits per byte.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        BitString(
            bytes
                .iter()
                .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
                .collect(),
        )
    }

    /// Inverse of [`BitString::from_bytes`] when the length is a multiple of 8.
    pub fn to_bytes(&self) -> Option<Vec<u8>> {
        if self.0.len() % 8 != 0 {
            return None;
        }
        Some(
            self.0
                .chunks(8)
                .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ArithError::BadBits(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<_, _>>()
            .map(BitString)
    }
}

/// Reads `1 s` as a binary numeral.
pub fn godel_encode(s: &BitString) -> BigUint {
    let mut n = BigUint::from(1u32);
    n <<= s.len();
    for (i, &b) in s.0.iter().rev().enumerate() {
        if b {
            n.set_bit(i as u64, true);
        }
    }
    n
}

/// Drops the leading 1 of the binary notation.
pub fn godel_decode(n: &BigUint) -> Result<BitString, ArithError> {
    let bits = n.bits();
    if bits == 0 {
        return Err(ArithError::NotPositive);
    }
    Ok(BitString((0..bits - 1).rev().map(|i| n.bit(i)).collect()))
}

/// The Gödel number of a formula: its canonical ascii printing as bytes.
pub fn godel_number(phi: &ArithFormula) -> BigUint {
    godel_encode(&BitString::from_bytes(
        print_arith(phi, ArithFormat::Ascii).as_bytes(),
    ))
}
