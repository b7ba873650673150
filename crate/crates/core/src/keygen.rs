//! Key derivation from raw entropy.
//!
//! Random bits are cut into fixed-width chunks; each chunk whose value is a
//! non-zero digit of the chosen counting system becomes the next key digit,
//! every other chunk is thrown away. The discard rate is what makes the
//! efficiency of each base less than one.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::bitstream::BitString;
use crate::entropy::EntropySource;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    Ternary,
    Quaternary,
    Octal,
    Decimal,
    Hexadecimal,
}

impl Base {
    pub const ALL: [Base; 5] = [
        Base::Ternary,
        Base::Quaternary,
        Base::Octal,
        Base::Decimal,
        Base::Hexadecimal,
    ];

    pub fn from_radix(radix: u32) -> Result<Base> {
        match radix {
            3 => Ok(Base::Ternary),
            4 => Ok(Base::Quaternary),
            8 => Ok(Base::Octal),
            10 => Ok(Base::Decimal),
            16 => Ok(Base::Hexadecimal),
            r => Err(Error::InvalidBase(r)),
        }
    }

    pub fn radix(self) -> u32 {
        match self {
            Base::Ternary => 3,
            Base::Quaternary => 4,
            Base::Octal => 8,
            Base::Decimal => 10,
            Base::Hexadecimal => 16,
        }
    }

    /// Width in bits of one encoded digit.
    pub fn chunk_bits(self) -> u32 {
        match self {
            Base::Ternary | Base::Quaternary => 2,
            Base::Octal => 3,
            Base::Decimal | Base::Hexadecimal => 4,
        }
    }

    /// Largest valid digit; valid digits are `1..=max_digit`.
    pub fn max_digit(self) -> u8 {
        (self.radix() - 1) as u8
    }

    pub fn is_valid_digit(self, d: u32) -> bool {
        d >= 1 && d < self.radix()
    }

    /// Fraction of chunk values that encode a valid digit.
    pub fn efficiency(self) -> Ratio<u32> {
        Ratio::new(self.radix() - 1, 1 << self.chunk_bits())
    }

    pub fn name(self) -> &'static str {
        match self {
            Base::Ternary => "ternary",
            Base::Quaternary => "quaternary",
            Base::Octal => "octal",
            Base::Decimal => "decimal",
            Base::Hexadecimal => "hexadecimal",
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Base {
    type Err = Error;

    /// Accepts a radix (`3`, `4`, `8`, `10`, `16`) or a base name.
    fn from_str(s: &str) -> Result<Base> {
        let s = s.trim();
        if let Ok(r) = s.parse::<u32>() {
            return Base::from_radix(r);
        }
        Base::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown base {s:?}")))
    }
}

/// An ordered list of non-zero step sizes, reused cyclically during
/// embedding. Never empty and never all ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Key {
    base: Base,
    digits: Vec<u8>,
}

impl Key {
    pub fn new(base: Base, digits: Vec<u8>) -> Result<Key> {
        validate_digits(base, &digits)?;
        Ok(Key { base, digits })
    }

    /// Skips every check; only for analytic identities in tests.
    #[cfg(test)]
    pub(crate) fn relaxed(base: Base, digits: Vec<u8>) -> Key {
        Key { base, digits }
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn kappa(&self) -> usize {
        self.digits.len()
    }

    /// Sum of all digits: the stream distance covered by one key cycle.
    pub fn cycle_length(&self) -> u64 {
        self.digits.iter().map(|&d| d as u64).sum()
    }

    /// Serializes to the line-oriented key file format.
    pub fn to_key_file(&self) -> String {
        format!("BARN-KEY 1\n{}\n{}\n", self.base.radix(), self)
    }

    pub fn from_key_file(text: &str) -> Result<Key> {
        let mut lines = text.lines();
        let mut next = |what: &str| {
            lines
                .next()
                .map(str::trim)
                .ok_or_else(|| Error::KeyFormat(format!("missing {what} line")))
        };
        let header = next("header")?;
        if header != "BARN-KEY 1" {
            return Err(Error::KeyFormat(format!("bad header {header:?}")));
        }
        let radix_line = next("radix")?;
        let radix: u32 = radix_line
            .parse()
            .map_err(|_| Error::KeyFormat(format!("bad radix {radix_line:?}")))?;
        let base = Base::from_radix(radix).map_err(|e| Error::KeyFormat(e.to_string()))?;
        let digit_line = next("digit")?;
        let digits = digit_line
            .split_whitespace()
            .map(|t| {
                let d: u32 = t.parse().map_err(|_| Error::KeyFormat(format!("bad digit {t:?}")))?;
                if base.is_valid_digit(d) {
                    Ok(d as u8)
                } else {
                    Err(Error::KeyFormat(format!("digit {d} not valid for radix {radix}")))
                }
            })
            .collect::<Result<Vec<u8>>>()?;
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::KeyFormat("trailing content after digit line".into()));
        }
        Key::new(base, digits).map_err(|e| Error::KeyFormat(e.to_string()))
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, d) in self.digits.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

fn validate_digits(base: Base, digits: &[u8]) -> Result<()> {
    if digits.is_empty() {
        return Err(Error::EmptyKey);
    }
    if let Some(&d) = digits.iter().find(|&&d| !base.is_valid_digit(d as u32)) {
        return Err(Error::InvalidDigit {
            digit: d as u32,
            radix: base.radix(),
        });
    }
    if digits.iter().all(|&d| d == 1) {
        return Err(Error::DegenerateKey);
    }
    Ok(())
}

/// Chunks `bits` left to right and keeps every chunk that is a valid digit.
/// A trailing partial chunk is ignored. No key-level checks are applied.
pub fn extract_digits(bits: &BitString, base: Base) -> Vec<u8> {
    let width = base.chunk_bits() as usize;
    let mut digits = Vec::with_capacity(bits.len() / width);
    let mut k = 0;
    while k + width <= bits.len() {
        let mut v = 0u32;
        for off in 0..width {
            v = (v << 1) | bits.bit(k + off) as u32;
        }
        if base.is_valid_digit(v) {
            digits.push(v as u8);
        }
        k += width;
    }
    digits
}

/// Derives a key from a block of entropy.
pub fn derive_key(bits: &BitString, base: Base) -> Result<Key> {
    if bits.len() < base.chunk_bits() as usize {
        return Err(Error::Length {
            requested: base.chunk_bits() as u64,
            available: bits.len() as u64,
        });
    }
    let digits = extract_digits(bits, base);
    if digits.is_empty() {
        return Err(Error::InsufficientEntropy);
    }
    Key::new(base, digits)
}

/// Draws chunks from `src` until exactly `kappa` valid digits are collected.
/// If they would all be ones, the last digit is redrawn until it is not.
pub fn derive_key_exact<S: EntropySource + ?Sized>(src: &mut S, base: Base, kappa: usize) -> Result<Key> {
    if kappa == 0 {
        return Err(Error::EmptyKey);
    }
    let mut next_digit = || -> Result<u8> {
        loop {
            let chunk = src.next_bits(base.chunk_bits() as usize)?;
            let v = chunk.iter().fold(0u32, |acc, b| (acc << 1) | b as u32);
            if base.is_valid_digit(v) {
                return Ok(v as u8);
            }
        }
    };
    let mut digits = Vec::with_capacity(kappa);
    while digits.len() < kappa {
        digits.push(next_digit()?);
    }
    if digits.iter().all(|&d| d == 1) {
        let last = digits.len() - 1;
        while digits[last] == 1 {
            digits[last] = next_digit()?;
        }
    }
    Key::new(base, digits)
}

/// Average number of digits obtained from `key_bits` bits of entropy,
/// rounded down: `floor(key_bits * (radix - 1) / (chunk_bits * 2^chunk_bits))`.
pub fn expected_element_count(base: Base, key_bits: u64) -> u64 {
    let num = key_bits as u128 * (base.radix() as u128 - 1);
    let den = base.chunk_bits() as u128 * (1u128 << base.chunk_bits());
    (num / den) as u64
}

/// Unrounded expectation of [`expected_element_count`].
pub fn expected_element_count_exact(base: Base, key_bits: u64) -> Ratio<u64> {
    Ratio::new(
        key_bits * (base.radix() as u64 - 1),
        base.chunk_bits() as u64 * (1u64 << base.chunk_bits()),
    )
}
