//! Frequency (monobit) and runs tests, plus plain bit counting.

use statrs::function::erf::erfc;

use crate::bitstream::BitString;
use crate::error::{Error, Result};

pub const MIN_TEST_BITS: usize = 100;

/// Printable 7-bit ASCII, space through tilde.
pub const BASIC_ASCII: &str =
    " !\"#$%&'()*+,-./0123456789:;<=>?@ABCDEFGHIJKLMNOPQRSTUVWXYZ[\\]^_`abcdefghijklmnopqrstuvwxyz{|}~";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitBalance {
    pub ones: u64,
    pub zeros: u64,
}

fn check_len(s: &BitString) -> Result<f64> {
    if s.len() < MIN_TEST_BITS {
        return Err(Error::InsufficientData {
            len: s.len() as u64,
            min: MIN_TEST_BITS as u64,
        });
    }
    Ok(s.len() as f64)
}

/// `erfc(|#ones - #zeros| / sqrt(2n))`.
pub fn monobit_test(s: &BitString) -> Result<f64> {
    let n = check_len(s)?;
    let ones = s.count_ones() as f64;
    let sum = 2.0 * ones - n;
    Ok(erfc(sum.abs() / (2.0 * n).sqrt()))
}

/// Runs test. Returns 0 when the ones-proportion prerequisite
/// `|pi - 1/2| < 2/sqrt(n)` fails.
pub fn runs_test(s: &BitString) -> Result<f64> {
    let n = check_len(s)?;
    let pi = s.count_ones() as f64 / n;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return Ok(0.0);
    }
    let mut runs = 1u64;
    let mut prev = s.bit(0);
    for b in s.iter().skip(1) {
        if b != prev {
            runs += 1;
            prev = b;
        }
    }
    let spread = pi * (1.0 - pi);
    let num = (runs as f64 - 2.0 * n * spread).abs();
    Ok(erfc(num / (2.0 * (2.0 * n).sqrt() * spread)))
}

pub fn bit_balance(s: &BitString) -> BitBalance {
    let ones = s.count_ones() as u64;
    BitBalance {
        ones,
        zeros: s.len() as u64 - ones,
    }
}

/// Counts bits of `data`. With `seven_bit`, only the low seven bits of each
/// byte are counted and every byte must be below 0x80.
pub fn bit_balance_bytes(data: &[u8], seven_bit: bool) -> Result<BitBalance> {
    let width = if seven_bit { 7 } else { 8 };
    let mut ones = 0u64;
    for &b in data {
        if seven_bit && b >= 0x80 {
            return Err(Error::Encoding(b));
        }
        ones += b.count_ones() as u64;
    }
    Ok(BitBalance {
        ones,
        zeros: data.len() as u64 * width - ones,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{seeded_source, EntropySource};

    fn round6(x: f64) -> f64 {
        (x * 1e6).round() / 1e6
    }

    // 100-bit reference sequence with published frequency/runs p-values
    const REFERENCE: &str = "1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000";

    #[test]
    fn reference_vectors() {
        let s = BitString::parse(REFERENCE).unwrap();
        assert_eq!(round6(monobit_test(&s).unwrap()), 0.109599);
        assert_eq!(round6(runs_test(&s).unwrap()), 0.500798);
    }

    #[test]
    fn analytic_extremes() {
        let alt = BitString::from_bits((0..1000).map(|k| k % 2 == 0));
        assert!((monobit_test(&alt).unwrap() - 1.0).abs() < 1e-12);
        assert!(runs_test(&alt).unwrap() < 1e-10);

        let ones = BitString::from_bits(std::iter::repeat_n(true, 1000));
        assert!(monobit_test(&ones).unwrap() < 1e-10);
        assert_eq!(runs_test(&ones).unwrap(), 0.0);
    }

    #[test]
    fn short_input_rejected() {
        let s = BitString::zeros(99);
        assert!(matches!(monobit_test(&s), Err(Error::InsufficientData { len: 99, min: 100 })));
        assert!(runs_test(&s).is_err());
    }

    #[test]
    fn seeded_stream_passes() {
        let s = seeded_source(1).next_bits(100_000).unwrap();
        assert!(monobit_test(&s).unwrap() > 0.01);
        assert!(runs_test(&s).unwrap() > 0.01);
    }

    #[test]
    fn balance_counts() {
        assert_eq!(bit_balance_bytes(&[0x00], false).unwrap(), BitBalance { ones: 0, zeros: 8 });
        let m = BitString::parse("1110001101").unwrap();
        assert_eq!(bit_balance(&m), BitBalance { ones: 6, zeros: 4 });
        assert!(matches!(bit_balance_bytes(&[0x41, 0x80], true), Err(Error::Encoding(0x80))));
        assert_eq!(bit_balance_bytes(&[0x80], false).unwrap(), BitBalance { ones: 1, zeros: 7 });
    }

    #[test]
    fn basic_ascii_leans_to_ones() {
        assert_eq!(BASIC_ASCII.len(), 95);
        let b = bit_balance_bytes(BASIC_ASCII.as_bytes(), true).unwrap();
        // counted offline over 0x20..=0x7E
        assert_eq!(b, BitBalance { ones: 361, zeros: 304 });
        assert!(b.ones > b.zeros);
    }
}
