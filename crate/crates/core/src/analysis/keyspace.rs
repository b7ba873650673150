use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::keygen::{expected_element_count, Base};

/// Julian year.
pub const SECONDS_PER_YEAR: u64 = 31_557_600;

/// Size of the key space for one base and key length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySpaceReport {
    pub base: Base,
    pub kappa: u64,
    /// Exactly `(radix - 1)^kappa`.
    pub permutations: BigUint,
    /// `floor(log2(permutations))`.
    pub bits: u64,
    /// Entropy length the key length was derived from, if any.
    pub derived_from_key_bits: Option<u64>,
}

impl KeySpaceReport {
    /// Permutations in `d.ddE+xxx` form.
    pub fn scientific(&self) -> String {
        scientific(&self.permutations, 3)
    }
}

pub fn key_space(base: Base, kappa: u64) -> Result<KeySpaceReport> {
    if kappa == 0 {
        return Err(Error::EmptyKey);
    }
    let exp = u32::try_from(kappa).map_err(|_| Error::InvalidArgument(format!("key length {kappa} too large")))?;
    let permutations = BigUint::from(base.max_digit()).pow(exp);
    let bits = permutations.bits() - 1;
    Ok(KeySpaceReport {
        base,
        kappa,
        permutations,
        bits,
        derived_from_key_bits: None,
    })
}

/// Key space for the average key length obtained from `key_bits` bits of entropy.
pub fn key_space_for_key_bits(base: Base, key_bits: u64) -> Result<KeySpaceReport> {
    let mut report = key_space(base, expected_element_count(base, key_bits))?;
    report.derived_from_key_bits = Some(key_bits);
    Ok(report)
}

/// Renders `n` with `sig` significant digits (round half up) and a signed
/// three-digit exponent, e.g. `6.55E+004`.
pub fn scientific(n: &BigUint, sig: usize) -> String {
    assert!(sig >= 1);
    if n.is_zero() {
        return format!("{}E+000", pad_mantissa("0".repeat(sig)));
    }
    let digits = n.to_str_radix(10);
    let mut exponent = digits.len() - 1;
    let mut mantissa: Vec<u8> = digits.bytes().take(sig).map(|c| c - b'0').collect();
    mantissa.resize(sig, 0);
    let round_up = digits.as_bytes().get(sig).is_some_and(|&c| c >= b'5');
    if round_up {
        let mut k = sig;
        loop {
            if k == 0 {
                // 9.99.. rolled over
                mantissa.insert(0, 1);
                mantissa.truncate(sig);
                exponent += 1;
                break;
            }
            k -= 1;
            if mantissa[k] == 9 {
                mantissa[k] = 0;
            } else {
                mantissa[k] += 1;
                break;
            }
        }
    }
    let text: String = mantissa.iter().map(|d| (b'0' + d) as char).collect();
    format!("{}E+{exponent:03}", pad_mantissa(text))
}

fn pad_mantissa(text: String) -> String {
    if text.len() == 1 {
        text
    } else {
        format!("{}.{}", &text[..1], &text[1..])
    }
}

/// Time to exhaust a key space at a fixed guessing rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackTime {
    pub seconds: BigRational,
}

impl AttackTime {
    pub fn years(&self) -> BigRational {
        &self.seconds / BigRational::from_integer(BigInt::from(SECONDS_PER_YEAR))
    }

    pub fn years_f64(&self) -> f64 {
        self.years().to_f64().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for AttackTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole_seconds = self.seconds.ceil().to_integer();
        let years = self.years_f64();
        let seconds = whole_seconds.to_biguint().unwrap_or_default();
        if years.is_finite() && years < 1e6 {
            write!(f, "{years:.1} years ({} s)", scientific(&seconds, 3))
        } else {
            let whole_years = self.years().ceil().to_integer().to_biguint().unwrap_or_default();
            write!(f, "{} years ({} s)", scientific(&whole_years, 3), scientific(&seconds, 3))
        }
    }
}

/// Exhaustive search time: permutations / rate, kept as an exact rational.
pub fn attack_time_estimate(report: &KeySpaceReport, keys_per_second: u64) -> Result<AttackTime> {
    if keys_per_second == 0 {
        return Err(Error::InvalidArgument("guessing rate must be positive".into()));
    }
    Ok(AttackTime {
        seconds: BigRational::new(
            BigInt::from(report.permutations.clone()),
            BigInt::from(keys_per_second),
        ),
    })
}
