use num_rational::Ratio;

use crate::cipher::cipher_length;
use crate::entropy::seeded_source;
use crate::error::{Error, Result};
use crate::keygen::{derive_key_exact, Base};

/// Expected cipher bits per message bit: the mean key digit, `radix / 2`.
pub fn expansion_factor(base: Base) -> Ratio<u64> {
    Ratio::new(base.radix() as u64, 2)
}

/// Entropy rate needed to embed a message stream of `message_rate` bits/s.
pub fn throughput_requirement(message_rate: u64, base: Base) -> Result<Ratio<u64>> {
    if message_rate == 0 {
        return Err(Error::InvalidArgument("message rate must be positive".into()));
    }
    Ok(expansion_factor(base) * message_rate)
}

/// Parameters for [`simulate_expansion`].
#[derive(Debug, Clone, Copy)]
pub struct ExpansionTrial {
    pub keys: u64,
    pub message_bits: u64,
    pub min_kappa: usize,
    pub max_kappa: usize,
    pub seed: u64,
}

impl Default for ExpansionTrial {
    fn default() -> Self {
        Self {
            keys: 10_000,
            message_bits: 4096,
            min_kappa: 8,
            max_kappa: 32,
            seed: 1,
        }
    }
}

/// Monte-Carlo mean of `cipher_length / message_bits` over random keys.
/// Key `i` comes from `seeded_source(seed + i)` with a length cycling through
/// `min_kappa..=max_kappa`, so the result is the same with or without threads.
pub fn simulate_expansion(base: Base, trial: &ExpansionTrial) -> Result<f64> {
    if trial.keys == 0 || trial.message_bits == 0 || trial.min_kappa == 0 || trial.min_kappa > trial.max_kappa {
        return Err(Error::InvalidArgument("empty expansion trial".into()));
    }
    let span = (trial.max_kappa - trial.min_kappa + 1) as u64;
    let one = |i: u64| -> Result<u64> {
        let kappa = trial.min_kappa + (i % span) as usize;
        let key = derive_key_exact(&mut seeded_source(trial.seed.wrapping_add(i)), base, kappa)?;
        Ok(cipher_length(&key, trial.message_bits))
    };

    #[cfg(feature = "parallel")]
    let total: u64 = {
        use rayon::prelude::*;
        (0..trial.keys).into_par_iter().map(one).sum::<Result<u64>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let total: u64 = (0..trial.keys).map(one).sum::<Result<u64>>()?;

    Ok(total as f64 / (trial.keys * trial.message_bits) as f64)
}
