//! Exhaustive key search.
//!
//! Keys of length κ are numbered `0..(radix-1)^κ` in lexicographic order of
//! their digit vectors; index 0 is the all-ones key and is skipped. Any
//! contiguous index range can be searched independently, so work splits into
//! deterministic partitions and results merge back in key order.

use std::ops::Range;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::bitstream::BitString;
use crate::cipher::{self, CipherEnvelope};
use crate::error::{Error, Result};
use crate::keygen::{Base, Key};

/// Default refusal threshold for the number of keys to try.
pub const DEFAULT_MAX_KEYS: u64 = 1 << 24;

/// Decides whether an extracted message is a plausible plaintext.
pub trait MessageTest: Sync {
    fn accepts(&self, message: &BitString) -> bool;

    /// A known message prefix, when there is one. Lets the search compare bit
    /// by bit and stop at the first mismatch.
    fn known_prefix(&self) -> Option<&BitString> {
        None
    }
}

impl<F> MessageTest for F
where
    F: Fn(&BitString) -> bool + Sync,
{
    fn accepts(&self, message: &BitString) -> bool {
        self(message)
    }
}

/// Accepts messages that begin with the given bits.
#[derive(Debug, Clone)]
pub struct KnownPlaintext(pub BitString);

impl MessageTest for KnownPlaintext {
    fn accepts(&self, message: &BitString) -> bool {
        message.len() >= self.0.len() && message.iter().zip(self.0.iter()).all(|(a, b)| a == b)
    }

    fn known_prefix(&self) -> Option<&BitString> {
        Some(&self.0)
    }
}

/// Accepts messages whose whole bytes are all printable ASCII (plus tab, LF,
/// CR). A trailing partial byte is ignored; messages shorter than
/// `min_bytes` are rejected.
#[derive(Debug, Clone, Copy)]
pub struct PrintableAscii {
    pub min_bytes: usize,
}

impl Default for PrintableAscii {
    fn default() -> Self {
        Self { min_bytes: 1 }
    }
}

impl MessageTest for PrintableAscii {
    fn accepts(&self, message: &BitString) -> bool {
        let whole = message.len() / 8;
        whole >= self.min_bytes
            && message.as_bytes()[..whole]
                .iter()
                .all(|&b| matches!(b, 0x20..=0x7E | b'\t' | b'\n' | b'\r'))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel,
}

#[derive(Debug, Clone)]
pub struct AttackConfig {
    pub max_keys: u64,
    /// Thread count for parallel execution; `None` uses the global pool.
    pub workers: Option<usize>,
    pub execution: Execution,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            max_keys: DEFAULT_MAX_KEYS,
            workers: None,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AttackResult {
    pub keys_tested: u64,
    /// Accepted keys with their extracted messages, in key order.
    pub matches: Vec<(Key, BitString)>,
    pub elapsed: Duration,
}

/// Digits of the key with lexicographic `index` among all `kappa`-digit keys.
pub fn key_at_index(base: Base, kappa: usize, mut index: u64) -> Vec<u8> {
    let symbols = base.max_digit() as u64;
    let mut digits = vec![1u8; kappa];
    for d in digits.iter_mut().rev() {
        *d = (index % symbols) as u8 + 1;
        index /= symbols;
    }
    debug_assert_eq!(index, 0, "index beyond key space");
    digits
}

/// Splits `range` into at most `parts` contiguous, near-equal pieces.
pub fn partition(range: Range<u64>, parts: usize) -> Vec<Range<u64>> {
    let total = range.end.saturating_sub(range.start);
    let parts = (parts as u64).clamp(1, total.max(1));
    let base = total / parts;
    let extra = total % parts;
    let mut out = Vec::with_capacity(parts as usize);
    let mut start = range.start;
    for p in 0..parts {
        let len = base + u64::from(p < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

type Hit = (u64, Vec<u8>, BitString);

/// Tries every key whose index lies in `range` (index 0 is skipped). Returns
/// the number tried and the accepted `(index, digits, message)` triples.
pub fn search_range<T: MessageTest + ?Sized>(
    env: &CipherEnvelope,
    base: Base,
    kappa: usize,
    range: Range<u64>,
    test: &T,
) -> (u64, Vec<Hit>) {
    let start = range.start.max(1);
    if start >= range.end {
        return (0, Vec::new());
    }
    let max = base.max_digit();
    let mut digits = key_at_index(base, kappa, start);
    let mut hits = Vec::new();
    for index in start..range.end {
        if let Some(msg) = try_key(env, &digits, test) {
            hits.push((index, digits.clone(), msg));
        }
        // odometer increment
        for d in digits.iter_mut().rev() {
            if *d < max {
                *d += 1;
                break;
            }
            *d = 1;
        }
    }
    (range.end - start, hits)
}

fn try_key<T: MessageTest + ?Sized>(env: &CipherEnvelope, digits: &[u8], test: &T) -> Option<BitString> {
    if let Some(prefix) = test.known_prefix() {
        if !cipher::extraction_matches(&env.cipher, digits, prefix) {
            return None;
        }
    }
    let msg = cipher::extract(&env.cipher, digits, env.message_bits).ok()?;
    test.accepts(&msg).then_some(msg)
}

/// Enumerates every valid `kappa`-digit key of `base`, decodes `env` with
/// each, and keeps those whose message passes `test`.
pub fn brute_force<T: MessageTest + ?Sized>(
    env: &CipherEnvelope,
    base: Base,
    kappa: usize,
    test: &T,
    config: &AttackConfig,
) -> Result<AttackResult> {
    if kappa == 0 {
        return Err(Error::EmptyKey);
    }
    if let (Some(prefix), Some(mu)) = (test.known_prefix(), env.message_bits) {
        if prefix.len() as u64 > mu {
            return Err(Error::InvalidArgument(format!(
                "known plaintext of {} bits is longer than the {mu}-bit message",
                prefix.len()
            )));
        }
    }
    let space = BigUint::from(base.max_digit()).pow(kappa as u32);
    let total = match space.to_u64() {
        Some(t) if t - 1 <= config.max_keys => t,
        _ => {
            return Err(Error::KeySpaceTooLarge {
                count: space,
                cap: config.max_keys,
            })
        }
    };

    let started = Instant::now();
    let (keys_tested, mut hits) = match config.execution {
        Execution::Sequential => search_range(env, base, kappa, 0..total, test),
        Execution::Parallel => run_parallel(env, base, kappa, total, test, config.workers)?,
    };
    hits.sort_by_key(|h| h.0);
    let matches = hits
        .into_iter()
        .map(|(_, digits, msg)| Ok((Key::new(base, digits)?, msg)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AttackResult {
        keys_tested,
        matches,
        elapsed: started.elapsed(),
    })
}

#[cfg(feature = "parallel")]
fn run_parallel<T: MessageTest + ?Sized>(
    env: &CipherEnvelope,
    base: Base,
    kappa: usize,
    total: u64,
    test: &T,
    workers: Option<usize>,
) -> Result<(u64, Vec<Hit>)> {
    use rayon::prelude::*;

    let run = || {
        let pieces = partition(0..total, rayon::current_num_threads() * 16);
        pieces
            .into_par_iter()
            .map(|r| search_range(env, base, kappa, r, test))
            .reduce(
                || (0, Vec::new()),
                |(n1, mut h1), (n2, h2)| {
                    h1.extend(h2);
                    (n1 + n2, h1)
                },
            )
    };
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok(pool.install(run))
        }
        None => Ok(run()),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_parallel<T: MessageTest + ?Sized>(
    env: &CipherEnvelope,
    base: Base,
    kappa: usize,
    total: u64,
    test: &T,
    _workers: Option<usize>,
) -> Result<(u64, Vec<Hit>)> {
    Ok(search_range(env, base, kappa, 0..total, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{decode, encode};
    use crate::entropy::{seeded_source, EntropySource, FixedSource};
    use crate::keygen::derive_key_exact;

    fn example_cipher() -> CipherEnvelope {
        // worked-example message; of the non-insertion bits only 5 and 17 are set
        let m = BitString::parse("1110001101").unwrap();
        let k = Key::new(Base::Quaternary, vec![1, 3, 2, 1]).unwrap();
        let mut p = BitString::zeros(18);
        p.set(5, true).unwrap();
        p.set(17, true).unwrap();
        encode(&m, &k, &mut FixedSource::new(p)).unwrap()
    }

    #[test]
    fn lexicographic_indexing() {
        assert_eq!(key_at_index(Base::Quaternary, 4, 0), vec![1, 1, 1, 1]);
        assert_eq!(key_at_index(Base::Quaternary, 4, 1), vec![1, 1, 1, 2]);
        assert_eq!(key_at_index(Base::Quaternary, 4, 3), vec![1, 1, 2, 1]);
        assert_eq!(key_at_index(Base::Quaternary, 4, 80), vec![3, 3, 3, 3]);
        assert_eq!(key_at_index(Base::Hexadecimal, 2, 15 * 15 - 1), vec![15, 15]);
    }

    #[test]
    fn partition_covers_range() {
        for (total, parts) in [(0u64, 4usize), (1, 4), (10, 3), (80, 16), (100, 1), (7, 100)] {
            let pieces = partition(0..total, parts);
            let mut next = 0;
            for p in &pieces {
                assert_eq!(p.start, next);
                next = p.end;
            }
            assert_eq!(next, total);
            let lens: Vec<u64> = pieces.iter().map(|p| p.end - p.start).collect();
            assert!(lens.iter().max().unwrap() - lens.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn known_plaintext_recovers_worked_example_key() {
        let env = example_cipher();
        let known = KnownPlaintext(BitString::parse("1110001101").unwrap());
        for execution in [Execution::Sequential, Execution::Parallel] {
            let cfg = AttackConfig {
                execution,
                ..Default::default()
            };
            let res = brute_force(&env, Base::Quaternary, 4, &known, &cfg).unwrap();
            assert_eq!(res.keys_tested, 80);
            assert!(res.matches.iter().any(|(k, _)| k.digits() == [1, 3, 2, 1]));
            for (k, m) in &res.matches {
                assert_eq!(decode(&env, k, None).unwrap(), *m);
            }
        }
    }

    #[test]
    fn guessed_key_extracts_other_message() {
        let env = CipherEnvelope::raw(example_cipher().cipher);
        let g = Key::new(Base::Quaternary, vec![2, 1, 2, 1]).unwrap();
        assert_eq!(decode(&env, &g, None).unwrap().to_string(), "001100001011");
    }

    #[test]
    fn always_false_is_exhaustive() {
        let env = example_cipher();
        for base in Base::ALL {
            for kappa in 1..=3usize {
                let res = brute_force(&env, base, kappa, &|_: &BitString| false, &AttackConfig::default()).unwrap();
                assert!(res.matches.is_empty());
                assert_eq!(res.keys_tested, (base.max_digit() as u64).pow(kappa as u32) - 1);
            }
        }
    }

    #[test]
    fn refuses_large_key_space() {
        let env = example_cipher();
        let cfg = AttackConfig {
            max_keys: 1000,
            ..Default::default()
        };
        match brute_force(&env, Base::Hexadecimal, 3, &|_: &BitString| true, &cfg) {
            Err(Error::KeySpaceTooLarge { count, cap: 1000 }) => assert_eq!(count, BigUint::from(3375u32)),
            other => panic!("expected refusal, got {other:?}"),
        }
        let huge = brute_force(&env, Base::Hexadecimal, 40, &|_: &BitString| true, &AttackConfig::default());
        assert!(matches!(huge, Err(Error::KeySpaceTooLarge { .. })));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let mut src = seeded_source(21);
        let key = derive_key_exact(&mut src, Base::Octal, 4).unwrap();
        let msg = src.next_bits(48).unwrap();
        let env = CipherEnvelope::raw(encode(&msg, &key, &mut src).unwrap().cipher);
        let test = |m: &BitString| m.count_ones().is_multiple_of(3);
        let seq = brute_force(
            &env,
            Base::Octal,
            4,
            &test,
            &AttackConfig {
                execution: Execution::Sequential,
                ..Default::default()
            },
        )
        .unwrap();
        let par = brute_force(
            &env,
            Base::Octal,
            4,
            &test,
            &AttackConfig {
                workers: Some(3),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(seq.keys_tested, par.keys_tested);
        assert_eq!(seq.matches, par.matches);
    }

    #[test]
    fn printable_predicate() {
        let p = PrintableAscii::default();
        assert!(p.accepts(&BitString::from_byte_slice(b"Hi there\n")));
        assert!(!p.accepts(&BitString::from_byte_slice(&[0x48, 0x01])));
        assert!(!p.accepts(&BitString::parse("0100").unwrap()));
    }

    #[test]
    fn known_prefix_longer_than_message_is_rejected() {
        let env = example_cipher();
        let known = KnownPlaintext(BitString::zeros(11));
        assert!(matches!(
            brute_force(&env, Base::Quaternary, 4, &known, &AttackConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
    }
}
