//! Sources of random bits.
//!
//! The cipher only ever asks for "the next n bits", so any producer can stand
//! in for a hardware generator: the operating system, a captured dump read
//! from disk, or a seeded deterministic generator for reproducible output.

use std::fs::File;
use std::io::{BufReader, ErrorKind, Read};
use std::path::Path;

use crate::bitstream::BitString;
use crate::error::{Error, Result};

/// A stateful, consuming producer of random bits.
pub trait EntropySource {
    /// Returns the next `n` bits and advances past them.
    fn next_bits(&mut self, n: usize) -> Result<BitString>;
}

impl<S: EntropySource + ?Sized> EntropySource for &mut S {
    fn next_bits(&mut self, n: usize) -> Result<BitString> {
        (**self).next_bits(n)
    }
}

impl<S: EntropySource + ?Sized> EntropySource for Box<S> {
    fn next_bits(&mut self, n: usize) -> Result<BitString> {
        (**self).next_bits(n)
    }
}

/// Byte buffer with a bit cursor, shared by the byte-oriented sources.
#[derive(Debug, Default)]
struct BitBuffer {
    bytes: Vec<u8>,
    cursor: usize,
}

impl BitBuffer {
    fn available(&self) -> usize {
        self.bytes.len() * 8 - self.cursor
    }

    fn refill(&mut self, more: &[u8]) {
        let consumed = self.cursor / 8;
        if consumed > 0 {
            self.bytes.drain(..consumed);
            self.cursor -= consumed * 8;
        }
        self.bytes.extend_from_slice(more);
    }

    fn take(&mut self, n: usize) -> BitString {
        debug_assert!(n <= self.available());
        let mut out = BitString::with_capacity(n);
        if self.cursor.is_multiple_of(8) {
            let start = self.cursor / 8;
            let whole = n / 8;
            out = BitString::from_byte_slice(&self.bytes[start..start + whole]);
            self.cursor += whole * 8;
        }
        while out.len() < n {
            let k = self.cursor;
            out.push((self.bytes[k >> 3] >> (7 - (k & 7))) & 1 == 1);
            self.cursor += 1;
        }
        out
    }
}

/// Deterministic xorshift64* generator.
///
/// Output words are serialized big-endian and consumed MSB-first, so the bit
/// stream for a given seed is identical on every platform.
#[derive(Debug)]
pub struct SeededSource {
    state: u64,
    buf: BitBuffer,
}

impl SeededSource {
    /// Replacement for the all-zero seed, which would lock the state at zero.
    pub const ZERO_SEED_STATE: u64 = 0x9E37_79B9_7F4A_7C15;
    const MULTIPLIER: u64 = 2_685_821_657_736_338_717;

    pub fn new(seed: u64) -> Self {
        Self {
            state: if seed == 0 { Self::ZERO_SEED_STATE } else { seed },
            buf: BitBuffer::default(),
        }
    }

    /// Advances the generator and returns the next 64-bit output word.
    pub fn next_word(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(Self::MULTIPLIER)
    }
}

impl EntropySource for SeededSource {
    fn next_bits(&mut self, n: usize) -> Result<BitString> {
        if self.buf.available() < n {
            let words = (n - self.buf.available()).div_ceil(64);
            let mut more = Vec::with_capacity(words * 8);
            for _ in 0..words {
                more.extend_from_slice(&self.next_word().to_be_bytes());
            }
            self.buf.refill(&more);
        }
        Ok(self.buf.take(n))
    }
}

/// Reads packed bits (MSB-first) from any byte reader, e.g. a dump captured
/// from a hardware generator.
pub struct ReaderSource<R> {
    inner: R,
    buf: BitBuffer,
    eof: bool,
}

impl<R: Read> ReaderSource<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            buf: BitBuffer::default(),
            eof: false,
        }
    }

    fn fill_to(&mut self, n: usize) -> Result<()> {
        let mut chunk = [0u8; 4096];
        while self.buf.available() < n && !self.eof {
            match self.inner.read(&mut chunk) {
                Ok(0) => self.eof = true,
                Ok(k) => self.buf.refill(&chunk[..k]),
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(())
    }
}

impl<R: Read> EntropySource for ReaderSource<R> {
    fn next_bits(&mut self, n: usize) -> Result<BitString> {
        self.fill_to(n)?;
        let remaining = self.buf.available();
        if remaining < n {
            return Err(Error::Underrun {
                requested: n as u64,
                remaining: remaining as u64,
            });
        }
        Ok(self.buf.take(n))
    }
}

pub type FileSource = ReaderSource<BufReader<File>>;

/// Draws from the operating system's entropy facility.
#[derive(Debug, Default)]
pub struct OsSource {
    buf: BitBuffer,
}

impl EntropySource for OsSource {
    fn next_bits(&mut self, n: usize) -> Result<BitString> {
        if self.buf.available() < n {
            let need = (n - self.buf.available()).div_ceil(8).max(64);
            let mut more = vec![0u8; need];
            getrandom::fill(&mut more).map_err(|e| Error::Io(std::io::Error::other(e)))?;
            self.buf.refill(&more);
        }
        Ok(self.buf.take(n))
    }
}

/// Replays a fixed bit string, then reports underrun.
#[derive(Debug)]
pub struct FixedSource {
    bits: BitString,
    next: usize,
}

impl FixedSource {
    pub fn new(bits: BitString) -> Self {
        Self { bits, next: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.next
    }
}

impl EntropySource for FixedSource {
    fn next_bits(&mut self, n: usize) -> Result<BitString> {
        if n > self.remaining() {
            return Err(Error::Underrun {
                requested: n as u64,
                remaining: self.remaining() as u64,
            });
        }
        let out = BitString::from_bits((self.next..self.next + n).map(|k| self.bits.bit(k)));
        self.next += n;
        Ok(out)
    }
}

pub fn os_source() -> OsSource {
    OsSource::default()
}

pub fn file_source(path: impl AsRef<Path>) -> Result<FileSource> {
    Ok(ReaderSource::new(BufReader::new(File::open(path)?)))
}

pub fn seeded_source(seed: u64) -> SeededSource {
    SeededSource::new(seed)
}
