//! Bit sequences with 1-based indexing and MSB-first byte packing.
//!
//! Bit 1 of a [`BitString`] is the most significant bit of its first byte.
//! A trailing partial byte is zero-padded on the least-significant side, so
//! the bit length always travels alongside the packed bytes.

use std::fmt;
use std::io::{self, Read, Write};

use crate::error::{Error, Result};

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    /// A string of `len` zero bits.
    pub fn zeros(len: usize) -> Self {
        Self {
            bytes: vec![0; len.div_ceil(8)],
            len,
        }
    }

    /// Takes the first `bit_length` bits of `data`, MSB-first.
    pub fn from_bytes(data: &[u8], bit_length: usize) -> Result<Self> {
        let available = data.len() as u64 * 8;
        if bit_length as u64 > available {
            return Err(Error::Length {
                requested: bit_length as u64,
                available,
            });
        }
        let mut s = Self {
            bytes: data[..bit_length.div_ceil(8)].to_vec(),
            len: bit_length,
        };
        s.clear_padding();
        Ok(s)
    }

    /// All bits of `data`.
    pub fn from_byte_slice(data: &[u8]) -> Self {
        Self {
            bytes: data.to_vec(),
            len: data.len() * 8,
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut s = Self::new();
        s.extend(bits);
        s
    }

    /// Parses a string of `0`/`1` characters; whitespace and `_` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::new();
        for c in text.chars() {
            match c {
                '0' => s.push(false),
                '1' => s.push(true),
                c if c.is_whitespace() || c == '_' => {}
                c => return Err(Error::InvalidArgument(format!("unexpected character {c:?} in bit string"))),
            }
        }
        Ok(s)
    }

    /// Packed bytes (final byte zero-padded low) and the bit length.
    pub fn to_bytes(&self) -> (Vec<u8>, usize) {
        (self.bytes.clone(), self.len)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at 1-based position `i`.
    pub fn get(&self, i: usize) -> Result<bool> {
        self.check(i)?;
        Ok(self.bit(i - 1))
    }

    /// Overwrites the bit at 1-based position `i`.
    pub fn set(&mut self, i: usize, bit: bool) -> Result<()> {
        self.check(i)?;
        self.put(i - 1, bit);
        Ok(())
    }

    /// Copy of `self` with position `i` replaced.
    pub fn with_bit(&self, i: usize, bit: bool) -> Result<Self> {
        let mut out = self.clone();
        out.set(i, bit)?;
        Ok(out)
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        self.len += 1;
        self.put(self.len - 1, bit);
    }

    pub fn append(&mut self, other: &BitString) {
        if self.len.is_multiple_of(8) {
            self.bytes.extend_from_slice(&other.bytes);
            self.len += other.len;
        } else {
            self.extend(other.iter());
        }
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.append(other);
        out
    }

    /// Bits `start..=end` (1-based, inclusive) as a new string.
    pub fn slice(&self, start: usize, end: usize) -> Result<BitString> {
        if start == 0 || start > end.saturating_add(1) {
            return Err(Error::Index {
                index: start as u64,
                len: self.len as u64,
            });
        }
        if end > self.len {
            return Err(Error::Index {
                index: end as u64,
                len: self.len as u64,
            });
        }
        Ok(BitString::from_bits((start - 1..end).map(|k| self.bit(k))))
    }

    pub fn truncate(&mut self, len: usize) {
        if len >= self.len {
            return;
        }
        self.len = len;
        self.bytes.truncate(len.div_ceil(8));
        self.clear_padding();
    }

    fn clear_padding(&mut self) {
        if !self.len.is_multiple_of(8) {
            if let Some(last) = self.bytes.last_mut() {
                *last &= 0xFFu8 << (8 - self.len % 8);
            }
        }
    }

    pub fn iter(&self) -> Bits<'_> {
        Bits { s: self, next: 0 }
    }

    pub fn count_ones(&self) -> usize {
        // padding bits are always zero
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// 0-based read without the public range check.
    #[inline]
    pub(crate) fn bit(&self, k: usize) -> bool {
        debug_assert!(k < self.len);
        (self.bytes[k >> 3] >> (7 - (k & 7))) & 1 == 1
    }

    #[inline]
    pub(crate) fn put(&mut self, k: usize, bit: bool) {
        let mask = 1u8 << (7 - (k & 7));
        if bit {
            self.bytes[k >> 3] |= mask;
        } else {
            self.bytes[k >> 3] &= !mask;
        }
    }

    fn check(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.len {
            Err(Error::Index {
                index: i as u64,
                len: self.len as u64,
            })
        } else {
            Ok(())
        }
    }
}

impl Extend<bool> for BitString {
    fn extend<I: IntoIterator<Item = bool>>(&mut self, iter: I) {
        for b in iter {
            self.push(b);
        }
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self::from_bits(iter)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({}:", self.len)?;
        if self.len <= 256 {
            write!(f, " {self}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub struct Bits<'a> {
    s: &'a BitString,
    next: usize,
}

impl Iterator for Bits<'_> {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        if self.next >= self.s.len {
            return None;
        }
        self.next += 1;
        Some(self.s.bit(self.next - 1))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.s.len - self.next;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Bits<'_> {}

impl<'a> IntoIterator for &'a BitString {
    type Item = bool;
    type IntoIter = Bits<'a>;

    fn into_iter(self) -> Bits<'a> {
        self.iter()
    }
}

/// Destination for a stream of bits.
pub trait BitSink {
    fn put_bit(&mut self, bit: bool) -> Result<()>;
}

impl BitSink for BitString {
    fn put_bit(&mut self, bit: bool) -> Result<()> {
        self.push(bit);
        Ok(())
    }
}

/// MSB-first bit reader over any byte source. Yields `io::Result<bool>` so
/// read failures reach the consumer.
pub struct BitReader<R> {
    inner: R,
    cur: u8,
    left: u8,
    failed: bool,
}

impl<R: Read> BitReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            cur: 0,
            left: 0,
            failed: false,
        }
    }
}

impl<R: Read> Iterator for BitReader<R> {
    type Item = io::Result<bool>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        if self.left == 0 {
            let mut buf = [0u8; 1];
            loop {
                match self.inner.read(&mut buf) {
                    Ok(0) => return None,
                    Ok(_) => break,
                    Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                    Err(e) => {
                        self.failed = true;
                        return Some(Err(e));
                    }
                }
            }
            self.cur = buf[0];
            self.left = 8;
        }
        self.left -= 1;
        Some(Ok((self.cur >> self.left) & 1 == 1))
    }
}

/// MSB-first bit writer. `finish` flushes a zero-padded partial byte.
pub struct BitWriter<W: Write> {
    inner: W,
    cur: u8,
    filled: u8,
    written: u64,
}

impl<W: Write> BitWriter<W> {
    pub fn new(inner: W) -> Self {
        Self {
            inner,
            cur: 0,
            filled: 0,
            written: 0,
        }
    }

    /// Bits accepted so far.
    pub fn bits_written(&self) -> u64 {
        self.written
    }

    pub fn write_bit(&mut self, bit: bool) -> io::Result<()> {
        self.cur |= (bit as u8) << (7 - self.filled);
        self.filled += 1;
        self.written += 1;
        if self.filled == 8 {
            self.inner.write_all(&[self.cur])?;
            self.cur = 0;
            self.filled = 0;
        }
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<W> {
        if self.filled > 0 {
            self.inner.write_all(&[self.cur])?;
        }
        self.inner.flush()?;
        Ok(self.inner)
    }
}

impl<W: Write> BitSink for BitWriter<W> {
    fn put_bit(&mut self, bit: bool) -> Result<()> {
        Ok(self.write_bit(bit)?)
    }
}
