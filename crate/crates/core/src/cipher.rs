//! Embedding message bits into a random stream and pulling them back out.
//!
//! Message bit `j` replaces stream bit `i_j`, where the gaps `i_j - i_(j-1)`
//! are the key digits reused cyclically (`i_0 = 0`). Everything between
//! insertion points is untouched entropy. Decoding needs only the key.

use crate::bitstream::{BitSink, BitString};
use crate::entropy::EntropySource;
use crate::error::{Error, Result};
use crate::keygen::Key;

/// Container magic, followed by a version byte and the message length.
pub const CONTAINER_MAGIC: &[u8; 4] = b"BARN";
pub const CONTAINER_VERSION: u8 = 0x01;
const CONTAINER_HEADER_LEN: usize = 4 + 1 + 8;

/// Walks insertion positions by accumulating key digits cyclically.
#[derive(Debug, Clone)]
pub struct PositionIterator<'a> {
    digits: &'a [u8],
    next_digit: usize,
    position: u64,
}

impl<'a> PositionIterator<'a> {
    pub fn new(key: &'a Key) -> Self {
        Self::over_digits(key.digits())
    }

    pub(crate) fn over_digits(digits: &'a [u8]) -> Self {
        Self {
            digits,
            next_digit: 0,
            position: 0,
        }
    }
}

impl Iterator for PositionIterator<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        self.position += self.digits[self.next_digit] as u64;
        self.next_digit = (self.next_digit + 1) % self.digits.len();
        Some(self.position)
    }
}

/// Insertion position of message bit `j` (1-based) in closed form:
/// full key cycles before `j` times the cycle length, plus the partial sum of
/// the first `t` digits where `t` is `j`'s index within its cycle.
pub fn insertion_position(key: &Key, j: u64) -> u64 {
    assert!(j >= 1, "message indices are 1-based");
    let kappa = key.kappa() as u64;
    let cycles = (j - 1) / kappa;
    let t = (j - cycles * kappa) as usize;
    let partial: u64 = key.digits()[..t].iter().map(|&d| d as u64).sum();
    cycles * key.cycle_length() + partial
}

pub fn insertion_positions(key: &Key, mu: u64) -> Vec<u64> {
    PositionIterator::new(key).take(mu as usize).collect()
}

/// Length of the cipher for a `mu`-bit message: the last insertion position.
pub fn cipher_length(key: &Key, mu: u64) -> u64 {
    if mu == 0 {
        0
    } else {
        insertion_position(key, mu)
    }
}

/// Largest message length whose last insertion position fits in `cipher_bits`.
pub fn max_message_len(key: &Key, cipher_bits: u64) -> u64 {
    max_fitting(key.digits(), cipher_bits)
}

fn max_fitting(digits: &[u8], cipher_bits: u64) -> u64 {
    let cycle: u64 = digits.iter().map(|&d| d as u64).sum();
    let full = cipher_bits / cycle;
    let mut rest = cipher_bits % cycle;
    let mut extra = 0;
    for &d in digits {
        if d as u64 > rest {
            break;
        }
        rest -= d as u64;
        extra += 1;
    }
    full * digits.len() as u64 + extra
}

/// A cipher bit string plus, in container mode, the embedded message length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherEnvelope {
    pub cipher: BitString,
    pub message_bits: Option<u64>,
}

impl CipherEnvelope {
    /// Bare cipher with no length metadata.
    pub fn raw(cipher: BitString) -> Self {
        Self {
            cipher,
            message_bits: None,
        }
    }

    /// `BARN` + version + big-endian u64 message length + packed cipher bits.
    ///
    /// The length field is written as zero when it is unknown.
    pub fn to_container_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(CONTAINER_HEADER_LEN + self.cipher.as_bytes().len());
        out.extend_from_slice(CONTAINER_MAGIC);
        out.push(CONTAINER_VERSION);
        out.extend_from_slice(&self.message_bits.unwrap_or(0).to_be_bytes());
        out.extend_from_slice(self.cipher.as_bytes());
        out
    }

    /// Parses a container. The cipher length is the whole payload, padding
    /// bits included; they sit past the last insertion position.
    pub fn from_container_bytes(data: &[u8]) -> Result<Self> {
        if data.len() < CONTAINER_HEADER_LEN {
            return Err(Error::Container(format!("{} bytes is shorter than the header", data.len())));
        }
        if &data[..4] != CONTAINER_MAGIC {
            return Err(Error::Container("missing BARN magic".into()));
        }
        if data[4] != CONTAINER_VERSION {
            return Err(Error::Container(format!("unsupported version {}", data[4])));
        }
        let mu = u64::from_be_bytes(data[5..13].try_into().expect("8-byte slice"));
        let cipher = BitString::from_byte_slice(&data[CONTAINER_HEADER_LEN..]);
        if mu > cipher.len() as u64 {
            return Err(Error::Container(format!(
                "message length {mu} exceeds cipher length {}",
                cipher.len()
            )));
        }
        Ok(Self {
            cipher,
            message_bits: Some(mu),
        })
    }

    /// Raw packed bits; length metadata is dropped.
    pub fn to_raw_bytes(&self) -> Vec<u8> {
        self.cipher.as_bytes().to_vec()
    }
}

/// Embeds `message` into fresh bits drawn from `src`. The cipher ends at the
/// last insertion position.
pub fn encode<S: EntropySource + ?Sized>(message: &BitString, key: &Key, src: &mut S) -> Result<CipherEnvelope> {
    encode_with_tail(message, key, src, 0)
}

/// Like [`encode`], then appends `tail_bits` more source bits so the cipher
/// length no longer pins down the message length.
pub fn encode_with_tail<S: EntropySource + ?Sized>(
    message: &BitString,
    key: &Key,
    src: &mut S,
    tail_bits: usize,
) -> Result<CipherEnvelope> {
    let mu = message.len() as u64;
    let total = cipher_length(key, mu) as usize + tail_bits;
    let mut cipher = src.next_bits(total)?;
    for (j, pos) in PositionIterator::new(key).take(message.len()).enumerate() {
        cipher.put(pos as usize - 1, message.bit(j));
    }
    Ok(CipherEnvelope {
        cipher,
        message_bits: Some(mu),
    })
}

/// Extracts the message. `mu` overrides the envelope's length; with neither,
/// the longest message that fits the cipher is returned.
pub fn decode(env: &CipherEnvelope, key: &Key, mu: Option<u64>) -> Result<BitString> {
    extract(&env.cipher, key.digits(), mu.or(env.message_bits))
}

pub(crate) fn extract(cipher: &BitString, digits: &[u8], mu: Option<u64>) -> Result<BitString> {
    let available = cipher.len() as u64;
    let mu = match mu {
        Some(mu) => mu,
        None => max_fitting(digits, available),
    };
    let mut out = BitString::with_capacity(mu as usize);
    for pos in PositionIterator::over_digits(digits).take(mu as usize) {
        if pos > available {
            return Err(Error::Range {
                mu,
                needed: pos,
                available,
            });
        }
        out.push(cipher.bit(pos as usize - 1));
    }
    Ok(out)
}

/// Compares the bits at the key's positions with `expected` without
/// materializing the extraction. Returns false when positions run past the
/// cipher.
pub(crate) fn extraction_matches(cipher: &BitString, digits: &[u8], expected: &BitString) -> bool {
    let available = cipher.len() as u64;
    PositionIterator::over_digits(digits)
        .zip(expected.iter())
        .all(|(pos, b)| pos <= available && cipher.bit(pos as usize - 1) == b)
}

/// Incremental encoder: each message bit pulls the next key digit's worth of
/// source bits and replaces the last of them.
pub struct StreamEncoder<'k, S> {
    key: &'k Key,
    src: S,
    next_digit: usize,
    consumed: u64,
    emitted: u64,
}

impl<'k, S: EntropySource> StreamEncoder<'k, S> {
    pub fn new(key: &'k Key, src: S) -> Self {
        Self {
            key,
            src,
            next_digit: 0,
            consumed: 0,
            emitted: 0,
        }
    }

    /// Message bits consumed so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    /// Cipher bits emitted so far.
    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    pub fn push<W: BitSink + ?Sized>(&mut self, bit: bool, sink: &mut W) -> Result<()> {
        let gap = self.key.digits()[self.next_digit] as usize;
        let mut chunk = self.src.next_bits(gap).map_err(|e| e.at_offset(self.consumed))?;
        chunk.put(gap - 1, bit);
        for b in chunk.iter() {
            sink.put_bit(b).map_err(|e| e.at_offset(self.consumed))?;
        }
        self.next_digit = (self.next_digit + 1) % self.key.kappa();
        self.consumed += 1;
        self.emitted += gap as u64;
        Ok(())
    }

    pub fn into_source(self) -> S {
        self.src
    }
}

/// Incremental decoder: forwards exactly the bits at key positions.
pub struct StreamDecoder<'k> {
    key: &'k Key,
    next_digit: usize,
    until_insert: u8,
    consumed: u64,
    emitted: u64,
}

impl<'k> StreamDecoder<'k> {
    pub fn new(key: &'k Key) -> Self {
        Self {
            key,
            next_digit: 0,
            until_insert: key.digits()[0],
            consumed: 0,
            emitted: 0,
        }
    }

    /// Cipher bits consumed so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    /// Message bits emitted so far.
    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    pub fn push<W: BitSink + ?Sized>(&mut self, bit: bool, sink: &mut W) -> Result<()> {
        self.consumed += 1;
        self.until_insert -= 1;
        if self.until_insert == 0 {
            sink.put_bit(bit).map_err(|e| e.at_offset(self.consumed - 1))?;
            self.emitted += 1;
            self.next_digit = (self.next_digit + 1) % self.key.kappa();
            self.until_insert = self.key.digits()[self.next_digit];
        }
        Ok(())
    }
}

/// Streams `message` through a [`StreamEncoder`]. Returns the number of
/// cipher bits written. Read errors carry the message bit offset.
pub fn encode_stream<I, E, S, W>(message: I, key: &Key, src: S, sink: &mut W) -> Result<u64>
where
    I: IntoIterator<Item = std::result::Result<bool, E>>,
    E: Into<Error>,
    S: EntropySource,
    W: BitSink + ?Sized,
{
    let mut enc = StreamEncoder::new(key, src);
    for bit in message {
        let bit = bit.map_err(|e| e.into().at_offset(enc.consumed()))?;
        enc.push(bit, sink)?;
    }
    Ok(enc.emitted())
}

/// Streams `cipher` through a [`StreamDecoder`]. Returns the number of
/// message bits written. Read errors carry the cipher bit offset.
pub fn decode_stream<I, E, W>(cipher: I, key: &Key, sink: &mut W) -> Result<u64>
where
    I: IntoIterator<Item = std::result::Result<bool, E>>,
    E: Into<Error>,
    W: BitSink + ?Sized,
{
    let mut dec = StreamDecoder::new(key);
    for bit in cipher {
        let bit = bit.map_err(|e| e.into().at_offset(dec.consumed()))?;
        dec.push(bit, sink)?;
    }
    Ok(dec.emitted())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;
    use crate::entropy::{seeded_source, FixedSource, ReaderSource};
    use crate::keygen::{derive_key_exact, Base};
    use proptest::prelude::*;

    fn key(d: &[u8]) -> Key {
        Key::new(Base::Quaternary, d.to_vec()).unwrap()
    }

    fn bits(s: &str) -> BitString {
        BitString::parse(s).unwrap()
    }

    #[test]
    fn worked_example_positions() {
        let k = key(&[1, 3, 2, 1]);
        assert_eq!(insertion_positions(&k, 10), vec![1, 4, 6, 7, 8, 11, 13, 14, 15, 18]);
        assert_eq!(cipher_length(&k, 10), 18);
        let g = key(&[2, 1, 2, 1]);
        assert_eq!(
            insertion_positions(&g, 12),
            vec![2, 3, 5, 6, 8, 9, 11, 12, 14, 15, 17, 18]
        );
        assert_eq!(cipher_length(&g, 12), 18);
        assert!(insertion_positions(&k, 0).is_empty());
        assert_eq!(cipher_length(&k, 0), 0);
    }

    #[test]
    fn single_unit_digit_key_is_identity_length() {
        let k = Key::relaxed(Base::Quaternary, vec![1]);
        assert_eq!(cipher_length(&k, 5), 5);
        assert_eq!(insertion_positions(&k, 5), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn max_fit_matches_guessed_extraction() {
        assert_eq!(max_message_len(&key(&[2, 1, 2, 1]), 18), 12);
        assert_eq!(max_message_len(&key(&[1, 3, 2, 1]), 18), 10);
        assert_eq!(max_message_len(&key(&[1, 3, 2, 1]), 0), 0);
        assert_eq!(max_message_len(&key(&[3, 3]), 2), 0);
    }

    #[test]
    fn encode_worked_example() {
        let m = bits("1110001101");
        let k = key(&[1, 3, 2, 1]);
        let raw = seeded_source(5).next_bits(18).unwrap();
        let env = encode(&m, &k, &mut seeded_source(5)).unwrap();
        assert_eq!(env.cipher.len(), 18);
        assert_eq!(env.message_bits, Some(10));
        let positions = insertion_positions(&k, 10);
        for i in 1..=18u64 {
            let got = env.cipher.get(i as usize).unwrap();
            match positions.iter().position(|&p| p == i) {
                Some(j) => assert_eq!(got, m.get(j + 1).unwrap()),
                None => assert_eq!(got, raw.get(i as usize).unwrap()),
            }
        }
        assert_eq!(decode(&env, &k, None).unwrap(), m);
    }

    #[test]
    fn encode_single_bit() {
        for b in [false, true] {
            let k = Key::new(Base::Octal, vec![5]).unwrap();
            let env = encode(&BitString::from_bits([b]), &k, &mut seeded_source(1)).unwrap();
            assert_eq!(env.cipher.len(), 5);
            assert_eq!(env.cipher.get(5).unwrap(), b);
        }
    }

    #[test]
    fn encode_propagates_underrun() {
        let mut src = FixedSource::new(bits("0101"));
        let err = encode(&bits("11"), &key(&[3]), &mut src).unwrap_err();
        assert!(matches!(err, Error::Underrun { requested: 6, remaining: 4 }));
    }

    #[test]
    fn encode_with_tail_masks_length() {
        let k = key(&[2, 3]);
        let m = bits("1011");
        let env = encode_with_tail(&m, &k, &mut seeded_source(3), 37).unwrap();
        assert_eq!(env.cipher.len() as u64, cipher_length(&k, 4) + 37);
        assert_eq!(decode(&env, &k, None).unwrap(), m);
        let raw = CipherEnvelope::raw(env.cipher.clone());
        assert_eq!(decode(&raw, &k, Some(4)).unwrap(), m);
        assert!(decode(&raw, &k, None).unwrap().len() > 4);
    }

    #[test]
    fn decode_range_and_empty() {
        let env = CipherEnvelope::raw(bits("110101"));
        let k = key(&[3]);
        assert!(decode(&env, &k, Some(0)).unwrap().is_empty());
        assert_eq!(decode(&env, &k, Some(2)).unwrap().to_string(), "01");
        assert!(matches!(
            decode(&env, &k, Some(3)),
            Err(Error::Range { mu: 3, needed: 9, available: 6 })
        ));
    }

    #[test]
    fn container_round_trip_and_errors() {
        let env = encode(&bits("1110001101"), &key(&[1, 3, 2, 1]), &mut seeded_source(1)).unwrap();
        let bytes = env.to_container_bytes();
        assert_eq!(&bytes[..5], b"BARN\x01");
        assert_eq!(&bytes[5..13], &10u64.to_be_bytes());
        assert_eq!(bytes.len(), 13 + 3);
        let back = CipherEnvelope::from_container_bytes(&bytes).unwrap();
        assert_eq!(back.message_bits, Some(10));
        assert_eq!(back.cipher.len(), 24);
        assert_eq!(decode(&back, &key(&[1, 3, 2, 1]), None).unwrap().to_string(), "1110001101");

        assert!(CipherEnvelope::from_container_bytes(b"BARN").is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(CipherEnvelope::from_container_bytes(&bad), Err(Error::Container(_))));
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(CipherEnvelope::from_container_bytes(&bad).is_err());
        let mut bad = bytes;
        bad[12] = 200;
        assert!(CipherEnvelope::from_container_bytes(&bad).is_err());
    }

    #[test]
    fn stream_matches_block_on_worked_example() {
        let m = bits("1110001101");
        let k = key(&[1, 3, 2, 1]);
        let block = encode(&m, &k, &mut seeded_source(9)).unwrap();
        let mut out = BitString::new();
        let n = encode_stream(m.iter().map(Ok::<_, Infallible>), &k, seeded_source(9), &mut out).unwrap();
        assert_eq!(n, 18);
        assert_eq!(out, block.cipher);

        let mut back = BitString::new();
        let got = decode_stream(out.iter().map(Ok::<_, Infallible>), &k, &mut back).unwrap();
        assert_eq!(got, 10);
        assert_eq!(back, m);
    }

    #[test]
    fn empty_stream() {
        let mut out = BitString::new();
        let n = encode_stream(std::iter::empty::<Result<bool>>(), &key(&[2]), seeded_source(1), &mut out).unwrap();
        assert_eq!(n, 0);
        assert!(out.is_empty());
    }

    #[test]
    fn stream_errors_carry_offset() {
        let m = bits("1111");
        let mut out = BitString::new();
        let err = encode_stream(m.iter().map(Ok::<_, Infallible>), &key(&[3]), FixedSource::new(bits("0000000")), &mut out)
            .unwrap_err();
        match err {
            Error::Stream { offset: 2, source } => assert!(matches!(*source, Error::Underrun { .. })),
            other => panic!("unexpected {other:?}"),
        }

        let input = vec![Ok(true), Ok(false), Err(std::io::Error::other("boom"))];
        let err = decode_stream(input, &key(&[2]), &mut BitString::new()).unwrap_err();
        assert!(matches!(err, Error::Stream { offset: 2, .. }));
    }

    #[test]
    fn stream_over_io_round_trip() {
        let k = derive_key_exact(&mut seeded_source(4), Base::Octal, 9).unwrap();
        let message = seeded_source(8).next_bits(100_000).unwrap();
        let mut w = crate::bitstream::BitWriter::new(Vec::new());
        let n = encode_stream(message.iter().map(Ok::<_, Infallible>), &k, seeded_source(12), &mut w).unwrap();
        let packed = w.finish().unwrap();
        let reader = crate::bitstream::BitReader::new(&packed[..]).take(n as usize);
        let mut back = BitString::new();
        decode_stream(reader, &k, &mut back).unwrap();
        assert_eq!(back, message);

        // the packed stream also works as an entropy source
        let mut src = ReaderSource::new(&packed[..]);
        assert_eq!(src.next_bits(n as usize).unwrap().len() as u64, n);
    }

    proptest! {
        #[test]
        fn closed_form_matches_iteration(d in proptest::collection::vec(1u8..=15, 1..20), mu in 1u64..500) {
            prop_assume!(d.iter().any(|&x| x != 1));
            let k = Key::new(Base::Hexadecimal, d).unwrap();
            let iterative = insertion_positions(&k, mu);
            for (j, &pos) in iterative.iter().enumerate() {
                prop_assert_eq!(insertion_position(&k, j as u64 + 1), pos);
            }
        }

        #[test]
        fn gaps_are_cyclic_digits(d in proptest::collection::vec(1u8..=7, 1..12), mu in 1u64..200) {
            prop_assume!(d.iter().any(|&x| x != 1));
            let k = Key::new(Base::Octal, d.clone()).unwrap();
            let pos = insertion_positions(&k, mu);
            prop_assert_eq!(pos[0], d[0] as u64);
            for j in 1..pos.len() {
                prop_assert_eq!(pos[j] - pos[j - 1], d[j % d.len()] as u64);
            }
        }

        #[test]
        fn round_trip_and_untouched_bits(seed in any::<u64>(), kappa in 1usize..16, mu in 1usize..600) {
            let mut ks = seeded_source(seed);
            let base = Base::ALL[(seed % 5) as usize];
            let k = derive_key_exact(&mut ks, base, kappa).unwrap();
            let m = ks.next_bits(mu).unwrap();
            let env = encode(&m, &k, &mut seeded_source(seed ^ 0xABCD)).unwrap();
            prop_assert_eq!(&decode(&env, &k, None).unwrap(), &m);
            let raw = seeded_source(seed ^ 0xABCD).next_bits(env.cipher.len()).unwrap();
            let pos: std::collections::HashSet<u64> = insertion_positions(&k, mu as u64).into_iter().collect();
            for i in 1..=env.cipher.len() {
                if !pos.contains(&(i as u64)) {
                    prop_assert_eq!(env.cipher.get(i).unwrap(), raw.get(i).unwrap());
                }
            }
        }

        #[test]
        fn max_fit_is_tight(d in proptest::collection::vec(1u8..=9, 1..10), len in 0u64..400) {
            prop_assume!(d.iter().any(|&x| x != 1));
            let k = Key::new(Base::Decimal, d).unwrap();
            let m = max_message_len(&k, len);
            prop_assert!(cipher_length(&k, m) <= len);
            prop_assert!(cipher_length(&k, m + 1) > len);
        }
    }
}
