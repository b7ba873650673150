use std::convert::Infallible;
use std::io;

use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("requested {requested} bits but only {available} are available")]
    Length { requested: u64, available: u64 },

    #[error("bit index {index} out of range 1..={len}")]
    Index { index: u64, len: u64 },

    #[error("entropy source underrun: requested {requested} bits, {remaining} remaining")]
    Underrun { requested: u64, remaining: u64 },

    #[error("unsupported radix {0}; expected one of 3, 4, 8, 10, 16")]
    InvalidBase(u32),

    #[error("key digit {digit} is not valid for radix {radix}")]
    InvalidDigit { digit: u32, radix: u32 },

    #[error("key must contain at least one digit")]
    EmptyKey,

    #[error("key consists only of ones")]
    DegenerateKey,

    #[error("entropy produced no valid key digits")]
    InsufficientEntropy,

    #[error("malformed key file: {0}")]
    KeyFormat(String),

    #[error("malformed cipher container: {0}")]
    Container(String),

    #[error("message of {mu} bits needs cipher position {needed}, cipher has {available} bits")]
    Range { mu: u64, needed: u64, available: u64 },

    #[error("stream error at bit offset {offset}: {source}")]
    Stream {
        offset: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("key space of {count} keys exceeds enumeration cap of {cap}")]
    KeySpaceTooLarge { count: BigUint, cap: u64 },

    #[error("need at least {min} bits for a meaningful statistic, got {len}")]
    InsufficientData { len: u64, min: u64 },

    #[error("byte 0x{0:02x} is not 7-bit ASCII")]
    Encoding(u8),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn at_offset(self, offset: u64) -> Self {
        Error::Stream {
            offset,
            source: Box::new(self),
        }
    }
}

impl From<Infallible> for Error {
    fn from(e: Infallible) -> Self {
        match e {}
    }
}
