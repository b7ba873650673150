//! Hides message bits inside a stream of random bits.
//!
//! A key is a short list of non-zero step sizes. Starting from the beginning
//! of a random bit stream, the encoder skips ahead by the next step and
//! overwrites that bit with the next message bit, cycling through the key as
//! often as needed. Anyone holding the key can read the message back; without
//! it the cipher is a random-looking bit string with no arithmetic structure
//! to attack, leaving exhaustive key search.
//!
//! Modules:
//! - [`bitstream`]: 1-indexed bit strings, MSB-first packing, bit I/O
//! - [`entropy`]: random bit sources (OS, file, seeded xorshift64*)
//! - [`keygen`]: counting systems and key derivation from entropy
//! - [`cipher`]: embedding, extraction, streaming, container format
//! - [`analysis`]: key-space figures, brute force, randomness tests, sizing

pub mod analysis;
pub mod bitstream;
pub mod cipher;
pub mod entropy;
pub mod error;
pub mod keygen;

pub use bitstream::BitString;
pub use cipher::{decode, encode, CipherEnvelope};
pub use entropy::EntropySource;
pub use error::{Error, Result};
pub use keygen::{Base, Key};
