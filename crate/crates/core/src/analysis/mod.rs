//! Key-space figures, exhaustive search, randomness tests and entropy sizing.

pub mod attack;
pub mod keyspace;
pub mod sizing;
pub mod stats;
pub mod tables;

pub use attack::{
    brute_force, key_at_index, partition, search_range, AttackConfig, AttackResult, Execution, KnownPlaintext,
    MessageTest, PrintableAscii, DEFAULT_MAX_KEYS,
};
pub use keyspace::{
    attack_time_estimate, key_space, key_space_for_key_bits, scientific, AttackTime, KeySpaceReport,
    SECONDS_PER_YEAR,
};
pub use sizing::{expansion_factor, simulate_expansion, throughput_requirement, ExpansionTrial};
pub use stats::{bit_balance, bit_balance_bytes, monobit_test, runs_test, BitBalance, BASIC_ASCII, MIN_TEST_BITS};
pub use tables::{tables, Table, TableKind, KEY_BITS};
