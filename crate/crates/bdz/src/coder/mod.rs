//! Bit-exact serialization of level strings and the container format.
//!
//! Per level the encoder emits five sections: frequency runs, type flags,
//! unary powers for new symbols, and enumerative permutation ranks for the
//! repeated-known and repeated-new subsequences. [`encode`]/[`decode`] wrap
//! the level sections in a small container that extends the codec from dyadic
//! strings to arbitrary bit strings.

mod bits;
mod container;
mod enumerative;
mod level_codec;
mod nat;

pub use bits::{bits_from_bytes, bytes_from_bits, elias_gamma, BitReader, BitWriter};
pub use container::{decode, encode, encode_with_stats, EncodeStats, MAGIC};
pub use enumerative::{
    entropy, first_strike, rank_multiset_perm, unrank_multiset_perm, Composition,
};
pub use level_codec::{decode_level, encode_level, section_budgets, SectionBudget};
pub use nat::Nat;
