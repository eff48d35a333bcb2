//! Lossless compression of bit strings through reduced ordered binary decision
//! diagrams (ROBDDs).
//!
//! A bit string whose length is a power of two is the truth table of a Boolean
//! function; that function has a unique minimal level-labelled DAG
//! representation, and the string can be recovered from the DAG. This crate
//! compresses strings by building that DAG ([`robdd`]), flattening it into a
//! sequence of per-level symbol strings ([`levelstrings`]), and serializing the
//! level-to-level transitions with frequency runs, type flags, unary powers and
//! enumerative permutation ranks ([`coder`]). A small container format lifts
//! the codec to arbitrary bit strings. [`source`] provides finite-state binary
//! sources for measuring coding redundancy.
//!
//! ```
//! let bits: Vec<u8> = (0..512).map(|i| ((i * 31 + 7) >> 3) & 1).collect();
//! let packed = bdz::coder::encode(&bits).unwrap();
//! assert_eq!(bdz::coder::decode(&packed).unwrap(), bits);
//! ```

pub mod coder;
mod error;
pub(crate) mod fasthash;
pub mod levelstrings;
pub mod robdd;
pub mod source;

pub use error::{Error, Result};
pub use coder::{decode, encode, encode_with_stats};
pub use robdd::{build_robdd, DyadicCore, Robdd, VertexId};
