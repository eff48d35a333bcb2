//! Shared fixtures: the 64-bit reference string, its known graph structure,
//! and brute-force oracles kept independent of the library internals.
//!
//! Not every test target uses every helper.
#![allow(dead_code)]

use bdz::levelstrings::LevelSymbol;
use bdz::robdd::DyadicCore;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The 64-bit reference input whose graph, levels, and codeword sections are
/// pinned throughout the golden tests.
pub const REFERENCE64: &str = concat!(
    "0000000001010101",
    "0011001101110111",
    "0000111101011111",
    "0011111101111111"
);

/// Levels of the 16 reference vertices, indexed by canonical id.
pub const REFERENCE64_LEVELS: [u32; 16] = [1, 2, 2, 3, 3, 3, 3, 7, 6, 5, 5, 4, 4, 4, 4, 7];

/// Edge list of the reference graph: (vertex, lo, hi).
pub const REFERENCE64_EDGES: [(u32, u32, u32); 14] = [
    (1, 2, 3),
    (2, 4, 5),
    (3, 6, 7),
    (4, 8, 9),
    (5, 10, 11),
    (6, 12, 13),
    (7, 14, 15),
    (9, 8, 16),
    (10, 8, 16),
    (11, 9, 16),
    (12, 8, 16),
    (13, 9, 16),
    (14, 10, 16),
    (15, 11, 16),
];

pub fn reference_core() -> DyadicCore {
    DyadicCore::from_str01(REFERENCE64).unwrap()
}

pub fn bits_of(s: &str) -> Vec<u8> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| (c == '1') as u8)
        .collect()
}

pub fn string_of(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

/// Shorthand for building a level string from (index, power) pairs.
pub fn syms(pairs: &[(u32, u32)]) -> Vec<LevelSymbol> {
    pairs.iter().map(|&(m, q)| LevelSymbol::new(m, q)).collect()
}

/// Uniform random bit string of length `n`.
pub fn random_bits(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut packed = vec![0u8; n.div_ceil(8)];
    rng.fill_bytes(&mut packed);
    let mut bits = bdz::coder::bits_from_bytes(&packed);
    bits.truncate(n);
    bits
}

/// Random member of the dyadic domain: power-of-two length `2^k`, halves
/// forced to differ by resampling.
pub fn random_dyadic(k: u32, seed: u64) -> DyadicCore {
    let n = 1usize << k;
    for attempt in 0..u64::MAX {
        let bits = random_bits(n, seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9)));
        if let Ok(core) = DyadicCore::new(bits) {
            return core;
        }
    }
    unreachable!("a random string repeats its halves with vanishing probability")
}

/// Brute-force vertex-count oracle: distinct blocks over the power-of-two
/// partitions whose halves differ, plus the two terminals.
pub fn brute_force_vertex_count(x: &DyadicCore) -> usize {
    let bits = x.bits();
    let mut primitive: std::collections::HashSet<&[u8]> = std::collections::HashSet::new();
    for j in 1..=x.k() {
        let blen = 1usize << j;
        for block in bits.chunks_exact(blen) {
            if block[..blen / 2] != block[blen / 2..] {
                primitive.insert(block);
            }
        }
    }
    primitive.len() + 2
}

/// Brute-force quasi-reduced count: all distinct blocks over all partitions.
pub fn brute_force_quasi_count(x: &DyadicCore) -> usize {
    let bits = x.bits();
    let mut total = 0usize;
    for j in 0..=x.k() {
        let blen = 1usize << j;
        let set: std::collections::HashSet<&[u8]> = bits.chunks_exact(blen).collect();
        total += set.len();
    }
    total
}
