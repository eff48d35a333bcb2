//! The byte container: magic, gamma-coded length, periodic reduction, and the
//! level sections.
//!
//! Layout after the 4 magic bytes, packed MSB-first and zero-padded to a byte
//! boundary:
//!
//! - gamma(n), the original bit length;
//! - the input zero-padded to length `2^ceil(log2(max(n, 2)))`, then halved
//!   `e` times while both halves coincide; gamma(e + 1);
//! - a single literal bit when the remaining core is one bit long, otherwise
//!   one terminal-assignment bit (0 means the terminal with the smaller
//!   canonical index expands to "0") followed by the level sections for
//!   `i = 2 ... k+1`.
//!
//! This layout is the wire contract; golden tests pin it bit for bit.

use super::bits::{BitReader, BitWriter};
use super::level_codec::{decode_level, encode_level, SectionBudget};
use crate::error::{Error, Result};
use crate::levelstrings::{generate_levels, rebuild_graph, LevelStrings, LevelSymbol};
use crate::robdd::{build_robdd, expand, DyadicCore};

pub const MAGIC: [u8; 4] = *b"BDZ1";

/// Inputs (and decoded lengths) are capped so everything stays addressable
/// with 32-bit vertex ids.
const MAX_LEN_BITS: u64 = 1 << 31;

/// Per-encoding accounting: container geometry, per-level budgets, and the
/// split between body bits (terminal/literal bit plus sections) and container
/// overhead (magic, gamma headers, final padding).
#[derive(Clone, Debug)]
pub struct EncodeStats {
    pub n: u64,
    /// `2^pad_exp` is the padded length.
    pub pad_exp: u32,
    pub padded_len: u64,
    /// Halvings applied while both halves coincided.
    pub reduce_exp: u32,
    pub core_len: u64,
    /// `log2(core_len)`; 0 means the constant-core literal path.
    pub core_k: u32,
    pub constant: bool,
    pub terminal_bit: Option<u8>,
    /// Reduced-graph vertex count (0 on the literal path).
    pub vertex_count: u64,
    /// `|S_1| + ... + |S_{k+1}|` (0 on the literal path).
    pub sum_s: u64,
    pub budgets: Vec<SectionBudget>,
    pub body_bits: u64,
    pub container_bits: u64,
    pub total_bits: u64,
}

impl EncodeStats {
    /// `4 * sum |S_i| + sum(rank widths)` — the coarse upper bound the body
    /// bits must respect on the dyadic path.
    pub fn coarse_bound_bits(&self) -> u64 {
        4 * self.sum_s
            + self
                .budgets
                .iter()
                .map(|b| b.rank1_bits + b.rank2_bits)
                .sum::<u64>()
    }

    pub fn paper_m_total(&self) -> u64 {
        self.budgets.iter().map(|b| b.paper_m()).sum()
    }
}

/// Compress a bit string (one bit per byte, values 0/1).
pub fn encode(bits: &[u8]) -> Result<Vec<u8>> {
    encode_with_stats(bits).map(|(bytes, _)| bytes)
}

pub fn encode_with_stats(bits: &[u8]) -> Result<(Vec<u8>, EncodeStats)> {
    let n = bits.len() as u64;
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if n > MAX_LEN_BITS {
        return Err(Error::domain(format!("input exceeds {MAX_LEN_BITS} bits")));
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::domain("bits must be 0 or 1"));
    }

    let pad_exp = ceil_log2(n.max(2));
    let padded_len = 1usize << pad_exp;
    let mut padded = Vec::with_capacity(padded_len);
    padded.extend_from_slice(bits);
    padded.resize(padded_len, 0);

    let mut core_len = padded_len;
    let mut reduce_exp = 0u32;
    while core_len > 1 && padded[..core_len / 2] == padded[core_len / 2..core_len] {
        core_len /= 2;
        reduce_exp += 1;
    }

    let mut w = BitWriter::new();
    w.write_gamma(n)?;
    w.write_gamma(reduce_exp as u64 + 1)?;
    let body_start = w.bit_len() as u64;

    let (constant, terminal_bit, vertex_count, sum_s, budgets);
    if core_len == 1 {
        w.write_bit(padded[0]);
        constant = true;
        terminal_bit = None;
        vertex_count = 0;
        sum_s = 0;
        budgets = Vec::new();
    } else {
        let core = DyadicCore::new(padded[..core_len].to_vec())
            .expect("halving stopped at differing halves");
        let g = build_robdd(&core);
        let ls = generate_levels(&g);
        let tbit = u8::from(g.terminal0().0 > g.terminal1().0);
        w.write_bit(tbit);
        let mut bs = Vec::with_capacity(ls.k() as usize);
        for i in 2..=ls.k() + 1 {
            bs.push(encode_level(ls.string(i - 1), ls.string(i), &mut w)?);
        }
        constant = false;
        terminal_bit = Some(tbit);
        vertex_count = g.vertex_count() as u64;
        sum_s = ls.total_len();
        budgets = bs;
    }

    let body_bits = w.bit_len() as u64 - body_start;
    let mut out = MAGIC.to_vec();
    out.extend_from_slice(&w.finish());
    let total_bits = out.len() as u64 * 8;

    let stats = EncodeStats {
        n,
        pad_exp,
        padded_len: padded_len as u64,
        reduce_exp,
        core_len: core_len as u64,
        core_k: pad_exp - reduce_exp,
        constant,
        terminal_bit,
        vertex_count,
        sum_s,
        budgets,
        body_bits,
        container_bits: total_bits - body_bits,
        total_bits,
    };
    Ok((out, stats))
}

/// Decompress a container back into the original bit string.
pub fn decode(bytes: &[u8]) -> Result<Vec<u8>> {
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        return Err(Error::corrupt("missing container magic"));
    }
    let mut r = BitReader::new(&bytes[4..]);
    let n = r.read_gamma()?;
    if n > MAX_LEN_BITS {
        return Err(Error::corrupt("declared length out of range"));
    }
    let pad_exp = ceil_log2(n.max(2));
    let reduce_exp = r.read_gamma()? - 1;
    if reduce_exp > pad_exp as u64 {
        return Err(Error::corrupt("reduction exponent exceeds the padded length"));
    }
    let core_k = pad_exp - reduce_exp as u32;

    let core: Vec<u8> = if core_k == 0 {
        vec![r.read_bit()?]
    } else {
        let terminal_bit = r.read_bit()?;
        let mut strings = vec![vec![LevelSymbol::bare(1)]];
        let mut base = 1u32;
        for i in 2..=core_k + 1 {
            let s = decode_level(strings.last().unwrap(), base, core_k + 2 - i, &mut r)?;
            for sym in &s {
                base = base.max(sym.m);
            }
            strings.push(s);
        }
        let ls = LevelStrings::from_strings(strings)
            .map_err(|e| Error::corrupt(e.to_string()))?;
        let g = rebuild_graph(&ls, terminal_bit).map_err(|e| Error::corrupt(e.to_string()))?;
        expand(&g, g.root()).expect("root is a valid vertex")
    };

    // Only zero padding may remain.
    if r.remaining() >= 8 {
        return Err(Error::corrupt("trailing data after the codeword"));
    }
    while r.remaining() > 0 {
        if r.read_bit()? != 0 {
            return Err(Error::corrupt("nonzero padding"));
        }
    }

    // Undo the periodic reduction, then the zero padding.
    let padded_len = 1usize << pad_exp;
    let mut full = core;
    while full.len() < padded_len {
        let take = full.len().min(padded_len - full.len());
        full.extend_from_within(..take);
    }
    if full[n as usize..].iter().any(|&b| b != 0) {
        return Err(Error::corrupt("pad region is not zero"));
    }
    full.truncate(n as usize);
    Ok(full)
}

fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}
