//! Per-level sections: frequency runs, type flags, unary powers, and
//! permutation ranks.
//!
//! Knowing `S_{i-1}`, both sides can lay out the skeleton of `S_i`: the
//! forced power-decrement entries and the positions of the substituted part.
//! The encoder then sends, in order: (1) one frequency run per distinct
//! symbol — forced symbols in skeleton order, then new symbols in index
//! order — totalling `|S_i|` bits; (2) one flag per substituted entry, 0 for
//! a repeated-known entry, 1 for a new-vertex entry; (3) the power of each
//! distinct new symbol in unary; (4) the rank of the repeated-known
//! subsequence; (5) for the new-symbol subsequence, nothing when it is forced
//! by its counts, otherwise first-appearance flags plus the rank of its
//! first-strike reduction.

use super::bits::{BitReader, BitWriter};
use super::enumerative::{rank_multiset_perm, unrank_multiset_perm, Composition};
use super::nat::Nat;
use crate::error::{Error, Result};
use crate::levelstrings::{
    decompose_level, skeleton, EntryKind, LevelStrings, LevelSymbol, Slot,
};

/// Exact bit budget of one encoded level, plus the entropies behind the rank
/// widths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionBudget {
    /// Frequency-run bits: `|S_i|`.
    pub freq_bits: u64,
    /// Type-flag bits: `|hat S_i|`.
    pub type_bits: u64,
    /// Unary power bits: `Q_i`.
    pub power_bits: u64,
    /// Rank width of the repeated-known subsequence.
    pub rank1_bits: u64,
    /// First-appearance flag bits (0 when the new-symbol part is forced).
    pub fa_bits: u64,
    /// Rank width of the first-strike new-symbol subsequence.
    pub rank2_bits: u64,
    /// Entropy behind `rank1_bits`.
    pub h_pi1: f64,
    /// Entropy behind `rank2_bits`.
    pub h_pi2_tilde: f64,
}

impl SectionBudget {
    /// The five-term per-level bit count (excludes first-appearance flags).
    pub fn paper_m(&self) -> u64 {
        self.freq_bits + self.type_bits + self.power_bits + self.rank1_bits + self.rank2_bits
    }

    /// Bits actually emitted for this level.
    pub fn actual_bits(&self) -> u64 {
        self.paper_m() + self.fa_bits
    }
}

/// Everything both codec sides derive per level before touching rank bits.
struct LevelPlan {
    /// Forced symbols in skeleton order with their total counts in `S_i`.
    known_counts: Vec<u32>,
    /// Distinct new symbols in index order with their counts.
    new_counts: Vec<u32>,
    new_symbols: Vec<LevelSymbol>,
}

impl LevelPlan {
    fn pi1_composition(&self, known: &[LevelSymbol]) -> Result<Composition<LevelSymbol>> {
        Composition::new(
            known
                .iter()
                .zip(&self.known_counts)
                .filter(|(_, &c)| c > 1)
                .map(|(s, &c)| (*s, c - 1))
                .collect(),
        )
    }

    fn pi2_tilde_composition(&self) -> Result<Composition<LevelSymbol>> {
        Composition::new(
            self.new_symbols
                .iter()
                .zip(&self.new_counts)
                .filter(|(_, &c)| c > 1)
                .map(|(s, &c)| (*s, c - 1))
                .collect(),
        )
    }

    fn pi2_len(&self) -> u64 {
        self.new_counts.iter().map(|&c| c as u64).sum()
    }

    /// The new-symbol subsequence is fully determined by its counts when
    /// there is at most one distinct symbol or no symbol repeats.
    fn pi2_forced(&self) -> bool {
        self.new_symbols.len() <= 1 || self.new_counts.iter().all(|&c| c == 1)
    }
}

/// Serialize the transition `S_{i-1} -> S_i`. Returns the exact bit budget.
pub fn encode_level(
    s_prev: &[LevelSymbol],
    s_cur: &[LevelSymbol],
    w: &mut BitWriter,
) -> Result<SectionBudget> {
    let sk = skeleton(s_prev);
    let d = decompose_level(s_prev, s_cur)?;
    let start_bits = w.bit_len() as u64;

    // Total count per symbol. Power coherence makes vertex index a valid key.
    let max_m = s_cur.iter().map(|s| s.m).max().unwrap_or(0) as usize;
    let mut count_of = vec![0u32; max_m + 1];
    for sym in s_cur {
        count_of[sym.m as usize] += 1;
    }
    let plan = LevelPlan {
        known_counts: sk.known.iter().map(|s| count_of[s.m as usize]).collect(),
        new_counts: d
            .new_symbols
            .iter()
            .map(|s| count_of[s.m as usize])
            .collect(),
        new_symbols: d.new_symbols.clone(),
    };

    // (1) frequency runs
    for &c in plan.known_counts.iter().chain(&plan.new_counts) {
        w.write_run(c as usize - 1);
    }

    // (2) type flags
    for kind in &d.kinds {
        w.write_bit(match kind {
            EntryKind::TypeI => 0,
            EntryKind::TypeII => 1,
        });
    }

    // (3) unary powers of the distinct new symbols
    for sym in &plan.new_symbols {
        w.write_run(sym.q as usize - 1);
    }

    // (4) rank of the repeated-known subsequence
    let pi1_comp = plan.pi1_composition(&sk.known)?;
    let (rank1, rank1_bits) = rank_multiset_perm(&d.pi1, &pi1_comp)?;
    rank1.write_bits_be(rank1_bits, w);

    // (5) new-symbol subsequence, unless forced by its counts
    let mut fa_bits = 0u64;
    let pi2_tilde_comp = plan.pi2_tilde_composition()?;
    let (rank2_bits, h_pi2_tilde);
    if plan.pi2_forced() {
        rank2_bits = pi2_tilde_comp.rank_width() as u64;
        debug_assert_eq!(rank2_bits, 0);
        h_pi2_tilde = pi2_tilde_comp.entropy();
    } else {
        let mut first = std::collections::HashSet::new();
        for sym in &d.pi2 {
            w.write_bit(u8::from(first.insert(sym.m)));
        }
        fa_bits = d.pi2.len() as u64;
        let pi2_tilde: Vec<LevelSymbol> = super::enumerative::first_strike(&d.pi2);
        let (rank2, width2) = rank_multiset_perm(&pi2_tilde, &pi2_tilde_comp)?;
        rank2.write_bits_be(width2, w);
        rank2_bits = width2 as u64;
        h_pi2_tilde = pi2_tilde_comp.entropy();
    }

    let budget = SectionBudget {
        freq_bits: s_cur.len() as u64,
        type_bits: d.hat.len() as u64,
        power_bits: d.q_sum,
        rank1_bits: rank1_bits as u64,
        fa_bits,
        rank2_bits,
        h_pi1: pi1_comp.entropy(),
        h_pi2_tilde,
    };
    debug_assert_eq!(w.bit_len() as u64 - start_bits, budget.actual_bits());
    Ok(budget)
}

/// Decode `S_i` given `S_{i-1}`.
///
/// `base_index` is the highest vertex index seen in `S_1, ..., S_{i-1}`
/// (new symbols continue the numbering from there); `max_power` bounds the
/// unary power runs (a power-q symbol in `S_i` lives at level `i + q - 1`,
/// which cannot exceed the terminal level).
pub fn decode_level(
    s_prev: &[LevelSymbol],
    base_index: u32,
    max_power: u32,
    r: &mut BitReader,
) -> Result<Vec<LevelSymbol>> {
    let sk = skeleton(s_prev);

    // (1) frequency runs: forced symbols first, then one run per new symbol
    // until the counts fill |S_i|. Each run is capped so that every still
    // unread forced symbol keeps at least one slot.
    let mut known_counts = Vec::with_capacity(sk.known.len());
    let mut used = 0usize;
    for t in 0..sk.known.len() {
        let reserved = sk.known.len() - 1 - t;
        let capacity = sk.s_len - used - reserved;
        let c = r.read_run(capacity - 1)? + 1;
        used += c;
        known_counts.push(c as u32);
    }
    let mut new_counts: Vec<u32> = Vec::new();
    while used < sk.s_len {
        let c = r.read_run(sk.s_len - used - 1)? + 1;
        used += c;
        new_counts.push(c as u32);
    }

    // Counts of substituted entries per class.
    let pi1_len: u64 = known_counts.iter().map(|&c| (c - 1) as u64).sum();
    let pi2_len: u64 = new_counts.iter().map(|&c| c as u64).sum();
    if pi1_len + pi2_len != sk.hat_len as u64 {
        return Err(Error::corrupt(
            "frequency runs disagree with the substituted length",
        ));
    }

    // (2) type flags
    let mut kinds = Vec::with_capacity(sk.hat_len);
    let (mut ones, mut zeros) = (0u64, 0u64);
    for _ in 0..sk.hat_len {
        let bit = r.read_bit()?;
        if bit == 1 {
            ones += 1;
        } else {
            zeros += 1;
        }
        kinds.push(bit);
    }
    if zeros != pi1_len || ones != pi2_len {
        return Err(Error::corrupt("type flags disagree with the frequency runs"));
    }

    // (3) powers of the distinct new symbols, indices continuing the numbering
    let mut new_symbols = Vec::with_capacity(new_counts.len());
    for (t, _) in new_counts.iter().enumerate() {
        let q = r.read_run(max_power as usize - 1)? as u32 + 1;
        new_symbols.push(LevelSymbol::new(base_index + 1 + t as u32, q));
    }
    let plan = LevelPlan {
        known_counts,
        new_counts,
        new_symbols,
    };

    // (4) repeated-known subsequence
    let pi1_comp = plan.pi1_composition(&sk.known)?;
    let rank1 = Nat::read_bits_be(pi1_comp.rank_width(), r)?;
    let pi1 = unrank_multiset_perm(&rank1, &pi1_comp)?;

    // (5) new-symbol subsequence
    let pi2: Vec<LevelSymbol> = if plan.pi2_forced() {
        plan.new_symbols
            .iter()
            .zip(&plan.new_counts)
            .flat_map(|(&s, &c)| std::iter::repeat(s).take(c as usize))
            .collect()
    } else {
        let mut flags = Vec::with_capacity(plan.pi2_len() as usize);
        let mut flag_ones = 0usize;
        for _ in 0..plan.pi2_len() {
            let bit = r.read_bit()?;
            flag_ones += bit as usize;
            flags.push(bit);
        }
        if flag_ones != plan.new_symbols.len() {
            return Err(Error::corrupt(
                "first-appearance flags disagree with the new-symbol count",
            ));
        }
        if flags.first() != Some(&1) {
            return Err(Error::corrupt("new-symbol subsequence must open with a first appearance"));
        }
        let tilde_comp = plan.pi2_tilde_composition()?;
        let rank2 = Nat::read_bits_be(tilde_comp.rank_width(), r)?;
        let tilde = unrank_multiset_perm(&rank2, &tilde_comp)?;
        let mut firsts = plan.new_symbols.iter();
        let mut repeats = tilde.iter();
        flags
            .iter()
            .map(|&f| {
                if f == 1 {
                    *firsts.next().expect("one first appearance per new symbol")
                } else {
                    *repeats.next().expect("counts fixed the repeat total")
                }
            })
            .collect()
    };

    // Interleave the two subsequences by type flag, then fill the skeleton.
    let mut pi1_iter = pi1.iter();
    let mut pi2_iter = pi2.iter();
    let mut hat = Vec::with_capacity(sk.hat_len);
    for &kind in &kinds {
        let sym = if kind == 0 {
            pi1_iter.next().expect("flag counts were validated")
        } else {
            pi2_iter.next().expect("flag counts were validated")
        };
        hat.push(*sym);
    }

    let mut hat_iter = hat.iter();
    let mut s_cur = Vec::with_capacity(sk.s_len);
    for slot in &sk.slots {
        match *slot {
            Slot::Known(sym) => s_cur.push(sym),
            Slot::Pair(_) => {
                s_cur.push(*hat_iter.next().expect("hat length matches the skeleton"));
                s_cur.push(*hat_iter.next().expect("hat length matches the skeleton"));
            }
        }
    }
    Ok(s_cur)
}

/// Per-level budgets of a full set of level strings, without emitting bits.
pub fn section_budgets(ls: &LevelStrings) -> Result<Vec<SectionBudget>> {
    let mut budgets = Vec::with_capacity(ls.k() as usize);
    for i in 2..=ls.k() + 1 {
        let s_prev = ls.string(i - 1);
        let s_cur = ls.string(i);
        let sk = skeleton(s_prev);
        let d = decompose_level(s_prev, s_cur)?;

        let max_m = s_cur.iter().map(|s| s.m).max().unwrap_or(0) as usize;
        let mut count_of = vec![0u32; max_m + 1];
        for sym in s_cur {
            count_of[sym.m as usize] += 1;
        }
        let plan = LevelPlan {
            known_counts: sk.known.iter().map(|s| count_of[s.m as usize]).collect(),
            new_counts: d
                .new_symbols
                .iter()
                .map(|s| count_of[s.m as usize])
                .collect(),
            new_symbols: d.new_symbols.clone(),
        };
        let pi1_comp = plan.pi1_composition(&sk.known)?;
        let pi2_tilde_comp = plan.pi2_tilde_composition()?;
        budgets.push(SectionBudget {
            freq_bits: s_cur.len() as u64,
            type_bits: d.hat.len() as u64,
            power_bits: d.q_sum,
            rank1_bits: pi1_comp.rank_width() as u64,
            fa_bits: if plan.pi2_forced() { 0 } else { plan.pi2_len() },
            rank2_bits: pi2_tilde_comp.rank_width() as u64,
            h_pi1: pi1_comp.entropy(),
            h_pi2_tilde: pi2_tilde_comp.entropy(),
        });
    }
    Ok(budgets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levelstrings::generate_levels;
    use crate::robdd::{build_robdd, DyadicCore};

    fn sym(m: u32, q: u32) -> LevelSymbol {
        LevelSymbol::new(m, q)
    }

    fn collect_bits(w: BitWriter) -> Vec<u8> {
        let len = w.bit_len();
        let bytes = w.finish();
        let mut r = BitReader::new(&bytes);
        (0..len).map(|_| r.read_bit().unwrap()).collect()
    }

    #[test]
    fn first_transition_of_the_smallest_graph() {
        // S_1 -> S_2 for the "01" graph: both children new, all counts 1.
        let s1 = vec![sym(1, 1)];
        let s2 = vec![sym(2, 1), sym(3, 1)];
        let mut w = BitWriter::new();
        let budget = encode_level(&s1, &s2, &mut w).unwrap();
        assert_eq!(collect_bits(w), vec![1, 1, 1, 1, 1, 1]);
        assert_eq!(budget.freq_bits, 2);
        assert_eq!(budget.type_bits, 2);
        assert_eq!(budget.power_bits, 2);
        assert_eq!(budget.rank1_bits, 0);
        assert_eq!(budget.fa_bits, 0);
        assert_eq!(budget.rank2_bits, 0);
        assert_eq!(budget.paper_m(), 6);
        assert_eq!(budget.actual_bits(), 6);
    }

    #[test]
    fn decode_inverts_encode_per_level() {
        for s in ["01", "0110", "00010111", "0011010111110010"] {
            let g = build_robdd(&DyadicCore::from_str01(s).unwrap());
            let ls = generate_levels(&g);
            for i in 2..=ls.k() + 1 {
                let mut w = BitWriter::new();
                encode_level(ls.string(i - 1), ls.string(i), &mut w).unwrap();
                let bytes = w.finish();
                let mut r = BitReader::new(&bytes);
                let base = ls.all()[..i as usize - 1]
                    .iter()
                    .flatten()
                    .map(|s| s.m)
                    .max()
                    .unwrap();
                let decoded =
                    decode_level(ls.string(i - 1), base, ls.k() + 2 - i, &mut r).unwrap();
                assert_eq!(decoded, ls.string(i), "level {i} of {s}");
            }
        }
    }

    #[test]
    fn truncated_stream_is_corrupt() {
        let s1 = vec![sym(1, 1)];
        let s2 = vec![sym(2, 1), sym(3, 1)];
        let mut w = BitWriter::new();
        encode_level(&s1, &s2, &mut w).unwrap();
        let bit_len = w.bit_len();
        let bytes = w.finish();
        // drop the final bits by shortening the byte buffer
        assert!(bit_len <= 8);
        let mut r = BitReader::new(&bytes[..0]);
        let err = decode_level(&s1, 1, 1, &mut r).unwrap_err();
        assert!(err.is_corrupt());
    }

    #[test]
    fn budgets_match_emission() {
        for s in ["0110", "0011010111110010", "0001001000110100"] {
            let g = build_robdd(&DyadicCore::from_str01(s).unwrap());
            let ls = generate_levels(&g);
            let budgets = section_budgets(&ls).unwrap();
            for (bi, i) in (2..=ls.k() + 1).enumerate() {
                let mut w = BitWriter::new();
                let emitted = encode_level(ls.string(i - 1), ls.string(i), &mut w).unwrap();
                assert_eq!(w.bit_len() as u64, emitted.actual_bits());
                assert_eq!(emitted, budgets[bi], "level {i} of {s}");
            }
        }
    }
}
