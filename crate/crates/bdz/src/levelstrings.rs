//! Level strings: the per-level symbol sequences that serialize a graph.
//!
//! A canonical graph flattens into strings `S_1 ... S_{k+1}` of (vertex,
//! power) symbols: `S_1` holds the root, and each `S_i` is generated from
//! `S_{i-1}` by writing, under the first appearance of every distinct symbol,
//! either the same vertex with its power decremented (power > 1) or the two
//! children with level-difference powers (power 1, i.e. the vertex lives at
//! level `i-1`). The encoder serializes each transition; [`rebuild_graph`]
//! inverts the whole stack back into a graph.

use std::fmt;

use crate::error::{Error, Result};
use crate::robdd::{expand, DyadicCore, Robdd, VertexId};

/// One entry of a level string: vertex `m` raised to power `q` (a power-`q`
/// entry in `S_i` means the vertex lives at level `i + q - 1`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct LevelSymbol {
    pub m: u32,
    pub q: u32,
}

impl LevelSymbol {
    pub fn new(m: u32, q: u32) -> Self {
        LevelSymbol { m, q }
    }

    pub fn bare(m: u32) -> Self {
        LevelSymbol { m, q: 1 }
    }
}

impl fmt::Display for LevelSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 1 {
            write!(f, "A{}", self.m)
        } else {
            write!(f, "A{}^{}", self.m, self.q)
        }
    }
}

/// The strings `S_1 ... S_{k+1}` of a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelStrings {
    strings: Vec<Vec<LevelSymbol>>,
    k: u32,
}

impl LevelStrings {
    /// Assemble from raw strings (used by the decoder); `strings[0]` must be
    /// the single root symbol.
    pub fn from_strings(strings: Vec<Vec<LevelSymbol>>) -> Result<Self> {
        if strings.len() < 2 {
            return Err(Error::structural("need at least S_1 and S_2"));
        }
        if strings[0] != vec![LevelSymbol::bare(1)] {
            return Err(Error::structural("S_1 must be the bare root symbol"));
        }
        let k = strings.len() as u32 - 1;
        Ok(LevelStrings { strings, k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `S_i` for `1 <= i <= k + 1`.
    pub fn string(&self, i: u32) -> &[LevelSymbol] {
        &self.strings[i as usize - 1]
    }

    pub fn all(&self) -> &[Vec<LevelSymbol>] {
        &self.strings
    }

    /// `|S_1| + ... + |S_{k+1}|`.
    pub fn total_len(&self) -> u64 {
        self.strings.iter().map(|s| s.len() as u64).sum()
    }
}

/// Entry class within the substituted part of a level string: `TypeI` entries
/// repeat a vertex already present in `S_{i-1}`, `TypeII` entries introduce a
/// new vertex index.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EntryKind {
    TypeI,
    TypeII,
}

/// The substituted part of `S_i`, split by entry class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelDecomposition {
    /// All child entries produced by bare symbols, in concatenation order.
    pub hat: Vec<LevelSymbol>,
    /// Class of each `hat` entry.
    pub kinds: Vec<EntryKind>,
    /// Subsequence of Type I entries.
    pub pi1: Vec<LevelSymbol>,
    /// Subsequence of Type II entries.
    pub pi2: Vec<LevelSymbol>,
    /// Distinct Type II symbols in first-appearance order (consecutive new
    /// vertex indices).
    pub new_symbols: Vec<LevelSymbol>,
    /// Sum of the powers of the distinct Type II symbols.
    pub q_sum: u64,
}

/// The part of `S_i` a decoder can lay out knowing only `S_{i-1}`: a slot per
/// first appearance in `S_{i-1}`, either a forced symbol (power decrement) or
/// a pair of unknown child entries.
#[derive(Clone, Debug)]
pub(crate) struct Skeleton {
    pub slots: Vec<Slot>,
    /// Forced symbols in slot order (pairwise distinct).
    pub known: Vec<LevelSymbol>,
    pub s_len: usize,
    pub hat_len: usize,
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Slot {
    Known(LevelSymbol),
    /// Two child entries of the given bare vertex.
    Pair(u32),
}

pub(crate) fn skeleton(s_prev: &[LevelSymbol]) -> Skeleton {
    let max_m = s_prev.iter().map(|s| s.m).max().unwrap_or(0) as usize;
    let mut seen = vec![false; max_m + 1];
    let mut slots = Vec::new();
    let mut known = Vec::new();
    let mut s_len = 0usize;
    let mut hat_len = 0usize;
    for sym in s_prev {
        if seen[sym.m as usize] {
            continue;
        }
        seen[sym.m as usize] = true;
        if sym.q > 1 {
            let fixed = LevelSymbol::new(sym.m, sym.q - 1);
            slots.push(Slot::Known(fixed));
            known.push(fixed);
            s_len += 1;
        } else {
            slots.push(Slot::Pair(sym.m));
            s_len += 2;
            hat_len += 2;
        }
    }
    Skeleton {
        slots,
        known,
        s_len,
        hat_len,
    }
}

/// Generate `S_1 ... S_{k+1}` from a canonical graph.
pub fn generate_levels(g: &Robdd) -> LevelStrings {
    let k = g.k();
    let j = g.vertex_count();
    let mut strings: Vec<Vec<LevelSymbol>> = Vec::with_capacity(k as usize + 1);
    strings.push(vec![LevelSymbol::bare(1)]);
    let mut seen_stamp = vec![0u32; j + 1];
    let mut max_seen = 1u32;

    for i in 2..=k + 1 {
        let prev = strings.last().unwrap();
        let mut next = Vec::with_capacity(prev.len() * 2);
        for sym in prev {
            if seen_stamp[sym.m as usize] == i {
                continue;
            }
            seen_stamp[sym.m as usize] = i;
            if sym.q > 1 {
                next.push(LevelSymbol::new(sym.m, sym.q - 1));
            } else {
                let (lo, hi) = g
                    .children(VertexId(sym.m))
                    .expect("valid id")
                    .expect("bare symbol below the terminal level is a nonterminal");
                let parent_level = i - 1;
                for child in [lo, hi] {
                    let level = g.level(child).expect("valid id");
                    next.push(LevelSymbol::new(child.0, level - parent_level));
                }
            }
        }
        // New vertex indices must continue the canonical numbering.
        for sym in &next {
            if sym.m > max_seen {
                debug_assert_eq!(sym.m, max_seen + 1, "first appearances are consecutive");
                max_seen = sym.m;
            }
        }
        strings.push(next);
    }

    debug_assert_eq!(max_seen as usize, j);
    LevelStrings {
        strings,
        k,
    }
}

/// Split `S_cur` (generated from `S_prev`) into its forced part and the
/// substituted part, classifying every substituted entry.
pub fn decompose_level(
    s_prev: &[LevelSymbol],
    s_cur: &[LevelSymbol],
) -> Result<LevelDecomposition> {
    let sk = skeleton(s_prev);
    if s_cur.len() != sk.s_len {
        return Err(Error::structural(format!(
            "expected |S_i| = {}, got {}",
            sk.s_len,
            s_cur.len()
        )));
    }

    let max_prev = s_prev.iter().map(|s| s.m).max().unwrap_or(0);
    let mut prev_power = vec![0u32; max_prev as usize + 1];
    for sym in s_prev {
        prev_power[sym.m as usize] = sym.q;
    }
    let in_prev = |m: u32| m <= max_prev && prev_power[m as usize] > 0;

    let mut hat = Vec::with_capacity(sk.hat_len);
    let mut kinds = Vec::with_capacity(sk.hat_len);
    let mut pi1 = Vec::new();
    let mut pi2 = Vec::new();
    let mut new_symbols: Vec<LevelSymbol> = Vec::new();
    let mut q_sum = 0u64;

    let mut pos = 0usize;
    for slot in &sk.slots {
        match *slot {
            Slot::Known(expected) => {
                if s_cur[pos] != expected {
                    return Err(Error::structural(format!(
                        "forced entry mismatch at position {pos}: expected {expected}, got {}",
                        s_cur[pos]
                    )));
                }
                pos += 1;
            }
            Slot::Pair(_) => {
                for _ in 0..2 {
                    let sym = s_cur[pos];
                    pos += 1;
                    hat.push(sym);
                    if in_prev(sym.m) {
                        // Power coherence: the same vertex appeared in S_{i-1}
                        // with the power one higher.
                        if prev_power[sym.m as usize] != sym.q + 1 {
                            return Err(Error::structural(format!(
                                "power of {sym} does not match its appearance in S_(i-1)"
                            )));
                        }
                        kinds.push(EntryKind::TypeI);
                        pi1.push(sym);
                    } else {
                        kinds.push(EntryKind::TypeII);
                        pi2.push(sym);
                        // New indices are consecutive, so they index directly
                        // into the first-appearance list.
                        if sym.m <= max_prev {
                            return Err(Error::structural(format!(
                                "new symbol A{} does not extend the numbering",
                                sym.m
                            )));
                        }
                        let first_new = new_symbols.first().map_or(sym.m, |s| s.m);
                        let Some(idx) = sym.m.checked_sub(first_new).map(|d| d as usize) else {
                            return Err(Error::structural(format!(
                                "new symbols must have consecutive indices, got A{}",
                                sym.m
                            )));
                        };
                        if idx < new_symbols.len() {
                            if new_symbols[idx].q != sym.q {
                                return Err(Error::structural(format!(
                                    "inconsistent powers for new symbol A{}",
                                    sym.m
                                )));
                            }
                        } else if idx == new_symbols.len() {
                            new_symbols.push(sym);
                            q_sum += sym.q as u64;
                        } else {
                            return Err(Error::structural(format!(
                                "new symbols must have consecutive indices, got A{}",
                                sym.m
                            )));
                        }
                    }
                }
            }
        }
    }

    // Every Type I symbol also occurs in the forced part (its decremented
    // source is a first appearance in S_{i-1}).
    debug_assert!(pi1.iter().all(|s| sk.known.contains(s)));

    Ok(LevelDecomposition {
        hat,
        kinds,
        pi1,
        pi2,
        new_symbols,
        q_sum,
    })
}

/// Rebuild the graph encoded by a full set of level strings.
///
/// Levels come from bare appearances (`L(A_m) = i` for the unique `S_i`
/// containing the bare symbol), edges from the two consecutive entries under
/// each bare nonterminal, and the two never-substituted symbols are the
/// terminals; `terminal_bit = 0` assigns value 0 to the one with the smaller
/// index.
pub fn rebuild_graph(ls: &LevelStrings, terminal_bit: u8) -> Result<Robdd> {
    let k = ls.k();
    let j = ls
        .all()
        .iter()
        .flatten()
        .map(|s| s.m)
        .max()
        .expect("level strings are nonempty") as usize;

    // Levels implied by every occurrence must agree.
    let mut levels = vec![0u32; j + 1];
    for (idx, s) in ls.all().iter().enumerate() {
        let i = idx as u32 + 1;
        for sym in s {
            if sym.m == 0 || sym.q == 0 {
                return Err(Error::structural("symbol indices and powers are 1-based"));
            }
            let implied = i + sym.q - 1;
            if implied > k + 1 {
                return Err(Error::structural(format!(
                    "{sym} in S_{i} would live below the terminal level"
                )));
            }
            let slot = &mut levels[sym.m as usize];
            if *slot == 0 {
                *slot = implied;
            } else if *slot != implied {
                return Err(Error::structural(format!("level conflict for A{}", sym.m)));
            }
        }
    }
    if let Some(m) = (1..=j).find(|&m| levels[m] == 0) {
        return Err(Error::structural(format!(
            "canonical numbering has a gap at A{m}"
        )));
    }

    // Edges from the slot structure of each transition.
    let mut edges: Vec<Option<(VertexId, VertexId)>> = vec![None; j];
    for i in 1..=k {
        let sk = skeleton(ls.string(i));
        let cur = ls.string(i + 1);
        if cur.len() != sk.s_len {
            return Err(Error::structural(format!(
                "|S_{}| = {} does not match the {} slots implied by S_{}",
                i + 1,
                cur.len(),
                sk.s_len,
                i
            )));
        }
        let mut pos = 0usize;
        for slot in &sk.slots {
            match *slot {
                Slot::Known(expected) => {
                    if cur[pos] != expected {
                        return Err(Error::structural(format!(
                            "S_{} position {pos} should be the forced entry {expected}",
                            i + 1
                        )));
                    }
                    pos += 1;
                }
                Slot::Pair(parent) => {
                    let lo = cur[pos];
                    let hi = cur[pos + 1];
                    pos += 2;
                    if lo.m == hi.m {
                        return Err(Error::structural(format!(
                            "A{parent} has identical children"
                        )));
                    }
                    edges[parent as usize - 1] = Some((VertexId(lo.m), VertexId(hi.m)));
                }
            }
        }
    }

    // Terminals: never substituted, i.e. bare only in S_{k+1}.
    let terminals: Vec<u32> = (1..=j as u32)
        .filter(|&m| edges[m as usize - 1].is_none())
        .collect();
    if terminals.len() != 2 {
        return Err(Error::structural(format!(
            "expected 2 terminal symbols, found {}",
            terminals.len()
        )));
    }
    let terminal0 = if terminal_bit == 0 {
        VertexId(terminals[0])
    } else {
        VertexId(terminals[1])
    };

    Robdd::from_parts(k, levels[1..].to_vec(), edges, terminal0)
}

/// The string-level counterpart of the level strings, built directly from the
/// input without the graph: for each scale, list the distinct blocks of
/// length `2^(k-i+2)` in first-appearance order and replace each by its two
/// halves (halves differing) or its left half (halves equal).
///
/// Index `[0]` of the result corresponds to `i = 2`, the last to `i = k + 1`.
pub fn build_v_sequences(x: &DyadicCore) -> Vec<Vec<Vec<u8>>> {
    let k = x.k();
    let bits = x.bits();
    let mut result = Vec::with_capacity(k as usize);
    for i in 2..=k + 1 {
        let blen = 1usize << (k + 2 - i);
        let mut seen: std::collections::HashSet<&[u8]> = std::collections::HashSet::new();
        let mut v: Vec<Vec<u8>> = Vec::new();
        for block in bits.chunks_exact(blen) {
            if !seen.insert(block) {
                continue;
            }
            let (left, right) = block.split_at(blen / 2);
            if left == right {
                v.push(left.to_vec());
            } else {
                v.push(left.to_vec());
                v.push(right.to_vec());
            }
        }
        result.push(v);
    }
    result
}

/// The expansion a symbol stands for inside `v_i`: the vertex expansion
/// repeated `2^(q-1)` times. Test oracle for the entrywise correspondence
/// between `S_i` and `v_i`.
pub fn symbol_expansion(g: &Robdd, sym: LevelSymbol) -> Result<Vec<u8>> {
    let base = expand(g, VertexId(sym.m))?;
    let reps = 1usize << (sym.q - 1);
    let mut out = Vec::with_capacity(base.len() * reps);
    for _ in 0..reps {
        out.extend_from_slice(&base);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robdd::build_robdd;

    fn sym(m: u32, q: u32) -> LevelSymbol {
        LevelSymbol::new(m, q)
    }

    fn graph(s: &str) -> Robdd {
        build_robdd(&DyadicCore::from_str01(s).unwrap())
    }

    #[test]
    fn smallest_graph_levels() {
        let ls = generate_levels(&graph("01"));
        assert_eq!(ls.k(), 1);
        assert_eq!(ls.string(1), &[sym(1, 1)]);
        assert_eq!(ls.string(2), &[sym(2, 1), sym(3, 1)]);
    }

    #[test]
    fn shared_terminals_repeat_in_s3() {
        // "0110": A_2 = "01" -> (T0, T1), A_3 = "10" -> (T1, T0).
        let ls = generate_levels(&graph("0110"));
        assert_eq!(ls.string(2), &[sym(2, 1), sym(3, 1)]);
        assert_eq!(
            ls.string(3),
            &[sym(4, 1), sym(5, 1), sym(5, 1), sym(4, 1)]
        );
    }

    #[test]
    fn power_coherence_and_length_recursion() {
        for s in ["01", "0110", "0111", "00010111", "0101001100001111"] {
            let g = graph(s);
            let ls = generate_levels(&g);
            for (idx, string) in ls.all().iter().enumerate() {
                let i = idx as u32 + 1;
                for e in string {
                    assert_eq!(
                        g.level(VertexId(e.m)).unwrap(),
                        i + e.q - 1,
                        "power coherence for {e} in S_{i} of {s}"
                    );
                }
            }
            // |S_i| from distinct symbols of S_{i-1} alone
            for i in 2..=ls.k() + 1 {
                let sk = skeleton(ls.string(i - 1));
                assert_eq!(ls.string(i).len(), sk.s_len);
            }
        }
    }

    #[test]
    fn decompose_first_transition_is_all_new() {
        let ls = generate_levels(&graph("01"));
        let d = decompose_level(ls.string(1), ls.string(2)).unwrap();
        assert_eq!(d.hat, vec![sym(2, 1), sym(3, 1)]);
        assert_eq!(d.kinds, vec![EntryKind::TypeII, EntryKind::TypeII]);
        assert!(d.pi1.is_empty());
        assert_eq!(d.pi2.len(), 2);
        assert_eq!(d.q_sum, 2);
    }

    #[test]
    fn decompose_rejects_inconsistent_pairs() {
        let ls = generate_levels(&graph("0110"));
        // S_3 not generated from S_1
        assert!(decompose_level(ls.string(1), ls.string(3)).is_err());
    }

    #[test]
    fn rebuild_round_trips_small_graphs() {
        for s in ["01", "0110", "0111", "00010111", "0011010111110010"] {
            let g = graph(s);
            let ls = generate_levels(&g);
            let bit = u8::from(g.terminal0().0 > g.terminal1().0);
            let rebuilt = rebuild_graph(&ls, bit).unwrap();
            assert_eq!(&rebuilt, &g, "for {s}");
        }
    }

    #[test]
    fn flipped_terminal_bit_complements_the_expansion() {
        let x = DyadicCore::from_str01("00010111").unwrap();
        let g = build_robdd(&x);
        let ls = generate_levels(&g);
        let bit = u8::from(g.terminal0().0 > g.terminal1().0);
        let flipped = rebuild_graph(&ls, bit ^ 1).unwrap();
        let complement: Vec<u8> = x.bits().iter().map(|b| b ^ 1).collect();
        assert_eq!(expand(&flipped, flipped.root()).unwrap(), complement);
    }

    #[test]
    fn v_sequences_match_level_lengths() {
        for s in ["01", "0110", "00010111", "0011010111110010"] {
            let x = DyadicCore::from_str01(s).unwrap();
            let g = build_robdd(&x);
            let ls = generate_levels(&g);
            let vs = build_v_sequences(&x);
            assert_eq!(vs.len() as u32, ls.k());
            for i in 2..=ls.k() + 1 {
                assert_eq!(
                    vs[i as usize - 2].len(),
                    ls.string(i).len(),
                    "|v_{i}| vs |S_{i}| for {s}"
                );
            }
        }
    }

    #[test]
    fn v_entries_are_symbol_expansions() {
        let x = DyadicCore::from_str01("0011010111110010").unwrap();
        let g = build_robdd(&x);
        let ls = generate_levels(&g);
        let vs = build_v_sequences(&x);
        for i in 2..=ls.k() + 1 {
            let v = &vs[i as usize - 2];
            let s = ls.string(i);
            for (entry, symbol) in v.iter().zip(s) {
                assert_eq!(entry, &symbol_expansion(&g, *symbol).unwrap());
            }
        }
    }

    #[test]
    fn tiny_v_sequence() {
        let x = DyadicCore::from_str01("01").unwrap();
        let vs = build_v_sequences(&x);
        assert_eq!(vs, vec![vec![vec![0u8], vec![1u8]]]);
    }
}
