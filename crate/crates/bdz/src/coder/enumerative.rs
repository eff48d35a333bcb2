//! Sequence entropy, first-strike reduction, and lexicographic ranking of
//! multiset permutations.
//!
//! A sequence with known symbol frequencies is one of at most `2^H(u)`
//! arrangements, so its lexicographic index fits in `ceil(H(u))` bits. Ranks
//! routinely reach tens of thousands of bits, so the inner loops run on
//! [`Nat`] with one scalar multiply and one exact scalar division per
//! position; unranking guides its symbol search with float approximations and
//! verifies each pick exactly.

use std::cell::RefCell;
use std::hash::Hash;

use super::nat::Nat;
use crate::error::{Error, Result};
use crate::fasthash::{FastMap, FastSet};

/// Self-entropy of a sequence: `sum_j -log2(n(u_j) / |u|)`, 0 for the empty
/// sequence. Zero exactly when the sequence has at most one distinct symbol.
pub fn entropy<T: Eq + Hash>(u: &[T]) -> f64 {
    let mut counts: FastMap<&T, u32> = FastMap::default();
    for s in u {
        *counts.entry(s).or_insert(0) += 1;
    }
    entropy_of_counts(counts.values().copied(), u.len() as u64)
}

pub(crate) fn entropy_of_counts(counts: impl Iterator<Item = u32>, total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    with_log_tables(total as usize, |t| {
        let lg_total = t.lg[total as usize];
        counts
            .map(|c| c as f64 * (lg_total - t.lg[c as usize]))
            .sum()
    })
}

/// Strike out the first left-to-right appearance of every symbol.
pub fn first_strike<T: Eq + Hash + Clone>(u: &[T]) -> Vec<T> {
    let mut seen: FastSet<&T> = FastSet::default();
    let mut out = Vec::new();
    for s in u {
        if seen.insert(s) {
            continue;
        }
        out.push(s.clone());
    }
    out
}

/// Ordered symbol frequencies. The entry order doubles as the symbol order of
/// the lexicographic enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Composition<T> {
    entries: Vec<(T, u32)>,
    total: u64,
}

impl<T: Eq + Hash + Clone> Composition<T> {
    pub fn new(entries: Vec<(T, u32)>) -> Result<Self> {
        let mut seen = FastSet::default();
        for (sym, count) in &entries {
            if *count == 0 {
                return Err(Error::domain("composition counts must be positive"));
            }
            if !seen.insert(sym) {
                return Err(Error::domain("composition symbols must be distinct"));
            }
        }
        let total = entries.iter().map(|(_, c)| *c as u64).sum();
        Ok(Composition { entries, total })
    }

    /// Composition of `u` with symbols in first-appearance order.
    pub fn from_sequence(u: &[T]) -> Self {
        let mut order: Vec<(T, u32)> = Vec::new();
        let mut index: FastMap<&T, usize> = FastMap::default();
        for s in u {
            match index.get(s) {
                Some(&i) => order[i].1 += 1,
                None => {
                    index.insert(s, order.len());
                    order.push((s.clone(), 1));
                }
            }
        }
        let total = u.len() as u64;
        Composition {
            entries: order,
            total,
        }
    }

    pub fn entries(&self) -> &[(T, u32)] {
        &self.entries
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entropy of any sequence with these frequencies.
    pub fn entropy(&self) -> f64 {
        entropy_of_counts(self.entries.iter().map(|(_, c)| *c), self.total)
    }

    fn counts(&self) -> Vec<u32> {
        self.entries.iter().map(|(_, c)| *c).collect()
    }

    /// `ceil(H)` — the fixed rank width in bits.
    ///
    /// The width must also cover the exact arrangement count; floating-point
    /// entropy could in principle land one bit short of that, so the near-tie
    /// band falls back to exact arithmetic.
    pub fn rank_width(&self) -> usize {
        let h = self.entropy();
        let w = ceil_snapped(h);
        let lg_multinomial = with_log_tables(self.total as usize, |t| {
            self.entries
                .iter()
                .fold(t.lg_fact[self.total as usize], |acc, (_, c)| {
                    acc - t.lg_fact[*c as usize]
                })
        });
        if lg_multinomial <= w as f64 - 1e-6 {
            return w;
        }
        let m = multinomial(&self.counts());
        let need = if m.bit_len() <= 1 {
            0
        } else if m.is_power_of_two() {
            m.bit_len() - 1
        } else {
            m.bit_len()
        };
        w.max(need)
    }
}

/// Ceiling with a snap for values a hair above an integer, so that exact
/// entropies computed in floating point stay exact.
fn ceil_snapped(h: f64) -> usize {
    if h <= 0.0 {
        return 0;
    }
    let floor = h.floor();
    if h - floor < 1e-9 {
        floor as usize
    } else {
        floor as usize + 1
    }
}

struct LogTables {
    lg: Vec<f64>,
    lg_fact: Vec<f64>,
}

thread_local! {
    static LOG_TABLES: RefCell<LogTables> = RefCell::new(LogTables {
        lg: vec![0.0, 0.0],
        lg_fact: vec![0.0, 0.0],
    });
}

fn with_log_tables<R>(up_to: usize, f: impl FnOnce(&LogTables) -> R) -> R {
    LOG_TABLES.with(|cell| {
        let mut tables = cell.borrow_mut();
        while tables.lg.len() <= up_to {
            let i = tables.lg.len();
            let lg = (i as f64).log2();
            let prev = tables.lg_fact[i - 1];
            tables.lg.push(lg);
            tables.lg_fact.push(prev + lg);
        }
        f(&tables)
    })
}

/// `total! / prod(counts!)` built incrementally; factors are packed into u64
/// chunks so each big-number pass retires several of them.
fn multinomial(counts: &[u32]) -> Nat {
    let mut m = Nat::one();
    let mut seen = 0u64;
    let mut num = 1u64;
    let mut den = 1u64;
    for &c in counts {
        for x in 1..=c as u64 {
            seen += 1;
            if num > u64::MAX / seen || den > u64::MAX / x {
                m.scale_in_place(num, den);
                num = 1;
                den = 1;
            }
            num *= seen;
            den *= x;
        }
    }
    m.scale_in_place(num, den);
    m
}

/// Lexicographic index of `u` among all sequences with composition `c`
/// (symbol order = entry order), together with the fixed bit width.
pub fn rank_multiset_perm<T: Eq + Hash + Clone>(
    u: &[T],
    c: &Composition<T>,
) -> Result<(Nat, usize)> {
    if u.len() as u64 != c.total() {
        return Err(Error::domain(
            "sequence length does not match the composition",
        ));
    }
    let index: FastMap<&T, u32> = c
        .entries()
        .iter()
        .enumerate()
        .map(|(i, (s, _))| (s, i as u32))
        .collect();
    let mut seq = Vec::with_capacity(u.len());
    for s in u {
        match index.get(s) {
            Some(&i) => seq.push(i),
            None => {
                return Err(Error::domain("sequence symbol missing from composition"));
            }
        }
    }
    let counts = c.counts();
    let rank = rank_indices(&seq, &counts)?;
    let width = c.rank_width();
    debug_assert!(rank.bit_len() <= width);
    Ok((rank, width))
}

/// Inverse of [`rank_multiset_perm`].
pub fn unrank_multiset_perm<T: Eq + Hash + Clone>(
    rank: &Nat,
    c: &Composition<T>,
) -> Result<Vec<T>> {
    let counts = c.counts();
    let indices = unrank_indices(rank, &counts)?;
    Ok(indices
        .into_iter()
        .map(|i| c.entries()[i as usize].0.clone())
        .collect())
}

/// Sequences at least this long get the product-tree ranking.
const TREE_RANK_THRESHOLD: usize = 192;

fn rank_indices(seq: &[u32], counts: &[u32]) -> Result<Nat> {
    let mut consumed = vec![0u32; counts.len()];
    for &s in seq {
        let slot = consumed
            .get_mut(s as usize)
            .ok_or_else(|| Error::domain("sequence symbol out of range"))?;
        *slot += 1;
    }
    if consumed != counts {
        return Err(Error::domain("sequence does not match the composition"));
    }
    if seq.len() >= TREE_RANK_THRESHOLD {
        Ok(rank_indices_tree(seq, counts))
    } else {
        Ok(rank_indices_sequential(seq, counts))
    }
}

/// Walk the sequence backwards, growing the suffix multiset. With M the
/// arrangement count of the suffix beyond the current position, the
/// position's contribution is M * (smaller symbols remaining) / (count of
/// the symbol itself), and M grows by suffix_len / count. One pass covers
/// both the multinomial and the rank.
fn rank_indices_sequential(seq: &[u32], counts: &[u32]) -> Nat {
    let mut fen = Fenwick::new(&vec![0; counts.len()]);
    let mut suffix_counts = vec![0u32; counts.len()];
    let mut m = Nat::one();
    let mut rank = Nat::zero();
    let mut suffix_len = 0u64;

    for &s in seq.iter().rev() {
        let s = s as usize;
        suffix_len += 1;
        suffix_counts[s] += 1;
        fen.add_one(s);
        let c = suffix_counts[s] as u64;
        let before = fen.prefix(s);
        if before > 0 {
            rank.add_scaled(&m, before, c);
        }
        m.scale_in_place(suffix_len, c);
    }
    rank
}

/// Product-tree ranking, subquadratic in the rank width.
///
/// Per position let `pfx` be the remaining smaller-symbol count, `c` the
/// remaining count of the symbol itself and `R` the remaining length. The
/// rank satisfies `rank * prod(counts!) = g_0` where
/// `g_p = pfx_p * (J-p-1)! + c_p * g_{p+1}`. Each segment reduces to the
/// triple (C, R, B) = (prod c, falling product of R, its partial g-sum),
/// combined as `B = B_L * R_R + C_L * B_R`; a balanced reduction keeps every
/// multiplication between numbers of similar size, where Karatsuba pays off.
/// At the root, C is exactly `prod(counts!)`, the divisor that turns B into
/// the rank.
fn rank_indices_tree(seq: &[u32], counts: &[u32]) -> Nat {
    // Cheap forward pass for the per-position small numbers.
    let mut fen = Fenwick::new(counts);
    let mut remaining = counts.to_vec();
    let mut total: u64 = counts.iter().map(|&c| c as u64).sum();
    // Leaves grouped with u128 accumulators until they near overflow.
    let mut nodes: Vec<(Nat, Nat, Nat)> = Vec::new();
    let (mut c_acc, mut r_acc, mut b_acc) = (1u128, 1u128, 0u128);
    const CAP: u128 = 1 << 96;
    for &s in seq {
        let s = s as usize;
        let pfx = fen.prefix(s) as u128;
        let c = remaining[s] as u128;
        let r = total as u128;
        if c_acc.saturating_mul(c) >= CAP
            || r_acc.saturating_mul(r) >= CAP
            || b_acc.saturating_mul(r) >= CAP
        {
            nodes.push((nat_from_u128(c_acc), nat_from_u128(r_acc), nat_from_u128(b_acc)));
            c_acc = 1;
            r_acc = 1;
            b_acc = 0;
        }
        // combine the leaf (c, r, pfx) into the accumulator
        b_acc = b_acc * r + c_acc * pfx;
        c_acc *= c;
        r_acc *= r;

        fen.sub_one(s);
        remaining[s] -= 1;
        total -= 1;
    }
    nodes.push((nat_from_u128(c_acc), nat_from_u128(r_acc), nat_from_u128(b_acc)));

    // Balanced pairwise reduction. The root's own C and R products are never
    // used, so the final combine computes only B.
    while nodes.len() > 2 {
        let mut next = Vec::with_capacity(nodes.len().div_ceil(2));
        let mut iter = nodes.into_iter();
        while let Some(left) = iter.next() {
            match iter.next() {
                Some(right) => {
                    let (cl, rl, bl) = left;
                    let (cr, rr, br) = right;
                    let mut b = bl.mul_nat(&rr);
                    b.add_assign(&cl.mul_nat(&br));
                    next.push((cl.mul_nat(&cr), rl.mul_nat(&rr), b));
                }
                None => next.push(left),
            }
        }
        nodes = next;
    }
    let mut b = match (nodes.pop(), nodes.pop()) {
        (Some((_, rr, br)), Some((cl, _, bl))) => {
            let mut b = bl.mul_nat(&rr);
            b.add_assign(&cl.mul_nat(&br));
            b
        }
        (Some((_, _, b)), None) => b,
        _ => unreachable!("at least one node"),
    };

    // rank = B / prod(counts!)
    b.div_exact_factored(
        counts
            .iter()
            .flat_map(|&c| 2..=c as u64),
    );
    b
}

fn nat_from_u128(v: u128) -> Nat {
    let mut n = Nat::from_u64(v as u64);
    if (v >> 64) != 0 {
        let mut hi = Nat::from_u64((v >> 64) as u64);
        hi.mul_small(1 << 32);
        hi.mul_small(1 << 32);
        n.add_assign(&hi);
    }
    n
}

fn unrank_indices(rank: &Nat, counts: &[u32]) -> Result<Vec<u32>> {
    let mut remaining_total: u64 = counts.iter().map(|&c| c as u64).sum();
    let mut m = multinomial(counts);
    if *rank >= m {
        return Err(Error::corrupt("rank exceeds the arrangement count"));
    }
    let mut target = rank.clone();
    let mut fen = Fenwick::new(counts);
    let mut remaining = counts.to_vec();
    let mut out = Vec::with_capacity(remaining_total as usize);
    let mut low = Nat::zero();
    let mut high = Nat::zero();

    // The real position kappa = target * total / m in cumulative count space
    // determines each symbol: prefix(s) <= kappa < prefix(s) + count(s).
    // kappa evolves by kappa' = (kappa - prefix) * (R - 1) / c, which only
    // involves small numbers, so several symbols can be settled per big-
    // number pass: their low-side contributions and count factors accumulate
    // into (num, cprod, den) and one fused step applies
    // `target -= m * num / den; m = m * cprod / den`. A tracked error bound
    // keeps every float decision honest; anything ambiguous flushes and is
    // resolved with exact comparisons.
    'outer: while remaining_total > 0 {
        if target.is_zero() {
            // Rank zero of the remainder: the symbols in ascending order.
            for (s, &c) in remaining.iter().enumerate() {
                for _ in 0..c {
                    out.push(s as u32);
                }
            }
            return Ok(out);
        }

        let mut kappa = estimate_ratio(&target, &m) * remaining_total as f64;
        let mut err = kappa * EPS_REL + EPS_REL;
        let mut num = 0u64;
        let mut cprod = 1u64;
        let mut den = 1u64;
        let mut group = 0u64;
        let mut ambiguous = false;

        loop {
            let r_now = remaining_total - group;
            if r_now == 0 {
                break;
            }
            let k = (kappa.max(0.0) as u64).min(r_now - 1);
            let s = fen.find_by_cumulative(k);
            let before = fen.prefix(s);
            let c = remaining[s] as u64;
            // both block edges must clear the error bound
            if !(kappa - before as f64 > err + MARGIN
                && (before + c) as f64 - kappa > err + MARGIN)
            {
                ambiguous = true;
                break;
            }
            // accumulate, watching the u64 capacity of the fused step
            let new_num = num as u128 * r_now as u128 + before as u128 * cprod as u128;
            let new_den = den as u128 * r_now as u128;
            let new_cprod = cprod as u128 * c as u128;
            if new_num >= CAP63 || new_den >= CAP63 || new_cprod >= CAP63 {
                break;
            }
            num = new_num as u64;
            den = new_den as u64;
            cprod = new_cprod as u64;
            group += 1;
            fen.sub_one(s);
            remaining[s] -= 1;
            out.push(s as u32);

            kappa = (kappa - before as f64) * (r_now - 1) as f64 / c as f64;
            err = err * (r_now - 1) as f64 / c as f64 + EPS_EXTRAPOLATE;
            if err > ERR_LIMIT {
                break;
            }
        }

        if group > 0 {
            Nat::unrank_step(&mut m, &mut target, num, cprod, den);
            remaining_total -= group;
            continue 'outer;
        }
        if !ambiguous {
            continue 'outer;
        }

        // Exact resolution of a single position.
        let k = (kappa.max(0.0) as u64).min(remaining_total - 1);
        let mut s = fen.find_by_cumulative(k);
        let mut before;
        loop {
            before = fen.prefix(s);
            low.scale_from(&m, before, remaining_total);
            if target < low {
                s = step_nonzero(&remaining, s, -1);
                continue;
            }
            high.scale_from(&m, remaining[s] as u64, remaining_total);
            high.add_assign(&low);
            if target >= high {
                s = step_nonzero(&remaining, s, 1);
                continue;
            }
            break;
        }
        let c = remaining[s];
        Nat::unrank_step(&mut m, &mut target, before, c as u64, remaining_total);
        fen.sub_one(s);
        remaining[s] = c - 1;
        remaining_total -= 1;
        out.push(s as u32);
    }
    debug_assert!(target.is_zero());
    Ok(out)
}

const CAP63: u128 = 1 << 63;
/// Relative slack of the 128-bit-mantissa ratio estimate.
const EPS_REL: f64 = 2e-14;
/// Per-extrapolation absolute slack.
const EPS_EXTRAPOLATE: f64 = 1e-12;
/// Decisions keep at least this distance (beyond the tracked error) from a
/// block edge; anything closer is resolved exactly.
const MARGIN: f64 = 0.01;
/// Extrapolation stops once the tracked error nears the decision margin.
const ERR_LIMIT: f64 = 1e-3;

/// Approximate `target / m` (both sides of a fused step) from the top 128
/// bits of each; relative error far below `EPS_REL`.
fn estimate_ratio(target: &Nat, m: &Nat) -> f64 {
    let (tm, te) = target.to_f2();
    if tm == 0.0 {
        return 0.0;
    }
    let (mm, me) = m.to_f2();
    let ratio = tm / mm * ((te - me) as f64).exp2();
    if ratio.is_finite() && ratio > 0.0 {
        ratio
    } else {
        0.0
    }
}

/// Nearest index at or beyond `s` (in direction `dir`) with items remaining.
fn step_nonzero(remaining: &[u32], s: usize, dir: i32) -> usize {
    let mut i = s as i64;
    loop {
        i += dir as i64;
        let idx = i as usize;
        if remaining[idx] > 0 {
            return idx;
        }
    }
}

/// Fenwick tree over remaining symbol counts.
struct Fenwick {
    tree: Vec<u64>,
    mask: usize,
}

impl Fenwick {
    fn new(counts: &[u32]) -> Self {
        let n = counts.len();
        let mut tree = vec![0u64; n + 1];
        for (i, &c) in counts.iter().enumerate() {
            tree[i + 1] = c as u64;
        }
        for i in 1..=n {
            let j = i + (i & i.wrapping_neg());
            if j <= n {
                tree[j] += tree[i];
            }
        }
        let mask = if n == 0 {
            0
        } else {
            1usize << (usize::BITS - 1 - n.leading_zeros())
        };
        Fenwick { tree, mask }
    }

    /// Sum of counts at indices `< i`.
    fn prefix(&self, i: usize) -> u64 {
        let mut sum = 0u64;
        let mut j = i;
        while j > 0 {
            sum += self.tree[j];
            j &= j - 1;
        }
        sum
    }

    fn sub_one(&mut self, i: usize) {
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] -= 1;
            j += j & j.wrapping_neg();
        }
    }

    fn add_one(&mut self, i: usize) {
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += 1;
            j += j & j.wrapping_neg();
        }
    }

    /// Index `i` with `prefix(i) <= k < prefix(i) + count(i)`; requires
    /// `k` below the total.
    fn find_by_cumulative(&self, k: u64) -> usize {
        let mut idx = 0usize;
        let mut rem = k;
        let mut bit = self.mask;
        while bit != 0 {
            let next = idx + bit;
            if next < self.tree.len() && self.tree[next] <= rem {
                rem -= self.tree[next];
                idx = next;
            }
            bit >>= 1;
        }
        idx
    }
}
