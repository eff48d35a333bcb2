//! Reduced ordered binary decision diagrams for dyadic bit strings.
//!
//! A dyadic string (power-of-two length, left half different from right half)
//! is the truth table of a Boolean function. [`build_robdd`] constructs the
//! unique minimal level-labelled DAG whose root expands back to the string,
//! with vertices numbered in the canonical first-appearance order that the
//! codec relies on. [`expand`] is the inverse map.

use std::fmt;

use crate::error::{Error, Result};
use crate::fasthash::{FastMap, FastSet};

/// A bit string of length `2^k` (k >= 1) whose two halves differ.
///
/// This is the codec's native input domain. Bits are stored one per byte with
/// values 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicCore {
    bits: Vec<u8>,
    k: u32,
}

impl DyadicCore {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        let n = bits.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::domain(format!(
                "dyadic string length must be a power of two >= 2, got {n}"
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::domain("bits must be 0 or 1"));
        }
        if bits[..n / 2] == bits[n / 2..] {
            return Err(Error::domain(
                "left and right halves coincide; string is not dyadic",
            ));
        }
        let k = n.trailing_zeros();
        Ok(DyadicCore { bits, k })
    }

    /// Parse from a string of '0'/'1' characters.
    pub fn from_str01(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::domain(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        DyadicCore::new(bits)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Exponent k with `len == 2^k`.
    pub fn k(&self) -> u32 {
        self.k
    }
}

/// Canonical 1-based vertex index; `VertexId(1)` is always the root.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(pub u32);

impl VertexId {
    pub const ROOT: VertexId = VertexId(1);

    fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VertexKind {
    Terminal(u8),
    Nonterminal { lo: VertexId, hi: VertexId },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Vertex {
    pub id: VertexId,
    /// Level label: root 1, terminals k+1, strictly increasing along edges.
    pub level: u32,
    pub kind: VertexKind,
}

/// The unique minimal graph representing a dyadic string.
///
/// Vertices are stored in canonical order (`vertices[0]` is the root). The two
/// terminals sit at level `k + 1`; every expansion of a vertex at level `l`
/// has length `2^(k + 1 - l)`. Values are immutable once built and safe to
/// share across threads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Robdd {
    vertices: Vec<Vertex>,
    k: u32,
    terminal0: VertexId,
    terminal1: VertexId,
}

impl Robdd {
    /// Assemble a graph from per-vertex levels and edges, checking the class
    /// invariants: unique root at level 1, exactly two terminals at level
    /// `k + 1`, distinct children with strictly larger levels, and every
    /// vertex reachable from the root.
    ///
    /// `levels[m - 1]` and `edges[m - 1]` describe vertex `m`; a `None` edge
    /// entry marks a terminal. `terminal0` selects which terminal expands
    /// to "0".
    pub fn from_parts(
        k: u32,
        levels: Vec<u32>,
        edges: Vec<Option<(VertexId, VertexId)>>,
        terminal0: VertexId,
    ) -> Result<Self> {
        let j = levels.len();
        if j != edges.len() {
            return Err(Error::structural("levels/edges length mismatch"));
        }
        if k == 0 || j < 3 {
            return Err(Error::structural("graph needs k >= 1 and at least 3 vertices"));
        }
        if levels[0] != 1 {
            return Err(Error::structural("root must be at level 1"));
        }
        let mut terminals = Vec::new();
        for m in 0..j {
            let level = levels[m];
            match edges[m] {
                None => {
                    if level != k + 1 {
                        return Err(Error::structural(format!(
                            "terminal A{} at level {} (expected {})",
                            m + 1,
                            level,
                            k + 1
                        )));
                    }
                    terminals.push(VertexId(m as u32 + 1));
                }
                Some((lo, hi)) => {
                    if level > k {
                        return Err(Error::structural(format!(
                            "nonterminal A{} at level {level} exceeds k = {k}",
                            m + 1
                        )));
                    }
                    if lo == hi {
                        return Err(Error::structural(format!(
                            "A{} has identical children",
                            m + 1
                        )));
                    }
                    for child in [lo, hi] {
                        let c = child.0 as usize;
                        if c == 0 || c > j {
                            return Err(Error::structural(format!(
                                "A{} points at missing vertex {c}",
                                m + 1
                            )));
                        }
                        if levels[c - 1] <= level {
                            return Err(Error::structural(format!(
                                "edge A{} -> A{c} does not increase level",
                                m + 1
                            )));
                        }
                    }
                }
            }
        }
        if terminals.len() != 2 {
            return Err(Error::structural(format!(
                "expected exactly 2 terminals, found {}",
                terminals.len()
            )));
        }
        if terminal0 != terminals[0] && terminal0 != terminals[1] {
            return Err(Error::structural("terminal0 is not a terminal vertex"));
        }
        let terminal1 = if terminal0 == terminals[0] {
            terminals[1]
        } else {
            terminals[0]
        };

        // Reachability from the root.
        let mut seen = vec![false; j];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 0usize;
        while let Some(m) = stack.pop() {
            reached += 1;
            if let Some((lo, hi)) = edges[m] {
                for child in [lo, hi] {
                    let c = child.index();
                    if !seen[c] {
                        seen[c] = true;
                        stack.push(c);
                    }
                }
            }
        }
        if reached != j {
            return Err(Error::structural("graph has vertices unreachable from the root"));
        }

        let vertices = (0..j)
            .map(|m| {
                let id = VertexId(m as u32 + 1);
                let kind = match edges[m] {
                    Some((lo, hi)) => VertexKind::Nonterminal { lo, hi },
                    None => VertexKind::Terminal(if id == terminal0 { 0 } else { 1 }),
                };
                Vertex {
                    id,
                    level: levels[m],
                    kind,
                }
            })
            .collect();

        Ok(Robdd {
            vertices,
            k,
            terminal0,
            terminal1,
        })
    }

    pub fn root(&self) -> VertexId {
        VertexId::ROOT
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: VertexId) -> Result<&Vertex> {
        if id.0 == 0 {
            return Err(Error::InvalidVertex(id.0));
        }
        self.vertices
            .get(id.index())
            .ok_or(Error::InvalidVertex(id.0))
    }

    pub fn level(&self, id: VertexId) -> Result<u32> {
        Ok(self.vertex(id)?.level)
    }

    pub fn terminal0(&self) -> VertexId {
        self.terminal0
    }

    pub fn terminal1(&self) -> VertexId {
        self.terminal1
    }

    /// Children of a nonterminal, `None` for terminals.
    pub fn children(&self, id: VertexId) -> Result<Option<(VertexId, VertexId)>> {
        Ok(match self.vertex(id)?.kind {
            VertexKind::Nonterminal { lo, hi } => Some((lo, hi)),
            VertexKind::Terminal(_) => None,
        })
    }
}

/// Build the unique reduced graph of `x`.
///
/// Bisect recursively: a block whose halves differ becomes a vertex, a block
/// whose halves coincide collapses to the vertex of its half (this is where
/// level skips come from), and single bits become terminals. A uniqueness
/// table keyed by block content makes equal blocks share one vertex. Vertex
/// ids are then reassigned in canonical order.
pub fn build_robdd(x: &DyadicCore) -> Robdd {
    let k = x.k();
    let bits = x.bits();

    // Temporary arena: 0-based ids in creation order. Blocks of up to 63 bits
    // are interned through packed integer keys (a leading sentinel bit keeps
    // lengths apart), longer ones through the slices themselves.
    struct Builder<'a> {
        k: u32,
        levels: Vec<u32>,
        edges: Vec<Option<(u32, u32)>>,
        small: FastMap<u64, u32>,
        large: FastMap<&'a [u8], u32>,
    }

    impl<'a> Builder<'a> {
        fn vertex_of(&mut self, block: &'a [u8]) -> u32 {
            let small_key = if block.len() < 64 {
                let key = block
                    .iter()
                    .fold(1u64, |acc, &b| (acc << 1) | b as u64);
                if let Some(&id) = self.small.get(&key) {
                    return id;
                }
                Some(key)
            } else {
                if let Some(&id) = self.large.get(block) {
                    return id;
                }
                None
            };
            let id = if block.len() == 1 {
                let id = self.levels.len() as u32;
                self.levels.push(self.k + 1);
                self.edges.push(None);
                id
            } else {
                let half = block.len() / 2;
                let (left, right) = block.split_at(half);
                if left == right {
                    self.vertex_of(left)
                } else {
                    let lo = self.vertex_of(left);
                    let hi = self.vertex_of(right);
                    let id = self.levels.len() as u32;
                    self.levels
                        .push(self.k + 1 - block.len().trailing_zeros());
                    self.edges.push(Some((lo, hi)));
                    id
                }
            };
            match small_key {
                Some(key) => {
                    self.small.insert(key, id);
                }
                None => {
                    self.large.insert(block, id);
                }
            }
            id
        }
    }

    let mut b = Builder {
        k,
        levels: Vec::new(),
        edges: Vec::new(),
        small: FastMap::with_capacity_and_hasher(bits.len() / 4 + 16, Default::default()),
        large: FastMap::with_capacity_and_hasher(bits.len() / 64 + 16, Default::default()),
    };
    let root = b.vertex_of(bits);
    let zero_terminal = b.small.get(&0b10u64).copied();
    let Builder { levels, edges, .. } = b;

    // Canonical renumbering by first appearance in the level strings.
    let order = appearance_order(levels.len(), k, root, |v| levels[v as usize], |v| {
        edges[v as usize]
    });
    debug_assert_eq!(order.len(), levels.len());
    let mut new_id = vec![0u32; levels.len()];
    for (pos, &old) in order.iter().enumerate() {
        new_id[old as usize] = pos as u32 + 1;
    }

    let final_levels: Vec<u32> = order.iter().map(|&old| levels[old as usize]).collect();
    let final_edges: Vec<Option<(VertexId, VertexId)>> = order
        .iter()
        .map(|&old| {
            edges[old as usize]
                .map(|(lo, hi)| (VertexId(new_id[lo as usize]), VertexId(new_id[hi as usize])))
        })
        .collect();
    let terminal0 = VertexId(new_id[zero_terminal.expect("dyadic string contains a 0") as usize]);

    Robdd::from_parts(k, final_levels, final_edges, terminal0)
        .expect("construction yields a well-formed graph")
}

/// Canonical numbering shared by construction and `canonical_order`: the
/// order in which the level-string generation first mentions each vertex.
///
/// Walk the strings level by level; under the first appearance of each
/// distinct symbol, a power above one decrements, a bare vertex lists its lo
/// then hi child. New vertices are numbered as they show up, which is exactly
/// the numbering the decoder reconstructs. (For graphs whose level-skipping
/// edges do not interleave with direct ones this coincides with scanning
/// nonterminals in index order.)
fn appearance_order(
    count: usize,
    k: u32,
    root: u32,
    level: impl Fn(u32) -> u32,
    edges: impl Fn(u32) -> Option<(u32, u32)>,
) -> Vec<u32> {
    let mut order = Vec::with_capacity(count);
    let mut seen = vec![false; count];
    order.push(root);
    seen[root as usize] = true;

    let mut stamp = vec![0u32; count];
    let mut current: Vec<(u32, u32)> = vec![(root, 1)];
    for i in 2..=k + 1 {
        let mut next = Vec::with_capacity(current.len() * 2);
        for &(v, q) in &current {
            if stamp[v as usize] == i {
                continue;
            }
            stamp[v as usize] = i;
            if q > 1 {
                next.push((v, q - 1));
            } else if let Some((lo, hi)) = edges(v) {
                for child in [lo, hi] {
                    next.push((child, level(child) - (i - 1)));
                    if !seen[child as usize] {
                        seen[child as usize] = true;
                        order.push(child);
                    }
                }
            }
        }
        current = next;
    }
    order
}

/// Canonical ordering of an already-built graph.
///
/// Position `p` of the result holds the current id of the vertex that the
/// canonical numbering calls `A_{p+1}`. For a graph built by [`build_robdd`]
/// or [`crate::levelstrings::rebuild_graph`] this is the identity.
pub fn canonical_order(g: &Robdd) -> Vec<VertexId> {
    let order = appearance_order(
        g.vertex_count(),
        g.k(),
        0,
        |v| g.vertices()[v as usize].level,
        |v| match g.vertices()[v as usize].kind {
            VertexKind::Nonterminal { lo, hi } => Some((lo.0 - 1, hi.0 - 1)),
            VertexKind::Terminal(_) => None,
        },
    );
    order.into_iter().map(|v| VertexId(v + 1)).collect()
}

/// Expand a vertex back into the bit string it represents.
///
/// The result has length `2^(k + 1 - level)`; for the root that is the whole
/// original string.
pub fn expand(g: &Robdd, v: VertexId) -> Result<Vec<u8>> {
    let vertex = g.vertex(v)?;
    let len = 1usize << (g.k() + 1 - vertex.level);
    let mut out = vec![0u8; len];
    fill(g, v, &mut out);
    Ok(out)
}

fn fill(g: &Robdd, v: VertexId, out: &mut [u8]) {
    let vertex = &g.vertices()[v.index()];
    match vertex.kind {
        VertexKind::Terminal(value) => out.fill(value),
        VertexKind::Nonterminal { lo, hi } => {
            let half = out.len() / 2;
            let lo_len = 1usize << (g.k() + 1 - g.vertices()[lo.index()].level);
            fill(g, lo, &mut out[..lo_len]);
            replicate(&mut out[..half], lo_len);
            let hi_len = 1usize << (g.k() + 1 - g.vertices()[hi.index()].level);
            fill(g, hi, &mut out[half..half + hi_len]);
            replicate(&mut out[half..], hi_len);
        }
    }
}

/// Tile `block[..seed]` across the whole slice by doubling copies.
fn replicate(block: &mut [u8], seed: usize) {
    let mut filled = seed;
    while filled < block.len() {
        let copy = filled.min(block.len() - filled);
        block.copy_within(..copy, filled);
        filled += copy;
    }
}

/// Number of vertices of the quasi-reduced diagram: the count of distinct
/// blocks over all partitions of `x` into blocks of length `1, 2, 4, ..., 2^k`
/// (terminals included). Upper-bounds the reduced vertex count.
pub fn quasi_reduced_vertex_count(x: &DyadicCore) -> usize {
    let bits = x.bits();
    let mut total = 0usize;
    for j in 0..=x.k() {
        let blen = 1usize << j;
        if blen <= 64 {
            let mut set = FastSet::default();
            for block in bits.chunks_exact(blen) {
                set.insert(pack_block(block));
            }
            total += set.len();
        } else {
            let mut set = FastSet::default();
            for block in bits.chunks_exact(blen) {
                set.insert(block);
            }
            total += set.len();
        }
    }
    total
}

fn pack_block(block: &[u8]) -> u64 {
    block.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn core(s: &str) -> DyadicCore {
        DyadicCore::from_str01(s).unwrap()
    }

    #[test]
    fn rejects_non_dyadic_inputs() {
        assert!(DyadicCore::from_str01("0").is_err());
        assert!(DyadicCore::from_str01("00").is_err());
        assert!(DyadicCore::from_str01("0101").is_err());
        assert!(DyadicCore::from_str01("011").is_err());
        assert!(DyadicCore::new(vec![0, 2]).is_err());
        assert!(DyadicCore::from_str01("01").is_ok());
    }

    #[test]
    fn smallest_graph_has_three_vertices() {
        let g = build_robdd(&core("01"));
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.k(), 1);
        let root = g.vertex(VertexId(1)).unwrap();
        assert_eq!(root.level, 1);
        assert_eq!(
            root.kind,
            VertexKind::Nonterminal {
                lo: VertexId(2),
                hi: VertexId(3)
            }
        );
        assert_eq!(g.terminal0(), VertexId(2));
        assert_eq!(g.terminal1(), VertexId(3));
        assert_eq!(g.level(VertexId(2)).unwrap(), 2);
        assert_eq!(g.level(VertexId(3)).unwrap(), 2);
    }

    #[test]
    fn four_bit_string_with_distinct_halves() {
        let g = build_robdd(&core("0110"));
        // root, vertices for "01" and "10", two terminals
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(expand(&g, g.root()).unwrap(), core("0110").bits());
    }

    #[test]
    fn terminal_expands_to_its_value() {
        let g = build_robdd(&core("0110"));
        assert_eq!(expand(&g, g.terminal0()).unwrap(), vec![0]);
        assert_eq!(expand(&g, g.terminal1()).unwrap(), vec![1]);
    }

    #[test]
    fn invalid_vertex_id_is_rejected() {
        let g = build_robdd(&core("01"));
        assert!(matches!(expand(&g, VertexId(0)), Err(Error::InvalidVertex(0))));
        assert!(matches!(expand(&g, VertexId(9)), Err(Error::InvalidVertex(9))));
    }

    #[test]
    fn canonical_order_is_identity_after_build() {
        for s in ["01", "0110", "00010111", "0001011100101100"] {
            let g = build_robdd(&core(s));
            let order = canonical_order(&g);
            let identity: Vec<VertexId> =
                (1..=g.vertex_count() as u32).map(VertexId).collect();
            assert_eq!(order, identity, "for {s}");
        }
    }

    #[test]
    fn quasi_reduced_counts() {
        assert_eq!(quasi_reduced_vertex_count(&core("01")), 3);
        // 0110; 01, 10; 0, 1
        assert_eq!(quasi_reduced_vertex_count(&core("0110")), 5);
    }

    #[test]
    fn level_skip_collapses_periodic_halves() {
        // "0101" repeated halves inside "01010011": left "0101" collapses to "01".
        let g = build_robdd(&core("01010011"));
        assert_eq!(expand(&g, g.root()).unwrap(), core("01010011").bits());
        let (lo, _hi) = g.children(g.root()).unwrap().unwrap();
        // left half "0101" == "01"^2, so the 0-edge jumps past level 2
        assert!(g.level(lo).unwrap() > 2);
    }

    #[test]
    fn from_parts_rejects_broken_graphs() {
        // identical children
        let r = Robdd::from_parts(
            1,
            vec![1, 2, 2],
            vec![Some((VertexId(2), VertexId(2))), None, None],
            VertexId(2),
        );
        assert!(r.is_err());
        // level not increasing
        let r = Robdd::from_parts(
            2,
            vec![1, 1, 3, 3],
            vec![
                Some((VertexId(2), VertexId(3))),
                Some((VertexId(3), VertexId(4))),
                None,
                None,
            ],
            VertexId(3),
        );
        assert!(r.is_err());
        // unreachable vertex
        let r = Robdd::from_parts(
            2,
            vec![1, 2, 3, 3],
            vec![
                Some((VertexId(3), VertexId(4))),
                Some((VertexId(3), VertexId(4))),
                None,
                None,
            ],
            VertexId(3),
        );
        assert!(r.is_err());
    }
}
