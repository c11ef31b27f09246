//! Input-ordered intersection graphs as per-vertex adjacency bitmasks, the
//! exact maximum-independent-set solver, and the canonical edge-bitmask
//! encoding used by the exhaustive search.

use alloc::vec::Vec;

/// Graph on vertices `0..n` in input order; `adj[i]` has bit `j` set iff
/// `{i, j}` is an edge. Symmetric, no self-loops, `n <= 63`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedGraph {
    adj: Vec<u64>,
}

impl OrderedGraph {
    pub fn from_adjacency(adj: Vec<u64>) -> Self {
        let n = adj.len();
        debug_assert!(n <= 63);
        for (i, &m) in adj.iter().enumerate() {
            debug_assert_eq!(m & (1 << i), 0, "self loop at {i}");
            debug_assert_eq!(m >> n, 0, "adjacency bit beyond n");
        }
        debug_assert!((0..n).all(|i| (0..n).all(|j| (adj[i] >> j) & 1 == (adj[j] >> i) & 1)));
        OrderedGraph { adj }
    }

    pub fn edgeless(n: usize) -> Self {
        OrderedGraph { adj: alloc::vec![0; n] }
    }

    pub fn complete(n: usize) -> Self {
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let adj = (0..n).map(|i| full & !(1 << i)).collect();
        OrderedGraph { adj }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn adjacency(&self) -> &[u64] {
        &self.adj
    }

    pub fn neighbors(&self, v: usize) -> u64 {
        self.adj[v]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        (self.adj[i] >> j) & 1 == 1
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|m| m.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    pub fn degree_sequence(&self) -> Vec<usize> {
        (0..self.n()).map(|v| self.degree(v)).collect()
    }

    /// True iff the vertex set `mask` is pairwise non-adjacent.
    pub fn is_independent(&self, mask: u64) -> bool {
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.adj[v] & mask != 0 {
                return false;
            }
        }
        true
    }

    /// Canonical edge-bitmask integer: edge `(i, j)` with `i < j` sits at bit
    /// `i*n - i*(i+1)/2 + (j - i - 1)`.
    pub fn edge_mask(&self) -> u64 {
        let n = self.n();
        let mut mask = 0u64;
        for i in 0..n {
            for j in (i + 1)..n {
                if self.has_edge(i, j) {
                    mask |= 1 << edge_bit(n, i, j);
                }
            }
        }
        mask
    }

    pub fn from_edge_mask(n: usize, mask: u64) -> Self {
        let mut adj = alloc::vec![0u64; n];
        let mut bit = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if (mask >> bit) & 1 == 1 {
                    adj[i] |= 1 << j;
                    adj[j] |= 1 << i;
                }
                bit += 1;
            }
        }
        OrderedGraph { adj }
    }

    /// Disjoint union with vertices of `other` relabeled after `self`'s.
    pub fn disjoint_union(&self, other: &OrderedGraph) -> OrderedGraph {
        let n1 = self.n();
        let mut adj = self.adj.clone();
        for &m in &other.adj {
            adj.push(m << n1);
        }
        OrderedGraph { adj }
    }
}

pub fn edge_bit(n: usize, i: usize, j: usize) -> u32 {
    debug_assert!(i < j && j < n);
    (i * n - i * (i + 1) / 2 + (j - i - 1)) as u32
}

pub fn edge_slots(n: usize) -> u32 {
    (n * (n.saturating_sub(1)) / 2) as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MisResult {
    pub size: usize,
    /// One maximum independent set as a vertex bitmask.
    pub witness: u64,
}

/// Exact maximum independent set by branch and bound on the candidate set:
/// branch on a maximum-degree vertex, prune when the remaining candidate
/// count cannot beat the incumbent. Exhaustive (hence exact) for any n <= 63.
pub fn mis_size(g: &OrderedGraph) -> MisResult {
    let n = g.n();
    if n == 0 {
        return MisResult { size: 0, witness: 0 };
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut best = MisResult { size: 0, witness: 0 };
    branch(g, all, 0, 0, &mut best);
    debug_assert!(g.is_independent(best.witness));
    debug_assert_eq!(best.witness.count_ones() as usize, best.size);
    best
}

fn branch(g: &OrderedGraph, candidates: u64, chosen: u64, chosen_count: usize, best: &mut MisResult) {
    if chosen_count + candidates.count_ones() as usize <= best.size {
        return;
    }
    if candidates == 0 {
        if chosen_count > best.size {
            *best = MisResult { size: chosen_count, witness: chosen };
        }
        return;
    }
    // pick a maximum-degree vertex inside the candidate set
    let mut rest = candidates;
    let mut pick = rest.trailing_zeros() as usize;
    let mut pick_deg = (g.neighbors(pick) & candidates).count_ones();
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let d = (g.neighbors(v) & candidates).count_ones();
        if d > pick_deg {
            pick = v;
            pick_deg = d;
        }
    }
    if pick_deg == 0 {
        // candidates are pairwise non-adjacent: take them all
        let total = chosen_count + candidates.count_ones() as usize;
        if total > best.size {
            *best = MisResult { size: total, witness: chosen | candidates };
        }
        return;
    }
    let bit = 1u64 << pick;
    // include pick
    branch(g, candidates & !(bit | g.neighbors(pick)), chosen | bit, chosen_count + 1, best);
    // exclude pick
    branch(g, candidates & !bit, chosen, chosen_count, best);
}

/// Deterministic greedy in input order: accept every vertex with no accepted
/// neighbor. Equals the expectation polynomial evaluated at p = 1.
pub fn greedy_solution_size(g: &OrderedGraph) -> usize {
    let mut blocked = 0u64;
    let mut count = 0;
    for v in 0..g.n() {
        if blocked & (1 << v) == 0 {
            count += 1;
            blocked |= g.neighbors(v);
        }
    }
    count
}
