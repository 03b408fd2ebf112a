//! Brute-force oracles shared by the integration and acceptance tests. None of
//! them call into the library's search code.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use lincyc_core::Hypergraph;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

/// `m` distinct random `r`-sets on `n` vertices (fewer if `C(n, r) < m`).
pub fn random_hypergraph(rng: &mut impl Rng, r: usize, n: usize, m: usize) -> Hypergraph {
    let mut edges: BTreeSet<Vec<u32>> = BTreeSet::new();
    let total = binom(n, r);
    let target = m.min(total);
    let verts: Vec<u32> = (0..n as u32).collect();
    while edges.len() < target {
        let mut e: Vec<u32> = verts.choose_multiple(rng, r).copied().collect();
        e.sort_unstable();
        edges.insert(e);
    }
    Hypergraph::from_edges(r, n, edges).unwrap()
}

pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All `k`-subsets of `0..m`, lexicographic.
pub fn subsets(m: usize, k: usize) -> Vec<Vec<u32>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i as u32);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// A set of `r`-edges is a linear `k`-cycle iff it spans `k(r−1)` vertices,
/// any two edges share at most one vertex, and the "shares a vertex" graph on
/// the edges is connected and 2-regular.
pub fn oracle_is_linear_cycle(edges: &[&[u32]], r: usize) -> bool {
    let k = edges.len();
    if k < 3 || edges.iter().any(|e| e.len() != r) {
        return false;
    }
    let verts: BTreeSet<u32> = edges.iter().flat_map(|e| e.iter().copied()).collect();
    if verts.len() != k * (r - 1) {
        return false;
    }
    let mut adj = vec![Vec::new(); k];
    for i in 0..k {
        for j in i + 1..k {
            let shared = edges[i].iter().filter(|v| edges[j].contains(v)).count();
            if shared > 1 {
                return false;
            }
            if shared == 1 {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    if adj.iter().any(|a| a.len() != 2) {
        return false;
    }
    let mut seen = vec![false; k];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Every `k`-subset of edges that forms a linear cycle.
pub fn oracle_cycles(g: &Hypergraph, k: usize) -> BTreeSet<Vec<u32>> {
    let r = g.uniformity();
    subsets(g.edge_count(), k)
        .into_iter()
        .filter(|s| {
            let es: Vec<&[u32]> = s.iter().map(|&i| g.edge(i as usize)).collect();
            oracle_is_linear_cycle(&es, r)
        })
        .collect()
}

pub fn mask_of(idx: &[u32]) -> u64 {
    idx.iter().fold(0u64, |m, &i| m | 1 << i)
}

/// Maximum number of edges in a subgraph containing no copy (`e(G) ≤ 24`).
pub fn brute_force_ex(g: &Hypergraph, k: usize) -> usize {
    let m = g.edge_count();
    assert!(m <= 24);
    let copies: Vec<u64> = oracle_cycles(g, k).iter().map(|c| mask_of(c)).collect();
    let full = 1usize << m;
    let mut bad = vec![false; full];
    for &c in &copies {
        bad[c as usize] = true;
    }
    for bit in 0..m {
        for mask in 0..full {
            if mask >> bit & 1 == 1 && bad[mask ^ (1 << bit)] {
                bad[mask] = true;
            }
        }
    }
    (0..full)
        .filter(|&s| !bad[s])
        .map(|s| s.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// Largest number of copies sharing a `j`-set of edges.
pub fn oracle_max_tuple(copies: &[Vec<u32>], j: usize) -> usize {
    let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
    for c in copies {
        for s in subsets(c.len(), j) {
            let key: Vec<u32> = s.iter().map(|&i| c[i as usize]).collect();
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    counts.into_values().max().unwrap_or(0)
}

/// Codegree of every co-occurring pair, by a direct scan of the edges.
pub fn oracle_pair_codegrees(g: &Hypergraph) -> HashMap<(u32, u32), usize> {
    let mut out = HashMap::new();
    for e in g.edges() {
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                *out.entry((e[i], e[j])).or_insert(0) += 1;
            }
        }
    }
    out
}

/// A random maximal subset of `0..m` containing none of `copies` (bitmasks).
pub fn random_maximal_free(rng: &mut impl Rng, m: usize, copies: &[u64]) -> u64 {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut set = 0u64;
    for i in order {
        let next = set | 1 << i;
        if !copies.iter().any(|&c| c & next == c) {
            set = next;
        }
    }
    set
}

/// Over subsets of `0..m`: `(free subsets, free subsets in no container)`,
/// by two subset-closure passes.
pub fn coverage_by_closure(m: usize, copies: &[u64], containers: &[u64]) -> (u64, u64) {
    let full = 1usize << m;
    let mut bad = vec![false; full];
    let mut covered = vec![false; full];
    for &c in copies {
        bad[c as usize] = true;
    }
    for &c in containers {
        covered[c as usize] = true;
    }
    for bit in 0..m {
        let b = 1usize << bit;
        for mask in 0..full {
            if mask & b != 0 {
                bad[mask] |= bad[mask ^ b];
                covered[mask ^ b] |= covered[mask];
            }
        }
    }
    let free = (0..full).filter(|&s| !bad[s]);
    let (mut checked, mut missed) = (0, 0);
    for s in free {
        checked += 1;
        if !covered[s] {
            missed += 1;
        }
    }
    (checked, missed)
}
