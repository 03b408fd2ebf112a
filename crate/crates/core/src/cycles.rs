//! Linear cycles `C_k^(r)`: construction, detection, enumeration, and lifting
//! of 2-graph cycles from a shadow back to hyperedges.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, ShadowGraph, Vertex};
use crate::util::for_each_subset;

/// Default cap on partial extensions explored by one enumeration.
pub const DEFAULT_WORK_BUDGET: u64 = 100_000_000;

/// Environment variable overriding [`DEFAULT_WORK_BUDGET`].
pub const WORK_BUDGET_ENV: &str = "LINCYC_WORK_BUDGET";

pub fn default_work_budget() -> u64 {
    std::env::var(WORK_BUDGET_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_WORK_BUDGET)
}

/// The abstract `C_k^(r)`: a `k`-cycle with `r - 2` pendant vertices added to each edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleTemplate {
    pub k: usize,
    pub r: usize,
}

impl CycleTemplate {
    pub fn new(k: usize, r: usize) -> Result<Self> {
        if k < 3 || r < 2 {
            return Err(Error::InvalidParameter(format!(
                "cycle template needs k >= 3 and r >= 2 (got k={k}, r={r})"
            )));
        }
        Ok(CycleTemplate { k, r })
    }

    pub fn vertex_count(&self) -> usize {
        self.k * (self.r - 1)
    }

    /// Core vertices are `0..k`; edge `i` holds cores `i, i+1 (mod k)` and its own pendants.
    pub fn instance(&self) -> Hypergraph {
        let (k, r) = (self.k, self.r);
        let edges = (0..k).map(|i| {
            let mut e = vec![i as Vertex, ((i + 1) % k) as Vertex];
            e.extend((0..r - 2).map(|t| (k + i * (r - 2) + t) as Vertex));
            e
        });
        Hypergraph::from_edges(r, self.vertex_count(), edges).expect("template is well formed")
    }
}

/// True iff the edges form a copy of `C_k^(r)`, `k = edges.len()`.
pub fn is_linear_cycle<E: AsRef<[Vertex]>>(edges: &[E], r: usize) -> bool {
    let k = edges.len();
    if k < 3 || r < 2 {
        return false;
    }
    let mut sets: Vec<Vec<Vertex>> = Vec::with_capacity(k);
    for e in edges {
        let mut v = e.as_ref().to_vec();
        v.sort_unstable();
        v.dedup();
        if v.len() != r || e.as_ref().len() != r {
            return false;
        }
        sets.push(v);
    }
    let mut all: Vec<Vertex> = sets.iter().flatten().copied().collect();
    all.sort_unstable();
    all.dedup();
    if all.len() != k * (r - 1) {
        return false;
    }
    // Intersection graph must be a single k-cycle with singleton overlaps.
    let mut nbrs = vec![Vec::new(); k];
    for a in 0..k {
        for b in a + 1..k {
            match intersection_size(&sets[a], &sets[b]) {
                0 => {}
                1 => {
                    nbrs[a].push(b);
                    nbrs[b].push(a);
                }
                _ => return false,
            }
        }
    }
    if nbrs.iter().any(|n| n.len() != 2) {
        return false;
    }
    let (mut prev, mut cur, mut steps) = (0usize, nbrs[0][0], 1usize);
    while cur != 0 {
        let next = if nbrs[cur][0] == prev { nbrs[cur][1] } else { nbrs[cur][0] };
        prev = cur;
        cur = next;
        steps += 1;
        if steps > k {
            return false;
        }
    }
    steps == k
}

fn intersection_size(a: &[Vertex], b: &[Vertex]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// A set of copies of `C_k^(r)` in a host, each stored as its sorted list of
/// canonical host edge indexes. Copies are kept in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleFamily {
    pub k: usize,
    host_edges: usize,
    copies: Vec<Vec<u32>>,
}

impl CycleFamily {
    pub fn new(k: usize, host_edges: usize, mut copies: Vec<Vec<u32>>) -> Self {
        for c in &mut copies {
            c.sort_unstable();
        }
        copies.sort_unstable();
        copies.dedup();
        CycleFamily {
            k,
            host_edges,
            copies,
        }
    }

    pub fn empty(k: usize, host_edges: usize) -> Self {
        CycleFamily::new(k, host_edges, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.copies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }

    pub fn host_edge_count(&self) -> usize {
        self.host_edges
    }

    pub fn copies(&self) -> &[Vec<u32>] {
        &self.copies
    }

    pub fn into_copies(self) -> Vec<Vec<u32>> {
        self.copies
    }

    /// `d_F(σ)` for every `j`-subset `σ` of host edges lying in some copy.
    pub fn tuple_multiplicity(&self, j: usize) -> HashMap<Vec<u32>, u32> {
        let mut m = HashMap::new();
        for c in &self.copies {
            for_each_subset(c, j, |s| *m.entry(s.to_vec()).or_insert(0) += 1);
        }
        m
    }

    /// `Δ_j(F)`, recomputed from the copies.
    pub fn max_tuple_degree(&self, j: usize) -> u32 {
        if j == 1 {
            let mut deg = vec![0u32; self.host_edges];
            for c in &self.copies {
                for &e in c {
                    deg[e as usize] += 1;
                }
            }
            return deg.into_iter().max().unwrap_or(0);
        }
        self.tuple_multiplicity(j).into_values().max().unwrap_or(0)
    }

    /// Checks every copy against [`is_linear_cycle`] in `host`.
    pub fn verify(&self, host: &Hypergraph) -> bool {
        self.copies.iter().all(|c| {
            c.len() == self.k
                && c.iter().all(|&e| (e as usize) < host.edge_count())
                && is_linear_cycle(
                    &c.iter().map(|&e| host.edge(e as usize)).collect::<Vec<_>>(),
                    host.uniformity(),
                )
        })
    }
}

struct Search<'a> {
    g: &'a Hypergraph,
    k: usize,
    budget: u64,
    explored: &'a AtomicU64,
    stop: &'a AtomicBool,
    first_only: bool,
}

struct Walker {
    used: Vec<bool>,
    edges: Vec<u32>,
    cores: Vec<Vertex>,
    local: u64,
    out: Vec<Vec<u32>>,
}

impl Search<'_> {
    const FLUSH: u64 = 1024;

    fn tick(&self, w: &mut Walker) -> Result<()> {
        w.local += 1;
        if w.local >= Self::FLUSH {
            let total = self.explored.fetch_add(w.local, Ordering::Relaxed) + w.local;
            w.local = 0;
            if total > self.budget {
                self.stop.store(true, Ordering::Relaxed);
                return Err(self.budget_error(total));
            }
        }
        Ok(())
    }

    fn budget_error(&self, explored: u64) -> Error {
        Error::BudgetExceeded {
            budget: self.budget,
            explored,
            estimate: estimate_work(self.g, self.k),
        }
    }

    fn from_start(&self, x1: Vertex) -> Result<Vec<Vec<u32>>> {
        let mut w = Walker {
            used: vec![false; self.g.vertex_count()],
            edges: Vec::with_capacity(self.k),
            cores: vec![x1],
            local: 0,
            out: Vec::new(),
        };
        w.used[x1 as usize] = true;
        let res = self.extend(&mut w);
        self.explored.fetch_add(w.local, Ordering::Relaxed);
        res.map(|_| w.out)
    }

    /// Extends the core path `x_1 .. x_i` by an edge through `x_i`.
    fn extend(&self, w: &mut Walker) -> Result<()> {
        if self.stop.load(Ordering::Relaxed) {
            return Ok(());
        }
        self.tick(w)?;
        let x1 = w.cores[0];
        let xi = *w.cores.last().unwrap();
        if w.edges.len() == self.k - 1 {
            // close with an edge through x_k and x_1; canonical direction x_2 < x_k
            if w.cores[1] > xi {
                return Ok(());
            }
            for &f in self.g.edges_with_pair(xi, x1) {
                let fresh = self
                    .g
                    .edge(f as usize)
                    .iter()
                    .all(|&v| v == xi || v == x1 || !w.used[v as usize]);
                if fresh {
                    let mut copy = w.edges.clone();
                    copy.push(f);
                    copy.sort_unstable();
                    w.out.push(copy);
                    if self.first_only {
                        self.stop.store(true, Ordering::Relaxed);
                        return Ok(());
                    }
                }
            }
            return Ok(());
        }
        for &f in self.g.edges_with_vertex(xi) {
            let e = self.g.edge(f as usize);
            if e.iter().any(|&v| v != xi && w.used[v as usize]) {
                continue;
            }
            for &v in e {
                w.used[v as usize] = true;
            }
            w.edges.push(f);
            for &next in e {
                if next <= x1 || next == xi {
                    continue;
                }
                w.cores.push(next);
                let r = self.extend(w);
                w.cores.pop();
                if let Err(err) = r {
                    for &v in e {
                        if v != xi {
                            w.used[v as usize] = false;
                        }
                    }
                    w.edges.pop();
                    return Err(err);
                }
            }
            w.edges.pop();
            for &v in e {
                if v != xi {
                    w.used[v as usize] = false;
                }
            }
        }
        Ok(())
    }
}

/// Rough upper estimate of the partial extensions a full enumeration visits.
pub fn estimate_work(g: &Hypergraph, k: usize) -> f64 {
    let r = g.uniformity() as f64;
    let d = g.max_degree(1).unwrap_or(0) as f64;
    let branch = d * (r - 1.0);
    (g.edge_count() as f64) * r * branch.powi(k.saturating_sub(2) as i32)
}

fn run_search(g: &Hypergraph, k: usize, budget: u64, first_only: bool) -> Result<Vec<Vec<u32>>> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("cycle length {k} < 3")));
    }
    if g.uniformity() < 2 {
        return Err(Error::InvalidParameter("cycles need r >= 2".into()));
    }
    let explored = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let search = Search {
        g,
        k,
        budget,
        explored: &explored,
        stop: &stop,
        first_only,
    };
    let starts: Vec<Vertex> = (0..g.vertex_count() as Vertex)
        .filter(|&v| g.vertex_degree(v) >= 2)
        .collect();
    let parts: Vec<Result<Vec<Vec<u32>>>> = starts
        .par_iter()
        .map(|&x1| search.from_start(x1))
        .collect();
    let mut copies = Vec::new();
    for p in parts {
        copies.extend(p?);
    }
    let total = explored.load(Ordering::Relaxed);
    if total > budget && !(first_only && !copies.is_empty()) {
        return Err(search.budget_error(total));
    }
    Ok(copies)
}

/// All copies of `C_k^(r)` in `g`, using the default work budget.
pub fn enumerate_cycles(g: &Hypergraph, k: usize) -> Result<CycleFamily> {
    enumerate_cycles_with_budget(g, k, default_work_budget())
}

pub fn enumerate_cycles_with_budget(g: &Hypergraph, k: usize, budget: u64) -> Result<CycleFamily> {
    let copies = run_search(g, k, budget, false)?;
    Ok(CycleFamily::new(k, g.edge_count(), copies))
}

/// Sequential enumeration that returns whatever was found when the budget ran out.
/// The flag is `true` when the enumeration completed.
pub fn enumerate_cycles_partial(g: &Hypergraph, k: usize, budget: u64) -> Result<(CycleFamily, bool)> {
    if k < 3 || g.uniformity() < 2 {
        return Err(Error::InvalidParameter(format!("cycle length {k} invalid")));
    }
    let explored = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let search = Search {
        g,
        k,
        budget,
        explored: &explored,
        stop: &stop,
        first_only: false,
    };
    let mut copies = Vec::new();
    let mut complete = true;
    for x1 in 0..g.vertex_count() as Vertex {
        let mut w = Walker {
            used: vec![false; g.vertex_count()],
            edges: Vec::new(),
            cores: vec![x1],
            local: 0,
            out: Vec::new(),
        };
        w.used[x1 as usize] = true;
        let res = search.extend(&mut w);
        explored.fetch_add(w.local, Ordering::Relaxed);
        copies.append(&mut w.out);
        if res.is_err() {
            complete = false;
            break;
        }
    }
    Ok((CycleFamily::new(k, g.edge_count(), copies), complete))
}

/// True iff `g` has no copy of `C_k^(r)`; stops at the first copy found.
pub fn is_cycle_free(g: &Hypergraph, k: usize) -> Result<bool> {
    is_cycle_free_with_budget(g, k, default_work_budget())
}

pub fn is_cycle_free_with_budget(g: &Hypergraph, k: usize, budget: u64) -> Result<bool> {
    Ok(run_search(g, k, budget, true)?.is_empty())
}

/// All lifts of the shadow cycle `x_1 .. x_{2ℓ}` to linear cycles of `host`:
/// edge sets `{f_1, …}` with `f_i ⊇ {x_i, x_{i+1}}` and all vertices distinct.
/// Copies are sorted lists of `host` edge indexes.
pub fn extend_shadow_cycle(
    cycle: &[Vertex],
    shadow: &ShadowGraph,
    host: &Hypergraph,
) -> Result<Vec<Vec<u32>>> {
    let k = cycle.len();
    if k < 3 {
        return Err(Error::NotShadowCycle(format!("length {k} < 3")));
    }
    let mut sorted = cycle.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != k {
        return Err(Error::NotShadowCycle("repeated vertex".into()));
    }
    for i in 0..k {
        let (a, b) = (cycle[i], cycle[(i + 1) % k]);
        if !shadow.contains(a, b) {
            return Err(Error::NotShadowCycle(format!("pair ({a}, {b}) not in shadow")));
        }
    }
    let mut used = vec![false; host.vertex_count()];
    for &v in cycle {
        used[v as usize] = true;
    }
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(k);
    lift(cycle, host, 0, &mut used, &mut chosen, &mut out);
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort_unstable();
    Ok(out)
}

fn lift(
    cycle: &[Vertex],
    host: &Hypergraph,
    i: usize,
    used: &mut [bool],
    chosen: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if i == cycle.len() {
        out.push(chosen.clone());
        return;
    }
    let (a, b) = (cycle[i], cycle[(i + 1) % cycle.len()]);
    for &f in host.edges_with_pair(a, b) {
        let e = host.edge(f as usize);
        if e.iter().any(|&v| v != a && v != b && used[v as usize]) {
            continue;
        }
        for &v in e {
            if v != a && v != b {
                used[v as usize] = true;
            }
        }
        chosen.push(f);
        lift(cycle, host, i + 1, used, chosen, out);
        chosen.pop();
        for &v in e {
            if v != a && v != b {
                used[v as usize] = false;
            }
        }
    }
}

/// Core vertices (degree two) of a copy, in cyclic order starting from the smallest.
pub fn core_cycle(host: &Hypergraph, copy: &[u32]) -> Vec<Vertex> {
    let mut count: HashMap<Vertex, u32> = HashMap::new();
    for &e in copy {
        for &v in host.edge(e as usize) {
            *count.entry(v).or_insert(0) += 1;
        }
    }
    let cores_of = |e: u32| -> Vec<Vertex> {
        host.edge(e as usize)
            .iter()
            .copied()
            .filter(|v| count[v] == 2)
            .collect()
    };
    let mut start = *count
        .iter()
        .filter(|(_, &c)| c == 2)
        .map(|(v, _)| v)
        .min()
        .expect("copy has core vertices");
    let mut seq = vec![start];
    let mut prev_edge = u32::MAX;
    for _ in 0..copy.len() - 1 {
        let e = *copy
            .iter()
            .find(|&&e| e != prev_edge && host.edge(e as usize).contains(&start))
            .unwrap();
        let next = cores_of(e).into_iter().find(|&v| v != start).unwrap();
        seq.push(next);
        prev_edge = e;
        start = next;
    }
    if seq.len() > 2 && seq[1] > seq[seq.len() - 1] {
        seq[1..].reverse();
    }
    seq
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_shapes() {
        for (k, r) in [(3, 2), (4, 3), (6, 4)] {
            let t = CycleTemplate::new(k, r).unwrap();
            let g = t.instance();
            assert_eq!(g.edge_count(), k);
            assert_eq!(g.vertex_count(), k * (r - 1));
            let degs: Vec<usize> = (0..g.vertex_count() as Vertex).map(|v| g.vertex_degree(v)).collect();
            assert_eq!(degs.iter().filter(|&&d| d == 2).count(), k);
            assert!(degs.iter().all(|&d| d == 1 || d == 2));
            assert!(is_linear_cycle(&g.edges().collect::<Vec<_>>(), r));
        }
    }

    #[test]
    fn detector_cases() {
        assert!(is_linear_cycle(&[[0, 1], [1, 2], [2, 3], [3, 0]], 2));
        assert!(is_linear_cycle(&[[0, 1, 2], [2, 3, 4], [4, 5, 0]], 3));
        // three edges through one vertex
        assert!(!is_linear_cycle(&[[0, 1, 2], [0, 3, 4], [0, 5, 6]], 3));
        // non-consecutive edges 0 and 2 share pendant 9
        assert!(!is_linear_cycle(
            &[[0, 1, 9], [1, 2, 5], [2, 3, 9], [3, 0, 7]],
            3
        ));
        // two disjoint 2-cycles are not one 4-cycle... r=2 triangle pair
        assert!(!is_linear_cycle(&[[0, 1], [1, 2], [0, 2], [3, 4]], 2));
        assert!(!is_linear_cycle(&[[0, 1], [1, 2]], 2));
        assert!(!is_linear_cycle(&[vec![0, 1, 2], vec![2, 3]], 3));
    }

    #[test]
    fn k4_has_three_four_cycles() {
        let k4 = Hypergraph::complete(4, 2);
        let f = enumerate_cycles(&k4, 4).unwrap();
        assert_eq!(f.len(), 3);
        assert!(f.verify(&k4));
        assert!(!is_cycle_free(&k4, 4).unwrap());
        assert_eq!(f.max_tuple_degree(1), 2);
    }

    #[test]
    fn stars_are_cycle_free() {
        let star = Hypergraph::from_edges(3, 13, (0..6).map(|i| [0, 2 * i + 1, 2 * i + 2])).unwrap();
        for k in 3..7 {
            assert!(enumerate_cycles(&star, k).unwrap().is_empty());
            assert!(is_cycle_free(&star, k).unwrap());
        }
    }

    #[test]
    fn template_contains_itself() {
        let g = CycleTemplate::new(4, 3).unwrap().instance();
        assert!(!is_cycle_free(&g, 4).unwrap());
        assert_eq!(enumerate_cycles(&g, 4).unwrap().len(), 1);
        assert_eq!(core_cycle(&g, &[0, 1, 2, 3]), vec![0, 1, 2, 3]);
    }

    #[test]
    fn budget_refusal() {
        let g = Hypergraph::complete(9, 3);
        match enumerate_cycles_with_budget(&g, 4, 100) {
            Err(Error::BudgetExceeded { budget: 100, .. }) => {}
            other => panic!("{other:?}"),
        }
        let (part, complete) = enumerate_cycles_partial(&g, 4, 5_000).unwrap();
        assert!(!complete);
        assert!(part.verify(&g));
    }
}
