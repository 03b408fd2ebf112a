//! Balanced supersaturation for `C_{2ℓ}^(r)`: pass to an `r`-partite subgraph,
//! keep the largest dyadic codegree class, regularize pair codegrees, pick a
//! large 2-shadow, select a degree-capped family of graph cycles in it and
//! lift every selected cycle to hypergraph cycles.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::cycles::{core_cycle, enumerate_cycles_with_budget, extend_shadow_cycle, CycleFamily};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, PartiteHypergraph, ShadowGraph, Vertex};
use crate::util::for_each_subset;

/// Part pairs `(i, j)`, `i < j`, in lexicographic order.
pub fn pair_classes(r: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(r * (r - 1) / 2);
    for i in 0..r {
        for j in i + 1..r {
            v.push((i, j));
        }
    }
    v
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

/// Erdős–Kleitman partition by conditional expectations.
///
/// Vertices are placed one at a time into the part that maximizes the
/// expected number of transversal edges when the unplaced vertices are put
/// in uniformly random parts. The expectation starts at `r!·e(G)/r^r` and
/// never decreases, so the final transversal count meets that bound.
pub fn ek_partition(g: &Hypergraph) -> PartiteHypergraph {
    let r = g.uniformity();
    let n = g.vertex_count();
    // Scaled by r^r: an edge with `a` placed vertices in distinct parts is worth (r-a)!·r^a.
    let weight: Vec<u128> = (0..=r)
        .map(|a| factorial(r - a) * (r as u128).pow(a as u32))
        .collect();
    let m = g.edge_count();
    let mut used_parts = vec![0u64; m];
    let mut placed = vec![0usize; m];
    let mut dead = vec![false; m];
    let mut part_of = vec![None; n];
    for v in 0..n as Vertex {
        let mut best = (0usize, i128::MIN);
        for c in 0..r {
            let mut gain: i128 = 0;
            for &e in g.edges_with_vertex(v) {
                let e = e as usize;
                if dead[e] {
                    continue;
                }
                let old = weight[placed[e]] as i128;
                let new = if used_parts[e] >> c & 1 == 1 {
                    0
                } else {
                    weight[placed[e] + 1] as i128
                };
                gain += new - old;
            }
            if gain > best.1 {
                best = (c, gain);
            }
        }
        let c = best.0;
        part_of[v as usize] = Some(c);
        for &e in g.edges_with_vertex(v) {
            let e = e as usize;
            if used_parts[e] >> c & 1 == 1 {
                dead[e] = true;
            }
            used_parts[e] |= 1 << c;
            placed[e] += 1;
        }
    }
    transversal_subgraph(g, part_of).expect("assignment covers every vertex")
}

/// The edges of `g` meeting each part exactly once, for the given assignment.
pub fn transversal_subgraph(g: &Hypergraph, part_of: Vec<Option<usize>>) -> Result<PartiteHypergraph> {
    let r = g.uniformity();
    if part_of.len() != g.vertex_count() {
        return Err(Error::InvalidParameter("partition length mismatch".into()));
    }
    let keep = (0..g.edge_count()).filter(|&i| {
        let mut mask = 0u64;
        g.edge(i).iter().all(|&v| match part_of[v as usize] {
            Some(p) if p < r && mask >> p & 1 == 0 => {
                mask |= 1 << p;
                true
            }
            _ => false,
        })
    });
    PartiteHypergraph::new(g.edge_subgraph(keep), part_of)
}

/// True when `e(H)·r^r ≥ r!·e(G)`.
pub fn meets_ek_bound(r: usize, host_edges: usize, partite_edges: usize) -> bool {
    partite_edges as u128 * (r as u128).pow(r as u32) >= factorial(r) * host_edges as u128
}

#[inline]
fn dyadic(d: usize) -> u32 {
    debug_assert!(d > 0);
    usize::BITS - 1 - d.leading_zeros()
}

#[derive(Debug, Clone)]
pub struct DyadicSelection {
    /// `s_{i,j}` per pair class, in [`pair_classes`] order.
    pub s0: Vec<u32>,
    pub h0: PartiteHypergraph,
    pub bucket_sizes: BTreeMap<Vec<u32>, usize>,
    pub source_edges: usize,
}

impl DyadicSelection {
    pub fn bucket_count(&self) -> usize {
        self.bucket_sizes.len()
    }

    /// Pigeonhole certificate `|E(s₀)|·#buckets ≥ e(H)`.
    pub fn pigeonhole_holds(&self) -> bool {
        self.h0.graph().edge_count() * self.bucket_count() >= self.source_edges
    }
}

/// Codegree class vector of partite edge `e`: `floor(log2 d_H(v_i, v_j))` per pair class.
pub fn codegree_class(h: &PartiteHypergraph, e: usize) -> Vec<u32> {
    let g = h.graph();
    pair_classes(h.part_count())
        .into_iter()
        .map(|(i, j)| dyadic(g.codegree(h.vertex_in_part(e, i), h.vertex_in_part(e, j))))
        .collect()
}

/// Keeps the largest dyadic codegree bucket; ties go to the lexicographically smallest `s`.
pub fn dyadic_select(h: &PartiteHypergraph) -> DyadicSelection {
    let g = h.graph();
    let mut buckets: BTreeMap<Vec<u32>, Vec<usize>> = BTreeMap::new();
    for e in 0..g.edge_count() {
        buckets.entry(codegree_class(h, e)).or_default().push(e);
    }
    let bucket_sizes = buckets.iter().map(|(k, v)| (k.clone(), v.len())).collect();
    let mut best: Option<(&Vec<u32>, &Vec<usize>)> = None;
    for (s, edges) in &buckets {
        if best.is_none_or(|(_, b)| edges.len() > b.len()) {
            best = Some((s, edges));
        }
    }
    let (s0, chosen) = match best {
        Some((s, e)) => (s.clone(), e.clone()),
        None => (vec![0; pair_classes(h.part_count()).len()], Vec::new()),
    };
    let sub = g.edge_subgraph(chosen);
    let part_of = restrict_to_support(&sub, h.assignment());
    DyadicSelection {
        s0,
        h0: PartiteHypergraph::new(sub, part_of).expect("sub-edge-set stays partite"),
        bucket_sizes,
        source_edges: g.edge_count(),
    }
}

fn restrict_to_support(g: &Hypergraph, part_of: &[Option<usize>]) -> Vec<Option<usize>> {
    (0..g.vertex_count() as Vertex)
        .map(|v| {
            if g.vertex_degree(v) > 0 {
                part_of[v as usize]
            } else {
                None
            }
        })
        .collect()
}

/// One regularization deletion: every edge through `pair` was removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deletion {
    pub class: (usize, usize),
    pub pair: (Vertex, Vertex),
    pub codegree: usize,
    pub edges_removed: usize,
}

/// `H′`: parts `U_1..U_r` with `|U_1| ≥ … ≥ |U_r|`, pair codegrees inside
/// `[Δ_{ij}/λ, 2Δ_{ij}]`, and no isolated vertices.
#[derive(Debug, Clone)]
pub struct RegularizedPartite {
    partite: PartiteHypergraph,
    /// `s_{i,j}` per pair class of the reordered parts.
    pub s0: Vec<u32>,
    pub lambda: f64,
    pub deletions: Vec<Deletion>,
    pub source_edges: usize,
    /// `part_order[t]` is the original part index of `U_{t+1}`.
    pub part_order: Vec<usize>,
}

impl RegularizedPartite {
    pub fn partite(&self) -> &PartiteHypergraph {
        &self.partite
    }

    pub fn graph(&self) -> &Hypergraph {
        self.partite.graph()
    }

    pub fn r(&self) -> usize {
        self.partite.part_count()
    }

    /// `R = C(r, 2)`.
    pub fn pair_class_count(&self) -> usize {
        let r = self.r();
        r * (r - 1) / 2
    }

    fn class_index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        pair_classes(self.r()).iter().position(|&c| c == (i, j)).unwrap()
    }

    /// `Δ_{ij} = 2^{s_{i,j}}`.
    pub fn scale(&self, i: usize, j: usize) -> u64 {
        1u64 << self.s0[self.class_index(i, j)]
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        (0..self.r()).map(|i| self.partite.part(i).len()).collect()
    }

    pub fn deleted_edges(&self) -> usize {
        self.deletions.iter().map(|d| d.edges_removed).sum()
    }

    /// Every vertex of every part lies in some edge.
    pub fn check_no_isolated(&self) -> bool {
        let g = self.graph();
        (0..g.vertex_count() as Vertex)
            .filter(|&v| self.partite.part_of(v).is_some())
            .all(|v| g.vertex_degree(v) > 0)
    }

    /// Every co-occurring cross pair has `Δ/λ ≤ d ≤ 2Δ`. Returns the first violation.
    pub fn check_codegree_window(&self) -> Option<((Vertex, Vertex), usize)> {
        let g = self.graph();
        for ((a, b), d) in g.pair_codegrees() {
            let (pa, pb) = (self.partite.part_of(a).unwrap(), self.partite.part_of(b).unwrap());
            let delta = self.scale(pa, pb) as f64;
            if (d as f64) < delta / self.lambda || d as f64 > 2.0 * delta {
                return Some(((a, b), d));
            }
        }
        None
    }

    pub fn shadow(&self, i: usize, j: usize) -> Result<ShadowGraph> {
        self.partite.shadow(i, j)
    }
}

/// Repeatedly deletes all edges through any pair with `0 < d < Δ_{ij}/λ`,
/// scanning pairs by `(class, v_i, v_j)`, then drops isolated vertices.
pub fn regularize(h0: &PartiteHypergraph, s0: &[u32], lambda: f64) -> Result<RegularizedPartite> {
    let r = h0.part_count();
    let classes = pair_classes(r);
    if s0.len() != classes.len() {
        return Err(Error::InvalidParameter(format!(
            "bucket vector has {} entries, expected {}",
            s0.len(),
            classes.len()
        )));
    }
    if !(lambda > 1.0) {
        return Err(Error::InvalidParameter(format!("lambda={lambda} must exceed 1")));
    }
    let g = h0.graph();
    let m = g.edge_count();
    let mut alive = vec![true; m];
    let mut codeg: Vec<BTreeMap<(Vertex, Vertex), Vec<u32>>> = vec![BTreeMap::new(); classes.len()];
    for e in 0..m {
        for (c, &(i, j)) in classes.iter().enumerate() {
            codeg[c]
                .entry((h0.vertex_in_part(e, i), h0.vertex_in_part(e, j)))
                .or_default()
                .push(e as u32);
        }
    }
    let mut live_count: Vec<BTreeMap<(Vertex, Vertex), usize>> = codeg
        .iter()
        .map(|mp| mp.iter().map(|(k, v)| (*k, v.len())).collect())
        .collect();
    let mut deletions = Vec::new();
    loop {
        let mut changed = false;
        for (c, &(i, j)) in classes.iter().enumerate() {
            let threshold = (1u64 << s0[c]) as f64 / lambda;
            let pairs: Vec<(Vertex, Vertex)> = live_count[c].keys().copied().collect();
            for pair in pairs {
                let d = live_count[c][&pair];
                if d == 0 || d as f64 >= threshold {
                    continue;
                }
                let victims: Vec<u32> = codeg[c][&pair]
                    .iter()
                    .copied()
                    .filter(|&e| alive[e as usize])
                    .collect();
                for &e in &victims {
                    alive[e as usize] = false;
                    for (c2, &(a, b)) in classes.iter().enumerate() {
                        let key = (h0.vertex_in_part(e as usize, a), h0.vertex_in_part(e as usize, b));
                        *live_count[c2].get_mut(&key).unwrap() -= 1;
                    }
                }
                deletions.push(Deletion {
                    class: (i, j),
                    pair,
                    codegree: d,
                    edges_removed: victims.len(),
                });
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let survivors = g.edge_subgraph((0..m).filter(|&e| alive[e]));
    if survivors.is_empty() {
        return Err(Error::RegularizationAnnihilated { trace: deletions });
    }
    let part_of = restrict_to_support(&survivors, h0.assignment());
    // reorder parts by size, descending; ties keep original order
    let mut sizes = vec![0usize; r];
    for p in part_of.iter().flatten() {
        sizes[*p] += 1;
    }
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by_key(|&p| (std::cmp::Reverse(sizes[p]), p));
    let mut new_index = vec![0; r];
    for (t, &p) in order.iter().enumerate() {
        new_index[p] = t;
    }
    let relabeled: Vec<Option<usize>> = part_of.iter().map(|p| p.map(|p| new_index[p])).collect();
    let old_class = |a: usize, b: usize| {
        let (x, y) = (order[a].min(order[b]), order[a].max(order[b]));
        classes.iter().position(|&c| c == (x, y)).unwrap()
    };
    let s_new: Vec<u32> = classes.iter().map(|&(a, b)| s0[old_class(a, b)]).collect();
    Ok(RegularizedPartite {
        partite: PartiteHypergraph::new(survivors, relabeled)?,
        s0: s_new,
        lambda,
        deletions,
        source_edges: m,
        part_order: order,
    })
}

/// Which part pairs [`select_shadow`] considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShadowScope {
    /// Pairs `(1, j)` with the largest part, `j = 2..r`.
    #[default]
    FirstPart,
    /// Every pair `(i, j)`.
    AllPairs,
    /// Exactly this pair of (size-ordered) parts.
    Fixed(usize, usize),
}

#[derive(Debug, Clone)]
pub struct ShadowSelection {
    pub pair: (usize, usize),
    pub shadow: ShadowGraph,
    /// `|∂_{i,j}|` for every candidate pair, in scan order.
    pub candidates: Vec<((usize, usize), usize)>,
}

/// Reference level `K^{1/(r−1)}·|U_1|^{2−1/(r−1)}` for the largest-shadow claim
/// (polylog factor set to 1).
pub fn shadow_claim_reference(k_density: f64, largest_part: usize, r: usize) -> f64 {
    let t = 1.0 / (r as f64 - 1.0);
    k_density.powf(t) * (largest_part as f64).powf(2.0 - t)
}

/// The part pair with the largest shadow; ties go to the smallest pair.
pub fn select_shadow(h: &RegularizedPartite, scope: ShadowScope) -> Result<ShadowSelection> {
    let r = h.r();
    let pairs: Vec<(usize, usize)> = match scope {
        ShadowScope::FirstPart => (1..r).map(|j| (0, j)).collect(),
        ShadowScope::AllPairs => pair_classes(r),
        ShadowScope::Fixed(i, j) => {
            if i == j || i.max(j) >= r {
                return Err(Error::InvalidParameter(format!("no part pair ({i}, {j}) with r={r}")));
            }
            vec![(i.min(j), i.max(j))]
        }
    };
    let mut best: Option<((usize, usize), ShadowGraph)> = None;
    let mut candidates = Vec::new();
    for (i, j) in pairs {
        let s = h.shadow(i, j)?;
        candidates.push(((i, j), s.len()));
        if best.as_ref().is_none_or(|(_, b)| s.len() > b.len()) {
            best = Some(((i, j), s));
        }
    }
    let (pair, shadow) =
        best.ok_or_else(|| Error::InvalidParameter("need at least two parts".into()))?;
    Ok(ShadowSelection {
        pair,
        shadow,
        candidates,
    })
}

/// Per-`j` multiplicity caps for `j = 1..2ℓ−1`; `None` is unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caps(pub Vec<Option<u64>>);

impl Caps {
    pub fn unbounded(ell: usize) -> Self {
        Caps(vec![None; 2 * ell - 1])
    }

    pub fn get(&self, j: usize) -> Option<u64> {
        self.0.get(j - 1).copied().flatten()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CapPolicy {
    Unbounded,
    Explicit(Vec<u64>),
    /// `Q·k^{2ℓ−j−(j−1)/(ℓ−1)}·m^{1−1/ℓ}`, floored, at least 1.
    Auto { q: f64 },
}

impl CapPolicy {
    pub fn resolve(&self, ell: usize, k: f64, m: f64) -> Result<Caps> {
        let len = 2 * ell - 1;
        match self {
            CapPolicy::Unbounded => Ok(Caps::unbounded(ell)),
            CapPolicy::Explicit(v) => {
                if v.len() != len || v.contains(&0) {
                    return Err(Error::InvalidParameter(format!(
                        "need {len} positive caps, got {v:?}"
                    )));
                }
                Ok(Caps(v.iter().map(|&c| Some(c)).collect()))
            }
            CapPolicy::Auto { q } => Ok(Caps(
                (1..=len)
                    .map(|j| {
                        let (jf, l) = (j as f64, ell as f64);
                        let exp = 2.0 * l - jf - (jf - 1.0) / (l - 1.0);
                        let v = q * k.powf(exp) * m.powf(1.0 - 1.0 / l);
                        Some(if v.is_finite() { v.floor().max(1.0) as u64 } else { u64::MAX })
                    })
                    .collect(),
            )),
        }
    }
}

/// Greedy cap-respecting selection of `2ℓ`-cycles in the 2-graph `graph`.
///
/// Cycles are scanned in canonical order; a cycle is admitted when no
/// `j`-subset of its edges (`1 ≤ j ≤ 2ℓ−1`) would exceed `cap_j`.
pub fn shadow_cycle_family(graph: &Hypergraph, ell: usize, caps: &Caps, budget: u64) -> Result<CycleFamily> {
    let k = 2 * ell;
    let all = enumerate_cycles_with_budget(graph, k, budget)?;
    Ok(admit_greedily(all, caps))
}

pub fn admit_greedily(all: CycleFamily, caps: &Caps) -> CycleFamily {
    let k = all.k;
    let host = all.host_edge_count();
    let mut mult: HashMap<Vec<u32>, u64> = HashMap::new();
    let mut admitted = Vec::new();
    for copy in all.into_copies() {
        let mut ok = true;
        for j in 1..k {
            if let Some(cap) = caps.get(j) {
                for_each_subset(&copy, j, |s| {
                    if ok && mult.get(s).copied().unwrap_or(0) >= cap {
                        ok = false;
                    }
                });
            }
            if !ok {
                break;
            }
        }
        if ok {
            for j in 1..k {
                for_each_subset(&copy, j, |s| *mult.entry(s.to_vec()).or_insert(0) += 1);
            }
            admitted.push(copy);
        }
    }
    CycleFamily::new(k, host, admitted)
}

#[derive(Debug, Clone)]
pub enum PartitionStrategy {
    Greedy,
    Given(Vec<Option<usize>>),
}

#[derive(Debug, Clone)]
pub struct SupersatConfig {
    pub ell: usize,
    pub lambda: f64,
    pub caps: CapPolicy,
    pub partition: PartitionStrategy,
    pub scope: ShadowScope,
    pub budget: u64,
}

impl SupersatConfig {
    pub fn new(ell: usize, lambda: f64) -> Self {
        SupersatConfig {
            ell,
            lambda,
            caps: CapPolicy::Auto { q: 1.0 },
            partition: PartitionStrategy::Greedy,
            scope: ShadowScope::FirstPart,
            budget: crate::cycles::default_work_budget(),
        }
    }
}

/// Every intermediate statistic of one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub r: usize,
    pub n: usize,
    pub ell: usize,
    pub lambda: f64,
    pub host_edges: usize,
    pub partite_edges: usize,
    pub ek_bound_met: bool,
    pub buckets: usize,
    pub s0: Vec<u32>,
    pub bucket_edges: usize,
    pub regularized_edges: usize,
    pub deletions: usize,
    pub deleted_edges: usize,
    pub lambda_exceeds_2r: bool,
    pub part_sizes: Vec<usize>,
    pub scales: Vec<((usize, usize), u64)>,
    pub shadow_pair: (usize, usize),
    pub shadow_candidates: Vec<((usize, usize), usize)>,
    pub shadow_size: usize,
    pub m: usize,
    pub k: f64,
    pub caps: Vec<Option<u64>>,
    pub shadow_cycles: usize,
    pub shadow_family: usize,
    pub shadow_family_degrees: Vec<u32>,
    pub family: usize,
    pub family_degrees: Vec<u32>,
    pub declared_caps: Vec<u128>,
    pub extension_histogram: BTreeMap<usize, usize>,
    /// `|F| / (k^{2ℓ}·m²)`, the achieved size ratio against the graph guarantee.
    pub size_ratio: f64,
    pub note: String,
}

impl Certificate {
    /// Stable `key=value` rendering, one field per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let list = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "r={}", self.r);
        let _ = writeln!(s, "n={}", self.n);
        let _ = writeln!(s, "ell={}", self.ell);
        let _ = writeln!(s, "lambda={}", self.lambda);
        let _ = writeln!(s, "e_G={}", self.host_edges);
        let _ = writeln!(s, "e_H={}", self.partite_edges);
        let _ = writeln!(s, "ek_bound_met={}", self.ek_bound_met);
        let _ = writeln!(s, "buckets={}", self.buckets);
        let _ = writeln!(s, "s0={}", list(&self.s0));
        let _ = writeln!(s, "e_H0={}", self.bucket_edges);
        let _ = writeln!(s, "e_Hprime={}", self.regularized_edges);
        let _ = writeln!(s, "deletions={}", self.deletions);
        let _ = writeln!(s, "deleted_edges={}", self.deleted_edges);
        let _ = writeln!(s, "lambda_exceeds_2R={}", self.lambda_exceeds_2r);
        let _ = writeln!(
            s,
            "part_sizes={}",
            self.part_sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
        );
        for ((i, j), d) in &self.scales {
            let _ = writeln!(s, "Delta_{}_{}={}", i + 1, j + 1, d);
        }
        let _ = writeln!(s, "shadow_pair={},{}", self.shadow_pair.0 + 1, self.shadow_pair.1 + 1);
        for ((i, j), c) in &self.shadow_candidates {
            let _ = writeln!(s, "shadow_size_{}_{}={}", i + 1, j + 1, c);
        }
        let _ = writeln!(s, "shadow_size={}", self.shadow_size);
        let _ = writeln!(s, "m={}", self.m);
        let _ = writeln!(s, "k={:.6e}", self.k);
        for (j, c) in self.caps.iter().enumerate() {
            let c = c.map_or("inf".to_string(), |c| c.to_string());
            let _ = writeln!(s, "cap_{}={}", j + 1, c);
        }
        let _ = writeln!(s, "shadow_cycles={}", self.shadow_cycles);
        let _ = writeln!(s, "shadow_family={}", self.shadow_family);
        let _ = writeln!(s, "shadow_family_Delta={}", list(&self.shadow_family_degrees));
        let _ = writeln!(s, "family={}", self.family);
        let _ = writeln!(s, "family_Delta={}", list(&self.family_degrees));
        let _ = writeln!(
            s,
            "declared_caps={}",
            self.declared_caps.iter().map(u128::to_string).collect::<Vec<_>>().join(",")
        );
        let hist = self
            .extension_histogram
            .iter()
            .map(|(k, v)| format!("{k}:{v}"))
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(s, "extension_histogram={hist}");
        let _ = writeln!(s, "size_ratio={:.6e}", self.size_ratio);
        let _ = writeln!(s, "note={}", self.note);
        s
    }
}

#[derive(Debug, Clone)]
pub struct BalancedFamily {
    /// Host of the lifted family (the input graph).
    pub host: Hypergraph,
    pub regularized: RegularizedPartite,
    pub shadow_graph: Hypergraph,
    /// `F`: cycles of the shadow 2-graph.
    pub shadow_family: CycleFamily,
    /// `F′`: lifted copies, as indexes into `host`'s edges.
    pub family: CycleFamily,
    pub certificate: Certificate,
}

impl BalancedFamily {
    /// Recomputes `Δ_j(F′)` and compares with the declared caps.
    pub fn audit(&self) -> bool {
        (1..2 * self.certificate.ell).all(|j| {
            self.family.max_tuple_degree(j) as u128 <= self.certificate.declared_caps[j - 1]
        })
    }
}

/// Runs the whole supersaturation pipeline on `g`.
pub fn build_balanced_family(g: &Hypergraph, cfg: &SupersatConfig) -> Result<BalancedFamily> {
    let r = g.uniformity();
    let ell = cfg.ell;
    if ell < 2 {
        return Err(Error::InvalidParameter(format!("ell={ell} must be at least 2")));
    }
    if r < 2 {
        return Err(Error::InvalidParameter("uniformity must be at least 2".into()));
    }
    if g.is_empty() {
        return Err(Error::InvalidParameter("host has no edges".into()));
    }
    let h = match &cfg.partition {
        PartitionStrategy::Greedy => ek_partition(g),
        PartitionStrategy::Given(p) => transversal_subgraph(g, p.clone())?,
    };
    let partite_edges = h.graph().edge_count();
    if partite_edges == 0 {
        return Err(Error::InvalidParameter("partition has no transversal edges".into()));
    }
    let dy = dyadic_select(&h);
    let reg = regularize(&dy.h0, &dy.s0, cfg.lambda)?;
    let sel = select_shadow(&reg, cfg.scope)?;
    let (a, b) = sel.pair;
    let sizes = reg.part_sizes();
    let m = sizes[a] + sizes[b];
    let k = sel.shadow.len() as f64 / (m as f64).powf(1.0 + 1.0 / ell as f64);
    let caps = cfg.caps.resolve(ell, k, m as f64)?;
    let shadow_graph = sel.shadow.to_graph();
    let all_shadow = enumerate_cycles_with_budget(&shadow_graph, 2 * ell, cfg.budget)?;
    let shadow_cycles = all_shadow.len();
    let shadow_family = admit_greedily(all_shadow, &caps);

    let hp = reg.graph();
    let mut lifted: Vec<Vec<u32>> = Vec::new();
    let mut histogram = BTreeMap::new();
    for copy in shadow_family.copies() {
        let cyc = core_cycle(&shadow_graph, copy);
        let ext = extend_shadow_cycle(&cyc, &sel.shadow, hp)?;
        *histogram.entry(ext.len()).or_insert(0) += 1;
        for c in ext {
            lifted.push(
                c.iter()
                    .map(|&e| g.index_of(hp.edge(e as usize)).expect("H′ ⊆ G") as u32)
                    .collect(),
            );
        }
    }
    let family = CycleFamily::new(2 * ell, g.edge_count(), lifted);

    let scale = reg.scale(a, b) as u128;
    let shadow_degrees: Vec<u32> = (1..2 * ell).map(|j| shadow_family.max_tuple_degree(j)).collect();
    let declared: Vec<u128> = (1..2 * ell)
        .map(|j| {
            let base = caps.get(j).map_or(shadow_degrees[j - 1] as u128, |c| c as u128);
            base.saturating_mul((2 * scale).saturating_pow((2 * ell - j) as u32))
        })
        .collect();
    let family_degrees: Vec<u32> = (1..2 * ell).map(|j| family.max_tuple_degree(j)).collect();

    let note = if sel.shadow.is_empty() {
        "shadow empty".to_string()
    } else if shadow_cycles == 0 {
        format!("shadow has no {}-cycle", 2 * ell)
    } else if family.is_empty() {
        "no admitted shadow cycle lifts to distinct pendants".to_string()
    } else {
        "ok".to_string()
    };
    let r_classes = r * (r - 1) / 2;
    let certificate = Certificate {
        r,
        n: g.vertex_count(),
        ell,
        lambda: cfg.lambda,
        host_edges: g.edge_count(),
        partite_edges,
        ek_bound_met: meets_ek_bound(r, g.edge_count(), partite_edges),
        buckets: dy.bucket_count(),
        s0: reg.s0.clone(),
        bucket_edges: dy.h0.graph().edge_count(),
        regularized_edges: hp.edge_count(),
        deletions: reg.deletions.len(),
        deleted_edges: reg.deleted_edges(),
        lambda_exceeds_2r: cfg.lambda > 2.0 * r_classes as f64,
        part_sizes: sizes,
        scales: pair_classes(r).into_iter().map(|(i, j)| ((i, j), reg.scale(i, j))).collect(),
        shadow_pair: sel.pair,
        shadow_candidates: sel.candidates.clone(),
        shadow_size: sel.shadow.len(),
        m,
        k,
        caps: caps.0.clone(),
        shadow_cycles,
        shadow_family: shadow_family.len(),
        shadow_family_degrees: shadow_degrees,
        family: family.len(),
        family_degrees,
        declared_caps: declared,
        extension_histogram: histogram,
        size_ratio: shadow_family.len() as f64 / (k.powi(2 * ell as i32) * (m * m) as f64),
        note,
    };
    Ok(BalancedFamily {
        host: g.clone(),
        regularized: reg,
        shadow_graph,
        shadow_family,
        family,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::CycleTemplate;

    #[test]
    fn ek_single_edge_and_k4() {
        let g = Hypergraph::from_edges(2, 2, [[0, 1]]).unwrap();
        assert_eq!(ek_partition(&g).graph().edge_count(), 1);
        let k4 = Hypergraph::complete(4, 2);
        let h = ek_partition(&k4);
        assert!(h.graph().edge_count() >= 3);
        assert!(meets_ek_bound(2, 6, h.graph().edge_count()));
    }

    #[test]
    fn uniform_codegrees_form_one_bucket() {
        // a perfect 3-partite matching: every codegree is 1
        let g = Hypergraph::from_edges(3, 9, [[0, 3, 6], [1, 4, 7], [2, 5, 8]]).unwrap();
        let parts = (0..9).map(|v| Some(v / 3)).collect();
        let h = PartiteHypergraph::new(g, parts).unwrap();
        let d = dyadic_select(&h);
        assert_eq!(d.s0, vec![0, 0, 0]);
        assert_eq!(d.bucket_count(), 1);
        assert_eq!(d.h0.graph().edge_count(), 3);
    }

    #[test]
    fn two_codegree_classes_pick_the_larger() {
        // pair (0,3) has codegree 2 (edges via 6 and 7); pairs (1,4),(2,5) codegree 1
        let g = Hypergraph::from_edges(3, 9, [[0, 3, 6], [0, 3, 7], [1, 4, 8]]).unwrap();
        let parts = vec![Some(0), Some(0), Some(0), Some(1), Some(1), Some(1), Some(2), Some(2), Some(2)];
        let h = PartiteHypergraph::new(g, parts).unwrap();
        let d = dyadic_select(&h);
        assert_eq!(d.bucket_count(), 2);
        assert_eq!(d.s0, vec![1, 0, 0]);
        assert_eq!(d.h0.graph().edge_count(), 2);
        assert!(d.pigeonhole_holds());
    }

    #[test]
    fn regularize_fixpoint_and_single_deletion() {
        let g = Hypergraph::from_edges(3, 9, [[0, 3, 6], [0, 3, 7], [1, 4, 8]]).unwrap();
        let parts = vec![Some(0), Some(0), Some(0), Some(1), Some(1), Some(1), Some(2), Some(2), Some(2)];
        let h = PartiteHypergraph::new(g, parts).unwrap();
        // Δ_12 = 2, λ = 1.5: threshold 4/3 kills the codegree-1 pair (1,4)
        let reg = regularize(&h, &[1, 0, 0], 1.5).unwrap();
        assert_eq!(reg.graph().edge_count(), 2);
        assert_eq!(reg.deletions.len(), 1);
        assert_eq!(reg.deletions[0].pair, (1, 4));
        assert!(reg.check_no_isolated());
        assert!(reg.check_codegree_window().is_none());

        let again = regularize(reg.partite(), &reg.s0, 1.5).unwrap();
        assert!(again.deletions.is_empty());
        assert_eq!(again.graph(), reg.graph());
    }

    #[test]
    fn regularize_annihilation_is_reported() {
        let g = Hypergraph::from_edges(3, 9, [[1, 4, 8]]).unwrap();
        let parts = vec![Some(0), Some(0), Some(0), Some(1), Some(1), Some(1), Some(2), Some(2), Some(2)];
        let h = PartiteHypergraph::new(g, parts).unwrap();
        match regularize(&h, &[2, 0, 0], 2.0) {
            Err(Error::RegularizationAnnihilated { trace }) => assert_eq!(trace.len(), 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn select_shadow_prefers_complete_bipartite_side() {
        // U1 = {0,1}, U2 = {2,3}, U3 = {4,5}; every U1×U2 pair covered, U1×U3 a matching
        let g = Hypergraph::from_edges(3, 6, [[0, 2, 4], [0, 3, 4], [1, 2, 5], [1, 3, 5]]).unwrap();
        let parts = vec![Some(0), Some(0), Some(1), Some(1), Some(2), Some(2)];
        let h = PartiteHypergraph::new(g, parts).unwrap();
        let d = dyadic_select(&h);
        let reg = regularize(&d.h0, &d.s0, 4.0).unwrap();
        let sel = select_shadow(&reg, ShadowScope::FirstPart).unwrap();
        assert_eq!(sel.pair, (0, 1));
        assert_eq!(sel.shadow.len(), 4);
    }

    #[test]
    fn single_edge_shadow_tie_goes_to_smallest_j() {
        let g = Hypergraph::from_edges(3, 3, [[0, 1, 2]]).unwrap();
        let h = PartiteHypergraph::new(g, vec![Some(0), Some(1), Some(2)]).unwrap();
        let d = dyadic_select(&h);
        let reg = regularize(&d.h0, &d.s0, 2.0).unwrap();
        let sel = select_shadow(&reg, ShadowScope::FirstPart).unwrap();
        assert_eq!(sel.pair, (0, 1));
        assert!(sel.candidates.iter().all(|&(_, c)| c == 1));
    }

    #[test]
    fn shadow_family_singleton_and_unbounded() {
        let c4 = Hypergraph::from_edges(2, 4, [[0, 1], [1, 2], [2, 3], [3, 0]]).unwrap();
        let f = shadow_cycle_family(&c4, 2, &Caps(vec![Some(1); 3]), 1 << 20).unwrap();
        assert_eq!(f.len(), 1);
        for j in 1..4 {
            assert_eq!(f.max_tuple_degree(j), 1);
        }
        let k33 = Hypergraph::from_edges(2, 6, (0..3).flat_map(|a| (3..6).map(move |b| [a, b]))).unwrap();
        let f = shadow_cycle_family(&k33, 2, &Caps::unbounded(2), 1 << 20).unwrap();
        assert_eq!(f.len(), 9);
    }

    #[test]
    fn star_pipeline_gives_empty_family() {
        let star = Hypergraph::from_edges(3, 13, (0..6).map(|i| [0, 2 * i + 1, 2 * i + 2])).unwrap();
        let bf = build_balanced_family(&star, &SupersatConfig::new(2, 8.0)).unwrap();
        assert!(bf.family.is_empty());
        assert!(bf.audit());
    }

    #[test]
    fn template_recovered_with_separating_partition() {
        let t = CycleTemplate::new(4, 3).unwrap().instance();
        // cores 0,2 in part 0; 1,3 in part 1; pendants 4..8 in part 2
        let parts = vec![Some(0), Some(1), Some(0), Some(1), Some(2), Some(2), Some(2), Some(2)];
        let mut cfg = SupersatConfig::new(2, 8.0);
        cfg.partition = PartitionStrategy::Given(parts);
        // all three shadows have 4 pairs and the pendant part sorts first
        for scope in [ShadowScope::FirstPart, ShadowScope::AllPairs] {
            cfg.scope = scope;
            let bf = build_balanced_family(&t, &cfg).unwrap();
            assert!(bf.family.is_empty());
            assert_eq!(bf.certificate.note, "shadow has no 4-cycle");
        }
        cfg.scope = ShadowScope::Fixed(1, 2);
        let bf = build_balanced_family(&t, &cfg).unwrap();
        assert_eq!(bf.family.copies(), &[vec![0, 1, 2, 3]]);
        assert!(bf.audit());
        assert!(bf.certificate.to_text().contains("family=1\n"));
    }

    #[test]
    fn complete_tripartite_lifts_every_copy() {
        // K(4,4,4): 36 four-cycles in the part-1/part-2 shadow, 4! pendant choices each
        let edges = (0..4).flat_map(|a| (4..8).flat_map(move |b| (8..12).map(move |c| [a, b, c])));
        let g = Hypergraph::from_edges(3, 12, edges).unwrap();
        let mut cfg = SupersatConfig::new(2, 4.0);
        cfg.partition = PartitionStrategy::Given((0..12).map(|v| Some(v / 4)).collect());
        cfg.caps = CapPolicy::Unbounded;
        let bf = build_balanced_family(&g, &cfg).unwrap();
        assert_eq!(bf.shadow_family.len(), 36);
        assert_eq!(bf.family.len(), 36 * 24);
        assert_eq!(bf.certificate.extension_histogram.get(&24), Some(&36));
        assert!(bf.family.verify(&g));
        assert!(bf.audit());
    }
}
