//! Hypergraph containers for the cycle-incidence system.
//!
//! The ground set is the edge list of a host `G`; the hyperedges are cycle
//! copies, so `C`-free subgraphs of `G` are exactly the independent sets.
//! Containers come from a fingerprint search tree: a node holds a set `T`
//! already known to be inside the independent set and a set `A` of undecided
//! elements. The undecided element of highest live degree is either put in
//! `T` (and every element that would complete a copy inside `T` is dropped) or
//! dropped. Every independent set follows exactly one root-to-leaf path and
//! stays inside `T ∪ A`, which is the leaf's container.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bitset::BitSet;
use crate::cycles::{enumerate_cycles_with_budget, CycleFamily};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::supersat::{build_balanced_family, SupersatConfig};
use crate::util::{binomial, for_each_subset, ln_binomial};

/// Default cap on search-tree nodes per container step.
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;

/// Ground sizes up to this are checked exhaustively; larger ones are sampled.
pub const EXHAUSTIVE_COVERAGE_LIMIT: usize = 18;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceSystem {
    ground: usize,
    k: usize,
    edges: Vec<Vec<u32>>,
    incidence: Vec<Vec<u32>>,
}

impl IncidenceSystem {
    /// Repeated hyperedges are kept once.
    pub fn new(ground: usize, k: usize, edges: Vec<Vec<u32>>) -> Result<Self> {
        let mut incidence = vec![Vec::new(); ground];
        let mut clean = Vec::with_capacity(edges.len());
        let mut seen = HashSet::new();
        for (i, mut e) in edges.into_iter().enumerate() {
            e.sort_unstable();
            e.dedup();
            if e.len() != k {
                return Err(Error::InvalidParameter(format!(
                    "hyperedge {i} has {} distinct elements, expected {k}",
                    e.len()
                )));
            }
            if let Some(&x) = e.iter().find(|&&x| x as usize >= ground) {
                return Err(Error::InvalidParameter(format!(
                    "hyperedge {i} uses element {x} outside 0..{ground}"
                )));
            }
            if !seen.insert(e.clone()) {
                continue;
            }
            for &x in &e {
                incidence[x as usize].push(clean.len() as u32);
            }
            clean.push(e);
        }
        Ok(IncidenceSystem {
            ground,
            k,
            edges: clean,
            incidence,
        })
    }

    pub fn from_family(family: &CycleFamily) -> Self {
        Self::new(family.host_edge_count(), family.k, family.copies().to_vec())
            .expect("cycle copies are k distinct host edges")
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn uniformity(&self) -> usize {
        self.k
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    pub fn degree(&self, x: usize) -> usize {
        self.incidence[x].len()
    }

    /// `d(S) = k·|E(S)|/N`.
    pub fn average_degree(&self) -> f64 {
        if self.ground == 0 {
            return 0.0;
        }
        (self.k * self.edges.len()) as f64 / self.ground as f64
    }

    /// `Δ_j(S)`: the largest number of hyperedges sharing a `j`-set.
    pub fn max_codegree(&self, j: usize) -> usize {
        if j == 0 || j > self.k || self.edges.is_empty() {
            return 0;
        }
        if j == 1 {
            return self.incidence.iter().map(Vec::len).max().unwrap_or(0);
        }
        if j == self.k {
            return 1;
        }
        let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
        for e in &self.edges {
            for_each_subset(e, j, |s| *counts.entry(s.to_vec()).or_insert(0) += 1);
        }
        counts.into_values().max().unwrap_or(0)
    }

    /// Number of hyperedges inside `set`.
    pub fn induced_edge_count(&self, set: &BitSet) -> usize {
        self.edges
            .iter()
            .filter(|e| e.iter().all(|&x| set.contains(x as usize)))
            .count()
    }

    pub fn is_independent(&self, set: &BitSet) -> bool {
        self.induced_edge_count(set) == 0
    }
}

/// `δ(S, τ) = (1/d(S))·Σ_{j=2}^{k} Δ_j(S)/τ^{j−1}`.
pub fn codegree_function(s: &IncidenceSystem, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParameter(format!("tau={tau} outside (0, 1)")));
    }
    if s.edge_count() == 0 {
        return Err(Error::EmptySystem);
    }
    let sum: f64 = (2..=s.uniformity())
        .map(|j| s.max_codegree(j) as f64 / tau.powi(j as i32 - 1))
        .sum();
    Ok(sum / s.average_degree())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CodegreeCheck {
    /// Refuse to build when `δ(S, τ) > ε`.
    #[default]
    Enforce,
    /// Build anyway and record `δ` in the family.
    ReportOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContainerParams {
    pub tau: f64,
    pub eps: f64,
    pub check: CodegreeCheck,
    /// Also require every container to have at most this many ground elements.
    pub size_limit: Option<usize>,
    pub node_budget: u64,
}

impl ContainerParams {
    pub fn new(tau: f64, eps: f64) -> Self {
        ContainerParams {
            tau,
            eps,
            check: CodegreeCheck::Enforce,
            size_limit: None,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageMode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub mode: CoverageMode,
    /// Independent sets examined.
    pub checked: u64,
    pub violations: u64,
    pub first_violation: Option<BitSet>,
}

impl CoverageReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone)]
pub struct ContainerFamily {
    pub ground: usize,
    pub containers: Vec<BitSet>,
    pub tau: f64,
    pub eps: f64,
    /// `δ(S, τ)`; `None` for an empty system.
    pub delta: Option<f64>,
    /// The system had no hyperedges.
    pub degenerate: bool,
    pub system_edges: usize,
    /// `|E(S[C])| / |E(S)|` per container.
    pub shrinkage: Vec<f64>,
    pub nodes: u64,
    /// `τN·ln(1/τ)/ε`, the log of the size budget.
    pub ln_size_budget: f64,
    pub coverage: Option<CoverageReport>,
}

impl ContainerFamily {
    pub fn len(&self) -> usize {
        self.containers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.containers.is_empty()
    }

    pub fn covers(&self, set: &BitSet) -> bool {
        self.containers.iter().any(|c| set.is_subset(c))
    }

    pub fn max_container_size(&self) -> usize {
        self.containers.iter().map(BitSet::count).max().unwrap_or(0)
    }

    /// Recounts `|E(S[C])| ≤ (1−ε)|E(S)|` for every container.
    pub fn verify_shrinkage(&self, s: &IncidenceSystem) -> bool {
        let bound = (1.0 - self.eps) * s.edge_count() as f64;
        self.containers
            .iter()
            .all(|c| s.induced_edge_count(c) as f64 <= bound + 1e-9)
    }

    /// Runs the coverage check appropriate to the ground size and stores it.
    pub fn certify(&mut self, s: &IncidenceSystem, samples: usize, seed: u64) -> &CoverageReport {
        let report = if s.ground_size() <= EXHAUSTIVE_COVERAGE_LIMIT {
            exhaustive_coverage(s, &self.containers)
        } else {
            sampled_coverage(s, &self.containers, samples, seed)
        };
        self.coverage.insert(report)
    }
}

const AVAILABLE: u8 = 0;
const TAKEN: u8 = 1;
const DROPPED: u8 = 2;

enum Op {
    Dropped(u32),
    Taken(u32),
}

struct Tree<'a> {
    s: &'a IncidenceSystem,
    status: Vec<u8>,
    missing: Vec<u32>,
    taken: Vec<u32>,
    deg: Vec<u32>,
    /// Live copies through each element that would force a drop if it were taken.
    hot: Vec<u32>,
    live: usize,
    size: usize,
    trail: Vec<Op>,
    live_target: usize,
    size_limit: usize,
    nodes: u64,
    budget: u64,
    out: Vec<BitSet>,
}

impl Tree<'_> {
    fn is_hot(&self, c: usize) -> bool {
        self.missing[c] == 0 && self.taken[c] as usize + 2 == self.s.k
    }

    fn rehot(&mut self, c: usize, before: bool) {
        let after = self.is_hot(c);
        if before != after {
            for &u in &self.s.edges[c] {
                if after {
                    self.hot[u as usize] += 1;
                } else {
                    self.hot[u as usize] -= 1;
                }
            }
        }
    }

    fn drop_elem(&mut self, v: u32) {
        self.status[v as usize] = DROPPED;
        self.size -= 1;
        for &c in &self.s.incidence[v as usize] {
            let c = c as usize;
            let before = self.is_hot(c);
            if self.missing[c] == 0 {
                self.live -= 1;
                for &u in &self.s.edges[c] {
                    self.deg[u as usize] -= 1;
                }
            }
            self.missing[c] += 1;
            self.rehot(c, before);
        }
        self.trail.push(Op::Dropped(v));
    }

    fn take(&mut self, v: u32) {
        self.status[v as usize] = TAKEN;
        self.trail.push(Op::Taken(v));
        let k = self.s.k as u32;
        let mut forced = Vec::new();
        for &c in &self.s.incidence[v as usize] {
            let c = c as usize;
            let before = self.is_hot(c);
            self.taken[c] += 1;
            self.rehot(c, before);
            if self.missing[c] == 0 && self.taken[c] == k - 1 {
                let u = *self.s.edges[c]
                    .iter()
                    .find(|&&u| self.status[u as usize] == AVAILABLE)
                    .expect("a live copy with k-1 taken elements has one available");
                forced.push(u);
            }
        }
        for u in forced {
            if self.status[u as usize] == AVAILABLE {
                self.drop_elem(u);
            }
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                Op::Dropped(v) => {
                    self.status[v as usize] = AVAILABLE;
                    self.size += 1;
                    for &c in &self.s.incidence[v as usize] {
                        let c = c as usize;
                        let before = self.is_hot(c);
                        self.missing[c] -= 1;
                        if self.missing[c] == 0 {
                            self.live += 1;
                            for &u in &self.s.edges[c] {
                                self.deg[u as usize] += 1;
                            }
                        }
                        self.rehot(c, before);
                    }
                }
                Op::Taken(v) => {
                    self.status[v as usize] = AVAILABLE;
                    for &c in &self.s.incidence[v as usize] {
                        let c = c as usize;
                        let before = self.is_hot(c);
                        self.taken[c] -= 1;
                        self.rehot(c, before);
                    }
                }
            }
        }
    }

    fn grow(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded {
                budget: self.budget,
                explored: self.nodes,
                estimate: f64::NAN,
            });
        }
        if self.live <= self.live_target && self.size <= self.size_limit {
            let set = (0..self.s.ground).filter(|&x| self.status[x] != DROPPED);
            self.out.push(BitSet::from_indices(self.s.ground, set));
            return Ok(());
        }
        // prefer elements whose inclusion forces a drop, then highest live degree
        let mut pick: Option<(u32, (u32, u32))> = None;
        for (x, &d) in self.deg.iter().enumerate() {
            let key = (self.hot[x], d);
            if d > 0 && self.status[x] == AVAILABLE && pick.is_none_or(|(_, b)| key > b) {
                pick = Some((x as u32, key));
            }
        }
        let Some((v, _)) = pick else {
            // no live copies left, so T ∪ A is itself independent
            return Err(Error::ShrinkUnattainable {
                size: self.size,
                limit: self.size_limit,
            });
        };
        let mark = self.trail.len();
        self.drop_elem(v);
        self.grow()?;
        self.undo(mark);
        self.take(v);
        self.grow()?;
        self.undo(mark);
        Ok(())
    }
}

/// Builds a container family for the independent sets of `s`.
pub fn build_containers(s: &IncidenceSystem, params: &ContainerParams) -> Result<ContainerFamily> {
    let (tau, eps) = (params.tau, params.eps);
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps={eps} outside (0, 1)")));
    }
    let n = s.ground_size();
    let m = s.edge_count();
    let delta = if m == 0 { None } else { Some(codegree_function(s, tau)?) };
    if let (Some(d), CodegreeCheck::Enforce) = (delta, params.check) {
        if d > eps {
            return Err(Error::CodegreeViolated { delta: d, eps });
        }
    }
    let size_limit = params.size_limit.unwrap_or(n);
    let mut tree = Tree {
        s,
        status: vec![AVAILABLE; n],
        missing: vec![0; m],
        taken: vec![0; m],
        deg: (0..n).map(|x| s.degree(x) as u32).collect(),
        hot: vec![0; n],
        live: m,
        size: n,
        trail: Vec::new(),
        live_target: ((1.0 - eps) * m as f64 + 1e-9).floor() as usize,
        size_limit,
        nodes: 0,
        budget: params.node_budget,
        out: Vec::new(),
    };
    for c in 0..m {
        tree.rehot(c, false);
    }
    if m == 0 && n > size_limit {
        return Err(Error::ShrinkUnattainable {
            size: n,
            limit: size_limit,
        });
    }
    if m == 0 {
        tree.out.push(BitSet::full(n));
    } else {
        tree.grow()?;
    }
    let nodes = tree.nodes;
    let containers = prune_subsumed(tree.out);
    let shrinkage = containers
        .iter()
        .map(|c| if m == 0 { 0.0 } else { s.induced_edge_count(c) as f64 / m as f64 })
        .collect();
    Ok(ContainerFamily {
        ground: n,
        containers,
        tau,
        eps,
        delta,
        degenerate: m == 0,
        system_edges: m,
        shrinkage,
        nodes,
        ln_size_budget: tau * n as f64 * (1.0 / tau).ln() / eps,
        coverage: None,
    })
}

/// Sorts, dedups and drops containers inside another one.
fn prune_subsumed(mut sets: Vec<BitSet>) -> Vec<BitSet> {
    sets.sort();
    sets.dedup();
    if sets.len() > 4000 {
        return sets;
    }
    let mut by_size: Vec<usize> = (0..sets.len()).collect();
    by_size.sort_by_key(|&i| std::cmp::Reverse(sets[i].count()));
    let mut keep = vec![false; sets.len()];
    let mut kept: Vec<usize> = Vec::new();
    for i in by_size {
        if !kept.iter().any(|&j| sets[i].is_subset(&sets[j])) {
            keep[i] = true;
            kept.push(i);
        }
    }
    sets.into_iter()
        .zip(keep)
        .filter_map(|(s, k)| k.then_some(s))
        .collect()
}

/// Checks every independent set over a ground of at most 24 elements.
pub fn exhaustive_coverage(s: &IncidenceSystem, containers: &[BitSet]) -> CoverageReport {
    let n = s.ground_size();
    assert!(n <= 24, "exhaustive coverage needs a ground of at most 24 elements");
    let full = 1usize << n;
    let to_mask = |b: &BitSet| b.iter().fold(0usize, |m, x| m | 1 << x);
    // bad[mask]: mask contains a hyperedge (upward closure)
    let mut bad = vec![false; full];
    for e in s.edges() {
        bad[e.iter().fold(0usize, |m, &x| m | 1 << x)] = true;
    }
    // covered[mask]: mask inside some container (downward closure)
    let mut covered = vec![false; full];
    for c in containers {
        covered[to_mask(c)] = true;
    }
    for bit in 0..n {
        let b = 1usize << bit;
        for mask in 0..full {
            if mask & b != 0 {
                if bad[mask ^ b] {
                    bad[mask] = true;
                }
                if covered[mask] {
                    covered[mask ^ b] = true;
                }
            }
        }
    }
    let mut report = CoverageReport {
        mode: CoverageMode::Exhaustive,
        checked: 0,
        violations: 0,
        first_violation: None,
    };
    for mask in 0..full {
        if bad[mask] {
            continue;
        }
        report.checked += 1;
        if !covered[mask] {
            report.violations += 1;
            if report.first_violation.is_none() {
                report.first_violation =
                    Some(BitSet::from_indices(n, (0..n).filter(|&x| mask >> x & 1 == 1)));
            }
        }
    }
    report
}

/// A random maximal independent set: delete a random element of a random live
/// hyperedge until none is left, then re-add deleted elements in random order
/// whenever that keeps the set independent.
pub fn random_independent_set(s: &IncidenceSystem, rng: &mut impl Rng) -> BitSet {
    let n = s.ground_size();
    let mut set = BitSet::full(n);
    let mut missing = vec![0u32; s.edge_count()];
    let mut live: Vec<u32> = (0..s.edge_count() as u32).collect();
    let mut deleted = Vec::new();
    while !live.is_empty() {
        let c = live[rng.random_range(0..live.len())] as usize;
        let x = s.edges[c][rng.random_range(0..s.k)];
        set.remove(x as usize);
        deleted.push(x);
        for &c in &s.incidence[x as usize] {
            missing[c as usize] += 1;
        }
        live.retain(|&c| missing[c as usize] == 0);
    }
    deleted.shuffle(rng);
    for x in deleted {
        let blocks = s.incidence[x as usize]
            .iter()
            .any(|&c| missing[c as usize] == 1);
        if !blocks {
            set.insert(x as usize);
            for &c in &s.incidence[x as usize] {
                missing[c as usize] -= 1;
            }
        }
    }
    set
}

/// Checks `samples` random maximal independent sets, and a random subset of each.
pub fn sampled_coverage(s: &IncidenceSystem, containers: &[BitSet], samples: usize, seed: u64) -> CoverageReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CoverageReport {
        mode: CoverageMode::Sampled,
        checked: 0,
        violations: 0,
        first_violation: None,
    };
    for t in 0..samples {
        let mut set = random_independent_set(s, &mut rng);
        if t % 2 == 1 {
            let keep: Vec<usize> = set.iter().filter(|_| rng.random_bool(0.5)).collect();
            set = BitSet::from_indices(s.ground_size(), keep);
        }
        report.checked += 1;
        if !containers.iter().any(|c| set.is_subset(c)) {
            report.violations += 1;
            report.first_violation.get_or_insert(set);
        }
    }
    report
}

/// `c·K^{−1}·n^{−(r−2)+1/(2ℓ−1)}`, clamped below `1/2`. The flag reports clamping.
pub fn reference_tau(n: usize, r: usize, ell: usize, k_density: f64, c: f64) -> Result<(f64, bool)> {
    if n == 0 || !(k_density > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need n, K, c positive (n={n}, K={k_density}, c={c})"
        )));
    }
    let exp = -(r as f64 - 2.0) + 1.0 / (2.0 * ell as f64 - 1.0);
    let tau = c / k_density * (n as f64).powf(exp);
    if tau >= 0.5 {
        log::debug!("tau={tau} clamped below 1/2");
        return Ok((0.5 * (1.0 - 1e-9), true));
    }
    Ok((tau, false))
}

#[derive(Debug, Clone)]
pub enum CopySource {
    /// Every copy of the cycle inside the container.
    AllCopies,
    /// The balanced family produced by the supersaturation pipeline.
    Balanced(SupersatConfig),
}

#[derive(Debug, Clone)]
pub struct IterateConfig {
    pub n: usize,
    pub r: usize,
    pub ell: usize,
    pub k_target: f64,
    pub eps: f64,
    pub shrink: f64,
    /// Constant in [`reference_tau`] for the reported `δ`.
    pub tau_constant: f64,
    pub check: CodegreeCheck,
    pub source: CopySource,
    pub node_budget: u64,
    pub work_budget: u64,
}

impl IterateConfig {
    pub fn new(n: usize, r: usize, ell: usize, k_target: f64, eps: f64, shrink: f64) -> Self {
        IterateConfig {
            n,
            r,
            ell,
            k_target,
            eps,
            shrink,
            tau_constant: 1.0,
            check: CodegreeCheck::ReportOnly,
            source: CopySource::AllCopies,
            node_budget: DEFAULT_NODE_BUDGET,
            work_budget: crate::cycles::default_work_budget(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelStats {
    pub k_level: f64,
    pub refined: usize,
    pub kept: usize,
    pub children: usize,
    pub max_delta: f64,
}

#[derive(Debug, Clone)]
pub struct GlobalFamily {
    pub host: Hypergraph,
    pub leaves: Vec<BitSet>,
    pub levels: Vec<LevelStats>,
    /// `ceil(log(K_0/K_target)/log(1/shrink))`.
    pub predicted_steps: usize,
    pub k_start: f64,
    pub k_target: f64,
    /// Leaves have at most this many edges.
    pub leaf_limit: f64,
}

impl GlobalFamily {
    pub fn steps(&self) -> usize {
        self.levels.len()
    }

    pub fn covers(&self, set: &BitSet) -> bool {
        self.leaves.iter().any(|c| set.is_subset(c))
    }

    pub fn max_leaf_size(&self) -> usize {
        self.leaves.iter().map(BitSet::count).max().unwrap_or(0)
    }
}

/// Number of geometric steps from `start` down to `target` at rate `shrink`.
pub fn predicted_steps(start: f64, target: f64, shrink: f64) -> usize {
    if start <= target {
        return 0;
    }
    let m = ((start / target).ln() / (1.0 / shrink).ln() - 1e-12).ceil();
    m.max(0.0) as usize
}

fn container_step(host: &Hypergraph, parent: &BitSet, cfg: &IterateConfig, k_level: f64) -> Result<(Vec<BitSet>, f64)> {
    let local: Vec<usize> = parent.iter().collect();
    let sub = host.edge_subgraph(local.iter().copied());
    let k = 2 * cfg.ell;
    let family = match &cfg.source {
        CopySource::AllCopies => enumerate_cycles_with_budget(&sub, k, cfg.work_budget)?,
        CopySource::Balanced(sc) => build_balanced_family(&sub, sc)?.family,
    };
    let s = IncidenceSystem::from_family(&family);
    let (tau, _) = reference_tau(cfg.n, cfg.r, cfg.ell, k_level, cfg.tau_constant)?;
    let params = ContainerParams {
        tau,
        eps: cfg.eps,
        check: cfg.check,
        size_limit: Some((cfg.shrink * sub.edge_count() as f64 + 1e-9).floor() as usize),
        node_budget: cfg.node_budget,
    };
    let fam = build_containers(&s, &params)?;
    // `sub` keeps the parent's canonical order, so local index i is host edge local[i]
    let children = fam
        .containers
        .iter()
        .map(|c| BitSet::from_indices(host.edge_count(), c.iter().map(|i| local[i])))
        .collect();
    Ok((children, fam.delta.unwrap_or(0.0)))
}

/// Refines `{K_n^(r)}` level by level until every container has at most
/// `K_target·n^{r−1}` edges. Level `i` refines containers with more than
/// `K_i·n^{r−1}` edges, `K_i = max(shrink^i·K_0, K_target)`,
/// `K_0 = C(n, r)/n^{r−1}`; children have at most `shrink·e(parent)` edges.
pub fn iterate_containers(cfg: &IterateConfig) -> Result<GlobalFamily> {
    let (n, r) = (cfg.n, cfg.r);
    if !(cfg.shrink > 0.0 && cfg.shrink < 1.0) {
        return Err(Error::InvalidParameter(format!("shrink={} outside (0, 1)", cfg.shrink)));
    }
    if !(cfg.k_target > 0.0) {
        return Err(Error::InvalidParameter(format!("K_target={} must be positive", cfg.k_target)));
    }
    if r < 2 || n < r || cfg.ell < 2 {
        return Err(Error::InvalidParameter(format!("need 2 <= r <= n and ell >= 2 (n={n}, r={r}, ell={})", cfg.ell)));
    }
    let host = Hypergraph::complete(n, r);
    let scale = (n as f64).powi(r as i32 - 1);
    let k_start = binomial(n as u64, r as u64) as f64 / scale;
    let predicted = predicted_steps(k_start, cfg.k_target, cfg.shrink);
    let leaf_limit = cfg.k_target * scale;
    let mut frontier = vec![BitSet::full(host.edge_count())];
    let mut levels = Vec::new();
    let mut i = 0usize;
    while frontier.iter().any(|c| c.count() as f64 > leaf_limit + 1e-9) {
        i += 1;
        let k_level = (cfg.shrink.powi(i as i32) * k_start).max(cfg.k_target);
        let limit = k_level * scale + 1e-9;
        let results: Vec<Result<(Vec<BitSet>, f64)>> = frontier
            .par_iter()
            .map(|c| {
                if c.count() as f64 > limit {
                    container_step(&host, c, cfg, k_level).map_err(|e| Error::StepFailed {
                        edges: c.count(),
                        container: c.iter().map(|x| x as u32).collect(),
                        source: Box::new(e),
                    })
                } else {
                    Ok((vec![c.clone()], f64::NAN))
                }
            })
            .collect();
        let mut next = Vec::new();
        let mut stats = LevelStats {
            k_level,
            refined: 0,
            kept: 0,
            children: 0,
            max_delta: 0.0,
        };
        for res in results {
            let (children, delta) = res?;
            if delta.is_nan() {
                stats.kept += 1;
            } else {
                stats.refined += 1;
                stats.children += children.len();
                stats.max_delta = stats.max_delta.max(delta);
            }
            next.extend(children);
        }
        next.sort();
        next.dedup();
        frontier = next;
        levels.push(stats);
        if i > predicted + 1 {
            return Err(Error::InvalidParameter(format!(
                "iteration overran the predicted {predicted} steps"
            )));
        }
    }
    Ok(GlobalFamily {
        host,
        leaves: frontier,
        levels,
        predicted_steps: predicted,
        k_start,
        k_target: cfg.k_target,
        leaf_limit,
    })
}

/// `ln|𝒢| + ln C(max_size, m) + m·ln p`; `−∞` when `m > max_size`.
pub fn union_bound_report(family_size: usize, max_size: usize, p: f64, m: usize) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("p={p} outside (0, 1]")));
    }
    if family_size == 0 {
        return Err(Error::InvalidParameter("empty container family".into()));
    }
    if m > max_size {
        return Ok(f64::NEG_INFINITY);
    }
    Ok((family_size as f64).ln() + ln_binomial(max_size as f64, m as f64) + m as f64 * p.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report_only(tau: f64, eps: f64) -> ContainerParams {
        ContainerParams {
            check: CodegreeCheck::ReportOnly,
            ..ContainerParams::new(tau, eps)
        }
    }

    #[test]
    fn codegree_function_small_cases() {
        let one = IncidenceSystem::new(4, 4, vec![vec![0, 1, 2, 3]]).unwrap();
        let d = codegree_function(&one, 1.0 - 1e-12).unwrap();
        assert!((d - 3.0).abs() < 1e-9);
        let two = IncidenceSystem::new(8, 4, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]).unwrap();
        let tau = 0.5;
        let expect = (2.0 + 4.0 + 8.0) / 1.0;
        assert!((codegree_function(&two, tau).unwrap() - expect).abs() < 1e-9);
        let empty = IncidenceSystem::new(3, 4, vec![]).unwrap();
        assert!(matches!(codegree_function(&empty, 0.5), Err(Error::EmptySystem)));
    }

    #[test]
    fn empty_system_is_one_degenerate_container() {
        let s = IncidenceSystem::new(5, 4, vec![]).unwrap();
        let f = build_containers(&s, &ContainerParams::new(0.5, 0.1)).unwrap();
        assert!(f.degenerate);
        assert_eq!(f.containers, vec![BitSet::full(5)]);
    }

    #[test]
    fn single_hyperedge_family() {
        let s = IncidenceSystem::new(6, 4, vec![vec![0, 1, 2, 3]]).unwrap();
        assert!(matches!(
            build_containers(&s, &ContainerParams::new(0.5, 0.1)),
            Err(Error::CodegreeViolated { .. })
        ));
        let f = build_containers(&s, &report_only(0.5, 0.1)).unwrap();
        assert_eq!(f.len(), 4);
        for c in &f.containers {
            assert_eq!(c.count(), 5);
            assert!(c.contains(4) && c.contains(5));
        }
        assert!(f.verify_shrinkage(&s));
        assert!(exhaustive_coverage(&s, &f.containers).passed());
    }

    #[test]
    fn coverage_detects_missing_container() {
        let s = IncidenceSystem::new(4, 2, vec![vec![0, 1]]).unwrap();
        let only = vec![BitSet::from_indices(4, [0, 2, 3])];
        let rep = exhaustive_coverage(&s, &only);
        assert_eq!(rep.checked, 12);
        assert_eq!(rep.violations, 4);
        assert_eq!(rep.first_violation, Some(BitSet::from_indices(4, [1])));
    }

    #[test]
    fn random_independent_sets_are_maximal() {
        let s = IncidenceSystem::new(7, 3, vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5, 6], vec![0, 3, 6]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let set = random_independent_set(&s, &mut rng);
            assert!(s.is_independent(&set));
            for x in 0..7 {
                if !set.contains(x) {
                    let mut bigger = set.clone();
                    bigger.insert(x);
                    assert!(!s.is_independent(&bigger));
                }
            }
        }
    }

    #[test]
    fn tau_formula_and_clamp() {
        let (t, clamped) = reference_tau(10, 4, 2, 1.0, 1.0).unwrap();
        assert!((t - 10f64.powf(-2.0 + 1.0 / 3.0)).abs() < 1e-12);
        assert!(!clamped);
        let (t, clamped) = reference_tau(10, 2, 2, 1.0, 1.0).unwrap();
        assert!(clamped && t < 0.5);
        let (a, _) = reference_tau(20, 4, 3, 1.0, 1.0).unwrap();
        let (b, _) = reference_tau(40, 4, 3, 1.0, 1.0).unwrap();
        assert!((b / a - 2f64.powf(-2.0 + 0.2)).abs() < 1e-12);
    }

    #[test]
    fn step_prediction() {
        assert_eq!(predicted_steps(1024.0, 1.0, 0.5), 10);
        assert_eq!(predicted_steps(1.0, 2.0, 0.5), 0);
    }

    #[test]
    fn iteration_with_large_target_is_trivial() {
        let g = iterate_containers(&IterateConfig::new(8, 3, 2, 2.0, 0.1, 0.6)).unwrap();
        assert_eq!(g.steps(), 0);
        assert_eq!(g.leaves, vec![BitSet::full(56)]);
    }

    #[test]
    fn union_bound_special_cases() {
        let v = union_bound_report(1, 10, 1.0, 3).unwrap();
        assert!((v - 120f64.ln()).abs() < 1e-9);
        assert!((union_bound_report(7, 10, 0.3, 0).unwrap() - 7f64.ln()).abs() < 1e-12);
        assert_eq!(union_bound_report(7, 3, 0.3, 4).unwrap(), f64::NEG_INFINITY);
    }
}
