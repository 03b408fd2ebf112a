//! `ex(G, C_{2ℓ}^(r))`: exact values through minimum hitting sets of the copy
//! family, and lower bounds from greedy deletion and vertex stars.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycles::{enumerate_cycles_partial, enumerate_cycles_with_budget, is_cycle_free_with_budget, CycleFamily};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Vertex};
use crate::random::{expected_edges, trial_seed, CoupledSample};

pub const DEFAULT_EXACT_CAP: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultMode {
    Exact,
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    HittingSet,
    GreedyDeletion,
    Star,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::HittingSet => "hitting_set",
            Method::GreedyDeletion => "greedy_deletion",
            Method::Star => "star",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuranResult {
    pub value: usize,
    /// Sorted host edge indexes of a `C`-free subgraph with `value` edges.
    pub witness: Vec<u32>,
    pub mode: ResultMode,
    pub method: Method,
    /// Copies in the host, when fully enumerated.
    pub copies: Option<usize>,
    /// Size of the optimal hitting set in exact mode.
    pub hitting_set: Option<usize>,
    /// Exact mode was requested but could not run.
    pub fell_back: bool,
    pub note: Option<String>,
}

impl TuranResult {
    pub fn witness_graph(&self, host: &Hypergraph) -> Hypergraph {
        host.edge_subgraph(self.witness.iter().map(|&i| i as usize))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    pub exact_cap: usize,
    /// Work budget for cycle enumeration.
    pub budget: u64,
    /// Branch-and-bound node cap.
    pub node_budget: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            exact_cap: DEFAULT_EXACT_CAP,
            budget: crate::cycles::default_work_budget(),
            node_budget: 50_000_000,
        }
    }
}

fn complement(m: usize, removed: impl IntoIterator<Item = usize>) -> Vec<u32> {
    let mut keep = vec![true; m];
    for i in removed {
        keep[i] = false;
    }
    (0..m as u32).filter(|&i| keep[i as usize]).collect()
}

struct HittingSearch {
    best: u64,
    best_size: u32,
    nodes: u64,
    node_budget: u64,
}

impl HittingSearch {
    fn packing_bound(sets: &[u64]) -> u32 {
        let mut order: Vec<u64> = sets.to_vec();
        order.sort_by_key(|s| (s.count_ones(), *s));
        let mut used = 0u64;
        let mut count = 0;
        for s in order {
            if s & used == 0 {
                used |= s;
                count += 1;
            }
        }
        count
    }

    /// `sets` are the copies not yet hit, restricted to still-undecided elements.
    fn search(&mut self, sets: Vec<u64>, chosen: u64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.node_budget {
            return Err(Error::BudgetExceeded {
                budget: self.node_budget,
                explored: self.nodes,
                estimate: f64::NAN,
            });
        }
        let size = chosen.count_ones();
        if sets.is_empty() {
            if size < self.best_size {
                self.best_size = size;
                self.best = chosen;
            }
            return Ok(());
        }
        if sets.contains(&0) {
            return Ok(());
        }
        if size + Self::packing_bound(&sets) >= self.best_size {
            return Ok(());
        }
        // forced singletons first, then the element in the most remaining copies
        let pick = match sets.iter().find(|s| s.count_ones() == 1) {
            Some(&s) => s.trailing_zeros(),
            None => {
                let mut mult = [0u32; 64];
                for &s in &sets {
                    let mut b = s;
                    while b != 0 {
                        mult[b.trailing_zeros() as usize] += 1;
                        b &= b - 1;
                    }
                }
                let mut best = 0;
                for i in 1..64 {
                    if mult[i] > mult[best] {
                        best = i;
                    }
                }
                best as u32
            }
        };
        let bit = 1u64 << pick;
        let with: Vec<u64> = sets.iter().copied().filter(|s| s & bit == 0).collect();
        self.search(with, chosen | bit)?;
        let forced_in = sets.contains(&bit);
        if !forced_in {
            let without: Vec<u64> = sets.iter().map(|s| s & !bit).collect();
            self.search(without, chosen)?;
        }
        Ok(())
    }
}

/// Minimum hitting set of `copies` over at most 64 ground elements, starting
/// from the upper bound `initial`.
pub fn min_hitting_set(copies: &[Vec<u32>], initial: &[u32], node_budget: u64) -> Result<Vec<u32>> {
    let to_mask = |c: &[u32]| c.iter().fold(0u64, |m, &x| m | 1 << x);
    if copies.iter().flatten().chain(initial).any(|&x| x >= 64) {
        return Err(Error::InvalidParameter("hitting-set solver handles at most 64 elements".into()));
    }
    let mut sets: Vec<u64> = copies.iter().map(|c| to_mask(c)).collect();
    sets.sort_unstable();
    sets.dedup();
    let mut s = HittingSearch {
        best: to_mask(initial),
        best_size: initial.len() as u32 + 1,
        nodes: 0,
        node_budget,
    };
    if sets.iter().all(|&c| c & s.best != 0) {
        s.best_size = initial.len() as u32;
    }
    s.search(sets, 0)?;
    Ok((0..64).filter(|&i| s.best >> i & 1 == 1).collect())
}

/// Removes, until no copy is left, the edge lying in the most remaining copies
/// (smallest index on ties). Returns the removed edges.
fn greedy_hitting(family: &CycleFamily) -> Vec<usize> {
    let m = family.host_edge_count();
    let mut incidence: Vec<Vec<u32>> = vec![Vec::new(); m];
    for (c, copy) in family.copies().iter().enumerate() {
        for &e in copy {
            incidence[e as usize].push(c as u32);
        }
    }
    let mut alive = vec![true; family.len()];
    let mut mult: Vec<usize> = incidence.iter().map(Vec::len).collect();
    let mut removed = Vec::new();
    while let Some((best, &count)) = mult.iter().enumerate().max_by_key(|&(i, c)| (*c, std::cmp::Reverse(i))) {
        if count == 0 {
            break;
        }
        removed.push(best);
        for &c in &incidence[best] {
            if std::mem::replace(&mut alive[c as usize], false) {
                for &e in &family.copies()[c as usize] {
                    mult[e as usize] -= 1;
                }
            }
        }
    }
    removed
}

/// Greedy deletion lower bound. When full enumeration exceeds the budget,
/// deletes against partial enumerations until the remainder is verified free.
pub fn greedy_deletion_bound(g: &Hypergraph, ell: usize, opts: &SolverOptions) -> Result<TuranResult> {
    let k = 2 * ell;
    let m = g.edge_count();
    match enumerate_cycles_with_budget(g, k, opts.budget) {
        Ok(family) => {
            let removed = greedy_hitting(&family);
            Ok(TuranResult {
                value: m - removed.len(),
                witness: complement(m, removed),
                mode: ResultMode::LowerBound,
                method: Method::GreedyDeletion,
                copies: Some(family.len()),
                hitting_set: None,
                fell_back: false,
                note: None,
            })
        }
        Err(e) if e.is_resource() => {
            let mut current: Vec<usize> = (0..m).collect();
            loop {
                let sub = g.edge_subgraph(current.iter().copied());
                let (partial, complete) = enumerate_cycles_partial(&sub, k, opts.budget)?;
                if partial.is_empty() {
                    if complete || is_cycle_free_with_budget(&sub, k, opts.budget)? {
                        break;
                    }
                    return Err(e);
                }
                let mut drop: Vec<usize> = greedy_hitting(&partial);
                drop.sort_unstable();
                let mut keep = vec![true; current.len()];
                for i in drop {
                    keep[i] = false;
                }
                current = current.into_iter().zip(keep).filter_map(|(e, k)| k.then_some(e)).collect();
                if complete {
                    break;
                }
            }
            Ok(TuranResult {
                value: current.len(),
                witness: current.into_iter().map(|e| e as u32).collect(),
                mode: ResultMode::LowerBound,
                method: Method::GreedyDeletion,
                copies: None,
                hitting_set: None,
                fell_back: false,
                note: Some("deleted against partial enumerations".into()),
            })
        }
        Err(e) => Err(e),
    }
}

/// All edges through a vertex of maximum degree (smallest vertex on ties).
pub fn star_bound(g: &Hypergraph, ell: usize, opts: &SolverOptions) -> Result<TuranResult> {
    if ell < 2 {
        return Err(Error::InvalidParameter(format!("ell={ell} must be at least 2")));
    }
    let r = g.uniformity();
    let center = (0..g.vertex_count() as Vertex).max_by_key(|&v| (g.vertex_degree(v), std::cmp::Reverse(v)));
    let mut witness: Vec<u32> = center.map(|v| g.edges_with_vertex(v).to_vec()).unwrap_or_default();
    witness.sort_unstable();
    let star = g.edge_subgraph(witness.iter().map(|&i| i as usize));
    if !is_cycle_free_with_budget(&star, 2 * ell, opts.budget)? {
        return Err(Error::InvalidParameter("star contains a cycle".into()));
    }
    Ok(TuranResult {
        value: witness.len(),
        witness,
        mode: ResultMode::LowerBound,
        method: Method::Star,
        copies: None,
        hitting_set: None,
        fell_back: false,
        note: (r == 2).then(|| "2-graph star; the lower-bound construction targets r >= 3".to_string()),
    })
}

/// The better of the greedy and star lower bounds (greedy on ties).
pub fn lower_bound(g: &Hypergraph, ell: usize, opts: &SolverOptions) -> Result<TuranResult> {
    let greedy = greedy_deletion_bound(g, ell, opts)?;
    let star = star_bound(g, ell, opts)?;
    Ok(if star.value > greedy.value {
        TuranResult {
            copies: greedy.copies,
            ..star
        }
    } else {
        greedy
    })
}

/// Exact `ex(G, C_{2ℓ}^(r))`. Falls back to [`lower_bound`], with `fell_back`
/// set, when `e(G)` exceeds the cap or a budget runs out.
pub fn exact_ex(g: &Hypergraph, ell: usize, opts: &SolverOptions) -> Result<TuranResult> {
    let m = g.edge_count();
    let fallback = |why: String| -> Result<TuranResult> {
        let mut r = lower_bound(g, ell, opts)?;
        r.fell_back = true;
        r.note = Some(why);
        Ok(r)
    };
    if m > opts.exact_cap.min(64) {
        return fallback(format!("{m} edges exceed the exact cap {}", opts.exact_cap));
    }
    let family = match enumerate_cycles_with_budget(g, 2 * ell, opts.budget) {
        Ok(f) => f,
        Err(e) if e.is_resource() => return fallback(e.to_string()),
        Err(e) => return Err(e),
    };
    let greedy: Vec<u32> = greedy_hitting(&family).into_iter().map(|e| e as u32).collect();
    let hitting = match min_hitting_set(family.copies(), &greedy, opts.node_budget) {
        Ok(h) => h,
        Err(e) if e.is_resource() => return fallback(e.to_string()),
        Err(e) => return Err(e),
    };
    Ok(TuranResult {
        value: m - hitting.len(),
        witness: complement(m, hitting.iter().map(|&e| e as usize)),
        mode: ResultMode::Exact,
        method: Method::HittingSet,
        copies: Some(family.len()),
        hitting_set: Some(hitting.len()),
        fell_back: false,
        note: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMode {
    Exact,
    /// Best of greedy and star.
    Lower,
    Greedy,
    Star,
}

impl std::str::FromStr for EstimateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(EstimateMode::Exact),
            "lower" => Ok(EstimateMode::Lower),
            "greedy" => Ok(EstimateMode::Greedy),
            "star" => Ok(EstimateMode::Star),
            _ => Err(Error::InvalidParameter(format!("unknown mode {s:?}"))),
        }
    }
}

pub fn solve(g: &Hypergraph, ell: usize, mode: EstimateMode, opts: &SolverOptions) -> Result<TuranResult> {
    match mode {
        EstimateMode::Exact => exact_ex(g, ell, opts),
        EstimateMode::Lower => lower_bound(g, ell, opts),
        EstimateMode::Greedy => greedy_deletion_bound(g, ell, opts),
        EstimateMode::Star => star_bound(g, ell, opts),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub edges: usize,
    pub copies: Option<usize>,
    pub value: Option<usize>,
    pub method: Option<Method>,
    pub mode: Option<ResultMode>,
    pub millis: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomExStats {
    pub trials: Vec<TrialRecord>,
    /// Over trials that produced a value.
    pub mean: f64,
    pub std_dev: f64,
    pub min: usize,
    pub max: usize,
    pub mean_edges: f64,
    pub mean_copies: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomExConfig {
    pub n: usize,
    pub r: usize,
    pub ell: usize,
    pub p: f64,
    pub seed: u64,
    pub trials: usize,
    pub mode: EstimateMode,
}

/// One solver run per trial on the coupled sample seeded by `trial_seed(seed, t)`.
pub fn estimate_random_ex(cfg: &RandomExConfig, opts: &SolverOptions) -> Result<RandomExStats> {
    if cfg.mode == EstimateMode::Exact && expected_edges(cfg.n, cfg.r, cfg.p) > opts.exact_cap as f64 {
        return Err(Error::InvalidParameter(format!(
            "expected {:.1} edges exceed the exact cap {}",
            expected_edges(cfg.n, cfg.r, cfg.p),
            opts.exact_cap
        )));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let trials: Vec<Result<TrialRecord>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(cfg.seed, t as u64);
            let g = CoupledSample::new(cfg.n, cfg.r, seed)?.at(cfg.p)?;
            let start = Instant::now();
            let res = solve(&g, cfg.ell, cfg.mode, opts);
            let millis = start.elapsed().as_secs_f64() * 1e3;
            Ok(match res {
                Ok(r) => TrialRecord {
                    trial: t,
                    seed,
                    edges: g.edge_count(),
                    copies: r.copies,
                    value: Some(r.value),
                    method: Some(r.method),
                    mode: Some(r.mode),
                    millis,
                    error: None,
                },
                Err(e) if e.is_resource() => TrialRecord {
                    trial: t,
                    seed,
                    edges: g.edge_count(),
                    copies: None,
                    value: None,
                    method: None,
                    mode: None,
                    millis,
                    error: Some(e.to_string()),
                },
                Err(e) => return Err(e),
            })
        })
        .collect();
    let trials = trials.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(summarize(trials))
}

fn summarize(trials: Vec<TrialRecord>) -> RandomExStats {
    let values: Vec<f64> = trials.iter().filter_map(|t| t.value).map(|v| v as f64).collect();
    let k = values.len() as f64;
    let mean = if values.is_empty() { f64::NAN } else { values.iter().sum::<f64>() / k };
    let std_dev = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    };
    let copies: Vec<f64> = trials.iter().filter_map(|t| t.copies).map(|c| c as f64).collect();
    RandomExStats {
        mean,
        std_dev,
        min: trials.iter().filter_map(|t| t.value).min().unwrap_or(0),
        max: trials.iter().filter_map(|t| t.value).max().unwrap_or(0),
        mean_edges: trials.iter().map(|t| t.edges as f64).sum::<f64>() / trials.len() as f64,
        mean_copies: if copies.is_empty() { f64::NAN } else { copies.iter().sum::<f64>() / copies.len() as f64 },
        failures: trials.iter().filter(|t| t.value.is_none()).count(),
        trials,
    }
}
