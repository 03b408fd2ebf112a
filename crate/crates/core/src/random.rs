//! The random `r`-graph `G_{n,p}^(r)` under a monotone coupling, plus the
//! expectation and tail formulas used by the lower-bound constructions.
//!
//! Every potential edge gets one uniform value in `[0, 1)` drawn from a ChaCha8
//! stream keyed by the seed, at a word position given by the edge's colex rank.
//! An edge is present at density `p` iff its value is `< p`, so for a fixed seed
//! the samples are nested as `p` grows.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Vertex};
use crate::util::{colex_rank, for_each_subset, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoupledSample {
    pub n: usize,
    pub r: usize,
    pub seed: u64,
}

impl CoupledSample {
    pub fn new(n: usize, r: usize, seed: u64) -> Result<Self> {
        if r == 0 || r > n {
            return Err(Error::InvalidParameter(format!("need 1 <= r <= n (r={r}, n={n})")));
        }
        Ok(CoupledSample { n, r, seed })
    }

    fn stream(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn value_with(rng: &mut ChaCha8Rng, sorted_edge: &[Vertex]) -> f64 {
        rng.set_word_pos(colex_rank(sorted_edge) * 2);
        (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// The uniform value attached to a (sorted) potential edge.
    pub fn uniform(&self, sorted_edge: &[Vertex]) -> f64 {
        Self::value_with(&mut self.stream(), sorted_edge)
    }

    pub fn at(&self, p: f64) -> Result<Hypergraph> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
        }
        let (n, r) = (self.n, self.r);
        if p == 0.0 {
            return Ok(Hypergraph::empty(r, n));
        }
        let base = self.stream();
        let edges: Vec<Vec<Vec<Vertex>>> = (0..n as Vertex)
            .into_par_iter()
            .map(|first| {
                let mut rng = base.clone();
                let rest: Vec<Vertex> = (first + 1..n as Vertex).collect();
                let mut found = Vec::new();
                let mut e = vec![first; r];
                for_each_subset(&rest, r - 1, |tail| {
                    e[1..].copy_from_slice(tail);
                    if Self::value_with(&mut rng, &e) < p {
                        found.push(e.clone());
                    }
                });
                found
            })
            .collect();
        Hypergraph::from_edges(r, n, edges.into_iter().flatten())
    }
}

/// One draw of `G_{n,p}^(r)`; deterministic in `(n, r, p, seed)`.
pub fn sample(n: usize, r: usize, p: f64, seed: u64) -> Result<Hypergraph> {
    CoupledSample::new(n, r, seed)?.at(p)
}

/// Chernoff bound `P(|X − EX| ≥ a·EX) ≤ 2·exp(−a²·EX/3)` for `0 < a ≤ 3/2`.
pub fn chernoff_tail(mean: f64, a: f64) -> Result<f64> {
    if !(a > 0.0 && a <= 1.5) {
        return Err(Error::InvalidParameter(format!("deviation a={a} outside (0, 3/2]")));
    }
    if mean < 0.0 {
        return Err(Error::InvalidParameter(format!("negative mean {mean}")));
    }
    Ok(2.0 * (-a * a * mean / 3.0).exp())
}

/// Exact number of copies of `C_k^(r)` in `K_n^(r)`:
/// `[n]_{k(r−1)} / (2k · ((r−2)!)^k)`. `None` on overflow.
pub fn complete_copy_count(n: usize, r: usize, k: usize) -> Option<u128> {
    if r < 2 || k < 3 {
        return None;
    }
    let m = k * (r - 1);
    if n < m {
        return Some(0);
    }
    let mut falling: u128 = 1;
    for i in 0..m {
        falling = falling.checked_mul((n - i) as u128)?;
    }
    let mut pendant_perm: u128 = 1;
    for i in 2..=(r - 2) as u128 {
        pendant_perm *= i;
    }
    let denom = (2 * k as u128).checked_mul(pendant_perm.checked_pow(k as u32)?)?;
    debug_assert_eq!(falling % denom, 0);
    Some(falling / denom)
}

/// Natural log of [`complete_copy_count`], valid beyond `u128` range.
pub fn ln_complete_copy_count(n: usize, r: usize, k: usize) -> f64 {
    let m = k * (r - 1);
    if n < m {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0)
        - ln_gamma((n - m) as f64 + 1.0)
        - (2.0 * k as f64).ln()
        - k as f64 * ln_gamma((r - 1) as f64)
}

/// `E[X]` for `X` the number of copies of `C_{2ℓ}^(r)` in `G_{n,p}^(r)`.
pub fn expected_cycle_copies(n: usize, r: usize, ell: usize, p: f64) -> f64 {
    let k = 2 * ell;
    if n < k * (r - 1) || p == 0.0 {
        return 0.0;
    }
    match complete_copy_count(n, r, k) {
        Some(c) if c < (1u128 << 100) => c as f64 * p.powi(k as i32),
        _ => (ln_complete_copy_count(n, r, k) + k as f64 * p.ln()).exp(),
    }
}

/// `E[e(G_{n,p}^(r))] = p·C(n, r)`.
pub fn expected_edges(n: usize, r: usize, p: f64) -> f64 {
    p * crate::util::binomial(n as u64, r as u64) as f64
}

/// Derives the seed of trial `t` from a base seed (SplitMix64 finalizer).
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    let mut z = base.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::binomial;

    #[test]
    fn extremes() {
        assert_eq!(sample(10, 3, 0.0, 1).unwrap().edge_count(), 0);
        assert_eq!(sample(10, 3, 1.0, 1).unwrap().edge_count(), 120);
        assert!(sample(10, 3, 1.5, 1).is_err());
        assert!(sample(10, 3, -0.1, 1).is_err());
    }

    #[test]
    fn deterministic_and_nested() {
        let s = CoupledSample::new(12, 3, 99).unwrap();
        assert_eq!(s.at(0.3).unwrap(), s.at(0.3).unwrap());
        let lo = s.at(0.2).unwrap();
        let hi = s.at(0.5).unwrap();
        assert!(lo.edges().all(|e| hi.contains_edge(e)));
    }

    #[test]
    fn chernoff_values() {
        assert_eq!(chernoff_tail(0.0, 0.5).unwrap(), 2.0);
        assert!((chernoff_tail(300.0, 0.1).unwrap() - 2.0 * (-1f64).exp()).abs() < 1e-12);
        assert!(chernoff_tail(1.0, 0.0).is_err());
        assert!(chernoff_tail(1.0, 1.6).is_err());
    }

    #[test]
    fn copy_count_formula() {
        for n in 4..12u64 {
            assert_eq!(complete_copy_count(n as usize, 2, 4).unwrap(), 3 * binomial(n, 4));
        }
        assert_eq!(complete_copy_count(5, 3, 4), Some(0));
        assert_eq!(expected_cycle_copies(10, 3, 2, 0.0), 0.0);
        let exact = complete_copy_count(10, 3, 4).unwrap() as f64;
        assert!((ln_complete_copy_count(10, 3, 4) - exact.ln()).abs() < 1e-10);
    }
}
