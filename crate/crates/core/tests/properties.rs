mod common;

use std::collections::BTreeSet;

use lincyc_core::containers::{build_containers, codegree_function, CodegreeCheck, ContainerParams, IncidenceSystem};
use lincyc_core::io::{read_hypergraph, write_hypergraph};
use lincyc_core::random::sample;
use lincyc_core::supersat::{dyadic_select, ek_partition, regularize};
use lincyc_core::turan::{exact_ex, greedy_deletion_bound, min_hitting_set, star_bound, ResultMode, SolverOptions};
use lincyc_core::{enumerate_cycles, is_linear_cycle, Error, Hypergraph};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn host(seed: u64, r: usize, n: usize, m: usize) -> Hypergraph {
    random_hypergraph(&mut ChaCha8Rng::seed_from_u64(seed), r, n, m)
}

fn edge_set(g: &Hypergraph) -> BTreeSet<Vec<u32>> {
    g.edges().map(<[u32]>::to_vec).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupled_samples_are_nested(seed: u64, n in 4usize..10, r in 2usize..4, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let small = edge_set(&sample(n, r, lo, seed).unwrap());
        let large = edge_set(&sample(n, r, hi, seed).unwrap());
        prop_assert!(small.is_subset(&large));
        prop_assert_eq!(edge_set(&sample(n, r, lo, seed).unwrap()), small);
    }

    #[test]
    fn enumeration_matches_subset_oracle(seed: u64, r in 2usize..5, n in 6usize..11, m in 4usize..16, k in prop::sample::select(vec![3usize, 4, 5, 6])) {
        let g = host(seed, r, n, m);
        let got: BTreeSet<Vec<u32>> = enumerate_cycles(&g, k).unwrap().into_copies().into_iter().collect();
        prop_assert_eq!(&got, &oracle_cycles(&g, k));
        for c in &got {
            let es: Vec<&[u32]> = c.iter().map(|&i| g.edge(i as usize)).collect();
            prop_assert!(is_linear_cycle(&es, r));
        }
    }

    #[test]
    fn copy_count_is_monotone_under_edges(seed: u64, n in 6usize..10, m in 4usize..18) {
        let g = host(seed, 3, n, m);
        let before = enumerate_cycles(&g, 4).unwrap();
        let extra = host(seed ^ 1, 3, n, 1);
        let grown = g.with_edge(extra.edge(0)).unwrap();
        let after = enumerate_cycles(&grown, 4).unwrap();
        prop_assert!(after.len() >= before.len());
        let as_edges = |h: &Hypergraph, c: &[u32]| -> BTreeSet<Vec<u32>> { c.iter().map(|&x| h.edge(x as usize).to_vec()).collect() };
        for e in 0..g.edge_count() {
            let sub = g.edge_subgraph((0..g.edge_count()).filter(|&i| i != e));
            let left: BTreeSet<BTreeSet<Vec<u32>>> = enumerate_cycles(&sub, 4).unwrap().copies().iter().map(|c| as_edges(&sub, c)).collect();
            let avoiding: BTreeSet<BTreeSet<Vec<u32>>> =
                before.copies().iter().filter(|c| !c.contains(&(e as u32))).map(|c| as_edges(&g, c)).collect();
            prop_assert_eq!(left, avoiding);
        }
    }

    #[test]
    fn partition_meets_guarantee(seed: u64, r in 2usize..6, n in 6usize..16, m in 1usize..80) {
        let g = host(seed, r, n, m);
        let h = ek_partition(&g);
        let fact: u128 = (1..=r as u128).product();
        prop_assert!(h.graph().edge_count() as u128 * (r as u128).pow(r as u32) >= fact * g.edge_count() as u128);
    }

    #[test]
    fn regularization_is_a_fixpoint(seed: u64, r in 3usize..5, m in 20usize..100, lambda in 1.1f64..16.0) {
        let g = host(seed, r, 12, m);
        let dy = dyadic_select(&ek_partition(&g));
        match regularize(&dy.h0, &dy.s0, lambda) {
            Ok(reg) => {
                prop_assert!(reg.check_no_isolated());
                prop_assert!(reg.check_codegree_window().is_none());
                let again = regularize(reg.partite(), &reg.s0, lambda).unwrap();
                prop_assert!(again.deletions.is_empty());
                prop_assert_eq!(edge_set(again.graph()), edge_set(reg.graph()));
            }
            Err(Error::RegularizationAnnihilated { trace }) => {
                prop_assert_eq!(trace.iter().map(|d| d.edges_removed).sum::<usize>(), dy.h0.graph().edge_count());
            }
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn containers_cover_small_systems(seed: u64, ground in 6usize..13, count in 1usize..8, k in 2usize..5, tau in 0.05f64..0.95, eps in 0.05f64..0.6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let all = subsets(ground, k);
        let edges: Vec<Vec<u32>> = (0..count).map(|_| all[rand::Rng::random_range(&mut rng, 0..all.len())].clone()).collect();
        let s = IncidenceSystem::new(ground, k, edges).unwrap();
        let fam = build_containers(&s, &ContainerParams { check: CodegreeCheck::ReportOnly, ..ContainerParams::new(tau, eps) }).unwrap();
        let copies: Vec<u64> = s.edges().iter().map(|e| mask_of(e)).collect();
        let masks: Vec<u64> = fam.containers.iter().map(|c| c.words()[0]).collect();
        prop_assert_eq!(coverage_by_closure(ground, &copies, &masks).1, 0);
        prop_assert!(fam.verify_shrinkage(&s));
    }

    #[test]
    fn codegree_function_decreases_in_tau(seed: u64, a in 0.01f64..0.99, b in 0.01f64..0.99) {
        prop_assume!((a - b).abs() > 1e-6);
        let g = host(seed, 2, 7, 14);
        let family = enumerate_cycles(&g, 4).unwrap();
        prop_assume!(!family.is_empty());
        let s = IncidenceSystem::from_family(&family);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(codegree_function(&s, lo).unwrap() > codegree_function(&s, hi).unwrap());
    }

    #[test]
    fn solvers_sandwich_and_duality(seed: u64, r in 2usize..4, m in 4usize..22) {
        let n = if r == 2 { 7 } else { 9 };
        let g = host(seed, r, n, m);
        let opts = SolverOptions::default();
        let exact = exact_ex(&g, 2, &opts).unwrap();
        prop_assert_eq!(exact.mode, ResultMode::Exact);
        prop_assert_eq!(exact.value + exact.hitting_set.unwrap(), g.edge_count());
        prop_assert!(greedy_deletion_bound(&g, 2, &opts).unwrap().value <= exact.value);
        if r >= 3 {
            prop_assert!(star_bound(&g, 2, &opts).unwrap().value <= exact.value);
        }
        prop_assert!(exact.value <= g.edge_count());
        prop_assert!(oracle_cycles(&exact.witness_graph(&g), 4).is_empty());
    }

    #[test]
    fn hitting_set_is_minimum(seed: u64, ground in 3usize..12, count in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let all = subsets(ground, 3);
        let copies: Vec<Vec<u32>> = (0..count).map(|_| all[rand::Rng::random_range(&mut rng, 0..all.len())].clone()).collect();
        let initial: Vec<u32> = copies.iter().map(|c| c[0]).collect::<BTreeSet<_>>().into_iter().collect();
        let hs = min_hitting_set(&copies, &initial, u64::MAX).unwrap();
        let masks: Vec<u64> = copies.iter().map(|c| mask_of(c)).collect();
        let hits = |set: u64| masks.iter().all(|&c| c & set != 0);
        prop_assert!(hits(mask_of(&hs)));
        let best = (0u64..1 << ground).filter(|&s| hits(s)).map(u64::count_ones).min().unwrap();
        prop_assert_eq!(hs.len() as u32, best);
    }

    #[test]
    fn text_format_round_trips(seed: u64, r in 1usize..5, n in 5usize..12, m in 0usize..30) {
        let g = host(seed, r, n, m);
        let mut buf = Vec::new();
        write_hypergraph(&mut buf, &g).unwrap();
        let back = read_hypergraph(&buf[..]).unwrap();
        prop_assert_eq!(&back, &g);
        let mut again = Vec::new();
        write_hypergraph(&mut again, &back).unwrap();
        prop_assert_eq!(buf, again);
    }

    #[test]
    fn tuple_degree_sums_match_identity(seed: u64, r in 2usize..5, n in 6usize..11, m in 0usize..40) {
        let g = host(seed, r, n, m);
        for j in 1..=r {
            prop_assert_eq!(g.tuple_degrees(j).unwrap().total() as usize, g.edge_count() * binom(r, j));
        }
        let family = enumerate_cycles(&g, 4).unwrap();
        for j in 1..4 {
            prop_assert_eq!(family.max_tuple_degree(j) as usize, oracle_max_tuple(family.copies(), j));
        }
    }
}
