use std::collections::HashSet;

use dimreg::graph::{generate_erdos_renyi, generate_sbm, split_edges, SplitRatios};
use dimreg::{Edge, Graph};
use proptest::prelude::*;

fn arb_graph() -> impl Strategy<Value = Graph> {
    (5usize..40, 0.1f64..0.9, any::<u64>())
        .prop_filter_map("needs edges", |(n, p, seed)| {
            let g = generate_erdos_renyi(n, p, seed).ok()?;
            // Balanced test negatives need at least as many non-edges.
            let pairs = n * (n - 1) / 2;
            (g.edge_count() >= 10 && 2 * g.edge_count() <= pairs).then_some(g)
        })
}

proptest! {
    #[test]
    fn degree_sum_is_twice_edge_count(g in arb_graph()) {
        prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
        for &(u, v) in g.edges() {
            prop_assert!(g.has_edge(u, v) && g.has_edge(v, u));
        }
    }

    #[test]
    fn split_partitions_edges(g in arb_graph(), seed in any::<u64>()) {
        let s = split_edges(&g, SplitRatios::default(), seed).unwrap();
        let m = g.edge_count();
        prop_assert_eq!(s.valid.len(), m / 10);
        prop_assert_eq!(s.test.len(), (0.2 * m as f64 + 1e-9).floor() as usize);
        prop_assert_eq!(s.train.len() + s.valid.len() + s.test.len(), m);

        let all: HashSet<Edge> = g.edges().iter().copied().collect();
        let mut seen = HashSet::new();
        for e in s.train.iter().chain(&s.valid).chain(&s.test) {
            prop_assert!(all.contains(e));
            prop_assert!(seen.insert(*e), "edge {:?} in two parts", e);
        }

        prop_assert_eq!(s.test_negative.len(), s.test.len());
        let negs: HashSet<Edge> = s.test_negative.iter().copied().collect();
        prop_assert_eq!(negs.len(), s.test_negative.len());
        for &(u, v) in &s.test_negative {
            prop_assert!(u != v && !g.has_edge(u, v));
        }
    }

    #[test]
    fn split_is_seed_deterministic(g in arb_graph(), seed in any::<u64>()) {
        let a = split_edges(&g, SplitRatios::default(), seed).unwrap();
        let b = split_edges(&g, SplitRatios::default(), seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

fn binomial_z(count: usize, trials: usize, p: f64) -> f64 {
    let mean = trials as f64 * p;
    (count as f64 - mean) / (mean * (1.0 - p)).sqrt()
}

#[test]
fn erdos_renyi_edge_count_is_binomial() {
    let n = 300;
    let pairs = n * (n - 1) / 2;
    for (seed, p) in [(1, 0.01), (2, 0.05), (3, 0.3)] {
        let g = generate_erdos_renyi(n, p, seed).unwrap();
        let z = binomial_z(g.edge_count(), pairs, p);
        assert!(z.abs() < 4.0, "p={p}: z={z}");
    }
}

#[test]
fn sbm_block_counts_are_binomial() {
    let (n, p_in, p_out) = (200, 0.3, 0.02);
    let g = generate_sbm(n, 2, p_in, p_out, 11).unwrap();
    let half = n / 2;
    let within = g.edges().iter().filter(|&&(u, v)| ((u as usize) < half) == ((v as usize) < half)).count();
    let between = g.edge_count() - within;
    assert!(binomial_z(within, 2 * half * (half - 1) / 2, p_in).abs() < 4.0);
    assert!(binomial_z(between, half * half, p_out).abs() < 4.0);
}

#[test]
fn sbm_with_equal_probabilities_matches_erdos_renyi() {
    let (n, p) = (150, 0.08);
    let pairs = n * (n - 1) / 2;
    let mean_sbm: f64 =
        (0..20).map(|s| generate_sbm(n, 3, p, p, s).unwrap().edge_count() as f64).sum::<f64>() / 20.0;
    let mean_er: f64 = (0..20).map(|s| generate_erdos_renyi(n, p, 100 + s).unwrap().edge_count() as f64).sum::<f64>() / 20.0;
    let se = (pairs as f64 * p * (1.0 - p) / 20.0).sqrt();
    assert!((mean_sbm - pairs as f64 * p).abs() < 4.0 * se);
    assert!((mean_sbm - mean_er).abs() < 4.0 * se * 2f64.sqrt());
}
