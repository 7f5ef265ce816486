use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, NodeId};
use crate::error::{invalid, Result};

/// Block index of node `v` when `n` nodes are split into `blocks` equal
/// blocks, any remainder going to the last one.
pub fn block_of(v: usize, n: usize, blocks: usize) -> usize {
    let size = n / blocks;
    (v / size).min(blocks - 1)
}

/// Stochastic block model: each intra-block pair is an edge with probability
/// `p_within`, each inter-block pair with probability `p_between`.
pub fn generate_sbm(
    n: usize,
    blocks: usize,
    p_within: f64,
    p_between: f64,
    seed: u64,
) -> Result<Graph> {
    if blocks == 0 || n < blocks {
        return Err(invalid(format!("need at least one node per block (n = {n}, blocks = {blocks})")));
    }
    for p in [p_within, p_between] {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("probability {p} outside [0, 1]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        let bi = block_of(i, n, blocks);
        for j in i + 1..n {
            let p = if bi == block_of(j, n, blocks) { p_within } else { p_between };
            if rng.random::<f64>() < p {
                edges.push((i as NodeId, j as NodeId));
            }
        }
    }
    Graph::from_edges(n, edges)
}

pub fn generate_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    generate_sbm(n, 1, p, p, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_probabilities_give_disjoint_cliques() {
        let g = generate_sbm(4, 2, 1.0, 0.0, 3).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (2, 3)]);
    }

    #[test]
    fn er_extremes() {
        assert_eq!(generate_erdos_renyi(5, 0.0, 1).unwrap().edge_count(), 0);
        assert_eq!(generate_erdos_renyi(5, 1.0, 1).unwrap().edge_count(), 10);
    }

    #[test]
    fn remainder_goes_to_last_block() {
        assert_eq!(block_of(9, 10, 3), 2);
        assert_eq!(block_of(5, 10, 3), 1);
        let g = generate_sbm(5, 2, 1.0, 0.0, 0).unwrap();
        // Blocks {0,1} and {2,3,4}.
        assert_eq!(g.edge_count(), 1 + 3);
    }

    #[test]
    fn errors() {
        assert!(generate_sbm(1, 2, 0.5, 0.5, 0).is_err());
        assert!(generate_sbm(4, 2, 1.5, 0.5, 0).is_err());
        assert!(generate_sbm(4, 0, 0.5, 0.5, 0).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_erdos_renyi(60, 0.1, 17).unwrap();
        let b = generate_erdos_renyi(60, 0.1, 17).unwrap();
        let c = generate_erdos_renyi(60, 0.1, 18).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.edges(), c.edges());
    }
}
