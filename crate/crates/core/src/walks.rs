//! Positive pair generation: the edge set for LINE, or context windows over
//! second-order biased random walks for node2vec.
//!
//! Transition weights are evaluated per step by a cumulative scan over the
//! current node's neighbours. The alternative, a precomputed alias table per
//! directed edge, gives O(1) steps but costs O(sum of squared degrees) memory;
//! at desk scale the scan is cheaper overall.

use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{Edge, Graph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkConfig {
    /// Return parameter; weight `1/p` for stepping back to the previous node.
    pub p: f64,
    /// In-out parameter; weight `1/q` for moving away from the previous node.
    pub q: f64,
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub context_size: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            p: 1.0,
            q: 1.0,
            walk_length: 20,
            walks_per_node: 10,
            context_size: 5,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.q > 0.0) {
            return Err(invalid(format!("p and q must be positive (p = {}, q = {})", self.p, self.q)));
        }
        if self.walk_length < 2 || self.walks_per_node == 0 || self.context_size == 0 {
            return Err(invalid("walk_length >= 2, walks_per_node >= 1 and context_size >= 1 required"));
        }
        if self.context_size >= self.walk_length {
            return Err(invalid("context_size must be smaller than walk_length"));
        }
        Ok(())
    }
}

/// Ordered positive pairs over `n` nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSet {
    n: usize,
    pairs: Vec<Edge>,
}

impl PairSet {
    pub fn new(n: usize, pairs: Vec<Edge>) -> Result<PairSet> {
        if let Some(&(u, v)) = pairs.iter().find(|&&(u, v)| u as usize >= n || v as usize >= n) {
            return Err(invalid(format!("pair ({u}, {v}) out of range for n = {n}")));
        }
        Ok(PairSet { n, pairs })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[Edge] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Average number of positive pairs per node, `b`.
    pub fn per_node_count(&self) -> f64 {
        self.pairs.len() as f64 / self.n as f64
    }
}

/// Both orientations of every edge of `g`.
pub fn pairs_from_edges(g: &Graph) -> PairSet {
    let pairs = g.edges().iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
    PairSet {
        n: g.node_count(),
        pairs,
    }
}

fn walk_rng(seed: u64, start: NodeId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start as u64);
    rng
}

/// `walks_per_node` walks from every non-isolated node. Each start node uses
/// its own RNG stream, so the output does not depend on thread count.
/// Walks are ordered by round, then by start node.
pub fn generate_walks(g: &Graph, cfg: &WalkConfig, seed: u64) -> Result<Vec<Vec<NodeId>>> {
    cfg.validate()?;
    if g.edge_count() == 0 {
        return Err(crate::error::Error::EmptyGraph);
    }
    let per_start: Vec<Vec<Vec<NodeId>>> = (0..g.node_count() as NodeId)
        .into_par_iter()
        .map(|start| {
            if g.degree(start) == 0 {
                return Vec::new();
            }
            let mut rng = walk_rng(seed, start);
            (0..cfg.walks_per_node)
                .map(|_| walk_from(g, cfg, start, &mut rng))
                .collect()
        })
        .collect();
    let mut walks = Vec::with_capacity(g.node_count() * cfg.walks_per_node);
    for round in 0..cfg.walks_per_node {
        for w in &per_start {
            if let Some(walk) = w.get(round) {
                walks.push(walk.clone());
            }
        }
    }
    Ok(walks)
}

fn walk_from<R: Rng>(g: &Graph, cfg: &WalkConfig, start: NodeId, rng: &mut R) -> Vec<NodeId> {
    let mut walk = Vec::with_capacity(cfg.walk_length);
    walk.push(start);
    let first = g.neighbors(start);
    walk.push(first[rng.random_range(0..first.len())]);
    let mut weights = Vec::new();
    while walk.len() < cfg.walk_length {
        let prev = walk[walk.len() - 2];
        let cur = walk[walk.len() - 1];
        match second_order_step(g, prev, cur, cfg.p, cfg.q, &mut weights, rng) {
            Some(next) => walk.push(next),
            None => break,
        }
    }
    walk
}

/// Unnormalised weight of moving `prev -> cur -> next`.
pub fn transition_weight(g: &Graph, prev: NodeId, next: NodeId, p: f64, q: f64) -> f64 {
    if next == prev {
        1.0 / p
    } else if g.has_edge(next, prev) {
        1.0
    } else {
        1.0 / q
    }
}

fn second_order_step<R: Rng>(
    g: &Graph,
    prev: NodeId,
    cur: NodeId,
    p: f64,
    q: f64,
    weights: &mut Vec<f64>,
    rng: &mut R,
) -> Option<NodeId> {
    let nbrs = g.neighbors(cur);
    weights.clear();
    let mut total = 0.0;
    for &x in nbrs {
        total += transition_weight(g, prev, x, p, q);
        weights.push(total);
    }
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let u = rng.random::<f64>() * total;
    let idx = weights.partition_point(|&c| c <= u).min(nbrs.len() - 1);
    Some(nbrs[idx])
}

/// Emits `(walk[i], walk[j])` for every `0 < |i - j| <= context_size`.
pub fn pairs_from_walks(n: usize, walks: &[Vec<NodeId>], context_size: usize) -> Result<PairSet> {
    if context_size == 0 {
        return Err(invalid("context_size must be at least 1"));
    }
    let mut pairs = Vec::new();
    for walk in walks {
        for (i, &src) in walk.iter().enumerate() {
            let lo = i.saturating_sub(context_size);
            let hi = (i + context_size).min(walk.len() - 1);
            for (j, &dst) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                if j != i {
                    pairs.push((src, dst));
                }
            }
        }
    }
    PairSet::new(n, pairs)
}

/// One walk per line, space-separated node labels.
pub fn write_walks(path: impl AsRef<Path>, walks: &[Vec<NodeId>], labels: &[i64]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for walk in walks {
        let line: Vec<String> = walk.iter().map(|&v| labels[v as usize].to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()?;
    Ok(())
}
