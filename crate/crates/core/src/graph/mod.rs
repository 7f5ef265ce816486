//! Undirected, unweighted graphs stored as a compressed adjacency index.
//!
//! Node ids are dense `u32`s in `0..n`. The original labels from an input
//! file are kept in a side table so embeddings can be written back out under
//! the names the user supplied.

mod generate;
mod io;
mod split;

pub use generate::{block_of, generate_erdos_renyi, generate_sbm};
pub use io::{load_edge_list, parse_edge_list, read_labeled_pairs, write_edge_list, LoadReport};
pub use split::{sample_non_edges, split_edges, split_path, EdgeSplit, SplitRatios, SPLIT_SUFFIXES};

use crate::error::{invalid, Result};

pub type NodeId = u32;
pub type Edge = (NodeId, NodeId);

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    /// Canonical edges with `u < v`, sorted.
    edges: Vec<Edge>,
    labels: Vec<i64>,
}

/// Counts of input edges discarded while building a [`Graph`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl Graph {
    /// Builds a graph on `n` nodes labelled `0..n`.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = Edge>,
    {
        let labels = (0..n as i64).collect();
        Self::with_labels(labels, edges).map(|(g, _)| g)
    }

    /// Builds a graph whose node `i` carries `labels[i]`. Self-loops are
    /// dropped and duplicate or reversed edges merged.
    pub fn with_labels<I>(labels: Vec<i64>, edges: I) -> Result<(Graph, BuildStats)>
    where
        I: IntoIterator<Item = Edge>,
    {
        let n = labels.len();
        if n > NodeId::MAX as usize {
            return Err(invalid(format!("{n} nodes exceeds the u32 id space")));
        }
        let mut stats = BuildStats::default();
        let mut canon = Vec::new();
        for (u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(invalid(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                stats.self_loops += 1;
                continue;
            }
            canon.push(if u < v { (u, v) } else { (v, u) });
        }
        canon.sort_unstable();
        let before = canon.len();
        canon.dedup();
        stats.duplicates = before - canon.len();

        let mut degree = vec![0usize; n];
        for &(u, v) in &canon {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0; 2 * canon.len()];
        for &(u, v) in &canon {
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for v in 0..n {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Ok((
            Graph {
                offsets,
                neighbors,
                edges: canon,
                labels,
            },
            stats,
        ))
    }

    /// Same node set and labels, different edges.
    pub fn with_edges(&self, edges: &[Edge]) -> Result<Graph> {
        Self::with_labels(self.labels.clone(), edges.iter().copied()).map(|(g, _)| g)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn label(&self, v: NodeId) -> i64 {
        self.labels[v as usize]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count() as NodeId).map(|v| self.degree(v)).collect()
    }

    /// Sorted neighbours of `v`.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Edge density `m / (n choose 2)`.
    pub fn density(&self) -> f64 {
        let n = self.node_count() as f64;
        if n < 2.0 {
            return 0.0;
        }
        self.edge_count() as f64 / (n * (n - 1.0) / 2.0)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0 as NodeId];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in self.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }
}

/// Mean local clustering coefficient; nodes with degree < 2 contribute 0.
pub fn average_clustering_coefficient(g: &Graph) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    let mut mark = vec![false; n];
    let mut total = 0.0;
    for v in 0..n as NodeId {
        let nbrs = g.neighbors(v);
        let k = nbrs.len();
        if k < 2 {
            continue;
        }
        for &u in nbrs {
            mark[u as usize] = true;
        }
        let mut links = 0usize;
        for &u in nbrs {
            links += g
                .neighbors(u)
                .iter()
                .filter(|&&w| w > u && mark[w as usize])
                .count();
        }
        for &u in nbrs {
            mark[u as usize] = false;
        }
        total += 2.0 * links as f64 / (k * (k - 1)) as f64;
    }
    total / n as f64
}
