use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{write_edge_list, Edge, Graph, NodeId};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRatios {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.7,
            valid: 0.1,
            test: 0.2,
        }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let all = [self.train, self.valid, self.test];
        if all.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(invalid(format!("split ratios must be positive: {all:?}")));
        }
        if (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("split ratios must sum to 1: {all:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSplit {
    pub train: Vec<Edge>,
    pub valid: Vec<Edge>,
    pub test: Vec<Edge>,
    /// Non-edges of the full graph, as many as `test`.
    pub test_negative: Vec<Edge>,
}

pub const SPLIT_SUFFIXES: [&str; 4] = ["train", "valid", "test", "testneg"];

impl EdgeSplit {
    /// Writes `<prefix>.train`, `.valid`, `.test` and `.testneg`.
    pub fn write(&self, prefix: &Path, labels: &[i64]) -> Result<()> {
        let parts = [&self.train, &self.valid, &self.test, &self.test_negative];
        for (suffix, edges) in SPLIT_SUFFIXES.iter().zip(parts) {
            write_edge_list(split_path(prefix, suffix), edges, labels)?;
        }
        Ok(())
    }
}

pub fn split_path(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn floor_count(ratio: f64, m: usize) -> usize {
    // Absorbs representation error such as 0.1 * 10 = 1.0000000000000002.
    (ratio * m as f64 + 1e-9).floor() as usize
}

/// Uniformly random partition of the edge set. Validation and test sizes are
/// floored; train takes the remainder.
pub fn split_edges(g: &Graph, ratios: SplitRatios, seed: u64) -> Result<EdgeSplit> {
    ratios.validate()?;
    let m = g.edge_count();
    let n_valid = floor_count(ratios.valid, m);
    let n_test = floor_count(ratios.test, m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = g.edges().to_vec();
    edges.shuffle(&mut rng);
    let test = edges.split_off(m - n_test);
    let valid = edges.split_off(m - n_test - n_valid);
    let test_negative = sample_non_edges(g, n_test, &HashSet::new(), &mut rng)?;
    Ok(EdgeSplit {
        train: edges,
        valid,
        test,
        test_negative,
    })
}

/// Draws `count` distinct unordered pairs that are neither edges of `g` nor
/// members of `exclude`, uniformly without replacement.
pub fn sample_non_edges<R: Rng>(
    g: &Graph,
    count: usize,
    exclude: &HashSet<Edge>,
    rng: &mut R,
) -> Result<Vec<Edge>> {
    let n = g.node_count();
    let total = n * n.saturating_sub(1) / 2;
    let available = total - g.edge_count() - exclude.len().min(total - g.edge_count());
    if count > available {
        return Err(Error::TooDense {
            needed: count,
            available,
        });
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let allowed = |u: NodeId, v: NodeId| !g.has_edge(u, v) && !exclude.contains(&(u, v));
    if available <= 4 * count {
        let mut pool: Vec<Edge> = Vec::with_capacity(available);
        for u in 0..n as NodeId {
            for v in u + 1..n as NodeId {
                if allowed(u, v) {
                    pool.push((u, v));
                }
            }
        }
        if pool.len() < count {
            return Err(Error::TooDense {
                needed: count,
                available: pool.len(),
            });
        }
        let (chosen, _) = pool.partial_shuffle(rng, count);
        return Ok(chosen.to_vec());
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = rng.random_range(0..n as NodeId);
        let b = rng.random_range(0..n as NodeId);
        if a == b {
            continue;
        }
        let pair = if a < b { (a, b) } else { (b, a) };
        if allowed(pair.0, pair.1) && seen.insert(pair) {
            out.push(pair);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_erdos_renyi;

    #[test]
    fn sizes_follow_floor_rule() {
        let g = Graph::from_edges(
            6,
            [(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 2), (1, 3), (1, 4), (1, 5), (2, 3)],
        )
        .unwrap();
        let s = split_edges(&g, SplitRatios::default(), 1).unwrap();
        assert_eq!((s.train.len(), s.valid.len(), s.test.len()), (7, 1, 2));
        assert_eq!(s.test_negative.len(), 2);
    }

    #[test]
    fn complete_graph_has_no_negatives() {
        let g = generate_erdos_renyi(5, 1.0, 0).unwrap();
        assert!(matches!(
            split_edges(&g, SplitRatios::default(), 0),
            Err(Error::TooDense { .. })
        ));
    }

    #[test]
    fn deterministic() {
        let g = generate_erdos_renyi(40, 0.2, 5).unwrap();
        let a = split_edges(&g, SplitRatios::default(), 9).unwrap();
        let b = split_edges(&g, SplitRatios::default(), 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_ratios_rejected() {
        let g = generate_erdos_renyi(10, 0.5, 0).unwrap();
        let bad = SplitRatios {
            train: 0.7,
            valid: 0.2,
            test: 0.2,
        };
        assert!(split_edges(&g, bad, 0).is_err());
        let zero = SplitRatios {
            train: 0.8,
            valid: 0.0,
            test: 0.2,
        };
        assert!(split_edges(&g, zero, 0).is_err());
    }

    #[test]
    fn dense_graph_uses_enumeration_path() {
        // 10 nodes, 45 pairs; dropping 5 edges leaves 5 non-edges for 8 test edges.
        let full = generate_erdos_renyi(10, 1.0, 0).unwrap();
        let kept: Vec<_> = full.edges()[5..].to_vec();
        let g = full.with_edges(&kept).unwrap();
        assert!(matches!(
            split_edges(&g, SplitRatios::default(), 0),
            Err(Error::TooDense { needed: 8, available: 5 })
        ));
        let kept: Vec<_> = full.edges()[20..].to_vec();
        let g = full.with_edges(&kept).unwrap();
        let s = split_edges(&g, SplitRatios::default(), 0).unwrap();
        assert_eq!(s.test_negative.len(), 5);
        assert!(s.test_negative.iter().all(|&(u, v)| !g.has_edge(u, v)));
    }

    #[test]
    fn write_uses_suffixes() {
        let g = generate_erdos_renyi(30, 0.3, 2).unwrap();
        let s = split_edges(&g, SplitRatios::default(), 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("er");
        s.write(&prefix, g.labels()).unwrap();
        for suffix in SPLIT_SUFFIXES {
            assert!(split_path(&prefix, suffix).exists());
        }
    }
}
