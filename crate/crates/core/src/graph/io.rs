use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{BuildStats, Edge, Graph, NodeId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub lines: usize,
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Reads a whitespace-separated edge list. Labels are re-indexed densely in
/// order of first appearance. Input is always symmetrized; `directed_hint`
/// only affects whether reversed pairs are reported as duplicates.
pub fn load_edge_list(path: impl AsRef<Path>, directed_hint: bool) -> Result<(Graph, LoadReport)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let pairs = parse_pairs(&text, path)?;
    parse_into_graph(pairs, directed_hint)
}

/// Parses edge-list text that did not come from a file.
pub fn parse_edge_list(text: &str) -> Result<(Graph, LoadReport)> {
    let pairs = parse_pairs(text, Path::new("<memory>"))?;
    parse_into_graph(pairs, false)
}

fn parse_into_graph(pairs: Vec<(i64, i64)>, directed_hint: bool) -> Result<(Graph, LoadReport)> {
    if pairs.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut index: HashMap<i64, NodeId> = HashMap::new();
    let mut labels = Vec::new();
    let mut intern = |label: i64| -> NodeId {
        *index.entry(label).or_insert_with(|| {
            labels.push(label);
            (labels.len() - 1) as NodeId
        })
    };
    let edges: Vec<Edge> = pairs.iter().map(|&(a, b)| (intern(a), intern(b))).collect();
    let lines = edges.len();
    let (graph, BuildStats { self_loops, duplicates }) = Graph::with_labels(labels, edges)?;
    if graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if self_loops > 0 {
        log::warn!("dropped {self_loops} self-loop(s)");
    }
    if duplicates > 0 && !directed_hint {
        log::warn!("merged {duplicates} duplicate edge(s)");
    }
    Ok((
        graph,
        LoadReport {
            lines,
            self_loops,
            duplicates,
        },
    ))
}

fn parse_pairs(text: &str, path: &Path) -> Result<Vec<(i64, i64)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut next = |what: &str| -> Result<i64> {
            let tok = tokens.next().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("missing {what} node"),
            })?;
            tok.parse::<i64>().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("bad {what} node {tok:?}: {e}"),
            })
        };
        let a = next("source")?;
        let b = next("target")?;
        out.push((a, b));
    }
    Ok(out)
}

/// Reads an edge-list file as raw label pairs without building a graph.
pub fn read_labeled_pairs(path: impl AsRef<Path>) -> Result<Vec<(i64, i64)>> {
    let path = path.as_ref();
    parse_pairs(&fs::read_to_string(path)?, path)
}

/// Writes `edges` one per line using the graph's original labels.
pub fn write_edge_list(path: impl AsRef<Path>, edges: &[Edge], labels: &[i64]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for &(u, v) in edges {
        writeln!(w, "{} {}", labels[u as usize], labels[v as usize])?;
    }
    w.flush()?;
    Ok(())
}
