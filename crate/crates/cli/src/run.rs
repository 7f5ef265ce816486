//! `train` and `eval`.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use dimreg::graph::{load_edge_list, read_labeled_pairs, split_path, EdgeSplit};
use dimreg::linkpred::MetricReport;
use dimreg::pipeline::{evaluate_split, train_on_split};
use dimreg::{Edge, EmbeddingMatrix, Graph, NodeId};

use crate::config::RunConfig;

pub const CONFIG_FILE: &str = "config.json";
pub const EMBEDDINGS_FILE: &str = "embeddings.tsv";
pub const TRACE_FILE: &str = "trace.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const SPLIT_PREFIX: &str = "split";

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub run_dir: PathBuf,
    pub nodes: usize,
    pub dim: usize,
    pub pairs: usize,
    pub epochs: usize,
    pub train_time_ms: f64,
}

pub fn run_dir(out: &Path, cfg: &RunConfig) -> PathBuf {
    out.join(cfg.hash())
}

/// Trains on the training part of the split and writes the resolved config,
/// embeddings, trace and split files into `<out>/<config hash>`.
pub fn train(cfg: &RunConfig, out: &Path) -> Result<TrainSummary> {
    let (g, _) = load_edge_list(&cfg.dataset, false).with_context(|| format!("loading {}", cfg.dataset.display()))?;
    let dir = run_dir(out, cfg);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    cfg.write(&dir.join(CONFIG_FILE))?;
    let t = train_on_split(&g, &cfg.experiment(), cfg.seed)?;
    t.embeddings.write_text(dir.join(EMBEDDINGS_FILE), g.labels())?;
    t.trace.write_csv(dir.join(TRACE_FILE))?;
    t.split.write(&dir.join(SPLIT_PREFIX), g.labels())?;
    log::info!("trained {} pairs in {:.0} ms", t.pairs, t.trace.train_time_ms());
    Ok(TrainSummary {
        run_dir: dir,
        nodes: g.node_count(),
        dim: t.embeddings.dim(),
        pairs: t.pairs,
        epochs: t.trace.records.len().saturating_sub(1),
        train_time_ms: t.trace.train_time_ms(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub valid_auc: Option<f64>,
    #[serde(flatten)]
    pub test: MetricReport,
}

/// Evaluates stored embeddings against a stored split. Node labels in the
/// split files are resolved through the embedding file's label column.
pub fn eval(embeddings: &Path, split_prefix: &Path, cfg: &RunConfig) -> Result<EvalReport> {
    let (labels, x) =
        EmbeddingMatrix::read_text(embeddings).with_context(|| format!("reading {}", embeddings.display()))?;
    let index: HashMap<i64, NodeId> = labels.iter().enumerate().map(|(i, &l)| (l, i as NodeId)).collect();
    let read = |suffix: &str| -> Result<Vec<Edge>> {
        let path = split_path(split_prefix, suffix);
        if !path.exists() {
            return Ok(Vec::new());
        }
        read_labeled_pairs(&path)?
            .into_iter()
            .map(|(a, b)| match (index.get(&a), index.get(&b)) {
                (Some(&u), Some(&v)) => Ok((u, v)),
                _ => bail!("{}: edge ({a}, {b}) names a node without an embedding", path.display()),
            })
            .collect()
    };
    let split = EdgeSplit {
        train: read("train")?,
        valid: read("valid")?,
        test: read("test")?,
        test_negative: read("testneg")?,
    };
    if split.test.is_empty() {
        bail!("empty test set under {}", split_prefix.display());
    }
    let all: Vec<Edge> = split.train.iter().chain(&split.valid).chain(&split.test).copied().collect();
    let full = Graph::from_edges(x.rows(), all)?;
    let (valid_auc, mut test) = evaluate_split(&full, &x, &split, &cfg.eval, cfg.seed)?;
    test.dataset = cfg.dataset_name();
    test.variant = cfg.variant.to_string();
    Ok(EvalReport {
        valid_auc: (!valid_auc.is_nan()).then_some(valid_auc),
        test,
    })
}

/// Evaluates the run stored in `dir` and writes `metrics.json` there.
pub fn eval_run_dir(dir: &Path) -> Result<EvalReport> {
    let cfg = RunConfig::load(&dir.join(CONFIG_FILE), &[])?;
    let report = eval(&dir.join(EMBEDDINGS_FILE), &dir.join(SPLIT_PREFIX), &cfg)?;
    fs::write(dir.join(METRICS_FILE), serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(report)
}
