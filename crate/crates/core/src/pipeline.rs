//! Split, pair generation, training and evaluation chained into one run.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{sample_non_edges, split_edges, EdgeSplit, Graph, SplitRatios};
use crate::linkpred::{evaluate, test_auc, EvalConfig, MetricReport};
use crate::trainer::{substream, subseed, train, EmbeddingMatrix, Repulsion, Stream, TrainConfig, TrainingTrace};
use crate::walks::{generate_walks, pairs_from_edges, pairs_from_walks, PairSet, WalkConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Line,
    Node2vec,
}

/// `I`: negative sampling, `II0`: attraction only, `II`: dimension-mean
/// regularisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    I,
    II0,
    II,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::I, Variant::II0, Variant::II];

    pub fn repulsion(self) -> Repulsion {
        match self {
            Variant::I => Repulsion::Sgns,
            Variant::II0 => Repulsion::None,
            Variant::II => Repulsion::Dimreg,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::I => "I",
            Variant::II0 => "II0",
            Variant::II => "II",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        match s {
            "I" => Ok(Variant::I),
            "II0" => Ok(Variant::II0),
            "II" => Ok(Variant::II),
            other => Err(invalid(format!("unknown variant {other:?} (expected I, II0 or II)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub method: Method,
    pub variant: Variant,
    pub train: TrainConfig,
    pub walks: WalkConfig,
    pub split: SplitRatios,
    pub eval: EvalConfig,
}

impl Experiment {
    /// Training configuration with the variant's repulsion mode applied.
    pub fn resolved_train(&self) -> TrainConfig {
        TrainConfig {
            repulsion: self.variant.repulsion(),
            ..self.train.clone()
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub split: EdgeSplit,
    pub pairs: usize,
    pub embeddings: EmbeddingMatrix,
    pub trace: TrainingTrace,
    pub valid_auc: f64,
    pub test: MetricReport,
}

/// Positive pairs on the training graph: its edges for LINE, walk contexts
/// for node2vec.
pub fn training_pairs(train_graph: &Graph, method: Method, walks: &WalkConfig, seed: u64) -> Result<PairSet> {
    match method {
        Method::Line => Ok(pairs_from_edges(train_graph)),
        Method::Node2vec => {
            let w = generate_walks(train_graph, walks, subseed(seed, Stream::Walks))?;
            pairs_from_walks(train_graph.node_count(), &w, walks.context_size)
        }
    }
}

/// Full run on `g`. Validation and test edges are hidden from training.
pub fn run_experiment(g: &Graph, exp: &Experiment, seed: u64) -> Result<ExperimentResult> {
    let trained = train_on_split(g, exp, seed)?;
    let (valid_auc, mut test) = evaluate_split(g, &trained.embeddings, &trained.split, &exp.eval, seed)?;
    test.variant = exp.variant.to_string();
    Ok(ExperimentResult {
        split: trained.split,
        pairs: trained.pairs,
        embeddings: trained.embeddings,
        trace: trained.trace,
        valid_auc,
        test,
    })
}

#[derive(Debug, Clone)]
pub struct TrainedSplit {
    pub split: EdgeSplit,
    pub pairs: usize,
    pub embeddings: EmbeddingMatrix,
    pub trace: TrainingTrace,
}

/// Splits `g` and trains on the training part only.
pub fn train_on_split(g: &Graph, exp: &Experiment, seed: u64) -> Result<TrainedSplit> {
    let split = split_edges(g, exp.split, subseed(seed, Stream::Split))?;
    let train_graph = Graph::from_edges(g.node_count(), split.train.iter().copied())?;
    let pairs = training_pairs(&train_graph, exp.method, &exp.walks, seed)?;
    let (embeddings, trace) = train(&train_graph, &pairs, &exp.resolved_train(), seed)?;
    Ok(TrainedSplit {
        split,
        pairs: pairs.len(),
        embeddings,
        trace,
    })
}

/// Validation AUC and test metrics of trained embeddings. The validation
/// negatives are drawn from non-edges of `g` disjoint from the test
/// negatives. Replaying with the same `seed` reproduces [`run_experiment`].
pub fn evaluate_split(
    g: &Graph,
    embeddings: &EmbeddingMatrix,
    split: &EdgeSplit,
    eval: &EvalConfig,
    seed: u64,
) -> Result<(f64, MetricReport)> {
    let n = g.node_count();
    let (clf, mut test) = evaluate(embeddings, split, n, eval, subseed(seed, Stream::Classifier))?;
    test.seed = seed;
    let valid_auc = if split.valid.is_empty() {
        f64::NAN
    } else {
        let taken: HashSet<_> = split.test_negative.iter().copied().collect();
        let mut rng = substream(seed, Stream::Ranking);
        let valid_neg = sample_non_edges(g, split.valid.len(), &taken, &mut rng)?;
        test_auc(embeddings, &clf, &split.valid, &valid_neg)?
    };
    Ok((valid_auc, test))
}

/// Hyperparameter grid searched in three stages: learning rate on variant
/// `I`, then walk bias `p, q` (node2vec only), then `n_negative x lambda`
/// on variant `II`. Each stage keeps the best validation AUC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGrid {
    pub eta: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub n_negative: Vec<usize>,
    pub lambda: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            eta: vec![0.001, 0.01, 0.1, 1.0],
            p: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            q: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            n_negative: vec![5, 10, 100],
            lambda: vec![0.1, 1.0, 10.0, 100.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStage {
    LearningRate,
    WalkBias,
    Augmentation,
}

impl fmt::Display for SweepStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepStage::LearningRate => "learning_rate",
            SweepStage::WalkBias => "walk_bias",
            SweepStage::Augmentation => "augmentation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub stage: SweepStage,
    pub variant: Variant,
    pub eta: f64,
    pub p: f64,
    pub q: f64,
    pub n_negative: usize,
    pub lambda: f64,
    pub valid_auc: f64,
    pub test_auc: f64,
    /// Taken from a previous run rather than recomputed.
    pub cached: bool,
}

/// Best experiment of one sweep stage.
pub type StageWinner = (SweepStage, Experiment);

/// Runs the staged search. `lookup` may return `(valid_auc, test_auc)` for
/// an already finished experiment; `on_record` sees every cell as it
/// completes. Returns all records plus the winning experiment per stage.
pub fn sweep<F, G>(
    g: &Graph,
    base: &Experiment,
    grid: &SweepGrid,
    seed: u64,
    mut lookup: F,
    mut on_record: G,
) -> Result<(Vec<SweepRecord>, Vec<StageWinner>)>
where
    F: FnMut(&Experiment) -> Option<(f64, f64)>,
    G: FnMut(&Experiment, &SweepRecord) -> Result<()>,
{
    if grid.eta.is_empty() || grid.n_negative.is_empty() || grid.lambda.is_empty() {
        return Err(invalid("sweep grid lists must be non-empty"));
    }
    let mut records = Vec::new();
    let mut winners = Vec::new();
    let mut run_stage = |stage: SweepStage, cells: Vec<Experiment>, records: &mut Vec<SweepRecord>| -> Result<Experiment> {
        let mut best: Option<(f64, Experiment)> = None;
        for exp in cells {
            let (valid_auc, test_auc, cached) = match lookup(&exp) {
                Some((v, t)) => (v, t, true),
                // A diverged cell is recorded with NaN scores and never wins.
                None => match run_experiment(g, &exp, seed) {
                    Ok(r) => (r.valid_auc, r.test.auc_roc, false),
                    Err(Error::NonFinite { .. }) => (f64::NAN, f64::NAN, false),
                    Err(e) => return Err(e),
                },
            };
            let rec = SweepRecord {
                stage,
                variant: exp.variant,
                eta: exp.train.eta,
                p: exp.walks.p,
                q: exp.walks.q,
                n_negative: exp.train.n_negative,
                lambda: exp.train.lambda,
                valid_auc,
                test_auc,
                cached,
            };
            on_record(&exp, &rec)?;
            records.push(rec);
            if !valid_auc.is_nan() && best.as_ref().is_none_or(|(b, _)| valid_auc > *b) {
                best = Some((valid_auc, exp));
            }
        }
        best.map(|(_, e)| e)
            .ok_or_else(|| invalid(format!("every {stage} cell diverged")))
    };

    let mut current = Experiment {
        variant: Variant::I,
        ..base.clone()
    };
    let cells = grid
        .eta
        .iter()
        .map(|&eta| {
            let mut e = current.clone();
            e.train.eta = eta;
            e
        })
        .collect();
    current = run_stage(SweepStage::LearningRate, cells, &mut records)?;
    winners.push((SweepStage::LearningRate, current.clone()));

    if base.method == Method::Node2vec && !grid.p.is_empty() && !grid.q.is_empty() {
        let mut cells = Vec::new();
        for &p in &grid.p {
            for &q in &grid.q {
                let mut e = current.clone();
                e.walks.p = p;
                e.walks.q = q;
                cells.push(e);
            }
        }
        current = run_stage(SweepStage::WalkBias, cells, &mut records)?;
        winners.push((SweepStage::WalkBias, current.clone()));
    }

    let mut cells = Vec::new();
    for &n_negative in &grid.n_negative {
        for &lambda in &grid.lambda {
            let mut e = current.clone();
            e.variant = Variant::II;
            e.train.n_negative = n_negative;
            e.train.lambda = lambda;
            cells.push(e);
        }
    }
    let best = run_stage(SweepStage::Augmentation, cells, &mut records)?;
    winners.push((SweepStage::Augmentation, best));
    Ok((records, winners))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_sbm;
    use crate::linkpred::ClassifierConfig;

    fn quick(method: Method, variant: Variant) -> Experiment {
        Experiment {
            method,
            variant,
            train: TrainConfig {
                dim: 8,
                epochs: 3,
                batch_size: 64,
                ..TrainConfig::default()
            },
            walks: WalkConfig {
                walk_length: 8,
                walks_per_node: 2,
                context_size: 2,
                ..WalkConfig::default()
            },
            split: SplitRatios::default(),
            eval: EvalConfig {
                classifier: ClassifierConfig {
                    hidden: 8,
                    epochs: 3,
                    ..ClassifierConfig::default()
                },
                ..EvalConfig::default()
            },
        }
    }

    #[test]
    fn runs_every_method_and_variant() {
        let g = generate_sbm(60, 2, 0.3, 0.02, 1).unwrap();
        for method in [Method::Line, Method::Node2vec] {
            for v in Variant::ALL {
                let r = run_experiment(&g, &quick(method, v), 3).unwrap();
                assert_eq!(r.embeddings.rows(), 60);
                assert!((0.0..=1.0).contains(&r.test.auc_roc));
                assert!((0.0..=1.0).contains(&r.valid_auc));
                assert_eq!(r.test.variant, v.to_string());
            }
        }
    }

    #[test]
    fn deterministic() {
        let g = generate_sbm(50, 2, 0.3, 0.02, 2).unwrap();
        let e = quick(Method::Line, Variant::II);
        let a = run_experiment(&g, &e, 5).unwrap();
        let b = run_experiment(&g, &e, 5).unwrap();
        assert_eq!(a.embeddings, b.embeddings);
        assert_eq!(a.test, b.test);
    }

    #[test]
    fn sweep_stages_and_cache() {
        let g = generate_sbm(50, 2, 0.3, 0.02, 4).unwrap();
        let grid = SweepGrid {
            eta: vec![0.01, 0.1],
            p: vec![1.0],
            q: vec![0.5, 2.0],
            n_negative: vec![5],
            lambda: vec![0.1, 1.0],
        };
        let base = quick(Method::Node2vec, Variant::II);
        let (records, winners) = sweep(&g, &base, &grid, 1, |_| None, |_, _| Ok(())).unwrap();
        assert_eq!(records.len(), 2 + 2 + 2);
        assert_eq!(winners.len(), 3);
        assert_eq!(winners[2].1.variant, Variant::II);
        let best_eta = records[..2]
            .iter()
            .max_by(|a, b| a.valid_auc.total_cmp(&b.valid_auc))
            .unwrap()
            .eta;
        assert!(records[2..].iter().all(|r| r.eta == best_eta));

        let mut calls = 0;
        let (cached, _) = sweep(&g, &base, &grid, 1, |_| Some((0.5, 0.5)), |_, _| {
            calls += 1;
            Ok(())
        })
        .unwrap();
        assert!(cached.iter().all(|r| r.cached));
        assert_eq!(calls, 6);

        let line = quick(Method::Line, Variant::I);
        let (records, winners) = sweep(&g, &line, &grid, 1, |_| None, |_, _| Ok(())).unwrap();
        assert_eq!(records.len(), 2 + 2);
        assert_eq!(winners.len(), 2);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        }
        assert!("III".parse::<Variant>().is_err());
    }
}
