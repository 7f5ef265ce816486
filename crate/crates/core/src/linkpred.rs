//! Edge classification on frozen embeddings and the usual link-prediction
//! metrics.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{sample_non_edges, Edge, EdgeSplit, Graph, NodeId};
use crate::math::{sigmoid, softplus};
use crate::trainer::{AdamState, EmbeddingMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub eta: f64,
    pub batch_size: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            hidden: 128,
            epochs: 50,
            eta: 1e-3,
            batch_size: 256,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.epochs == 0 || self.batch_size == 0 {
            return Err(invalid("classifier hidden, epochs and batch_size must be positive"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(invalid(format!("classifier eta must be positive, got {}", self.eta)));
        }
        Ok(())
    }
}

/// `σ(w2 · relu(W1 [X_u; X_v] + b1) + b2)` with the pair taken in
/// ascending node order, so scores are symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeClassifier {
    d: usize,
    h: usize,
    /// `W1` (`h x 2d`, row-major), `b1`, `w2`, `b2`.
    params: Vec<f64>,
}

impl EdgeClassifier {
    fn new(d: usize, h: usize, rng: &mut impl Rng) -> EdgeClassifier {
        let mut params = vec![0.0; h * 2 * d + 2 * h + 1];
        // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) as in common MLP defaults.
        let a1 = 1.0 / ((2 * d) as f64).sqrt();
        for w in &mut params[..h * 2 * d] {
            *w = rng.random_range(-a1..a1);
        }
        let a2 = 1.0 / (h as f64).sqrt();
        let w2 = h * 2 * d + h;
        for w in &mut params[w2..w2 + h] {
            *w = rng.random_range(-a2..a2);
        }
        EdgeClassifier { d, h, params }
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn hidden(&self) -> usize {
        self.h
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.h * 2 * self.d;
        (b1, b1 + self.h, b1 + 2 * self.h)
    }

    fn input(x: &EmbeddingMatrix, (u, v): Edge) -> (&[f64], &[f64]) {
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        (x.row(a as usize), x.row(b as usize))
    }

    /// Pre-activation output and hidden activations.
    fn forward(&self, xu: &[f64], xv: &[f64], hidden: &mut [f64]) -> f64 {
        let (b1, w2, b2) = self.offsets();
        let width = 2 * self.d;
        let mut logit = self.params[b2];
        for (k, a) in hidden.iter_mut().enumerate() {
            let row = &self.params[k * width..(k + 1) * width];
            let pre = self.params[b1 + k] + crate::math::dot(&row[..self.d], xu) + crate::math::dot(&row[self.d..], xv);
            *a = pre.max(0.0);
            logit += self.params[w2 + k] * *a;
        }
        logit
    }

    pub fn logit(&self, x: &EmbeddingMatrix, e: Edge) -> f64 {
        let (xu, xv) = Self::input(x, e);
        let mut hidden = vec![0.0; self.h];
        self.forward(xu, xv, &mut hidden)
    }

    /// Edge probability in `(0, 1)`.
    pub fn score(&self, x: &EmbeddingMatrix, e: Edge) -> f64 {
        sigmoid(self.logit(x, e))
    }

    pub fn score_all(&self, x: &EmbeddingMatrix, edges: &[Edge]) -> Vec<f64> {
        edges.par_iter().map(|&e| self.score(x, e)).collect()
    }

    /// Adds the BCE gradient of one example to `grad`; returns its loss.
    fn accumulate(&self, x: &EmbeddingMatrix, e: Edge, label: f64, hidden: &mut [f64], grad: &mut [f64]) -> f64 {
        let (xu, xv) = Self::input(x, e);
        let logit = self.forward(xu, xv, hidden);
        let loss = label * softplus(-logit) + (1.0 - label) * softplus(logit);
        let delta = sigmoid(logit) - label;
        let (b1, w2, b2) = self.offsets();
        let width = 2 * self.d;
        grad[b2] += delta;
        for (k, &a) in hidden.iter().enumerate() {
            grad[w2 + k] += delta * a;
            if a > 0.0 {
                let dk = delta * self.params[w2 + k];
                grad[b1 + k] += dk;
                let row = &mut grad[k * width..(k + 1) * width];
                crate::math::axpy(dk, xu, &mut row[..self.d]);
                crate::math::axpy(dk, xv, &mut row[self.d..]);
            }
        }
        loss
    }

    /// Mean loss and gradient over a batch. Fixed-size chunks are reduced in
    /// order, so the result does not depend on the thread count.
    fn batch_gradient(&self, x: &EmbeddingMatrix, batch: &[(Edge, f64)]) -> (f64, Vec<f64>) {
        const CHUNK: usize = 32;
        let parts: Vec<(f64, Vec<f64>)> = batch
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut grad = vec![0.0; self.params.len()];
                let mut hidden = vec![0.0; self.h];
                let loss = chunk
                    .iter()
                    .map(|&(e, y)| self.accumulate(x, e, y, &mut hidden, &mut grad))
                    .sum::<f64>();
                (loss, grad)
            })
            .collect();
        let mut total = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        for (l, g) in parts {
            loss += l;
            crate::math::axpy(1.0, &g, &mut total);
        }
        let scale = 1.0 / batch.len() as f64;
        total.iter_mut().for_each(|g| *g *= scale);
        (loss * scale, total)
    }
}

/// Source of negative training pairs.
pub enum Negatives<'a> {
    Fixed(&'a [Edge]),
    /// As many non-edges of the graph as there are positives, redrawn every
    /// epoch.
    Resample(&'a Graph),
}

/// Mini-batch Adam on binary cross-entropy. Embeddings are frozen inputs.
pub fn train_classifier(
    x: &EmbeddingMatrix,
    positives: &[Edge],
    negatives: Negatives<'_>,
    cfg: &ClassifierConfig,
    seed: u64,
) -> Result<EdgeClassifier> {
    cfg.validate()?;
    if x.dim() == 0 {
        return Err(invalid("embeddings must have at least one dimension"));
    }
    if positives.is_empty() {
        return Err(invalid("classifier needs positive training edges"));
    }
    if let Negatives::Fixed(neg) = negatives {
        if neg.len() != positives.len() {
            return Err(invalid(format!(
                "{} positive but {} negative training edges",
                positives.len(),
                neg.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clf = EdgeClassifier::new(x.dim(), cfg.hidden, &mut rng);
    let mut adam = AdamState::new(clf.params.len());
    let mut examples: Vec<(Edge, f64)> = Vec::with_capacity(2 * positives.len());
    let mut batches = 0;
    for _ in 0..cfg.epochs {
        examples.clear();
        examples.extend(positives.iter().map(|&e| (e, 1.0)));
        match negatives {
            Negatives::Fixed(neg) => examples.extend(neg.iter().map(|&e| (e, 0.0))),
            Negatives::Resample(g) => {
                let neg = sample_non_edges(g, positives.len(), &HashSet::new(), &mut rng)?;
                examples.extend(neg.into_iter().map(|e| (e, 0.0)));
            }
        }
        examples.shuffle(&mut rng);
        for batch in examples.chunks(cfg.batch_size) {
            batches += 1;
            let (loss, grad) = clf.batch_gradient(x, batch);
            if !loss.is_finite() {
                return Err(Error::NonFinite { batch: batches });
            }
            adam.step(&mut clf.params, &grad, cfg.eta);
        }
    }
    Ok(clf)
}

/// Mann–Whitney AUC: `P(s+ > s-) + ½ P(s+ = s-)`.
pub fn auc_roc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(invalid("scores and labels differ in length"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(invalid("NaN score"));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(invalid("AUC needs both positive and negative labels"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Average ranks over tie groups.
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let avg_rank = (start + end + 1) as f64 / 2.0;
        rank_sum_pos += avg_rank * order[start..end].iter().filter(|&&i| labels[i]).count() as f64;
        start = end;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RankingConfig {
    pub negatives_per_node: usize,
    pub k_list: Vec<usize>,
}

impl Default for RankingConfig {
    fn default() -> Self {
        RankingConfig {
            negatives_per_node: 100,
            k_list: vec![50, 100],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub mrr: f64,
    /// `(k, Hits@k)`
    pub hits: Vec<(usize, f64)>,
    pub nodes: usize,
    /// Source nodes dropped for lack of positives or candidates.
    pub skipped: usize,
}

/// Per source node: `(scores of true edges, scores of candidate negatives)`.
/// The best-ranked true edge is placed after every negative with an equal
/// or higher score.
pub fn rank_metrics(per_node: &[(Vec<f64>, Vec<f64>)], k_list: &[usize]) -> Result<RankSummary> {
    let mut reciprocal = 0.0;
    let mut hits = vec![0usize; k_list.len()];
    let mut nodes = 0;
    let mut skipped = 0;
    for (pos, neg) in per_node {
        if pos.is_empty() || neg.is_empty() {
            skipped += 1;
            continue;
        }
        let best = pos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let rank = 1 + neg.iter().filter(|&&s| s >= best).count();
        nodes += 1;
        reciprocal += 1.0 / rank as f64;
        for (h, &k) in hits.iter_mut().zip(k_list) {
            *h += usize::from(rank <= k);
        }
    }
    if nodes == 0 {
        return Err(invalid("no node has both a true edge and candidate negatives"));
    }
    let n = nodes as f64;
    Ok(RankSummary {
        mrr: reciprocal / n,
        hits: k_list.iter().zip(hits).map(|(&k, h)| (k, h as f64 / n)).collect(),
        nodes,
        skipped,
    })
}

/// Ranks every test source's true neighbours against up to
/// `negatives_per_node` sampled non-neighbours in `full`. Both endpoints of
/// a test edge act as sources.
pub fn node_level_rank_metrics(
    x: &EmbeddingMatrix,
    clf: &EdgeClassifier,
    full: &Graph,
    test_pos: &[Edge],
    cfg: &RankingConfig,
    seed: u64,
) -> Result<RankSummary> {
    let mut targets: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for &(u, v) in test_pos {
        targets.entry(u).or_default().push(v);
        targets.entry(v).or_default().push(u);
    }
    let n = full.node_count() as NodeId;
    let sources: Vec<(NodeId, Vec<NodeId>)> = targets.into_iter().collect();
    let per_node: Vec<(Vec<f64>, Vec<f64>)> = sources
        .par_iter()
        .map(|(src, pos)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(*src as u64);
            let mut pool: Vec<NodeId> = (0..n).filter(|&v| v != *src && !full.has_edge(*src, v)).collect();
            let take = cfg.negatives_per_node.min(pool.len());
            let (chosen, _) = pool.partial_shuffle(&mut rng, take);
            let pos_scores = pos.iter().map(|&v| clf.score(x, (*src, v))).collect();
            let neg_scores = chosen.iter().map(|&v| clf.score(x, (*src, v))).collect();
            (pos_scores, neg_scores)
        })
        .collect();
    rank_metrics(&per_node, &cfg.k_list)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub dataset: String,
    pub variant: String,
    pub seed: u64,
    pub auc_roc: f64,
    pub mrr: f64,
    /// `(k, Hits@k)`
    pub hits: Vec<(usize, f64)>,
    pub ranked_nodes: usize,
    pub skipped_nodes: usize,
}

impl MetricReport {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Appends one row, writing the header first if the file is new.
    pub fn append_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let fresh = !path.exists();
        let mut w = BufWriter::new(fs::OpenOptions::new().create(true).append(true).open(path)?);
        if fresh {
            let hits: Vec<String> = self.hits.iter().map(|(k, _)| format!("hits@{k}")).collect();
            writeln!(w, "dataset,variant,seed,auc_roc,mrr,{}", hits.join(","))?;
        }
        let hits: Vec<String> = self.hits.iter().map(|(_, h)| h.to_string()).collect();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            self.dataset,
            self.variant,
            self.seed,
            self.auc_roc,
            self.mrr,
            hits.join(",")
        )?;
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub classifier: ClassifierConfig,
    pub ranking: RankingConfig,
}

/// Trains a classifier on the training edges (negatives redrawn each epoch
/// from non-edges of the training graph), then reports test AUC on the
/// balanced test set and node-level ranking metrics.
pub fn evaluate(
    x: &EmbeddingMatrix,
    split: &EdgeSplit,
    n: usize,
    cfg: &EvalConfig,
    seed: u64,
) -> Result<(EdgeClassifier, MetricReport)> {
    if split.test.is_empty() {
        return Err(invalid("empty test set"));
    }
    if split.test.len() != split.test_negative.len() {
        return Err(invalid("test positives and negatives must be balanced"));
    }
    if x.rows() != n {
        return Err(invalid(format!("{} embeddings for {n} nodes", x.rows())));
    }
    let train_graph = Graph::from_edges(n, split.train.iter().copied())?;
    let clf = train_classifier(x, &split.train, Negatives::Resample(&train_graph), &cfg.classifier, seed)?;
    let auc = test_auc(x, &clf, &split.test, &split.test_negative)?;
    let all: Vec<Edge> = split.train.iter().chain(&split.valid).chain(&split.test).copied().collect();
    let full = Graph::from_edges(n, all)?;
    let ranks = node_level_rank_metrics(x, &clf, &full, &split.test, &cfg.ranking, seed ^ 0x5eed)?;
    let report = MetricReport {
        dataset: String::new(),
        variant: String::new(),
        seed,
        auc_roc: auc,
        mrr: ranks.mrr,
        hits: ranks.hits,
        ranked_nodes: ranks.nodes,
        skipped_nodes: ranks.skipped,
    };
    Ok((clf, report))
}

/// AUC of the classifier on positive and negative edge lists.
pub fn test_auc(x: &EmbeddingMatrix, clf: &EdgeClassifier, pos: &[Edge], neg: &[Edge]) -> Result<f64> {
    let mut scores = clf.score_all(x, pos);
    scores.extend(clf.score_all(x, neg));
    let labels: Vec<bool> = (0..pos.len() + neg.len()).map(|i| i < pos.len()).collect();
    auc_roc(&scores, &labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::finite_difference_gradient;

    #[test]
    fn auc_edge_cases() {
        let labels = [true, true, false, false];
        assert_eq!(auc_roc(&[0.9, 0.8, 0.2, 0.1], &labels).unwrap(), 1.0);
        assert_eq!(auc_roc(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap(), 0.0);
        assert_eq!(auc_roc(&[0.5; 4], &labels).unwrap(), 0.5);
        assert!(auc_roc(&[0.1, 0.2], &[true, true]).is_err());
        assert!(auc_roc(&[0.1], &[true, false]).is_err());
    }

    #[test]
    fn auc_matches_pair_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let scores: Vec<f64> = (0..60).map(|_| (rng.random_range(0..10) as f64) / 10.0).collect();
        let labels: Vec<bool> = (0..60).map(|_| rng.random()).collect();
        let mut wins = 0.0;
        let mut total = 0.0;
        for i in 0..60 {
            for j in 0..60 {
                if labels[i] && !labels[j] {
                    total += 1.0;
                    wins += if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        assert!((auc_roc(&scores, &labels).unwrap() - wins / total).abs() < 1e-12);
    }

    #[test]
    fn rank_examples() {
        let first = vec![(vec![0.9], vec![0.1, 0.2, 0.3]); 4];
        let r = rank_metrics(&first, &[1, 2]).unwrap();
        assert_eq!(r.mrr, 1.0);
        assert_eq!(r.hits, vec![(1, 1.0), (2, 1.0)]);
        let third = vec![(vec![0.5], vec![0.9, 0.7, 0.1]); 3];
        let r = rank_metrics(&third, &[2, 3]).unwrap();
        assert!((r.mrr - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.hits, vec![(2, 0.0), (3, 1.0)]);
    }

    #[test]
    fn ties_are_pessimistic() {
        let r = rank_metrics(&[(vec![0.5], vec![0.5, 0.5, 0.1])], &[1]).unwrap();
        assert!((r.mrr - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn best_true_edge_counts_and_empty_nodes_skipped() {
        let r = rank_metrics(&[(vec![0.1, 0.95], vec![0.9, 0.2]), (vec![], vec![0.3])], &[1]).unwrap();
        assert_eq!(r.mrr, 1.0);
        assert_eq!((r.nodes, r.skipped), (1, 1));
    }

    #[test]
    fn random_scores_mrr_oracle() {
        // One true edge among 99 negatives, uniformly random order:
        // E[1/rank] = H_100 / 100, Var from E[1/rank^2] = (sum 1/r^2) / 100.
        let h1: f64 = (1..=100).map(|r| 1.0 / r as f64).sum::<f64>() / 100.0;
        let h2: f64 = (1..=100).map(|r| 1.0 / (r * r) as f64).sum::<f64>() / 100.0;
        let nodes = 200;
        let se = ((h2 - h1 * h1) / nodes as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let per_node: Vec<_> = (0..nodes)
            .map(|_| (vec![rng.random::<f64>()], (0..99).map(|_| rng.random::<f64>()).collect()))
            .collect();
        let r = rank_metrics(&per_node, &[10]).unwrap();
        assert!((h1 - 0.0519).abs() < 1e-3);
        assert!((r.mrr - h1).abs() < 3.0 * se, "{} vs {h1} ± {se}", r.mrr);
    }

    fn toy_separable() -> (EmbeddingMatrix, Vec<Edge>, Vec<Edge>) {
        // Two groups with opposite sign patterns; edges only inside groups.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let s = if i < 20 { 1.0 } else { -1.0 };
                vec![s + 0.1 * rng.random::<f64>(), s + 0.1 * rng.random::<f64>()]
            })
            .collect();
        let x = EmbeddingMatrix::from_rows(&rows).unwrap();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for u in 0..40u32 {
            for v in u + 1..40 {
                if (u < 20) == (v < 20) {
                    pos.push((u, v));
                } else {
                    neg.push((u, v));
                }
            }
        }
        pos.shuffle(&mut rng);
        neg.shuffle(&mut rng);
        pos.truncate(150);
        neg.truncate(150);
        (x, pos, neg)
    }

    #[test]
    fn separable_toy_is_learned() {
        let (x, pos, neg) = toy_separable();
        let cfg = ClassifierConfig {
            hidden: 16,
            epochs: 60,
            eta: 0.01,
            batch_size: 32,
        };
        let clf = train_classifier(&x, &pos, Negatives::Fixed(&neg), &cfg, 4).unwrap();
        let correct = pos.iter().filter(|&&e| clf.score(&x, e) > 0.5).count()
            + neg.iter().filter(|&&e| clf.score(&x, e) <= 0.5).count();
        let acc = correct as f64 / (pos.len() + neg.len()) as f64;
        assert!(acc > 0.95, "accuracy {acc}");
        let again = train_classifier(&x, &pos, Negatives::Fixed(&neg), &cfg, 4).unwrap();
        assert_eq!(clf, again);
    }

    #[test]
    fn classifier_rejects_bad_inputs() {
        let (x, pos, neg) = toy_separable();
        let cfg = ClassifierConfig::default();
        assert!(train_classifier(&x, &pos, Negatives::Fixed(&neg[..10]), &cfg, 0).is_err());
        let empty = EmbeddingMatrix::zeros(40, 0);
        assert!(train_classifier(&empty, &pos, Negatives::Fixed(&neg), &cfg, 0).is_err());
    }

    #[test]
    fn backprop_matches_finite_differences() {
        let (x, pos, neg) = toy_separable();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let clf = EdgeClassifier::new(2, 5, &mut rng);
        let batch: Vec<(Edge, f64)> = pos[..5].iter().map(|&e| (e, 1.0)).chain(neg[..5].iter().map(|&e| (e, 0.0))).collect();
        let (_, grad) = clf.batch_gradient(&x, &batch);
        let as_matrix = EmbeddingMatrix::from_vec(1, clf.params.len(), clf.params.clone()).unwrap();
        let fd = finite_difference_gradient(&as_matrix, 1e-6, |p| {
            let probe = EdgeClassifier {
                params: p.as_slice().to_vec(),
                ..clf.clone()
            };
            probe.batch_gradient(&x, &batch).0
        });
        for (a, b) in grad.iter().zip(fd.as_slice()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn scores_are_symmetric_probabilities() {
        let (x, pos, _) = toy_separable();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let clf = EdgeClassifier::new(2, 8, &mut rng);
        for &(u, v) in &pos[..10] {
            let s = clf.score(&x, (u, v));
            assert!(s > 0.0 && s < 1.0);
            assert_eq!(s, clf.score(&x, (v, u)));
        }
    }
}
