use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::embedding::{constriction, init_embeddings, EmbeddingMatrix};
use super::sampler::{degree_power_weights, NegativeSampler};
use super::updates::{dimreg_update, positive_gradient, sgns_gradient, GradBuffer, RegularizerWeights, SgnsWeight};
use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::objective::positive_loss;
use crate::walks::PairSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Repulsion {
    /// Negative sampling: `k` draws from `P_alpha` per positive pair.
    Sgns,
    /// Attraction only.
    None,
    /// Dimension-mean regularisation every `n_negative` batches.
    Dimreg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightVectorMode {
    Uniform,
    /// `p` proportional to `degree^alpha`.
    DegreeAlpha,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub dim: usize,
    pub eta: f64,
    pub lambda: f64,
    /// Batches between regularisation steps.
    pub n_negative: usize,
    /// Negatives per positive pair.
    pub k: usize,
    pub alpha: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub repulsion: Repulsion,
    pub init_scale: f64,
    pub optimizer: Optimizer,
    pub weight_vector: WeightVectorMode,
    pub sgns_weight: SgnsWeight,
    /// Upper bound on epochs when `repulsion = none`; `None` disables it.
    pub none_epoch_cap: Option<usize>,
    pub track_constriction: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 128,
            eta: 0.01,
            lambda: 1.0,
            n_negative: 10,
            k: 1,
            alpha: 0.0,
            batch_size: 1024,
            epochs: 10,
            repulsion: Repulsion::Dimreg,
            init_scale: 1e-2,
            optimizer: Optimizer::Adam,
            weight_vector: WeightVectorMode::Uniform,
            sgns_weight: SgnsWeight::Gradient,
            none_epoch_cap: Some(2),
            track_constriction: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(invalid("dim must be at least 1"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(invalid(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid(format!("lambda must be non-negative, got {}", self.lambda)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        if self.n_negative == 0 || self.batch_size == 0 || self.epochs == 0 {
            return Err(invalid("n_negative, batch_size and epochs must be positive"));
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(invalid(format!("init_scale must be positive, got {}", self.init_scale)));
        }
        if self.repulsion == Repulsion::Sgns && self.k == 0 {
            return Err(invalid("negative sampling needs k >= 1"));
        }
        Ok(())
    }

    /// Epoch count after applying the attraction-only cap.
    pub fn effective_epochs(&self) -> usize {
        match (self.repulsion, self.none_epoch_cap) {
            (Repulsion::None, Some(cap)) => self.epochs.min(cap),
            _ => self.epochs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 0 is the initial state.
    pub epoch: usize,
    /// Mean of `-log σ(<X_i, X_j>)` over all positive pairs.
    pub positive_loss: f64,
    pub constriction: Option<f64>,
    /// Cumulative optimisation time, excluding trace bookkeeping.
    pub wall_clock_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub records: Vec<EpochRecord>,
    pub batches: usize,
    pub regularization_steps: usize,
}

impl TrainingTrace {
    pub fn train_time_ms(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.wall_clock_ms)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "epoch,positive_loss,constriction,wall_clock_ms")?;
        for r in &self.records {
            let c = r.constriction.map(|c| c.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{:.3}", r.epoch, r.positive_loss, c, r.wall_clock_ms)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Named RNG substreams derived from a single seed.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum Stream {
    Init = 1,
    Shuffle = 2,
    Sampler = 3,
    Walks = 4,
    Split = 5,
    Classifier = 6,
    Ranking = 7,
}

pub fn substream(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Derived integer seed for APIs that take a `u64` rather than an RNG.
pub fn subseed(seed: u64, stream: Stream) -> u64 {
    use rand::RngCore;
    substream(seed, stream).next_u64()
}

/// Trains from a fresh Gaussian initialisation.
pub fn train(g: &Graph, pairs: &PairSet, cfg: &TrainConfig, seed: u64) -> Result<(EmbeddingMatrix, TrainingTrace)> {
    cfg.validate()?;
    let x0 = init_embeddings(g.node_count(), cfg.dim, cfg.init_scale, subseed(seed, Stream::Init))?;
    train_from(g, pairs, cfg, x0, seed)
}

/// Trains starting from `x`. Each batch takes one optimiser step on the
/// attraction gradient (plus the sampled repulsion in `sgns` mode); in
/// `dimreg` mode every `n_negative`-th batch is followed by a standalone
/// regularisation step on the whole matrix.
pub fn train_from(
    g: &Graph,
    pairs: &PairSet,
    cfg: &TrainConfig,
    mut x: EmbeddingMatrix,
    seed: u64,
) -> Result<(EmbeddingMatrix, TrainingTrace)> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(invalid("no positive pairs to train on"));
    }
    let n = g.node_count();
    if pairs.node_count() != n || x.rows() != n {
        return Err(invalid("graph, pairs and embeddings disagree on node count"));
    }
    let epochs = cfg.effective_epochs();
    if epochs < cfg.epochs {
        log::warn!("attraction-only training capped at {epochs} epochs");
    }

    let degrees = g.degrees();
    let sampler = match cfg.repulsion {
        Repulsion::Sgns => Some(NegativeSampler::new(&degrees, cfg.alpha)?),
        _ => None,
    };
    let reg_weights = match cfg.weight_vector {
        WeightVectorMode::Uniform => RegularizerWeights::Uniform,
        WeightVectorMode::DegreeAlpha => RegularizerWeights::weighted(degree_power_weights(&degrees, cfg.alpha)?)?,
    };
    let mut shuffle_rng = substream(seed, Stream::Shuffle);
    let mut sampler_rng = substream(seed, Stream::Sampler);
    let mut adam = match cfg.optimizer {
        Optimizer::Adam => Some(AdamState::new(n * x.dim())),
        Optimizer::Sgd => None,
    };

    let mut grad = GradBuffer::for_matrix(&x);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut batch = Vec::with_capacity(cfg.batch_size);
    let mut trace = TrainingTrace::default();
    let mut elapsed_ms = 0.0;
    trace.records.push(epoch_record(0, &x, pairs, cfg, elapsed_ms));

    for epoch in 1..=epochs {
        let started = Instant::now();
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&p| pairs.pairs()[p]));

            grad.clear();
            positive_gradient(&x, &batch, &mut grad);
            if let Some(sampler) = &sampler {
                sgns_gradient(&x, &batch, sampler, cfg.k, cfg.sgns_weight, &mut sampler_rng, &mut grad);
            }
            let finite = match &mut adam {
                None => {
                    grad.apply_sgd(&mut x, cfg.eta);
                    grad.touched_rows_finite(&x)
                }
                Some(state) => {
                    state.step(x.as_mut_slice(), grad.as_slice(), cfg.eta);
                    x.is_finite()
                }
            };
            trace.batches += 1;
            if !finite {
                return Err(Error::NonFinite { batch: trace.batches });
            }
            if cfg.repulsion == Repulsion::Dimreg && trace.batches % cfg.n_negative == 0 {
                dimreg_update(&mut x, cfg.lambda, &reg_weights)?;
                trace.regularization_steps += 1;
                if !x.is_finite() {
                    return Err(Error::NonFinite { batch: trace.batches });
                }
            }
        }
        elapsed_ms += started.elapsed().as_secs_f64() * 1e3;
        trace.records.push(epoch_record(epoch, &x, pairs, cfg, elapsed_ms));
    }
    Ok((x, trace))
}

fn epoch_record(epoch: usize, x: &EmbeddingMatrix, pairs: &PairSet, cfg: &TrainConfig, elapsed_ms: f64) -> EpochRecord {
    EpochRecord {
        epoch,
        positive_loss: positive_loss(x, pairs.pairs()) / pairs.len() as f64,
        constriction: cfg.track_constriction.then(|| constriction(x)),
        wall_clock_ms: elapsed_ms,
    }
}
