//! Named end-to-end checks with fixed pass thresholds. Each returns a
//! [`CheckOutcome`] plus whatever traces it produced.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{generate_erdos_renyi, generate_sbm, Graph, SplitRatios};
use crate::linkpred::{ClassifierConfig, EvalConfig};
use crate::pipeline::{run_experiment, sweep, Experiment, Method, SweepGrid, SweepStage, Variant};
use crate::theory::{
    check_frobenius_identity, collapse_experiment, gradient_check, lemma1_grid, prop3_sweep, prop4_passed,
    prop4_sweep, random_instance, random_matrix, sgns_expectation_check, summarize_prop3, taylor_surrogate_check,
    Certification, CollapseConfig, CollapseTrace, GradientReport, Prop3Config, Prop4Config,
};
use crate::trainer::{dimreg_update, init_embeddings, train as train_embeddings, RegularizerWeights, Repulsion, TrainConfig};
use crate::walks::{pairs_from_edges, WalkConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String, start: Instant) -> CheckOutcome {
        CheckOutcome {
            name: name.to_string(),
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

/// `||X X^T||_F^2 = ||X^T X||_F^2` to `1e-9` relative on `count` random
/// matrices with `n <= 50`, `d <= 16`.
pub fn frobenius(count: usize, seed: u64) -> CheckOutcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let n = rng.random_range(1..=50);
        let d = rng.random_range(1..=16);
        let x = random_matrix(n, d, &mut rng);
        worst = worst.max(check_frobenius_identity(&x).relative_diff());
    }
    CheckOutcome::new(
        "frobenius",
        worst <= 1e-9,
        format!("{count} matrices, max relative diff {worst:.3e}"),
        start,
    )
}

/// Analytic gradients against central differences, relative error `< 1e-4`.
pub fn gradients(count: usize, seed: u64) -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..count as u64 {
        let (x, pairs) = random_instance(10, 4, seed.wrapping_add(i))?;
        worst = worst.max(gradient_check(&x, &pairs, 1e-5)?.max_error());
    }
    Ok(CheckOutcome::new(
        "gradients",
        worst < 1e-4,
        format!("{count} instances, max relative error {worst:.3e}"),
        start,
    ))
}

/// Every trace certified; the sparsest graph also dips first.
pub fn collapse(cfg: &CollapseConfig) -> Result<(CheckOutcome, Vec<CollapseTrace>)> {
    let start = Instant::now();
    let traces = collapse_experiment(cfg)?;
    let certified = traces
        .iter()
        .all(|t| matches!(t.certification, Certification::Certified { .. }));
    let sparsest = traces.iter().min_by(|a, b| a.p.total_cmp(&b.p));
    let dip = sparsest.is_some_and(|t| t.initial_dip);
    let detail = traces
        .iter()
        .map(|t| {
            let cert = match t.certification {
                Certification::Certified { t0 } => format!("t0={t0}"),
                Certification::Inconclusive => "inconclusive".to_string(),
            };
            format!("p={} {cert} dip={}", t.p, t.initial_dip)
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok((CheckOutcome::new("collapse", certified && dip, detail, start), traces))
}

pub fn prop3(cfg: &Prop3Config) -> Result<(CheckOutcome, Vec<GradientReport>)> {
    let start = Instant::now();
    let reports = prop3_sweep(cfg)?;
    let summary = summarize_prop3(&reports, cfg);
    let medians = summary
        .medians
        .iter()
        .map(|(n, m)| format!("n={n}: {m:.3e}"))
        .collect::<Vec<_>>()
        .join(", ");
    let detail = format!(
        "within bound: {}, medians decreasing: {} ({medians})",
        summary.all_within_bound, summary.median_decreasing
    );
    Ok((CheckOutcome::new("prop3", summary.passed(), detail, start), reports))
}

pub fn prop4(cfg: &Prop4Config) -> Result<(CheckOutcome, Vec<GradientReport>)> {
    let start = Instant::now();
    let reports = prop4_sweep(cfg)?;
    let detail = reports
        .iter()
        .map(|r| format!("C={:.2}: {:.3e} <= {:.3e}", r.constriction, r.diff_prop4, r.bound_prop4))
        .collect::<Vec<_>>()
        .join("; ");
    Ok((CheckOutcome::new("prop4", prop4_passed(&reports), detail, start), reports))
}

/// Both tail inequalities on `points` grid points of `[0, 40]`.
pub fn lemma1(points: usize) -> CheckOutcome {
    let start = Instant::now();
    let r = lemma1_grid(points, 0.0, 40.0);
    let detail = format!(
        "{} points, violations {}/{}, max ratios {:.4}/{:.4}",
        r.points, r.softplus_violations, r.sigmoid_violations, r.max_softplus_ratio, r.max_sigmoid_ratio
    );
    CheckOutcome::new("lemma1", r.passed(), detail, start)
}

/// Mean of `draws` uniform negative-sampling gradients over all ordered
/// edges of a 10-node graph against `k/n` times the exact repulsion, every
/// entry within 3 standard errors.
pub fn sgns(draws: usize, seed: u64) -> Result<CheckOutcome> {
    let start = Instant::now();
    let g = generate_erdos_renyi(10, 0.4, seed)?;
    let x = init_embeddings(10, 4, 0.5, seed)?;
    let batch = pairs_from_edges(&g);
    let r = sgns_expectation_check(&x, batch.pairs(), 5, draws, seed)?;
    let detail = format!(
        "{} draws, {} pairs, max |z| {:.3}, exact mismatches {}",
        r.draws,
        batch.len(),
        r.max_z,
        r.exact_mismatches
    );
    Ok(CheckOutcome::new("sgns", r.within(3.0), detail, start))
}

/// One uniform regularisation step with `lambda = 1` leaves every column
/// mean within `1e-12` of zero.
pub fn centering(count: usize, seed: u64) -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let n = rng.random_range(2..=60);
        let d = rng.random_range(1..=16);
        let mut x = random_matrix(n, d, &mut rng);
        dimreg_update(&mut x, 1.0, &RegularizerWeights::Uniform)?;
        worst = x.column_means().iter().fold(worst, |m, v| m.max(v.abs()));
    }
    Ok(CheckOutcome::new(
        "centering",
        worst <= 1e-12,
        format!("{count} matrices, max |column mean| {worst:.3e}"),
        start,
    ))
}

/// Attraction step versus the linearised surrogate: the gap vanishes at the
/// origin and shrinks by `10^7` per decade of scale.
pub fn taylor(seed: u64) -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = random_matrix(12, 4, &mut rng);
    let g = generate_erdos_renyi(12, 0.3, seed)?;
    let pairs = pairs_from_edges(&g);
    let eta = 0.1;
    let at = |scale: f64| {
        let mut x = base.clone();
        x.as_mut_slice().iter_mut().for_each(|v| *v *= scale);
        taylor_surrogate_check(&x, pairs.pairs(), eta)
    };
    let origin = at(0.0)?;
    let (a, b) = (at(1e-1)?, at(1e-2)?);
    let slope = (a.max_deviation / b.max_deviation).log10();
    let passed = origin.max_deviation == 0.0 && (slope - 7.0).abs() < 0.2;
    let detail = format!(
        "deviation {:.3e} at scale 0.1, {:.3e} at 0.01, log10 ratio {slope:.3}",
        a.max_deviation, b.max_deviation
    );
    Ok(CheckOutcome::new("taylor", passed, detail, start))
}

/// Two-block SBM link prediction across a descending within/between ratio.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SbmStudyConfig {
    pub n: usize,
    pub p_between: f64,
    /// Within/between ratios, highest first.
    pub ratios: Vec<f64>,
    pub seeds: Vec<u64>,
    pub train: TrainConfig,
    pub classifier: ClassifierConfig,
    pub grid: SweepGrid,
}

impl Default for SbmStudyConfig {
    fn default() -> Self {
        SbmStudyConfig {
            n: 200,
            p_between: 0.02,
            ratios: vec![40.0, 20.0, 10.0, 5.0],
            seeds: (100..105).collect(),
            train: TrainConfig {
                dim: 16,
                epochs: 50,
                batch_size: 128,
                ..TrainConfig::default()
            },
            classifier: ClassifierConfig {
                epochs: 20,
                ..ClassifierConfig::default()
            },
            grid: SweepGrid::default(),
        }
    }
}

/// Test AUC per variant, averaged over seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SbmPoint {
    pub ratio: f64,
    pub auc_i: f64,
    pub auc_ii0: f64,
    pub auc_ii: f64,
}

/// LINE tuned per graph: learning rate on `I` by validation AUC, then
/// `n_negative x lambda` on `II`. `II0` reuses the tuned learning rate.
pub fn sbm_study(cfg: &SbmStudyConfig) -> Result<Vec<SbmPoint>> {
    let base = Experiment {
        method: Method::Line,
        variant: Variant::I,
        train: cfg.train.clone(),
        walks: WalkConfig::default(),
        split: SplitRatios::default(),
        eval: EvalConfig {
            classifier: cfg.classifier.clone(),
            ..EvalConfig::default()
        },
    };
    let mut points = Vec::new();
    for &ratio in &cfg.ratios {
        let mut sums = [0.0; 3];
        for &seed in &cfg.seeds {
            let g = generate_sbm(cfg.n, 2, ratio * cfg.p_between, cfg.p_between, seed)?;
            let v = tuned_variants(&g, &base, &cfg.grid, seed)?;
            sums[0] += v.auc_i;
            sums[1] += v.auc_ii0;
            sums[2] += v.auc_ii;
            log::info!("sbm ratio {ratio} seed {seed} done");
        }
        let k = cfg.seeds.len() as f64;
        points.push(SbmPoint {
            ratio,
            auc_i: sums[0] / k,
            auc_ii0: sums[1] / k,
            auc_ii: sums[2] / k,
        });
    }
    Ok(points)
}

/// All variants above 0.9 at the highest ratio; at the lowest, `II` at least
/// matches `II0` and stays within 0.02 of `I`.
pub fn sbm(cfg: &SbmStudyConfig) -> Result<(CheckOutcome, Vec<SbmPoint>)> {
    let start = Instant::now();
    let points = sbm_study(cfg)?;
    let (hi, lo) = (points.first(), points.last());
    let passed = match (hi, lo) {
        (Some(h), Some(l)) => {
            h.auc_i > 0.9
                && h.auc_ii0 > 0.9
                && h.auc_ii > 0.9
                && l.auc_ii >= l.auc_ii0
                && l.auc_ii >= l.auc_i - 0.02
        }
        _ => false,
    };
    let detail = points
        .iter()
        .map(|p| format!("r={}: I {:.4} II0 {:.4} II {:.4}", p.ratio, p.auc_i, p.auc_ii0, p.auc_ii))
        .collect::<Vec<_>>()
        .join("; ");
    Ok((CheckOutcome::new("sbm", passed, detail, start), points))
}

/// Tuned test AUC of the three variants on one graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariantAuc {
    pub auc_i: f64,
    pub auc_ii0: f64,
    pub auc_ii: f64,
}

/// Staged search on `g` starting from `base`; `II0` reuses the tuned
/// learning rate and walk bias. Scores are test AUCs of the winners.
pub fn tuned_variants(g: &Graph, base: &Experiment, grid: &SweepGrid, seed: u64) -> Result<VariantAuc> {
    let (records, winners) = sweep(g, base, grid, seed, |_| None, |_, _| Ok(()))?;
    let best_test = |stage: SweepStage| {
        records
            .iter()
            .filter(|r| r.stage == stage && !r.valid_auc.is_nan())
            .max_by(|a, b| a.valid_auc.total_cmp(&b.valid_auc))
            .map(|r| r.test_auc)
            .unwrap_or(f64::NAN)
    };
    let vanilla_stage = if base.method == Method::Node2vec && !grid.p.is_empty() && !grid.q.is_empty() {
        SweepStage::WalkBias
    } else {
        SweepStage::LearningRate
    };
    let vanilla = &winners[winners.len() - 2].1;
    let ii0 = Experiment {
        variant: Variant::II0,
        ..vanilla.clone()
    };
    Ok(VariantAuc {
        auc_i: best_test(vanilla_stage),
        auc_ii0: run_experiment(g, &ii0, seed)?.test.auc_roc,
        auc_ii: best_test(SweepStage::Augmentation),
    })
}

/// Training wall-clock of `I` (with `k = 1`) and `II` under identical
/// epochs and batch size, in milliseconds.
pub fn training_times(g: &Graph, train: &TrainConfig, seed: u64) -> Result<(f64, f64)> {
    let pairs = pairs_from_edges(g);
    let time = |repulsion: Repulsion| -> Result<f64> {
        let cfg = TrainConfig {
            repulsion,
            k: 1,
            ..train.clone()
        };
        Ok(train_embeddings(g, &pairs, &cfg, seed)?.1.train_time_ms())
    };
    Ok((time(Repulsion::Sgns)?, time(Repulsion::Dimreg)?))
}
