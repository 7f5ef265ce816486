//! Dense numerical checks of the collapse and regularisation results on
//! small instances.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{generate_erdos_renyi, Edge, Graph};
use crate::math::{dot, sigmoid};
use crate::objective::{
    all_to_all_gradient, all_to_all_loss, dim_mean_gradient, dim_mean_penalty, finite_difference_gradient,
    kernel_product, negative_loss, negative_loss_gradient, positive_loss, positive_loss_gradient, relative_error,
    Support, DENSE_LIMIT,
};
use crate::trainer::{
    constriction, init_embeddings, positive_update, sgns_gradient, EmbeddingMatrix, GradBuffer, NegativeSampler,
    SgnsWeight,
};
use crate::walks::pairs_from_edges;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrobeniusCheck {
    /// `||X X^T||_F^2`
    pub lhs: f64,
    /// `||X^T X||_F^2`
    pub rhs: f64,
    pub abs_diff: f64,
}

impl FrobeniusCheck {
    pub fn relative_diff(&self) -> f64 {
        if self.abs_diff == 0.0 {
            0.0
        } else {
            self.abs_diff / self.lhs.abs().max(self.rhs.abs())
        }
    }
}

/// Compares the `n x n` and `d x d` Gram matrices' squared Frobenius norms.
pub fn check_frobenius_identity(x: &EmbeddingMatrix) -> FrobeniusCheck {
    let lhs: f64 = x.gram().iter().map(|v| v * v).sum();
    let d = x.dim();
    let mut cov = vec![0.0; d * d];
    for i in 0..x.rows() {
        let r = x.row(i);
        for a in 0..d {
            for b in 0..d {
                cov[a * d + b] += r[a] * r[b];
            }
        }
    }
    let rhs: f64 = cov.iter().map(|v| v * v).sum();
    FrobeniusCheck {
        lhs,
        rhs,
        abs_diff: (lhs - rhs).abs(),
    }
}

#[derive(Debug, Clone)]
pub struct ExactGradients {
    pub positive: EmbeddingMatrix,
    pub negative: EmbeddingMatrix,
    pub all_to_all: EmbeddingMatrix,
    pub regularizer: EmbeddingMatrix,
}

/// `∇P_SG`, `∇N_SG = 2(1_{S=0} ⊙ K)X`, `∇N'_SG = 2KX` and `∇R = 2·1X`.
pub fn exact_gradients(x: &EmbeddingMatrix, pairs: &[Edge]) -> Result<ExactGradients> {
    let s = Support::from_pairs(x.rows(), pairs)?;
    Ok(ExactGradients {
        positive: positive_loss_gradient(x, pairs),
        negative: negative_loss_gradient(x, &s),
        all_to_all: all_to_all_gradient(x),
        regularizer: dim_mean_gradient(x),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientCheck {
    pub n: usize,
    pub d: usize,
    pub positive: f64,
    pub negative: f64,
    pub all_to_all: f64,
    pub regularizer: f64,
}

impl GradientCheck {
    pub fn max_error(&self) -> f64 {
        self.positive.max(self.negative).max(self.all_to_all).max(self.regularizer)
    }
}

/// Random instance with `n` in `3..=max_n`, `d` in `1..=max_d`, Gaussian
/// `X` and a random symmetric pair set.
pub fn random_instance(max_n: usize, max_d: usize, seed: u64) -> Result<(EmbeddingMatrix, Vec<Edge>)> {
    if max_n < 3 || max_d == 0 {
        return Err(invalid("instance needs max_n >= 3 and max_d >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..=max_n);
    let d = rng.random_range(1..=max_d);
    let x = init_embeddings(n, d, 0.8, rng.random())?;
    let mut pairs = Vec::new();
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            if rng.random::<f64>() < 0.35 {
                pairs.push((i, j));
                pairs.push((j, i));
            }
        }
    }
    if pairs.is_empty() {
        pairs.extend([(0, 1), (1, 0)]);
    }
    Ok((x, pairs))
}

/// Relative Frobenius error between each analytic gradient and its central
/// finite-difference estimate.
pub fn gradient_check(x: &EmbeddingMatrix, pairs: &[Edge], h: f64) -> Result<GradientCheck> {
    let s = Support::from_pairs(x.rows(), pairs)?;
    let g = exact_gradients(x, pairs)?;
    let floor = 1e-8;
    Ok(GradientCheck {
        n: x.rows(),
        d: x.dim(),
        positive: relative_error(
            &g.positive,
            &finite_difference_gradient(x, h, |y| positive_loss(y, pairs)),
            floor,
        ),
        negative: relative_error(
            &g.negative,
            &finite_difference_gradient(x, h, |y| negative_loss(y, &s)),
            floor,
        ),
        all_to_all: relative_error(&g.all_to_all, &finite_difference_gradient(x, h, all_to_all_loss), floor),
        regularizer: relative_error(&g.regularizer, &finite_difference_gradient(x, h, dim_mean_penalty), floor),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientReport {
    pub n: usize,
    pub d: usize,
    /// Non-zeros of `S`.
    pub m: usize,
    pub sparsity: f64,
    pub constriction: f64,
    pub norm_negative: f64,
    pub norm_all_to_all: f64,
    pub norm_regularizer: f64,
    /// `||∇N' - ∇N||_F^2 / ||∇N||_F^2`
    pub ratio_prop3: f64,
    /// `(β_max^3 / C^4) · m / (n^2 - m)`; infinite when `C <= 0`.
    pub bound_prop3: f64,
    /// `||½∇N' - 1X||_F^2 = ||(K - 1)X||_F^2`
    pub diff_prop4: f64,
    /// `(n e^{-C})^2 β_max`
    pub bound_prop4: f64,
    /// Largest squared row norm.
    pub beta_max: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub seed: u64,
}

/// Evaluates every quantity of [`GradientReport`] on a dense instance.
pub fn gradient_report(x: &EmbeddingMatrix, s: &Support, seed: u64) -> Result<GradientReport> {
    let n = x.rows();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { n, limit: DENSE_LIMIT });
    }
    if s.node_count() != n {
        return Err(invalid("support and embeddings disagree on node count"));
    }
    let grad_n = negative_loss_gradient(x, s);
    let grad_np = all_to_all_gradient(x);
    let grad_r = dim_mean_gradient(x);
    let sq = |a: &EmbeddingMatrix, b: &EmbeddingMatrix| -> f64 {
        a.as_slice().iter().zip(b.as_slice()).map(|(u, v)| (u - v) * (u - v)).sum()
    };
    let norm_n_sq = grad_n.frobenius_squared();
    let ratio_prop3 = sq(&grad_np, &grad_n) / norm_n_sq;
    // Proof convention: compare ½∇N' with 1X, i.e. ½ of the true ∇R.
    // σ(z) - 1 = -σ(-z)
    let residual = kernel_product(x, 1.0, |_, _, z| -sigmoid(-z));
    let diff_prop4 = residual.frobenius_squared();

    let gram = x.gram();
    let c = gram.iter().copied().fold(f64::INFINITY, f64::min);
    let k_min = sigmoid(c);
    let k_max = sigmoid(gram.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let beta_max = x.row_norms_squared().into_iter().fold(0.0, f64::max);
    let m = s.nnz();
    let nn = (n * n) as f64;
    let bound_prop3 = if c > 0.0 && m < n * n {
        beta_max.powi(3) / c.powi(4) * m as f64 / (nn - m as f64)
    } else {
        f64::INFINITY
    };
    Ok(GradientReport {
        n,
        d: x.dim(),
        m,
        sparsity: m as f64 / nn,
        constriction: c,
        norm_negative: norm_n_sq.sqrt(),
        norm_all_to_all: grad_np.frobenius_squared().sqrt(),
        norm_regularizer: grad_r.frobenius_squared().sqrt(),
        ratio_prop3,
        bound_prop3,
        diff_prop4,
        bound_prop4: (n as f64 * (-c).exp()).powi(2) * beta_max,
        beta_max,
        k_min,
        k_max,
        seed,
    })
}

/// Gaussian noise rows `E_i ~ N(0, noise^2 / d)` used as the base for
/// [`constricted_embeddings`].
pub fn noise_matrix(n: usize, d: usize, noise: f64, seed: u64) -> Result<EmbeddingMatrix> {
    if d == 0 || noise.is_nan() || noise <= 0.0 {
        return Err(invalid("noise matrix needs d >= 1 and positive noise"));
    }
    init_embeddings(n, d, noise / (d as f64).sqrt(), seed)
}

/// `X_i = a e_1 + E_i` with `a` found by bisection so that the constriction
/// lands just at or above `target`.
pub fn constricted_embeddings(base: &EmbeddingMatrix, target: f64) -> Result<EmbeddingMatrix> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(invalid(format!("target constriction must be positive, got {target}")));
    }
    let shifted = |a: f64| {
        let mut x = base.clone();
        for i in 0..x.rows() {
            x.row_mut(i)[0] += a;
        }
        x
    };
    let mut lo = 0.0;
    if constriction(&shifted(lo)) >= target {
        return Err(invalid("base matrix already exceeds the target constriction"));
    }
    let mut hi = 1.0;
    while constriction(&shifted(hi)) < target {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(invalid("could not reach target constriction"));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if constriction(&shifted(mid)) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(shifted(hi))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prop3Config {
    pub avg_degree: f64,
    pub n_list: Vec<usize>,
    pub c_floor: f64,
    pub dim: usize,
    pub noise: f64,
    pub seeds: Vec<u64>,
}

impl Default for Prop3Config {
    fn default() -> Self {
        Prop3Config {
            avg_degree: 10.0,
            n_list: vec![100, 200, 400, 800],
            c_floor: 0.5,
            dim: 8,
            noise: 1.0,
            seeds: (0..5).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop3Summary {
    pub all_within_bound: bool,
    pub medians: Vec<(usize, f64)>,
    pub median_decreasing: bool,
    /// Fraction of seeds with `ratio(n_max) < ratio(n_min)`.
    pub shrink_fraction: f64,
}

impl Prop3Summary {
    pub fn passed(&self) -> bool {
        self.all_within_bound && self.median_decreasing
    }
}

/// Sparse Erdős–Rényi graphs of fixed average degree with embeddings of
/// constriction at least `c_floor`.
pub fn prop3_sweep(cfg: &Prop3Config) -> Result<Vec<GradientReport>> {
    let mut out = Vec::new();
    for &n in &cfg.n_list {
        if n < 2 {
            return Err(invalid("prop3 sweep needs n >= 2"));
        }
        let p = (cfg.avg_degree / (n - 1) as f64).min(1.0);
        for &seed in &cfg.seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(n as u64);
            let g = generate_erdos_renyi(n, p, rng.random())?;
            let s = Support::from_pairs(n, pairs_from_edges(&g).pairs())?;
            let x = loop {
                let base = noise_matrix(n, cfg.dim, cfg.noise, rng.random())?;
                match constricted_embeddings(&base, cfg.c_floor) {
                    Ok(x) if constriction(&x) >= cfg.c_floor => break x,
                    _ => continue,
                }
            };
            out.push(gradient_report(&x, &s, seed)?);
        }
    }
    Ok(out)
}

pub fn summarize_prop3(reports: &[GradientReport], cfg: &Prop3Config) -> Prop3Summary {
    let mut medians = Vec::new();
    for &n in &cfg.n_list {
        let mut r: Vec<f64> = reports.iter().filter(|g| g.n == n).map(|g| g.ratio_prop3).collect();
        r.sort_by(f64::total_cmp);
        medians.push((n, median(&r)));
    }
    let median_decreasing = medians.windows(2).all(|w| w[1].1 < w[0].1);
    let (first, last) = (cfg.n_list.first().copied(), cfg.n_list.last().copied());
    let by_seed = |n: Option<usize>, seed: u64| {
        reports.iter().find(|g| Some(g.n) == n && g.seed == seed).map(|g| g.ratio_prop3)
    };
    let shrinking = cfg
        .seeds
        .iter()
        .filter(|&&s| matches!((by_seed(first, s), by_seed(last, s)), (Some(a), Some(b)) if b < a))
        .count();
    Prop3Summary {
        all_within_bound: reports.iter().all(|g| g.ratio_prop3 <= g.bound_prop3),
        medians,
        median_decreasing,
        shrink_fraction: shrinking as f64 / cfg.seeds.len().max(1) as f64,
    }
}

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        k if k % 2 == 1 => sorted[k / 2],
        k => 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prop4Config {
    pub n: usize,
    pub dim: usize,
    pub noise: f64,
    pub c_list: Vec<f64>,
    pub seed: u64,
}

impl Default for Prop4Config {
    fn default() -> Self {
        Prop4Config {
            n: 100,
            dim: 8,
            noise: 1.0,
            c_list: vec![0.5, 1.0, 2.0, 5.0, 10.0],
            seed: 1,
        }
    }
}

/// One shared noise base pushed to each target constriction. The support is
/// empty: the comparison involves only `N'` and `R`.
pub fn prop4_sweep(cfg: &Prop4Config) -> Result<Vec<GradientReport>> {
    let base = noise_matrix(cfg.n, cfg.dim, cfg.noise, cfg.seed)?;
    let s = Support::empty(cfg.n)?;
    cfg.c_list
        .iter()
        .map(|&c| gradient_report(&constricted_embeddings(&base, c)?, &s, cfg.seed))
        .collect()
}

/// Bound holds everywhere and the difference strictly decreases.
pub fn prop4_passed(reports: &[GradientReport]) -> bool {
    reports.iter().all(|r| r.diff_prop4 <= r.bound_prop4)
        && reports.windows(2).all(|w| w[1].diff_prop4 < w[0].diff_prop4)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaReport {
    pub points: usize,
    /// Points where `log(1 + e^x) - x > e^{-x}`.
    pub softplus_violations: usize,
    /// Points where `1 - σ(x) > e^{-x}`.
    pub sigmoid_violations: usize,
    /// Largest `(f(x) - x) / e^{-x}` seen.
    pub max_softplus_ratio: f64,
    pub max_sigmoid_ratio: f64,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.softplus_violations == 0 && self.sigmoid_violations == 0
    }
}

/// Evaluates both exponential-tail inequalities on an even grid of `[lo, hi]`.
pub fn lemma1_grid(points: usize, lo: f64, hi: f64) -> LemmaReport {
    let mut r = LemmaReport {
        points,
        softplus_violations: 0,
        sigmoid_violations: 0,
        max_softplus_ratio: 0.0,
        max_sigmoid_ratio: 0.0,
    };
    for k in 0..points {
        let x = if points > 1 {
            lo + (hi - lo) * k as f64 / (points - 1) as f64
        } else {
            lo
        };
        let tail = (-x).exp();
        // log(1 + e^x) - x = log(1 + e^-x)
        let f_gap = tail.ln_1p();
        // 1 - σ(x) = σ(-x), evaluated without cancellation.
        let s_gap = sigmoid(-x);
        r.softplus_violations += usize::from(f_gap > tail);
        r.sigmoid_violations += usize::from(s_gap > tail);
        r.max_softplus_ratio = r.max_softplus_ratio.max(f_gap / tail);
        r.max_sigmoid_ratio = r.max_sigmoid_ratio.max(s_gap / tail);
    }
    r
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollapseConfig {
    pub n: usize,
    pub p_list: Vec<f64>,
    pub steps: usize,
    pub dim: usize,
    pub init_scale: f64,
    pub eta: f64,
    pub seed: u64,
    pub max_resamples: usize,
    pub tolerance: f64,
}

impl Default for CollapseConfig {
    fn default() -> Self {
        CollapseConfig {
            n: 100,
            p_list: vec![0.05, 0.1, 0.2, 0.5],
            steps: 2000,
            dim: 16,
            init_scale: 1e-2,
            eta: 1e-2,
            seed: 0,
            max_resamples: 1000,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollapsePoint {
    pub step: usize,
    pub constriction: f64,
    pub min_row_norm: f64,
    pub max_row_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Certification {
    /// Positive and non-decreasing from step `t0` onward.
    Certified { t0: usize },
    /// No such step in the first half of the horizon.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct CollapseTrace {
    pub p: f64,
    pub n: usize,
    pub edges: usize,
    /// Graph samples drawn before a connected one was found.
    pub attempts: usize,
    pub eta: f64,
    pub init_scale: f64,
    pub dim: usize,
    pub points: Vec<CollapsePoint>,
    pub certification: Certification,
    /// Constriction fell below its starting value at some step.
    pub initial_dip: bool,
}

/// Earliest step after which constriction stays positive and never drops by
/// more than `tol`; `Inconclusive` unless it falls within the first half of
/// the trace.
pub fn certify(values: &[f64], tol: f64) -> Certification {
    let mut t0 = values.len();
    for t in (0..values.len()).rev() {
        let ok_here = values[t] > 0.0 && (t + 1 == values.len() || values[t + 1] >= values[t] - tol);
        if !ok_here {
            break;
        }
        t0 = t;
    }
    if values.len() > 1 && t0 <= (values.len() - 1) / 2 {
        Certification::Certified { t0 }
    } else {
        Certification::Inconclusive
    }
}

/// Attraction-only full-batch plain gradient descent on connected
/// Erdős–Rényi graphs, recording constriction after every step.
pub fn collapse_experiment(cfg: &CollapseConfig) -> Result<Vec<CollapseTrace>> {
    cfg.p_list
        .iter()
        .enumerate()
        .map(|(idx, &p)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(idx as u64);
            let mut attempts = 0;
            let g = loop {
                attempts += 1;
                if attempts > cfg.max_resamples {
                    return Err(invalid(format!("no connected G({}, {p}) in {} samples", cfg.n, cfg.max_resamples)));
                }
                let g = generate_erdos_renyi(cfg.n, p, rng.random())?;
                if g.is_connected() {
                    break g;
                }
            };
            let x = init_embeddings(cfg.n, cfg.dim, cfg.init_scale, rng.random())?;
            collapse_trace(&g, x, p, attempts, cfg)
        })
        .collect()
}

fn collapse_trace(g: &Graph, mut x: EmbeddingMatrix, p: f64, attempts: usize, cfg: &CollapseConfig) -> Result<CollapseTrace> {
    let pairs = pairs_from_edges(g);
    let mut points = Vec::with_capacity(cfg.steps + 1);
    for step in 0..=cfg.steps {
        if step > 0 {
            positive_update(&mut x, pairs.pairs(), cfg.eta)?;
        }
        let norms = x.row_norms_squared();
        points.push(CollapsePoint {
            step,
            constriction: constriction(&x),
            min_row_norm: norms.iter().copied().fold(f64::INFINITY, f64::min).sqrt(),
            max_row_norm: norms.iter().copied().fold(0.0, f64::max).sqrt(),
        });
    }
    let values: Vec<f64> = points.iter().map(|pt| pt.constriction).collect();
    Ok(CollapseTrace {
        p,
        n: g.node_count(),
        edges: g.edge_count(),
        attempts,
        eta: cfg.eta,
        init_scale: cfg.init_scale,
        dim: cfg.dim,
        certification: certify(&values, cfg.tolerance),
        initial_dip: values.iter().any(|&c| c < values[0]),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaylorCheck {
    pub max_dot: f64,
    /// Largest entry-wise gap between the two updated matrices.
    pub max_deviation: f64,
    pub eta: f64,
}

/// Compares one attraction step of size `eta` with one gradient step of size
/// `eta / 2` on `||1_{S>0} ⊙ (1 - ½ X X^T)||_F^2`. The two agree when every
/// dot product is zero.
pub fn taylor_surrogate_check(x: &EmbeddingMatrix, pairs: &[Edge], eta: f64) -> Result<TaylorCheck> {
    let gram = x.gram();
    let max_dot = gram.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_dot > 0.1 {
        return Err(invalid(format!("surrogate check needs |<X_i, X_j>| <= 0.1, got {max_dot}")));
    }
    let mut exact = x.clone();
    positive_update(&mut exact, pairs, eta)?;

    // ∇ of the surrogate: row i gets -2 (1 - ½ z_ij) X_j for every support entry (i, j).
    let s = Support::from_pairs(x.rows(), pairs)?;
    let mut grad = EmbeddingMatrix::zeros(x.rows(), x.dim());
    for i in 0..x.rows() {
        for j in 0..x.rows() {
            if s.contains(i, j) {
                let w = -2.0 * (1.0 - 0.5 * dot(x.row(i), x.row(j)));
                let xj = x.row(j).to_vec();
                crate::math::axpy(w, &xj, grad.row_mut(i));
            }
        }
    }
    let mut surrogate = x.clone();
    crate::math::axpy(-0.5 * eta, grad.as_slice(), surrogate.as_mut_slice());
    let max_deviation = exact
        .as_slice()
        .iter()
        .zip(surrogate.as_slice())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(TaylorCheck {
        max_dot,
        max_deviation,
        eta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgnsExpectation {
    pub draws: usize,
    /// Largest `|mean - exact| / standard_error` over all entries.
    pub max_z: f64,
    /// Entries whose standard error is zero are compared exactly.
    pub exact_mismatches: usize,
}

impl SgnsExpectation {
    pub fn within(&self, z: f64) -> bool {
        self.exact_mismatches == 0 && self.max_z <= z
    }
}

/// Averages `draws` independent uniform (`α = 0`) negative-sampling
/// gradients over `batch` and compares with their exact expectation
/// `(k/n) [c ⊙ (K X) + K diag(c) X]`, where `c_i` counts node `i` as a
/// source in the batch. The first term is the all-to-all repulsion on the
/// sources scaled by `k/n`.
pub fn sgns_expectation_check(
    x: &EmbeddingMatrix,
    batch: &[Edge],
    k: usize,
    draws: usize,
    seed: u64,
) -> Result<SgnsExpectation> {
    let (n, d) = (x.rows(), x.dim());
    if draws < 2 || k == 0 {
        return Err(invalid("expectation check needs draws >= 2 and k >= 1"));
    }
    let sampler = NegativeSampler::uniform(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0.0; n * d];
    let mut sum_sq = vec![0.0; n * d];
    let mut grad = GradBuffer::for_matrix(x);
    for _ in 0..draws {
        grad.clear();
        sgns_gradient(x, batch, &sampler, k, SgnsWeight::Gradient, &mut rng, &mut grad);
        for ((s, q), g) in sum.iter_mut().zip(&mut sum_sq).zip(grad.as_slice()) {
            *s += g;
            *q += g * g;
        }
    }

    let mut counts = vec![0.0; n];
    for &(i, _) in batch {
        counts[i as usize] += 1.0;
    }
    let scale = k as f64 / n as f64;
    let source = kernel_product(x, 1.0, |_, _, z| sigmoid(z));
    let target = kernel_product(x, 1.0, |_, j, z| counts[j] * sigmoid(z));
    let mut max_z = 0.0f64;
    let mut exact_mismatches = 0;
    let t = draws as f64;
    for (i, &ci) in counts.iter().enumerate() {
        for c in 0..d {
            let idx = i * d + c;
            let expected = scale * (ci * source.get(i, c) + target.get(i, c));
            let mean = sum[idx] / t;
            let var = ((sum_sq[idx] - t * mean * mean) / (t - 1.0)).max(0.0);
            let se = (var / t).sqrt();
            if se == 0.0 {
                exact_mismatches += usize::from((mean - expected).abs() > 1e-12);
            } else {
                max_z = max_z.max((mean - expected).abs() / se);
            }
        }
    }
    Ok(SgnsExpectation {
        draws,
        max_z,
        exact_mismatches,
    })
}

/// Standard-normal random matrix of the given shape.
pub fn random_matrix(n: usize, d: usize, rng: &mut impl Rng) -> EmbeddingMatrix {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let data = (0..n * d).map(|_| normal.sample(rng)).collect();
    EmbeddingMatrix::from_vec(n, d, data).expect("shape")
}

pub fn write_gradient_reports_csv(path: impl AsRef<Path>, reports: &[GradientReport]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(
        w,
        "n,d,m,seed,sparsity,constriction,beta_max,norm_negative,norm_all_to_all,norm_regularizer,ratio_prop3,bound_prop3,diff_prop4,bound_prop4,k_min,k_max"
    )?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.d,
            r.m,
            r.seed,
            r.sparsity,
            r.constriction,
            r.beta_max,
            r.norm_negative,
            r.norm_all_to_all,
            r.norm_regularizer,
            r.ratio_prop3,
            r.bound_prop3,
            r.diff_prop4,
            r.bound_prop4,
            r.k_min,
            r.k_max
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_collapse_csv(path: impl AsRef<Path>, traces: &[CollapseTrace]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "p,step,constriction,min_row_norm,max_row_norm")?;
    for t in traces {
        for pt in &t.points {
            writeln!(w, "{},{},{},{},{}", t.p, pt.step, pt.constriction, pt.min_row_norm, pt.max_row_norm)?;
        }
    }
    w.flush()?;
    Ok(())
}
