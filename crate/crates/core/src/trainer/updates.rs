//! Batch update rules. Every rule reads the pre-batch matrix and accumulates
//! its gradient into a [`GradBuffer`]; the step is applied afterwards, so a
//! batch's result does not depend on pair order.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::embedding::EmbeddingMatrix;
use super::sampler::NegativeSampler;
use crate::error::{invalid, Error, Result};
use crate::graph::Edge;
use crate::math::{dot, sigmoid};

/// Repulsion weight used by the negative-sampling update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SgnsWeight {
    /// `σ(<X_i, X_j'>)`, the gradient of `-log σ(-<X_i, X_j'>)`.
    #[default]
    Gradient,
    /// `σ(-<X_i, X_j'>)`, mirroring the pseudo-code that circulates with the
    /// augmented LINE/node2vec algorithm.
    AsPrinted,
}

/// Gradient accumulator that remembers which rows it has touched.
#[derive(Debug, Clone)]
pub struct GradBuffer {
    d: usize,
    data: Vec<f64>,
    touched: Vec<bool>,
    rows: Vec<usize>,
}

impl GradBuffer {
    pub fn new(n: usize, d: usize) -> GradBuffer {
        GradBuffer {
            d,
            data: vec![0.0; n * d],
            touched: vec![false; n],
            rows: Vec::new(),
        }
    }

    pub fn for_matrix(x: &EmbeddingMatrix) -> GradBuffer {
        Self::new(x.rows(), x.dim())
    }

    /// `g_i += a * v`
    #[inline]
    pub fn add_row(&mut self, i: usize, a: f64, v: &[f64]) {
        if !self.touched[i] {
            self.touched[i] = true;
            self.rows.push(i);
        }
        crate::math::axpy(a, v, &mut self.data[i * self.d..(i + 1) * self.d]);
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn touched_rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn clear(&mut self) {
        for &i in &self.rows {
            self.touched[i] = false;
            self.data[i * self.d..(i + 1) * self.d].fill(0.0);
        }
        self.rows.clear();
    }

    /// `X -= eta * G` on touched rows.
    pub fn apply_sgd(&self, x: &mut EmbeddingMatrix, eta: f64) {
        for &i in &self.rows {
            crate::math::axpy(-eta, self.row(i), x.row_mut(i));
        }
    }

    pub fn touched_rows_finite(&self, x: &EmbeddingMatrix) -> bool {
        self.rows.iter().all(|&i| x.row(i).iter().all(|v| v.is_finite()))
    }
}

/// Gradient of `sum_{(i,j) in batch} -log σ(<X_i, X_j>)`.
pub fn positive_gradient(x: &EmbeddingMatrix, batch: &[Edge], grad: &mut GradBuffer) {
    for &(i, j) in batch {
        let (i, j) = (i as usize, j as usize);
        let w = sigmoid(-dot(x.row(i), x.row(j)));
        grad.add_row(i, -w, x.row(j));
        grad.add_row(j, -w, x.row(i));
    }
}

/// Stochastic gradient of the negative-sampling term: for each positive
/// pair `(i, j)`, `k` draws `j'` each contribute `w X_j'` to row `i` and
/// `w X_i` to row `j'`.
pub fn sgns_gradient<R: Rng + ?Sized>(
    x: &EmbeddingMatrix,
    batch: &[Edge],
    sampler: &NegativeSampler,
    k: usize,
    rule: SgnsWeight,
    rng: &mut R,
    grad: &mut GradBuffer,
) {
    for &(i, _) in batch {
        let i = i as usize;
        for _ in 0..k {
            let neg = sampler.sample(rng) as usize;
            let z = dot(x.row(i), x.row(neg));
            let w = match rule {
                SgnsWeight::Gradient => sigmoid(z),
                SgnsWeight::AsPrinted => sigmoid(-z),
            };
            grad.add_row(i, w, x.row(neg));
            grad.add_row(neg, w, x.row(i));
        }
    }
}

/// One synchronous attraction step over `batch`.
pub fn positive_update(x: &mut EmbeddingMatrix, batch: &[Edge], eta: f64) -> Result<()> {
    let mut grad = GradBuffer::for_matrix(x);
    positive_gradient(x, batch, &mut grad);
    grad.apply_sgd(x, eta);
    if !grad.touched_rows_finite(x) {
        return Err(Error::NonFinite { batch: 0 });
    }
    Ok(())
}

/// One synchronous negative-sampling step over `batch`.
pub fn sgns_update<R: Rng + ?Sized>(
    x: &mut EmbeddingMatrix,
    batch: &[Edge],
    sampler: &NegativeSampler,
    k: usize,
    eta: f64,
    rule: SgnsWeight,
    rng: &mut R,
) -> Result<()> {
    let mut grad = GradBuffer::for_matrix(x);
    sgns_gradient(x, batch, sampler, k, rule, rng, &mut grad);
    grad.apply_sgd(x, eta);
    if !grad.touched_rows_finite(x) {
        return Err(Error::NonFinite { batch: 0 });
    }
    Ok(())
}

/// Weight vector of the dimension-mean regulariser.
#[derive(Debug, Clone, PartialEq)]
pub enum RegularizerWeights {
    /// `p = 1/n` for every node.
    Uniform,
    /// Non-negative weights summing to one.
    Weighted(Vec<f64>),
}

impl RegularizerWeights {
    pub fn weighted(p: Vec<f64>) -> Result<RegularizerWeights> {
        if p.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(invalid("regulariser weights must be non-negative"));
        }
        if (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(invalid("regulariser weights must sum to one"));
        }
        Ok(RegularizerWeights::Weighted(p))
    }
}

/// Dimension-mean regularisation step. Uniform weights subtract `lambda`
/// times the column means from every row; weighted mode subtracts
/// `lambda * n * p_i * (X^T p)` from row `i`, which reduces to the uniform
/// rule when `p = 1/n`.
pub fn dimreg_update(x: &mut EmbeddingMatrix, lambda: f64, weights: &RegularizerWeights) -> Result<()> {
    let n = x.rows();
    match weights {
        RegularizerWeights::Uniform => {
            let shift: Vec<f64> = x.column_means().into_iter().map(|m| lambda * m).collect();
            for i in 0..n {
                for (v, s) in x.row_mut(i).iter_mut().zip(&shift) {
                    *v -= s;
                }
            }
        }
        RegularizerWeights::Weighted(p) => {
            if p.len() != n {
                return Err(invalid(format!("{} weights for {n} rows", p.len())));
            }
            let center = x.weighted_column_sums(p);
            for (i, &pi) in p.iter().enumerate() {
                crate::math::axpy(-lambda * n as f64 * pi, &center, x.row_mut(i));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::init_embeddings;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn positive_update_hand_example() {
        let mut x = EmbeddingMatrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        positive_update(&mut x, &[(0, 1)], 1.0).unwrap();
        assert_eq!(x.row(0), &[0.5, 0.0]);
        assert_eq!(x.row(1), &[1.0, 0.0]);
    }

    #[test]
    fn positive_update_saturates() {
        let mut x = EmbeddingMatrix::from_rows(&[vec![40.0], vec![40.0]]).unwrap();
        let before = x.clone();
        positive_update(&mut x, &[(0, 1)], 1.0).unwrap();
        // σ(-1600) underflows to zero.
        assert_eq!(x, before);
    }

    #[test]
    fn positive_update_non_finite_is_error() {
        let mut x = EmbeddingMatrix::from_rows(&[vec![-1e200], vec![1e200]]).unwrap();
        assert!(matches!(positive_update(&mut x, &[(0, 1)], 1e200), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn sgns_zero_k_is_identity() {
        let mut x = init_embeddings(5, 3, 0.3, 1).unwrap();
        let before = x.clone();
        let s = NegativeSampler::uniform(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        sgns_update(&mut x, &[(0, 1), (2, 3)], &s, 0, 0.5, SgnsWeight::Gradient, &mut rng).unwrap();
        assert_eq!(x, before);
    }

    #[test]
    fn sgns_weight_rules_differ_by_sign_of_logit() {
        // Single node sampled against itself: w = σ(±|x|^2).
        let x = EmbeddingMatrix::from_rows(&[vec![1.0]]).unwrap();
        let s = NegativeSampler::uniform(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut g = GradBuffer::for_matrix(&x);
        sgns_gradient(&x, &[(0, 0)], &s, 1, SgnsWeight::Gradient, &mut rng, &mut g);
        assert!((g.row(0)[0] - 2.0 * sigmoid(1.0)).abs() < 1e-15);
        let mut g = GradBuffer::for_matrix(&x);
        sgns_gradient(&x, &[(0, 0)], &s, 1, SgnsWeight::AsPrinted, &mut rng, &mut g);
        assert!((g.row(0)[0] - 2.0 * sigmoid(-1.0)).abs() < 1e-15);
    }

    #[test]
    fn dimreg_examples() {
        let mut ones = EmbeddingMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        dimreg_update(&mut ones, 1.0, &RegularizerWeights::Uniform).unwrap();
        assert_eq!(ones.as_slice(), &[0.0; 4]);

        let mut centered = EmbeddingMatrix::from_rows(&[vec![1.0, -2.0], vec![-1.0, 2.0]]).unwrap();
        let before = centered.clone();
        dimreg_update(&mut centered, 3.0, &RegularizerWeights::Uniform).unwrap();
        assert_eq!(centered, before);
    }

    #[test]
    fn weighted_uniform_matches_uniform_rule() {
        let base = init_embeddings(6, 3, 1.0, 4).unwrap();
        let mut a = base.clone();
        let mut b = base.clone();
        dimreg_update(&mut a, 0.7, &RegularizerWeights::Uniform).unwrap();
        let w = RegularizerWeights::weighted(vec![1.0 / 6.0; 6]).unwrap();
        dimreg_update(&mut b, 0.7, &w).unwrap();
        for (u, v) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn weighted_step_is_scaled_gradient_of_weighted_penalty() {
        // grad ||X^T p||^2 = 2 p (p^T X); the step is lambda * n / 2 times it.
        let base = init_embeddings(4, 2, 1.0, 9).unwrap();
        let p = vec![0.1, 0.2, 0.3, 0.4];
        let mut x = base.clone();
        dimreg_update(&mut x, 0.5, &RegularizerWeights::weighted(p.clone()).unwrap()).unwrap();
        let c = base.weighted_column_sums(&p);
        for (i, &pi) in p.iter().enumerate() {
            for (j, &cj) in c.iter().enumerate() {
                let grad = 2.0 * pi * cj;
                let expect = base.get(i, j) - 0.5 * 4.0 / 2.0 * grad;
                assert!((x.get(i, j) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn bad_weights_rejected() {
        assert!(RegularizerWeights::weighted(vec![0.5, 0.6]).is_err());
        assert!(RegularizerWeights::weighted(vec![1.5, -0.5]).is_err());
        let mut x = init_embeddings(3, 2, 1.0, 0).unwrap();
        let w = RegularizerWeights::weighted(vec![0.5, 0.5]).unwrap();
        assert!(dimreg_update(&mut x, 1.0, &w).is_err());
    }
}
