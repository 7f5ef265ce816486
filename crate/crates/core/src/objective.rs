//! Skip-gram loss components and their dense analytic gradients.
//!
//! `S` is the positive-pair support: `S_ij > 0` iff `(i, j)` occurs as a
//! positive pair. All dense routines are `O(n^2 d)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::math::{axpy, dot, sigmoid, softplus};
use crate::trainer::EmbeddingMatrix;

/// Largest `n` for which dense `n x n` computations are attempted.
pub const DENSE_LIMIT: usize = 5000;

/// Dense boolean indicator of the positive support `S > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    n: usize,
    mask: Vec<bool>,
}

impl Support {
    pub fn empty(n: usize) -> Result<Support> {
        if n > DENSE_LIMIT {
            return Err(Error::TooLarge { n, limit: DENSE_LIMIT });
        }
        Ok(Support {
            n,
            mask: vec![false; n * n],
        })
    }

    /// Support of a pair list. Each pair is entered in both orientations.
    pub fn from_pairs(n: usize, pairs: &[Edge]) -> Result<Support> {
        let mut s = Self::empty(n)?;
        for &(i, j) in pairs {
            s.insert(i as usize, j as usize);
        }
        Ok(s)
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        self.mask[i * self.n + j] = true;
        self.mask[j * self.n + i] = true;
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.n + j]
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of non-zero entries.
    pub fn nnz(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

/// `P_SG = -sum over pairs of log σ(<X_i, X_j>)`, pairs counted with
/// multiplicity.
pub fn positive_loss(x: &EmbeddingMatrix, pairs: &[Edge]) -> f64 {
    pairs
        .iter()
        .map(|&(i, j)| softplus(-dot(x.row(i as usize), x.row(j as usize))))
        .sum()
}

/// `N_SG = -sum_{i,j : S_ij = 0} log σ(-<X_i, X_j>)` over ordered pairs,
/// diagonal included.
pub fn negative_loss(x: &EmbeddingMatrix, s: &Support) -> f64 {
    pair_sum(x, |i, j, z| if s.contains(i, j) { 0.0 } else { softplus(z) })
}

/// `N'_SG = -sum_{i,j} log σ(-<X_i, X_j>)`.
pub fn all_to_all_loss(x: &EmbeddingMatrix) -> f64 {
    pair_sum(x, |_, _, z| softplus(z))
}

/// `R = ||X^T 1||^2`.
pub fn dim_mean_penalty(x: &EmbeddingMatrix) -> f64 {
    let s = x.column_sums();
    dot(&s, &s)
}

/// `R(X; p) = ||X^T p||^2`.
pub fn weighted_dim_mean_penalty(x: &EmbeddingMatrix, p: &[f64]) -> f64 {
    let s = x.weighted_column_sums(p);
    dot(&s, &s)
}

fn pair_sum(x: &EmbeddingMatrix, f: impl Fn(usize, usize, f64) -> f64 + Sync) -> f64 {
    let row_sums: Vec<f64> = (0..x.rows())
        .into_par_iter()
        .map(|i| (0..x.rows()).map(|j| f(i, j, dot(x.row(i), x.row(j)))).sum())
        .collect();
    row_sums.iter().sum()
}

/// Gradient of [`positive_loss`].
pub fn positive_loss_gradient(x: &EmbeddingMatrix, pairs: &[Edge]) -> EmbeddingMatrix {
    let mut g = EmbeddingMatrix::zeros(x.rows(), x.dim());
    for &(i, j) in pairs {
        let (i, j) = (i as usize, j as usize);
        let w = -sigmoid(-dot(x.row(i), x.row(j)));
        let xj = x.row(j).to_vec();
        axpy(w, &xj, g.row_mut(i));
        let xi = x.row(i).to_vec();
        axpy(w, &xi, g.row_mut(j));
    }
    g
}

/// `∇N_SG = 2 (1_{S=0} ⊙ K) X` with `K = σ(X X^T)`.
pub fn negative_loss_gradient(x: &EmbeddingMatrix, s: &Support) -> EmbeddingMatrix {
    kernel_product(x, 2.0, |i, j, z| if s.contains(i, j) { 0.0 } else { sigmoid(z) })
}

/// `∇N'_SG = 2 K X`.
pub fn all_to_all_gradient(x: &EmbeddingMatrix) -> EmbeddingMatrix {
    kernel_product(x, 2.0, |_, _, z| sigmoid(z))
}

/// `∇R = 2 · 1 X`: every row equals twice the column-sum vector.
pub fn dim_mean_gradient(x: &EmbeddingMatrix) -> EmbeddingMatrix {
    let sums = x.column_sums();
    let mut g = EmbeddingMatrix::zeros(x.rows(), x.dim());
    for i in 0..x.rows() {
        axpy(2.0, &sums, g.row_mut(i));
    }
    g
}

/// `∇R(X; p) = 2 p (p^T X)`.
pub fn weighted_dim_mean_gradient(x: &EmbeddingMatrix, p: &[f64]) -> EmbeddingMatrix {
    let sums = x.weighted_column_sums(p);
    let mut g = EmbeddingMatrix::zeros(x.rows(), x.dim());
    for (i, &pi) in p.iter().enumerate() {
        axpy(2.0 * pi, &sums, g.row_mut(i));
    }
    g
}

/// `scale * W X` where `W_ij = w(i, j, <X_i, X_j>)`.
pub(crate) fn kernel_product(
    x: &EmbeddingMatrix,
    scale: f64,
    w: impl Fn(usize, usize, f64) -> f64 + Sync,
) -> EmbeddingMatrix {
    let (n, d) = (x.rows(), x.dim());
    let mut out = vec![0.0; n * d];
    out.par_chunks_mut(d.max(1)).enumerate().for_each(|(i, row)| {
        let xi = x.row(i);
        for j in 0..n {
            let xj = x.row(j);
            let wij = w(i, j, dot(xi, xj));
            if wij != 0.0 {
                axpy(scale * wij, xj, row);
            }
        }
    });
    EmbeddingMatrix::from_vec(n, d, out).expect("shape preserved")
}

/// Central finite-difference gradient of `f` at `x`.
pub fn finite_difference_gradient(x: &EmbeddingMatrix, h: f64, f: impl Fn(&EmbeddingMatrix) -> f64) -> EmbeddingMatrix {
    let mut probe = x.clone();
    let mut g = EmbeddingMatrix::zeros(x.rows(), x.dim());
    for i in 0..x.rows() {
        for k in 0..x.dim() {
            let v = x.get(i, k);
            probe.set(i, k, v + h);
            let up = f(&probe);
            probe.set(i, k, v - h);
            let down = f(&probe);
            probe.set(i, k, v);
            g.set(i, k, (up - down) / (2.0 * h));
        }
    }
    g
}

/// `||a - b||_F / max(||b||_F, floor)`.
pub fn relative_error(a: &EmbeddingMatrix, b: &EmbeddingMatrix, floor: f64) -> f64 {
    let diff: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(u, v)| (u - v) * (u - v)).sum();
    diff.sqrt() / b.frobenius_squared().sqrt().max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::init_embeddings;

    fn close(a: &EmbeddingMatrix, b: &EmbeddingMatrix) -> bool {
        relative_error(a, b, 1e-8) < 1e-6
    }

    #[test]
    fn gradients_match_finite_differences() {
        let x = init_embeddings(6, 3, 0.7, 4).unwrap();
        let pairs = vec![(0, 1), (1, 0), (1, 2), (2, 1), (3, 5), (5, 3), (3, 5)];
        let s = Support::from_pairs(6, &pairs).unwrap();
        let h = 1e-5;
        assert!(close(
            &positive_loss_gradient(&x, &pairs),
            &finite_difference_gradient(&x, h, |y| positive_loss(y, &pairs))
        ));
        assert!(close(
            &negative_loss_gradient(&x, &s),
            &finite_difference_gradient(&x, h, |y| negative_loss(y, &s))
        ));
        assert!(close(&all_to_all_gradient(&x), &finite_difference_gradient(&x, h, all_to_all_loss)));
        assert!(close(&dim_mean_gradient(&x), &finite_difference_gradient(&x, h, dim_mean_penalty)));
        let p = [0.1, 0.2, 0.3, 0.1, 0.2, 0.1];
        assert!(close(
            &weighted_dim_mean_gradient(&x, &p),
            &finite_difference_gradient(&x, h, |y| weighted_dim_mean_penalty(y, &p))
        ));
    }

    #[test]
    fn centered_rows_have_zero_regulariser_gradient() {
        let x = EmbeddingMatrix::from_rows(&[vec![1.0, -2.0], vec![-1.0, 2.0]]).unwrap();
        assert_eq!(dim_mean_penalty(&x), 0.0);
        assert!(dim_mean_gradient(&x).as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn full_off_diagonal_support_leaves_diagonal_terms() {
        let x = init_embeddings(4, 2, 1.0, 9).unwrap();
        let mut s = Support::empty(4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    s.insert(i, j);
                }
            }
        }
        let g = negative_loss_gradient(&x, &s);
        for i in 0..4 {
            let w = 2.0 * sigmoid(dot(x.row(i), x.row(i)));
            for k in 0..2 {
                assert!((g.get(i, k) - w * x.get(i, k)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn support_counts() {
        let s = Support::from_pairs(3, &[(0, 1), (1, 0), (1, 2)]).unwrap();
        assert_eq!(s.nnz(), 4);
        assert!(s.contains(2, 1));
        assert!(!s.contains(0, 2));
        assert!(matches!(Support::empty(DENSE_LIMIT + 1), Err(Error::TooLarge { .. })));
    }
}
