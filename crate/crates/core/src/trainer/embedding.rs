use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::math::dot;

/// Dense row-major `n x d` matrix; row `i` is the embedding of node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn zeros(n: usize, d: usize) -> EmbeddingMatrix {
        EmbeddingMatrix {
            n,
            d,
            data: vec![0.0; n * d],
        }
    }

    pub fn from_vec(n: usize, d: usize, data: Vec<f64>) -> Result<EmbeddingMatrix> {
        if data.len() != n * d {
            return Err(invalid(format!("expected {} values for {n}x{d}, got {}", n * d, data.len())));
        }
        Ok(EmbeddingMatrix { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<EmbeddingMatrix> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(invalid("ragged rows"));
        }
        Self::from_vec(rows.len(), d, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.d + j] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.d];
        for row in self.data.chunks_exact(self.d.max(1)) {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.column_sums().into_iter().map(|s| s / n).collect()
    }

    /// `sum_i w_i X_i`, i.e. `X^T w`.
    pub fn weighted_column_sums(&self, w: &[f64]) -> Vec<f64> {
        let mut sums = vec![0.0; self.d];
        for (i, &wi) in w.iter().enumerate() {
            crate::math::axpy(wi, self.row(i), &mut sums);
        }
        sums
    }

    pub fn row_norms_squared(&self) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), self.row(i))).collect()
    }

    /// Squared Frobenius norm.
    pub fn frobenius_squared(&self) -> f64 {
        dot(&self.data, &self.data)
    }

    /// Dense Gram matrix `X X^T`, row-major `n x n`.
    pub fn gram(&self) -> Vec<f64> {
        let n = self.n;
        let mut g = vec![0.0; n * n];
        g.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, out)| {
            let xi = self.row(i);
            for (j, o) in out.iter_mut().enumerate() {
                *o = dot(xi, self.row(j));
            }
        });
        g
    }

    /// Text format: label, then `d` values, tab-separated.
    pub fn write_text(&self, path: impl AsRef<Path>, labels: &[i64]) -> Result<()> {
        if labels.len() != self.n {
            return Err(invalid("label count does not match row count"));
        }
        let mut w = BufWriter::new(fs::File::create(path)?);
        for (i, label) in labels.iter().enumerate() {
            write!(w, "{label}")?;
            for v in self.row(i) {
                write!(w, "\t{v}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_text(path: impl AsRef<Path>) -> Result<(Vec<i64>, EmbeddingMatrix)> {
        let path = path.as_ref();
        let reader = BufReader::new(fs::File::open(path)?);
        let mut labels = Vec::new();
        let mut data = Vec::new();
        let mut d = None;
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message,
            };
            let mut fields = line.split('\t');
            let label = fields.next().unwrap_or_default();
            labels.push(label.parse::<i64>().map_err(|e| parse_err(format!("label {label:?}: {e}")))?);
            let before = data.len();
            for f in fields {
                data.push(f.parse::<f64>().map_err(|e| parse_err(format!("value {f:?}: {e}")))?);
            }
            let width = data.len() - before;
            match d {
                None => d = Some(width),
                Some(d) if d != width => return Err(parse_err(format!("expected {d} values, found {width}"))),
                _ => {}
            }
        }
        let d = d.ok_or_else(|| invalid(format!("{} holds no embeddings", path.display())))?;
        if d == 0 {
            return Err(invalid("embeddings have zero dimensions"));
        }
        let m = Self::from_vec(labels.len(), d, data)?;
        Ok((labels, m))
    }

    /// Little-endian `u32 n`, `u32 d`, then `n*d` `f32` values row by row.
    pub fn write_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        w.write_all(&(self.n as u32).to_le_bytes())?;
        w.write_all(&(self.d as u32).to_le_bytes())?;
        for &v in &self.data {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 8 {
            return Err(invalid("binary embedding file shorter than its header"));
        }
        let word = |k: usize| u32::from_le_bytes(bytes[4 * k..4 * k + 4].try_into().unwrap()) as usize;
        let (n, d) = (word(0), word(1));
        if bytes.len() != 8 + 4 * n * d {
            return Err(invalid(format!("binary body size mismatch for {n}x{d}")));
        }
        let data = bytes[8..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        Self::from_vec(n, d, data)
    }
}

/// I.i.d. `N(0, init_scale^2)` entries.
pub fn init_embeddings(n: usize, d: usize, init_scale: f64, seed: u64) -> Result<EmbeddingMatrix> {
    if !(init_scale > 0.0 && init_scale.is_finite()) {
        return Err(invalid(format!("init_scale must be positive, got {init_scale}")));
    }
    if d == 0 {
        return Err(invalid("embedding dimension must be at least 1"));
    }
    let normal = Normal::new(0.0, init_scale).map_err(|e| invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * d).map(|_| normal.sample(&mut rng)).collect();
    EmbeddingMatrix::from_vec(n, d, data)
}

/// Minimum dot product over all ordered pairs of rows, including `i = j`.
pub fn constriction(x: &EmbeddingMatrix) -> f64 {
    (0..x.rows())
        .into_par_iter()
        .map(|i| {
            let xi = x.row(i);
            (i..x.rows()).map(|j| dot(xi, x.row(j))).fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constriction_examples() {
        let same = EmbeddingMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(constriction(&same), 1.0);
        let ortho = EmbeddingMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(constriction(&ortho), 0.0);
        let opposite = EmbeddingMatrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert_eq!(constriction(&opposite), -1.0);
    }

    #[test]
    fn constriction_matches_gram_minimum() {
        let x = init_embeddings(37, 5, 1.0, 8).unwrap();
        let g = x.gram();
        let brute = g.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(constriction(&x), brute);
    }

    #[test]
    fn init_rejects_nonpositive_scale() {
        assert!(init_embeddings(3, 2, 0.0, 0).is_err());
        assert!(init_embeddings(3, 2, -1.0, 0).is_err());
        assert!(init_embeddings(3, 0, 1.0, 0).is_err());
    }

    #[test]
    fn init_is_deterministic_and_small() {
        let a = init_embeddings(100, 2, 0.01, 5).unwrap();
        assert_eq!(a, init_embeddings(100, 2, 0.01, 5).unwrap());
        // Gaussian tail bound: max row norm < 3 * 10 * scale * sqrt(d).
        let bound = 3.0 * 10.0 * 0.01 * 2f64.sqrt();
        assert!(a.row_norms_squared().iter().all(|&s| s.sqrt() < bound));
    }

    #[test]
    fn text_and_binary_io() {
        let dir = tempfile::tempdir().unwrap();
        let x = init_embeddings(4, 3, 1.0, 2).unwrap();
        let txt = dir.path().join("e.tsv");
        x.write_text(&txt, &[7, 8, 9, 10]).unwrap();
        let (labels, y) = EmbeddingMatrix::read_text(&txt).unwrap();
        assert_eq!(labels, vec![7, 8, 9, 10]);
        assert_eq!(x, y);

        let bin = dir.path().join("e.bin");
        x.write_binary(&bin).unwrap();
        let raw = std::fs::read(&bin).unwrap();
        assert_eq!(&raw[..8], &[4, 0, 0, 0, 3, 0, 0, 0]);
        let z = EmbeddingMatrix::read_binary(&bin).unwrap();
        for (a, b) in x.as_slice().iter().zip(z.as_slice()) {
            assert_eq!(*a as f32, *b as f32);
        }
    }
}
