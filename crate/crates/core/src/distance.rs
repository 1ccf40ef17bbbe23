//! Pairwise distances and nearest-neighbor statistics.

use crate::error::{Error, Result};
use crate::types::Metric;

/// Norms below this are treated as a failed embedding.
pub const ZERO_NORM_EPS: f64 = 1e-12;

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub(crate) fn l2_norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

fn check_lengths(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    Ok(())
}

#[inline]
fn cosine_with_norms(u: &[f64], v: &[f64], nu: f64, nv: f64) -> f64 {
    (1.0 - dot(u, v) / (nu * nv)).clamp(0.0, 2.0)
}

/// `1 - u.v / (|u||v|)`, clamped to `[0, 2]`.
///
/// A vector with norm below [`ZERO_NORM_EPS`] is an error: index 0 names `u`,
/// index 1 names `v`.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    check_lengths(u, v)?;
    let nu = l2_norm(u);
    if nu < ZERO_NORM_EPS {
        return Err(Error::ZeroNormVector { index: 0 });
    }
    let nv = l2_norm(v);
    if nv < ZERO_NORM_EPS {
        return Err(Error::ZeroNormVector { index: 1 });
    }
    Ok(cosine_with_norms(u, v, nu, nv))
}

pub fn euclidean_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    check_lengths(u, v)?;
    Ok(u.iter()
        .zip(v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Dense symmetric distance matrix with a zero diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from explicit rows, checking shape, symmetry, zero
    /// diagonal and non-negativity.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidMatrix("matrix is empty".into()));
        }
        let mut values = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry {i} is not zero"
                )));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({i}, {j}) = {v} is not a finite non-negative distance"
                    )));
                }
                if v != values[j * n + i] {
                    return Err(Error::InvalidMatrix(format!(
                        "entries ({i}, {j}) and ({j}, {i}) differ"
                    )));
                }
            }
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Upper-triangle entries of row `i` (columns `i+1..n`).
fn upper_row(reps: &[Vec<f64>], norms: &[f64], metric: Metric, i: usize) -> Vec<f64> {
    let u = &reps[i];
    reps[i + 1..]
        .iter()
        .enumerate()
        .map(|(off, v)| match metric {
            Metric::Cosine => cosine_with_norms(u, v, norms[i], norms[i + 1 + off]),
            Metric::Euclidean => u
                .iter()
                .zip(v)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        })
        .collect()
}

/// Full pairwise matrix over `reps`. Each entry `(i, j)` with `i < j` is
/// computed once from the two input vectors and mirrored, so the result does
/// not depend on how many threads computed it.
pub fn distance_matrix(reps: &[Vec<f64>], metric: Metric) -> Result<DistanceMatrix> {
    let n = reps.len();
    if n == 0 {
        return Err(Error::EmptyPool);
    }
    let len = reps[0].len();
    if let Some(bad) = reps.iter().find(|r| r.len() != len) {
        return Err(Error::LengthMismatch {
            left: len,
            right: bad.len(),
        });
    }
    let norms: Vec<f64> = reps.iter().map(|r| l2_norm(r)).collect();
    if metric == Metric::Cosine {
        if let Some(index) = norms.iter().position(|&nv| nv < ZERO_NORM_EPS) {
            return Err(Error::ZeroNormVector { index });
        }
    }

    #[cfg(feature = "parallel")]
    let upper: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..n)
            .into_par_iter()
            .map(|i| upper_row(reps, &norms, metric, i))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let upper: Vec<Vec<f64>> = (0..n).map(|i| upper_row(reps, &norms, metric, i)).collect();

    let mut values = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &d) in row.iter().enumerate() {
            let j = i + 1 + off;
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix { n, values })
}

/// Nearest neighbor of every sample and the pool-average nearest-neighbor
/// distance.
#[derive(Debug, Clone, PartialEq)]
pub struct NNStats {
    pub nn: Vec<usize>,
    pub d: Vec<f64>,
    pub ave_d: f64,
}

impl NNStats {
    /// Samples with `d_i <= ave_d`.
    pub fn is_representative(&self, i: usize) -> bool {
        self.d[i] <= self.ave_d
    }
}

/// Ties break to the smallest index.
pub fn nn_stats(m: &DistanceMatrix) -> Result<NNStats> {
    let n = m.n();
    if n < 2 {
        return Err(Error::PoolTooSmall { n });
    }
    let mut nn = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let row = m.row(i);
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for (j, &v) in row.iter().enumerate() {
            if j != i && (best == usize::MAX || v < best_d) {
                best = j;
                best_d = v;
            }
        }
        nn.push(best);
        d.push(best_d);
    }
    let ave_d = d.iter().sum::<f64>() / n as f64;
    Ok(NNStats { nn, d, ave_d })
}
