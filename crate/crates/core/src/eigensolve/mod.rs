//! Lowest eigenpairs of symmetric and diagonal-weight generalized problems.

pub(crate) mod dense;
mod lanczos;

pub use dense::{dense_eigenvalues, dense_generalized_oracle, dense_oracle, DEFAULT_DENSE_CAP};
pub use lanczos::{solve_lowest, solve_lowest_generalized, LanczosOptions};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::operators::{CsrMatrix, SparseOperator};

/// Matrix-free symmetric operator.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        CsrMatrix::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_into(x, y)
    }
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.dimension()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.mul_vec_into(x, y)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub method: String,
    pub iterations: usize,
    pub restarts: usize,
    pub matvecs: usize,
    pub wall_time_s: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct EigenSolution {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// One column per eigenvalue.
    pub eigenvectors: Mat<f64>,
    pub residuals: Vec<f64>,
    pub stats: SolverStats,
}

impl EigenSolution {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        self.eigenvectors.col_as_slice(i)
    }

    pub fn worst_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Largest `|⟨v_i, v_j⟩ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.k();
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for j in i..k {
                let d = dot(self.vector(i), self.vector(j)) - if i == j { 1.0 } else { 0.0 };
                worst = worst.max(d.abs());
            }
        }
        worst
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `‖A v − λ v‖` for each pair.
pub fn verify_residuals(op: &dyn LinearOperator, values: &[f64], vectors: &Mat<f64>) -> Vec<f64> {
    let mut y = vec![0.0; op.dim()];
    (0..values.len())
        .map(|i| {
            let v = vectors.col_as_slice(i);
            op.apply(v, &mut y);
            y.iter().zip(v).map(|(a, b)| (a - values[i] * b).powi(2)).sum::<f64>().sqrt()
        })
        .collect()
}

/// First index of the largest-magnitude component.
pub(crate) fn peak_index(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

/// Fixes the sign of every vector so its largest component is positive,
/// and orders each cluster of equal eigenvalues by the position of that
/// component.
pub(crate) fn canonicalize(sol: &mut EigenSolution) {
    let k = sol.k();
    for i in 0..k {
        let v = sol.eigenvectors.col_as_slice_mut(i);
        if v[peak_index(v)] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let scale = sol.eigenvalues.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && sol.eigenvalues[end] - sol.eigenvalues[end - 1] <= 1e-12 * scale {
            end += 1;
        }
        if end - start > 1 {
            let mut order: Vec<usize> = (start..end).collect();
            order.sort_by_key(|&i| peak_index(sol.vector(i)));
            if order.iter().enumerate().any(|(p, &i)| i != start + p) {
                let cols: Vec<Vec<f64>> = order.iter().map(|&i| sol.vector(i).to_vec()).collect();
                let vals: Vec<f64> = order.iter().map(|&i| sol.eigenvalues[i]).collect();
                let res: Vec<f64> = order.iter().map(|&i| sol.residuals[i]).collect();
                for (p, col) in cols.into_iter().enumerate() {
                    sol.eigenvectors.col_as_slice_mut(start + p).copy_from_slice(&col);
                    sol.eigenvalues[start + p] = vals[p];
                    sol.residuals[start + p] = res[p];
                }
            }
        }
        start = end;
    }
}
