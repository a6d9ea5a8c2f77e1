//! Sparse symmetric operators and their assembly.

mod hamiltonian;
mod io;
mod prolate;
mod sectors;
pub(crate) mod stencil;

pub use hamiltonian::{build_hamiltonian, build_laplacian, HamiltonianSpec, MagneticSpec};
pub use io::{read_triplets, write_triplets, TripletFile};
pub use prolate::build_prolate_fixed_r;
pub use sectors::{fold, physical_sectors, FoldMap, Sector};

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::potentials::PotentialForm;

/// Compressed sparse rows holding both triangles of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row upper-triangle entries (`col >= row`).
    ///
    /// Duplicate columns within a row are summed in the order given. The
    /// lower triangle is mirrored from the stored upper entries, so the
    /// result is symmetric bit for bit.
    pub fn from_upper_rows(upper: Vec<Vec<(usize, f64)>>) -> Self {
        let n = upper.len();
        let upper: Vec<Vec<(usize, f64)>> = upper
            .into_par_iter()
            .enumerate()
            .map(|(i, mut row)| {
                debug_assert!(row.iter().all(|&(j, _)| j >= i && j < n));
                row.sort_by_key(|e| e.0);
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
                for (j, v) in row {
                    match merged.last_mut() {
                        Some(last) if last.0 == j => last.1 += v,
                        _ => merged.push((j, v)),
                    }
                }
                merged
            })
            .collect();

        let mut counts = vec![0usize; n];
        for (i, row) in upper.iter().enumerate() {
            for &(j, _) in row {
                counts[i] += 1;
                if j != i {
                    counts[j] += 1;
                }
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + counts[i];
        }
        let nnz = row_ptr[n];
        let mut col_idx = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        let mut fill = row_ptr[..n].to_vec();
        // rows are visited in ascending order, so lower entries land sorted
        for (i, row) in upper.iter().enumerate() {
            for &(j, v) in row {
                if j != i {
                    col_idx[fill[j]] = i;
                    values[fill[j]] = v;
                    fill[j] += 1;
                }
            }
            for &(j, v) in row {
                col_idx[fill[i]] = j;
                values[fill[i]] = v;
                fill[i] += 1;
            }
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_upper_rows(diag.iter().enumerate().map(|(i, &d)| vec![(i, d)]).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| j == i || v == 0.0))
    }

    /// Exact structural and numerical symmetry.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| self.get(j, i).to_bits() == v.to_bits()))
    }

    /// Upper-triangle entries in row-major order.
    pub fn upper_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).filter(move |&(j, _)| j >= i).map(move |(j, v)| (i, j, v)))
    }

    /// `y = A x`; each row is reduced in a fixed order.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.par_iter_mut().with_min_len(256).enumerate().for_each(|(i, yi)| {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[p] * x[self.col_idx[p]];
            }
            *yi = s;
        });
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Adds a diagonal to a copy of the matrix.
    pub fn plus_diagonal(&self, diag: &[f64]) -> Self {
        assert_eq!(diag.len(), self.n);
        let rows = (0..self.n)
            .map(|i| {
                let mut r: Vec<(usize, f64)> = self.row(i).filter(|&(j, _)| j >= i).collect();
                r.push((i, diag[i]));
                r
            })
            .collect();
        Self::from_upper_rows(rows)
    }
}

/// Builder parameters recorded alongside an assembled operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub form: Option<PotentialForm>,
    pub mu: Option<f64>,
    pub z: Option<f64>,
    pub softening: f64,
    pub magnetic: Option<MagneticSpec>,
    /// Separation for fixed-`R` operators.
    pub separation: Option<f64>,
}

impl OperatorMeta {
    fn bare() -> Self {
        Self { form: None, mu: None, z: None, softening: 0.0, magnetic: None, separation: None }
    }
}

/// Symmetric sparse matrix bound to the grid it was assembled on.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    pub matrix: CsrMatrix,
    pub grid: GridSpec,
    pub meta: OperatorMeta,
}

impl SparseOperator {
    pub fn dimension(&self) -> usize {
        self.matrix.dim()
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), got: v.len() });
        }
        let mut y = vec![0.0; v.len()];
        self.matrix.mul_vec_into(v, &mut y);
        Ok(y)
    }
}
