use std::time::Instant;

use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Mat, MatRef, Par, Side};

use super::{canonicalize, verify_residuals, EigenSolution, SolverStats};
use crate::operators::CsrMatrix;
use crate::error::{Error, Result};

/// Largest dimension the dense oracle accepts unless told otherwise.
pub const DEFAULT_DENSE_CAP: usize = 5000;

fn check(a: MatRef<'_, f64>, k: usize, cap: usize) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    if a.nrows() > cap {
        return Err(Error::DimensionCap { dim: a.nrows(), cap });
    }
    if k == 0 || k > a.nrows() {
        return Err(Error::invalid("k", format!("must lie in 1..={}", a.nrows())));
    }
    Ok(())
}

/// All eigenvalues of a dense symmetric matrix, ascending.
pub fn dense_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::Decomposition)
}

fn residuals(a: MatRef<'_, f64>, values: &[f64], vectors: &Mat<f64>, weight: Option<MatRef<'_, f64>>) -> Vec<f64> {
    let av = a * vectors.as_ref();
    let wv = match weight {
        Some(w) => w * vectors.as_ref(),
        None => vectors.clone(),
    };
    (0..values.len())
        .map(|i| (0..a.nrows()).map(|r| (av[(r, i)] - values[i] * wv[(r, i)]).powi(2)).sum::<f64>().sqrt())
        .collect()
}

/// Full dense eigendecomposition truncated to the lowest `k` pairs.
pub fn dense_oracle(a: MatRef<'_, f64>, k: usize, cap: usize) -> Result<EigenSolution> {
    check(a, k, cap)?;
    let start = Instant::now();
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Decomposition)?;
    let eigenvalues: Vec<f64> = (0..k).map(|i| evd.S()[i]).collect();
    let eigenvectors = evd.U().subcols(0, k).to_owned();
    drop(evd);
    let residuals = residuals(a, &eigenvalues, &eigenvectors, None);
    let mut sol = EigenSolution {
        eigenvalues,
        eigenvectors,
        residuals,
        stats: SolverStats { method: "dense".into(), wall_time_s: start.elapsed().as_secs_f64(), ..Default::default() },
    };
    canonicalize(&mut sol);
    Ok(sol)
}

/// Dense solve of a sparse matrix with residuals from sparse products.
///
/// Used by the spectrum driver for blocks too large for a dense residual
/// check to be cheap.
pub(crate) fn dense_sparse(matrix: &CsrMatrix, k: usize, cap: usize) -> Result<EigenSolution> {
    let start = Instant::now();
    let a = matrix.to_dense();
    check(a.as_ref(), k, cap)?;
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Decomposition)?;
    drop(a);
    let eigenvalues: Vec<f64> = (0..k).map(|i| evd.S()[i]).collect();
    let eigenvectors = evd.U().subcols(0, k).to_owned();
    drop(evd);
    let residuals = verify_residuals(matrix, &eigenvalues, &eigenvectors);
    let mut sol = EigenSolution {
        eigenvalues,
        eigenvectors,
        residuals,
        stats: SolverStats { method: "dense".into(), wall_time_s: start.elapsed().as_secs_f64(), ..Default::default() },
    };
    canonicalize(&mut sol);
    Ok(sol)
}

/// Dense `A v = λ W v` for symmetric `A` and symmetric positive definite
/// `W`, reduced through the Cholesky factor of `W`.
///
/// Residuals are `‖A v − λ W v‖` in the `W⁻¹` norm.
pub fn dense_generalized_oracle(a: MatRef<'_, f64>, w: MatRef<'_, f64>, k: usize, cap: usize) -> Result<EigenSolution> {
    check(a, k, cap)?;
    if w.nrows() != a.nrows() || w.ncols() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: w.nrows() });
    }
    let start = Instant::now();
    let llt = w.llt(Side::Lower).map_err(|_| Error::invalid("W", "not positive definite"))?;
    let l = llt.L().to_owned();
    // C = L⁻¹ A L⁻ᵀ
    let mut c = a.to_owned();
    solve_lower_triangular_in_place(l.as_ref(), c.as_mut(), Par::Seq);
    let mut c = c.transpose().to_owned();
    solve_lower_triangular_in_place(l.as_ref(), c.as_mut(), Par::Seq);
    let evd = c.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Decomposition)?;
    let eigenvalues: Vec<f64> = (0..k).map(|i| evd.S()[i]).collect();
    let mut eigenvectors = evd.U().subcols(0, k).to_owned();
    solve_upper_triangular_in_place(l.transpose(), eigenvectors.as_mut(), Par::Seq);

    // ‖r‖_{W⁻¹} = ‖L⁻¹ r‖
    let mut r = a * eigenvectors.as_ref() - w * eigenvectors.as_ref() * faer::Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j { eigenvalues[i] } else { 0.0 }
    });
    solve_lower_triangular_in_place(l.as_ref(), r.as_mut(), Par::Seq);
    let residuals = (0..k).map(|i| r.col_as_slice(i).iter().map(|x| x * x).sum::<f64>().sqrt()).collect();

    let mut sol = EigenSolution {
        eigenvalues,
        eigenvectors,
        residuals,
        stats: SolverStats {
            method: "dense-generalized".into(),
            wall_time_s: start.elapsed().as_secs_f64(),
            ..Default::default()
        },
    };
    canonicalize(&mut sol);
    Ok(sol)
}
