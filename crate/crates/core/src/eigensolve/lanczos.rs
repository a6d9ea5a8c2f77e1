//! Thick-restart block Lanczos with full reorthogonalization.
//!
//! The basis `V` and projected matrix `T` satisfy
//! `A V_j = V_j T_j + Q R E_lastᵀ` between restarts, where `Q` is the next
//! block and `R` its coupling to the last expanded block. A restart keeps
//! the lowest `p` Ritz vectors, for which `T` becomes `diag(θ)` bordered by
//! `R·Y_last`.
//!
//! Public entry points run it on the shift-inverted pencil and finish with
//! a Rayleigh–Ritz step on the original one.

use std::time::Instant;

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::linalg::LltError;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Accum, Mat, MatRef, Par, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{canonicalize, dense_generalized_oracle, dot, verify_residuals, EigenSolution, LinearOperator, SolverStats};
use crate::error::{Error, Result};
use crate::operators::CsrMatrix;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct LanczosOptions {
    pub block_size: usize,
    /// Basis columns kept between restarts; defaults to about `2k`.
    pub max_basis: Option<usize>,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { block_size: 8, max_basis: None, max_restarts: 500, seed: 20_240_611 }
    }
}

/// Lowest `k` eigenpairs of a sparse symmetric matrix with
/// `‖A v − λ v‖ ≤ tol`.
pub fn solve_lowest(a: &CsrMatrix, k: usize, tol: f64, opts: &LanczosOptions) -> Result<EigenSolution> {
    shift_invert(a, &vec![1.0; a.dim()], k, tol, opts, "lanczos")
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("tol", "must be positive"))
    }
}

/// `−W^{1/2} (A − σW)^{-1} W^{1/2}`: eigenvalue `−1/(λ − σ)` for each pair
/// of the pencil, so the pairs just above `σ` come out lowest.
struct ShiftInvert<'a> {
    factor: &'a Llt<usize, f64>,
    root: &'a [f64],
}

impl ShiftInvert<'_> {
    /// `(A − σW)^{-1} W^{1/2} x`
    fn lift(&self, x: &[f64]) -> Mat<f64> {
        let mut rhs = Mat::<f64>::from_fn(x.len(), 1, |i, _| x[i] * self.root[i]);
        self.factor.solve_in_place(rhs.as_mut());
        rhs
    }
}

impl LinearOperator for ShiftInvert<'_> {
    fn dim(&self) -> usize {
        self.root.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let z = self.lift(x);
        for ((out, v), r) in y.iter_mut().zip(z.col_as_slice(0)).zip(self.root) {
            *out = -v * r;
        }
    }
}

fn shifted_factor(a: &CsrMatrix, w: &[f64], sigma: f64, symbolic: &SymbolicLlt<usize>) -> Result<Option<Llt<usize, f64>>> {
    let n = a.dim();
    let mut entries = Vec::with_capacity(a.nnz());
    for i in 0..n {
        for (j, v) in a.row(i).filter(|&(j, _)| j >= i) {
            let v = if j == i { v - sigma * w[i] } else { v };
            entries.push(Triplet::new(j, i, v));
        }
    }
    let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &entries).map_err(|_| Error::Decomposition)?;
    match Llt::try_new_with_symbolic(symbolic.clone(), m.as_ref(), Side::Lower) {
        Ok(f) => Ok(Some(f)),
        Err(LltError::Numeric(_)) => Ok(None),
        Err(LltError::Generic(_)) => Err(Error::Decomposition),
    }
}

/// A shift a few percent (of the eigenvalue scale) below the lowest
/// eigenvalue of `A v = λ W v`, its Cholesky factor and the reusable
/// symbolic factorization.
///
/// The bracket starts from Gershgorin on `W^{-1/2} A W^{-1/2}` (below) and
/// the smallest diagonal Rayleigh quotient (above) and is bisected on
/// whether `A − σW` is positive definite.
fn lower_shift(a: &CsrMatrix, w: &[f64]) -> Result<(f64, Llt<usize, f64>, SymbolicLlt<usize>)> {
    let n = a.dim();
    let mut lo = f64::INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..n {
        let mut centre = 0.0;
        let mut radius = 0.0;
        for (j, v) in a.row(i) {
            if j == i {
                centre = v / w[i];
            } else {
                radius += v.abs() / (w[i] * w[j]).sqrt();
            }
        }
        lo = lo.min(centre - radius);
        hi = hi.min(centre);
    }
    let pattern: Vec<Triplet<usize, usize, f64>> = (0..n)
        .flat_map(|i| a.row(i).filter(move |&(j, _)| j >= i).map(move |(j, _)| Triplet::new(j, i, 1.0)))
        .collect();
    let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &pattern).map_err(|_| Error::Decomposition)?;
    let symbolic = SymbolicLlt::try_new(m.symbolic(), Side::Lower).map_err(|_| Error::Decomposition)?;

    let floor = (1e-6 * (hi - lo)).max(f64::MIN_POSITIVE.sqrt());
    let scale = |lo: f64, hi: f64| hi.abs().max(lo.abs()).max(floor);
    // rounding can leave the Gershgorin bound a hair too high
    let mut step = scale(lo, hi) * 0.02;
    let mut sigma = lo;
    while shifted_factor(a, w, sigma, &symbolic)?.is_none() {
        sigma -= step;
        step *= 2.0;
        if !sigma.is_finite() {
            return Err(Error::Decomposition);
        }
    }
    lo = sigma;
    for _ in 0..60 {
        if hi - lo <= 0.02 * scale(lo, hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match shifted_factor(a, w, mid, &symbolic)? {
            Some(_) => lo = mid,
            None => hi = mid,
        }
    }
    // keep clear of λ₁ so the transformed spectrum stays well conditioned
    let sigma = lo - 0.02 * scale(lo, hi);
    let factor = shifted_factor(a, w, sigma, &symbolic)?.ok_or(Error::Decomposition)?;
    Ok((sigma, factor, symbolic))
}

/// Rayleigh–Ritz on the span of `x` for the pencil `(A, W)`: `W`-orthonormal
/// combinations and their Ritz values, ascending.
fn rayleigh_ritz(a: &CsrMatrix, w: &[f64], mut x: Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let (n, k) = (x.nrows(), x.ncols());
    // unit columns keep the projected pencil well conditioned
    for c in 0..k {
        let nrm = x.col_as_slice(c).iter().zip(w).map(|(v, d)| v * v * d).sum::<f64>().sqrt();
        if nrm.is_nan() || nrm <= 0.0 {
            return Err(Error::Decomposition);
        }
        x.col_as_slice_mut(c).iter_mut().for_each(|v| *v /= nrm);
    }
    let wx = Mat::<f64>::from_fn(n, k, |i, c| w[i] * x[(i, c)]);
    let mut ax = Mat::<f64>::zeros(n, k);
    for c in 0..k {
        a.apply(x.col_as_slice(c), ax.col_as_slice_mut(c));
    }
    let sym = |m: Mat<f64>| Mat::<f64>::from_fn(k, k, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let g = sym(x.transpose() * &wx);
    let h = sym(x.transpose() * &ax);
    let small = dense_generalized_oracle(h.as_ref(), g.as_ref(), k, usize::MAX)?;
    Ok((small.eigenvalues, &x * &small.eigenvectors))
}

/// `‖W^{-1/2}(A x − λ W x)‖` per column.
fn generalized_residuals(a: &CsrMatrix, w: &[f64], values: &[f64], x: &Mat<f64>) -> Vec<f64> {
    let mut ax = vec![0.0; x.nrows()];
    values
        .iter()
        .enumerate()
        .map(|(c, &l)| {
            let col = x.col_as_slice(c);
            a.apply(col, &mut ax);
            ax.iter().zip(col).zip(w).map(|((y, v), d)| (y - l * d * v).powi(2) / d).sum::<f64>().sqrt()
        })
        .collect()
}

/// Lowest `k` pairs of `A v = λ W v` with diagonal positive `W`.
///
/// Vectors are `W`-orthonormal; residuals are measured in the `W⁻¹` norm.
pub fn solve_lowest_generalized(
    a: &CsrMatrix,
    w: &CsrMatrix,
    k: usize,
    tol: f64,
    opts: &LanczosOptions,
) -> Result<EigenSolution> {
    if w.dim() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: w.dim() });
    }
    if !w.is_diagonal() {
        return Err(Error::invalid("W", "must be diagonal"));
    }
    let diag = w.diagonal();
    if let Some((index, &value)) = diag.iter().enumerate().find(|(_, d)| !(d.is_finite() && **d > 0.0)) {
        return Err(Error::InvalidWeight { index, value });
    }
    shift_invert(a, &diag, k, tol, opts, "lanczos-generalized")
}

/// Lanczos on the shift-inverted pencil with `σ` just below the lowest
/// eigenvalue. Plain Lanczos on these operators has to resolve the low end
/// of a very wide spectrum (and, for the prolate pair, `W` nearly vanishes
/// at the focal corners); after the transform the wanted pairs are the
/// extremal, well separated ones.
fn shift_invert(
    a: &CsrMatrix,
    diag: &[f64],
    k: usize,
    tol: f64,
    opts: &LanczosOptions,
    method: &str,
) -> Result<EigenSolution> {
    check_tol(tol)?;
    let n = a.dim();
    if k == 0 || k >= n {
        return Err(Error::invalid("k", format!("must lie in 1..{n}")));
    }
    let start = Instant::now();
    let root: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
    let (mut sigma, mut factor, symbolic) = lower_shift(a, diag)?;
    let mut matvecs = 0;
    let mut restarts = 0;
    let mut iterations = 0;
    for pass in 0..2 {
        let op = ShiftInvert { factor: &factor, root: &root };
        // inner residual r maps to about r/ν² on the pencil
        let inner = match krylov_schur(&op, k, &|theta| 0.1 * tol * theta * theta, opts) {
            Ok(sol) => sol,
            Err(Error::NotConverged { partial, .. }) => *partial,
            Err(e) => return Err(e),
        };
        matvecs += inner.stats.matvecs;
        restarts += inner.stats.restarts;
        iterations += inner.stats.iterations;
        let mut x = Mat::<f64>::zeros(n, k);
        for c in 0..k {
            x.col_as_slice_mut(c).copy_from_slice(op.lift(inner.vector(c)).col_as_slice(0));
        }
        let (eigenvalues, eigenvectors) = rayleigh_ritz(a, diag, x)?;
        let residuals = generalized_residuals(a, diag, &eigenvalues, &eigenvectors);
        let stats = SolverStats {
            method: method.into(),
            iterations,
            restarts,
            matvecs,
            wall_time_s: start.elapsed().as_secs_f64(),
            seed: Some(opts.seed),
        };
        let mut sol = EigenSolution { eigenvalues, eigenvectors, residuals, stats };
        canonicalize(&mut sol);
        let converged = sol.residuals.iter().filter(|&&r| r <= tol).count();
        if converged == k {
            return Ok(sol);
        }
        // A shift close to λ₁ resolves the far end of a wide window only to
        // about eps·(λ_k − σ)²/(λ₁ − σ); move it as far below as the window
        // is wide and go again.
        let (l1, lk) = (sol.eigenvalues[0], sol.eigenvalues[k - 1]);
        let target = l1 - (lk - l1).max(l1 - sigma);
        if pass == 1 || target >= sigma {
            let worst_residual = sol.worst_residual();
            return Err(Error::NotConverged { converged, requested: k, worst_residual, partial: Box::new(sol) });
        }
        sigma = target;
        factor = shifted_factor(a, diag, sigma, &symbolic)?.ok_or(Error::Decomposition)?;
    }
    unreachable!("the second pass always returns")
}

/// Classical Gram–Schmidt of `w` against `v`, applied twice. Returns the
/// accumulated coefficients `vᵀ w`.
fn project_out(v: MatRef<'_, f64>, w: &mut Mat<f64>) -> Mat<f64> {
    let mut h = Mat::<f64>::zeros(v.ncols(), w.ncols());
    if v.ncols() == 0 {
        return h;
    }
    for _ in 0..2 {
        let c = v.transpose() * w.as_ref();
        matmul(w.as_mut(), Accum::Add, v, c.as_ref(), -1.0, Par::Seq);
        h += &c;
    }
    h
}

fn random_unit(n: usize, v: MatRef<'_, f64>, q: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut w = Mat::<f64>::from_fn(n, 1, |_, _| rng.random_range(-1.0..1.0));
        project_out(v, &mut w);
        let mut x = w.col_as_slice(0).to_vec();
        for _ in 0..2 {
            for qi in q {
                let c = dot(qi, &x);
                x.iter_mut().zip(qi).for_each(|(a, b)| *a -= c * b);
            }
        }
        let nrm = dot(&x, &x).sqrt();
        if nrm > 1e-8 {
            x.iter_mut().for_each(|a| *a /= nrm);
            return x;
        }
    }
}

/// Orthonormalizes the columns of `w` (already orthogonal to `v`) into
/// `width` new basis vectors and the coupling `R` with `w ≈ Q R`.
fn block_qr(
    w: &Mat<f64>,
    scale: &[f64],
    width: usize,
    v: MatRef<'_, f64>,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<f64>>, Mat<f64>) {
    let n = w.nrows();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(width);
    let mut r = Mat::<f64>::zeros(width, w.ncols());
    for c in 0..w.ncols() {
        let mut x = w.col_as_slice(c).to_vec();
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let coef = dot(qi, &x);
                x.iter_mut().zip(qi).for_each(|(a, b)| *a -= coef * b);
                r[(i, c)] += coef;
            }
        }
        let nrm = dot(&x, &x).sqrt();
        if q.len() < width && nrm > 1e-12 * scale[c].max(f64::MIN_POSITIVE) {
            r[(q.len(), c)] = nrm;
            x.iter_mut().for_each(|a| *a /= nrm);
            q.push(x);
        }
    }
    while q.len() < width {
        let x = random_unit(n, v, &q, rng);
        q.push(x);
    }
    (q, r)
}

/// `tol` maps a Ritz value to the residual it must reach.
fn krylov_schur(
    op: &dyn LinearOperator,
    k: usize,
    tol: &dyn Fn(f64) -> f64,
    opts: &LanczosOptions,
) -> Result<EigenSolution> {
    let n = op.dim();
    if k == 0 || k >= n {
        return Err(Error::invalid("k", format!("must lie in 1..{n}")));
    }
    let start = Instant::now();
    let b = opts.block_size.clamp(1, n);
    let m = opts.max_basis.unwrap_or((2 * k).max(k + 4 * b)).max(k + 2 * b).min(n);
    let cap = (m + 2 * b).min(n);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v = Mat::<f64>::zeros(n, cap);
    let mut t = Mat::<f64>::zeros(cap, cap);
    let mut stats = SolverStats { method: "lanczos".into(), seed: Some(opts.seed), ..Default::default() };

    let start_block = Mat::<f64>::from_fn(n, b, |_, _| rng.random_range(-1.0..1.0));
    let ones = vec![1.0; b];
    let (q, _) = block_qr(&start_block, &ones, b, v.subcols(0, 0), &mut rng);
    for (c, col) in q.iter().enumerate() {
        v.col_as_slice_mut(c).copy_from_slice(col);
    }
    let mut nb = b;
    let mut j = 0;
    let mut r_last = Mat::<f64>::zeros(0, 0);
    let mut last_start = 0;

    loop {
        while j < nb && j < m {
            let bs = nb - j;
            let mut w = Mat::<f64>::zeros(n, bs);
            for c in 0..bs {
                op.apply(v.col_as_slice(j + c), w.col_as_slice_mut(c));
            }
            stats.matvecs += bs;
            let scale: Vec<f64> = (0..bs).map(|c| dot(w.col_as_slice(c), w.col_as_slice(c)).sqrt()).collect();
            let h = project_out(v.subcols(0, nb), &mut w);
            for c in 0..bs {
                for row in 0..nb {
                    t[(row, j + c)] = h[(row, c)];
                    t[(j + c, row)] = h[(row, c)];
                }
            }
            for a in 0..bs {
                for c in a + 1..bs {
                    let s = 0.5 * (h[(j + a, c)] + h[(j + c, a)]);
                    t[(j + a, j + c)] = s;
                    t[(j + c, j + a)] = s;
                }
            }
            let width = b.min(cap - nb);
            let (q, r) = block_qr(&w, &scale, width, v.subcols(0, nb), &mut rng);
            for (c, col) in q.iter().enumerate() {
                v.col_as_slice_mut(nb + c).copy_from_slice(col);
            }
            r_last = r;
            last_start = j;
            j = nb;
            nb += width;
            stats.iterations += 1;
        }

        let tj = t.submatrix(0, 0, j, j).to_owned();
        let evd = tj.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Decomposition)?;
        let theta: Vec<f64> = (0..j).map(|i| evd.S()[i]).collect();
        let y = evd.U().to_owned();
        let bs = j - last_start;
        let y_last = y.submatrix(last_start, 0, bs, j);
        let coupling = if r_last.nrows() > 0 { &r_last * y_last } else { Mat::<f64>::zeros(0, j) };
        let estimate = |i: usize| -> f64 { (0..coupling.nrows()).map(|a| coupling[(a, i)].powi(2)).sum::<f64>().sqrt() };

        let done = (0..k).all(|i| estimate(i) <= tol(theta[i]));
        let out_of_budget = stats.restarts >= opts.max_restarts;
        if done || out_of_budget || nb == j {
            let x = v.subcols(0, j) * y.subcols(0, k);
            let residuals = verify_residuals(op, &theta[..k], &x);
            stats.wall_time_s = start.elapsed().as_secs_f64();
            let sol = EigenSolution { eigenvalues: theta[..k].to_vec(), eigenvectors: x, residuals, stats: stats.clone() };
            let converged = sol.residuals.iter().zip(&sol.eigenvalues).filter(|&(&r, &l)| r <= tol(l)).count();
            if converged == k {
                return Ok(sol);
            }
            if out_of_budget || nb == j {
                let worst_residual = sol.worst_residual();
                return Err(Error::NotConverged { converged, requested: k, worst_residual, partial: Box::new(sol) });
            }
        }

        // thick restart
        let p = ((k + m) / 2).clamp(k, m - b).min(j - 1);
        let kept = v.subcols(0, j) * y.subcols(0, p);
        let width = nb - j;
        for c in 0..width {
            let col = v.col_as_slice(j + c).to_vec();
            v.col_as_slice_mut(p + c).copy_from_slice(&col);
        }
        for c in 0..p {
            v.col_as_slice_mut(c).copy_from_slice(kept.col_as_slice(c));
        }
        t.fill(0.0);
        for i in 0..p {
            t[(i, i)] = theta[i];
        }
        for a in 0..width {
            for i in 0..p {
                t[(p + a, i)] = coupling[(a, i)];
                t[(i, p + a)] = coupling[(a, i)];
            }
        }
        j = p;
        nb = p + width;
        stats.restarts += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{dense_oracle, DEFAULT_DENSE_CAP};
    use crate::grid::{make_box_grid, Axis, AxisName, GridSpec, OffsetPolicy};
    use crate::operators::{build_hamiltonian, build_laplacian, HamiltonianSpec};
    use crate::potentials::{PotentialForm, PotentialSpec};

    #[test]
    fn diagonal_matrix_k1() {
        let d: Vec<f64> = (0..50).map(|i| ((i * 37) % 50) as f64 + 1.0).collect();
        let m = CsrMatrix::from_diagonal(&d);
        let sol = solve_lowest(&m, 1, 1e-10, &LanczosOptions::default()).unwrap();
        assert!((sol.eigenvalues[0] - 1.0).abs() < 1e-12);
        let v = sol.vector(0);
        let at = d.iter().position(|&x| x == 1.0).unwrap();
        assert!((v[at] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn node_centered_laplacian_matches_dispersion() {
        let axis = Axis::new(AxisName::X, 0.0, 1.0, 100, OffsetPolicy::NodeCentered).unwrap();
        let h = axis.spacing();
        let grid = GridSpec::new(vec![axis]).unwrap();
        let op = build_laplacian(&grid, &[1.0]).unwrap();
        let sol = solve_lowest(&op.matrix, 5, 1e-9, &LanczosOptions::default()).unwrap();
        for (i, &lam) in sol.eigenvalues.iter().enumerate() {
            let theta = (i + 1) as f64 * std::f64::consts::PI * h;
            let exact = (30.0 - 32.0 * theta.cos() + 2.0 * (2.0 * theta).cos()) / (12.0 * h * h);
            assert!((lam - exact).abs() <= 1e-8 * exact, "{i}: {lam} vs {exact}");
        }
    }

    #[test]
    fn planar_40x40_matches_dense() {
        let grid = make_box_grid(&[(AxisName::R, -15.0, 15.0, 40), (AxisName::X, -15.0, 15.0, 40)]).unwrap();
        let op = build_hamiltonian(&HamiltonianSpec::new(PotentialSpec::new(PotentialForm::Planar2Var, 1.0), 0.00027), &grid)
            .unwrap();
        let sol = solve_lowest(&op.matrix, 200, 1e-9, &LanczosOptions::default()).unwrap();
        let dense = dense_oracle(op.matrix.to_dense().as_ref(), 200, DEFAULT_DENSE_CAP).unwrap();
        for i in 0..200 {
            let (a, b) = (sol.eigenvalues[i], dense.eigenvalues[i]);
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-300), "{i}: {a} vs {b}");
        }
        assert!(sol.worst_residual() <= 1e-8);
        assert!(sol.orthonormality_defect() <= 1e-10);
    }

    #[test]
    fn deterministic_under_seed() {
        let grid = make_box_grid(&[(AxisName::R, -5.0, 5.0, 16), (AxisName::X, -5.0, 5.0, 16)]).unwrap();
        let op = build_hamiltonian(&HamiltonianSpec::new(PotentialSpec::new(PotentialForm::Planar2Var, 1.0), 0.01), &grid)
            .unwrap();
        let opts = LanczosOptions { seed: 99, ..Default::default() };
        let a = solve_lowest(&op.matrix, 12, 1e-10, &opts).unwrap();
        let b = solve_lowest(&op.matrix, 12, 1e-10, &opts).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.stats.seed, Some(99));
    }

    #[test]
    fn generalized_identity_weight_is_standard() {
        let grid = make_box_grid(&[(AxisName::R, -5.0, 5.0, 12), (AxisName::X, -5.0, 5.0, 12)]).unwrap();
        let op = build_hamiltonian(&HamiltonianSpec::new(PotentialSpec::new(PotentialForm::Planar2Var, 1.0), 0.05), &grid)
            .unwrap();
        let opts = LanczosOptions::default();
        let w = CsrMatrix::from_diagonal(&vec![1.0; op.dimension()]);
        let g = solve_lowest_generalized(&op.matrix, &w, 6, 1e-10, &opts).unwrap();
        let s = solve_lowest(&op.matrix, 6, 1e-10, &opts).unwrap();
        for i in 0..6 {
            assert!((g.eigenvalues[i] - s.eigenvalues[i]).abs() <= 1e-12 * s.eigenvalues[i].abs().max(1.0));
        }
        let w3 = CsrMatrix::from_diagonal(&vec![3.0; op.dimension()]);
        let g3 = solve_lowest_generalized(&op.matrix, &w3, 6, 1e-10, &opts).unwrap();
        for i in 0..6 {
            assert!((g3.eigenvalues[i] - s.eigenvalues[i] / 3.0).abs() <= 1e-12 * s.eigenvalues[i].abs().max(1.0));
        }
    }

    #[test]
    fn generalized_rejects_bad_weights() {
        let m = CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let w = CsrMatrix::from_diagonal(&[1.0, 0.0, 1.0, 1.0]);
        let r = solve_lowest_generalized(&m, &w, 1, 1e-10, &LanczosOptions::default());
        assert!(matches!(r, Err(Error::InvalidWeight { index: 1, .. })));
    }

    #[test]
    fn budget_exhaustion_returns_partial() {
        let grid = make_box_grid(&[(AxisName::R, -5.0, 5.0, 30), (AxisName::X, -5.0, 5.0, 30)]).unwrap();
        let op = build_hamiltonian(&HamiltonianSpec::new(PotentialSpec::new(PotentialForm::Planar2Var, 1.0), 0.01), &grid)
            .unwrap();
        let opts = LanczosOptions { max_restarts: 0, block_size: 2, max_basis: Some(24), ..Default::default() };
        match solve_lowest(&op.matrix, 10, 1e-12, &opts) {
            Err(Error::NotConverged { partial, requested, .. }) => {
                assert_eq!(requested, 10);
                assert_eq!(partial.k(), 10);
            }
            other => panic!("expected a convergence error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_k() {
        let m = CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        assert!(solve_lowest(&m, 0, 1e-8, &LanczosOptions::default()).is_err());
        assert!(solve_lowest(&m, 3, 1e-8, &LanczosOptions::default()).is_err());
    }

    #[test]
    fn tiny_problem_spans_whole_space() {
        let m = CsrMatrix::from_diagonal(&[5.0, 4.0, 3.0, 2.0, 1.0]);
        let sol = solve_lowest(&m, 4, 1e-12, &LanczosOptions::default()).unwrap();
        for (i, &l) in sol.eigenvalues.iter().enumerate() {
            assert!((l - (i + 1) as f64).abs() < 1e-12);
        }
    }
}
