//! Fixed-separation eigenvalues in prolate spheroidal coordinates and the
//! effective potential `V(R) = 4λ(R)/R` they induce.

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{dense_eigenvalues, solve_lowest_generalized, LanczosOptions};
use crate::error::{Error, Result};
use crate::grid::{make_box_grid, AxisName};
use crate::operators::{build_prolate_fixed_r, CsrMatrix};
use crate::spectrum::SolverMethod;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuasistaticOptions {
    pub n_xi: usize,
    pub n_eta: usize,
    /// Initial `R (ξ_max − 1)`, the outer wall distance in units of `R/2`.
    pub initial_extent: f64,
    /// Accept once the lowest `λ` moves by less than this fraction.
    pub rel_tol: f64,
    pub max_doublings: usize,
    pub method: SolverMethod,
    pub dense_limit: usize,
    pub tol: f64,
    pub lanczos: LanczosOptions,
}

impl Default for QuasistaticOptions {
    fn default() -> Self {
        Self {
            n_xi: 60,
            n_eta: 30,
            initial_extent: 20.0,
            rel_tol: 1e-3,
            max_doublings: 6,
            method: SolverMethod::Auto,
            dense_limit: 600,
            tol: 1e-10,
            lanczos: LanczosOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaResult {
    /// Ascending.
    pub lambda: Vec<f64>,
    pub xi_max: f64,
    pub n_xi: usize,
    pub doublings: usize,
    /// Change of the lowest `λ` over the last doubling.
    pub shift: f64,
}

fn scaled(a: &CsrMatrix, w: &CsrMatrix) -> CsrMatrix {
    let s: Vec<f64> = w.diagonal().iter().map(|d| 1.0 / d.sqrt()).collect();
    let rows = (0..a.dim()).map(|i| a.row(i).filter(|&(j, _)| j >= i).map(|(j, v)| (j, v * s[i] * s[j])).collect()).collect();
    CsrMatrix::from_upper_rows(rows)
}

/// Lowest `count` eigenvalues of the fixed-`R` pair on one `(ξ, η)` grid.
pub fn lambda_on_grid(r: f64, z: f64, count: usize, xi_max: f64, n_xi: usize, opts: &QuasistaticOptions) -> Result<Vec<f64>> {
    let grid = make_box_grid(&[(AxisName::Xi, 1.0, xi_max, n_xi), (AxisName::Eta, -1.0, 1.0, opts.n_eta)])?;
    let (a, w) = build_prolate_fixed_r(&grid, r, z, 0)?;
    let n = a.dimension();
    if count == 0 || count >= n {
        return Err(Error::invalid("beta_count", format!("must lie in 1..{n}")));
    }
    let dense = match opts.method {
        SolverMethod::Dense => true,
        SolverMethod::Lanczos => false,
        SolverMethod::Auto => n <= opts.dense_limit,
    };
    if dense {
        let all = dense_eigenvalues(&scaled(&a.matrix, &w.matrix).to_dense())?;
        Ok(all[..count].to_vec())
    } else {
        Ok(solve_lowest_generalized(&a.matrix, &w.matrix, count, opts.tol, &opts.lanczos)?.eigenvalues)
    }
}

/// Lowest `beta_count` fixed-separation eigenvalues with the outer wall
/// pushed out until the lowest one settles.
///
/// Each doubling doubles both `ξ_max − 1` and the number of `ξ` points.
pub fn lambda_of_r(r: f64, z: f64, beta_count: usize, opts: &QuasistaticOptions) -> Result<LambdaResult> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("R", "must be positive"));
    }
    let mut extent = opts.initial_extent / r;
    let mut n_xi = opts.n_xi;
    let mut prev = lambda_on_grid(r, z, beta_count, 1.0 + extent, n_xi, opts)?;
    for doublings in 1..=opts.max_doublings {
        extent *= 2.0;
        n_xi *= 2;
        let next = lambda_on_grid(r, z, beta_count, 1.0 + extent, n_xi, opts)?;
        let shift = (next[0] - prev[0]).abs();
        debug!("R = {r}: ξ_max = {}, λ₀ = {}, shift {shift:e}", 1.0 + extent, next[0]);
        if shift < opts.rel_tol * next[0].abs().max(1e-3) {
            return Ok(LambdaResult { lambda: next, xi_max: 1.0 + extent, n_xi, doublings, shift });
        }
        prev = next;
    }
    Err(Error::Truncation { r, doublings: opts.max_doublings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectivePotentialCurve {
    pub z: f64,
    /// Ascending.
    pub r_values: Vec<f64>,
    /// `lambda[i][β]` at `r_values[i]`.
    pub lambda: Vec<Vec<f64>>,
    /// `4 λ / R`, same layout as `lambda`.
    pub v_eff: Vec<Vec<f64>>,
    pub xi_max: Vec<f64>,
    pub shift: Vec<f64>,
    pub repulsive_at_origin: bool,
}

/// True iff the lowest curve rises strictly as `R` decreases through the
/// three smallest separations.
pub fn repulsive_at_origin(v_eff: &[Vec<f64>]) -> bool {
    v_eff.len() >= 3 && v_eff[0][0] > v_eff[1][0] && v_eff[1][0] > v_eff[2][0]
}

/// `n` logarithmically spaced separations from `r_min` to `r_max`.
pub fn log_r_grid(r_min: f64, r_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_max > r_min && n >= 2) {
        return Err(Error::invalid("R grid", "need 0 < r_min < r_max and at least two points"));
    }
    let (a, b) = (r_min.ln(), r_max.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

/// Fixed-separation eigenvalues and effective potentials over `r_list`,
/// computed in parallel.
pub fn effective_potential_scan(
    r_list: &[f64],
    z: f64,
    beta_count: usize,
    opts: &QuasistaticOptions,
) -> Result<EffectivePotentialCurve> {
    if r_list.is_empty() || r_list.iter().any(|&r| !(r.is_finite() && r > 0.0)) {
        return Err(Error::invalid("R list", "must be non-empty and positive"));
    }
    if r_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("R list", "must be strictly ascending"));
    }
    let rows = r_list.par_iter().map(|&r| lambda_of_r(r, z, beta_count, opts)).collect::<Result<Vec<_>>>()?;
    let v_eff: Vec<Vec<f64>> =
        rows.iter().zip(r_list).map(|(row, &r)| row.lambda.iter().map(|l| 4.0 * l / r).collect()).collect();
    Ok(EffectivePotentialCurve {
        z,
        r_values: r_list.to_vec(),
        repulsive_at_origin: repulsive_at_origin(&v_eff),
        xi_max: rows.iter().map(|r| r.xi_max).collect(),
        shift: rows.iter().map(|r| r.shift).collect(),
        lambda: rows.into_iter().map(|r| r.lambda).collect(),
        v_eff,
    })
}
