use super::stencil::{Conservative, Edge, Rows};
use super::{CsrMatrix, OperatorMeta, SparseOperator};
use crate::error::{Error, Result};
use crate::grid::{AxisName, GridSpec};
use crate::potentials::{eval_potential, PotentialForm, PotentialSpec};

/// Generalized pair `(A, W)` of the fixed-separation problem on a `(ξ, η)`
/// grid, so that `A v = λ W v`.
///
/// `A = −(1/R)(∂_ξ(ξ²−1)∂_ξ + ∂_η(1−η²)∂_η) + (Z(ξ²−η²) − 4ξ)/4` and
/// `W = ξ² − η²`, both multiplied by the cell area. Edges at `ξ = 1` and
/// `|η| = 1` are natural; the outer `ξ` edge is a Dirichlet wall.
pub fn build_prolate_fixed_r(grid: &GridSpec, r: f64, z: f64, alpha: i32) -> Result<(SparseOperator, SparseOperator)> {
    if alpha != 0 {
        return Err(Error::invalid("alpha", "only the axially symmetric sector is supported"));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("R", "must be positive"));
    }
    let names: Vec<AxisName> = grid.axes.iter().map(|a| a.name).collect();
    if names != [AxisName::Xi, AxisName::Eta] {
        return Err(Error::invalid("grid", format!("prolate operator needs axes [xi, eta], got {names:?}")));
    }
    let xi = &grid.axes[0];
    let eta = &grid.axes[1];
    if xi.min < 1.0 || eta.min < -1.0 || eta.max > 1.0 {
        return Err(Error::invalid("grid", "need ξ ≥ 1 and η ∈ [−1, 1]"));
    }
    let xs = xi.points();
    let es = eta.points();
    if xs[0] <= 1.0 || es[0] <= -1.0 || es[eta.n - 1] >= 1.0 {
        return Err(Error::invalid("grid", "stored points touch ξ = 1 or |η| = 1"));
    }

    let edge = |natural: bool| if natural { Edge::Natural } else { Edge::Dirichlet };
    let xi_rows = Conservative {
        axis: xi,
        coeff: &|s: f64| s * s - 1.0,
        lower: edge(xi.min == 1.0),
        upper: Edge::Dirichlet,
        cut: None,
    }
    .rows();
    let eta_rows = Conservative {
        axis: eta,
        coeff: &|s: f64| 1.0 - s * s,
        lower: edge(eta.min == -1.0),
        upper: edge(eta.max == 1.0),
        cut: None,
    }
    .rows();

    let area = grid.cell_volume();
    let spec = PotentialSpec::new(PotentialForm::ProlateFixedR, z);
    let n_eta = eta.n;
    let scale = |rows: &Rows, i: usize| -> Vec<(usize, f64)> {
        rows[i].iter().filter(|&&(j, _)| j >= i).map(|&(j, v)| (j, v * area / r)).collect()
    };
    let mut upper = Vec::with_capacity(grid.total_points());
    let mut weight = Vec::with_capacity(grid.total_points());
    for (a, &x) in xs.iter().enumerate() {
        let xi_part = scale(&xi_rows, a);
        for (b, &e) in es.iter().enumerate() {
            let k = a * n_eta + b;
            let w = x * x - e * e;
            // (Z/4 − ξ/(ξ²−η²))·(ξ²−η²)
            let v = eval_potential(&spec, &[x, e])? * w;
            let mut row = vec![(k, v * area)];
            row.extend(xi_part.iter().map(|&(j, c)| (j * n_eta + b, c)));
            row.extend(scale(&eta_rows, b).into_iter().map(|(j, c)| (a * n_eta + j, c)));
            upper.push(row);
            weight.push(w * area);
        }
    }

    let meta = OperatorMeta {
        form: Some(PotentialForm::ProlateFixedR),
        mu: None,
        z: Some(z),
        softening: 0.0,
        magnetic: None,
        separation: Some(r),
    };
    Ok((
        SparseOperator { matrix: CsrMatrix::from_upper_rows(upper), grid: grid.clone(), meta: meta.clone() },
        SparseOperator { matrix: CsrMatrix::from_diagonal(&weight), grid: grid.clone(), meta },
    ))
}
