use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stencil::{self, Rows};
use super::{CsrMatrix, OperatorMeta, SparseOperator};
use crate::error::{Error, Result};
use crate::grid::{AxisName, GridSpec};
use crate::potentials::{eval_potential, PotentialForm, PotentialSpec};
use crate::units::PhysicalSystem;

/// Uniform static field entering through the diamagnetic term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticSpec {
    /// `(B_x, B_y, B_z)` in tesla.
    pub field: [f64; 3],
    /// Dimensionless coupling per tesla squared.
    pub coupling: f64,
}

impl MagneticSpec {
    pub fn for_system(field: [f64; 3], sys: &PhysicalSystem) -> Self {
        Self { field, coupling: sys.diamagnetic_coupling() }
    }

    /// Harmonic addition `c·(x²(B_z² + B_y²)/4 + Z²μ R²(B_z² + B_x²)/4)`.
    pub fn diagonal_term(&self, r: f64, x: f64, z: f64, mu: f64) -> f64 {
        let [bx, by, bz] = self.field;
        self.coupling * (0.25 * x * x * (bz * bz + by * by) + 0.25 * z * z * mu * r * r * (bz * bz + bx * bx))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub potential: PotentialSpec,
    /// Light-to-heavy mass ratio.
    pub mu: f64,
    pub magnetic: Option<MagneticSpec>,
}

impl HamiltonianSpec {
    pub fn new(potential: PotentialSpec, mu: f64) -> Self {
        Self { potential, mu, magnetic: None }
    }

    pub fn with_magnetic(mut self, magnetic: MagneticSpec) -> Self {
        self.magnetic = Some(magnetic);
        self
    }
}

/// Adds `Σ_d I ⊗ T_d ⊗ I` plus a diagonal on the tensor grid.
fn assemble(grid: &GridSpec, axis_rows: &[Rows], diag: &[f64]) -> CsrMatrix {
    let strides = grid.strides();
    let upper: Vec<Vec<(usize, f64)>> = (0..grid.total_points())
        .into_par_iter()
        .map(|k| {
            let m = grid.multi_index(k);
            let mut row = vec![(k, diag[k])];
            for (d, rows) in axis_rows.iter().enumerate() {
                for &(j, v) in &rows[m[d]] {
                    if j >= m[d] {
                        row.push((k + (j - m[d]) * strides[d], v));
                    }
                }
            }
            row
        })
        .collect();
    CsrMatrix::from_upper_rows(upper)
}

fn check_axes(grid: &GridSpec, form: PotentialForm) -> Result<()> {
    let got: Vec<AxisName> = grid.axes.iter().map(|a| a.name).collect();
    if got != form.axes() {
        return Err(Error::invalid(
            "grid",
            format!("form {} needs axes {:?}, got {:?}", form.name(), form.axes(), got),
        ));
    }
    Ok(())
}

/// Dimensionless Hamiltonian of one of the box forms.
///
/// Kinetic terms: `−8μ ∂²_R` on the separation axis, `−∂²` on Cartesian
/// light-particle axes and the symmetrized radial operator on `x` for the
/// cylindrical forms.
pub fn build_hamiltonian(spec: &HamiltonianSpec, grid: &GridSpec) -> Result<SparseOperator> {
    let form = spec.potential.form;
    if form == PotentialForm::ProlateFixedR {
        return Err(Error::invalid("form", "use build_prolate_fixed_r for the prolate operator"));
    }
    check_axes(grid, form)?;
    if !(spec.mu.is_finite() && spec.mu > 0.0) {
        return Err(Error::invalid("mu", "must be positive"));
    }
    if spec.mu > 1.0 {
        return Err(Error::invalid("mu", "must not exceed 1"));
    }
    if spec.mu == 1.0 {
        log::warn!("mu = 1: equal masses, far from the light-particle regime");
    }

    let axis_rows: Vec<Rows> = grid
        .axes
        .iter()
        .map(|a| match a.name {
            AxisName::R => stencil::second_derivative(a, 8.0 * spec.mu),
            AxisName::X if form.is_cylindrical() => stencil::radial(a),
            _ => stencil::second_derivative(a, 1.0),
        })
        .collect();

    let diag: Vec<f64> = (0..grid.total_points())
        .into_par_iter()
        .map(|k| {
            let p = grid.coordinates(k);
            let mut v = eval_potential(&spec.potential, &p)?;
            if let Some(mag) = &spec.magnetic {
                v += mag.diagonal_term(p[0], p[1], spec.potential.z, spec.mu);
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;

    Ok(SparseOperator {
        matrix: assemble(grid, &axis_rows, &diag),
        grid: grid.clone(),
        meta: OperatorMeta {
            form: Some(form),
            mu: Some(spec.mu),
            z: Some(spec.potential.z),
            softening: spec.potential.softening,
            magnetic: spec.magnetic,
            separation: None,
        },
    })
}

/// Free operator `−Σ_d c_d ∂²_d` with Dirichlet walls on every axis.
pub fn build_laplacian(grid: &GridSpec, coefficients: &[f64]) -> Result<SparseOperator> {
    if coefficients.len() != grid.ndim() {
        return Err(Error::DimensionMismatch { expected: grid.ndim(), got: coefficients.len() });
    }
    let axis_rows: Vec<Rows> =
        grid.axes.iter().zip(coefficients).map(|(a, &c)| stencil::second_derivative(a, c)).collect();
    Ok(SparseOperator {
        matrix: assemble(grid, &axis_rows, &vec![0.0; grid.total_points()]),
        grid: grid.clone(),
        meta: OperatorMeta::bare(),
    })
}
