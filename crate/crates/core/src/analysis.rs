//! Per-state observables and quasi-collision classification.
//!
//! Solver vectors `u` are Euclidean unit vectors. The wavefunction on the
//! grid is `ψ_k = u_k / √m_k` with the grid measure `m_k`: the cell volume,
//! times `|x|` on cylindrical forms. Then `Σ ψ² m = 1`.

use serde::{Deserialize, Serialize};

use crate::eigensolve::EigenSolution;
use crate::error::{Error, Result};
use crate::grid::{AxisName, Bracket, GridSpec};
use crate::units::{to_ev, PhysicalSystem};

/// Quadrature weight of every grid point.
pub fn grid_measure(grid: &GridSpec, cylindrical: bool) -> Vec<f64> {
    let cell = grid.cell_volume();
    let x_axis = if cylindrical { grid.axis_position(AxisName::X) } else { None };
    (0..grid.total_points())
        .map(|k| match x_axis {
            Some(d) => cell * grid.axes[d].point(grid.multi_index(k)[d]).abs(),
            None => cell,
        })
        .collect()
}

/// Grid wavefunction of a solver vector.
pub fn wavefunction(u: &[f64], measure: &[f64]) -> Vec<f64> {
    u.iter().zip(measure).map(|(x, m)| x / m.sqrt()).collect()
}

fn check_normalized(psi: &[f64], grid: &GridSpec, measure: &[f64]) -> Result<()> {
    if psi.len() != grid.total_points() || measure.len() != psi.len() {
        return Err(Error::DimensionMismatch { expected: grid.total_points(), got: psi.len() });
    }
    let norm: f64 = psi.iter().zip(measure).map(|(p, m)| p * p * m).sum();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Normalization { norm });
    }
    Ok(())
}

fn r_bracket(grid: &GridSpec) -> Result<(usize, Bracket)> {
    let d = grid.axis_position(AxisName::R).ok_or_else(|| Error::invalid("grid", "no R axis"))?;
    Ok((d, grid.axes[d].nearest_plane_indices(0.0)?))
}

/// `∫ |ψ(R = 0, z)|² dz` over the remaining coordinates.
///
/// The amplitude is interpolated linearly onto `R = 0` from the bracketing
/// planes and squared afterwards, so states odd in `R` give exactly zero.
pub fn compute_i0(psi: &[f64], grid: &GridSpec, measure: &[f64]) -> Result<f64> {
    check_normalized(psi, grid, measure)?;
    let (d, br) = r_bracket(grid)?;
    let stride = grid.strides()[d];
    let h = grid.axes[d].spacing();
    let mut total = 0.0;
    for k in 0..grid.total_points() {
        if grid.multi_index(k)[d] != 0 {
            continue;
        }
        let amp = br.interpolate(|i| psi[k + i * stride]);
        total += amp * amp * measure[k] / h;
    }
    Ok(total)
}

/// Multilinear interpolation of `ψ` at the coordinate origin.
pub fn psi_at_origin(psi: &[f64], grid: &GridSpec, measure: &[f64]) -> Result<f64> {
    check_normalized(psi, grid, measure)?;
    let brackets = grid.axes.iter().map(|a| a.nearest_plane_indices(0.0)).collect::<Result<Vec<_>>>()?;
    let strides = grid.strides();
    let mut total = 0.0;
    for corner in 0..(1usize << brackets.len()) {
        let mut k = 0;
        let mut w = 1.0;
        let mut inside = true;
        for (d, b) in brackets.iter().enumerate() {
            let (idx, wd) = if corner >> d & 1 == 0 { (b.lower, b.w_lower) } else { (b.upper, b.w_upper) };
            match idx {
                Some(i) if wd != 0.0 => {
                    k += i * strides[d];
                    w *= wd;
                }
                _ => {
                    inside = false;
                    break;
                }
            }
        }
        if inside {
            total += w * psi[k];
        }
    }
    Ok(total)
}

/// `+1` or `−1` for states even or odd under `R → −R`; `0` if the grid is
/// not symmetric in `R` or the state has no definite parity.
pub fn r_parity(psi: &[f64], grid: &GridSpec, measure: &[f64]) -> i8 {
    let Some(d) = grid.axis_position(AxisName::R) else { return 0 };
    let axis = &grid.axes[d];
    if !axis.is_symmetric() {
        return 0;
    }
    let stride = grid.strides()[d];
    let mut overlap = 0.0;
    let mut norm = 0.0;
    for k in 0..psi.len() {
        let i = grid.multi_index(k)[d];
        let mirror = k - i * stride + axis.mirror(i) * stride;
        overlap += psi[k] * psi[mirror] * measure[k];
        norm += psi[k] * psi[k] * measure[k];
    }
    let c = overlap / norm;
    if c > 1.0 - 1e-6 {
        1
    } else if c < -1.0 + 1e-6 {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateObservables {
    pub i0: f64,
    pub psi_origin: f64,
    pub parity_r: i8,
}

/// Observables of a solver vector.
pub fn observe_state(u: &[f64], grid: &GridSpec, measure: &[f64]) -> Result<StateObservables> {
    let psi = wavefunction(u, measure);
    Ok(StateObservables {
        i0: compute_i0(&psi, grid, measure)?,
        psi_origin: psi_at_origin(&psi, grid, measure)?,
        parity_r: r_parity(&psi, grid, measure),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProliferationRule {
    /// At least `count` flagged states within `width` dimensionless energy
    /// units of a flagged state.
    EnergyWindow { count: usize, width: f64 },
    /// At least `count` flagged states among `width` consecutive states
    /// starting at a flagged state.
    IndexWindow { count: usize, width: usize },
}

impl Default for ProliferationRule {
    fn default() -> Self {
        ProliferationRule::EnergyWindow { count: 5, width: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRules {
    /// Flag states with `I0 > threshold_rel · max I0`.
    pub threshold_rel: f64,
    pub proliferation: ProliferationRule,
}

impl Default for ClassificationRules {
    fn default() -> Self {
        Self { threshold_rel: 1e-3, proliferation: ProliferationRule::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub index: usize,
    pub e_dimensionless: f64,
    /// Excitation above the lowest computed state.
    pub e_ev: f64,
    pub i0: f64,
    pub psi_origin: f64,
    pub is_quasi_collision: bool,
    pub parity_r: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub reports: Vec<StateReport>,
    pub ground_energy: f64,
    /// `|Ẽ₀|` in eV.
    pub binding_ev: f64,
    pub max_i0: f64,
    /// Absolute `I0` threshold used for flagging.
    pub threshold: f64,
    pub first_qc_index: Option<usize>,
    pub first_qc_energy: Option<f64>,
    pub first_qc_excitation_ev: Option<f64>,
    pub proliferation_index: Option<usize>,
    pub proliferation_energy: Option<f64>,
    pub proliferation_excitation_ev: Option<f64>,
}

impl SpectrumSummary {
    pub fn quasi_collision_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.reports.iter().filter(|r| r.is_quasi_collision).map(|r| r.index)
    }
}

fn proliferation_onset(energies: &[f64], flagged: &[usize], rule: ProliferationRule) -> Option<usize> {
    match rule {
        ProliferationRule::EnergyWindow { count, width } => flagged.iter().enumerate().find_map(|(a, &i)| {
            let n = flagged[a..].iter().take_while(|&&j| energies[j] <= energies[i] + width).count();
            (n >= count).then_some(i)
        }),
        ProliferationRule::IndexWindow { count, width } => flagged.iter().enumerate().find_map(|(a, &i)| {
            let n = flagged[a..].iter().take_while(|&&j| j < i + width).count();
            (n >= count).then_some(i)
        }),
    }
}

/// Builds per-state reports and the spectrum-level quasi-collision summary.
///
/// `energies` must be ascending and aligned with `observables`.
pub fn classify_spectrum(
    energies: &[f64],
    observables: &[StateObservables],
    sys: &PhysicalSystem,
    rules: &ClassificationRules,
) -> Result<SpectrumSummary> {
    if energies.len() != observables.len() {
        return Err(Error::DimensionMismatch { expected: energies.len(), got: observables.len() });
    }
    if energies.is_empty() {
        return Err(Error::invalid("spectrum", "no states"));
    }
    if energies.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("spectrum", "energies must be ascending"));
    }
    let ground = energies[0];
    let max_i0 = observables.iter().map(|o| o.i0).fold(0.0, f64::max);
    let threshold = rules.threshold_rel * max_i0;
    let reports: Vec<StateReport> = energies
        .iter()
        .zip(observables)
        .enumerate()
        .map(|(index, (&e, o))| StateReport {
            index,
            e_dimensionless: e,
            e_ev: to_ev(e - ground, sys),
            i0: o.i0,
            psi_origin: o.psi_origin,
            is_quasi_collision: max_i0 > 0.0 && o.i0 > threshold,
            parity_r: o.parity_r,
        })
        .collect();
    let flagged: Vec<usize> = reports.iter().filter(|r| r.is_quasi_collision).map(|r| r.index).collect();
    let first = flagged.first().copied();
    let prolif = proliferation_onset(energies, &flagged, rules.proliferation);
    Ok(SpectrumSummary {
        ground_energy: ground,
        binding_ev: to_ev(ground.abs(), sys),
        max_i0,
        threshold,
        first_qc_index: first,
        first_qc_energy: first.map(|i| energies[i]),
        first_qc_excitation_ev: first.map(|i| reports[i].e_ev),
        proliferation_index: prolif,
        proliferation_energy: prolif.map(|i| energies[i]),
        proliferation_excitation_ev: prolif.map(|i| reports[i].e_ev),
        reports,
    })
}

/// Observables and summary straight from an eigensolution on `grid`.
pub fn classify_solution(
    sol: &EigenSolution,
    grid: &GridSpec,
    measure: &[f64],
    sys: &PhysicalSystem,
    rules: &ClassificationRules,
) -> Result<SpectrumSummary> {
    let obs = (0..sol.k()).map(|i| observe_state(sol.vector(i), grid, measure)).collect::<Result<Vec<_>>>()?;
    classify_spectrum(&sol.eigenvalues, &obs, sys, rules)
}
