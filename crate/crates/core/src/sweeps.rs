//! Parameter studies over mass ratio, box size and basis size.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::SpectrumSummary;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::pipeline::run_solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Mu,
    BoxHalfWidth,
    /// Total grid points; each axis gets the nearest even `n` with
    /// `n^d` close to the value.
    BasisSize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub base: RunConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl SweepPlan {
    pub fn from_config(config: &RunConfig) -> Self {
        Self { base: config.clone(), axis: config.sweep.axis, values: config.sweep.values.clone() }
    }

    /// Configuration of one row.
    pub fn row_config(&self, value: f64) -> Result<RunConfig> {
        let mut c = self.base.clone();
        match self.axis {
            SweepAxis::Mu => c.system.mu = value,
            SweepAxis::BoxHalfWidth => c.grid.half_width = value,
            SweepAxis::BasisSize => {
                if !c.grid.axes.is_empty() {
                    return Err(Error::Config("basis-size sweeps need a box grid, not explicit axes".into()));
                }
                let d = c.system.form.axes().len() as f64;
                let n = (value.powf(1.0 / d) / 2.0).round() as usize * 2;
                c.grid.n = n;
            }
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        let up = self.values.windows(2).all(|w| w[1] > w[0]);
        let down = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Config("sweep values must be strictly monotone".into()));
        }
        self.base.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub grid_points: usize,
    pub grid_hash: String,
    pub seed: u64,
    pub states: usize,
    pub wall_time_s: f64,
    pub worst_residual: f64,
    pub ground_energy: Option<f64>,
    pub binding_ev: Option<f64>,
    pub first_qc_index: Option<usize>,
    pub first_qc_energy: Option<f64>,
    pub first_qc_excitation_ev: Option<f64>,
    pub proliferation_excitation_ev: Option<f64>,
    pub error: Option<String>,
    #[serde(skip)]
    pub summary: Option<SpectrumSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

fn run_row(plan: &SweepPlan, value: f64) -> SweepRow {
    let mut row = SweepRow {
        value,
        grid_points: 0,
        grid_hash: String::new(),
        seed: plan.base.solver.seed,
        states: 0,
        wall_time_s: 0.0,
        worst_residual: 0.0,
        ground_energy: None,
        binding_ev: None,
        first_qc_index: None,
        first_qc_energy: None,
        first_qc_excitation_ev: None,
        proliferation_excitation_ev: None,
        error: None,
        summary: None,
    };
    let config = match plan.row_config(value) {
        Ok(c) => c,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    if let Ok(g) = config.grid_spec() {
        row.grid_points = g.total_points();
        row.grid_hash = g.hash();
    }
    match run_solve(&config) {
        Ok(out) => {
            let s = out.summary;
            row.states = s.reports.len();
            row.wall_time_s = out.wall_time_s;
            row.worst_residual = out.spectrum.worst_residual();
            row.ground_energy = Some(s.ground_energy);
            row.binding_ev = Some(s.binding_ev);
            row.first_qc_index = s.first_qc_index;
            row.first_qc_energy = s.first_qc_energy;
            row.first_qc_excitation_ev = s.first_qc_excitation_ev;
            row.proliferation_excitation_ev = s.proliferation_excitation_ev;
            row.summary = Some(s);
        }
        Err(e) => {
            log::warn!("sweep row {value}: {e}");
            row.error = Some(e.to_string());
        }
    }
    row
}

/// One row per value; a failing row records its error and the rest go on.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepTable> {
    plan.validate()?;
    let rows = plan.values.par_iter().map(|&v| run_row(plan, v)).collect();
    Ok(SweepTable { axis: plan.axis, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuStudy {
    pub table: SweepTable,
    pub first_qc_indices: Vec<Option<usize>>,
    /// Every row has a flagged state and the first index falls strictly
    /// as `μ` grows.
    pub strictly_decreasing: bool,
    /// Whether the ground state is flagged at the largest `μ`.
    pub ground_flagged_at_largest: bool,
}

/// Mass-ratio study on the configuration `base`.
pub fn mu_study(base: &RunConfig, mu_values: &[f64]) -> Result<MuStudy> {
    if mu_values.iter().any(|&m| !(m > 0.0 && m <= 1.0)) {
        return Err(Error::Config("mu values must lie in (0, 1]".into()));
    }
    if mu_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("mu values must be strictly ascending".into()));
    }
    let table = run_sweep(&SweepPlan { base: base.clone(), axis: SweepAxis::Mu, values: mu_values.to_vec() })?;
    let first_qc_indices: Vec<Option<usize>> = table.rows.iter().map(|r| r.first_qc_index).collect();
    let strictly_decreasing = first_qc_indices.iter().all(Option::is_some)
        && first_qc_indices.windows(2).all(|w| w[1] < w[0]);
    let ground_flagged_at_largest = table
        .rows
        .last()
        .and_then(|r| r.summary.as_ref())
        .is_some_and(|s| s.reports.first().is_some_and(|g| g.is_quasi_collision));
    Ok(MuStudy { table, first_qc_indices, strictly_decreasing, ground_flagged_at_largest })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> RunConfig {
        let mut c = RunConfig::default();
        c.grid.n = 12;
        c.grid.half_width = 6.0;
        c.solver.k = 20;
        c
    }

    #[test]
    fn basis_rows_pick_even_n() {
        let plan = SweepPlan { base: tiny(), axis: SweepAxis::BasisSize, values: vec![1600.0, 19600.0] };
        assert_eq!(plan.row_config(1600.0).unwrap().grid.n, 40);
        assert_eq!(plan.row_config(19600.0).unwrap().grid.n, 140);
        let mut three = tiny();
        three.system.form = crate::potentials::PotentialForm::Cylinder3Var;
        let plan = SweepPlan { base: three, axis: SweepAxis::BasisSize, values: vec![21952.0] };
        assert_eq!(plan.row_config(21952.0).unwrap().grid.n, 28);
    }

    #[test]
    fn failing_rows_are_isolated() {
        let plan = SweepPlan { base: tiny(), axis: SweepAxis::BoxHalfWidth, values: vec![-1.0, 4.0, 6.0] };
        let table = run_sweep(&plan).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert!(table.rows[0].error.is_some());
        assert!(table.rows[1].error.is_none() && table.rows[2].error.is_none());
        assert_eq!(table.failures(), 1);
    }

    #[test]
    fn rows_are_reproducible() {
        let plan = SweepPlan { base: tiny(), axis: SweepAxis::Mu, values: vec![0.01, 0.1] };
        let a = run_sweep(&plan).unwrap();
        let b = run_sweep(&plan).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.ground_energy, y.ground_energy);
            assert_eq!(x.first_qc_index, y.first_qc_index);
        }
    }

    #[test]
    fn mu_study_rejects_bad_values() {
        assert!(mu_study(&tiny(), &[0.1, 0.01]).is_err());
        assert!(mu_study(&tiny(), &[0.0, 0.1]).is_err());
    }
}
