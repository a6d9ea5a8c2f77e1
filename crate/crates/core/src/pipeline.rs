//! One configured solve: grid, Hamiltonian, spectrum and classification.

use std::time::Instant;

use crate::analysis::{classify_spectrum, SpectrumSummary};
use crate::config::RunConfig;
use crate::error::Result;
use crate::grid::GridSpec;
use crate::spectrum::{solve_spectrum, Spectrum};
use crate::units::PhysicalSystem;

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub system: PhysicalSystem,
    pub grid: GridSpec,
    pub spectrum: Spectrum,
    pub summary: SpectrumSummary,
    pub wall_time_s: f64,
}

/// Validates `config` and runs the spectrum solve it describes.
pub fn run_solve(config: &RunConfig) -> Result<SolveOutcome> {
    config.validate()?;
    let start = Instant::now();
    let system = PhysicalSystem::electron_deuteron();
    let grid = config.grid_spec()?;
    let spec = config.hamiltonian_spec(&system)?;
    let spectrum = solve_spectrum(&spec, &grid, &config.solve_options(&grid))?;
    let summary = classify_spectrum(&spectrum.energies(), &spectrum.observables(), &system, &config.rules())?;
    Ok(SolveOutcome { system, grid, spectrum, summary, wall_time_s: start.elapsed().as_secs_f64() })
}
