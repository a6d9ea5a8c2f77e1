//! Physical constants and the conversion between the dimensionless solver
//! variables and laboratory units.
//!
//! All solver-facing code works with `x̃ = G²·x` and energies measured in
//! units of `ħ²G⁴/2m`, where `G² = m Z e² / (2 ħ² π ε₀)` and `m` is the mass
//! of the light (negatively charged) particle. For an electron bound to
//! unit charges `G⁻²` is half a Bohr radius and the energy unit is two
//! Hartree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 constants (SI).
pub mod codata {
    /// Elementary charge, C.
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    /// Reduced Planck constant, J·s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Vacuum permittivity, F/m.
    pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
    /// Electron mass, kg.
    pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
    /// Deuteron mass, kg.
    pub const DEUTERON_MASS: f64 = 3.343_583_772_4e-27;
    /// Proton mass, kg.
    pub const PROTON_MASS: f64 = 1.672_621_923_69e-27;
    /// Bohr radius, m.
    pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
    /// Hartree energy, J.
    pub const HARTREE: f64 = 4.359_744_722_207_1e-18;
}

const ANGSTROM: f64 = 1e-10;

/// Masses, charge and the derived scales of a light–heavy–heavy system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalSystem {
    /// Mass of the light, negatively charged particle (kg).
    pub light_mass: f64,
    /// Mass of each of the two heavy particles (kg).
    pub heavy_mass: f64,
    /// Charge of each heavy particle in units of `e`.
    pub charge_number: f64,
    /// `G²` in m⁻¹.
    pub g_squared: f64,
    /// Mass ratio `m/M`.
    pub mu: f64,
    /// Meters per dimensionless length unit (`1/G²`).
    pub length_scale: f64,
    /// Joules per dimensionless energy unit (`ħ²G⁴/2m`).
    pub energy_scale: f64,
}

impl PhysicalSystem {
    /// Electron bound to two deuterons with unit charge.
    pub fn electron_deuteron() -> Self {
        derive_system(codata::ELECTRON_MASS, codata::DEUTERON_MASS, 1.0)
            .expect("CODATA masses are valid")
    }

    /// Energy scale in electron-volts.
    pub fn energy_scale_ev(&self) -> f64 {
        self.energy_scale / codata::ELEMENTARY_CHARGE
    }

    /// Length scale in ångström.
    pub fn length_scale_angstrom(&self) -> f64 {
        self.length_scale / ANGSTROM
    }

    /// Dimensionless field factor `e/(ħG⁴)` per tesla.
    ///
    /// Multiplies a physical flux density to give the magnetic term of the
    /// dimensionless Hamiltonian.
    pub fn magnetic_field_factor(&self) -> f64 {
        codata::ELEMENTARY_CHARGE / (codata::HBAR * self.g_squared * self.g_squared)
    }

    /// Coefficient `e²/(ħ²G⁸)` of the diamagnetic term, per tesla squared.
    pub fn diamagnetic_coupling(&self) -> f64 {
        self.magnetic_field_factor().powi(2)
    }
}

/// Derives `G²`, `μ` and the conversion scales from the particle masses.
pub fn derive_system(light_mass: f64, heavy_mass: f64, charge_number: f64) -> Result<PhysicalSystem> {
    if !(light_mass.is_finite() && light_mass > 0.0) {
        return Err(Error::invalid("light_mass", "must be positive"));
    }
    if !(heavy_mass.is_finite() && heavy_mass > 0.0) {
        return Err(Error::invalid("heavy_mass", "must be positive"));
    }
    if !(charge_number.is_finite() && charge_number >= 1.0) {
        return Err(Error::invalid("charge_number", "must be at least 1"));
    }
    let mu = light_mass / heavy_mass;
    if mu > 1.0 {
        return Err(Error::invalid("heavy_mass", "must not be lighter than the light particle"));
    }
    use codata::*;
    let g_squared = light_mass * charge_number * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE
        / (2.0 * HBAR * HBAR * std::f64::consts::PI * EPSILON_0);
    let energy_scale = HBAR * HBAR * g_squared * g_squared / (2.0 * light_mass);
    Ok(PhysicalSystem {
        light_mass,
        heavy_mass,
        charge_number,
        g_squared,
        mu,
        length_scale: 1.0 / g_squared,
        energy_scale,
    })
}

/// Dimensionless energy to electron-volts.
pub fn to_ev(e_dimensionless: f64, sys: &PhysicalSystem) -> f64 {
    e_dimensionless * sys.energy_scale_ev()
}

/// Electron-volts to dimensionless energy.
pub fn from_ev(e_ev: f64, sys: &PhysicalSystem) -> f64 {
    e_ev / sys.energy_scale_ev()
}

/// Dimensionless length to ångström.
pub fn to_angstrom(x_dimensionless: f64, sys: &PhysicalSystem) -> f64 {
    x_dimensionless * sys.length_scale_angstrom()
}

/// Human-readable table of the scales, embedded in run manifests.
#[derive(Debug, Clone, Serialize)]
pub struct UnitsTable {
    pub g_squared_per_m: f64,
    pub length_unit_angstrom: f64,
    pub energy_unit_ev: f64,
    pub mu: f64,
    pub magnetic_field_factor_per_tesla: f64,
}

impl From<&PhysicalSystem> for UnitsTable {
    fn from(sys: &PhysicalSystem) -> Self {
        Self {
            g_squared_per_m: sys.g_squared,
            length_unit_angstrom: sys.length_scale_angstrom(),
            energy_unit_ev: sys.energy_scale_ev(),
            mu: sys.mu,
            magnetic_field_factor_per_tesla: sys.magnetic_field_factor(),
        }
    }
}
