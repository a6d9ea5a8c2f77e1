//! Run configuration: TOML sections, named presets and `key=value`
//! overrides.

use serde::{Deserialize, Serialize};

use crate::analysis::{ClassificationRules, ProliferationRule};
use crate::control::PulseSpec;
use crate::eigensolve::LanczosOptions;
use crate::error::{Error, Result};
use crate::grid::{make_box_grid, AxisName, GridSpec};
use crate::operators::{HamiltonianSpec, MagneticSpec};
use crate::potentials::{PotentialForm, PotentialSpec};
use crate::quasistatic::QuasistaticOptions;
use crate::spectrum::{SolveOptions, SolverMethod};
use crate::sweeps::SweepAxis;
use crate::units::PhysicalSystem;

pub const PRESETS: &[&str] =
    &["planar-deuteron", "cylinder-deuteron", "threevar-deuteron", "mu-study", "basis-convergence", "control-resonance"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub form: PotentialForm,
    pub mu: f64,
    pub z: f64,
    pub softening: f64,
    /// Field in tesla; all zero disables the diamagnetic term.
    pub magnetic_field: [f64; 3],
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self { form: PotentialForm::Planar2Var, mu: 0.00027, z: 1.0, softening: 0.0, magnetic_field: [0.0; 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Every axis spans `[−half_width, half_width]` with `n` cell-centered
    /// points unless `axes` is given.
    pub half_width: f64,
    pub n: usize,
    pub axes: Vec<AxisConfig>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { half_width: 15.0, n: 148, axes: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub k: usize,
    /// When set, `k` is this fraction of the number of physical states.
    pub window_fraction: Option<f64>,
    pub tol: f64,
    pub method: SolverMethod,
    pub dense_limit: usize,
    pub use_symmetry: bool,
    pub block_size: usize,
    pub max_restarts: usize,
    pub seed: u64,
    pub keep_vectors: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let l = LanczosOptions::default();
        let s = SolveOptions::default();
        Self {
            k: s.k,
            window_fraction: None,
            tol: s.tol,
            method: s.method,
            dense_limit: s.dense_limit,
            use_symmetry: s.use_symmetry,
            block_size: l.block_size,
            max_restarts: l.max_restarts,
            seed: l.seed,
            keep_vectors: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub threshold_rel: f64,
    pub proliferation: ProliferationRule,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let r = ClassificationRules::default();
        Self { threshold_rel: r.threshold_rel, proliferation: r.proliferation }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuasistaticConfig {
    pub z: f64,
    pub beta_count: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub r_points: usize,
    pub n_xi: usize,
    pub n_eta: usize,
    pub initial_extent: f64,
    pub rel_tol: f64,
    pub max_doublings: usize,
    pub method: SolverMethod,
    /// Largest pencil solved densely under `method = "auto"`.
    pub dense_limit: usize,
}

impl Default for QuasistaticConfig {
    fn default() -> Self {
        let q = QuasistaticOptions::default();
        Self {
            z: 1.0,
            beta_count: 3,
            r_min: 0.05,
            r_max: 20.0,
            r_points: 40,
            n_xi: q.n_xi,
            n_eta: q.n_eta,
            initial_extent: q.initial_extent,
            rel_tol: q.rel_tol,
            max_doublings: q.max_doublings,
            method: q.method,
            dense_limit: q.dense_limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { axis: SweepAxis::Mu, values: vec![0.00027, 0.01, 0.1] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlConfig {
    pub initial: usize,
    /// Defaults to the first quasi-collision state above `initial`.
    pub final_state: Option<usize>,
    pub coordinate: AxisName,
    pub e_field: f64,
    pub prefactor: f64,
    /// Frequencies span `Δε · (1 ± omega_span)`.
    pub omega_span: f64,
    pub omega_points: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            initial: 0,
            final_state: None,
            coordinate: AxisName::R,
            e_field: 1.0,
            prefactor: 1.0,
            omega_span: 0.5,
            omega_points: 201,
            t_min: 10.0,
            t_max: 100.0,
            t_points: 11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub system: SystemConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub analysis: AnalysisConfig,
    pub quasistatic: QuasistaticConfig,
    pub sweep: SweepConfig,
    pub control: ControlConfig,
    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: None,
            system: SystemConfig::default(),
            grid: GridConfig::default(),
            solver: SolverConfig::default(),
            analysis: AnalysisConfig::default(),
            quasistatic: QuasistaticConfig::default(),
            sweep: SweepConfig::default(),
            control: ControlConfig::default(),
            output_dir: "qcoll-out".into(),
        }
    }
}

fn check(ok: bool, name: &str, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("{name}: {reason}")))
    }
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let mut c = RunConfig { preset: Some(name.to_owned()), ..Default::default() };
        c.solver.window_fraction = Some(0.5);
        match name {
            "planar-deuteron" => {}
            "cylinder-deuteron" => c.system.form = PotentialForm::Cylinder2Var,
            "threevar-deuteron" => {
                c.system.form = PotentialForm::Cylinder3Var;
                c.grid.half_width = 7.5;
                c.grid.n = 28;
            }
            "mu-study" => {
                c.sweep = SweepConfig { axis: SweepAxis::Mu, values: vec![0.00027, 0.01, 0.1] };
            }
            "basis-convergence" => {
                c.system.form = PotentialForm::Cylinder2Var;
                c.sweep = SweepConfig {
                    axis: SweepAxis::BasisSize,
                    values: vec![1600.0, 3600.0, 6400.0, 10000.0, 19600.0],
                };
            }
            "control-resonance" => {
                c.system.mu = 0.1;
                c.grid.n = 48;
                c.solver.window_fraction = None;
                c.solver.k = 40;
                c.solver.keep_vectors = true;
            }
            _ => return Err(Error::Config(format!("unknown preset `{name}` (known: {})", PRESETS.join(", ")))),
        }
        Ok(c)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Applies `section.key=value`; the value is read as a TOML literal and
    /// falls back to a plain string.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (path, raw) =
            assignment.split_once('=').ok_or_else(|| Error::Config(format!("override `{assignment}` lacks `=`")))?;
        let path: Vec<&str> = path.trim().split('.').collect();
        let raw = raw.trim();
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_owned()));
        let mut root = toml::Value::try_from(&*self).map_err(|e| Error::Config(e.to_string()))?;
        let mut node = &mut root;
        for (i, key) in path.iter().enumerate() {
            let table = node.as_table_mut().ok_or_else(|| Error::Config(format!("`{}` is not a section", path[..i].join("."))))?;
            if i + 1 == path.len() {
                table.insert((*key).to_owned(), value.clone());
                break;
            }
            node = table.entry(*key).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        }
        *self = root.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        check(s.mu > 0.0 && s.mu <= 1.0, "system.mu", "must lie in (0, 1]")?;
        check(s.z.is_finite() && s.z > 0.0, "system.z", "must be positive")?;
        check(s.softening.is_finite() && s.softening >= 0.0, "system.softening", "must be non-negative")?;
        check(s.form != PotentialForm::ProlateFixedR, "system.form", "the fixed-separation form belongs to [quasistatic]")?;
        check(s.magnetic_field.iter().all(|b| b.is_finite()), "system.magnetic_field", "must be finite")?;
        check(self.grid.n >= 4, "grid.n", "must be at least 4")?;
        check(self.grid.half_width.is_finite() && self.grid.half_width > 0.0, "grid.half_width", "must be positive")?;
        let sv = &self.solver;
        match sv.window_fraction {
            Some(f) => check(f > 0.0 && f <= 1.0, "solver.window_fraction", "must lie in (0, 1]")?,
            None => check(sv.k >= 1, "solver.k", "must be at least 1")?,
        }
        check(sv.tol.is_finite() && sv.tol > 0.0, "solver.tol", "must be positive")?;
        check(sv.block_size >= 1, "solver.block_size", "must be at least 1")?;
        check(self.analysis.threshold_rel > 0.0 && self.analysis.threshold_rel < 1.0, "analysis.threshold_rel", "must lie in (0, 1)")?;
        let q = &self.quasistatic;
        check(q.beta_count >= 1, "quasistatic.beta_count", "must be at least 1")?;
        check(q.r_min > 0.0 && q.r_max > q.r_min && q.r_points >= 3, "quasistatic", "need 0 < r_min < r_max and r_points ≥ 3")?;
        check(q.n_xi >= 4 && q.n_eta >= 4, "quasistatic", "n_xi and n_eta must be at least 4")?;
        check(self.sweep.values.windows(2).all(|w| w[1] > w[0]) || self.sweep.values.windows(2).all(|w| w[1] < w[0]), "sweep.values", "must be strictly monotone")?;
        let c = &self.control;
        check(c.t_min > 0.0 && c.t_max >= c.t_min && c.t_points >= 1, "control", "need 0 < t_min ≤ t_max")?;
        check(c.omega_points >= 2 && c.omega_span > 0.0, "control", "need omega_points ≥ 2 and omega_span > 0")?;
        PulseSpec::new(c.e_field, 0.0, c.t_min).map_err(|e| Error::Config(e.to_string()))?;
        self.grid_spec()?;
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        let axes: Vec<(AxisName, f64, f64, usize)> = if self.grid.axes.is_empty() {
            let h = self.grid.half_width;
            self.system.form.axes().iter().map(|&a| (a, -h, h, self.grid.n)).collect()
        } else {
            self.grid.axes.iter().map(|a| (a.name, a.min, a.max, a.n)).collect()
        };
        make_box_grid(&axes).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn hamiltonian_spec(&self, sys: &PhysicalSystem) -> Result<HamiltonianSpec> {
        let s = &self.system;
        let mut spec = HamiltonianSpec::new(PotentialSpec::new(s.form, s.z).with_softening(s.softening), s.mu);
        if s.magnetic_field.iter().any(|&b| b != 0.0) {
            spec = spec.with_magnetic(MagneticSpec::for_system(s.magnetic_field, sys));
        }
        Ok(spec)
    }

    /// Number of states kept for `grid`.
    pub fn state_count(&self, grid: &GridSpec) -> usize {
        match self.solver.window_fraction {
            Some(f) => {
                let physical = if self.system.form.is_cylindrical()
                    && grid.axis(AxisName::X).is_some_and(|a| a.min < 0.0)
                {
                    grid.total_points() / 2
                } else {
                    grid.total_points()
                };
                ((f * physical as f64).round() as usize).max(1)
            }
            None => self.solver.k,
        }
    }

    pub fn solve_options(&self, grid: &GridSpec) -> SolveOptions {
        let s = &self.solver;
        SolveOptions {
            k: self.state_count(grid),
            tol: s.tol,
            method: s.method,
            dense_limit: s.dense_limit,
            use_symmetry: s.use_symmetry,
            lanczos: LanczosOptions { block_size: s.block_size, max_basis: None, max_restarts: s.max_restarts, seed: s.seed },
            keep_vectors: s.keep_vectors,
        }
    }

    pub fn rules(&self) -> ClassificationRules {
        ClassificationRules { threshold_rel: self.analysis.threshold_rel, proliferation: self.analysis.proliferation }
    }

    pub fn quasistatic_options(&self) -> QuasistaticOptions {
        let q = &self.quasistatic;
        QuasistaticOptions {
            n_xi: q.n_xi,
            n_eta: q.n_eta,
            initial_extent: q.initial_extent,
            rel_tol: q.rel_tol,
            max_doublings: q.max_doublings,
            method: q.method,
            dense_limit: q.dense_limit,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in PRESETS {
            let c = RunConfig::preset(name).unwrap();
            c.validate().unwrap();
        }
        assert!(RunConfig::preset("nope").is_err());
    }

    #[test]
    fn planar_preset_window() {
        let c = RunConfig::preset("planar-deuteron").unwrap();
        let g = c.grid_spec().unwrap();
        assert_eq!(g.total_points(), 21904);
        assert_eq!(c.state_count(&g), 10952);
        let cyl = RunConfig::preset("cylinder-deuteron").unwrap();
        assert_eq!(cyl.state_count(&cyl.grid_spec().unwrap()), 5476);
        let three = RunConfig::preset("threevar-deuteron").unwrap();
        let g3 = three.grid_spec().unwrap();
        assert_eq!(g3.total_points(), 21952);
        assert_eq!(three.state_count(&g3), 5488);
    }

    #[test]
    fn toml_round_trip() {
        let c = RunConfig::preset("basis-convergence").unwrap();
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
        assert!(RunConfig::from_toml("[system]\nbogus = 1\n").is_err());
        let partial = RunConfig::from_toml("[system]\nform = \"cylinder-2var\"\nmu = 0.01\n").unwrap();
        assert_eq!(partial.system.form, PotentialForm::Cylinder2Var);
        assert_eq!(partial.grid, GridConfig::default());
    }

    #[test]
    fn overrides() {
        let mut c = RunConfig::default();
        c.set("solver.k=12").unwrap();
        c.set("system.form = cylinder-3var").unwrap();
        c.set("system.magnetic_field=[0.0, 0.0, 5.0]").unwrap();
        c.set("output_dir=/tmp/x").unwrap();
        assert_eq!(c.solver.k, 12);
        assert_eq!(c.system.form, PotentialForm::Cylinder3Var);
        assert_eq!(c.system.magnetic_field, [0.0, 0.0, 5.0]);
        assert_eq!(c.output_dir, "/tmp/x");
        assert!(c.set("solver.k=-3").is_err());
        assert!(c.set("nonsense").is_err());
        assert!(c.set("solver.nope=1").is_err());
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut c = RunConfig::default();
        c.solver.k = 0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.system.mu = 1.5;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.sweep.values = vec![1.0, 3.0, 2.0];
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.grid.n = 2;
        assert!(c.validate().is_err());
    }
}
