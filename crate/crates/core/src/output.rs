//! CSV tables, JSON manifests and eigenvector dumps.
//!
//! Floats are written with `{:.16e}` (17 significant digits), so equal
//! inputs give byte-identical files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::analysis::SpectrumSummary;
use crate::config::RunConfig;
use crate::control::ResonanceScan;
use crate::error::Result;
use crate::pipeline::SolveOutcome;
use crate::potentials::PotentialForm;
use crate::quasistatic::EffectivePotentialCurve;
use crate::spectrum::BlockRun;
use crate::sweeps::SweepTable;
use crate::units::UnitsTable;

pub const STATES_HEADER: &str = "index,e_dimensionless,e_ev_above_ground,I0,psi_origin,parity_R,is_quasi_collision";
pub const CURVE_HEADER: &str = "R,beta,lambda,v_eff,xi_max";
pub const SCAN_HEADER: &str = "omega,T,amplitude,delta";
pub const SWEEP_HEADER: &str = "value,grid_points,states,ground_energy,binding_ev,first_qc_index,first_qc_excitation_ev,proliferation_excitation_ev,wall_time_s,error";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_states_csv(summary: &SpectrumSummary, mut out: impl Write) -> Result<()> {
    writeln!(out, "{STATES_HEADER}")?;
    for r in &summary.reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.index,
            num(r.e_dimensionless),
            num(r.e_ev),
            num(r.i0),
            num(r.psi_origin),
            r.parity_r,
            r.is_quasi_collision
        )?;
    }
    Ok(())
}

pub fn write_curve_csv(curve: &EffectivePotentialCurve, mut out: impl Write) -> Result<()> {
    writeln!(out, "{CURVE_HEADER}")?;
    for (i, &r) in curve.r_values.iter().enumerate() {
        for (beta, (&l, &v)) in curve.lambda[i].iter().zip(&curve.v_eff[i]).enumerate() {
            writeln!(out, "{},{beta},{},{},{}", num(r), num(l), num(v), num(curve.xi_max[i]))?;
        }
    }
    Ok(())
}

pub fn write_scan_csv(scan: &ResonanceScan, mut out: impl Write) -> Result<()> {
    writeln!(out, "{SCAN_HEADER}")?;
    for r in &scan.rows {
        writeln!(out, "{},{},{},{}", num(r.omega), num(r.t), num(r.amplitude), num(r.delta))?;
    }
    Ok(())
}

pub fn write_sweep_csv(table: &SweepTable, mut out: impl Write) -> Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in &table.rows {
        let error = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{error}",
            num(r.value),
            r.grid_points,
            r.states,
            opt_num(r.ground_energy),
            opt_num(r.binding_ev),
            r.first_qc_index.map(|i| i.to_string()).unwrap_or_default(),
            opt_num(r.first_qc_excitation_ev),
            opt_num(r.proliferation_excitation_ev),
            num(r.wall_time_s),
        )?;
    }
    Ok(())
}

/// A computed value against a published reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceCheck {
    pub quantity: String,
    pub value: Option<f64>,
    pub reference: f64,
    pub tolerance_rel: f64,
    pub within: bool,
}

impl ReferenceCheck {
    pub fn new(quantity: &str, value: Option<f64>, reference: f64, tolerance_rel: f64) -> Self {
        let within = value.is_some_and(|v| ((v - reference) / reference).abs() <= tolerance_rel);
        Self { quantity: quantity.into(), value, reference, tolerance_rel, within }
    }
}

/// Published reference values for the electron–deuteron runs at the
/// physical mass ratio.
pub fn reference_checks(form: PotentialForm, mu: f64, summary: &SpectrumSummary) -> Vec<ReferenceCheck> {
    if (mu - 0.00027).abs() > 0.00002 {
        return Vec::new();
    }
    match form {
        PotentialForm::Planar2Var => vec![
            ReferenceCheck::new("binding_ev", Some(summary.binding_ev), 120.0, 0.10),
            ReferenceCheck::new("first_qc_excitation_ev", summary.first_qc_excitation_ev, 160.0, 0.20),
            ReferenceCheck::new("proliferation_excitation_ev", summary.proliferation_excitation_ev, 500.0, 0.25),
        ],
        PotentialForm::Cylinder2Var => vec![
            ReferenceCheck::new("first_qc_excitation_ev", summary.first_qc_excitation_ev, 389.0, 0.20),
            ReferenceCheck::new("proliferation_excitation_ev", summary.proliferation_excitation_ev, 540.0, 0.25),
        ],
        PotentialForm::Cylinder3Var => vec![
            ReferenceCheck::new("first_qc_energy", summary.first_qc_energy, 2.8, 0.20),
            ReferenceCheck::new("proliferation_energy", summary.proliferation_energy, 3.59, 0.25),
        ],
        PotentialForm::ProlateFixedR => Vec::new(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryFields {
    pub states: usize,
    pub ground_energy: f64,
    pub binding_ev: f64,
    pub max_i0: f64,
    pub threshold: f64,
    pub first_qc_index: Option<usize>,
    pub first_qc_energy: Option<f64>,
    pub first_qc_excitation_ev: Option<f64>,
    pub proliferation_index: Option<usize>,
    pub proliferation_energy: Option<f64>,
    pub proliferation_excitation_ev: Option<f64>,
    pub quasi_collision_count: usize,
}

impl From<&SpectrumSummary> for SummaryFields {
    fn from(s: &SpectrumSummary) -> Self {
        Self {
            states: s.reports.len(),
            ground_energy: s.ground_energy,
            binding_ev: s.binding_ev,
            max_i0: s.max_i0,
            threshold: s.threshold,
            first_qc_index: s.first_qc_index,
            first_qc_energy: s.first_qc_energy,
            first_qc_excitation_ev: s.first_qc_excitation_ev,
            proliferation_index: s.proliferation_index,
            proliferation_energy: s.proliferation_energy,
            proliferation_excitation_ev: s.proliferation_excitation_ev,
            quasi_collision_count: s.quasi_collision_indices().count(),
        }
    }
}

/// Everything needed to rerun a job and read its tables.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub config_toml: String,
    pub seed: u64,
    pub units: UnitsTable,
    pub files: Vec<String>,
    pub result: T,
}

impl<T: Serialize> Manifest<T> {
    pub fn new(command: &str, config: &RunConfig, units: UnitsTable, result: T) -> Result<Self> {
        Ok(Self {
            tool: "qcoll",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            config: config.clone(),
            config_toml: config.to_toml()?,
            seed: config.solver.seed,
            units,
            files: Vec::new(),
            result,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = create(path)?;
        serde_json::to_writer_pretty(&mut out, self).map_err(|e| crate::Error::Config(e.to_string()))?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub grid_hash: String,
    pub grid_shape: Vec<usize>,
    pub blocks: Vec<BlockRun>,
    pub worst_residual: f64,
    pub wall_time_s: f64,
    pub summary: SummaryFields,
    pub reference_checks: Vec<ReferenceCheck>,
    pub vectors_file: Option<String>,
}

/// Raw little-endian `f64` columns, one state after another, in grid
/// order (last axis fastest). Returns the number of vectors written.
pub fn write_vectors(outcome: &SolveOutcome, mut out: impl Write) -> Result<usize> {
    let mut count = 0;
    for s in &outcome.spectrum.states {
        if let Some(v) = &s.vector {
            for x in v {
                out.write_all(&x.to_le_bytes())?;
            }
            count += 1;
        }
    }
    Ok(count)
}

/// Writes `states.csv`, `manifest.json` and, when vectors were kept,
/// `vectors.bin` under `dir`.
pub fn write_solve_bundle(dir: &Path, config: &RunConfig, outcome: &SolveOutcome) -> Result<Manifest<SolveResult>> {
    fs::create_dir_all(dir)?;
    let mut files = vec!["states.csv".to_string()];
    let mut w = create(&dir.join("states.csv"))?;
    write_states_csv(&outcome.summary, &mut w)?;
    w.flush()?;
    let vectors_file = if outcome.spectrum.states.iter().any(|s| s.vector.is_some()) {
        let mut w = create(&dir.join("vectors.bin"))?;
        write_vectors(outcome, &mut w)?;
        w.flush()?;
        files.push("vectors.bin".into());
        Some("vectors.bin".to_string())
    } else {
        None
    };
    let result = SolveResult {
        grid_hash: outcome.grid.hash(),
        grid_shape: outcome.grid.shape(),
        blocks: outcome.spectrum.blocks.clone(),
        worst_residual: outcome.spectrum.worst_residual(),
        wall_time_s: outcome.wall_time_s,
        summary: (&outcome.summary).into(),
        reference_checks: reference_checks(config.system.form, config.system.mu, &outcome.summary),
        vectors_file,
    };
    let mut manifest = Manifest::new("solve", config, (&outcome.system).into(), result)?;
    manifest.files = files;
    manifest.write(&dir.join("manifest.json"))?;
    Ok(manifest)
}

/// Writes a CSV through `write` into `dir/name`.
pub fn write_table(dir: &Path, name: &str, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = create(&dir.join(name))?;
    write(&mut w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{classify_spectrum, ClassificationRules, StateObservables};
    use crate::units::PhysicalSystem;

    fn summary() -> SpectrumSummary {
        let obs = [
            StateObservables { i0: 0.5, psi_origin: 0.25, parity_r: 1 },
            StateObservables { i0: 0.0, psi_origin: 0.0, parity_r: -1 },
        ];
        classify_spectrum(&[-1.0, -0.5], &obs, &PhysicalSystem::electron_deuteron(), &ClassificationRules::default())
            .unwrap()
    }

    #[test]
    fn states_csv_layout() {
        let mut buf = Vec::new();
        write_states_csv(&summary(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], STATES_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,-1.0000000000000000e0,0.0000000000000000e0,5.0000000000000000e-1,"));
        assert!(lines[1].ends_with(",1,true"));
        assert!(lines[2].ends_with(",-1,false"));
    }

    #[test]
    fn reference_checks_flag_discrepancies() {
        let s = summary();
        let checks = reference_checks(PotentialForm::Planar2Var, 0.00027, &s);
        assert_eq!(checks.len(), 3);
        assert!(!checks[0].within);
        assert!(reference_checks(PotentialForm::Planar2Var, 0.1, &s).is_empty());
        assert!(ReferenceCheck::new("x", Some(105.0), 100.0, 0.1).within);
        assert!(!ReferenceCheck::new("x", None, 100.0, 0.1).within);
    }
}
