use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use quasicollision::analysis::SpectrumSummary;
use quasicollision::config::{RunConfig, PRESETS};
use quasicollision::control::{dipole_matrix_element, gradient_matrix_element, resonance_scan, ResonancePeak};
use quasicollision::output::{
    write_curve_csv, write_scan_csv, write_solve_bundle, write_states_csv, write_sweep_csv, write_table, Manifest,
};
use quasicollision::pipeline::run_solve;
use quasicollision::quasistatic::{effective_potential_scan, log_r_grid};
use quasicollision::sweeps::{mu_study, run_sweep, SweepAxis, SweepPlan, SweepRow};
use quasicollision::units::PhysicalSystem;
use quasicollision::Error;

#[derive(Parser)]
#[command(name = "qcoll", version, about = "Quasi-collision spectra of confined three-body systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest states of one configuration with quasi-collision flags.
    Solve(Common),
    /// Fixed-separation effective potential curves.
    Quasistatic(Common),
    /// Parameter sweep over mu, box half-width or basis size.
    Sweep(Common),
    /// Resonance scan of a dipole-driven transition.
    Control(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset, applied before the file and overrides.
    #[arg(long)]
    preset: Option<String>,
    /// `section.key=value` override; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> quasicollision::Result<(RunConfig, PathBuf)> {
        let mut config = match &self.preset {
            Some(name) => RunConfig::preset(name)?,
            None => RunConfig::default(),
        };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            let file = RunConfig::from_toml(&text)?;
            config = match (&self.preset, file.preset.as_deref()) {
                (None, Some(name)) => merge_preset(name, &text)?,
                _ => merge_file(config, &text)?,
            };
        }
        for o in &self.overrides {
            config.set(o)?;
        }
        if let Some(out) = &self.out {
            config.output_dir = out.display().to_string();
        }
        config.validate()?;
        let dir = PathBuf::from(&config.output_dir);
        Ok((config, dir))
    }
}

/// Lays the keys present in `text` over `base`.
fn merge_file(mut base: RunConfig, text: &str) -> quasicollision::Result<RunConfig> {
    let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    fn walk(prefix: &str, t: &toml::Table, out: &mut Vec<String>) {
        for (k, v) in t {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            match v {
                toml::Value::Table(sub) => walk(&key, sub, out),
                _ => out.push(format!("{key}={v}")),
            }
        }
    }
    let mut assignments = Vec::new();
    walk("", &table, &mut assignments);
    for a in assignments {
        base.set(&a)?;
    }
    Ok(base)
}

fn merge_preset(name: &str, text: &str) -> quasicollision::Result<RunConfig> {
    merge_file(RunConfig::preset(name)?, text)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParameter { .. } => 1,
        e if e.is_convergence() => 2,
        _ => 3,
    }
}

fn system() -> PhysicalSystem {
    PhysicalSystem::electron_deuteron()
}

fn cmd_solve(config: &RunConfig, dir: &Path) -> quasicollision::Result<()> {
    let outcome = run_solve(config)?;
    let manifest = write_solve_bundle(dir, config, &outcome)?;
    let s = &manifest.result.summary;
    println!(
        "{} states, ground {:.6} ({:.2} eV bound), first quasi-collision {}, proliferation {}",
        s.states,
        s.ground_energy,
        s.binding_ev,
        fmt_state(s.first_qc_index, s.first_qc_excitation_ev),
        fmt_state(s.proliferation_index, s.proliferation_excitation_ev),
    );
    for c in manifest.result.reference_checks.iter().filter(|c| !c.within) {
        println!("note: {} = {:?} differs from reference {} by more than {:.0}%", c.quantity, c.value, c.reference, 100.0 * c.tolerance_rel);
    }
    Ok(())
}

fn fmt_state(index: Option<usize>, ev: Option<f64>) -> String {
    match (index, ev) {
        (Some(i), Some(e)) => format!("#{i} at {e:.1} eV"),
        _ => "none".into(),
    }
}

#[derive(Serialize)]
struct QuasistaticResult {
    z: f64,
    beta_count: usize,
    repulsive_at_origin: bool,
    lowest_v_eff: Vec<f64>,
}

fn cmd_quasistatic(config: &RunConfig, dir: &Path) -> quasicollision::Result<()> {
    let q = &config.quasistatic;
    let rs = log_r_grid(q.r_min, q.r_max, q.r_points)?;
    let curve = effective_potential_scan(&rs, q.z, q.beta_count, &config.quasistatic_options())?;
    write_table(dir, "curve.csv", |w| write_curve_csv(&curve, w))?;
    let result = QuasistaticResult {
        z: q.z,
        beta_count: q.beta_count,
        repulsive_at_origin: curve.repulsive_at_origin,
        lowest_v_eff: curve.v_eff.iter().map(|v| v[0]).collect(),
    };
    let mut m = Manifest::new("quasistatic", config, (&system()).into(), result)?;
    m.files = vec!["curve.csv".into()];
    m.write(&dir.join("manifest.json"))?;
    println!(
        "{} separations, lowest v_eff {:.4} at R = {} ... {:.4} at R = {}; repulsive at origin: {}",
        rs.len(),
        curve.v_eff[0][0],
        rs[0],
        curve.v_eff[rs.len() - 1][0],
        rs[rs.len() - 1],
        curve.repulsive_at_origin
    );
    Ok(())
}

#[derive(Serialize)]
struct SweepResult {
    axis: SweepAxis,
    rows: Vec<SweepRow>,
    failures: usize,
    strictly_decreasing_first_qc_index: Option<bool>,
    ground_flagged_at_largest_mu: Option<bool>,
}

fn cmd_sweep(config: &RunConfig, dir: &Path) -> quasicollision::Result<()> {
    let (table, decreasing, ground) = if config.sweep.axis == SweepAxis::Mu {
        let study = mu_study(config, &config.sweep.values)?;
        (study.table, Some(study.strictly_decreasing), Some(study.ground_flagged_at_largest))
    } else {
        (run_sweep(&SweepPlan::from_config(config))?, None, None)
    };
    let mut files = vec!["sweep.csv".to_string()];
    write_table(dir, "sweep.csv", |w| write_sweep_csv(&table, w))?;
    for (i, row) in table.rows.iter().enumerate() {
        if let Some(summary) = &row.summary {
            let name = format!("row_{i}_states.csv");
            write_table(dir, &name, |w| write_states_csv(summary, w))?;
            files.push(name);
        }
    }
    for row in &table.rows {
        println!(
            "{:>12}: {}",
            row.value,
            match &row.error {
                Some(e) => format!("failed: {e}"),
                None => format!(
                    "ground {:.6}, first quasi-collision {}",
                    row.ground_energy.unwrap_or(f64::NAN),
                    fmt_state(row.first_qc_index, row.first_qc_excitation_ev)
                ),
            }
        );
    }
    let failures = table.failures();
    let mut m = Manifest::new(
        "sweep",
        config,
        (&system()).into(),
        SweepResult {
            axis: table.axis,
            rows: table.rows,
            failures,
            strictly_decreasing_first_qc_index: decreasing,
            ground_flagged_at_largest_mu: ground,
        },
    )?;
    m.files = files;
    m.write(&dir.join("manifest.json"))?;
    if failures > 0 {
        return Err(Error::Config(format!("{failures} sweep rows failed; see manifest.json")));
    }
    Ok(())
}

#[derive(Serialize)]
struct ControlResult {
    initial: usize,
    final_state: usize,
    delta_eps: f64,
    gradient_element: f64,
    dipole_element: f64,
    spans_resonance: bool,
    t_exponent: Option<f64>,
    peaks: Vec<ResonancePeak>,
}

fn pick_final(summary: &SpectrumSummary, initial: usize, element: impl Fn(usize) -> f64) -> Option<usize> {
    let candidates = || (initial + 1..summary.reports.len()).filter(|&f| element(f).abs() > 1e-12);
    candidates().find(|&f| summary.reports[f].is_quasi_collision).or_else(|| candidates().next())
}

fn cmd_control(config: &RunConfig, dir: &Path) -> quasicollision::Result<()> {
    let mut config = config.clone();
    config.solver.keep_vectors = true;
    let outcome = run_solve(&config)?;
    let c = &config.control;
    let states = &outcome.spectrum.states;
    if c.initial >= states.len() {
        return Err(Error::Config(format!("control.initial = {} but only {} states", c.initial, states.len())));
    }
    let spec = config.hamiltonian_spec(&outcome.system)?.potential;
    let vec_of = |i: usize| states[i].vector.as_deref().expect("vectors kept");
    let element = |f: usize| gradient_matrix_element(vec_of(c.initial), vec_of(f), &outcome.grid, &spec, c.coordinate);
    let final_state = match c.final_state {
        Some(f) if f < states.len() && f != c.initial => f,
        Some(f) => return Err(Error::Config(format!("control.final_state = {f} is not a distinct computed state"))),
        None => pick_final(&outcome.summary, c.initial, |f| element(f).unwrap_or(0.0))
            .ok_or_else(|| Error::Config("no state couples to the initial state".into()))?,
    };
    let gradient = element(final_state)?;
    let dipole = dipole_matrix_element(vec_of(c.initial), vec_of(final_state), &outcome.grid, c.coordinate)?;
    let delta_eps = states[final_state].energy - states[c.initial].energy;
    let omegas: Vec<f64> = (0..c.omega_points)
        .map(|i| delta_eps * (1.0 - c.omega_span + 2.0 * c.omega_span * i as f64 / (c.omega_points - 1) as f64))
        .collect();
    let durations: Vec<f64> = if c.t_points == 1 {
        vec![c.t_min]
    } else {
        let r = (c.t_max / c.t_min).ln();
        (0..c.t_points).map(|i| c.t_min * (r * i as f64 / (c.t_points - 1) as f64).exp()).collect()
    };
    let scan = resonance_scan(&omegas, &durations, delta_eps, gradient, c.e_field, c.prefactor)?;
    write_table(dir, "scan.csv", |w| write_scan_csv(&scan, w))?;
    println!(
        "transition {} -> {}: delta_eps {:.6}, <f|dV/d{}|i> = {:.3e}, <f|{}|i> = {:.3e}, T exponent {}",
        c.initial,
        final_state,
        delta_eps,
        c.coordinate,
        gradient,
        c.coordinate,
        dipole,
        scan.t_exponent.map_or("n/a".into(), |e| format!("{e:.3}"))
    );
    let result = ControlResult {
        initial: c.initial,
        final_state,
        delta_eps,
        gradient_element: gradient,
        dipole_element: dipole,
        spans_resonance: scan.spans_resonance,
        t_exponent: scan.t_exponent,
        peaks: scan.peaks,
    };
    let mut m = Manifest::new("control", &config, (&outcome.system).into(), result)?;
    m.files = vec!["scan.csv".into()];
    m.write(&dir.join("manifest.json"))?;
    Ok(())
}

fn init_threads() {
    if let Some(n) = std::env::var("QCOLL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
}

type Runner = fn(&RunConfig, &Path) -> quasicollision::Result<()>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    init_threads();
    let cli = Cli::parse();
    let (common, run): (&Common, Runner) = match &cli.command {
        Command::Solve(c) => (c, cmd_solve),
        Command::Quasistatic(c) => (c, cmd_quasistatic),
        Command::Sweep(c) => (c, cmd_sweep),
        Command::Control(c) => (c, cmd_control),
    };
    let (config, dir) = match common.load() {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(name) = &common.preset {
                if !PRESETS.contains(&name.as_str()) {
                    eprintln!("known presets: {}", PRESETS.join(", "));
                }
            }
            return ExitCode::from(1);
        }
    };
    info!("writing to {}", dir.display());
    match run(&config, &dir) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
