//! Lowest states of a Hamiltonian on a grid, solved sector by sector.
//!
//! Every physical parity block is solved separately, each state is
//! unfolded to the full grid once to measure its observables, and the
//! per-sector lists are merged by energy. Vectors are dropped after
//! measurement unless asked for.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::analysis::{grid_measure, observe_state, StateObservables};
use crate::eigensolve::{dense::dense_sparse, peak_index, solve_lowest, LanczosOptions, SolverStats};
use crate::error::{Error, Result};
use crate::grid::{AxisName, GridSpec};
use crate::operators::{build_hamiltonian, fold, physical_sectors, CsrMatrix, HamiltonianSpec, Sector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    /// Dense up to `dense_limit` rows per block, Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Number of lowest states kept after merging sectors.
    pub k: usize,
    pub tol: f64,
    pub method: SolverMethod,
    pub dense_limit: usize,
    /// Fold every symmetric axis; otherwise only the mandatory radial fold
    /// of cylindrical forms is applied.
    pub use_symmetry: bool,
    pub lanczos: LanczosOptions,
    pub keep_vectors: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            k: 100,
            tol: 1e-9,
            method: SolverMethod::Auto,
            dense_limit: 6000,
            use_symmetry: true,
            lanczos: LanczosOptions::default(),
            keep_vectors: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumState {
    pub energy: f64,
    pub residual: f64,
    /// Index into [`Spectrum::blocks`].
    pub block: usize,
    pub observables: StateObservables,
    /// Euclidean unit vector on the full grid, largest component positive.
    pub vector: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockRun {
    /// `None` when the full operator was solved unfolded.
    pub sector: Option<Sector>,
    pub dim: usize,
    pub requested: usize,
    pub stats: SolverStats,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub grid: GridSpec,
    pub measure: Vec<f64>,
    pub blocks: Vec<BlockRun>,
    /// Ascending by energy.
    pub states: Vec<SpectrumState>,
}

impl Spectrum {
    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    pub fn observables(&self) -> Vec<StateObservables> {
        self.states.iter().map(|s| s.observables).collect()
    }

    pub fn worst_residual(&self) -> f64 {
        self.states.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    pub fn total_wall_time(&self) -> f64 {
        self.blocks.iter().map(|b| b.stats.wall_time_s).sum()
    }
}

fn foldable(grid: &GridSpec, axis: AxisName) -> bool {
    grid.axis(axis).is_some_and(|a| {
        a.is_symmetric() && a.n % 2 == 0 && a.policy == crate::grid::OffsetPolicy::CellCentered
    })
}

/// Blocks to solve for `spec` on `grid`.
fn plan_sectors(spec: &HamiltonianSpec, grid: &GridSpec, use_symmetry: bool) -> Result<Vec<Option<Sector>>> {
    let form = spec.potential.form;
    let radial_fold = form.is_cylindrical() && grid.axis(AxisName::X).is_some_and(|a| a.min < 0.0);
    if radial_fold && !foldable(grid, AxisName::X) {
        return Err(Error::invalid("grid", "a radial axis reaching x < 0 must be symmetric with even length"));
    }
    if use_symmetry && form.axes().iter().all(|&a| foldable(grid, a) || (a == AxisName::X && !radial_fold && form.is_cylindrical())) {
        let mut out = Vec::new();
        for s in physical_sectors(form) {
            let parities: Vec<_> = s.parities.into_iter().filter(|&(a, _)| foldable(grid, a)).collect();
            let s = Sector { parities };
            if !out.contains(&Some(s.clone())) {
                out.push(Some(s));
            }
        }
        return Ok(out);
    }
    if radial_fold {
        return Ok(vec![Some(Sector { parities: vec![(AxisName::X, 1)] })]);
    }
    Ok(vec![None])
}

fn solve_block(matrix: &CsrMatrix, k: usize, opts: &SolveOptions) -> Result<crate::eigensolve::EigenSolution> {
    let n = matrix.dim();
    let dense = match opts.method {
        SolverMethod::Dense => true,
        SolverMethod::Lanczos => false,
        SolverMethod::Auto => n <= opts.dense_limit || k >= n,
    };
    if dense {
        dense_sparse(matrix, k.min(n), usize::MAX)
    } else {
        solve_lowest(matrix, k.min(n - 1), opts.tol, &opts.lanczos)
    }
}

/// Lowest `opts.k` states of the Hamiltonian, merged across parity blocks.
pub fn solve_spectrum(spec: &HamiltonianSpec, grid: &GridSpec, opts: &SolveOptions) -> Result<Spectrum> {
    if opts.k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    let op = build_hamiltonian(spec, grid)?;
    let measure = grid_measure(grid, spec.potential.form.is_cylindrical());
    let plan = plan_sectors(spec, grid, opts.use_symmetry)?;
    let mut blocks = Vec::new();
    let mut states = Vec::new();
    for (b, sector) in plan.into_iter().enumerate() {
        let (matrix, map) = match &sector {
            Some(s) => {
                let (m, f) = fold(&op.matrix, grid, s)?;
                (m, Some(f))
            }
            None => (op.matrix.clone(), None),
        };
        let requested = opts.k.min(matrix.dim());
        info!(
            "block {}: dimension {}, {} states",
            sector.as_ref().map_or("full".to_string(), |s| s.to_string()),
            matrix.dim(),
            requested
        );
        let sol = solve_block(&matrix, requested, opts)?;
        drop(matrix);
        debug!("block solved in {:.1} s", sol.stats.wall_time_s);
        for i in 0..sol.k() {
            let mut u = match &map {
                Some(f) => f.unfold(sol.vector(i)),
                None => sol.vector(i).to_vec(),
            };
            if u[peak_index(&u)] < 0.0 {
                u.iter_mut().for_each(|x| *x = -*x);
            }
            let observables = observe_state(&u, grid, &measure)?;
            states.push(SpectrumState {
                energy: sol.eigenvalues[i],
                residual: sol.residuals[i],
                block: b,
                observables,
                vector: opts.keep_vectors.then_some(u),
            });
        }
        blocks.push(BlockRun { sector, dim: map.as_ref().map_or(op.dimension(), |f| f.dim()), requested, stats: sol.stats });
    }
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.block.cmp(&b.block)));
    states.truncate(opts.k);
    Ok(Spectrum { grid: grid.clone(), measure, blocks, states })
}
