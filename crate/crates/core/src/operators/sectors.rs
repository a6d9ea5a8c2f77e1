//! Reflection-parity blocks of operators on symmetric grids.
//!
//! For a set `F` of folded axes the reflections generate a group of
//! `2^|F|` elements. A sector fixes a character `χ` (one parity per folded
//! axis) and keeps the grid points whose folded indices sit in the upper
//! half. Its block is `B(i, j) = Σ_g χ(g) A(i, g·j)`, and a block vector
//! unfolds to `u[g·i] = 2^{-|F|/2} χ(g) v[i]`.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::CsrMatrix;
use crate::error::{Error, Result};
use crate::grid::{AxisName, GridSpec, OffsetPolicy};
use crate::potentials::PotentialForm;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sector {
    pub parities: Vec<(AxisName, i8)>,
}

impl Sector {
    pub fn parity(&self, axis: AxisName) -> Option<i8> {
        self.parities.iter().find(|p| p.0 == axis).map(|p| p.1)
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.parities.iter().map(|(a, p)| format!("{a}{}", if *p > 0 { '+' } else { '-' })).collect();
        f.write_str(&parts.join(","))
    }
}

/// Sectors carrying the physical states of a form.
///
/// The cylindrical forms sample the radial coordinate on both sides of the
/// axis, which covers every point twice; only `x`-even states are physical.
pub fn physical_sectors(form: PotentialForm) -> Vec<Sector> {
    let axes = form.axes();
    let mut out = Vec::new();
    for mask in 0..(1u32 << axes.len()) {
        let parities: Vec<(AxisName, i8)> =
            axes.iter().enumerate().map(|(d, &a)| (a, if mask >> d & 1 == 1 { -1 } else { 1 })).collect();
        let sector = Sector { parities };
        if form.is_cylindrical() && sector.parity(AxisName::X) == Some(-1) {
            continue;
        }
        out.push(sector);
    }
    out
}

/// Index maps between a sector and the full grid.
#[derive(Debug, Clone)]
pub struct FoldMap {
    pub sector: Sector,
    pub full_dim: usize,
    /// Full-grid index of each sector point.
    pub reps: Vec<usize>,
    /// `(full index, coefficient)` images of each sector point.
    pub images: Vec<Vec<(usize, f64)>>,
}

impl FoldMap {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn unfold(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.full_dim];
        self.unfold_into(v, &mut out);
        out
    }

    pub fn unfold_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.dim());
        for (imgs, &vi) in self.images.iter().zip(v) {
            for &(k, c) in imgs {
                out[k] = c * vi;
            }
        }
    }

    /// Projects a full vector onto the sector basis.
    pub fn restrict(&self, u: &[f64]) -> Vec<f64> {
        self.images.iter().map(|imgs| imgs.iter().map(|&(k, c)| c * u[k]).sum()).collect()
    }
}

/// Parity block of `matrix` for `sector` on `grid`.
pub fn fold(matrix: &CsrMatrix, grid: &GridSpec, sector: &Sector) -> Result<(CsrMatrix, FoldMap)> {
    if matrix.dim() != grid.total_points() {
        return Err(Error::DimensionMismatch { expected: grid.total_points(), got: matrix.dim() });
    }
    let mut folded = Vec::new();
    for &(name, p) in &sector.parities {
        let d = grid.axis_position(name).ok_or_else(|| Error::invalid("sector", format!("grid has no axis {name}")))?;
        let a = &grid.axes[d];
        if !(a.is_symmetric() && a.n.is_multiple_of(2) && a.policy == OffsetPolicy::CellCentered) {
            return Err(Error::invalid(
                "sector",
                format!("axis {name} must be symmetric, cell-centered and of even length to fold"),
            ));
        }
        if p != 1 && p != -1 {
            return Err(Error::invalid("sector", "parities must be ±1"));
        }
        folded.push((d, p));
    }

    let shape = grid.shape();
    let reduced: Vec<usize> = (0..shape.len())
        .map(|d| if folded.iter().any(|f| f.0 == d) { shape[d] / 2 } else { shape[d] })
        .collect();
    let sector_dim: usize = reduced.iter().product();
    let norm = (0.5f64).powf(folded.len() as f64 / 2.0);

    // sector index and character of every full-grid point
    let mut owner = vec![(0usize, 0.0f64); grid.total_points()];
    let mut reps = Vec::with_capacity(sector_dim);
    let mut images = vec![Vec::with_capacity(1 << folded.len()); sector_dim];
    for k in 0..grid.total_points() {
        let m = grid.multi_index(k);
        let mut s = 0usize;
        let mut chi = 1.0;
        let mut is_rep = true;
        for d in 0..shape.len() {
            let mut md = m[d];
            if let Some(&(_, p)) = folded.iter().find(|f| f.0 == d) {
                let half = shape[d] / 2;
                if md < half {
                    md = shape[d] - 1 - md;
                    chi *= p as f64;
                    is_rep = false;
                }
                md -= half;
            }
            s = s * reduced[d] + md;
        }
        owner[k] = (s, chi);
        images[s].push((k, chi * norm));
        if is_rep {
            reps.push(k);
        }
    }
    // reps were pushed in full-index order, which is also sector order
    debug_assert!(reps.iter().enumerate().all(|(s, &k)| owner[k].0 == s));

    let upper: Vec<Vec<(usize, f64)>> = reps
        .iter()
        .enumerate()
        .map(|(s, &k)| {
            matrix
                .row(k)
                .filter_map(|(c, v)| {
                    let (t, chi) = owner[c];
                    (t >= s).then_some((t, chi * v))
                })
                .collect()
        })
        .collect();
    let block = CsrMatrix::from_upper_rows(upper);
    Ok((block, FoldMap { sector: sector.clone(), full_dim: grid.total_points(), reps, images }))
}
