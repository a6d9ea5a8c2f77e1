//! Staggered rectangular grids over the dimensionless coordinates.
//!
//! Dirichlet walls sit outside the stored points under both offset
//! policies. With the default cell-centered policy an even point count on a
//! symmetric interval never places a point on the coordinate origin, which
//! keeps the Coulomb singularities off the grid.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisName {
    /// Heavy-particle separation `R̃`.
    #[serde(rename = "R", alias = "r")]
    R,
    /// Light-particle coordinate `x̃` (radial in the cylinder forms).
    X,
    /// Light-particle coordinate `ỹ` along the heavy-particle axis.
    Y,
    /// Prolate spheroidal `ξ ≥ 1`.
    Xi,
    /// Prolate spheroidal `η ∈ [−1, 1]`.
    Eta,
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AxisName::R => "R",
            AxisName::X => "x",
            AxisName::Y => "y",
            AxisName::Xi => "xi",
            AxisName::Eta => "eta",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffsetPolicy {
    /// Points at `min + (i + ½)h`, `h = (max − min)/n`.
    #[default]
    CellCentered,
    /// Points at `min + i·h`, `i = 1..=n`, `h = (max − min)/(n + 1)`.
    NodeCentered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub n: usize,
    pub policy: OffsetPolicy,
}

/// Two grid points bracketing a coordinate value, with linear weights.
///
/// A `None` side is the Dirichlet wall, where the field vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lower: Option<usize>,
    pub upper: Option<usize>,
    pub w_lower: f64,
    pub w_upper: f64,
}

impl Bracket {
    /// Interpolates a field sampled along the axis.
    pub fn interpolate(&self, sample: impl Fn(usize) -> f64) -> f64 {
        self.lower.map_or(0.0, |i| self.w_lower * sample(i))
            + self.upper.map_or(0.0, |i| self.w_upper * sample(i))
    }
}

impl Axis {
    pub fn new(name: AxisName, min: f64, max: f64, n: usize, policy: OffsetPolicy) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::invalid(format!("axis {name}"), format!("bounds [{min}, {max}] are not ordered")));
        }
        if n < 4 {
            return Err(Error::invalid(format!("axis {name}"), format!("needs at least 4 points, got {n}")));
        }
        Ok(Self { name, min, max, n, policy })
    }

    pub fn spacing(&self) -> f64 {
        match self.policy {
            OffsetPolicy::CellCentered => (self.max - self.min) / self.n as f64,
            OffsetPolicy::NodeCentered => (self.max - self.min) / (self.n + 1) as f64,
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.position(i as f64)
    }

    /// Coordinate of a (possibly fractional or out-of-range) index.
    pub(crate) fn position(&self, i: f64) -> f64 {
        let h = self.spacing();
        match self.policy {
            OffsetPolicy::CellCentered => self.min + (i + 0.5) * h,
            OffsetPolicy::NodeCentered => self.min + (i + 1.0) * h,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (self.min + self.max).abs() <= 1e-12 * (self.max - self.min)
    }

    /// Index of the point reflected through the middle of the axis.
    pub fn mirror(&self, i: usize) -> usize {
        self.n - 1 - i
    }

    /// Maps an out-of-range neighbour index onto its interior image under
    /// an odd reflection through the nearest wall.
    ///
    /// Returns `None` when the neighbour sits exactly on the wall, where the
    /// field is zero.
    pub(crate) fn wall_image(&self, j: isize) -> Option<usize> {
        let n = self.n as isize;
        let img = match self.policy {
            OffsetPolicy::CellCentered => {
                if j < 0 {
                    -j - 1
                } else {
                    2 * n - 1 - j
                }
            }
            OffsetPolicy::NodeCentered => {
                if j == -1 || j == n {
                    return None;
                }
                if j < 0 {
                    -j - 2
                } else {
                    2 * n - j
                }
            }
        };
        (0..n).contains(&img).then_some(img as usize)
    }

    /// Bracketing indices and linear weights for `value`.
    pub fn nearest_plane_indices(&self, value: f64) -> Result<Bracket> {
        if !(value >= self.min && value <= self.max) {
            return Err(Error::invalid(
                format!("axis {}", self.name),
                format!("value {value} outside [{}, {}]", self.min, self.max),
            ));
        }
        let h = self.spacing();
        let s = match self.policy {
            OffsetPolicy::CellCentered => (value - self.min) / h - 0.5,
            OffsetPolicy::NodeCentered => (value - self.min) / h - 1.0,
        };
        let nearest = s.round();
        if (s - nearest).abs() <= 1e-10 && nearest >= 0.0 && nearest < self.n as f64 {
            let i = nearest as usize;
            return Ok(Bracket { lower: Some(i), upper: None, w_lower: 1.0, w_upper: 0.0 });
        }
        let lo = s.floor();
        let frac = s - lo;
        let idx = |f: f64| (f >= 0.0 && f < self.n as f64).then_some(f as usize);
        Ok(Bracket { lower: idx(lo), upper: idx(lo + 1.0), w_lower: 1.0 - frac, w_upper: frac })
    }
}

/// Tensor-product grid; linear indices are row-major over `axes` (the last
/// axis varies fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::invalid("grid", "needs at least one axis"));
        }
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::invalid("grid", format!("duplicate axis {}", a.name)));
            }
        }
        Ok(Self { axes })
    }

    pub fn total_points(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub fn axis_position(&self, name: AxisName) -> Option<usize> {
        self.axes.iter().position(|a| a.name == name)
    }

    pub fn axis(&self, name: AxisName) -> Option<&Axis> {
        self.axes.iter().find(|a| a.name == name)
    }

    /// Product of the axis spacings.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.axes.len()];
        for d in (0..self.axes.len().saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * self.axes[d + 1].n;
        }
        strides
    }

    pub fn linear_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.axes.len());
        multi.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.n + i)
    }

    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for (d, a) in self.axes.iter().enumerate().rev() {
            out[d] = k % a.n;
            k /= a.n;
        }
        out
    }

    pub fn coordinates(&self, k: usize) -> Vec<f64> {
        self.multi_index(k).iter().zip(&self.axes).map(|(&i, a)| a.point(i)).collect()
    }

    pub fn nearest_plane_indices(&self, axis: AxisName, value: f64) -> Result<Bracket> {
        self.axis(axis)
            .ok_or_else(|| Error::invalid("axis", format!("grid has no axis {axis}")))?
            .nearest_plane_indices(value)
    }

    /// Stable hash of the grid parameters, recorded in run manifests.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for a in &self.axes {
            h.update(format!("{}:{:e}:{:e}:{}:{:?};", a.name, a.min, a.max, a.n, a.policy).as_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Builds a cell-centered grid from `(name, min, max, n)` tuples.
pub fn make_box_grid(axes: &[(AxisName, f64, f64, usize)]) -> Result<GridSpec> {
    let axes = axes
        .iter()
        .map(|&(name, min, max, n)| Axis::new(name, min, max, n, OffsetPolicy::CellCentered))
        .collect::<Result<Vec<_>>>()?;
    GridSpec::new(axes)
}
