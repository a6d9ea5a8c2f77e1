//! One-dimensional fourth-order stencils for `−d/ds (a(s) d/ds)`.
//!
//! The operator is the Richardson combination `(4/3)·L_h − (1/3)·L_2h` of
//! two conservative second-order forms. For constant `a` this is the
//! classic `(−1, 16, −30, 16, −1)/(12h²)` stencil. Every row is a sum of
//! pair terms `w·(u_i − u_j)`, which keeps the matrix symmetric.
//!
//! Dirichlet walls are handled with odd mirror ghosts: a ghost value is the
//! negated interior value at the reflected index, and any coefficient
//! sampled outside the domain is sampled at its reflection. Natural edges,
//! where `a` vanishes, drop every pair that crosses them.

use crate::grid::Axis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Edge {
    Dirichlet,
    Natural,
}

/// Symmetric banded matrix stored as full rows.
pub(crate) type Rows = Vec<Vec<(usize, f64)>>;

pub(crate) struct Conservative<'a> {
    pub axis: &'a Axis,
    pub coeff: &'a dyn Fn(f64) -> f64,
    pub lower: Edge,
    pub upper: Edge,
    /// Interior position no pair may cross.
    pub cut: Option<f64>,
}

impl Conservative<'_> {
    fn reflect(&self, s: f64) -> f64 {
        if s < self.axis.min {
            2.0 * self.axis.min - s
        } else if s > self.axis.max {
            2.0 * self.axis.max - s
        } else {
            s
        }
    }

    fn crosses_cut(&self, a: f64, b: f64) -> bool {
        self.cut.is_some_and(|c| (a - c) * (b - c) < 0.0)
    }

    pub fn rows(&self) -> Rows {
        let axis = self.axis;
        let n = axis.n as isize;
        let h = axis.spacing();
        let h2 = h * h;
        (0..n)
            .map(|i| {
                let si = axis.position(i as f64);
                let mut row: Vec<(usize, f64)> = Vec::with_capacity(5);
                let mut diag = 0.0;
                for step in [1isize, 2] {
                    for dir in [-1isize, 1] {
                        let j = i + dir * step;
                        let sj = axis.position(j as f64);
                        if self.crosses_cut(si, sj) {
                            continue;
                        }
                        let w = if step == 1 {
                            4.0 / 3.0 * (self.coeff)(self.reflect(axis.position(i as f64 + 0.5 * dir as f64))) / h2
                        } else {
                            -(self.coeff)(self.reflect(axis.position((i + dir) as f64))) / (12.0 * h2)
                        };
                        if (0..n).contains(&j) {
                            diag += w;
                            row.push((j as usize, -w));
                            continue;
                        }
                        let edge = if j < 0 { self.lower } else { self.upper };
                        if edge == Edge::Natural {
                            continue;
                        }
                        diag += w;
                        if let Some(img) = axis.wall_image(j) {
                            row.push((img, w));
                        }
                    }
                }
                row.push((i as usize, diag));
                merge(row)
            })
            .collect()
    }
}

fn merge(mut row: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    row.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len());
    for (j, v) in row {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += v,
            _ => out.push((j, v)),
        }
    }
    out
}

/// Constant-coefficient `−c·d²/ds²` with Dirichlet walls.
pub(crate) fn second_derivative(axis: &Axis, c: f64) -> Rows {
    Conservative { axis, coeff: &|_| c, lower: Edge::Dirichlet, upper: Edge::Dirichlet, cut: None }.rows()
}

/// Radial `−(1/x) d/dx (x d/dx)` in the symmetric form `X^{-1/2} A X^{-1/2}`.
///
/// `A` discretizes `−d/dx(|x| d/dx)`; the similarity `u = √|x| ψ` maps the
/// weighted problem onto a plain symmetric one. Edges at `x = 0` are
/// natural and pairs crossing `x = 0` are dropped, so the two half-lines
/// decouple.
pub(crate) fn radial(axis: &Axis) -> Rows {
    let edge = |s: f64| if s == 0.0 { Edge::Natural } else { Edge::Dirichlet };
    let cut = (axis.min < 0.0 && axis.max > 0.0).then_some(0.0);
    let rows = Conservative { axis, coeff: &|s: f64| s.abs(), lower: edge(axis.min), upper: edge(axis.max), cut }.rows();
    let scale: Vec<f64> = axis.points().iter().map(|x| x.abs().sqrt()).collect();
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| r.into_iter().map(|(j, v)| (j, v / (scale[i] * scale[j]))).collect())
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::grid::{AxisName, OffsetPolicy};
    use approx::assert_relative_eq;

    pub(crate) fn dense(rows: &Rows) -> Vec<Vec<f64>> {
        let n = rows.len();
        let mut m = vec![vec![0.0; n]; n];
        for (i, r) in rows.iter().enumerate() {
            for &(j, v) in r {
                m[i][j] += v;
            }
        }
        m
    }

    fn assert_symmetric(rows: &Rows) {
        let m = dense(rows);
        for i in 0..m.len() {
            for j in 0..m.len() {
                assert!((m[i][j] - m[j][i]).abs() <= 1e-14 * m[i][i].abs(), "({i},{j})");
            }
        }
    }

    #[test]
    fn interior_rows_are_classic_five_point() {
        let axis = Axis::new(AxisName::X, 0.0, 1.0, 20, OffsetPolicy::CellCentered).unwrap();
        let h = axis.spacing();
        let m = dense(&second_derivative(&axis, 1.0));
        let s = 12.0 * h * h;
        assert_relative_eq!(m[10][10] * s, 30.0, max_relative = 1e-12);
        assert_relative_eq!(m[10][9] * s, -16.0, max_relative = 1e-12);
        assert_relative_eq!(m[10][12] * s, 1.0, max_relative = 1e-12);
        assert_eq!(m[10][13], 0.0);
    }

    #[test]
    fn wall_rows_use_odd_ghosts() {
        let axis = Axis::new(AxisName::X, 0.0, 1.0, 20, OffsetPolicy::CellCentered).unwrap();
        let h = axis.spacing();
        let m = dense(&second_derivative(&axis, 1.0));
        let s = 12.0 * h * h;
        // ghosts u_{-1} = −u_0 and u_{-2} = −u_1
        assert_relative_eq!(m[0][0] * s, 30.0 + 16.0, max_relative = 1e-12);
        assert_relative_eq!(m[0][1] * s, -16.0 - 1.0, max_relative = 1e-12);
        assert_relative_eq!(m[1][1] * s, 30.0, max_relative = 1e-12);
        assert_relative_eq!(m[1][0] * s, -16.0 - 1.0, max_relative = 1e-12);

        let node = Axis::new(AxisName::X, 0.0, 1.0, 20, OffsetPolicy::NodeCentered).unwrap();
        let h = node.spacing();
        let m = dense(&second_derivative(&node, 1.0));
        let s = 12.0 * h * h;
        // wall node is zero, u_{-2} = −u_0
        assert_relative_eq!(m[0][0] * s, 30.0 - 1.0, max_relative = 1e-12);
        assert_relative_eq!(m[0][1] * s, -16.0, max_relative = 1e-12);
        assert_relative_eq!(m[1][1] * s, 30.0, max_relative = 1e-12);
    }

    #[test]
    fn variable_coefficients_stay_symmetric() {
        for policy in [OffsetPolicy::CellCentered, OffsetPolicy::NodeCentered] {
            let axis = Axis::new(AxisName::Xi, 1.0, 4.0, 17, policy).unwrap();
            let c = |s: f64| 1.0 + s * s;
            assert_symmetric(
                &Conservative { axis: &axis, coeff: &c, lower: Edge::Dirichlet, upper: Edge::Dirichlet, cut: None }.rows(),
            );
            let c = |s: f64| s * s - 1.0;
            assert_symmetric(
                &Conservative { axis: &axis, coeff: &c, lower: Edge::Natural, upper: Edge::Dirichlet, cut: None }.rows(),
            );
        }
        let x = Axis::new(AxisName::X, -3.0, 3.0, 16, OffsetPolicy::CellCentered).unwrap();
        assert_symmetric(&radial(&x));
    }

    #[test]
    fn radial_halves_decouple() {
        let x = Axis::new(AxisName::X, -3.0, 3.0, 16, OffsetPolicy::CellCentered).unwrap();
        let m = dense(&radial(&x));
        for i in 0..8 {
            for j in 8..16 {
                assert_eq!(m[i][j], 0.0);
            }
        }
        // the two halves are mirror images
        for i in 0..16 {
            for j in 0..16 {
                assert_relative_eq!(m[i][j], m[15 - i][15 - j], max_relative = 1e-12);
            }
        }
    }
}
