//! Dimensionless Coulomb potentials of the light–heavy–heavy system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::AxisName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PotentialForm {
    /// Light particle confined to a line through the midpoint of the heavy
    /// pair; coordinates `(R, x)`.
    #[serde(rename = "planar-2var")]
    Planar2Var,
    /// Light particle on the symmetry plane, `x` radial; coordinates `(R, x)`.
    #[serde(rename = "cylinder-2var")]
    Cylinder2Var,
    /// Light particle anywhere, axially symmetric; coordinates `(R, x, y)`.
    #[serde(rename = "cylinder-3var")]
    Cylinder3Var,
    /// Fixed-separation problem in prolate spheroidal `(ξ, η)`.
    #[serde(rename = "prolate-fixed-r")]
    ProlateFixedR,
}

impl PotentialForm {
    pub fn axes(self) -> &'static [AxisName] {
        match self {
            PotentialForm::Planar2Var | PotentialForm::Cylinder2Var => &[AxisName::R, AxisName::X],
            PotentialForm::Cylinder3Var => &[AxisName::R, AxisName::X, AxisName::Y],
            PotentialForm::ProlateFixedR => &[AxisName::Xi, AxisName::Eta],
        }
    }

    /// Whether the `x` axis carries the cylindrical `|x|` measure.
    pub fn is_cylindrical(self) -> bool {
        matches!(self, PotentialForm::Cylinder2Var | PotentialForm::Cylinder3Var)
    }

    pub fn name(self) -> &'static str {
        match self {
            PotentialForm::Planar2Var => "planar-2var",
            PotentialForm::Cylinder2Var => "cylinder-2var",
            PotentialForm::Cylinder3Var => "cylinder-3var",
            PotentialForm::ProlateFixedR => "prolate-fixed-r",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub z: f64,
    pub form: PotentialForm,
    /// Softening length `ε`; zero gives the bare Coulomb terms.
    #[serde(default)]
    pub softening: f64,
}

impl PotentialSpec {
    pub fn new(form: PotentialForm, z: f64) -> Self {
        Self { z, form, softening: 0.0 }
    }

    pub fn with_softening(mut self, softening: f64) -> Self {
        self.softening = softening;
        self
    }

    fn check(&self, point: &[f64]) -> Result<()> {
        let want = self.form.axes().len();
        if point.len() != want {
            return Err(Error::DimensionMismatch { expected: want, got: point.len() });
        }
        if !(self.softening.is_finite() && self.softening >= 0.0) {
            return Err(Error::invalid("softening", "must be a non-negative number"));
        }
        if self.form == PotentialForm::ProlateFixedR && self.softening != 0.0 {
            return Err(Error::invalid("softening", "not defined for the prolate form"));
        }
        Ok(())
    }

    /// `1/√(s² + ε²)`, failing on an unsoftened zero.
    fn inv(&self, s2: f64, point: &[f64]) -> Result<f64> {
        let d2 = s2 + self.softening * self.softening;
        if d2 == 0.0 {
            return Err(Error::Singularity { point: point.to_vec() });
        }
        Ok(1.0 / d2.sqrt())
    }
}

/// Potential energy at `point`, ordered as [`PotentialForm::axes`].
pub fn eval_potential(spec: &PotentialSpec, point: &[f64]) -> Result<f64> {
    spec.check(point)?;
    let z = spec.z;
    match spec.form {
        PotentialForm::Planar2Var | PotentialForm::Cylinder2Var => {
            let (r, x) = (point[0], point[1]);
            Ok(z * spec.inv(r * r, point)? - 2.0 * spec.inv(x * x + 0.25 * r * r, point)?)
        }
        PotentialForm::Cylinder3Var => {
            let (r, x, y) = (point[0], point[1], point[2]);
            let a = 0.5 * r - y;
            let b = 0.5 * r + y;
            Ok(z * spec.inv(r * r, point)? - spec.inv(x * x + a * a, point)? - spec.inv(x * x + b * b, point)?)
        }
        PotentialForm::ProlateFixedR => {
            let (xi, eta) = (point[0], point[1]);
            let d = xi * xi - eta * eta;
            if d == 0.0 {
                return Err(Error::Singularity { point: point.to_vec() });
            }
            Ok(0.25 * z - xi / d)
        }
    }
}

/// Analytic gradient of [`eval_potential`].
pub fn eval_gradient(spec: &PotentialSpec, point: &[f64]) -> Result<Vec<f64>> {
    spec.check(point)?;
    let z = spec.z;
    match spec.form {
        PotentialForm::Planar2Var | PotentialForm::Cylinder2Var => {
            let (r, x) = (point[0], point[1]);
            let ir = spec.inv(r * r, point)?;
            let is = spec.inv(x * x + 0.25 * r * r, point)?;
            let is3 = is * is * is;
            Ok(vec![-z * r * ir * ir * ir + 0.5 * r * is3, 2.0 * x * is3])
        }
        PotentialForm::Cylinder3Var => {
            let (r, x, y) = (point[0], point[1], point[2]);
            let a = 0.5 * r - y;
            let b = 0.5 * r + y;
            let ir = spec.inv(r * r, point)?;
            let ia = spec.inv(x * x + a * a, point)?.powi(3);
            let ib = spec.inv(x * x + b * b, point)?.powi(3);
            Ok(vec![
                -z * r * ir * ir * ir + 0.5 * (a * ia + b * ib),
                x * (ia + ib),
                -a * ia + b * ib,
            ])
        }
        PotentialForm::ProlateFixedR => {
            let (xi, eta) = (point[0], point[1]);
            let d = xi * xi - eta * eta;
            if d == 0.0 {
                return Err(Error::Singularity { point: point.to_vec() });
            }
            let d2 = d * d;
            Ok(vec![(xi * xi + eta * eta) / d2, -2.0 * xi * eta / d2])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PLANAR: PotentialSpec = PotentialSpec { z: 1.0, form: PotentialForm::Planar2Var, softening: 0.0 };
    const THREE: PotentialSpec = PotentialSpec { z: 1.0, form: PotentialForm::Cylinder3Var, softening: 0.0 };

    #[test]
    fn direct_values() {
        assert_relative_eq!(eval_potential(&PLANAR, &[2.0, 0.0]).unwrap(), -1.5);
        assert_relative_eq!(eval_potential(&THREE, &[2.0, 0.0, 0.0]).unwrap(), -1.5);
    }

    #[test]
    fn singular_points() {
        assert!(matches!(eval_potential(&THREE, &[2.0, 0.0, 1.0]), Err(Error::Singularity { .. })));
        assert!(matches!(eval_potential(&PLANAR, &[0.0, 1.0]), Err(Error::Singularity { .. })));
        assert!(eval_gradient(&THREE, &[2.0, 0.0, -1.0]).is_err());
        let soft = THREE.with_softening(0.1);
        assert!(eval_potential(&soft, &[2.0, 0.0, 1.0]).unwrap().is_finite());
    }

    #[test]
    fn wrong_arity() {
        assert!(matches!(eval_potential(&PLANAR, &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn symmetric_gradient_components() {
        assert_eq!(eval_gradient(&PLANAR, &[1.3, 0.0]).unwrap()[1], 0.0);
        assert_eq!(eval_gradient(&THREE, &[1.3, 0.4, 0.0]).unwrap()[2], 0.0);
    }

    fn central_difference(spec: &PotentialSpec, p: &[f64], h: f64) -> Vec<f64> {
        (0..p.len())
            .map(|d| {
                let mut a = p.to_vec();
                let mut b = p.to_vec();
                a[d] += h;
                b[d] -= h;
                (eval_potential(spec, &a).unwrap() - eval_potential(spec, &b).unwrap()) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let specs = [
            PLANAR,
            PotentialSpec::new(PotentialForm::Cylinder2Var, 2.0),
            THREE,
            THREE.with_softening(0.3),
            PotentialSpec::new(PotentialForm::ProlateFixedR, 1.0),
        ];
        for spec in specs {
            for _ in 0..100 {
                let p: Vec<f64> = match spec.form {
                    PotentialForm::ProlateFixedR => vec![rng.random_range(1.2..6.0), rng.random_range(-0.9..0.9)],
                    _ => (0..spec.form.axes().len())
                        .map(|_| {
                            let v: f64 = rng.random_range(0.3..4.0);
                            if rng.random::<bool>() { v } else { -v }
                        })
                        .collect(),
                };
                let g = eval_gradient(&spec, &p).unwrap();
                let h1 = central_difference(&spec, &p, 1e-3);
                let h2 = central_difference(&spec, &p, 5e-4);
                for d in 0..p.len() {
                    // second-order differences: the error shrinks fourfold when h halves
                    let e1 = (h1[d] - g[d]).abs();
                    let e2 = (h2[d] - g[d]).abs();
                    assert!(e2 <= 1e-5 * g[d].abs().max(1.0), "{:?} {p:?} axis {d}: {e2}", spec.form);
                    assert!(e2 <= 0.3 * e1 + 1e-9, "{:?} {p:?} axis {d}: {e1} -> {e2}", spec.form);
                }
            }
        }
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) < 0.0) == (flo < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn attractive_region_near_coalescence_is_narrow() {
        // V(R, x) < 0 only for |x| < R √(4/Z² − 1/4)
        for &r in &[0.05, 0.1, 0.3] {
            let f = |x: f64| eval_potential(&PLANAR, &[r, x]).unwrap();
            let root = bisect(f, 1e-9, 10.0);
            assert_relative_eq!(root, r * (4.0f64 - 0.25).sqrt(), max_relative = 1e-10);
            assert!(f(0.5 * root) < 0.0);
            assert!(f(1.5 * root) > 0.0);
            assert!(f(-0.5 * root) < 0.0);
        }
    }

    proptest! {
        #[test]
        fn parity_invariance(r in 0.01f64..10.0, x in -10.0f64..10.0, y in -10.0f64..10.0, sr: bool, sx: bool, sy: bool) {
            let s = |b: bool| if b { -1.0 } else { 1.0 };
            let v = eval_potential(&THREE, &[r, x, y]).unwrap();
            let w = eval_potential(&THREE, &[s(sr) * r, s(sx) * x, s(sy) * y]).unwrap();
            prop_assert!((v - w).abs() <= 1e-12 * v.abs().max(1.0));
            let v2 = eval_potential(&PLANAR, &[r, x]).unwrap();
            let w2 = eval_potential(&PLANAR, &[s(sr) * r, s(sx) * x]).unwrap();
            prop_assert!((v2 - w2).abs() <= 1e-12 * v2.abs().max(1.0));
        }

        #[test]
        fn softening_is_monotone(r in 0.01f64..10.0, x in -10.0f64..10.0, e1 in 0.0f64..2.0, de in 0.01f64..2.0) {
            let a = PLANAR.with_softening(e1);
            let b = PLANAR.with_softening(e1 + de);
            let attract = |s: &PotentialSpec| s.inv(x * x + 0.25 * r * r, &[]).unwrap();
            let repel = |s: &PotentialSpec| s.inv(r * r, &[]).unwrap();
            prop_assert!(attract(&b) < attract(&a));
            prop_assert!(repel(&b) < repel(&a));
        }
    }

    #[test]
    fn zero_softening_matches_bare_formula() {
        let p = [0.7, -1.1];
        let bare = 1.0 / 0.7 - 2.0 / (1.21f64 + 0.1225).sqrt();
        assert_relative_eq!(eval_potential(&PLANAR, &p).unwrap(), bare, max_relative = 1e-15);
    }
}
