//! First-order amplitudes for dipole-driven transitions between computed
//! states, and their resonance structure in pulse frequency and duration.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AxisName, GridSpec};
use crate::potentials::{eval_gradient, PotentialSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub e_field: f64,
    /// Angular frequency in energy units (`ħ = 1`).
    pub omega: f64,
    pub t: f64,
}

impl PulseSpec {
    pub fn new(e_field: f64, omega: f64, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::invalid("T", "must be positive"));
        }
        if !(e_field.is_finite() && e_field >= 0.0) {
            return Err(Error::invalid("E_field", "must be non-negative"));
        }
        if !omega.is_finite() {
            return Err(Error::invalid("omega", "must be finite"));
        }
        Ok(Self { e_field, omega, t })
    }
}

fn check_pair(u_i: &[f64], u_f: &[f64], grid: &GridSpec) -> Result<()> {
    let n = grid.total_points();
    for u in [u_i, u_f] {
        if u.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: u.len() });
        }
    }
    Ok(())
}

fn coordinate(grid: &GridSpec, which: AxisName) -> Result<usize> {
    grid.axis_position(which).ok_or_else(|| Error::invalid("coordinate", format!("grid has no axis {which}")))
}

/// `⟨φ_f| q |φ_i⟩` for solver vectors on `grid`.
///
/// Solver vectors already carry the square root of the grid measure, so the
/// quadrature is a plain weighted dot product.
pub fn dipole_matrix_element(u_i: &[f64], u_f: &[f64], grid: &GridSpec, which: AxisName) -> Result<f64> {
    check_pair(u_i, u_f, grid)?;
    let d = coordinate(grid, which)?;
    let axis = &grid.axes[d];
    Ok((0..u_i.len()).map(|k| u_f[k] * axis.point(grid.multi_index(k)[d]) * u_i[k]).sum())
}

/// `⟨φ_f| ∂V/∂q |φ_i⟩` with the analytic gradient of `spec`.
pub fn gradient_matrix_element(
    u_i: &[f64],
    u_f: &[f64],
    grid: &GridSpec,
    spec: &PotentialSpec,
    which: AxisName,
) -> Result<f64> {
    check_pair(u_i, u_f, grid)?;
    let d = coordinate(grid, which)?;
    (0..u_i.len())
        .into_par_iter()
        .map(|k| Ok(u_f[k] * eval_gradient(spec, &grid.coordinates(k))?[d] * u_i[k]))
        .collect::<Result<Vec<f64>>>()
        .map(|terms| terms.iter().sum())
}

/// `∫₀ᵀ t² e^{iδt} dt`.
pub fn time_integral(delta: f64, t: f64) -> Complex64 {
    let x = delta * t;
    if x.abs() < 1.0 {
        // Σ (iδ)ⁿ T^{n+3} / (n! (n+3))
        let mut term = Complex64::new(t * t * t, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 0..40 {
            sum += term / (n + 3) as f64;
            term *= Complex64::new(0.0, x) / (n + 1) as f64;
        }
        return sum;
    }
    let i = Complex64::i();
    let phase = (i * x).exp();
    (phase * (x * x + 2.0 * i * x - 2.0) + 2.0) / (i * delta * delta * delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionResult {
    pub delta_eps: f64,
    /// `ω − Δε`.
    pub delta: f64,
    pub matrix_element: f64,
    pub time_integral: Complex64,
    pub amplitude: f64,
}

/// First-order amplitude `prefactor · E · |M| · |∫₀ᵀ t² e^{i(ω−Δε)t} dt|`.
pub fn transition_amplitude(pulse: &PulseSpec, delta_eps: f64, matrix_element: f64, prefactor: f64) -> TransitionResult {
    let delta = pulse.omega - delta_eps;
    let integral = time_integral(delta, pulse.t);
    TransitionResult {
        delta_eps,
        delta,
        matrix_element,
        time_integral: integral,
        amplitude: prefactor * pulse.e_field * matrix_element.abs() * integral.norm(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub omega: f64,
    pub t: f64,
    pub amplitude: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonancePeak {
    pub t: f64,
    pub omega: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceScan {
    pub delta_eps: f64,
    pub rows: Vec<ScanRow>,
    /// Largest amplitude on the `ω` grid for each duration.
    pub peaks: Vec<ResonancePeak>,
    /// False when the `ω` grid does not bracket `Δε`.
    pub spans_resonance: bool,
    /// Least-squares slope of `ln(peak)` against `ln T`.
    pub t_exponent: Option<f64>,
}

/// Amplitudes over every `(T, ω)` pair; rows are ordered by `T`, then `ω`.
pub fn resonance_scan(
    omegas: &[f64],
    durations: &[f64],
    delta_eps: f64,
    matrix_element: f64,
    e_field: f64,
    prefactor: f64,
) -> Result<ResonanceScan> {
    if omegas.is_empty() || durations.is_empty() {
        return Err(Error::invalid("scan", "needs at least one frequency and one duration"));
    }
    let pulses = durations
        .iter()
        .flat_map(|&t| omegas.iter().map(move |&w| PulseSpec::new(e_field, w, t)))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<ScanRow> = pulses
        .par_iter()
        .map(|p| {
            let r = transition_amplitude(p, delta_eps, matrix_element, prefactor);
            ScanRow { omega: p.omega, t: p.t, amplitude: r.amplitude, delta: r.delta }
        })
        .collect();
    let peaks: Vec<ResonancePeak> = rows
        .chunks(omegas.len())
        .map(|chunk| {
            let best = chunk.iter().fold(chunk[0], |b, r| if r.amplitude > b.amplitude { *r } else { b });
            ResonancePeak { t: best.t, omega: best.omega, amplitude: best.amplitude }
        })
        .collect();
    let lo = omegas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = omegas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spans_resonance = lo <= delta_eps && delta_eps <= hi;
    if !spans_resonance {
        log::warn!("frequency grid [{lo}, {hi}] does not contain the resonance at {delta_eps}");
    }
    Ok(ResonanceScan { delta_eps, t_exponent: fit_exponent(&peaks), rows, peaks, spans_resonance })
}

fn fit_exponent(peaks: &[ResonancePeak]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        peaks.iter().filter(|p| p.amplitude > 0.0).map(|p| (p.t.ln(), p.amplitude.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Gauss–Legendre (5 nodes) quadrature of `t² e^{iδt}`.
    fn quadrature(delta: f64, t: f64, panels: usize) -> Complex64 {
        let nodes = [
            (0.0, 128.0 / 225.0),
            (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
            (0.906_179_845_938_664, 0.236_926_885_056_189_08),
        ];
        let h = t / panels as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in nodes {
                let s = mid + 0.5 * h * x;
                sum += w * 0.5 * h * s * s * Complex64::new(0.0, delta * s).exp();
            }
        }
        sum
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for i in 0..=200 {
            let x = -50.0 + 0.5 * i as f64;
            for t in [0.7, 3.0] {
                let delta = x / t;
                let exact = quadrature(delta, t, 400);
                let got = time_integral(delta, t);
                assert!((got - exact).norm() <= 1e-10 * exact.norm(), "δT = {x}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn on_resonance_is_t_cubed_over_three() {
        let t = 2.5;
        assert!((time_integral(0.0, t).norm() - t * t * t / 3.0).abs() < 1e-14);
        let p = PulseSpec::new(0.3, 1.2, t).unwrap();
        let r = transition_amplitude(&p, 1.2, -0.8, 2.0);
        assert!((r.amplitude * 3.0 / (t * t * t) - 2.0 * 0.3 * 0.8).abs() < 1e-14);
    }

    #[test]
    fn amplitude_is_linear_in_field() {
        let a = transition_amplitude(&PulseSpec::new(0.1, 1.0, 4.0).unwrap(), 0.7, 0.5, 1.0);
        let b = transition_amplitude(&PulseSpec::new(0.2, 1.0, 4.0).unwrap(), 0.7, 0.5, 1.0);
        assert!((b.amplitude - 2.0 * a.amplitude).abs() <= 1e-15 * b.amplitude);
    }

    #[test]
    fn scan_peaks_at_resonance_and_scales_as_t_cubed() {
        let omegas: Vec<f64> = (0..=80).map(|i| 0.5 + 0.0125 * i as f64).collect();
        let durations: Vec<f64> = (0..=10).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
        let scan = resonance_scan(&omegas, &durations, 1.0, 0.3, 1.0, 1.0).unwrap();
        assert!(scan.spans_resonance);
        assert_eq!(scan.rows.len(), omegas.len() * durations.len());
        for p in &scan.peaks {
            assert!((p.omega - 1.0).abs() <= 0.0125 + 1e-12);
        }
        assert!((scan.t_exponent.unwrap() - 3.0).abs() <= 0.05);
        let far = resonance_scan(&[5.0, 6.0], &[1.0], 1.0, 0.3, 1.0, 1.0).unwrap();
        assert!(!far.spans_resonance);
    }

    #[test]
    fn off_resonance_envelope_falls_as_one_over_delta() {
        let t = 10.0;
        // |I| ≈ T²/|δ| once δT ≫ 1
        for delta in [20.0, 40.0, 80.0] {
            let ratio = time_integral(delta, t).norm() * delta / (t * t);
            assert!((ratio - 1.0).abs() < 2.0 / (delta * t), "{delta}: {ratio}");
        }
    }

    #[test]
    fn bad_pulses_are_rejected() {
        assert!(PulseSpec::new(1.0, 1.0, 0.0).is_err());
        assert!(PulseSpec::new(-1.0, 1.0, 1.0).is_err());
        assert!(resonance_scan(&[], &[1.0], 1.0, 1.0, 1.0, 1.0).is_err());
    }
}
