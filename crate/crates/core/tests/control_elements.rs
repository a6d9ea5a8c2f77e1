use quasicollision::analysis::wavefunction;
use quasicollision::control::{dipole_matrix_element, gradient_matrix_element};
use quasicollision::grid::{make_box_grid, AxisName, GridSpec};
use quasicollision::operators::HamiltonianSpec;
use quasicollision::potentials::{eval_potential, PotentialForm, PotentialSpec};
use quasicollision::spectrum::{solve_spectrum, SolveOptions, Spectrum};

fn setup(form: PotentialForm) -> (PotentialSpec, GridSpec, Spectrum) {
    let axes: Vec<_> = form.axes().iter().map(|&a| (a, -8.0, 8.0, 32)).collect();
    let grid = make_box_grid(&axes).unwrap();
    let pot = PotentialSpec::new(form, 1.0);
    let opts = SolveOptions { k: 24, keep_vectors: true, ..Default::default() };
    let spectrum = solve_spectrum(&HamiltonianSpec::new(pot, 0.1), &grid, &opts).unwrap();
    (pot, grid, spectrum)
}

fn vector(s: &Spectrum, i: usize) -> &[f64] {
    s.states[i].vector.as_deref().unwrap()
}

#[test]
fn parity_selection_rules() {
    for form in [PotentialForm::Planar2Var, PotentialForm::Cylinder2Var] {
        let (pot, grid, s) = setup(form);
        let n = s.states.len();
        let mut allowed = 0;
        for i in 0..n {
            let pi = s.states[i].observables.parity_r;
            assert!(pi != 0);
            assert!(dipole_matrix_element(vector(&s, i), vector(&s, i), &grid, AxisName::R).unwrap().abs() <= 1e-10);
            for f in i + 1..n {
                let pf = s.states[f].observables.parity_r;
                let d = dipole_matrix_element(vector(&s, i), vector(&s, f), &grid, AxisName::R).unwrap();
                let g = gradient_matrix_element(vector(&s, i), vector(&s, f), &grid, &pot, AxisName::R).unwrap();
                if pi == pf {
                    assert!(d.abs() <= 1e-10 && g.abs() <= 1e-10, "{form:?} {i}->{f}: {d} {g}");
                } else if g.abs() > 1e-6 {
                    allowed += 1;
                }
            }
        }
        assert!(allowed > 0);
    }
}

#[test]
fn elements_are_symmetric_in_the_pair() {
    let (pot, grid, s) = setup(PotentialForm::Planar2Var);
    for (i, f) in [(0, 1), (0, 5), (2, 7), (3, 11)] {
        let a = gradient_matrix_element(vector(&s, i), vector(&s, f), &grid, &pot, AxisName::X).unwrap();
        let b = gradient_matrix_element(vector(&s, f), vector(&s, i), &grid, &pot, AxisName::X).unwrap();
        assert!((a - b).abs() <= 1e-10, "{a} {b}");
        let c = dipole_matrix_element(vector(&s, i), vector(&s, f), &grid, AxisName::R).unwrap();
        let d = dipole_matrix_element(vector(&s, f), vector(&s, i), &grid, AxisName::R).unwrap();
        assert!((c - d).abs() <= 1e-12);
    }
}

#[test]
fn dipole_matches_wavefunction_quadrature() {
    let (_, grid, s) = setup(PotentialForm::Cylinder2Var);
    let d = grid.axis_position(AxisName::R).unwrap();
    for (i, f) in [(0, 1), (1, 2), (0, 3)] {
        let pi = wavefunction(vector(&s, i), &s.measure);
        let pf = wavefunction(vector(&s, f), &s.measure);
        let expected: f64 = (0..pi.len()).map(|k| pf[k] * grid.coordinates(k)[d] * pi[k] * s.measure[k]).sum();
        let got = dipole_matrix_element(vector(&s, i), vector(&s, f), &grid, AxisName::R).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1e-3), "{got} vs {expected}");
    }
}

#[test]
fn gradient_matches_finite_difference_quadrature() {
    let (pot, grid, s) = setup(PotentialForm::Planar2Var);
    let step = 1e-4;
    for which in [AxisName::R, AxisName::X] {
        let d = grid.axis_position(which).unwrap();
        for (i, f) in [(0, 1), (0, 2), (1, 4)] {
            let (ui, uf) = (vector(&s, i), vector(&s, f));
            let fd: f64 = (0..ui.len())
                .map(|k| {
                    let mut p = grid.coordinates(k);
                    p[d] += step;
                    let up = eval_potential(&pot, &p).unwrap();
                    p[d] -= 2.0 * step;
                    let down = eval_potential(&pot, &p).unwrap();
                    uf[k] * (up - down) / (2.0 * step) * ui[k]
                })
                .sum();
            let got = gradient_matrix_element(ui, uf, &grid, &pot, which).unwrap();
            assert!((got - fd).abs() <= 1e-6 * fd.abs().max(1e-3), "{which} {i}->{f}: {got} vs {fd}");
        }
    }
}

#[test]
fn mismatched_vectors_are_rejected() {
    let (pot, grid, s) = setup(PotentialForm::Planar2Var);
    let short = vec![0.0; 10];
    assert!(dipole_matrix_element(vector(&s, 0), &short, &grid, AxisName::R).is_err());
    assert!(gradient_matrix_element(&short, vector(&s, 0), &grid, &pot, AxisName::R).is_err());
    assert!(dipole_matrix_element(vector(&s, 0), vector(&s, 1), &grid, AxisName::Y).is_err());
}
