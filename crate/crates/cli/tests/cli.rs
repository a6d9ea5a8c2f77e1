use std::path::Path;
use std::process::{Command, Output};

fn qcoll(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcoll")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

const SMALL: [&str; 6] = ["--set", "grid.n=24", "--set", "grid.half_width=8.0", "--set", "solver.k=20"];

#[test]
fn solve_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    for sub in ["a", "b"] {
        let out = tmp.path().join(sub);
        let mut args = vec!["solve", "--set", "system.mu=0.1", "--out", out.to_str().unwrap()];
        args.extend(SMALL);
        let o = qcoll(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read_to_string(tmp.path().join("a/states.csv")).unwrap();
    let b = std::fs::read_to_string(tmp.path().join("b/states.csv")).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("index,e_dimensionless,e_ev_above_ground,I0,psi_origin,parity_R,is_quasi_collision\n"));
    assert_eq!(a.lines().count(), 21);
    let m = manifest(&tmp.path().join("a"));
    assert_eq!(m["command"], "solve");
    assert_eq!(m["config"]["system"]["mu"], 0.1);
    assert_eq!(m["result"]["summary"]["first_qc_index"], 0);
    assert!(m["config_toml"].as_str().unwrap().contains("[solver]"));
}

#[test]
fn invalid_config_exits_with_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(qcoll(&["solve", "--set", "solver.k=0", "--out", out]).status.code(), Some(1));
    assert_eq!(qcoll(&["solve", "--preset", "no-such-preset", "--out", out]).status.code(), Some(1));
    assert_eq!(qcoll(&["solve", "--set", "system.mu=2", "--out", out]).status.code(), Some(1));
    assert!(!tmp.path().join("states.csv").exists());
}

#[test]
fn convergence_failure_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec![
        "solve",
        "--set",
        "solver.method=lanczos",
        "--set",
        "solver.max_restarts=0",
        "--set",
        "solver.tol=1e-15",
        "--out",
        tmp.path().to_str().unwrap(),
    ];
    args.extend(SMALL);
    assert_eq!(qcoll(&args).status.code(), Some(2));
}

#[test]
fn config_file_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "[system]\nform = \"cylinder-2var\"\nmu = 0.01\n\n[grid]\nn = 20\nhalf_width = 8.0\n\n[solver]\nk = 12\n")
        .unwrap();
    let out = tmp.path().join("out");
    let o = qcoll(&["solve", "--config", cfg.to_str().unwrap(), "--set", "solver.k=10", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["config"]["system"]["form"], "cylinder-2var");
    assert_eq!(m["config"]["solver"]["k"], 10);
    assert_eq!(m["result"]["summary"]["states"], 10);
    std::fs::write(&cfg, "[system]\nbogus = 1\n").unwrap();
    assert_eq!(qcoll(&["solve", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn quasistatic_curve_is_repulsive() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qcoll(&[
        "quasistatic",
        "--set",
        "quasistatic.r_points=8",
        "--set",
        "quasistatic.n_xi=30",
        "--set",
        "quasistatic.n_eta=16",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let curve = std::fs::read_to_string(tmp.path().join("curve.csv")).unwrap();
    assert!(curve.starts_with("R,beta,lambda,v_eff,xi_max\n"));
    assert_eq!(curve.lines().count(), 1 + 8 * 3);
    assert_eq!(manifest(tmp.path())["result"]["repulsive_at_origin"], true);
}

#[test]
fn sweep_writes_one_row_per_value() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec![
        "sweep",
        "--set",
        "sweep.axis=box_half_width",
        "--set",
        "sweep.values=[6.0, 8.0, 10.0]",
        "--out",
        tmp.path().to_str().unwrap(),
    ];
    args.extend(["--set", "grid.n=20", "--set", "solver.k=10"]);
    let o = qcoll(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(tmp.path().join("row_2_states.csv").exists());
    let m = manifest(tmp.path());
    assert_eq!(m["result"]["rows"].as_array().unwrap().len(), 3);
    assert_eq!(m["result"]["failures"], 0);
}

#[test]
fn control_scan_peaks_on_resonance() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qcoll(&[
        "control",
        "--preset",
        "control-resonance",
        "--set",
        "grid.n=24",
        "--set",
        "solver.k=16",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(tmp.path());
    let r = &m["result"];
    let delta = r["delta_eps"].as_f64().unwrap();
    let step = 2.0 * 0.5 * delta / 200.0;
    for p in r["peaks"].as_array().unwrap() {
        assert!((p["omega"].as_f64().unwrap() - delta).abs() <= step + 1e-12);
    }
    assert!((r["t_exponent"].as_f64().unwrap() - 3.0).abs() <= 0.05);
    let scan = std::fs::read_to_string(tmp.path().join("scan.csv")).unwrap();
    assert!(scan.starts_with("omega,T,amplitude,delta\n"));
    assert_eq!(scan.lines().count(), 1 + 201 * 11);
}
