use quasint::evolve::{evolve_kg, FieldState, Grid1D};
use quasint::io::{read_spectral_curve, read_trajectory, write_spectral_curve, write_trajectory, CURVE_HEADER, INDEX_HEADER};
use quasint::potentials::PotentialSpec;
use quasint::scattering::spectral_curve;
use quasint::solutions::bazeia_static_kink;
use std::f64::consts::PI;

#[test]
fn trajectory_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = PotentialSpec::bazeia(3, 1.0, 0.3).unwrap();
    let grid = Grid1D::symmetric(10.0, 101).unwrap();
    let phi: Vec<f64> = grid.xs().map(|x| PI + 0.1 * (-x * x).exp()).collect();
    let st = FieldState::from_real(grid, -1.0, &phi, &vec![0.0; 101]).unwrap();
    let traj = evolve_kg(&st, &spec, 1.0, 0.05, 5).unwrap();
    let files = write_trajectory(dir.path(), &traj).unwrap();
    assert_eq!(files.len(), traj.states.len() + 1);
    let index = std::fs::read_to_string(dir.path().join("index.csv")).unwrap();
    assert_eq!(index.lines().next(), Some(INDEX_HEADER));
    let back = read_trajectory(dir.path()).unwrap();
    assert_eq!(back.spec, traj.spec);
    assert_eq!(back.states, traj.states);
    assert_eq!(back.energies, traj.energies);
    assert!((back.dt_snapshot - traj.dt_snapshot).abs() < 1e-12);
    assert!((back.dt - traj.dt).abs() < 1e-12);
}

#[test]
fn spectral_curve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = PotentialSpec::bazeia(4, 1.0, 0.3).unwrap();
    let grid = Grid1D::symmetric(40.0, 1001).unwrap();
    let (o, i) = (spec.nearest_vacuum(PI).unwrap(), spec.nearest_vacuum(0.0).unwrap());
    let st = bazeia_static_kink(&spec, &o, &i, &grid).unwrap();
    let curve = spectral_curve(&st, &[0.5, 0.99, 1.5, 3.0], &spec, 1e-2);
    let p = dir.path().join("curve.csv");
    write_spectral_curve(&p, &curve, "4").unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.contains("# n=4") && text.contains(CURVE_HEADER));
    let back = read_spectral_curve(&p).unwrap();
    assert_eq!(back.t, curve.t);
    assert_eq!(back.samples, curve.samples);
    assert_eq!(back.excluded, curve.excluded);
}

#[test]
fn missing_index_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(read_trajectory(dir.path()).is_err());
}
