//! Fixtures shared by the criterion benchmarks in `benches/`.

use quasint::evolve::{evolve_kg, FieldState, Grid1D, Trajectory};
use quasint::potentials::PotentialSpec;
use quasint::solutions::bazeia_static_kink;
use std::f64::consts::PI;

/// Static n=4 kink from the π vacuum to 0 on `[−40, 40]`.
pub fn n4_kink(n_points: usize) -> (PotentialSpec, FieldState) {
    let spec = PotentialSpec::bazeia(4, 1.0, 0.3).expect("valid potential");
    let grid = Grid1D::symmetric(40.0, n_points).expect("valid grid");
    let (o, i) = (
        spec.nearest_vacuum(PI).expect("vacuum"),
        spec.nearest_vacuum(0.0).expect("vacuum"),
    );
    let st = bazeia_static_kink(&spec, &o, &i, &grid).expect("kink");
    (spec, st)
}

/// A few snapshots of the static kink, spaced one lattice step apart.
pub fn n4_trajectory(n_points: usize, snapshots: usize) -> Trajectory {
    let (spec, st) = n4_kink(n_points);
    let dx = st.grid.dx;
    evolve_kg(&st, &spec, (snapshots - 1) as f64 * dx, 0.5 * dx, 2).expect("evolution")
}

/// Two-soliton KdV profile on a periodic grid of period 60.
pub fn kdv_profile(n_points: usize) -> (Grid1D, Vec<f64>) {
    let p = 60.0;
    let grid = Grid1D::new(-0.5 * p, -0.5 * p + p * (n_points - 1) as f64 / n_points as f64, n_points).expect("grid");
    let sp = quasint::solutions::SolitonParams { c1: 4.0, c2: 1.0, ..Default::default() };
    let u = grid
        .xs()
        .map(|x| quasint::solutions::kdv_two_soliton(&sp, -6.0, 1.0, x, -2.0).expect("distinct speeds"))
        .collect();
    (grid, u)
}
