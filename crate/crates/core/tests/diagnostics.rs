use quasint::diagnostics::{
    anomaly_l1, center_of_mass_frame, connection_pt_residuals, pt_asymmetry, pt_asymmetry_with, pt_report, radiation_level, Parity,
    PtOptions, PtReport,
};
use quasint::evolve::{energy_kg, evolve_kg, FieldState, Grid1D, Trajectory};
use quasint::lax::SpectralParam;
use quasint::potentials::PotentialSpec;
use quasint::solutions::bazeia_static_kink;
use quasint::Error;
use std::f64::consts::PI;

/// Closed-form sine-Gordon kink–antikink pair with `m = γ = 1`, sampled
/// at `t_k = t0 + k·dt_snap` and shifted to `(x_s, t_s)`.
fn sg_pair(v: f64, shift: (f64, f64)) -> Trajectory {
    let spec = PotentialSpec::sine_gordon(1.0, 1.0).unwrap();
    let grid = Grid1D::symmetric(30.0, 1201).unwrap();
    let g = 1.0 / (1.0 - v * v).sqrt();
    let (dt_snap, count) = (0.1, 101);
    let states: Vec<FieldState> = (0..count)
        .map(|k| {
            let t = -5.0 + shift.1 + dt_snap * k as f64;
            let (mut phi, mut pi) = (Vec::new(), Vec::new());
            for x in grid.xs() {
                let (x, t) = (x - shift.0, t - shift.1);
                let c = (g * x).cosh();
                let u = (v * g * t).sinh() / (v * c);
                phi.push(4.0 * u.atan());
                pi.push(4.0 * g * (v * g * t).cosh() / (c * (1.0 + u * u)));
            }
            FieldState::from_real(grid, t, &phi, &pi).unwrap()
        })
        .collect();
    let energies = states.iter().map(|s| energy_kg(s, &spec).unwrap()).collect();
    Trajectory {
        spec,
        states,
        dt_snapshot: dt_snap,
        dt: dt_snap,
        energies,
    }
}

fn static_trajectory(n: u32) -> Trajectory {
    let spec = PotentialSpec::bazeia(n, 1.0, 0.3).unwrap();
    let grid = Grid1D::symmetric(40.0, 2001).unwrap();
    let (o, i) = (spec.nearest_vacuum(PI).unwrap(), spec.nearest_vacuum(0.0).unwrap());
    let st = bazeia_static_kink(&spec, &o, &i, &grid).unwrap();
    evolve_kg(&st, &spec, 4.0, 0.02, 10).unwrap()
}

#[test]
fn exact_sine_gordon_collision_is_centred_and_symmetric() {
    let traj = sg_pair(0.5, (0.0, 0.0));
    let (xc, tc) = center_of_mass_frame(&traj).unwrap();
    let dx = traj.grid().dx;
    assert!(xc.abs() < dx && tc.abs() < dx, "({xc}, {tc})");
    let (asym, parity) = pt_asymmetry_with(&traj, (0.0, 0.0), &PtOptions::default()).unwrap();
    assert_eq!(parity, Parity::Odd);
    // Only the truncated tails at x = ±30 break the symmetry.
    assert!(asym < 1e-10, "{asym:e}");
    let even = PtOptions {
        parity: Some(Parity::Even),
        ..Default::default()
    };
    assert!(pt_asymmetry_with(&traj, (0.0, 0.0), &even).unwrap().0 > 1.0);
}

#[test]
fn centre_follows_translations() {
    let (sx, st) = (2.0, 1.0);
    let traj = sg_pair(0.5, (sx, st));
    let (xc, tc) = center_of_mass_frame(&traj).unwrap();
    let dx = traj.grid().dx;
    assert!((xc - sx).abs() < dx && (tc - st).abs() < dx, "({xc}, {tc})");
    assert!(pt_asymmetry(&traj, (sx, st)).unwrap() < 1e-10);
}

#[test]
fn report_on_exact_collision_is_complete() {
    let traj = sg_pair(0.5, (0.0, 0.0));
    let lam = SpectralParam::real(2.0).unwrap();
    let r = pt_report(&traj, &lam, None, &PtOptions::default());
    assert!(r.notes.is_empty(), "{:?}", r.notes);
    assert!(r.field_asymmetry < 1e-6);
    // Sine-Gordon is integrable: no anomaly, and the connections map onto each other.
    assert!(r.anomaly_l1 < 1e-10, "{}", r.anomaly_l1);
    assert!(r.at_residual < 1e-2 && r.ax_residual < 1e-2, "{} {}", r.at_residual, r.ax_residual);
    let kv = r.to_kv();
    for key in ["field_asymmetry", "at_residual", "ax_residual", "anomaly_l1", "center_t", "parity = odd", "partial = false"] {
        assert!(kv.contains(key), "{kv}");
    }
    assert_eq!(r.csv_row().split(',').count(), PtReport::CSV_HEADER.split(',').count());
}

#[test]
fn single_kink_has_no_collision() {
    let traj = static_trajectory(3);
    assert!(matches!(center_of_mass_frame(&traj), Err(Error::NoCollisionFound)));
    let lam = SpectralParam::real(2.0).unwrap();
    let r = pt_report(&traj, &lam, None, &PtOptions::default());
    assert!(!r.notes.is_empty());
    assert!(r.to_kv().contains("partial = true"));
}

#[test]
fn anomaly_vanishes_for_sine_gordon_case_and_vacuum() {
    let lam = SpectralParam::real(2.0).unwrap();
    let traj = static_trajectory(2);
    assert!(anomaly_l1(&traj, &lam, &traj.spec).unwrap() < 1e-10);
    let spec = PotentialSpec::bazeia(4, 1.0, 0.3).unwrap();
    let vac = FieldState::vacuum(Grid1D::symmetric(10.0, 201).unwrap(), 0.0);
    let vt = evolve_kg(&vac, &spec, 2.0, 0.05, 4).unwrap();
    assert!(anomaly_l1(&vt, &lam, &spec).unwrap() < 1e-14);
    let (at, ax) = connection_pt_residuals(&vt, &lam, &spec, (0.0, 1.0)).unwrap();
    assert!(at < 1e-14 && ax < 1e-14, "{at:e} {ax:e}");
    // The deformed kink does carry an anomaly.
    let t4 = static_trajectory(4);
    assert!(anomaly_l1(&t4, &lam, &t4.spec).unwrap() > 1e-3);
}

#[test]
fn static_kink_emits_no_radiation() {
    let traj = static_trajectory(4);
    // The light vacuum tail stays above the level; it must not change.
    let level = |s: &FieldState| radiation_level(s, &traj.spec, 8.0).unwrap();
    let (r0, r1) = (level(&traj.states[0]), level(traj.states.last().unwrap()));
    assert!((r1 - r0).abs() < 1e-6, "{r0:e} {r1:e}");
    assert!(radiation_level(&traj.states[0], &traj.spec, 30.0).unwrap() < 1e-6);
}
