use proptest::prelude::*;
use quasint::potentials::{ApproachBranch, PotentialSpec};
use quasint::Complex64;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

fn fd_error(spec: &PotentialSpec, phi: f64, h: f64) -> (f64, f64) {
    let v = |p: f64| -> f64 { spec.eval_v(p).unwrap() };
    let dv = |p: f64| -> f64 { spec.eval_dv(p).unwrap() };
    let d2v: f64 = spec.eval_d2v(phi).unwrap();
    let e1 = (dv(phi) - (v(phi + h) - v(phi - h)) / (2.0 * h)).abs();
    let e2 = (d2v - (dv(phi + h) - dv(phi - h)) / (2.0 * h)).abs();
    (e1, e2)
}

#[test]
fn derivatives_match_finite_differences_at_second_order() {
    for n in [2, 3, 4, 5] {
        let spec = PotentialSpec::bazeia(n, 1.0, 0.7).unwrap();
        for phi in [0.4, 1.1, 2.3] {
            let e: Vec<(f64, f64)> = [1e-2, 1e-3, 1e-4].iter().map(|&h| fd_error(&spec, phi, h)).collect();
            // h = 1e-2 -> 1e-3 is cleanly in the truncation regime.
            assert!(e[0].0 / e[1].0 > 50.0, "n={n} phi={phi} dV errors {e:?}");
            assert!(e[0].1 / e[1].1 > 50.0, "n={n} phi={phi} d2V errors {e:?}");
            assert!(e[2].0 < e[1].0 && e[2].1 < e[1].1, "n={n} phi={phi} errors {e:?}");
        }
    }
}

#[test]
fn n2_reduces_to_sine_gordon() {
    let (b, m) = (0.8, 0.45);
    let baz = PotentialSpec::bazeia(2, b, m).unwrap();
    let sg = PotentialSpec::sine_gordon(4.0 * m, 2.0 * b).unwrap();
    assert_eq!(baz.sine_gordon_equivalent(), Some(sg));
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let period = 2.0 * PI / b;
    for _ in 0..1000 {
        let phi = rng.gen_range(0.0..period);
        let (x, y): (f64, f64) = (baz.eval_v(phi).unwrap(), sg.eval_v(phi).unwrap());
        assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0), "phi={phi}: {x} vs {y}");
    }
}

#[test]
fn spec_examples() {
    let b2 = PotentialSpec::bazeia(2, 1.0, 1.0).unwrap();
    assert_eq!(b2.eval_v(0.0).unwrap(), 0.0);
    assert!(b2.eval_v(PI).unwrap().abs() < 1e-15);
    assert!(b2.eval_dv(0.0).unwrap().abs() < 1e-15);
    let sg = PotentialSpec::sine_gordon(1.0, 1.0).unwrap();
    assert!((sg.eval_dv(PI / 2.0).unwrap() - 1.0).abs() < 1e-15);

    let phis = |v: Vec<quasint::VacuumInfo>| v.iter().map(|x| x.phi).collect::<Vec<f64>>();
    let v = phis(b2.vacua(-1.0, 4.0).unwrap());
    assert_eq!(v.len(), 2);
    assert!(v[0].abs() < 1e-12 && (v[1] - PI).abs() < 1e-9);
    let v = phis(sg.vacua(-1.0, 7.0).unwrap());
    assert_eq!(v.len(), 2);
    assert!(v[0].abs() < 1e-12 && (v[1] - 2.0 * PI).abs() < 1e-9);
    let shg = PotentialSpec::sinh_gordon(1.0, 1.0).unwrap();
    let v = phis(shg.vacua(-1.0, 1.0).unwrap());
    assert_eq!(v.len(), 1);
    assert!(v[0].abs() < 1e-12);
}

#[test]
fn vacuum_masses() {
    // Mass² at φ = 0 is (8M/n)², at φ = π it is (4M)².
    let m = 0.3;
    for n in 2..=6 {
        let spec = PotentialSpec::bazeia(n, 1.0, m).unwrap();
        let v0 = spec.nearest_vacuum(0.0).unwrap();
        let vp = spec.nearest_vacuum(PI).unwrap();
        assert!((v0.d2v_at_vacuum - (8.0 * m / n as f64).powi(2)).abs() < 1e-10, "n={n}");
        assert!((vp.d2v_at_vacuum - (4.0 * m).powi(2)).abs() < 1e-10, "n={n}");
        assert!(v0.dv_over_sqrtv_limit > 0.0);
        assert_eq!(v0.limit_from(ApproachBranch::Below), -v0.dv_over_sqrtv_limit);
    }
}

#[test]
fn display_round_trips() {
    let specs = [
        PotentialSpec::bazeia(5, 1.25, 0.3).unwrap(),
        PotentialSpec::sine_gordon(1.2, 2.0).unwrap(),
        PotentialSpec::sinh_gordon(0.7, 1.5).unwrap(),
        PotentialSpec::kdv(-6.0, 1.0).unwrap(),
    ];
    for s in specs {
        let back: PotentialSpec = s.to_string().parse().unwrap();
        assert_eq!(back, s);
    }
    assert!("bazeia(n=1,B=1,M=1)".parse::<PotentialSpec>().is_err());
    assert!("harmonic(k=1)".parse::<PotentialSpec>().is_err());
}

proptest! {
    #[test]
    fn vacuum_identity_holds(n in 2u32..=7, b in 0.3f64..2.0, m in 0.1f64..2.0) {
        let spec = PotentialSpec::bazeia(n, b, m).unwrap();
        let period = 2.0 * PI / b;
        for v in spec.vacua(-0.1, period + 0.1).unwrap() {
            prop_assert!(v.v_at_vacuum >= 0.0 && v.v_at_vacuum <= 1e-12);
            let lhs = v.dv_over_sqrtv_limit.powi(2);
            let rhs = 2.0 * v.d2v_at_vacuum;
            prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs(), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn potential_is_nonnegative_on_real_axis(n in 2u32..=6, phi in -1.0f64..3.0) {
        let spec = PotentialSpec::bazeia(n, 1.0, 0.5).unwrap();
        match spec.eval_v(phi) {
            Ok(v) => prop_assert!(v >= 0.0),
            // Odd n has a pole at −π.
            Err(_) => prop_assert!(n % 2 == 1),
        }
    }

    #[test]
    fn complex_evaluation_extends_real(n in 2u32..=6, phi in 0.0f64..3.0) {
        let spec = PotentialSpec::bazeia(n, 1.0, 0.5).unwrap();
        let r: f64 = spec.eval_v(phi).unwrap();
        let c: Complex64 = spec.eval_v(Complex64::new(phi, 0.0)).unwrap();
        prop_assert!((c.re - r).abs() <= 1e-12 * r.abs().max(1.0));
        prop_assert!(c.im.abs() <= 1e-12 * r.abs().max(1.0));
    }
}
