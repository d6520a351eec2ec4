//! Direct scattering for the auxiliary problem `∂_x ψ = −A_x ψ` at fixed time.
//!
//! At a vacuum `φ_v` both connections are multiples of `σ_x`:
//! `A_x = −i λ₋ w₀/(2√2) σ_x`, `A_t = i λ₊ w₀/(2√2) σ_x` with `w₀ = W'(φ_v)`.
//! We take `k = λ₋|w₀|/(2√2)`, `ω = λ₊|w₀|/(2√2)` and `e₊` the `σ_x`
//! eigenvector with eigenvalue `sgn w₀`, so that `A_x e± = ∓ i k e±` and
//! `A_t e± = ± i ω e±`. `k` keeps the sign of `Λ − 1/Λ`.
//!
//! The left Jost solution `e₊ e^{ikx}` is carried across the state and
//! expanded on the right as `a e₊ e^{ikx} + b e₋ e^{−ikx}`.

use crate::error::{Error, Result};
use crate::evolve::FieldState;
use crate::lax::{connections, Matrix2, SpectralParam};
use crate::potentials::{PotentialSpec, VacuumInfo};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{PI, SQRT_2};

/// Vacuum eigen-data of the connections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JostBasis {
    pub lambda: SpectralParam,
    pub phi_vac: f64,
    pub k: Complex64,
    pub omega: Complex64,
    pub e_plus: [Complex64; 2],
    pub e_minus: [Complex64; 2],
}

/// Below this `|λ₋|` the vacuum `A_x` has a double eigenvalue.
pub const DEGENERACY_TOL: f64 = 1e-12;

pub fn jost_basis(spec: &PotentialSpec, vac: &VacuumInfo, lam: &SpectralParam) -> Result<JostBasis> {
    jost_basis_at(spec, vac.phi, lam)
}

pub fn jost_basis_at(spec: &PotentialSpec, phi_vac: f64, lam: &SpectralParam) -> Result<JostBasis> {
    let [_, w1, _] = spec.root_jet(phi_vac)?;
    if w1 == 0.0 {
        return Err(Error::InvalidParameter(format!("phi={phi_vac} is not a nondegenerate vacuum")));
    }
    let lm = lam.minus();
    if lm.norm() < DEGENERACY_TOL {
        return Err(Error::DegenerateEigenvalues(format!("Lambda = {}", lam.lambda)));
    }
    let s = w1.signum();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let e_plus = [Complex64::new(r, 0.0), Complex64::new(s * r, 0.0)];
    let e_minus = [Complex64::new(r, 0.0), Complex64::new(-s * r, 0.0)];
    let c = w1.abs() / (2.0 * SQRT_2);
    Ok(JostBasis {
        lambda: *lam,
        phi_vac,
        k: lm * c,
        omega: lam.plus() * c,
        e_plus,
        e_minus,
    })
}

fn dot(a: &[Complex64; 2], b: &[Complex64; 2]) -> Complex64 {
    // e± are real, so the bilinear and sesquilinear products agree.
    a[0] * b[0] + a[1] * b[1]
}

/// Tail tolerance for scattering states.
pub const TAIL_TOL: f64 = 1e-6;

fn tail_vacuum(state: &FieldState, spec: &PotentialSpec, i: usize) -> Result<f64> {
    let p = state.phi[i];
    let vac = spec.nearest_vacuum(p.re).map_err(|_| Error::TailNotVacuum(p.norm()))?;
    let d = (p - vac.phi).norm();
    if d > TAIL_TOL {
        return Err(Error::TailNotVacuum(d));
    }
    Ok(vac.phi)
}

/// Ordered product of per-cell `exp(−A_x dx)` from `x_min` to `x_max`, with
/// the connection at cell midpoints.
pub fn transfer_matrix(state: &FieldState, lam: &SpectralParam, spec: &PotentialSpec) -> Result<Matrix2> {
    let n = state.grid.n_points;
    tail_vacuum(state, spec, 0)?;
    tail_vacuum(state, spec, n - 1)?;
    transfer_matrix_unchecked(state, lam, spec)
}

fn transfer_matrix_unchecked(state: &FieldState, lam: &SpectralParam, spec: &PotentialSpec) -> Result<Matrix2> {
    let g = &state.grid;
    let mut w = Matrix2::identity();
    for i in 0..g.n_points - 1 {
        let phi = (state.phi[i] + state.phi[i + 1]) * 0.5;
        let pi = (state.pi[i] + state.pi[i + 1]) * 0.5;
        let phi_x = (state.phi[i + 1] - state.phi[i]) / g.dx;
        let (_, ax) = connections(spec, phi, phi_x, pi, lam)?;
        w = (ax * (-g.dx)).exp() * w;
    }
    Ok(w)
}

/// `(a, b)` for one state and spectral parameter.
pub fn spectral_data(state: &FieldState, lam: &SpectralParam, spec: &PotentialSpec) -> Result<(Complex64, Complex64)> {
    let n = state.grid.n_points;
    let phi_l = tail_vacuum(state, spec, 0)?;
    let phi_r = tail_vacuum(state, spec, n - 1)?;
    let jl = jost_basis_at(spec, phi_l, lam)?;
    let jr = jost_basis_at(spec, phi_r, lam)?;
    let t = transfer_matrix_unchecked(state, lam, spec)?;
    let (x0, x1) = (state.grid.x_min, state.grid.x_max);
    let psi = t.apply(jl.e_plus);
    let i = Complex64::i();
    let left_phase = (i * jl.k * x0).exp();
    let a = (-i * jr.k * x1).exp() * dot(&jr.e_plus, &psi) * left_phase;
    let b = (i * jr.k * x1).exp() * dot(&jr.e_minus, &psi) * left_phase;
    Ok((a, b))
}

/// One sample of a spectral curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSample {
    pub lambda: f64,
    pub a: Complex64,
    pub b: Complex64,
}

/// `Λ ↦ (a, b)` at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCurve {
    pub t: f64,
    pub samples: Vec<SpectralSample>,
    /// `[1 − h, 1 + h]` window left out of the grid.
    pub excluded: (f64, f64),
    /// Grid points that failed, with the reason.
    pub failures: Vec<(f64, String)>,
}

impl SpectralCurve {
    pub fn lambdas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.lambda).collect()
    }

    pub fn abs_a(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.a.norm()).collect()
    }

    /// `‖|a|(other) − |a|(self)‖_∞ / ‖|a|(self)‖_∞` on the common grid.
    pub fn relative_deviation(&self, other: &SpectralCurve) -> f64 {
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for s in &self.samples {
            if let Some(o) = other.samples.iter().find(|o| o.lambda == s.lambda) {
                num = num.max((o.a.norm() - s.a.norm()).abs());
                den = den.max(s.a.norm());
            }
        }
        if den == 0.0 {
            f64::NAN
        } else {
            num / den
        }
    }
}

/// Log-spaced grid on `[lo, hi]` with the window `|Λ − 1| < half_width`
/// removed.
pub fn lambda_grid(lo: f64, hi: f64, steps: usize, half_width: f64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || steps < 2 {
        return Err(Error::InvalidParameter(format!("bad Lambda grid [{lo}, {hi}] x {steps}")));
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    Ok((0..steps)
        .map(|k| (l0 + (l1 - l0) * k as f64 / (steps - 1) as f64).exp())
        .filter(|l| (l - 1.0).abs() >= half_width)
        .collect())
}

/// Default grid: 200 log-spaced points in `[0.1, 10]`, `|Λ − 1| ≥ 1e−2`.
pub fn default_lambda_grid() -> Vec<f64> {
    lambda_grid(0.1, 10.0, 200, 1e-2).expect("valid")
}

/// Spectral data over a real `Λ` grid, in parallel. Points inside the
/// exclusion window or failing individually are recorded, not fatal.
pub fn spectral_curve(state: &FieldState, lambdas: &[f64], spec: &PotentialSpec, exclusion: f64) -> SpectralCurve {
    let results: Vec<(f64, Result<(Complex64, Complex64)>)> = lambdas
        .par_iter()
        .map(|&l| {
            let r = if (l - 1.0).abs() < exclusion {
                Err(Error::DegenerateEigenvalues(format!("Lambda = {l} inside exclusion window")))
            } else {
                SpectralParam::real(l).and_then(|lam| spectral_data(state, &lam, spec)).and_then(|(a, b)| {
                    if a.is_finite() && b.is_finite() {
                        Ok((a, b))
                    } else {
                        Err(Error::NonFinite {
                            what: "spectral data",
                            phi: "-".into(),
                            spec: spec.to_string(),
                        })
                    }
                })
            };
            (l, r)
        })
        .collect();
    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for (l, r) in results {
        match r {
            Ok((a, b)) => samples.push(SpectralSample { lambda: l, a, b }),
            Err(e) => failures.push((l, e.to_string())),
        }
    }
    samples.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
    SpectralCurve {
        t: state.t,
        samples,
        excluded: (1.0 - exclusion, 1.0 + exclusion),
        failures,
    }
}

/// Normalisation of `ω(Λ)` in the phase rate `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OmegaConvention {
    /// `ω(Λ) = 2M(Λ + 1/Λ)`, which makes `γ` the gap between the two
    /// vacuum eigenvalues of `A_t`, the rate at which `b` actually turns.
    #[default]
    MassScaled,
    /// `ω(Λ)` = modulus of the vacuum eigenvalue of `A_t`.
    EigenvalueModulus,
}

/// Phase rate `γ = ω(Λ)/(4√2 M) · (V'/√V)|_vac`.
pub fn gamma_rate(lam: &SpectralParam, spec: &PotentialSpec, vac: &VacuumInfo, conv: OmegaConvention) -> Result<Complex64> {
    let m = spec.mass_scale()?;
    let omega = match conv {
        OmegaConvention::MassScaled => lam.plus() * (2.0 * m),
        // |W'(φ_v)| = ½ (V'/√V)|_vac
        OmegaConvention::EigenvalueModulus => lam.plus() * (0.5 * vac.dv_over_sqrtv_limit.abs() / (2.0 * SQRT_2)),
    };
    Ok(omega / (4.0 * SQRT_2 * m) * vac.dv_over_sqrtv_limit)
}

/// Decay rate `Γ = B k(Λ)/(2√2 M) · √V(Φ₋)`; zero for a shifted vacuum.
pub fn growth_rate(lam: &SpectralParam, spec: &PotentialSpec, vac: &VacuumInfo) -> Result<Complex64> {
    let m = spec.mass_scale()?;
    let b = spec.lax_coupling()?;
    let k = lam.minus() * (2.0 * m);
    Ok(b * k / (2.0 * SQRT_2 * m) * vac.v_at_vacuum.max(0.0).sqrt())
}

/// `b₀ e^{iγt} e^{Γt}`.
pub fn predicted_b(b0: Complex64, t: f64, lam: &SpectralParam, spec: &PotentialSpec, vac: &VacuumInfo) -> Result<Complex64> {
    predicted_b_with(b0, t, lam, spec, vac, OmegaConvention::default())
}

pub fn predicted_b_with(
    b0: Complex64,
    t: f64,
    lam: &SpectralParam,
    spec: &PotentialSpec,
    vac: &VacuumInfo,
    conv: OmegaConvention,
) -> Result<Complex64> {
    let gamma = gamma_rate(lam, spec, vac, conv)?;
    let big_gamma = growth_rate(lam, spec, vac)?;
    Ok(b0 * (Complex64::i() * gamma * t).exp() * (big_gamma * t).exp())
}

/// Coefficients `Q₁..Q_order` of a least-squares fit
/// `log a(Λ) ≈ Q₀ + Σ_k Q_k Λ^{−k}` over the large-`Λ` half of the curve.
/// The phase of `a` is unwrapped along the grid; `Q₀` absorbs the branch.
pub fn charges_from_a(curve: &SpectralCurve, order: usize) -> Result<Vec<Complex64>> {
    if order == 0 {
        return Ok(Vec::new());
    }
    let n_all = curve.samples.len();
    if n_all < 4 * order {
        return Err(Error::InvalidParameter(format!(
            "need at least {} samples for order {order}, have {n_all}",
            4 * order
        )));
    }
    for s in &curve.samples {
        if s.a.norm() < 1e-12 {
            return Err(Error::ZeroOfA(s.lambda));
        }
    }
    let lmax = curve.samples.last().expect("nonempty").lambda;
    let lmin = curve.samples[0].lambda;
    let split = (lmin * lmax).sqrt().max(1.0);
    let part: Vec<&SpectralSample> = curve.samples.iter().filter(|s| s.lambda >= split).collect();
    if part.len() < 2 * (order + 1) {
        return Err(Error::InvalidParameter(format!(
            "only {} samples above Lambda = {split}",
            part.len()
        )));
    }
    // Unwrapped log a.
    let mut logs = Vec::with_capacity(part.len());
    let mut prev_arg: Option<f64> = None;
    let mut offset = 0.0;
    for s in &part {
        let arg = s.a.arg();
        if let Some(p) = prev_arg {
            let d = arg - p;
            if d > PI {
                offset -= 2.0 * PI;
            } else if d < -PI {
                offset += 2.0 * PI;
            }
        }
        prev_arg = Some(arg);
        logs.push(Complex64::new(s.a.norm().ln(), arg + offset));
    }
    let rows = part.len();
    let cols = order + 1;
    let a = DMatrix::from_fn(rows, cols, |r, c| part[r].lambda.powi(-(c as i32)));
    let svd = a.svd(true, true);
    let mut out = vec![Complex64::new(0.0, 0.0); order];
    for comp in 0..2 {
        let rhs = DVector::from_iterator(rows, logs.iter().map(|z| if comp == 0 { z.re } else { z.im }));
        let sol = svd
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::InvalidParameter(format!("least squares failed: {e}")))?;
        for k in 0..order {
            if comp == 0 {
                out[k].re = sol[k + 1];
            } else {
                out[k].im = sol[k + 1];
            }
        }
    }
    Ok(out)
}
