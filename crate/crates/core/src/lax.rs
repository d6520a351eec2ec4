//! Lax connections, curvature anomaly, Wilson lines and loops.
//!
//! The connections are
//!
//! ```text
//! A_t = (B/2i) Φ_x σ_z + i α₊,    A_x = (B/2i) Φ_t σ_z + i α₋,
//! α₊ = (λ₊ W' σ_x − B λ₋ W σ_y) / (2√2)
//! α₋ = (−λ₋ W' σ_x + B λ₊ W σ_y) / (2√2)
//! ```
//!
//! with `λ± = Λ ± 1/Λ` and `W = √V` the signed root from
//! [`crate::potentials`], so `V'/√V = 2W'`.
//!
//! Parallel transport is `∂_x ψ = −A_x ψ`, `∂_t ψ = −A_t ψ`. A line is the
//! ordered product of `exp(−A Δℓ)` with later factors on the left.

use crate::error::{Error, Result};
use crate::evolve::{FieldState, Trajectory};
use crate::potentials::PotentialSpec;
use num_complex::Complex64;
use std::f64::consts::SQRT_2;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// 2×2 complex matrix, row-major `[[m00, m01], [m10, m11]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2 {
    pub m: [[Complex64; 2]; 2],
}

impl Matrix2 {
    pub const fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Matrix2 {
            m: [[m00, m01], [m10, m11]],
        }
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn sigma_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub const fn sigma_y() -> Self {
        Self::new(ZERO, Complex64::new(0.0, -1.0), I, ZERO)
    }

    pub const fn sigma_z() -> Self {
        Self::new(ONE, ZERO, ZERO, Complex64::new(-1.0, 0.0))
    }

    /// `c₀ 𝟙 + cₓ σ_x + c_y σ_y + c_z σ_z`.
    pub fn from_pauli(c0: Complex64, cx: Complex64, cy: Complex64, cz: Complex64) -> Self {
        Self::new(c0 + cz, cx - I * cy, cx + I * cy, c0 - cz)
    }

    /// Coefficients `(c₀, cₓ, c_y, c_z)` in the Pauli basis.
    pub fn pauli_coefficients(&self) -> [Complex64; 4] {
        let [[a, b], [c, d]] = self.m;
        [(a + d) * 0.5, (b + c) * 0.5, (c - b) * 0.5 / I, (a - d) * 0.5]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let [[a, b], [c, d]] = self.m;
        Self::new(a * s, b * s, c * s, d * s)
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        Self::new(a.conj(), b.conj(), c.conj(), d.conj())
    }

    pub fn transpose(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        Self::new(a, c, b, d)
    }

    pub fn dagger(&self) -> Self {
        self.conj().transpose()
    }

    /// Inverse; for unit determinant this is the adjugate.
    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        let det = self.det();
        Self::new(d / det, -b / det, -c / det, a / det)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral (operator 2-) norm.
    pub fn norm2(&self) -> f64 {
        // Largest singular value from the eigenvalues of M†M.
        let h = self.dagger() * *self;
        let tr = h.trace().re;
        let det = h.det().re.max(0.0);
        let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
        (0.5 * tr + disc).max(0.0).sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Matrix exponential. Exact for 2×2: with `M = c 𝟙 + N`, `N` traceless
    /// and `θ² = −det N`, `exp M = e^c (cosh θ 𝟙 + sinh θ/θ N)`.
    pub fn exp(&self) -> Self {
        let c = self.trace() * 0.5;
        let n = *self - Matrix2::identity().scale(c);
        let theta2 = -n.det();
        let (ch, shc) = cosh_sinhc(theta2);
        (Matrix2::identity().scale(ch) + n.scale(shc)).scale(c.exp())
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.is_finite())
    }
}

/// `(cosh θ, sinh θ / θ)` as functions of `θ²`.
fn cosh_sinhc(theta2: Complex64) -> (Complex64, Complex64) {
    if theta2.norm() < 1e-6 {
        let t2 = theta2;
        let ch = ONE + t2 * 0.5 + t2 * t2 / 24.0 + t2 * t2 * t2 / 720.0;
        let sh = ONE + t2 / 6.0 + t2 * t2 / 120.0 + t2 * t2 * t2 / 5040.0;
        (ch, sh)
    } else {
        let theta = theta2.sqrt();
        (theta.cosh(), theta.sinh() / theta)
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, o: Matrix2) -> Matrix2 {
        let mut r = self;
        for i in 0..2 {
            for j in 0..2 {
                r.m[i][j] += o.m[i][j];
            }
        }
        r
    }
}

impl AddAssign for Matrix2 {
    fn add_assign(&mut self, o: Matrix2) {
        *self = *self + o;
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, o: Matrix2) -> Matrix2 {
        self + (-o)
    }
}

impl Neg for Matrix2 {
    type Output = Matrix2;
    fn neg(self) -> Matrix2 {
        self.scale(-ONE)
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, o: Matrix2) -> Matrix2 {
        let a = &self.m;
        let b = &o.m;
        Matrix2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<f64> for Matrix2 {
    type Output = Matrix2;
    fn mul(self, s: f64) -> Matrix2 {
        self.scale(Complex64::new(s, 0.0))
    }
}

impl fmt::Display for Matrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.m;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

/// Spectral parameter `Λ ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParam {
    pub lambda: Complex64,
}

impl SpectralParam {
    pub fn new(lambda: Complex64) -> Result<Self> {
        if lambda.norm() == 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("spectral parameter must be nonzero, got {lambda}")));
        }
        Ok(SpectralParam { lambda })
    }

    pub fn real(lambda: f64) -> Result<Self> {
        Self::new(Complex64::new(lambda, 0.0))
    }

    /// `Λ + 1/Λ`
    pub fn plus(&self) -> Complex64 {
        self.lambda + self.lambda.inv()
    }

    /// `Λ − 1/Λ`
    pub fn minus(&self) -> Complex64 {
        self.lambda - self.lambda.inv()
    }
}

/// Local field data needed by the connections and the curvature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJet {
    pub phi: Complex64,
    pub phi_x: Complex64,
    pub phi_t: Complex64,
    pub phi_xx: Complex64,
    pub phi_tt: Complex64,
}

impl FieldJet {
    pub fn at(state: &FieldState, i: usize, spec: &PotentialSpec) -> Result<Self> {
        let phi = state.phi[i];
        let phi_xx = state.phi_xx(i);
        // Φ_tt is reconstructed from the equation of motion.
        let phi_tt = phi_xx - spec.eval_dv(phi).map_err(singular)?;
        Ok(FieldJet {
            phi,
            phi_x: state.phi_x(i),
            phi_t: state.pi[i],
            phi_xx,
            phi_tt,
        })
    }
}

fn singular(e: Error) -> Error {
    match e {
        Error::NonFinite { phi, spec, .. } => Error::PotentialSingularity(format!("V'/sqrt(V) at phi={phi} for {spec}")),
        other => other,
    }
}

/// `(A_t, A_x)` from `Φ`, `Φ_x`, `Φ_t`.
pub fn connections(spec: &PotentialSpec, phi: Complex64, phi_x: Complex64, phi_t: Complex64, lam: &SpectralParam) -> Result<(Matrix2, Matrix2)> {
    let b = spec.lax_coupling()?;
    let [w, w1, _] = spec.root_jet(phi).map_err(singular)?;
    let (lp, lm) = (lam.plus(), lam.minus());
    let c = 1.0 / (2.0 * SQRT_2);
    let half_b_over_i = b / (2.0 * I);
    // i α₊ and i α₋ in Pauli components.
    let at = Matrix2::from_pauli(ZERO, I * c * lp * w1, -I * c * b * lm * w, half_b_over_i * phi_x);
    let ax = Matrix2::from_pauli(ZERO, -I * c * lm * w1, I * c * b * lp * w, half_b_over_i * phi_t);
    Ok((at, ax))
}

pub fn connection_at(state: &FieldState, i: usize, lam: &SpectralParam, spec: &PotentialSpec) -> Result<Matrix2> {
    connections(spec, state.phi[i], state.phi_x(i), state.pi[i], lam).map(|c| c.0)
}

pub fn connection_ax(state: &FieldState, i: usize, lam: &SpectralParam, spec: &PotentialSpec) -> Result<Matrix2> {
    connections(spec, state.phi[i], state.phi_x(i), state.pi[i], lam).map(|c| c.1)
}

/// Which pieces of the curvature to return.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anomaly {
    /// `Φ_tt − Φ_xx + V'(Φ)`
    pub eom_residual: Complex64,
    /// `(λ₋Φ_t + λ₊Φ_x)/(4√2 B) · [4B²√V + 2V''/√V − V'²/V^{3/2}] σ_x`
    pub delta: Matrix2,
}

/// Curvature pieces at a field jet. The full field strength is
/// `F_xt = (B/2i)(eom σ_z + Δ)`, see [`field_strength`].
pub fn anomaly_at(spec: &PotentialSpec, jet: &FieldJet, lam: &SpectralParam) -> Result<Anomaly> {
    let b = spec.lax_coupling()?;
    let eom = jet.phi_tt - jet.phi_xx + spec.eval_dv(jet.phi).map_err(singular)?;
    let bracket = spec.anomaly_bracket(jet.phi).map_err(singular)?;
    let pref = (lam.minus() * jet.phi_t + lam.plus() * jet.phi_x) / (4.0 * SQRT_2 * b);
    Ok(Anomaly {
        eom_residual: eom,
        delta: Matrix2::sigma_x().scale(pref * bracket),
    })
}

/// `[∂_t + A_t, ∂_x + A_x]`, equal to `(B/2i)(eom σ_z + Δ)`.
pub fn field_strength(spec: &PotentialSpec, jet: &FieldJet, lam: &SpectralParam) -> Result<Matrix2> {
    let b = spec.lax_coupling()?;
    let an = anomaly_at(spec, jet, lam)?;
    Ok((Matrix2::sigma_z().scale(an.eom_residual) + an.delta).scale(b / (2.0 * I)))
}

/// Curvature anomaly at grid node `i`, with `Φ_tt` reconstructed from the
/// equation of motion (so the `σ_z` part is zero up to rounding).
pub fn curvature_anomaly(state: &FieldState, i: usize, lam: &SpectralParam, spec: &PotentialSpec) -> Result<(Complex64, Matrix2)> {
    let jet = FieldJet::at(state, i, spec)?;
    let an = anomaly_at(spec, &jet, lam)?;
    Ok((an.eom_residual, an.delta))
}

/// One row of the parity / time-reversal table for a Pauli generator.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliPtRow {
    pub generator: &'static str,
    pub p: Matrix2,
    pub t: Matrix2,
    pub pt: Matrix2,
    pub expected_sign: [i8; 3],
    pub holds: bool,
}

/// Applies `𝒫 = σ_x` (conjugation `𝒫 M 𝒫`) and `𝒯` (complex conjugation) to
/// each Pauli matrix and checks the nine sign identities exactly.
pub fn pauli_pt_table() -> Vec<PauliPtRow> {
    let p = Matrix2::sigma_x();
    let rows: [(&str, Matrix2, [i8; 3]); 3] = [
        ("sigma_x", Matrix2::sigma_x(), [1, 1, 1]),
        ("sigma_y", Matrix2::sigma_y(), [-1, -1, 1]),
        ("sigma_z", Matrix2::sigma_z(), [-1, 1, -1]),
    ];
    rows.into_iter()
        .map(|(name, s, signs)| {
            let ps = p * s * p;
            let ts = s.conj();
            let pts = p * s.conj() * p;
            let ok = |m: Matrix2, sign: i8| m == s.scale(Complex64::new(sign as f64, 0.0));
            let holds = ok(ps, signs[0]) && ok(ts, signs[1]) && ok(pts, signs[2]) && p * pts.conj() * p == s;
            PauliPtRow {
                generator: name,
                p: ps,
                t: ts,
                pt: pts,
                expected_sign: signs,
                holds,
            }
        })
        .collect()
}

/// Ordered product of `exp(−A_k h)` over the given generators, the first
/// generator acting first.
pub fn ordered_exp_product<It: IntoIterator<Item = Matrix2>>(gens: It, h: f64) -> Matrix2 {
    let mut w = Matrix2::identity();
    for a in gens {
        w = (a * (-h)).exp() * w;
    }
    w
}

/// Edge orientation for [`wilson_line`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Edge {
    /// From `(x_from, t)` to `(x_to, t)`.
    SpaceAtFixedT { t: f64, x_from: f64, x_to: f64 },
    /// From `(x, t_from)` to `(x, t_to)`.
    TimeAtFixedX { x: f64, t_from: f64, t_to: f64 },
}

/// Sampling options for lines on a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineOptions {
    /// Time sub-step along time edges, as a fraction of `dx`.
    pub time_step_over_dx: f64,
}

impl Default for LineOptions {
    fn default() -> Self {
        LineOptions { time_step_over_dx: 1.0 }
    }
}

/// `(Φ, Φ_x, Φ_t)` at `(x, t)` on a trajectory.
pub fn fields_at(traj: &Trajectory, x: f64, t: f64) -> Result<(Complex64, Complex64, Complex64)> {
    let g = traj.grid();
    let (phi, pi) = traj.sample(x, t)?;
    let dx = g.dx;
    let (xl, xr) = ((x - dx).max(g.x_min), (x + dx).min(g.x_max));
    let (pl, _) = traj.sample(xl, t)?;
    let (pr, _) = traj.sample(xr, t)?;
    Ok((phi, (pr - pl) / (xr - xl), pi))
}

/// Wilson line along one straight edge of the trajectory's space-time box,
/// with midpoint sampling of the connection.
pub fn wilson_line(traj: &Trajectory, edge: Edge, lam: &SpectralParam, spec: &PotentialSpec, opts: &LineOptions) -> Result<(Matrix2, usize)> {
    let g = traj.grid();
    let inside_x = |x: f64| x >= g.x_min - 1e-9 * g.dx && x <= g.x_max + 1e-9 * g.dx;
    let (t0, t1) = (traj.t_start().min(traj.t_end()), traj.t_start().max(traj.t_end()));
    let tol_t = 1e-9 * traj.dt_snapshot.abs();
    let inside_t = |t: f64| t >= t0 - tol_t && t <= t1 + tol_t;
    match edge {
        Edge::SpaceAtFixedT { t, x_from, x_to } => {
            if !inside_t(t) || !inside_x(x_from) || !inside_x(x_to) {
                return Err(Error::EdgeOutsideTrajectory(format!("space edge t={t} x={x_from}..{x_to}")));
            }
            let state = traj.state_at(t)?;
            space_line(&state, x_from, x_to, lam, spec)
        }
        Edge::TimeAtFixedX { x, t_from, t_to } => {
            if !inside_x(x) || !inside_t(t_from) || !inside_t(t_to) {
                return Err(Error::EdgeOutsideTrajectory(format!("time edge x={x} t={t_from}..{t_to}")));
            }
            let len = t_to - t_from;
            let hmax = (opts.time_step_over_dx * g.dx).min(traj.dt_snapshot.abs());
            let n = ((len.abs() / hmax).ceil() as usize).max(1);
            let h = len / n as f64;
            let mut w = Matrix2::identity();
            for k in 0..n {
                let tm = t_from + h * (k as f64 + 0.5);
                let (phi, phi_x, phi_t) = fields_at(traj, x, tm)?;
                let (at, _) = connections(spec, phi, phi_x, phi_t, lam)?;
                w = (at * (-h)).exp() * w;
            }
            Ok((w, n))
        }
    }
}

/// Space line on one state between `x_from` and `x_to` (either order).
/// Cells are split at grid nodes; each piece uses the cell's linear
/// interpolant at its midpoint.
pub fn space_line(state: &FieldState, x_from: f64, x_to: f64, lam: &SpectralParam, spec: &PotentialSpec) -> Result<(Matrix2, usize)> {
    let g = &state.grid;
    let (lo, hi) = (x_from.min(x_to), x_from.max(x_to));
    let (i_lo, _) = g.locate(lo).ok_or_else(|| Error::EdgeOutsideTrajectory(format!("x={lo}")))?;
    let (i_hi, _) = g.locate(hi).ok_or_else(|| Error::EdgeOutsideTrajectory(format!("x={hi}")))?;
    let mut pieces: Vec<(f64, f64, usize)> = Vec::new();
    for i in i_lo..=i_hi.min(g.n_points - 2) {
        let (a, b) = (g.x(i).max(lo), g.x(i + 1).min(hi));
        if b - a > 1e-12 * g.dx {
            pieces.push((a, b, i));
        }
    }
    let gen = |&(a, b, i): &(f64, f64, usize)| -> Result<(Matrix2, f64)> {
        let xm = 0.5 * (a + b);
        let w = (xm - g.x(i)) / g.dx;
        let phi = state.phi[i] * (1.0 - w) + state.phi[i + 1] * w;
        let pi = state.pi[i] * (1.0 - w) + state.pi[i + 1] * w;
        let phi_x = (state.phi[i + 1] - state.phi[i]) / g.dx;
        let (_, ax) = connections(spec, phi, phi_x, pi, lam)?;
        Ok((ax, b - a))
    };
    let mut w = Matrix2::identity();
    let n = pieces.len();
    if x_to >= x_from {
        for p in &pieces {
            let (a, h) = gen(p)?;
            w = (a * (-h)).exp() * w;
        }
    } else {
        for p in pieces.iter().rev() {
            let (a, h) = gen(p)?;
            w = (a * h).exp() * w;
        }
    }
    Ok((w, n))
}

/// Rectangle with vertices `(x_c ± L, t_c ± τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourRect {
    pub l: f64,
    pub tau: f64,
    pub x_c: f64,
    pub t_c: f64,
}

impl ContourRect {
    pub fn new(l: f64, tau: f64) -> Result<Self> {
        Self::centered(l, tau, 0.0, 0.0)
    }

    pub fn centered(l: f64, tau: f64, x_c: f64, t_c: f64) -> Result<Self> {
        if !(l > 0.0 && tau > 0.0) {
            return Err(Error::InvalidParameter(format!("contour needs L, tau > 0, got {l}, {tau}")));
        }
        Ok(ContourRect { l, tau, x_c, t_c })
    }

    pub fn area(&self) -> f64 {
        4.0 * self.l * self.tau
    }

    fn check_inside(&self, traj: &Trajectory) -> Result<()> {
        let g = traj.grid();
        let (t0, t1) = (traj.t_start().min(traj.t_end()), traj.t_start().max(traj.t_end()));
        let tol = 1e-9;
        if self.x_c - self.l < g.x_min - tol
            || self.x_c + self.l > g.x_max + tol
            || self.t_c - self.tau < t0 - tol
            || self.t_c + self.tau > t1 + tol
        {
            return Err(Error::ContourOutsideTrajectory(format!(
                "L={} tau={} around ({}, {})",
                self.l, self.tau, self.x_c, self.t_c
            )));
        }
        Ok(())
    }
}

/// Loop `W(Γ_{−L}) W(Γ_{+τ}) W(Γ_{+L}) W(Γ_{−τ})` starting at `(x_c − L, t_c − τ)`
/// and running counter-clockwise in the `(x, t)` plane.
pub fn wilson_loop_rect(traj: &Trajectory, c: &ContourRect, lam: &SpectralParam, spec: &PotentialSpec) -> Result<Matrix2> {
    wilson_loop_rect_with(traj, c, lam, spec, &LineOptions::default())
}

pub fn wilson_loop_rect_with(traj: &Trajectory, c: &ContourRect, lam: &SpectralParam, spec: &PotentialSpec, opts: &LineOptions) -> Result<Matrix2> {
    c.check_inside(traj)?;
    let (xl, xr) = (c.x_c - c.l, c.x_c + c.l);
    let (tb, tt) = (c.t_c - c.tau, c.t_c + c.tau);
    let bottom = wilson_line(traj, Edge::SpaceAtFixedT { t: tb, x_from: xl, x_to: xr }, lam, spec, opts)?.0;
    let right = wilson_line(traj, Edge::TimeAtFixedX { x: xr, t_from: tb, t_to: tt }, lam, spec, opts)?.0;
    let top = wilson_line(traj, Edge::SpaceAtFixedT { t: tt, x_from: xr, x_to: xl }, lam, spec, opts)?.0;
    let left = wilson_line(traj, Edge::TimeAtFixedX { x: xl, t_from: tt, t_to: tb }, lam, spec, opts)?.0;
    Ok(left * top * right * bottom)
}

/// `‖W − 𝟙‖` (Frobenius) and `|det W − 1|`.
pub fn loop_deviation(w: &Matrix2) -> (f64, f64) {
    ((*w - Matrix2::identity()).norm(), (w.det() - ONE).norm())
}

/// Largest contour, in lattice steps, accepted by [`stokes_residual`].
pub const STOKES_MAX_STEPS: f64 = 5.0;

/// Residual of the first-order non-abelian Stokes relation on a small
/// rectangle: `‖(W − 𝟙) − ∬ U⁻¹ F_xt U dx dt‖`, with `U` the transport from
/// the base corner along `x` first and then along `t`.
///
/// The lattice is `dx` in space and the snapshot spacing in time; the
/// contour corners must lie on it.
pub fn stokes_residual(traj: &Trajectory, c: &ContourRect, lam: &SpectralParam, spec: &PotentialSpec) -> Result<f64> {
    let g = *traj.grid();
    let dt = traj.dt_snapshot.abs();
    if c.l > STOKES_MAX_STEPS * g.dx * (1.0 + 1e-9) || c.tau > STOKES_MAX_STEPS * dt * (1.0 + 1e-9) {
        return Err(Error::ContourTooLarge(format!(
            "L={} tau={} exceeds {} lattice steps (dx={}, dt={})",
            c.l, c.tau, STOKES_MAX_STEPS, g.dx, dt
        )));
    }
    c.check_inside(traj)?;
    let nx = (2.0 * c.l / g.dx).round() as usize;
    let nt = (2.0 * c.tau / dt).round() as usize;
    if nx == 0 || nt == 0 {
        return Err(Error::InvalidParameter("contour smaller than one plaquette".into()));
    }
    let hx = 2.0 * c.l / nx as f64;
    let ht = 2.0 * c.tau / nt as f64;
    let opts = LineOptions { time_step_over_dx: ht / g.dx };
    let w = wilson_loop_rect_with(traj, c, lam, spec, &opts)?;
    let (x0, t0) = (c.x_c - c.l, c.t_c - c.tau);

    // Connections at half-lattice points.
    let a_x = |x: f64, t: f64| -> Result<Matrix2> {
        let (phi, phi_x, phi_t) = fields_at(traj, x, t)?;
        Ok(connections(spec, phi, phi_x, phi_t, lam)?.1)
    };
    let a_t = |x: f64, t: f64| -> Result<Matrix2> {
        let (phi, phi_x, phi_t) = fields_at(traj, x, t)?;
        Ok(connections(spec, phi, phi_x, phi_t, lam)?.0)
    };

    let mut integral = Matrix2::zero();
    // Transport along the bottom edge to the left side of column j.
    let mut u_bottom = Matrix2::identity();
    for j in 0..nx {
        let xa = x0 + hx * j as f64;
        let xm = xa + 0.5 * hx;
        // Half a cell further along x, to the column centre.
        let u_col = (a_x(xa + 0.25 * hx, t0)? * (-0.5 * hx)).exp() * u_bottom;
        let mut u = u_col;
        for k in 0..nt {
            let ta = t0 + ht * k as f64;
            let tm = ta + 0.5 * ht;
            // Up to the plaquette centre.
            let half = if k == 0 { 0.5 * ht } else { ht };
            let t_mid_seg = if k == 0 { t0 + 0.25 * ht } else { tm - 0.5 * ht };
            u = (a_t(xm, t_mid_seg)? * (-half)).exp() * u;
            let f = plaquette_curvature(traj, spec, lam, xm, tm, hx, ht)?;
            integral += u.inverse() * f * u * (hx * ht);
        }
        u_bottom = (a_x(xa + 0.75 * hx, t0)? * (-0.5 * hx)).exp() * u_col;
    }
    Ok(((w - Matrix2::identity()) - integral).norm())
}

/// `F_xt` at `(x, t)` with derivatives from differences of step `hx`, `ht`.
fn plaquette_curvature(traj: &Trajectory, spec: &PotentialSpec, lam: &SpectralParam, x: f64, t: f64, hx: f64, ht: f64) -> Result<Matrix2> {
    let (phi, pi) = traj.sample(x, t)?;
    let (pl, _) = traj.sample(x - hx, t)?;
    let (pr, _) = traj.sample(x + hx, t)?;
    let (_, qd) = traj.sample(x, t - 0.5 * ht)?;
    let (_, qu) = traj.sample(x, t + 0.5 * ht)?;
    let jet = FieldJet {
        phi,
        phi_x: (pr - pl) / (2.0 * hx),
        phi_t: pi,
        phi_xx: (pr - phi * 2.0 + pl) / (hx * hx),
        phi_tt: (qu - qd) / ht,
    };
    field_strength(spec, &jet, lam)
}
