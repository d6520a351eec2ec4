//! Time evolution: leapfrog for `Φ_tt − Φ_xx + V'(Φ) = 0` and a Fourier
//! pseudospectral method of lines for KdV.

use crate::error::{Error, Result};
use crate::field::FieldValue;
use crate::potentials::PotentialSpec;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Uniform grid with both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 16 {
            return Err(Error::InvalidParameter(format!("n_points must be >= 16, got {n_points}")));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidParameter(format!("bad interval [{x_min}, {x_max}]")));
        }
        Ok(Grid1D {
            x_min,
            x_max,
            n_points,
            dx: (x_max - x_min) / (n_points - 1) as f64,
        })
    }

    /// `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + self.dx * i as f64
        }
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.x(i))
    }

    /// Period when the grid is read as periodic (the last node is not
    /// identified with the first).
    pub fn period(&self) -> f64 {
        self.n_points as f64 * self.dx
    }

    /// Fractional index of `x`, or `None` outside the grid.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let s = (x - self.x_min) / self.dx;
        let eps = 1e-9;
        if s < -eps || s > (self.n_points - 1) as f64 + eps {
            return None;
        }
        let s = s.clamp(0.0, (self.n_points - 1) as f64);
        let i = (s.floor() as usize).min(self.n_points - 2);
        Some((i, s - i as f64))
    }

    /// Same grid with twice the resolution.
    pub fn refined(&self) -> Self {
        Grid1D::new(self.x_min, self.x_max, 2 * self.n_points - 1).expect("valid grid")
    }
}

/// Field and momentum at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: Grid1D,
    pub t: f64,
    pub phi: Vec<Complex64>,
    pub pi: Vec<Complex64>,
}

impl FieldState {
    pub fn new(grid: Grid1D, t: f64, phi: Vec<Complex64>, pi: Vec<Complex64>) -> Result<Self> {
        if phi.len() != grid.n_points || pi.len() != grid.n_points {
            return Err(Error::InvalidParameter(format!(
                "state arrays have lengths {}, {}; grid has {}",
                phi.len(),
                pi.len(),
                grid.n_points
            )));
        }
        Ok(FieldState { grid, t, phi, pi })
    }

    pub fn from_real(grid: Grid1D, t: f64, phi: &[f64], pi: &[f64]) -> Result<Self> {
        let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(grid, t, c(phi), c(pi))
    }

    /// Constant field at `phi_vac`, zero momentum.
    pub fn vacuum(grid: Grid1D, phi_vac: f64) -> Self {
        FieldState {
            grid,
            t: 0.0,
            phi: vec![Complex64::new(phi_vac, 0.0); grid.n_points],
            pi: vec![Complex64::new(0.0, 0.0); grid.n_points],
        }
    }

    pub fn max_imag(&self) -> f64 {
        self.phi.iter().chain(&self.pi).map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.max_imag() <= 1e-12
    }

    /// Central-difference `Φ_x` (one-sided at the ends).
    pub fn phi_x(&self, i: usize) -> Complex64 {
        let n = self.grid.n_points;
        let dx = self.grid.dx;
        if i == 0 {
            (self.phi[1] - self.phi[0]) / dx
        } else if i + 1 == n {
            (self.phi[n - 1] - self.phi[n - 2]) / dx
        } else {
            (self.phi[i + 1] - self.phi[i - 1]) / (2.0 * dx)
        }
    }

    /// Three-point `Φ_xx`; zero at the ends.
    pub fn phi_xx(&self, i: usize) -> Complex64 {
        let n = self.grid.n_points;
        if i == 0 || i + 1 == n {
            return Complex64::new(0.0, 0.0);
        }
        let dx = self.grid.dx;
        (self.phi[i + 1] - self.phi[i] * 2.0 + self.phi[i - 1]) / (dx * dx)
    }
}

/// Snapshots at uniformly spaced times on one grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub spec: PotentialSpec,
    pub states: Vec<FieldState>,
    pub dt_snapshot: f64,
    /// Integrator step used to produce the snapshots.
    pub dt: f64,
    pub energies: Vec<f64>,
}

impl Trajectory {
    pub fn grid(&self) -> &Grid1D {
        &self.states[0].grid
    }

    pub fn t_start(&self) -> f64 {
        self.states[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.states.last().expect("nonempty").t
    }

    /// Largest `|E(t) − E(t₀)| / |E(t₀)|` over the snapshots.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        let scale = e0.abs().max(f64::MIN_POSITIVE);
        self.energies.iter().map(|e| (e - e0).abs() / scale).fold(0.0, f64::max)
    }

    /// Snapshot index nearest to `t`, if within half a snapshot spacing.
    pub fn snapshot_at(&self, t: f64) -> Option<&FieldState> {
        let s = (t - self.t_start()) / self.dt_snapshot;
        let k = s.round();
        if k < 0.0 || k as usize >= self.states.len() || (s - k).abs() > 1e-6 {
            return None;
        }
        Some(&self.states[k as usize])
    }

    fn in_time(&self, t: f64) -> bool {
        let eps = 1e-9 * self.dt_snapshot.abs();
        let (a, b) = (self.t_start().min(self.t_end()), self.t_start().max(self.t_end()));
        t >= a - eps && t <= b + eps
    }

    /// `(Φ, Π)` at grid node `i` and time `t`, using cubic Hermite interpolation
    /// between snapshots with `Φ_t = Π` and `Π_t = Φ_xx − V'(Φ)`.
    pub fn sample_node(&self, i: usize, t: f64) -> Result<(Complex64, Complex64)> {
        if !self.in_time(t) || i >= self.grid().n_points {
            return Err(Error::EdgeOutsideTrajectory(format!("node {i} at t={t}")));
        }
        let s = ((t - self.t_start()) / self.dt_snapshot).clamp(0.0, (self.states.len() - 1) as f64);
        let k = (s.floor() as usize).min(self.states.len().saturating_sub(2));
        if self.states.len() == 1 {
            return Ok((self.states[0].phi[i], self.states[0].pi[i]));
        }
        let u = s - k as f64;
        if u == 0.0 {
            return Ok((self.states[k].phi[i], self.states[k].pi[i]));
        }
        let (a, b) = (&self.states[k], &self.states[k + 1]);
        let h = self.dt_snapshot;
        let acc = |st: &FieldState| -> Result<Complex64> {
            Ok(st.phi_xx(i) - self.spec.eval_dv(st.phi[i])?)
        };
        let boundary = i == 0 || i + 1 == self.grid().n_points;
        let (fa, fb) = if boundary {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (acc(a)?, acc(b)?)
        };
        let (h00, h10, h01, h11) = hermite(u);
        let phi = a.phi[i] * h00 + a.pi[i] * (h10 * h) + b.phi[i] * h01 + b.pi[i] * (h11 * h);
        let pi = a.pi[i] * h00 + fa * (h10 * h) + b.pi[i] * h01 + fb * (h11 * h);
        Ok((phi, pi))
    }

    /// `(Φ, Π)` at `(x, t)`: Hermite in time, linear in space.
    pub fn sample(&self, x: f64, t: f64) -> Result<(Complex64, Complex64)> {
        let (i, w) = self
            .grid()
            .locate(x)
            .ok_or_else(|| Error::EdgeOutsideTrajectory(format!("x={x}")))?;
        let (p0, q0) = self.sample_node(i, t)?;
        if w == 0.0 {
            return Ok((p0, q0));
        }
        let (p1, q1) = self.sample_node(i + 1, t)?;
        Ok((p0 * (1.0 - w) + p1 * w, q0 * (1.0 - w) + q1 * w))
    }

    /// Full state at time `t`, interpolated as in [`Trajectory::sample_node`].
    pub fn state_at(&self, t: f64) -> Result<FieldState> {
        if let Some(s) = self.snapshot_at(t) {
            return Ok(s.clone());
        }
        let n = self.grid().n_points;
        let mut phi = Vec::with_capacity(n);
        let mut pi = Vec::with_capacity(n);
        for i in 0..n {
            let (p, q) = self.sample_node(i, t)?;
            phi.push(p);
            pi.push(q);
        }
        FieldState::new(*self.grid(), t, phi, pi)
    }
}

fn hermite(u: f64) -> (f64, f64, f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0, u3 - 2.0 * u2 + u, -2.0 * u3 + 3.0 * u2, u3 - u2)
}

/// Guards for the Klein–Gordon integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KgOptions {
    /// Largest allowed `|dt| / dx`.
    pub cfl: f64,
    /// Allowed deviation of the nodes next to each wall from the wall value.
    pub boundary_tol: f64,
}

impl Default for KgOptions {
    fn default() -> Self {
        KgOptions {
            cfl: 0.5,
            boundary_tol: 1e-6,
        }
    }
}

/// Kick–drift–kick integrator with Dirichlet walls. Works on `f64` for real
/// fields and on [`Complex64`] otherwise.
#[derive(Debug, Clone)]
pub struct KgStepper<T: FieldValue> {
    pub spec: PotentialSpec,
    pub grid: Grid1D,
    pub t: f64,
    pub phi: Vec<T>,
    pub pi: Vec<T>,
    force: Vec<T>,
    opts: KgOptions,
}

impl<T: FieldValue> KgStepper<T> {
    pub fn new(spec: &PotentialSpec, grid: Grid1D, t: f64, phi: Vec<T>, pi: Vec<T>, opts: KgOptions) -> Result<Self> {
        let mut s = KgStepper {
            spec: *spec,
            grid,
            t,
            phi,
            pi,
            force: Vec::new(),
            opts,
        };
        s.force = vec![T::from_real(0.0); grid.n_points];
        s.update_force()?;
        Ok(s)
    }

    fn update_force(&mut self) -> Result<()> {
        let n = self.grid.n_points;
        let inv = 1.0 / (self.grid.dx * self.grid.dx);
        for i in 1..n - 1 {
            let lap = (self.phi[i + 1] - self.phi[i] * 2.0 + self.phi[i - 1]) * inv;
            self.force[i] = lap - self.spec.eval_dv(self.phi[i])?;
        }
        Ok(())
    }

    pub fn check_dt(&self, dt: f64) -> Result<()> {
        let limit = self.opts.cfl * self.grid.dx;
        if !dt.is_finite() || dt.abs() > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, limit });
        }
        Ok(())
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        self.check_dt(dt)?;
        let n = self.grid.n_points;
        let half = 0.5 * dt;
        for i in 1..n - 1 {
            self.pi[i] += self.force[i] * half;
            self.phi[i] += self.pi[i] * dt;
        }
        self.update_force()?;
        for i in 1..n - 1 {
            self.pi[i] += self.force[i] * half;
        }
        self.t += dt;
        let drift = (self.phi[1] - self.phi[0]).norm().max((self.phi[n - 2] - self.phi[n - 1]).norm());
        if drift > self.opts.boundary_tol {
            return Err(Error::BoundaryDrift { t: self.t, drift });
        }
        Ok(())
    }

    pub fn energy(&self) -> Result<f64> {
        energy_slices(&self.spec, &self.grid, &self.phi, &self.pi).map(|e| e.re)
    }

    pub fn to_state(&self) -> FieldState {
        FieldState {
            grid: self.grid,
            t: self.t,
            phi: self.phi.iter().map(|v| v.to_complex()).collect(),
            pi: self.pi.iter().map(|v| v.to_complex()).collect(),
        }
    }
}

fn check_walls(state: &FieldState, spec: &PotentialSpec, tol: f64) -> Result<()> {
    let n = state.grid.n_points;
    for p in [state.phi[0], state.phi[n - 1]] {
        // Distance from a quadratic minimum: sqrt(2V/V'').
        let v = spec.eval_v(p)?.norm();
        let d = spec.eval_d2v(p)?.norm().max(1e-300);
        let dist = (2.0 * v / d).sqrt();
        if dist > tol {
            return Err(Error::BoundaryDrift { t: state.t, drift: dist });
        }
    }
    Ok(())
}

/// One leapfrog step with default guards.
pub fn step_kg(state: &FieldState, spec: &PotentialSpec, dt: f64) -> Result<FieldState> {
    let opts = KgOptions::default();
    check_walls(state, spec, opts.boundary_tol)?;
    if state.is_real() {
        let re = |v: &[Complex64]| v.iter().map(|z| z.re).collect::<Vec<f64>>();
        let mut s = KgStepper::new(spec, state.grid, state.t, re(&state.phi), re(&state.pi), opts)?;
        s.step(dt)?;
        Ok(s.to_state())
    } else {
        let mut s = KgStepper::new(spec, state.grid, state.t, state.phi.clone(), state.pi.clone(), opts)?;
        s.step(dt)?;
        Ok(s.to_state())
    }
}

/// Evolves to `t_final` with step `dt` (sign taken from the direction of
/// travel), keeping every `snapshot_every`-th state.
pub fn evolve_kg(
    state: &FieldState,
    spec: &PotentialSpec,
    t_final: f64,
    dt: f64,
    snapshot_every: usize,
) -> Result<Trajectory> {
    evolve_kg_with(state, spec, t_final, dt, snapshot_every, KgOptions::default())
}

pub fn evolve_kg_with(
    state: &FieldState,
    spec: &PotentialSpec,
    t_final: f64,
    dt: f64,
    snapshot_every: usize,
    opts: KgOptions,
) -> Result<Trajectory> {
    if snapshot_every == 0 {
        return Err(Error::InvalidParameter("snapshot_every must be >= 1".into()));
    }
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be nonzero, got {dt}")));
    }
    let span = t_final - state.t;
    let steps_f = (span / dt).abs();
    let steps = steps_f.round() as usize;
    if (steps_f - steps as f64).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!(
            "t_final - t0 = {span} is not a multiple of dt = {dt}"
        )));
    }
    let dt = dt.abs() * span.signum();
    check_walls(state, spec, opts.boundary_tol)?;
    if state.is_real() {
        let re = |v: &[Complex64]| v.iter().map(|z| z.re).collect::<Vec<f64>>();
        let s = KgStepper::new(spec, state.grid, state.t, re(&state.phi), re(&state.pi), opts)?;
        run(s, steps, dt, snapshot_every, state.t)
    } else {
        let s = KgStepper::new(spec, state.grid, state.t, state.phi.clone(), state.pi.clone(), opts)?;
        run(s, steps, dt, snapshot_every, state.t)
    }
}

fn run<T: FieldValue>(mut s: KgStepper<T>, steps: usize, dt: f64, every: usize, t0: f64) -> Result<Trajectory> {
    s.check_dt(dt)?;
    let mut states = vec![s.to_state()];
    let mut energies = vec![s.energy()?];
    for k in 1..=steps {
        s.step(dt)?;
        if k % every == 0 {
            // Re-anchor time to avoid accumulated rounding in t.
            s.t = t0 + dt * k as f64;
            states.push(s.to_state());
            energies.push(s.energy()?);
        }
    }
    Ok(Trajectory {
        spec: s.spec,
        states,
        dt_snapshot: dt * every as f64,
        dt,
        energies,
    })
}

fn energy_slices<T: FieldValue>(spec: &PotentialSpec, grid: &Grid1D, phi: &[T], pi: &[T]) -> Result<Complex64> {
    let n = grid.n_points;
    let dx = grid.dx;
    let mut kin = Complex64::new(0.0, 0.0);
    let mut pot = Complex64::new(0.0, 0.0);
    let mut grad = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        let p = pi[i].to_complex();
        kin += p * p * (0.5 * w);
        pot += spec.eval_v(phi[i])?.to_complex() * w;
        if i + 1 < n {
            let g = (phi[i + 1] - phi[i]).to_complex() / dx;
            grad += g * g * 0.5;
        }
    }
    Ok((kin + pot + grad) * dx)
}

/// `∫ ½(Π² + Φ_x²) + V(Φ) dx`; real part (the full complex value is
/// available from [`energy_kg_complex`]).
pub fn energy_kg(state: &FieldState, spec: &PotentialSpec) -> Result<f64> {
    energy_kg_complex(state, spec).map(|e| e.re)
}

pub fn energy_kg_complex(state: &FieldState, spec: &PotentialSpec) -> Result<Complex64> {
    energy_slices(spec, &state.grid, &state.phi, &state.pi)
}

/// Energy density `½(Π² + Φ_x²) + V(Φ)` at each node (real part).
pub fn energy_density(state: &FieldState, spec: &PotentialSpec) -> Result<Vec<f64>> {
    (0..state.grid.n_points)
        .map(|i| {
            let px = state.phi_x(i);
            let p = state.pi[i];
            Ok((0.5 * (p * p + px * px) + spec.eval_v(state.phi[i])?).re)
        })
        .collect()
}

/// RK4 stability constant: `dt (b k³ + |a| max|u| k) ≤ KDV_RK4_LIMIT`.
pub const KDV_RK4_LIMIT: f64 = 2.8;

/// Fourier pseudospectral KdV integrator on a periodic grid.
pub struct KdvSolver {
    pub a: f64,
    pub b: f64,
    pub grid: Grid1D,
    k: Vec<f64>,
    mask: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    buf2: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl KdvSolver {
    pub fn new(a: f64, b: f64, grid: Grid1D) -> Result<Self> {
        if a == 0.0 || !(b > 0.0) {
            return Err(Error::InvalidParameter(format!("need a != 0 and b > 0, got a={a} b={b}")));
        }
        let n = grid.n_points;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        let dk = 2.0 * PI / grid.period();
        let k: Vec<f64> = (0..n)
            .map(|j| {
                if 2 * j == n {
                    0.0
                } else if j < n / 2 + n % 2 {
                    dk * j as f64
                } else {
                    dk * (j as f64 - n as f64)
                }
            })
            .collect();
        let cut = 2.0 / 3.0 * PI / grid.dx;
        let mask = k.iter().map(|&kk| if kk.abs() < cut { 1.0 } else { 0.0 }).collect();
        Ok(KdvSolver {
            a,
            b,
            grid,
            k,
            mask,
            fwd,
            inv,
            buf: vec![Complex64::new(0.0, 0.0); n],
            buf2: vec![Complex64::new(0.0, 0.0); n],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        })
    }

    pub fn k_max(&self) -> f64 {
        PI / self.grid.dx
    }

    /// Largest stable step for a profile with `max|u| = umax`.
    pub fn dt_limit(&self, umax: f64) -> f64 {
        let k = self.k_max();
        KDV_RK4_LIMIT / (self.b * k * k * k + self.a.abs() * umax * k)
    }

    fn rhs(&mut self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        for ((b, b2), &v) in self.buf.iter_mut().zip(self.buf2.iter_mut()).zip(u) {
            *b = Complex64::new(v, 0.0);
            *b2 = Complex64::new(v * v, 0.0);
        }
        self.fwd.process_with_scratch(&mut self.buf, &mut self.scratch);
        self.fwd.process_with_scratch(&mut self.buf2, &mut self.scratch);
        let i = Complex64::i();
        for j in 0..n {
            let k = self.k[j];
            // −a (u²)_x / 2 − b u_xxx
            self.buf[j] = -i * k * 0.5 * self.a * self.mask[j] * self.buf2[j] + i * k * k * k * self.b * self.buf[j];
        }
        self.inv.process_with_scratch(&mut self.buf, &mut self.scratch);
        let norm = 1.0 / n as f64;
        for (o, b) in out.iter_mut().zip(&self.buf) {
            *o = b.re * norm;
        }
    }

    /// One classical RK4 step in place.
    pub fn step(&mut self, u: &mut [f64], dt: f64) -> Result<()> {
        if u.len() != self.grid.n_points {
            return Err(Error::InvalidParameter("length mismatch".into()));
        }
        let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let limit = self.dt_limit(umax);
        if !(dt.abs() <= limit) {
            return Err(Error::StabilityViolation { dt, limit });
        }
        let n = u.len();
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        self.rhs(u, &mut k1);
        for j in 0..n {
            tmp[j] = u[j] + 0.5 * dt * k1[j];
        }
        self.rhs(&tmp, &mut k2);
        for j in 0..n {
            tmp[j] = u[j] + 0.5 * dt * k2[j];
        }
        self.rhs(&tmp, &mut k3);
        for j in 0..n {
            tmp[j] = u[j] + dt * k3[j];
        }
        self.rhs(&tmp, &mut k4);
        for j in 0..n {
            u[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "kdv step",
                phi: "-".into(),
                spec: format!("kdv(a={},b={})", self.a, self.b),
            });
        }
        Ok(())
    }

    /// Advances `u` by `t_span` with steps no larger than `dt_max`, returning the
    /// number of steps taken.
    pub fn advance(&mut self, u: &mut [f64], t_span: f64, dt_max: f64) -> Result<usize> {
        let steps = (t_span.abs() / dt_max).ceil().max(1.0) as usize;
        let dt = t_span / steps as f64;
        for _ in 0..steps {
            self.step(u, dt)?;
        }
        Ok(steps)
    }

    /// Spectral first derivative.
    pub fn derivative(&mut self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        for (b, &v) in self.buf.iter_mut().zip(u) {
            *b = Complex64::new(v, 0.0);
        }
        self.fwd.process_with_scratch(&mut self.buf, &mut self.scratch);
        for j in 0..n {
            self.buf[j] *= Complex64::new(0.0, self.k[j]);
        }
        self.inv.process_with_scratch(&mut self.buf, &mut self.scratch);
        self.buf.iter().map(|z| z.re / n as f64).collect()
    }
}

/// One RK4 step of KdV on the periodic `grid`.
pub fn step_kdv(u: &[f64], a: f64, b: f64, dt: f64, grid: &Grid1D) -> Result<Vec<f64>> {
    let mut solver = KdvSolver::new(a, b, *grid)?;
    let mut out = u.to_vec();
    solver.step(&mut out, dt)?;
    Ok(out)
}

/// `∫ −(a/6) u³ + (b/2) u_x² dx` on the periodic grid.
pub fn energy_kdv(u: &[f64], a: f64, b: f64, grid: &Grid1D) -> f64 {
    let ux = match KdvSolver::new(a, b, *grid) {
        Ok(mut s) => s.derivative(u),
        Err(_) => return f64::NAN,
    };
    u.iter()
        .zip(&ux)
        .map(|(v, d)| -a / 6.0 * v * v * v + 0.5 * b * d * d)
        .sum::<f64>()
        * grid.dx
}
