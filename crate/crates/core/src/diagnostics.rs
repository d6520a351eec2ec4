//! PT residuals, anomaly integrals, topological charge and radiation.

use crate::error::{Error, Result};
use crate::evolve::{energy_density, FieldState, Grid1D, Trajectory};
use crate::lax::{anomaly_at, connections, fields_at, FieldJet, Matrix2, SpectralParam};
use crate::potentials::PotentialSpec;
use num_complex::Complex64;
use rayon::prelude::*;
use std::fmt::Write as _;

/// Reflection sector. Under `x → 2x_c − x`, `t → 2t_c − t`:
/// `Even` compares `Φ` with `Φ*`, `Odd` compares `Φ` with `Φ_L + Φ_R − Φ*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn name(&self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// Sampling controls for the reflection tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtOptions {
    pub x_stride: usize,
    pub t_stride: usize,
    /// Fixed sector, or `None` for the smaller of the two.
    pub parity: Option<Parity>,
    /// Reduce real field differences modulo the vacuum spacing.
    pub mod_spacing: bool,
}

impl Default for PtOptions {
    fn default() -> Self {
        PtOptions {
            x_stride: 4,
            t_stride: 1,
            parity: None,
            mod_spacing: true,
        }
    }
}

/// How the connection conditions are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConnectionPtMode {
    /// `A(x,t) + 𝒢[A(x',t')] = 0` with `𝒢(M) = σ_x M* σ_x` (even sector) or
    /// `𝒢(M) = M*` (odd sector).
    #[default]
    Covariant,
    /// Plain equality `A_t(x,t) = A_t(x',t')`, `A_x(x,t) = A_t(x',t')`.
    Literal,
}

/// Summary of the reflection diagnostics of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PtReport {
    pub field_asymmetry: f64,
    pub at_residual: f64,
    pub ax_residual: f64,
    pub anomaly_l1: f64,
    pub center: (f64, f64),
    pub parity: Parity,
    pub dx: f64,
    pub dt_snapshot: f64,
    /// Bound on the interpolation error of reflected samples.
    pub interpolation_bound: f64,
    /// Guards that tripped while building the report.
    pub notes: Vec<String>,
}

impl PtReport {
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "field_asymmetry = {:.16e}", self.field_asymmetry);
        let _ = writeln!(s, "at_residual = {:.16e}", self.at_residual);
        let _ = writeln!(s, "ax_residual = {:.16e}", self.ax_residual);
        let _ = writeln!(s, "anomaly_l1 = {:.16e}", self.anomaly_l1);
        let _ = writeln!(s, "center_x = {:.16e}", self.center.0);
        let _ = writeln!(s, "center_t = {:.16e}", self.center.1);
        let _ = writeln!(s, "parity = {}", self.parity.name());
        let _ = writeln!(s, "dx = {:.16e}", self.dx);
        let _ = writeln!(s, "dt_snapshot = {:.16e}", self.dt_snapshot);
        let _ = writeln!(s, "interpolation_bound = {:.16e}", self.interpolation_bound);
        let _ = writeln!(s, "partial = {}", !self.notes.is_empty());
        for n in &self.notes {
            let _ = writeln!(s, "note = {n}");
        }
        s
    }

    pub const CSV_HEADER: &'static str =
        "field_asymmetry,at_residual,ax_residual,anomaly_l1,center_x,center_t,parity,dx,dt_snapshot,interpolation_bound";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}",
            self.field_asymmetry,
            self.at_residual,
            self.ax_residual,
            self.anomaly_l1,
            self.center.0,
            self.center.1,
            self.parity.name(),
            self.dx,
            self.dt_snapshot,
            self.interpolation_bound
        )
    }
}

fn weighted_moments(grid: &Grid1D, w: &[f64]) -> (f64, f64) {
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (i, &wi) in w.iter().enumerate() {
        let x = grid.x(i);
        m0 += wi;
        m1 += wi * x;
        m2 += wi * x * x;
    }
    if m0 <= 0.0 {
        return (0.0, 0.0);
    }
    let mean = m1 / m0;
    (mean, (m2 / m0 - mean * mean).max(0.0))
}

/// Index of the interior snapshot with the smallest weighted variance.
fn variance_minimum(grid: &Grid1D, weights: &[Vec<f64>]) -> Result<(usize, Vec<(f64, f64)>)> {
    if weights.len() < 3 {
        return Err(Error::NoCollisionFound);
    }
    let stats: Vec<(f64, f64)> = weights.iter().map(|w| weighted_moments(grid, w)).collect();
    let (k, vmin) = stats
        .iter()
        .map(|s| s.1)
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    let vmax = stats.iter().map(|s| s.1).fold(0.0, f64::max);
    if k == 0 || k + 1 == stats.len() || vmax <= 0.0 || (vmax - vmin) < 1e-3 * vmax {
        return Err(Error::NoCollisionFound);
    }
    Ok((k, stats))
}

/// Centre of a collision from per-snapshot weights `w(x) ≥ 0`: `t_c`
/// minimises the weighted spatial variance (parabolic refinement), `x_c` is
/// the weighted mean there.
pub fn center_from_weights(grid: &Grid1D, times: &[f64], weights: &[Vec<f64>]) -> Result<(f64, f64)> {
    if times.len() != weights.len() {
        return Err(Error::NoCollisionFound);
    }
    let (k, stats) = variance_minimum(grid, weights)?;
    let (y0, y1, y2) = (stats[k - 1].1, stats[k].1, stats[k + 1].1);
    let den = y0 - 2.0 * y1 + y2;
    let shift = if den > 0.0 { (0.5 * (y0 - y2) / den).clamp(-0.5, 0.5) } else { 0.0 };
    let h = times[k + 1] - times[k];
    let t_c = times[k] + shift * h;
    let x_c = if shift >= 0.0 {
        stats[k].0 * (1.0 - shift) + stats[k + 1].0 * shift
    } else {
        stats[k].0 * (1.0 + shift) - stats[k - 1].0 * shift
    };
    Ok((x_c, t_c))
}

fn positive_density(s: &FieldState, spec: &PotentialSpec) -> Result<Vec<f64>> {
    energy_density(s, spec).map(|d| d.into_iter().map(|v| v.max(0.0)).collect())
}

/// Collision centre of a Klein–Gordon trajectory, weighting by energy density.
///
/// The snapshot with the smallest energy-weighted variance brackets the
/// minimum, which is then located on the time-interpolated trajectory by
/// golden-section search.
pub fn center_of_mass_frame(traj: &Trajectory) -> Result<(f64, f64)> {
    let weights = traj
        .states
        .par_iter()
        .map(|s| positive_density(s, &traj.spec))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let grid = traj.grid();
    let (k, _) = variance_minimum(grid, &weights)?;
    let at = |t: f64| -> Result<(f64, f64)> {
        let s = traj.state_at(t)?;
        Ok(weighted_moments(grid, &positive_density(&s, &traj.spec)?))
    };
    let (mut a, mut b) = (traj.states[k - 1].t, traj.states[k + 1].t);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (at(c)?.1, at(d)?.1);
    let tol = 1e-7 * traj.dt_snapshot.abs();
    while (b - a) > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = at(c)?.1;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = at(d)?.1;
        }
    }
    let t_c = 0.5 * (a + b);
    Ok((at(t_c)?.0, t_c))
}

fn reduce(d: Complex64, spacing: Option<f64>) -> Complex64 {
    match spacing {
        Some(s) => Complex64::new(d.re - s * (d.re / s).round(), d.im),
        None => d,
    }
}

struct Box2 {
    xs: Vec<usize>,
    ts: Vec<usize>,
}

/// Nodes and snapshots whose reflections stay inside the trajectory.
fn reflection_box(traj: &Trajectory, center: (f64, f64), xs_stride: usize, ts_stride: usize) -> Result<Box2> {
    let g = traj.grid();
    let (x_c, t_c) = center;
    let (t0, t1) = (traj.t_start().min(traj.t_end()), traj.t_start().max(traj.t_end()));
    if x_c < g.x_min || x_c > g.x_max || t_c < t0 || t_c > t1 {
        return Err(Error::ReflectionOutsideBox { x: x_c, t: t_c });
    }
    let tol = 1e-9;
    let xs: Vec<usize> = (0..g.n_points)
        .step_by(xs_stride.max(1))
        .filter(|&i| {
            let xr = 2.0 * x_c - g.x(i);
            xr >= g.x_min - tol * g.dx && xr <= g.x_max + tol * g.dx
        })
        .collect();
    let ts: Vec<usize> = (0..traj.states.len())
        .step_by(ts_stride.max(1))
        .filter(|&k| {
            let tr = 2.0 * t_c - traj.states[k].t;
            tr >= t0 - tol && tr <= t1 + tol
        })
        .collect();
    if xs.is_empty() || ts.is_empty() {
        return Err(Error::ReflectionOutsideBox { x: x_c, t: t_c });
    }
    Ok(Box2 { xs, ts })
}

/// `max |Φ(x,t) − 𝒫𝒯Φ(x,t)|` over the reflection box, for the given sector.
pub fn pt_asymmetry_sector(traj: &Trajectory, center: (f64, f64), parity: Parity, opts: &PtOptions) -> Result<f64> {
    let bx = reflection_box(traj, center, opts.x_stride, opts.t_stride)?;
    let g = traj.grid();
    let spacing = if opts.mod_spacing { traj.spec.vacuum_spacing() } else { None };
    let per_t: Vec<Result<f64>> = bx
        .ts
        .par_iter()
        .map(|&k| {
            let st = &traj.states[k];
            let n = st.phi.len();
            let offset = st.phi[0] + st.phi[n - 1];
            let tr = 2.0 * center.1 - st.t;
            let mut worst: f64 = 0.0;
            for &i in &bx.xs {
                let xr = 2.0 * center.0 - g.x(i);
                let (pr, _) = traj.sample(xr, tr)?;
                let d = match parity {
                    Parity::Even => st.phi[i] - pr.conj(),
                    Parity::Odd => st.phi[i] + pr.conj() - offset,
                };
                worst = worst.max(reduce(d, spacing).norm());
            }
            Ok(worst)
        })
        .collect();
    let mut m: f64 = 0.0;
    for r in per_t {
        m = m.max(r?);
    }
    Ok(m)
}

/// Field PT asymmetry and the sector attaining it.
pub fn pt_asymmetry_with(traj: &Trajectory, center: (f64, f64), opts: &PtOptions) -> Result<(f64, Parity)> {
    match opts.parity {
        Some(p) => Ok((pt_asymmetry_sector(traj, center, p, opts)?, p)),
        None => {
            let e = pt_asymmetry_sector(traj, center, Parity::Even, opts)?;
            let o = pt_asymmetry_sector(traj, center, Parity::Odd, opts)?;
            Ok(if e <= o { (e, Parity::Even) } else { (o, Parity::Odd) })
        }
    }
}

pub fn pt_asymmetry(traj: &Trajectory, center: (f64, f64)) -> Result<f64> {
    pt_asymmetry_with(traj, center, &PtOptions::default()).map(|r| r.0)
}

fn reflect_matrix(m: &Matrix2, parity: Parity) -> Matrix2 {
    match parity {
        Parity::Even => {
            let sx = Matrix2::sigma_x();
            sx * m.conj() * sx
        }
        Parity::Odd => m.conj(),
    }
}

/// Max-norm residuals of the reflection conditions on `A_t` and `A_x`.
pub fn connection_pt_residuals_with(
    traj: &Trajectory,
    lam: &SpectralParam,
    spec: &PotentialSpec,
    center: (f64, f64),
    opts: &PtOptions,
    mode: ConnectionPtMode,
) -> Result<(f64, f64, Parity)> {
    let bx = reflection_box(traj, center, opts.x_stride, opts.t_stride)?;
    let g = traj.grid();
    let per_t: Vec<Result<[f64; 4]>> = bx
        .ts
        .par_iter()
        .map(|&k| {
            let st = &traj.states[k];
            let tr = 2.0 * center.1 - st.t;
            // [even_t, even_x, odd_t, odd_x] or [lit_t, lit_x, _, _]
            let mut worst = [0.0f64; 4];
            for &i in &bx.xs {
                let (at, ax) = connections(spec, st.phi[i], st.phi_x(i), st.pi[i], lam)?;
                let xr = 2.0 * center.0 - g.x(i);
                let (p, px, pt) = fields_at(traj, xr, tr)?;
                let (atr, axr) = connections(spec, p, px, pt, lam)?;
                match mode {
                    ConnectionPtMode::Covariant => {
                        for (slot, par) in [(0usize, Parity::Even), (2, Parity::Odd)] {
                            worst[slot] = worst[slot].max((at + reflect_matrix(&atr, par)).norm());
                            worst[slot + 1] = worst[slot + 1].max((ax + reflect_matrix(&axr, par)).norm());
                        }
                    }
                    ConnectionPtMode::Literal => {
                        worst[0] = worst[0].max((at - atr).norm());
                        worst[1] = worst[1].max((ax - atr).norm());
                    }
                }
            }
            Ok(worst)
        })
        .collect();
    let mut w = [0.0f64; 4];
    for r in per_t {
        let r = r?;
        for j in 0..4 {
            w[j] = w[j].max(r[j]);
        }
    }
    if mode == ConnectionPtMode::Literal {
        return Ok((w[0], w[1], Parity::Even));
    }
    let parity = match opts.parity {
        Some(p) => p,
        None if w[0].max(w[1]) <= w[2].max(w[3]) => Parity::Even,
        None => Parity::Odd,
    };
    Ok(match parity {
        Parity::Even => (w[0], w[1], parity),
        Parity::Odd => (w[2], w[3], parity),
    })
}

pub fn connection_pt_residuals(traj: &Trajectory, lam: &SpectralParam, spec: &PotentialSpec, center: (f64, f64)) -> Result<(f64, f64)> {
    connection_pt_residuals_with(traj, lam, spec, center, &PtOptions::default(), ConnectionPtMode::Covariant).map(|r| (r.0, r.1))
}

/// `‖Δ‖₂` at every node of one state.
pub fn anomaly_norms(state: &FieldState, lam: &SpectralParam, spec: &PotentialSpec) -> Result<Vec<f64>> {
    (0..state.grid.n_points)
        .map(|i| {
            let jet = FieldJet::at(state, i, spec)?;
            Ok(anomaly_at(spec, &jet, lam)?.delta.norm2())
        })
        .collect()
}

fn time_weights(n: usize) -> impl Fn(usize) -> f64 {
    move |k| if k == 0 || k + 1 == n { 0.5 } else { 1.0 }
}

/// Trapezoidal `∬ ‖Δ‖₂ dx dt` over the whole trajectory.
pub fn anomaly_l1(traj: &Trajectory, lam: &SpectralParam, spec: &PotentialSpec) -> Result<f64> {
    anomaly_localization(traj, lam, spec, 0.0).map(|r| r.0)
}

/// `(∬‖Δ‖, fraction inside the core window)`, where the core window at
/// each time is the set of nodes with energy density at least
/// `core_threshold` times that snapshot's maximum.
pub fn anomaly_localization(traj: &Trajectory, lam: &SpectralParam, spec: &PotentialSpec, core_threshold: f64) -> Result<(f64, f64)> {
    let g = traj.grid();
    let nt = traj.states.len();
    let wt = time_weights(nt);
    let wx = time_weights(g.n_points);
    let per: Vec<Result<(f64, f64)>> = traj
        .states
        .par_iter()
        .enumerate()
        .map(|(k, st)| {
            let norms = anomaly_norms(st, lam, spec)?;
            let dens = energy_density(st, spec)?;
            let dmax = dens.iter().cloned().fold(0.0, f64::max);
            let (mut all, mut core) = (0.0, 0.0);
            for i in 0..g.n_points {
                let v = norms[i] * wx(i);
                all += v;
                if dens[i] >= core_threshold * dmax {
                    core += v;
                }
            }
            Ok((all * wt(k), core * wt(k)))
        })
        .collect();
    let (mut all, mut core) = (0.0, 0.0);
    for r in per {
        let (a, c) = r?;
        all += a;
        core += c;
    }
    let scale = g.dx * traj.dt_snapshot.abs();
    let total = all * scale;
    let frac = if all > 0.0 { core / all } else { 1.0 };
    Ok((total, frac))
}

/// `(Φ(x_max) − Φ(x_min)) / spacing`, rounded.
pub fn topological_charge(state: &FieldState, spec: &PotentialSpec) -> Result<i64> {
    let n = state.grid.n_points;
    for i in [0, n - 1] {
        let p = state.phi[i];
        let vac = spec.nearest_vacuum(p.re).map_err(|_| Error::TailNotVacuum(p.norm()))?;
        let d = (p - vac.phi).norm();
        if d > 1e-6 {
            return Err(Error::TailNotVacuum(d));
        }
    }
    let spacing = spec
        .vacuum_spacing()
        .ok_or(Error::Unsupported { op: "topological charge", model: spec.model_name() })?;
    Ok(((state.phi[n - 1].re - state.phi[0].re) / spacing).round() as i64)
}

/// RMS distance from the nearest vacuum over nodes farther than `margin`
/// from every soliton core (nodes where the energy density exceeds 10% of
/// its maximum).
pub fn radiation_level(state: &FieldState, spec: &PotentialSpec, margin: f64) -> Result<f64> {
    let dens = energy_density(state, spec)?;
    let dmax = dens.iter().cloned().fold(0.0, f64::max);
    let g = &state.grid;
    let cores: Vec<f64> = (0..g.n_points).filter(|&i| dens[i] >= 0.1 * dmax).map(|i| g.x(i)).collect();
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..g.n_points {
        let x = g.x(i);
        if cores.iter().any(|c| (c - x).abs() < margin) {
            continue;
        }
        let p = state.phi[i].re;
        let vac = spec.nearest_vacuum(p).map(|v| v.phi).unwrap_or(p);
        sum += (p - vac).powi(2);
        count += 1;
    }
    Ok(if count == 0 { 0.0 } else { (sum / count as f64).sqrt() })
}

/// Full report; guards that fail are noted and the corresponding entries
/// set to NaN.
pub fn pt_report(traj: &Trajectory, lam: &SpectralParam, center: Option<(f64, f64)>, opts: &PtOptions) -> PtReport {
    let spec = traj.spec;
    let mut notes = Vec::new();
    let center = match center.map(Ok).unwrap_or_else(|| center_of_mass_frame(traj)) {
        Ok(c) => c,
        Err(e) => {
            notes.push(format!("center: {e}"));
            (0.0, 0.5 * (traj.t_start() + traj.t_end()))
        }
    };
    let (field_asymmetry, parity) = match pt_asymmetry_with(traj, center, opts) {
        Ok(r) => r,
        Err(e) => {
            notes.push(format!("pt_asymmetry: {e}"));
            (f64::NAN, Parity::Even)
        }
    };
    let copts = PtOptions { parity: Some(parity), ..*opts };
    let (at_residual, ax_residual) = match connection_pt_residuals_with(traj, lam, &spec, center, &copts, ConnectionPtMode::Covariant) {
        Ok(r) => (r.0, r.1),
        Err(e) => {
            notes.push(format!("connection residuals: {e}"));
            (f64::NAN, f64::NAN)
        }
    };
    let anomaly = match anomaly_l1(traj, lam, &spec) {
        Ok(v) => v,
        Err(e) => {
            notes.push(format!("anomaly: {e}"));
            f64::NAN
        }
    };
    // Linear interpolation in x: |Φ_xx| dx²/8; cubic Hermite in t is higher order.
    let g = traj.grid();
    let mut phixx: f64 = 0.0;
    for st in &traj.states {
        for i in 1..g.n_points - 1 {
            phixx = phixx.max(st.phi_xx(i).norm());
        }
    }
    PtReport {
        field_asymmetry,
        at_residual,
        ax_residual,
        anomaly_l1: anomaly,
        center,
        parity,
        dx: g.dx,
        dt_snapshot: traj.dt_snapshot,
        interpolation_bound: phixx * g.dx * g.dx / 8.0,
        notes,
    }
}
