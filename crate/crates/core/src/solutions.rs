//! Exact solutions and numerically constructed kinks.

use crate::error::{Error, Result};
use crate::evolve::{FieldState, Grid1D};
use crate::potentials::{PotentialSpec, VacuumInfo};
use num_complex::Complex64;
use std::f64::consts::SQRT_2;

/// Parameters shared by the closed-form solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonParams {
    /// KdV speeds.
    pub c1: f64,
    pub c2: f64,
    /// Rapidity, `v = tanh θ`.
    pub theta: f64,
    /// Internal phase of the complex sinh-Gordon soliton.
    pub omega: f64,
    pub mu: f64,
    pub beta: f64,
    pub mass: f64,
    pub gamma: f64,
    /// `+1` kink, `−1` antikink.
    pub eps_kink: i8,
}

impl Default for SolitonParams {
    fn default() -> Self {
        SolitonParams {
            c1: 4.0,
            c2: 2.0,
            theta: 0.0,
            omega: 0.0,
            mu: 1.0,
            beta: 1.0,
            mass: 1.0,
            gamma: 1.0,
            eps_kink: 1,
        }
    }
}

impl SolitonParams {
    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() || self.theta.tanh().abs() >= 1.0 {
            return Err(Error::InvalidParameter(format!("rapidity {} gives |v| >= 1", self.theta)));
        }
        if self.eps_kink != 1 && self.eps_kink != -1 {
            return Err(Error::InvalidParameter(format!("eps_kink must be +-1, got {}", self.eps_kink)));
        }
        Ok(())
    }

    pub fn velocity(&self) -> f64 {
        self.theta.tanh()
    }
}

/// Convection term used when checking a KdV profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convection {
    /// `a u u_x`
    UUx,
    /// `a u u_xx`, the alternative reading.
    UUxx,
}

/// KdV two-soliton with `ξᵢ = ½√(cᵢ/b)(x − cᵢt)`.
pub fn kdv_two_soliton(p: &SolitonParams, a: f64, b: f64, x: f64, t: f64) -> Result<f64> {
    if p.c1 == p.c2 {
        return Err(Error::DegenerateSpeeds(p.c1));
    }
    if !(b > 0.0) || a == 0.0 {
        return Err(Error::InvalidParameter(format!("need b > 0 and a != 0, got a={a} b={b}")));
    }
    let (r1, r2) = ((p.c1 / b).sqrt(), (p.c2 / b).sqrt());
    let xi1 = 0.5 * r1 * (x - p.c1 * t);
    let xi2 = 0.5 * r2 * (x - p.c2 * t);
    // Scale numerator and denominator by e^{-2s} so nothing overflows.
    let s = xi1.abs() + xi2.abs();
    let ch = |y: f64| 0.5 * ((y - s).exp() + (-y - s).exp());
    let sh = |y: f64| 0.5 * ((y - s).exp() - (-y - s).exp());
    let sh1 = sh(xi1);
    let ch2 = ch(xi2);
    let num = 12.0 * (p.c1 - p.c2) / (a * b) * (p.c2 * sh1 * sh1 + p.c1 * ch2 * ch2);
    let den = (r1 - r2) * ch(xi1 + xi2) + (r1 + r2) * ch(xi1 - xi2);
    Ok(num / (den * den))
}

/// Single KdV soliton, the `c₂ → 0` limit of [`kdv_two_soliton`].
pub fn kdv_one_soliton(c: f64, a: f64, b: f64, x: f64, t: f64) -> f64 {
    let xi = 0.5 * (c / b).sqrt() * (x - c * t);
    3.0 * c / a / xi.cosh().powi(2)
}

/// Finite-difference residual of the KdV equation on the two-soliton at
/// `(x, t)` with step `h` (second-order stencils in both variables).
pub fn kdv_fd_residual(
    p: &SolitonParams,
    a: f64,
    b: f64,
    x: f64,
    t: f64,
    h: f64,
    convection: Convection,
) -> Result<f64> {
    let u = |dx: f64, dt: f64| kdv_two_soliton(p, a, b, x + dx, t + dt);
    let u0 = u(0.0, 0.0)?;
    let (um1, up1) = (u(-h, 0.0)?, u(h, 0.0)?);
    let (um2, up2) = (u(-2.0 * h, 0.0)?, u(2.0 * h, 0.0)?);
    let ut = (u(0.0, h)? - u(0.0, -h)?) / (2.0 * h);
    let ux = (up1 - um1) / (2.0 * h);
    let uxx = (up1 - 2.0 * u0 + um1) / (h * h);
    let uxxx = (up2 - 2.0 * up1 + 2.0 * um1 - um2) / (2.0 * h * h * h);
    let conv = match convection {
        Convection::UUx => u0 * ux,
        Convection::UUxx => u0 * uxx,
    };
    Ok(ut + a * conv + b * uxxx)
}

/// Complex sinh-Gordon soliton with internal phase `ω`.
pub fn shg_complex_soliton(p: &SolitonParams, x: f64, t: f64) -> Result<Complex64> {
    if p.beta == 0.0 {
        return Err(Error::InvalidParameter("beta must be nonzero".into()));
    }
    let arg = p.mu * (t * p.theta.sinh() + x * p.theta.cosh());
    // Work with E = e^arg through its inverse when arg > 0; the formula is
    // invariant under E -> 1/E up to the sign of the arctan term.
    let (e, flip) = if arg > 0.0 { ((-arg).exp(), -1.0) } else { (arg.exp(), 1.0) };
    let (co, si) = (p.omega.cos(), p.omega.sin());
    let num = 1.0 - 2.0 * co * e + e * e;
    let den = 1.0 + 2.0 * co * e + e * e;
    let at_den = e * e - 1.0;
    if num.abs() < 1e-14 || den.abs() < 1e-14 || at_den.abs() < 1e-14 {
        return Err(Error::BranchPoint { x, t });
    }
    // num = (e − cos ω)² + sin²ω, so the log argument is never negative.
    let re = (num / den).ln() / p.beta;
    let im = flip * 2.0 / p.beta * (2.0 * si * e / at_den).atan();
    Ok(Complex64::new(re, im))
}

/// Sine-Gordon (anti)kink `(4/γ) arctan(ε exp(m cosh θ (x + t tanh θ)))`.
pub fn sg_kink(p: &SolitonParams, x: f64, t: f64) -> f64 {
    let z = p.mass * p.theta.cosh() * (x + t * p.theta.tanh());
    4.0 / p.gamma * (p.eps_kink as f64 * z.exp()).atan()
}

/// Time derivative of [`sg_kink`].
pub fn sg_kink_dt(p: &SolitonParams, x: f64, t: f64) -> f64 {
    let z = p.mass * p.theta.cosh() * (x + t * p.theta.tanh());
    let e = p.eps_kink as f64 * z.exp();
    4.0 / p.gamma * e / (1.0 + e * e) * p.mass * p.theta.sinh()
}

/// Static kink between two adjacent vacua, obtained by integrating the
/// first-order equation `Φ' = √2 W(Φ) sgn` outward from the midpoint value.
///
/// The profile is stored on accepted step nodes and evaluated with cubic
/// Hermite interpolation using the exact slope.
#[derive(Debug, Clone)]
pub struct StaticKink {
    spec: PotentialSpec,
    sign: f64,
    xs: Vec<f64>,
    phis: Vec<f64>,
    pub from_vac: f64,
    pub to_vac: f64,
}

const KINK_MAX_STEP: f64 = 0.02;

impl StaticKink {
    /// Builds the profile on `[-half_width, half_width]` (in units of `x`).
    pub fn new(spec: &PotentialSpec, from: &VacuumInfo, to: &VacuumInfo, half_width: f64) -> Result<Self> {
        if from.phi == to.phi {
            return Err(Error::InvalidParameter("kink needs two distinct vacua".into()));
        }
        let (lo, hi) = (from.phi.min(to.phi), from.phi.max(to.phi));
        let mid = 0.5 * (from.phi + to.phi);
        // Adjacency: W keeps one sign strictly between the vacua.
        let w_mid = spec.root_jet(mid)?[0];
        let mut sign_w = w_mid.signum();
        for k in 1..64 {
            let phi = lo + (hi - lo) * k as f64 / 64.0;
            let w = spec.root_jet(phi)?[0];
            if w * sign_w <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "vacua {} and {} are not adjacent",
                    from.phi, to.phi
                )));
            }
        }
        // Φ increases with x when to > from.
        let dir = (to.phi - from.phi).signum();
        sign_w *= dir;
        let rhs = |phi: f64| -> Result<f64> { Ok(SQRT_2 * spec.root_jet(phi)?[0] * sign_w) };

        let right = integrate_outward(&rhs, mid, half_width)?;
        let left = integrate_outward(&|p: f64| rhs(p).map(|v| -v), mid, half_width)?;
        let mut xs = Vec::with_capacity(left.0.len() + right.0.len());
        let mut phis = Vec::with_capacity(xs.capacity());
        for (x, p) in left.0.iter().zip(&left.1).rev() {
            xs.push(-x);
            phis.push(*p);
        }
        for (x, p) in right.0.iter().zip(&right.1).skip(1) {
            xs.push(*x);
            phis.push(*p);
        }
        for w in phis.windows(2) {
            if (w[1] - w[0]) * dir < -1e-13 {
                return Err(Error::NonMonotonic(w[0]));
            }
        }
        Ok(StaticKink {
            spec: *spec,
            sign: sign_w,
            xs,
            phis,
            from_vac: from.phi,
            to_vac: to.phi,
        })
    }

    pub fn half_width(&self) -> f64 {
        *self.xs.last().expect("nonempty")
    }

    fn slope(&self, phi: f64) -> f64 {
        SQRT_2 * self.spec.root_jet(phi).map(|j| j[0]).unwrap_or(0.0) * self.sign
    }

    /// Profile value at `x`; outside the tabulated range the vacuum values.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return if x < self.xs[0] { self.from_vac } else { self.phis[0] };
        }
        if x >= self.xs[n - 1] {
            return if x > self.xs[n - 1] { self.to_vac } else { self.phis[n - 1] };
        }
        let j = self.xs.partition_point(|&xi| xi <= x) - 1;
        let (x0, x1) = (self.xs[j], self.xs[j + 1]);
        let (p0, p1) = (self.phis[j], self.phis[j + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (m0, m1) = (self.slope(p0) * h, self.slope(p1) * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * p0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * p1 + (s3 - s2) * m1
    }

    /// `Φ'(x)` from the first-order equation.
    pub fn eval_dx(&self, x: f64) -> f64 {
        self.slope(self.eval(x))
    }

    /// Largest distance of the tabulated endpoints from their vacua.
    pub fn tail_residual(&self) -> f64 {
        let n = self.phis.len();
        (self.phis[0] - self.from_vac).abs().max((self.phis[n - 1] - self.to_vac).abs())
    }
}

/// Dormand–Prince 5(4) from `x = 0` to `x = x_end` for `Φ' = f(Φ)`.
fn integrate_outward(f: &dyn Fn(f64) -> Result<f64>, phi0: f64, x_end: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let tol = 1e-13;
    let mut xs = vec![0.0];
    let mut ps = vec![phi0];
    let (mut x, mut y) = (0.0, phi0);
    let mut h = KINK_MAX_STEP;
    let mut k = [0.0; 7];
    k[0] = f(y)?;
    while x < x_end {
        let h_eff = h.min(x_end - x);
        for s in 1..7 {
            let mut acc = y;
            for (j, a) in A[s - 1].iter().enumerate().take(s) {
                acc += h_eff * a * k[j];
            }
            k[s] = f(acc)?;
        }
        let mut y_new = y;
        for (j, a) in A[5].iter().enumerate() {
            y_new += h_eff * a * k[j];
        }
        let err: f64 = h_eff * E.iter().zip(&k).map(|(e, kk)| e * kk).sum::<f64>();
        let scale = tol * (1.0 + y.abs());
        if err.abs() <= scale {
            x += h_eff;
            y = y_new;
            xs.push(x);
            ps.push(y);
            k[0] = k[6];
        }
        let fac = if err == 0.0 { 2.0 } else { 0.9 * (scale / err.abs()).powf(0.2) };
        h = (h_eff * fac.clamp(0.2, 2.0)).min(KINK_MAX_STEP);
        if h < 1e-12 {
            return Err(Error::InvalidParameter("kink integration step underflow".into()));
        }
    }
    Ok((xs, ps))
}

/// Static kink sampled on `grid`, centred at `x = 0`.
pub fn bazeia_static_kink(
    spec: &PotentialSpec,
    from_vac: &VacuumInfo,
    to_vac: &VacuumInfo,
    grid: &Grid1D,
) -> Result<FieldState> {
    let reach = grid.x_min.abs().max(grid.x_max.abs());
    let kink = StaticKink::new(spec, from_vac, to_vac, reach)?;
    let (l, r) = (kink.eval(grid.x_min), kink.eval(grid.x_max));
    let residual = (l - from_vac.phi).abs().max((r - to_vac.phi).abs());
    if residual > 1e-8 {
        let x = if (l - from_vac.phi).abs() > (r - to_vac.phi).abs() { grid.x_min } else { grid.x_max };
        return Err(Error::TailNotReached { x, residual });
    }
    let phi = grid.xs().map(|x| Complex64::new(kink.eval(x), 0.0)).collect();
    FieldState::new(*grid, 0.0, phi, vec![Complex64::new(0.0, 0.0); grid.n_points])
}

/// Arrangement of the two solitons in [`boosted_pair`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMode {
    /// Outer vacuum on both sides, the neighbouring vacuum in between.
    KinkAntikink,
    /// Outer vacuum on the left, its mirror image on the right.
    KinkKink,
}

/// Two Lorentz-boosted static kinks at `∓x0` moving with `±v` toward the
/// origin. `outer` and `inner` are adjacent vacua; the left soliton goes from
/// `outer` to `inner`.
pub fn boosted_pair(
    spec: &PotentialSpec,
    outer: &VacuumInfo,
    inner: &VacuumInfo,
    v: f64,
    x0: f64,
    mode: PairMode,
    grid: &Grid1D,
) -> Result<FieldState> {
    if !(v.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!("|v| must be < 1, got {v}")));
    }
    if !(x0 > 0.0) {
        return Err(Error::InvalidParameter(format!("x0 must be positive, got {x0}")));
    }
    let (po, pi) = (outer.phi, inner.phi);
    if mode == PairMode::KinkKink {
        for k in 1..16 {
            let d = (pi - po) * k as f64 / 16.0;
            let a: f64 = spec.eval_v(pi - d)?;
            let b: f64 = spec.eval_v(pi + d)?;
            if (a - b).abs() > 1e-10 * a.abs().max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "potential is not symmetric about {pi}; kink-kink pair unavailable"
                )));
            }
        }
    }
    let lorentz = 1.0 / (1.0 - v * v).sqrt();
    let reach = lorentz * (grid.x_max - grid.x_min + 2.0 * x0);
    let kink = StaticKink::new(spec, outer, inner, reach)?;
    // Left soliton: K(γ(x + x0)) moving right; right soliton mirrored.
    let left = |x: f64| kink.eval(lorentz * (x + x0));
    let left_t = |x: f64| -kink.eval_dx(lorentz * (x + x0)) * lorentz * v;
    type Profile<'a> = Box<dyn Fn(f64) -> f64 + 'a>;
    let (right, right_t): (Profile, Profile) = match mode {
        PairMode::KinkAntikink => (
            Box::new(|x: f64| kink.eval(-lorentz * (x - x0))),
            Box::new(|x: f64| -kink.eval_dx(-lorentz * (x - x0)) * lorentz * v),
        ),
        PairMode::KinkKink => (
            Box::new(|x: f64| 2.0 * pi - kink.eval(-lorentz * (x - x0))),
            Box::new(|x: f64| kink.eval_dx(-lorentz * (x - x0)) * lorentz * v),
        ),
    };
    let mut overlap: f64 = 0.0;
    let mut phi = Vec::with_capacity(grid.n_points);
    let mut pi_v = Vec::with_capacity(grid.n_points);
    for x in grid.xs() {
        let (l, r) = (left(x), right(x));
        overlap = overlap.max((l - pi).abs() * (r - pi).abs());
        phi.push(Complex64::new(l + r - pi, 0.0));
        pi_v.push(Complex64::new(left_t(x) + right_t(x), 0.0));
    }
    if overlap > 1e-6 {
        return Err(Error::OverlapTooLarge(overlap));
    }
    FieldState::new(*grid, 0.0, phi, pi_v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kdv_origin_value() {
        let p = SolitonParams::default();
        let u = kdv_two_soliton(&p, -6.0, 1.0, 0.0, 0.0).unwrap();
        assert!((u + 1.0).abs() < 1e-14, "{u}");
        assert!((3.0 * (p.c1 - p.c2) / -6.0 - u).abs() < 1e-14);
    }

    #[test]
    fn kdv_degenerate() {
        let p = SolitonParams { c1: 2.0, c2: 2.0, ..Default::default() };
        assert!(matches!(kdv_two_soliton(&p, -6.0, 1.0, 0.0, 0.0), Err(Error::DegenerateSpeeds(_))));
    }

    #[test]
    fn kdv_one_soliton_limit() {
        let p = SolitonParams { c1: 4.0, c2: 1e-10, ..Default::default() };
        for &x in &[-3.0, -0.5, 0.0, 0.7, 2.0] {
            let two = kdv_two_soliton(&p, -6.0, 1.0, x, 0.3).unwrap();
            let one = kdv_one_soliton(4.0, -6.0, 1.0, x, 0.3);
            assert!((two - one).abs() < 1e-4, "{x}: {two} {one}");
        }
    }

    #[test]
    fn kdv_far_field_is_finite() {
        let p = SolitonParams::default();
        let u = kdv_two_soliton(&p, -6.0, 1.0, 800.0, -300.0).unwrap();
        assert!(u.is_finite() && u.abs() < 1e-100);
    }

    #[test]
    fn shg_zero_phase_is_real() {
        let p = SolitonParams { omega: 0.0, theta: 0.4, ..Default::default() };
        for &(x, t) in &[(1.0, 0.5), (-2.0, 0.1), (0.3, -1.0)] {
            assert_eq!(shg_complex_soliton(&p, x, t).unwrap().im, 0.0);
        }
    }

    #[test]
    fn shg_branch_point() {
        let p = SolitonParams { omega: 1.0, ..Default::default() };
        assert!(matches!(shg_complex_soliton(&p, 0.0, 0.0), Err(Error::BranchPoint { .. })));
    }

    #[test]
    fn sg_kink_values() {
        let p = SolitonParams::default();
        assert!((sg_kink(&p, 0.0, 0.0) - PI).abs() < 1e-15);
        assert!((sg_kink(&p, 60.0, 0.0) - 2.0 * PI).abs() < 1e-15);
        assert!(sg_kink(&p, -60.0, 0.0).abs() < 1e-20);
    }

    #[test]
    fn sg_kink_antikink_identity() {
        let k = SolitonParams { theta: 0.3, ..Default::default() };
        let ak = SolitonParams { eps_kink: -1, ..k };
        for i in 0..20 {
            let (x, t) = (-3.0 + 0.3 * i as f64, 0.7 - 0.11 * i as f64);
            assert!((sg_kink(&k, x, t) + sg_kink(&ak, x, t)).abs() < 1e-14);
            let s = sg_kink(&k, x, t) + sg_kink(&k, -x, -t);
            assert!((s - 2.0 * PI).abs() < 1e-12, "{s}");
        }
    }

    #[test]
    fn static_kink_matches_sine_gordon() {
        let spec = PotentialSpec::bazeia(2, 1.0, 0.25).unwrap();
        let vac = spec.vacua(-0.5, 3.5).unwrap();
        let grid = Grid1D::new(-30.0, 30.0, 601).unwrap();
        let st = bazeia_static_kink(&spec, &vac[0], &vac[1], &grid).unwrap();
        let p = SolitonParams { mass: 1.0, gamma: 2.0, ..Default::default() };
        for (i, x) in grid.xs().enumerate() {
            assert!((st.phi[i].re - sg_kink(&p, x, 0.0)).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn narrow_grid_fails() {
        let spec = PotentialSpec::bazeia(4, 1.0, 0.25).unwrap();
        let vac = spec.vacua(-0.5, 3.5).unwrap();
        let grid = Grid1D::new(-3.0, 3.0, 61).unwrap();
        assert!(matches!(
            bazeia_static_kink(&spec, &vac[0], &vac[1], &grid),
            Err(Error::TailNotReached { .. })
        ));
    }

    #[test]
    fn non_adjacent_vacua_rejected() {
        let spec = PotentialSpec::bazeia(2, 1.0, 0.25).unwrap();
        let vac = spec.vacua(-0.5, 6.5).unwrap();
        assert!(StaticKink::new(&spec, &vac[0], &vac[2], 10.0).is_err());
    }

    #[test]
    fn pair_at_rest_has_no_momentum() {
        let spec = PotentialSpec::bazeia(2, 1.0, 0.25).unwrap();
        let vac = spec.vacua(-0.5, 3.5).unwrap();
        let grid = Grid1D::new(-40.0, 40.0, 801).unwrap();
        let st = boosted_pair(&spec, &vac[0], &vac[1], 0.0, 15.0, PairMode::KinkAntikink, &grid).unwrap();
        assert!(st.pi.iter().all(|p| p.norm() == 0.0));
    }

    #[test]
    fn overlapping_pair_rejected() {
        let spec = PotentialSpec::bazeia(2, 1.0, 0.25).unwrap();
        let vac = spec.vacua(-0.5, 3.5).unwrap();
        let grid = Grid1D::new(-40.0, 40.0, 801).unwrap();
        assert!(matches!(
            boosted_pair(&spec, &vac[0], &vac[1], 0.5, 1.0, PairMode::KinkAntikink, &grid),
            Err(Error::OverlapTooLarge(_))
        ));
    }
}
