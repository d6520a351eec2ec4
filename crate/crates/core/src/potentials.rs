//! Interaction potentials, their derivatives and vacua.
//!
//! Every Klein–Gordon type potential here is non-negative and can be written
//! as the square of an analytic function, `V = W²`. All closed forms are
//! evaluated through this signed root `W` and its first two derivatives:
//!
//! ```text
//! V   = W²
//! V'  = 2 W W'
//! V'' = 2 (W'² + W W'')
//! V'/√V = 2 W'
//! ```
//!
//! The last line is what the Lax connections need. Written this way it is
//! finite at every vacuum, and smooth when the field crosses one, which the
//! principal square root is not.
//!
//! For the Bazeia family, with `u = Bφ/2`, `s = sin u`, `c = cos u` and
//! `P = (32/n²)(4M)²/(2B)²`,
//!
//! ```text
//! V = P tan²u (1 − sⁿ)²,     W = √P · c · f(s)
//! f(s) = s (1 + s² + … + s^(n−2))               n even
//! f(s) = (s + s² + … + sⁿ) / (1 + s)            n odd
//! ```
//!
//! The rewriting removes the removable `tan` poles at `u = π/2 + kπ` exactly, so
//! there is no cancellation next to the vacuum at `φ = π/B`. For odd `n` the
//! pole at `s = −1` is genuine and reported as [`Error::NonFinite`].
//!
//! For `n = 2` the Bazeia potential is sine-Gordon with `m = 4M` and `γ = 2B`:
//! `V = 4M²/B² (1 − cos 2Bφ)`.

use crate::error::{Error, Result};
use crate::field::FieldValue;
use num_complex::Complex64;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;

/// Which model, with its couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    /// `V = (m²/γ²)(1 − cos γφ)`.
    SineGordon { mass: f64, gamma: f64 },
    /// `V = (μ²/β²)(cosh βφ − 1)`.
    SinhGordon { mu: f64, beta: f64 },
    /// Deformed sine-Gordon with deformation `ε = n − 2`.
    Bazeia { n: u32, coupling: f64, mass: f64 },
    /// `u_t + a u u_x + b u_xxx = 0`; carries no Klein–Gordon potential.
    KdV { a: f64, b: f64 },
}

/// Data about one vacuum `Φ₋` of a potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacuumInfo {
    pub phi: f64,
    pub v_at_vacuum: f64,
    pub d2v_at_vacuum: f64,
    /// Limit of `V'/√V` approached from `φ > φ_vac`: `+√(2V'')`.
    pub dv_over_sqrtv_limit: f64,
}

/// Side from which `V'/√V` is approached at a vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproachBranch {
    Above,
    Below,
}

impl VacuumInfo {
    pub fn limit_from(&self, branch: ApproachBranch) -> f64 {
        match branch {
            ApproachBranch::Above => self.dv_over_sqrtv_limit,
            ApproachBranch::Below => -self.dv_over_sqrtv_limit,
        }
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PotentialSpec::SineGordon { mass, gamma } => {
                write!(f, "sine-gordon(m={mass},gamma={gamma})")
            }
            PotentialSpec::SinhGordon { mu, beta } => write!(f, "sinh-gordon(mu={mu},beta={beta})"),
            PotentialSpec::Bazeia { n, coupling, mass } => {
                write!(f, "bazeia(n={n},B={coupling},M={mass})")
            }
            PotentialSpec::KdV { a, b } => write!(f, "kdv(a={a},b={b})"),
        }
    }
}

impl std::str::FromStr for PotentialSpec {
    type Err = Error;

    /// Parses the `Display` form, e.g. `bazeia(n=3,B=1,M=0.25)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse potential {s:?}"));
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let name = &s[..open];
        let body = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let mut kv = std::collections::HashMap::new();
        for part in body.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            kv.insert(k.trim(), v.trim());
        }
        let num = |k: &str| -> Result<f64> { kv.get(k).ok_or_else(bad)?.parse::<f64>().map_err(|_| bad()) };
        match name {
            "sine-gordon" => PotentialSpec::sine_gordon(num("m")?, num("gamma")?),
            "sinh-gordon" => PotentialSpec::sinh_gordon(num("mu")?, num("beta")?),
            "bazeia" => {
                let n = kv.get("n").ok_or_else(bad)?.parse::<u32>().map_err(|_| bad())?;
                PotentialSpec::bazeia(n, num("B")?, num("M")?)
            }
            "kdv" => PotentialSpec::kdv(num("a")?, num("b")?),
            _ => Err(bad()),
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
    }
}

impl PotentialSpec {
    pub fn sine_gordon(mass: f64, gamma: f64) -> Result<Self> {
        positive("m", mass)?;
        positive("gamma", gamma)?;
        Ok(PotentialSpec::SineGordon { mass, gamma })
    }

    pub fn sinh_gordon(mu: f64, beta: f64) -> Result<Self> {
        positive("mu", mu)?;
        positive("beta", beta)?;
        Ok(PotentialSpec::SinhGordon { mu, beta })
    }

    /// Builds a Bazeia potential. For `n = 2` the result is checked once
    /// against its sine-Gordon equivalent.
    pub fn bazeia(n: u32, coupling: f64, mass: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
        }
        positive("B", coupling)?;
        positive("M", mass)?;
        let spec = PotentialSpec::Bazeia { n, coupling, mass };
        if n == 2 {
            let sg = spec.sine_gordon_equivalent().expect("n = 2");
            let period = PI / coupling;
            for k in 0..17 {
                let phi = -0.37 * period + period * k as f64 / 16.0;
                let vb: f64 = spec.eval_v(phi)?;
                let vs: f64 = sg.eval_v(phi)?;
                if (vb - vs).abs() > 1e-12 * vs.abs().max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "n = 2 reduction failed at phi = {phi}: {vb} vs {vs}"
                    )));
                }
            }
        }
        Ok(spec)
    }

    pub fn kdv(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a != 0.0) {
            return Err(Error::InvalidParameter(format!("KdV a must be nonzero, got {a}")));
        }
        positive("KdV b", b)?;
        Ok(PotentialSpec::KdV { a, b })
    }

    pub fn model_name(&self) -> &'static str {
        match self {
            PotentialSpec::SineGordon { .. } => "sine-gordon",
            PotentialSpec::SinhGordon { .. } => "sinh-gordon",
            PotentialSpec::Bazeia { .. } => "bazeia",
            PotentialSpec::KdV { .. } => "kdv",
        }
    }

    pub fn is_klein_gordon(&self) -> bool {
        !matches!(self, PotentialSpec::KdV { .. })
    }

    /// Deformation parameter `ε = n − 2` (zero for the undeformed models).
    pub fn deformation(&self) -> f64 {
        match *self {
            PotentialSpec::Bazeia { n, .. } => n as f64 - 2.0,
            _ => 0.0,
        }
    }

    /// The sine-Gordon potential a Bazeia `n = 2` spec coincides with.
    pub fn sine_gordon_equivalent(&self) -> Option<PotentialSpec> {
        match *self {
            PotentialSpec::Bazeia { n: 2, coupling, mass } => Some(PotentialSpec::SineGordon {
                mass: 4.0 * mass,
                gamma: 2.0 * coupling,
            }),
            PotentialSpec::SineGordon { .. } => Some(*self),
            _ => None,
        }
    }

    /// Coupling `B` of the Lax connection. For sine-Gordon it is `γ/2`; for
    /// sinh-Gordon the connection needs the imaginary coupling `iβ/2`.
    pub fn lax_coupling(&self) -> Result<Complex64> {
        match *self {
            PotentialSpec::Bazeia { coupling, .. } => Ok(Complex64::new(coupling, 0.0)),
            PotentialSpec::SineGordon { gamma, .. } => Ok(Complex64::new(0.5 * gamma, 0.0)),
            PotentialSpec::SinhGordon { beta, .. } => Ok(Complex64::new(0.0, 0.5 * beta)),
            PotentialSpec::KdV { .. } => Err(Error::Unsupported {
                op: "lax connection",
                model: "kdv",
            }),
        }
    }

    /// Mass scale `M` entering the spectral evolution rates.
    pub fn mass_scale(&self) -> Result<f64> {
        match *self {
            PotentialSpec::Bazeia { mass, .. } => Ok(mass),
            PotentialSpec::SineGordon { mass, .. } => Ok(0.25 * mass),
            PotentialSpec::SinhGordon { mu, .. } => Ok(0.25 * mu),
            PotentialSpec::KdV { .. } => Err(Error::Unsupported {
                op: "mass scale",
                model: "kdv",
            }),
        }
    }

    /// Distance between adjacent vacua, for models with degenerate vacua.
    pub fn vacuum_spacing(&self) -> Option<f64> {
        match *self {
            PotentialSpec::SineGordon { gamma, .. } => Some(2.0 * PI / gamma),
            PotentialSpec::Bazeia { coupling, .. } => Some(PI / coupling),
            _ => None,
        }
    }

    fn non_finite<T: FieldValue>(&self, what: &'static str, phi: T) -> Error {
        Error::NonFinite {
            what,
            phi: phi.to_string(),
            spec: self.to_string(),
        }
    }

    /// Signed root `W` and its derivatives `[W, W', W'']` at `phi`.
    pub fn root_jet<T: FieldValue>(&self, phi: T) -> Result<[T; 3]> {
        let jet = match *self {
            PotentialSpec::SineGordon { mass, gamma } => {
                let h = phi * (0.5 * gamma);
                let (s, c) = (h.sin(), h.cos());
                [
                    s * (SQRT_2 * mass / gamma),
                    c * (mass / SQRT_2),
                    s * (-mass * gamma / (2.0 * SQRT_2)),
                ]
            }
            PotentialSpec::SinhGordon { mu, beta } => {
                let h = phi * (0.5 * beta);
                let (s, c) = (h.sinh(), h.cosh());
                [
                    s * (SQRT_2 * mu / beta),
                    c * (mu / SQRT_2),
                    s * (mu * beta / (2.0 * SQRT_2)),
                ]
            }
            PotentialSpec::Bazeia { n, coupling, mass } => bazeia_jet(n, coupling, mass, phi),
            PotentialSpec::KdV { .. } => {
                return Err(Error::Unsupported {
                    op: "potential",
                    model: "kdv",
                })
            }
        };
        if jet.iter().all(|v| v.is_finite()) {
            Ok(jet)
        } else {
            Err(self.non_finite("sqrt(V)", phi))
        }
    }

    pub fn eval_v<T: FieldValue>(&self, phi: T) -> Result<T> {
        let [w, _, _] = self.root_jet(phi)?;
        Ok(w * w)
    }

    pub fn eval_dv<T: FieldValue>(&self, phi: T) -> Result<T> {
        let [w, w1, _] = self.root_jet(phi)?;
        Ok(w * w1 * 2.0)
    }

    pub fn eval_d2v<T: FieldValue>(&self, phi: T) -> Result<T> {
        let [w, w1, w2] = self.root_jet(phi)?;
        Ok((w1 * w1 + w * w2) * 2.0)
    }

    /// `V'/√V` on the analytic branch, `2W'`.
    pub fn dv_over_sqrt_v<T: FieldValue>(&self, phi: T) -> Result<T> {
        let [_, w1, _] = self.root_jet(phi)?;
        Ok(w1 * 2.0)
    }

    /// Second factor of the curvature anomaly,
    /// `4B²√V + 2V''/√V − V'²/V^{3/2}`, evaluated as `4(W'' + B²W)`.
    pub fn anomaly_bracket<T: FieldValue>(&self, phi: T) -> Result<T> {
        let b2 = self.lax_coupling()?.powi(2).re;
        let [w, _, w2] = self.root_jet(phi)?;
        Ok((w2 + w * b2) * 4.0)
    }

    /// Newton polish of a zero of `W` starting at `phi0`.
    fn polish_root(&self, phi0: f64) -> Option<f64> {
        let mut phi = phi0;
        for _ in 0..60 {
            let [w, w1, _] = self.root_jet(phi).ok()?;
            if w1 == 0.0 {
                return None;
            }
            let step = w / w1;
            phi -= step;
            if step.abs() <= 1e-15 * phi.abs().max(1.0) {
                break;
            }
        }
        let [w, _, _] = self.root_jet(phi).ok()?;
        (w.abs() < 1e-10).then_some(phi)
    }

    fn vacuum_info(&self, phi: f64) -> Result<Option<VacuumInfo>> {
        let v: f64 = self.eval_v(phi)?;
        let d2v: f64 = self.eval_d2v(phi)?;
        if d2v <= 0.0 || v > 1e-12 {
            return Ok(None);
        }
        Ok(Some(VacuumInfo {
            phi,
            v_at_vacuum: v,
            d2v_at_vacuum: d2v,
            dv_over_sqrtv_limit: (2.0 * d2v).sqrt(),
        }))
    }

    /// All minima with `V = 0` and `V'' > 0` inside `[lo, hi]`, sorted.
    pub fn vacua(&self, lo: f64, hi: f64) -> Result<Vec<VacuumInfo>> {
        if !(lo < hi) {
            return Err(Error::InvalidParameter(format!("empty interval [{lo}, {hi}]")));
        }
        let steps = 20_000;
        let h = (hi - lo) / steps as f64;
        let w_at = |phi: f64| -> Option<f64> { self.root_jet(phi).ok().map(|j| j[0]) };
        let mut found: Vec<VacuumInfo> = Vec::new();
        let push = |phi: f64, found: &mut Vec<VacuumInfo>| -> Result<()> {
            if phi < lo - 1e-12 || phi > hi + 1e-12 {
                return Ok(());
            }
            if found.iter().any(|v| (v.phi - phi).abs() < 1e-9) {
                return Ok(());
            }
            if let Some(info) = self.vacuum_info(phi)? {
                found.push(info);
            }
            Ok(())
        };
        let mut prev = (lo, w_at(lo));
        if prev.1 == Some(0.0) {
            push(lo, &mut found)?;
        }
        for k in 1..=steps {
            let phi = lo + h * k as f64;
            let w = w_at(phi);
            if w == Some(0.0) {
                push(phi, &mut found)?;
            } else if let (Some(wp), Some(wc)) = (prev.1, w) {
                if wp * wc < 0.0 {
                    let mid = 0.5 * (prev.0 + phi);
                    if let Some(root) = self.polish_root(mid) {
                        push(root, &mut found)?;
                    }
                }
            }
            prev = (phi, w);
        }
        if found.is_empty() {
            return Err(Error::NoVacuumFound { lo, hi });
        }
        found.sort_by(|a, b| a.phi.total_cmp(&b.phi));
        Ok(found)
    }

    /// The vacuum whose basin contains `phi0` (Newton on `W`).
    pub fn nearest_vacuum(&self, phi0: f64) -> Result<VacuumInfo> {
        self.polish_root(phi0)
            .and_then(|phi| self.vacuum_info(phi).ok().flatten())
            .ok_or(Error::NoVacuumFound { lo: phi0, hi: phi0 })
    }
}

fn bazeia_jet<T: FieldValue>(n: u32, coupling: f64, mass: f64, phi: T) -> [T; 3] {
    let u = phi * (0.5 * coupling);
    let (s, c) = (u.sin(), u.cos());
    let zero = T::from_real(0.0);
    // Σ s^k over the selected exponents, with first and second derivatives.
    let power_sum = |odd_only: bool, top: u32| {
        let (mut g, mut g1, mut g2) = (zero, zero, zero);
        let mut pm = zero; // s^{k-2}
        let mut p = T::from_real(1.0); // s^{k-1}
        for k in 1..=top {
            let kf = k as f64;
            if !odd_only || k % 2 == 1 {
                g += p * s;
                g1 += p * kf;
                g2 += pm * (kf * (kf - 1.0));
            }
            pm = if k == 1 { T::from_real(1.0) } else { pm * s };
            p = p * s;
        }
        (g, g1, g2)
    };
    let (f, f1, f2) = if n.is_multiple_of(2) {
        // f = Σ_{j<n/2} s^{2j+1}
        power_sum(true, n - 1)
    } else {
        // g = Σ_{k=1}^{n} s^k, f = g / (1 + s)
        let (g, g1, g2) = power_sum(false, n);
        let q = T::from_real(1.0) / (s + T::from_real(1.0));
        let q2 = q * q;
        (
            g * q,
            g1 * q - g * q2,
            g2 * q - g1 * q2 * 2.0 + g * q2 * q * 2.0,
        )
    };
    let sqrt_p = 8.0 * SQRT_2 * mass / (n as f64 * coupling);
    let half_b = 0.5 * coupling;
    let w0 = c * f;
    let w1 = c * c * f1 - s * f;
    let w2 = c * (c * c * f2 - s * f1 * 3.0 - f);
    [
        w0 * sqrt_p,
        w1 * (sqrt_p * half_b),
        w2 * (sqrt_p * half_b * half_b),
    ]
}
