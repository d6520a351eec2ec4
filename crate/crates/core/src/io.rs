//! CSV formats shared by the command-line tool and the plotting scripts.
//!
//! All floats are written with `{:.16e}` (17 significant digits), which
//! round-trips `f64` exactly.

use crate::error::{Error, Result};
use crate::evolve::{FieldState, Grid1D, Trajectory};
use crate::potentials::PotentialSpec;
use crate::scattering::{SpectralCurve, SpectralSample};
use num_complex::Complex64;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const FIELD_HEADER: &str = "x,re_phi,im_phi,re_pi,im_pi";
pub const INDEX_HEADER: &str = "step,t,filename,energy";
pub const CURVE_HEADER: &str = "lambda,re_a,im_a,re_b,im_b,abs_a,abs_b";
pub const LOOP_HEADER: &str = "lambda,L,tau,re_tr_W,im_tr_W,dev_from_identity,det_err";

fn parse_err(file: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        file: file.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn parse_f64(file: &Path, line: usize, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| parse_err(file, line, format!("bad number {s:?}: {e}")))
}

/// FieldState as CSV text.
pub fn field_state_csv(state: &FieldState, spec: &PotentialSpec) -> String {
    let mut s = String::with_capacity(state.grid.n_points * 96);
    let _ = writeln!(s, "# t={:.16e}", state.t);
    let _ = writeln!(s, "# potential={spec}");
    s.push_str(FIELD_HEADER);
    s.push('\n');
    for i in 0..state.grid.n_points {
        let (p, q) = (state.phi[i], state.pi[i]);
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            state.grid.x(i),
            p.re,
            p.im,
            q.re,
            q.im
        );
    }
    s
}

pub fn write_field_state(path: &Path, state: &FieldState, spec: &PotentialSpec) -> Result<()> {
    fs::write(path, field_state_csv(state, spec))?;
    Ok(())
}

/// Reads a FieldState CSV; returns the state and the potential line, if any.
pub fn read_field_state(path: &Path) -> Result<(FieldState, Option<PotentialSpec>)> {
    let text = fs::read_to_string(path)?;
    let mut t = None;
    let mut spec = None;
    let mut header_seen = false;
    let mut xs = Vec::new();
    let mut phi = Vec::new();
    let mut pi = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("t=") {
                t = Some(parse_f64(path, ln, v)?);
            } else if let Some(v) = rest.strip_prefix("potential=") {
                spec = Some(v.trim().parse::<PotentialSpec>().map_err(|e| parse_err(path, ln, e.to_string()))?);
            }
            continue;
        }
        if !header_seen {
            if line != FIELD_HEADER {
                return Err(parse_err(path, ln, format!("expected header {FIELD_HEADER:?}")));
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(parse_err(path, ln, format!("expected 5 columns, got {}", cols.len())));
        }
        let v: Vec<f64> = cols.iter().map(|c| parse_f64(path, ln, c)).collect::<Result<_>>()?;
        xs.push(v[0]);
        phi.push(Complex64::new(v[1], v[2]));
        pi.push(Complex64::new(v[3], v[4]));
    }
    if !header_seen || xs.len() < 2 {
        return Err(parse_err(path, 0, "no data rows"));
    }
    let grid = Grid1D::new(xs[0], *xs.last().expect("nonempty"), xs.len())?;
    let t = t.ok_or_else(|| parse_err(path, 0, "missing '# t=' line"))?;
    Ok((FieldState::new(grid, t, phi, pi)?, spec))
}

/// Snapshot file name for a step number.
pub fn snapshot_name(step: usize) -> String {
    format!("snap_{step:07}.csv")
}

/// Writes one CSV per snapshot and `index.csv`. Returns the files written,
/// relative to `dir`.
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let every = (traj.dt_snapshot / traj.dt).round() as usize;
    let mut index = String::new();
    index.push_str(INDEX_HEADER);
    index.push('\n');
    let mut files = Vec::new();
    for (k, st) in traj.states.iter().enumerate() {
        let step = k * every;
        let name = snapshot_name(step);
        write_field_state(&dir.join(&name), st, &traj.spec)?;
        let _ = writeln!(index, "{step},{:.16e},{name},{:.16e}", st.t, traj.energies[k]);
        files.push(name);
    }
    fs::write(dir.join("index.csv"), index)?;
    files.push("index.csv".into());
    Ok(files)
}

/// Reads a trajectory directory written by [`write_trajectory`].
pub fn read_trajectory(dir: &Path) -> Result<Trajectory> {
    let path = dir.join("index.csv");
    let text = fs::read_to_string(&path)?;
    let mut rows: Vec<(usize, f64, String, f64)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if ln == 1 || line == INDEX_HEADER {
            if line != INDEX_HEADER {
                return Err(parse_err(&path, ln, format!("expected header {INDEX_HEADER:?}")));
            }
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(parse_err(&path, ln, "expected 4 columns"));
        }
        let step = cols[0]
            .trim()
            .parse::<usize>()
            .map_err(|e| parse_err(&path, ln, format!("bad step: {e}")))?;
        rows.push((step, parse_f64(&path, ln, cols[1])?, cols[2].trim().to_string(), parse_f64(&path, ln, cols[3])?));
    }
    if rows.is_empty() {
        return Err(parse_err(&path, 0, "empty index"));
    }
    let mut states = Vec::with_capacity(rows.len());
    let mut spec = None;
    for (_, _, name, _) in &rows {
        let (st, sp) = read_field_state(&dir.join(name))?;
        if spec.is_none() {
            spec = sp;
        }
        states.push(st);
    }
    let spec = spec.ok_or_else(|| parse_err(&path, 0, "snapshots carry no '# potential=' line"))?;
    let (dt_snapshot, dt) = if rows.len() > 1 {
        let ds = rows[1].1 - rows[0].1;
        let steps = (rows[1].0 - rows[0].0).max(1) as f64;
        (ds, ds / steps)
    } else {
        (1.0, 1.0)
    };
    Ok(Trajectory {
        spec,
        states,
        dt_snapshot,
        dt,
        energies: rows.iter().map(|r| r.3).collect(),
    })
}

/// SpectralCurve as CSV text; `label` fills the `# n=` line.
pub fn spectral_curve_csv(curve: &SpectralCurve, label: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# t={:.16e}", curve.t);
    let _ = writeln!(s, "# n={label}");
    let _ = writeln!(s, "# excluded=[{},{}]", curve.excluded.0, curve.excluded.1);
    s.push_str(CURVE_HEADER);
    s.push('\n');
    for p in &curve.samples {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.lambda,
            p.a.re,
            p.a.im,
            p.b.re,
            p.b.im,
            p.a.norm(),
            p.b.norm()
        );
    }
    s
}

pub fn write_spectral_curve(path: &Path, curve: &SpectralCurve, label: &str) -> Result<()> {
    fs::write(path, spectral_curve_csv(curve, label))?;
    Ok(())
}

pub fn read_spectral_curve(path: &Path) -> Result<SpectralCurve> {
    let text = fs::read_to_string(path)?;
    let mut t = None;
    let mut excluded = (1.0, 1.0);
    let mut header = false;
    let mut samples = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("t=") {
                t = Some(parse_f64(path, ln, v)?);
            } else if let Some(v) = rest.strip_prefix("excluded=") {
                let v = v.trim().trim_start_matches('[').trim_end_matches(']');
                let parts: Vec<&str> = v.split(',').collect();
                if parts.len() == 2 {
                    excluded = (parse_f64(path, ln, parts[0])?, parse_f64(path, ln, parts[1])?);
                }
            }
            continue;
        }
        if !header {
            if line != CURVE_HEADER {
                return Err(parse_err(path, ln, format!("expected header {CURVE_HEADER:?}")));
            }
            header = true;
            continue;
        }
        let v: Vec<f64> = line.split(',').map(|c| parse_f64(path, ln, c)).collect::<Result<_>>()?;
        if v.len() != 7 {
            return Err(parse_err(path, ln, "expected 7 columns"));
        }
        samples.push(SpectralSample {
            lambda: v[0],
            a: Complex64::new(v[1], v[2]),
            b: Complex64::new(v[3], v[4]),
        });
    }
    Ok(SpectralCurve {
        t: t.ok_or_else(|| parse_err(path, 0, "missing '# t=' line"))?,
        samples,
        excluded,
        failures: Vec::new(),
    })
}

/// One row of a Wilson-loop scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopRow {
    pub lambda: f64,
    pub l: f64,
    pub tau: f64,
    pub trace: Complex64,
    pub dev_from_identity: f64,
    pub det_err: f64,
}

impl LoopRow {
    pub fn csv(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.lambda, self.l, self.tau, self.trace.re, self.trace.im, self.dev_from_identity, self.det_err
        )
    }
}
