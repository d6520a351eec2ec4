use crate::config::{Config, ConfigError};
use quasint::collision::CollisionSetup;
use quasint::diagnostics::{center_of_mass_frame, pt_report, radiation_level, PtOptions, PtReport};
use quasint::evolve::{energy_kdv, evolve_kg, FieldState, Grid1D, KdvSolver, Trajectory};
use quasint::io::{read_trajectory, write_spectral_curve, write_trajectory, LoopRow, LOOP_HEADER};
use quasint::lax::{loop_deviation, wilson_loop_rect, ContourRect, SpectralParam};
use quasint::potentials::PotentialSpec;
use quasint::scattering::{lambda_grid, spectral_curve};
use quasint::solutions::{bazeia_static_kink, boosted_pair, kdv_two_soliton, PairMode, SolitonParams};
use quasint::Error;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// A failed subcommand and its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub msg: String,
}

impl Failure {
    pub fn validation(msg: impl Into<String>) -> Self {
        Failure { code: 2, msg: msg.into() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::validation(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_runtime_guard() {
            3
        } else {
            match e {
                Error::InvalidParameter(_)
                | Error::Unsupported { .. }
                | Error::NoVacuumFound { .. }
                | Error::DegenerateSpeeds(_)
                | Error::MissingSnapshot(_)
                | Error::Parse { .. } => 2,
                _ => 1,
            }
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, msg: e.to_string() }
    }
}

pub type Outcome = Result<Vec<String>, Failure>;

/// Radiation above this level (and ten times the initial one) is flagged.
const RADIATION_WARN: f64 = 1e-3;

pub fn potential(cfg: &Config) -> Result<PotentialSpec, Failure> {
    let kind = cfg.str_or("potential.kind", "bazeia");
    let spec = match kind {
        "bazeia" => {
            let n = cfg.usize_or("potential.n", 2)?;
            let n = u32::try_from(n).map_err(|_| Failure::validation(format!("potential.n too large: {n}")))?;
            PotentialSpec::bazeia(n, cfg.f64_or("potential.B", 1.0)?, cfg.f64_or("potential.M", 0.3)?)?
        }
        "sine_gordon" => PotentialSpec::sine_gordon(cfg.f64_or("potential.m", 1.0)?, cfg.f64_or("potential.gamma", 1.0)?)?,
        "sinh_gordon" => PotentialSpec::sinh_gordon(cfg.f64_or("potential.mu", 1.0)?, cfg.f64_or("potential.beta", 1.0)?)?,
        "kdv" => PotentialSpec::kdv(cfg.f64_or("potential.a", -6.0)?, cfg.f64_or("potential.b", 1.0)?)?,
        other => return Err(Failure::validation(format!("potential.kind: unknown model {other:?}"))),
    };
    Ok(spec)
}

fn label(spec: &PotentialSpec) -> String {
    match spec {
        PotentialSpec::Bazeia { n, .. } => n.to_string(),
        other => other.model_name().to_string(),
    }
}

fn header(cmd: &str, spec: &PotentialSpec, cfg: &Config) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "[{cmd}]");
    let _ = writeln!(s, "potential = {spec}");
    let _ = writeln!(s, "config_hash = {}", cfg.hash());
    if let Some(seed) = cfg.get("seed") {
        let _ = writeln!(s, "seed = {seed}");
    }
    s
}

fn append(path: &Path, text: &str) -> std::io::Result<()> {
    use std::io::Write;
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(text.as_bytes())
}

/// `(level at start, level at end, warning)`.
fn radiation(traj: &Trajectory, margin: f64) -> Result<(f64, f64, Option<String>), Failure> {
    let r0 = radiation_level(&traj.states[0], &traj.spec, margin)?;
    let r1 = radiation_level(traj.states.last().expect("nonempty"), &traj.spec, margin)?;
    let warn = (r1 > RADIATION_WARN && r1 > 10.0 * r0).then(|| {
        format!(
            "radiation observed: rms distance from the vacuum away from the solitons grew from {r0:.3e} to {r1:.3e}"
        )
    });
    Ok((r0, r1, warn))
}

fn check_time_order(t_start: f64, t_final: f64) -> Result<(), Failure> {
    if !(t_final > t_start) {
        return Err(Failure::validation(format!("t_final ({t_final}) must exceed t_start ({t_start})")));
    }
    Ok(())
}

pub fn evolve(cfg: &Config, out: &Path) -> Outcome {
    let spec = potential(cfg)?;
    if matches!(spec, PotentialSpec::KdV { .. }) {
        return Err(Failure::validation("evolve needs a Klein-Gordon potential; use the kdv subcommand"));
    }
    let d = CollisionSetup::default();
    let grid = Grid1D::symmetric(cfg.positive_or("L", d.half_width)?, cfg.usize_or("n_points", d.n_points)?)?;
    let dt = cfg.positive_or("dt", d.dt)?;
    let every = cfg.usize_or("snapshot_every", d.snapshot_every)?;
    if every == 0 {
        return Err(Failure::validation("snapshot_every must be >= 1"));
    }
    let (t_start, t_final) = (cfg.f64_or("t_start", d.t_start)?, cfg.f64_or("t_final", d.t_end)?);
    check_time_order(t_start, t_final)?;
    let outer = spec.nearest_vacuum(cfg.f64_or("outer", d.outer)?)?;
    let inner = spec.nearest_vacuum(cfg.f64_or("inner", d.inner)?)?;
    let (v, x0) = (cfg.f64_or("v", d.v)?, cfg.positive_or("x0", d.x0)?);
    let mut state = match cfg.str_or("mode", "kink_antikink") {
        "kink_antikink" => boosted_pair(&spec, &outer, &inner, v, x0, PairMode::KinkAntikink, &grid)?,
        "kink_kink" => boosted_pair(&spec, &outer, &inner, v, x0, PairMode::KinkKink, &grid)?,
        "static" => bazeia_static_kink(&spec, &outer, &inner, &grid)?,
        "vacuum" => FieldState::vacuum(grid, outer.phi),
        other => return Err(Failure::validation(format!("mode: unknown value {other:?}"))),
    };
    state.t = t_start;
    let traj = evolve_kg(&state, &spec, t_final, dt, every)?;

    let mut files: Vec<String> = write_trajectory(&out.join("trajectory"), &traj)?
        .into_iter()
        .map(|f| format!("trajectory/{f}"))
        .collect();
    let (r0, r1, warn) = radiation(&traj, cfg.positive_or("radiation_margin", 8.0)?)?;
    let mut rep = header("evolve", &spec, cfg);
    let _ = writeln!(rep, "n_points = {}", grid.n_points);
    let _ = writeln!(rep, "dt = {dt:.16e}");
    let _ = writeln!(rep, "dt_snapshot = {:.16e}", traj.dt_snapshot);
    let _ = writeln!(rep, "snapshots = {}", traj.states.len());
    let _ = writeln!(rep, "energy = {:.16e}", traj.energies[0]);
    let _ = writeln!(rep, "energy_drift = {:.16e}", traj.energy_drift());
    let _ = writeln!(rep, "radiation_start = {r0:.16e}");
    let _ = writeln!(rep, "radiation_end = {r1:.16e}");
    if let Some(w) = &warn {
        let _ = writeln!(rep, "warning = {w}");
        eprintln!("warning: {w}");
    }
    fs::write(out.join("report.txt"), rep)?;
    files.push("report.txt".into());
    Ok(files)
}

fn load(trajectory: &Option<PathBuf>, out: &Path) -> Result<Trajectory, Failure> {
    let dir = trajectory.clone().unwrap_or_else(|| out.join("trajectory"));
    if !dir.join("index.csv").exists() {
        return Err(Failure::validation(format!("no trajectory at {}", dir.display())));
    }
    Ok(read_trajectory(&dir)?)
}

pub fn spectrum(cfg: &Config, out: &Path, trajectory: &Option<PathBuf>) -> Outcome {
    let traj = load(trajectory, out)?;
    let (t0, t1) = (traj.t_start(), traj.t_end());
    let default_times: Vec<f64> = (0..5).map(|k| t0 + (t1 - t0) * k as f64 / 4.0).collect();
    let times = cfg.list_or("times", &default_times)?;
    let tol = 1e-9 * traj.dt_snapshot.abs();
    if let Some(&t) = times.iter().find(|&&t| t < t0 - tol || t > t1 + tol) {
        return Err(Error::MissingSnapshot(t).into());
    }
    let exclusion = cfg.f64_or("exclusion", 1e-2)?;
    let lambdas = lambda_grid(
        cfg.positive_or("lambda_min", 0.1)?,
        cfg.positive_or("lambda_max", 10.0)?,
        cfg.usize_or("lambda_steps", 200)?,
        exclusion,
    )?;
    let tag = label(&traj.spec);
    let mut curves = Vec::new();
    let mut files = Vec::new();
    for (k, &t) in times.iter().enumerate() {
        let state = traj.state_at(t)?;
        let curve = spectral_curve(&state, &lambdas, &traj.spec, exclusion);
        for (l, e) in &curve.failures {
            if (l - 1.0).abs() >= exclusion {
                eprintln!("warning: t={t} Lambda={l}: {e}");
            }
        }
        let name = format!("curve_{k:02}.csv");
        write_spectral_curve(&out.join(&name), &curve, &tag)?;
        files.push(name);
        curves.push(curve);
    }
    let mut diff = String::from("t_i,t_j,relative_deviation,max_abs_b_change\n");
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            let db = curves[i]
                .samples
                .iter()
                .zip(&curves[j].samples)
                .map(|(p, q)| (p.b.norm() - q.b.norm()).abs())
                .fold(0.0, f64::max);
            let _ = writeln!(
                diff,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                curves[i].t,
                curves[j].t,
                curves[i].relative_deviation(&curves[j]),
                db
            );
        }
    }
    fs::write(out.join("curve_diff.csv"), diff)?;
    files.push("curve_diff.csv".into());
    Ok(files)
}

/// Collision centre from the config, or the energy-weighted one, or the
/// middle of the box when there is no collision.
fn centre(cfg: &Config, traj: &Trajectory) -> Result<((f64, f64), Option<String>), Failure> {
    if let (Some(x), Some(t)) = (cfg.f64_opt("x_c")?, cfg.f64_opt("t_c")?) {
        return Ok(((x, t), None));
    }
    match center_of_mass_frame(traj) {
        Ok(c) => Ok((c, None)),
        Err(Error::NoCollisionFound) => {
            let g = traj.grid();
            let c = (0.5 * (g.x_min + g.x_max), 0.5 * (traj.t_start() + traj.t_end()));
            Ok((c, Some("no collision found; using the centre of the box".into())))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn wilson(cfg: &Config, out: &Path, trajectory: &Option<PathBuf>) -> Outcome {
    let traj = load(trajectory, out)?;
    let lambdas = cfg.list_or("wilson_lambdas", &[0.5, 2.0, 3.0])?;
    let ls = cfg.list_or("loop_L", &[1.0, 2.0, 4.0])?;
    let taus = cfg.list_or("loop_tau", &[1.0, 2.0, 4.0])?;
    let ((xc, tc), note) = centre(cfg, &traj)?;
    if let Some(n) = &note {
        eprintln!("warning: {n}");
    }
    let mut csv = String::from(LOOP_HEADER);
    csv.push('\n');
    let mut errors = String::new();
    for &l in &lambdas {
        let lam = SpectralParam::real(l)?;
        for &len in &ls {
            for &tau in &taus {
                let rect = ContourRect::centered(len, tau, xc, tc)?;
                let row = match wilson_loop_rect(&traj, &rect, &lam, &traj.spec) {
                    Ok(w) => {
                        let (dev, det) = loop_deviation(&w);
                        LoopRow { lambda: l, l: len, tau, trace: w.trace(), dev_from_identity: dev, det_err: det }
                    }
                    Err(e) => {
                        let _ = writeln!(errors, "lambda={l} L={len} tau={tau}: {e}");
                        let nan = f64::NAN;
                        LoopRow { lambda: l, l: len, tau, trace: quasint::Complex64::new(nan, nan), dev_from_identity: nan, det_err: nan }
                    }
                };
                csv.push_str(&row.csv());
                csv.push('\n');
            }
        }
    }
    fs::write(out.join("loops.csv"), csv)?;
    let mut files = vec!["loops.csv".to_string()];
    if !errors.is_empty() || note.is_some() {
        let mut text = String::new();
        let _ = writeln!(text, "center = ({xc:.16e}, {tc:.16e})");
        if let Some(n) = note {
            let _ = writeln!(text, "note = {n}");
        }
        text.push_str(&errors);
        fs::write(out.join("loops_errors.txt"), text)?;
        files.push("loops_errors.txt".into());
    }
    Ok(files)
}

pub fn ptcheck(cfg: &Config, out: &Path, trajectory: &Option<PathBuf>) -> Outcome {
    let traj = load(trajectory, out)?;
    let lam = SpectralParam::real(cfg.f64_or("pt_lambda", 2.0)?)?;
    let center = match (cfg.f64_opt("x_c")?, cfg.f64_opt("t_c")?) {
        (Some(x), Some(t)) => Some((x, t)),
        _ => None,
    };
    let report: PtReport = pt_report(&traj, &lam, center, &PtOptions::default());
    let mut text = header("ptcheck", &traj.spec, cfg);
    let _ = writeln!(text, "lambda = {:.16e}", lam.lambda.re);
    text.push_str(&report.to_kv());
    let (_, _, warn) = radiation(&traj, cfg.positive_or("radiation_margin", 8.0)?)?;
    if let Some(w) = warn {
        let _ = writeln!(text, "warning = {w}");
    }
    append(&out.join("report.txt"), &text)?;

    let summary = out.join("pt_summary.csv");
    if !summary.exists() {
        fs::write(&summary, format!("model,n,{}\n", PtReport::CSV_HEADER))?;
    }
    let n = match traj.spec {
        PotentialSpec::Bazeia { n, .. } => n.to_string(),
        _ => String::new(),
    };
    append(&summary, &format!("{},{n},{}\n", traj.spec.model_name(), report.csv_row()))?;
    if !report.notes.is_empty() {
        eprintln!("warning: partial report: {}", report.notes.join("; "));
    }
    Ok(vec!["report.txt".into(), "pt_summary.csv".into()])
}

pub fn kdv(cfg: &Config, out: &Path) -> Outcome {
    let mut kcfg = cfg.clone();
    if kcfg.get("potential.kind").is_none() {
        kcfg.set_pair("potential.kind = kdv")?;
    }
    let spec = potential(&kcfg)?;
    let PotentialSpec::KdV { a, b } = spec else {
        return Err(Failure::validation("kdv needs potential.kind = kdv"));
    };
    let half = cfg.positive_or("L", 30.0)?;
    let n = cfg.usize_or("n_points", 384)?;
    if n < 8 {
        return Err(Failure::validation("n_points must be >= 8"));
    }
    let grid = Grid1D::new(-half, -half + 2.0 * half * (n - 1) as f64 / n as f64, n)?;
    let sp = SolitonParams {
        c1: cfg.positive_or("c1", 4.0)?,
        c2: cfg.positive_or("c2", 1.0)?,
        ..Default::default()
    };
    let dt = cfg.positive_or("dt", 2e-4)?;
    let every = cfg.usize_or("snapshot_every", 500)?;
    if every == 0 {
        return Err(Failure::validation("snapshot_every must be >= 1"));
    }
    let (t_start, t_final) = (cfg.f64_or("t_start", -2.0)?, cfg.f64_or("t_final", 2.0)?);
    check_time_order(t_start, t_final)?;
    let exact = |t: f64| -> Result<Vec<f64>, Error> { grid.xs().map(|x| kdv_two_soliton(&sp, a, b, x, t)).collect() };

    let mut u = exact(t_start)?;
    let mut solver = KdvSolver::new(a, b, grid)?;
    let steps = ((t_final - t_start) / dt).round() as usize;
    let snap = |u: &[f64], t: f64| -> Result<FieldState, Error> { FieldState::from_real(grid, t, u, &vec![0.0; n]) };
    let mut states = vec![snap(&u, t_start)?];
    let mut energies = vec![energy_kdv(&u, a, b, &grid)];
    let mut t = t_start;
    for k in 1..=steps {
        solver.step(&mut u, dt)?;
        t = t_start + k as f64 * dt;
        if k % every == 0 {
            states.push(snap(&u, t)?);
            energies.push(energy_kdv(&u, a, b, &grid));
        }
    }
    let err = u
        .iter()
        .zip(exact(t)?)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    let traj = Trajectory { spec, states, dt_snapshot: dt * every as f64, dt, energies };
    let mut files: Vec<String> = write_trajectory(&out.join("kdv"), &traj)?
        .into_iter()
        .map(|f| format!("kdv/{f}"))
        .collect();
    let mut rep = header("kdv", &spec, cfg);
    let _ = writeln!(rep, "c1 = {:.16e}", sp.c1);
    let _ = writeln!(rep, "c2 = {:.16e}", sp.c2);
    let _ = writeln!(rep, "t_end = {t:.16e}");
    let _ = writeln!(rep, "energy_drift = {:.16e}", traj.energy_drift());
    let _ = writeln!(rep, "closed_form_max_error = {err:.16e}");
    append(&out.join("report.txt"), &rep)?;
    files.push("report.txt".into());
    Ok(files)
}
