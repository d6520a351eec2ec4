//! Reference two-soliton collision runs.

use crate::error::{Error, Result};
use crate::evolve::{evolve_kg_with, FieldState, Grid1D, KgOptions, Trajectory};
use crate::potentials::{PotentialSpec, VacuumInfo};
use crate::solutions::{boosted_pair, PairMode};
use std::f64::consts::PI;

/// Everything needed to reproduce one Bazeia kink collision.
///
/// Defaults: `B = 1`, `M = 0.3`, box `[−40, 40]` with 4096 nodes,
/// `v = 0.5`, `x0 = 15`, `t ∈ [−30, 30]`, `dt = 1/1024` and a snapshot
/// every 100 steps. The outer vacuum is `π` (mass `4M` for every `n`) and
/// the inner one is `0` (mass `8M/n`), so the walls stay quiet and a
/// transmitted pair leaves `2π` in the middle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionSetup {
    pub n: u32,
    pub coupling: f64,
    pub mass: f64,
    pub half_width: f64,
    pub n_points: usize,
    pub v: f64,
    pub x0: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub snapshot_every: usize,
    pub outer: f64,
    pub inner: f64,
    pub mode: PairMode,
}

impl Default for CollisionSetup {
    fn default() -> Self {
        CollisionSetup {
            n: 2,
            coupling: 1.0,
            mass: 0.3,
            half_width: 40.0,
            n_points: 4096,
            v: 0.5,
            x0: 15.0,
            t_start: -30.0,
            t_end: 30.0,
            dt: 1.0 / 1024.0,
            snapshot_every: 100,
            outer: PI,
            inner: 0.0,
            mode: PairMode::KinkAntikink,
        }
    }
}

impl CollisionSetup {
    pub fn with_n(n: u32) -> Self {
        CollisionSetup { n, ..Default::default() }
    }

    pub fn spec(&self) -> Result<PotentialSpec> {
        PotentialSpec::bazeia(self.n, self.coupling, self.mass)
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::symmetric(self.half_width, self.n_points)
    }

    /// Outer and inner vacua, polished from the configured guesses.
    pub fn vacua(&self) -> Result<(VacuumInfo, VacuumInfo)> {
        let spec = self.spec()?;
        let o = spec.nearest_vacuum(self.outer)?;
        let i = spec.nearest_vacuum(self.inner)?;
        if (o.phi - i.phi).abs() < 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "outer ({}) and inner ({}) guesses select the same vacuum",
                self.outer, self.inner
            )));
        }
        Ok((o, i))
    }

    /// Boosted pair at `t_start`.
    pub fn initial_state(&self) -> Result<FieldState> {
        let spec = self.spec()?;
        let (o, i) = self.vacua()?;
        let mut st = boosted_pair(&spec, &o, &i, self.v, self.x0, self.mode, &self.grid()?)?;
        st.t = self.t_start;
        Ok(st)
    }

    pub fn run(&self) -> Result<Trajectory> {
        self.run_with(KgOptions::default())
    }

    pub fn run_with(&self, opts: KgOptions) -> Result<Trajectory> {
        let st = self.initial_state()?;
        evolve_kg_with(&st, &self.spec()?, self.t_end, self.dt, self.snapshot_every, opts)
    }

    /// Same run on a grid with twice the resolution (`2N − 1` nodes, so the
    /// coarse nodes are a subset) and the same time step.
    pub fn refined(&self) -> Self {
        CollisionSetup { n_points: 2 * self.n_points - 1, ..*self }
    }
}

/// `max |Φ_coarse − Φ_fine|` over shared nodes and snapshots; the fine
/// trajectory must come from [`CollisionSetup::refined`].
pub fn refinement_difference(coarse: &Trajectory, fine: &Trajectory) -> Result<f64> {
    let (gc, gf) = (coarse.grid(), fine.grid());
    if gf.n_points != 2 * gc.n_points - 1 || coarse.states.len() != fine.states.len() {
        return Err(Error::InvalidParameter("trajectories are not a refinement pair".into()));
    }
    let mut worst: f64 = 0.0;
    for (c, f) in coarse.states.iter().zip(&fine.states) {
        if (c.t - f.t).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("snapshot times differ: {} vs {}", c.t, f.t)));
        }
        for (i, p) in c.phi.iter().enumerate() {
            worst = worst.max((p - f.phi[2 * i]).norm());
        }
    }
    Ok(worst)
}
