use crate::collision::{bgk_rhs_with, RelaxationSettings};
use crate::error::{Error, Result};
use crate::grid::{DistributionPair, PhaseGrid};
use crate::mixture::{EquilibriumMode, Fault, MixtureParams};

use super::advect::AdvectionPlan;

/// Operator-splitting scheme for transport and relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    /// `advect(dt/2) relax(dt) advect(dt/2)`.
    #[default]
    Strang,
    /// `advect(dt) relax(dt)`.
    Lie,
}

impl Splitting {
    pub fn name(self) -> &'static str {
        match self {
            Splitting::Strang => "strang",
            Splitting::Lie => "lie",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "strang" => Some(Splitting::Strang),
            "lie" => Some(Splitting::Lie),
            _ => None,
        }
    }

    pub const NAMES: [&'static str; 2] = ["strang", "lie"];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_max: f64,
    pub splitting: Splitting,
    pub equilibrium_mode: EquilibriumMode,
    /// Record every this many steps.
    pub record_every: usize,
    /// Factor on both collision frequencies.
    pub rate_multiplier: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            t_max: 10.0,
            splitting: Splitting::Strang,
            equilibrium_mode: EquilibriumMode::MomentMatched,
            record_every: 1,
            rate_multiplier: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max >= self.dt) {
            return Err(Error::InvalidInput(format!(
                "t_max must be at least dt (t_max = {}, dt = {})",
                self.t_max, self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidInput("record_every must be at least 1".into()));
        }
        if !(self.rate_multiplier.is_finite() && self.rate_multiplier > 0.0) {
            return Err(Error::InvalidInput(format!(
                "rate_multiplier must be positive, got {}",
                self.rate_multiplier
            )));
        }
        Ok(())
    }

    /// Number of steps needed to reach `t_max`.
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil() as usize
    }

    pub fn relaxation(&self) -> RelaxationSettings {
        RelaxationSettings {
            mode: self.equilibrium_mode,
            rate_multiplier: self.rate_multiplier,
            fault: Fault::None,
        }
    }
}

/// Values below `-NEGATIVITY_TOL * max(F)` abort a run.
pub const NEGATIVITY_TOL: f64 = 1e-12;

/// Checks `F >= -1e-12 max(F)` species by species.
pub fn check_positivity(f: &DistributionPair, grid: &PhaseGrid) -> Result<()> {
    let nv = grid.n_velocity();
    for k in 0..2 {
        let v = f.species(k).values();
        let max = v.iter().fold(0.0_f64, |a, &x| a.max(x));
        if let Some((j, &x)) = v.iter().enumerate().find(|(_, &x)| x < -NEGATIVITY_TOL * max || x.is_nan()) {
            return Err(Error::Negativity {
                species: k + 1,
                cell: j / nv,
                value: x,
                max,
            });
        }
    }
    Ok(())
}

/// Smallest `min(F_k) / max(F_k)` over both species.
pub fn min_ratio(f: &DistributionPair) -> f64 {
    (0..2)
        .map(|k| {
            let v = f.species(k).values();
            let max = v.iter().fold(f64::MIN, |a, &x| a.max(x));
            let min = v.iter().fold(f64::MAX, |a, &x| a.min(x));
            min / max
        })
        .fold(f64::MAX, f64::min)
}

/// One classical fourth-order Runge-Kutta step of `dF/dt = rhs(F)`, cell by cell.
pub fn relax(
    f: &DistributionPair,
    p: &MixtureParams,
    grid: &PhaseGrid,
    settings: &RelaxationSettings,
    dt: f64,
) -> Result<DistributionPair> {
    let k1 = bgk_rhs_with(f, p, grid, settings)?;
    let k2 = bgk_rhs_with(&f.axpy(dt / 2.0, &k1)?, p, grid, settings)?;
    let k3 = bgk_rhs_with(&f.axpy(dt / 2.0, &k2)?, p, grid, settings)?;
    let k4 = bgk_rhs_with(&f.axpy(dt, &k3)?, p, grid, settings)?;
    let mut out = f.clone();
    for k in 0..2 {
        let o = out.species_mut(k).values_mut();
        let (a, b, c, d) = (
            k1.species(k).values(),
            k2.species(k).values(),
            k3.species(k).values(),
            k4.species(k).values(),
        );
        for j in 0..o.len() {
            o[j] += dt / 6.0 * (a[j] + 2.0 * b[j] + 2.0 * c[j] + d[j]);
        }
    }
    Ok(out)
}

/// Time stepper holding the transport plans for a fixed configuration.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: MixtureParams,
    grid: PhaseGrid,
    cfg: SolverConfig,
    settings: RelaxationSettings,
    half: AdvectionPlan,
    full: AdvectionPlan,
}

impl Stepper {
    pub fn new(p: &MixtureParams, grid: &PhaseGrid, cfg: &SolverConfig) -> Result<Self> {
        p.check(crate::mixture::Regime::Strict)?;
        cfg.validate()?;
        Ok(Self {
            params: *p,
            grid: grid.clone(),
            cfg: *cfg,
            settings: cfg.relaxation(),
            half: AdvectionPlan::new(grid, cfg.dt / 2.0),
            full: AdvectionPlan::new(grid, cfg.dt),
        })
    }

    pub fn with_settings(mut self, settings: RelaxationSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn params(&self) -> &MixtureParams {
        &self.params
    }

    /// Advances by one step and checks the result for negativity.
    pub fn step(&self, f: &DistributionPair) -> Result<DistributionPair> {
        if !f.matches(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let dt = self.cfg.dt;
        let out = match self.cfg.splitting {
            Splitting::Strang => {
                let mut g = f.clone();
                self.half.apply(&mut g, &self.grid);
                let mut g = relax(&g, &self.params, &self.grid, &self.settings, dt)?;
                self.half.apply(&mut g, &self.grid);
                g
            }
            Splitting::Lie => {
                let mut g = f.clone();
                self.full.apply(&mut g, &self.grid);
                relax(&g, &self.params, &self.grid, &self.settings, dt)?
            }
        };
        check_positivity(&out, &self.grid)?;
        Ok(out)
    }
}

/// One step of the split scheme. Rejects negative input.
pub fn step(f: &DistributionPair, p: &MixtureParams, grid: &PhaseGrid, cfg: &SolverConfig) -> Result<DistributionPair> {
    check_positivity(f, grid)?;
    Stepper::new(p, grid, cfg)?.step(f)
}
