use std::fmt;

use crate::collision::{cell_moment_set, conserved_totals, ConservedTotals};
use crate::error::{Error, Result};
use crate::grid::{DistributionPair, PhaseGrid};
use crate::mixture::{Fault, MixtureParams, MomentSet};

use super::scenario::{perturbation_energy, shifted_equilibrium};
use super::step::{check_positivity, min_ratio, SolverConfig, Stepper};

/// Recorded history of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub params: MixtureParams,
    pub times: Vec<f64>,
    /// `|(F - G)/sqrt(G)|^2` against the equilibrium `G` fixed by the initial totals.
    pub energy: Vec<f64>,
    pub totals: Vec<ConservedTotals>,
    /// Cell-averaged moments.
    pub moments: Vec<MomentSet>,
    /// `min(F) / max(F)` over both species.
    pub min_ratio: Vec<f64>,
}

impl TimeSeries {
    fn new(params: MixtureParams) -> Self {
        Self {
            params,
            times: Vec::new(),
            energy: Vec::new(),
            totals: Vec::new(),
            moments: Vec::new(),
            min_ratio: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest relative drift of any conserved total from the first record.
    pub fn max_drift(&self) -> f64 {
        let Some(first) = self.totals.first() else { return 0.0 };
        self.totals.iter().map(|t| t.drift_from(first, &self.params).max()).fold(0.0, f64::max)
    }

    pub fn last_moments(&self) -> Option<&MomentSet> {
        self.moments.last()
    }
}

/// A run stopped by an error, with everything recorded up to that point.
#[derive(Debug)]
pub struct RunAbort {
    pub series: TimeSeries,
    pub error: Error,
    /// Last accepted state.
    pub state: DistributionPair,
    pub time: f64,
}

impl fmt::Display for RunAbort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "run aborted at t = {}: {}", self.time, self.error)
    }
}

impl std::error::Error for RunAbort {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Cell-averaged moment set of a state.
pub fn mean_moments(f: &DistributionPair, p: &MixtureParams, grid: &PhaseGrid) -> Result<MomentSet> {
    let sets = (0..grid.n_cells())
        .map(|c| cell_moment_set(f.first.cell(c), f.second.cell(c), p, &grid.velocity, Fault::None).map_err(|e| e.at_cell(c)))
        .collect::<Result<Vec<_>>>()?;
    MomentSet::mean(&sets).ok_or_else(|| Error::InvalidGrid("no cells".into()))
}

struct Recorder<'a> {
    p: &'a MixtureParams,
    grid: &'a PhaseGrid,
    reference: DistributionPair,
    series: TimeSeries,
}

impl Recorder<'_> {
    fn record(&mut self, t: f64, f: &DistributionPair) -> Result<()> {
        let totals = conserved_totals(f, self.p, self.grid)?;
        let energy = perturbation_energy(f, &self.reference, self.grid)?;
        let moments = mean_moments(f, self.p, self.grid)?;
        let s = &mut self.series;
        s.times.push(t);
        s.energy.push(energy);
        s.totals.push(totals);
        s.moments.push(moments);
        s.min_ratio.push(min_ratio(f));
        Ok(())
    }
}

/// Steps from `f0` to `t_max`, recording every `record_every` steps and at the end.
pub fn run(
    f0: &DistributionPair,
    p: &MixtureParams,
    grid: &PhaseGrid,
    cfg: &SolverConfig,
) -> std::result::Result<TimeSeries, Box<RunAbort>> {
    let abort = |series: TimeSeries, error: Error, state: &DistributionPair, time: f64| {
        Box::new(RunAbort {
            series,
            error,
            state: state.clone(),
            time,
        })
    };
    let empty = TimeSeries::new(*p);
    let stepper = match Stepper::new(p, grid, cfg) {
        Ok(s) => s,
        Err(e) => return Err(abort(empty, e, f0, 0.0)),
    };
    if let Err(e) = check_positivity(f0, grid) {
        return Err(abort(empty, e, f0, 0.0));
    }
    let reference = conserved_totals(f0, p, grid)
        .and_then(|t| shifted_equilibrium(&t, p, grid, cfg.equilibrium_mode));
    let reference = match reference {
        Ok(r) => r,
        Err(e) => return Err(abort(empty, e, f0, 0.0)),
    };
    let mut rec = Recorder {
        p,
        grid,
        reference,
        series: empty,
    };
    if let Err(e) = rec.record(0.0, f0) {
        return Err(abort(rec.series, e, f0, 0.0));
    }
    let n = cfg.n_steps();
    let mut f = f0.clone();
    for i in 1..=n {
        let t = i as f64 * cfg.dt;
        match stepper.step(&f) {
            Ok(g) => f = g,
            Err(e) => return Err(abort(rec.series, e, &f, t - cfg.dt)),
        }
        if i % cfg.record_every == 0 || i == n {
            if let Err(e) = rec.record(t, &f) {
                return Err(abort(rec.series, e, &f, t));
            }
        }
    }
    Ok(rec.series)
}
