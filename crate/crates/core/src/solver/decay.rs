use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::mixture::{MixtureParams, Regime};

use super::run::{run, TimeSeries};
use super::scenario::Scenario;
use super::step::SolverConfig;

/// Exponential fit `energy ~ exp(intercept - 2 rate t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    pub rate: f64,
    pub intercept: f64,
    pub fit_window: (f64, f64),
    pub r_squared: f64,
    /// `min{1 - delta, 1 - omega}`.
    pub theory_floor: f64,
    pub samples: usize,
}

/// Minimum number of samples a fit accepts.
pub const MIN_FIT_SAMPLES: usize = 10;

/// `[0.2 t_max, 0.8 t_max]`.
pub fn default_window(t_max: f64) -> (f64, f64) {
    (0.2 * t_max, 0.8 * t_max)
}

/// Least-squares line through `log energy(t)` on the window; `rate = -slope / 2`.
pub fn estimate_decay(ts: &TimeSeries, window: (f64, f64)) -> Result<DecayReport> {
    let (lo, hi) = window;
    let (t, e): (Vec<f64>, Vec<f64>) = ts
        .times
        .iter()
        .zip(&ts.energy)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, e)| (*t, *e))
        .unzip();
    if t.len() < MIN_FIT_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "fit window [{lo}, {hi}] holds {} samples, need at least {MIN_FIT_SAMPLES}",
            t.len()
        )));
    }
    if let Some(bad) = e.iter().find(|x| !(**x > 0.0)) {
        return Err(Error::InvalidInput(format!("nonpositive energy {bad:e} in fit window [{lo}, {hi}]")));
    }
    let y: Vec<f64> = e.iter().map(|x| x.ln()).collect();
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|a| (a - mt) * (a - mt)).sum();
    let sty: f64 = t.iter().zip(&y).map(|(a, b)| (a - mt) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let ss_res: f64 = t.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    let p = &ts.params;
    Ok(DecayReport {
        rate: -slope / 2.0,
        intercept,
        fit_window: window,
        r_squared,
        theory_floor: (1.0 - p.delta).min(1.0 - p.omega),
        samples: t.len(),
    })
}

/// Decay rate of the homogeneous momentum gap `U1 - U2` in the linear
/// regime: `(1 - delta)(n20 + n10 m1 / m2)`.
pub fn momentum_gap_rate(p: &MixtureParams) -> f64 {
    (1.0 - p.delta) * (p.n20 + p.n10 * p.mass_ratio())
}

/// Decay rate of the homogeneous temperature gap `T1 - T2` in the linear
/// regime: `(1 - omega)(n10 + n20)`.
pub fn temperature_gap_rate(p: &MixtureParams) -> f64 {
    (1.0 - p.omega) * (p.n10 + p.n20)
}

/// One `(delta, omega)` entry of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub omega: f64,
    pub admissible: bool,
    /// Why the pair was skipped.
    pub reason: Option<String>,
    pub report: Option<DecayReport>,
}

/// Runs the scenario (with amplitude `epsilon`) for every pair of the
/// product `delta_list x omega_list` and fits decay rates on the default window.
pub fn sweep_rates(
    p_base: &MixtureParams,
    grid: &PhaseGrid,
    cfg: &SolverConfig,
    delta_list: &[f64],
    omega_list: &[f64],
    epsilon: f64,
    scenario: &Scenario,
) -> Result<Vec<SweepRow>> {
    if delta_list.is_empty() || omega_list.is_empty() {
        return Err(Error::InvalidInput("delta and omega lists must be nonempty".into()));
    }
    let pairs: Vec<(f64, f64)> = delta_list
        .iter()
        .flat_map(|&d| omega_list.iter().map(move |&o| (d, o)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|&(delta, omega)| {
            let mut p = p_base.with_exchange(delta, omega);
            // Keep gamma inside its delta-dependent bound.
            p.gamma = p.gamma.min(p.gamma_upper_bound().max(0.0));
            if let Err(e) = p.check(Regime::Strict) {
                return Ok(SweepRow {
                    delta,
                    omega,
                    admissible: false,
                    reason: Some(e.to_string()),
                    report: None,
                });
            }
            let sc = Scenario { amplitude: epsilon, ..*scenario };
            let f0 = sc.initial_state(&p, grid, cfg.equilibrium_mode)?;
            let ts = run(&f0, &p, grid, cfg).map_err(|a| a.error)?;
            let report = estimate_decay(&ts, default_window(cfg.t_max))?;
            Ok(SweepRow {
                delta,
                omega,
                admissible: true,
                reason: None,
                report: Some(report),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.iter().all(|r| !r.admissible) {
        return Err(Error::Inadmissible("every (delta, omega) pair in the sweep is inadmissible".into()));
    }
    Ok(rows)
}

/// True when `rates` never increases by more than `rel_tol` relative.
pub fn non_increasing(rates: &[f64], rel_tol: f64) -> bool {
    rates.windows(2).all(|w| w[1] <= w[0] * (1.0 + rel_tol))
}
