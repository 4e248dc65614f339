//! Time integration of the full system on the torus by transport/relaxation
//! splitting, perturbation-energy tracking and decay-rate fits.

mod advect;
mod decay;
mod run;
mod scenario;
mod step;

pub use advect::{advect, AdvectionPlan};
pub use decay::{
    default_window, estimate_decay, momentum_gap_rate, non_increasing, sweep_rates, temperature_gap_rate, DecayReport,
    SweepRow, MIN_FIT_SAMPLES,
};
pub use run::{mean_moments, run, RunAbort, TimeSeries};
pub use scenario::{
    equilibrium_from_totals, perturbation_energy, shifted_equilibrium, Scenario, ScenarioKind, TotalsEquilibrium,
};
pub use step::{check_positivity, min_ratio, relax, step, SolverConfig, Splitting, Stepper, NEGATIVITY_TOL};
