//! Species parameters, moments, mixing rules and Maxwellians.

mod maxwellian;
mod moments;
mod params;

pub use maxwellian::{
    discrete_maxwellian, equilibrium_profile, global_equilibria, global_equilibria_with, local_maxwellian, maxwellian,
    DiscreteMaxwellian, EquilibriumMode, MomentTargets,
};
pub use moments::{
    compute_moments, mix_moments, mix_temperatures, mix_temperatures_with, mix_velocities, t21_velocity_coefficient,
    Fault, MomentSet, SpeciesMoments, Vec3,
};
pub(crate) use moments::raw_moments;
pub use params::{validate_params, validate_params_in, Admissibility, Constraint, MixtureParams, Regime, Violation};
