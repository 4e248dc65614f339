//! Perturbation theory about the global equilibria: moment bases and
//! projections, the linearized operator, its kernel and dissipation, and
//! numerical checks of the expansions behind it.

mod basis;
mod derivatives;
mod kernel;
mod operator;
mod remainder;

pub use basis::{project_mixture, project_species, BasisKind, MixtureBasis, SpeciesBasis};
pub use derivatives::{
    closed_form_derivative, cross_check_linear_part, linear_parts, loglog_slope, moment_jacobian,
    moment_jacobian_inverse, verify_jacobian, verify_jacobian_with_step, verify_linear_part, verify_mix_derivatives,
    DerivativeResidual, Field, JacobianResidual, LinearPartReport, Matrix5, MixedMaxwellian,
};
pub use kernel::{expected_kernel_dimension, kernel_dimension, kernel_dimension_seeded, KernelReport, KERNEL_COMPLEMENT_DIM};
pub use operator::{
    apply_l, apply_l_parts, dissipation_check, macro_coefficients, macro_reconstruct, perturbation_split, reconstruct,
    CellParts, DissipationReport, LParts, LinearizedOperator, MacroCoefficients,
};
pub use remainder::{density_split_check, nonlinear_remainder, nonlinear_remainder_with, DensitySplitReport};

use crate::grid::VelocityGrid;
use crate::mixture::MixtureParams;

/// Half-width of the verification lattice in units of the lighter species'
/// thermal speed.
pub const VERIFY_V_MAX_SCALE: f64 = 8.0;
/// Nodes per axis of the verification lattice.
pub const VERIFY_NODES: usize = 32;

/// Lattice wide enough that both equilibria are resolved to round-off:
/// `v_max = 8 / sqrt(min(m1, m2))` with 32 nodes per axis.
pub fn verification_grid(p: &MixtureParams) -> VelocityGrid {
    verification_grid_with(p, VERIFY_NODES)
}

pub fn verification_grid_with(p: &MixtureParams, n_per_axis: usize) -> VelocityGrid {
    let m = p.m1.min(p.m2);
    VelocityGrid::new(VERIFY_V_MAX_SCALE / m.sqrt(), n_per_axis).expect("positive masses give a valid lattice")
}
