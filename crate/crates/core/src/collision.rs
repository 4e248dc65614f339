//! The nonlinear two-species BGK relaxation operator and its conservation
//! diagnostics.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{DistributionPair, GridFunction, PairKind, PhaseGrid, VelocityGrid};
use crate::mixture::{
    compute_moments, local_maxwellian, mix_moments, raw_moments, EquilibriumMode, Fault, MixtureParams, MomentSet,
    SpeciesMoments, Vec3,
};

/// Knobs of the relaxation operator beyond the mixture parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationSettings {
    pub mode: EquilibriumMode,
    /// Global factor on both collision frequencies.
    pub rate_multiplier: f64,
    pub fault: Fault,
}

impl RelaxationSettings {
    pub fn new(mode: EquilibriumMode) -> Self {
        Self {
            mode,
            rate_multiplier: 1.0,
            fault: Fault::None,
        }
    }
}

/// Moments and the four local Maxwellians of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellEquilibria {
    pub moments: MomentSet,
    pub m11: Vec<f64>,
    pub m12: Vec<f64>,
    pub m22: Vec<f64>,
    pub m21: Vec<f64>,
}

/// Cell moments of both species, mixed.
pub fn cell_moment_set(
    f1: &[f64],
    f2: &[f64],
    p: &MixtureParams,
    grid: &VelocityGrid,
    fault: Fault,
) -> Result<MomentSet> {
    let s1 = compute_moments(f1, p.m1, grid)?;
    let s2 = compute_moments(f2, p.m2, grid)?;
    Ok(mix_moments(s1, s2, p, fault))
}

/// Builds `M11`, `M12`, `M22`, `M21` for one cell.
///
/// `M12` carries the density of species 1 and `M21` that of species 2, so the
/// inter-species terms exchange no mass.
pub fn cell_equilibria(
    f1: &[f64],
    f2: &[f64],
    p: &MixtureParams,
    grid: &VelocityGrid,
    settings: &RelaxationSettings,
) -> Result<CellEquilibria> {
    let ms = cell_moment_set(f1, f2, p, grid, settings.fault)?;
    let mode = settings.mode;
    let m11 = local_maxwellian(&ms.s1, p.m1, grid, mode)?;
    let m22 = local_maxwellian(&ms.s2, p.m2, grid, mode)?;
    let m12 = local_maxwellian(&SpeciesMoments::new(ms.s1.n, ms.u12, ms.t12), p.m1, grid, mode)?;
    let m21 = local_maxwellian(&SpeciesMoments::new(ms.s2.n, ms.u21, ms.t21), p.m2, grid, mode)?;
    Ok(CellEquilibria {
        moments: ms,
        m11,
        m12,
        m22,
        m21,
    })
}

/// Relaxation tendency of one cell written into `out1`, `out2`.
pub fn cell_rhs_into(
    f1: &[f64],
    f2: &[f64],
    p: &MixtureParams,
    grid: &VelocityGrid,
    settings: &RelaxationSettings,
    out1: &mut [f64],
    out2: &mut [f64],
) -> Result<()> {
    let eq = cell_equilibria(f1, f2, p, grid, settings)?;
    let k = settings.rate_multiplier;
    let n1 = k * eq.moments.s1.n;
    let n2 = k * eq.moments.s2.n;
    for j in 0..f1.len() {
        out1[j] = n1 * (eq.m11[j] - f1[j]) + n2 * (eq.m12[j] - f1[j]);
        out2[j] = n2 * (eq.m22[j] - f2[j]) + n1 * (eq.m21[j] - f2[j]);
    }
    Ok(())
}

pub fn cell_rhs(
    f1: &[f64],
    f2: &[f64],
    p: &MixtureParams,
    grid: &VelocityGrid,
    settings: &RelaxationSettings,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut o1 = vec![0.0; f1.len()];
    let mut o2 = vec![0.0; f2.len()];
    cell_rhs_into(f1, f2, p, grid, settings, &mut o1, &mut o2)?;
    Ok((o1, o2))
}

/// Right-hand side `(n1 (M11 - F1) + n2 (M12 - F1), n2 (M22 - F2) + n1 (M21 - F2))`
/// of the space-homogeneous part of the system, cell by cell.
pub fn bgk_rhs(
    f: &DistributionPair,
    p: &MixtureParams,
    grid: &PhaseGrid,
    mode: EquilibriumMode,
) -> Result<DistributionPair> {
    bgk_rhs_with(f, p, grid, &RelaxationSettings::new(mode))
}

pub fn bgk_rhs_with(
    f: &DistributionPair,
    p: &MixtureParams,
    grid: &PhaseGrid,
    settings: &RelaxationSettings,
) -> Result<DistributionPair> {
    if !f.matches(grid) {
        return Err(Error::GridMismatch);
    }
    let nv = grid.n_velocity();
    let mut out1 = GridFunction::zeros(grid);
    let mut out2 = GridFunction::zeros(grid);
    out1.values_mut()
        .par_chunks_mut(nv)
        .zip(out2.values_mut().par_chunks_mut(nv))
        .enumerate()
        .try_for_each(|(c, (o1, o2))| {
            cell_rhs_into(f.first.cell(c), f.second.cell(c), p, &grid.velocity, settings, o1, o2)
                .map_err(|e| e.at_cell(c))
        })?;
    DistributionPair::new(out1, out2, PairKind::Absolute)
}

/// Discrete versions of the conserved integrals over the whole domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedTotals {
    pub mass1: f64,
    pub mass2: f64,
    pub momentum: Vec3,
    pub energy: f64,
}

/// Relative change of each conserved quantity against a reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalsDrift {
    pub mass1: f64,
    pub mass2: f64,
    pub momentum: f64,
    pub energy: f64,
}

impl TotalsDrift {
    pub fn max(&self) -> f64 {
        self.mass1.max(self.mass2).max(self.momentum).max(self.energy)
    }
}

impl ConservedTotals {
    /// Drift of `self` relative to `reference`.
    ///
    /// Masses and energy are compared relative to their reference values. The
    /// momentum, which is often zero, is compared against the thermal momentum
    /// scale `sqrt((m1 M1 + m2 M2) E)` of the reference.
    pub fn drift_from(&self, reference: &ConservedTotals, p: &MixtureParams) -> TotalsDrift {
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
        let pscale = ((p.m1 * reference.mass1 + p.m2 * reference.mass2) * reference.energy.abs()).sqrt();
        let dp = (0..3)
            .map(|i| (self.momentum[i] - reference.momentum[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        TotalsDrift {
            mass1: rel(self.mass1, reference.mass1),
            mass2: rel(self.mass2, reference.mass2),
            momentum: dp / pscale.max(f64::MIN_POSITIVE),
            energy: rel(self.energy, reference.energy),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            mass1: s * self.mass1,
            mass2: s * self.mass2,
            momentum: [s * self.momentum[0], s * self.momentum[1], s * self.momentum[2]],
            energy: s * self.energy,
        }
    }
}

/// Masses, total momentum `sum (m1 F1 + m2 F2) v` and total energy
/// `sum (m1 F1 + m2 F2) |v|^2`, integrated over space and velocity. Works for
/// signed pairs such as tendencies.
pub fn conserved_totals(f: &DistributionPair, p: &MixtureParams, grid: &PhaseGrid) -> Result<ConservedTotals> {
    if !f.matches(grid) {
        return Err(Error::GridMismatch);
    }
    let dx = grid.space.cell_width();
    let mut t = ConservedTotals {
        mass1: 0.0,
        mass2: 0.0,
        momentum: [0.0; 3],
        energy: 0.0,
    };
    for c in 0..grid.n_cells() {
        let r1 = raw_moments(f.first.cell(c), &grid.velocity);
        let r2 = raw_moments(f.second.cell(c), &grid.velocity);
        t.mass1 += dx * r1.mass;
        t.mass2 += dx * r2.mass;
        for i in 0..3 {
            t.momentum[i] += dx * (p.m1 * r1.flux[i] + p.m2 * r2.flux[i]);
        }
        t.energy += dx * (p.m1 * r1.second + p.m2 * r2.second);
    }
    Ok(t)
}

/// Residuals of the inter-species cancellation properties in one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeResiduals {
    /// `sum w (M12 - F1)`.
    pub mass1: f64,
    /// `sum w (M21 - F2)`.
    pub mass2: f64,
    /// `n2 m1 sum w (M12 - F1) v + n1 m2 sum w (M21 - F2) v`.
    pub momentum: Vec3,
    /// `n2 m1 sum w (M12 - F1) |v|^2 + n1 m2 sum w (M21 - F2) |v|^2`.
    pub energy: f64,
}

impl ExchangeResiduals {
    pub fn max_abs(&self) -> f64 {
        self.momentum
            .iter()
            .fold(self.mass1.abs().max(self.mass2.abs()).max(self.energy.abs()), |m, x| m.max(x.abs()))
    }
}

/// Cancellation residuals of the inter-species terms, per cell.
///
/// The momentum and energy sums weight each exchange term by the collision
/// frequency that multiplies it in the equations (`n2` for species 1, `n1` for
/// species 2); with those weights they vanish exactly for the continuous model.
pub fn exchange_diagnostics(
    f: &DistributionPair,
    p: &MixtureParams,
    grid: &PhaseGrid,
    settings: &RelaxationSettings,
) -> Result<Vec<ExchangeResiduals>> {
    if !f.matches(grid) {
        return Err(Error::GridMismatch);
    }
    (0..grid.n_cells())
        .into_par_iter()
        .map(|c| {
            let (f1, f2) = (f.first.cell(c), f.second.cell(c));
            let eq = cell_equilibria(f1, f2, p, &grid.velocity, settings).map_err(|e| e.at_cell(c))?;
            let d1: Vec<f64> = eq.m12.iter().zip(f1).map(|(m, x)| m - x).collect();
            let d2: Vec<f64> = eq.m21.iter().zip(f2).map(|(m, x)| m - x).collect();
            let r1 = raw_moments(&d1, &grid.velocity);
            let r2 = raw_moments(&d2, &grid.velocity);
            let w1 = eq.moments.s2.n * p.m1;
            let w2 = eq.moments.s1.n * p.m2;
            Ok(ExchangeResiduals {
                mass1: r1.mass,
                mass2: r2.mass,
                momentum: std::array::from_fn(|i| w1 * r1.flux[i] + w2 * r2.flux[i]),
                energy: w1 * r1.second + w2 * r2.second,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_velocity_grid, SpatialGrid};
    use crate::mixture::{global_equilibria, global_equilibria_with, maxwellian};

    fn homogeneous(vmax: f64, n: usize) -> PhaseGrid {
        PhaseGrid::homogeneous(make_velocity_grid(vmax, n).unwrap())
    }

    #[test]
    fn equilibrium_is_a_fixed_point_in_both_modes() {
        let p = MixtureParams {
            m1: 2.0,
            m2: 1.0,
            n10: 0.7,
            n20: 1.4,
            delta: 0.6,
            omega: 0.3,
            gamma: 0.01,
        };
        let g = homogeneous(6.0, 16);
        let eq = global_equilibria_with(&p, &g, EquilibriumMode::MomentMatched).unwrap();
        let rhs = bgk_rhs(&eq, &p, &g, EquilibriumMode::MomentMatched).unwrap();
        assert!(rhs.max_abs() <= 1e-10, "{}", rhs.max_abs());

        let g24 = homogeneous(6.0, 24);
        let eq = global_equilibria(&p, &g24).unwrap();
        let rhs = bgk_rhs(&eq, &p, &g24, EquilibriumMode::Sampled).unwrap();
        assert!(rhs.max_abs() <= 1e-5, "{}", rhs.max_abs());
    }

    #[test]
    fn tendency_points_towards_the_equilibria() {
        let p = MixtureParams {
            delta: 0.9,
            omega: 0.9,
            ..Default::default()
        };
        let g = homogeneous(6.0, 16);
        let f1 = maxwellian(1.0, [0.6, 0.0, 0.0], 1.0, 1.0, &g.velocity).unwrap();
        let f2 = maxwellian(1.0, [0.0; 3], 1.0, 1.0, &g.velocity).unwrap();
        let s = RelaxationSettings::new(EquilibriumMode::Sampled);
        let (r1, _) = cell_rhs(&f1, &f2, &p, &g.velocity, &s).unwrap();
        // Independently assembled targets.
        let ms = cell_moment_set(&f1, &f2, &p, &g.velocity, Fault::None).unwrap();
        let m11 = maxwellian(ms.s1.n, ms.s1.u, ms.s1.t, 1.0, &g.velocity).unwrap();
        let m12 = maxwellian(ms.s1.n, ms.u12, ms.t12, 1.0, &g.velocity).unwrap();
        for j in 0..f1.len() {
            let target = (ms.s1.n * m11[j] + ms.s2.n * m12[j]) / (ms.s1.n + ms.s2.n);
            let expected = (ms.s1.n + ms.s2.n) * (target - f1[j]);
            assert!((r1[j] - expected).abs() <= 1e-12 * f1[j].max(1e-300) + 1e-15);
            if (target - f1[j]).abs() > 1e-12 {
                assert_eq!(r1[j].signum(), (target - f1[j]).signum());
            }
        }
    }

    #[test]
    fn equilibrium_totals_and_linearity() {
        let p = MixtureParams {
            n10: 0.5,
            n20: 1.5,
            ..Default::default()
        };
        let g = PhaseGrid::new(
            SpatialGrid::periodic(4, 1.0).unwrap(),
            make_velocity_grid(6.0, 24).unwrap(),
        );
        let eq = global_equilibria(&p, &g).unwrap();
        let t = conserved_totals(&eq, &p, &g).unwrap();
        assert!((t.mass1 - 0.5).abs() < 1e-6);
        assert!((t.mass2 - 1.5).abs() < 1e-6);
        assert!(t.momentum.iter().all(|x| x.abs() < 1e-12));
        assert!((t.energy - 6.0).abs() < 1e-6);
        let t2 = conserved_totals(&eq.scaled(2.0), &p, &g).unwrap();
        let d = t2.drift_from(&t.scaled(2.0), &p);
        assert!(d.max() < 1e-14);
    }

    #[test]
    fn zero_cell_reports_its_index() {
        let p = MixtureParams::default();
        let g = PhaseGrid::new(SpatialGrid::periodic(3, 1.0).unwrap(), make_velocity_grid(4.0, 8).unwrap());
        let mut f = global_equilibria(&p, &g).unwrap();
        f.first.cell_mut(2).iter_mut().for_each(|x| *x = 0.0);
        match bgk_rhs(&f, &p, &g, EquilibriumMode::Sampled) {
            Err(Error::DegenerateCell { cell, .. }) => assert_eq!(cell, 2),
            other => panic!("expected a degenerate cell, got {other:?}"),
        }
    }

    #[test]
    fn sampled_cancellation_converges_with_resolution() {
        let p = MixtureParams {
            gamma: 0.02,
            ..Default::default()
        };
        let s = RelaxationSettings::new(EquilibriumMode::Sampled);
        let residual = |n: usize| {
            let g = homogeneous(6.0, n);
            let f1 = maxwellian(1.0, [0.3, -0.1, 0.0], 1.2, 1.0, &g.velocity).unwrap();
            let f2 = maxwellian(0.8, [-0.2, 0.0, 0.1], 0.9, 1.0, &g.velocity).unwrap();
            let f = DistributionPair::uniform(&g, &f1, &f2, PairKind::Absolute).unwrap();
            exchange_diagnostics(&f, &p, &g, &s).unwrap()[0].max_abs()
        };
        let coarse = residual(8);
        let fine = residual(16);
        assert!(coarse > 0.0);
        assert!(fine * 4.0 <= coarse, "coarse {coarse:e}, fine {fine:e}");
    }
}
