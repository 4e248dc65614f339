use crate::error::{Error, Result};
use crate::grid::VelocityGrid;

use super::params::MixtureParams;

pub type Vec3 = [f64; 3];

/// Density, bulk velocity and temperature of one species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesMoments {
    pub n: f64,
    pub u: Vec3,
    pub t: f64,
}

impl SpeciesMoments {
    pub fn new(n: f64, u: Vec3, t: f64) -> Self {
        Self { n, u, t }
    }
}

/// Per-species moments together with the mixed inter-species quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub s1: SpeciesMoments,
    pub s2: SpeciesMoments,
    pub u12: Vec3,
    pub u21: Vec3,
    pub t12: f64,
    pub t21: f64,
}

impl MomentSet {
    /// `m1 (U12 - U1) + m2 (U21 - U2)`, which vanishes identically.
    pub fn momentum_exchange(&self, p: &MixtureParams) -> Vec3 {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = p.m1 * (self.u12[i] - self.s1.u[i]) + p.m2 * (self.u21[i] - self.s2.u[i]);
        }
        out
    }

    /// `3(T12 - T1) + 3(T21 - T2) + m1(|U12|^2 - |U1|^2) + m2(|U21|^2 - |U2|^2)`.
    pub fn energy_exchange(&self, p: &MixtureParams) -> f64 {
        3.0 * (self.t12 - self.s1.t)
            + 3.0 * (self.t21 - self.s2.t)
            + p.m1 * (norm_sq(&self.u12) - norm_sq(&self.s1.u))
            + p.m2 * (norm_sq(&self.u21) - norm_sq(&self.s2.u))
    }

    /// Component-wise mean of several moment sets.
    pub fn mean(sets: &[MomentSet]) -> Option<MomentSet> {
        let k = sets.len();
        if k == 0 {
            return None;
        }
        let inv = 1.0 / k as f64;
        let avg_s = |get: &dyn Fn(&MomentSet) -> &SpeciesMoments| {
            let mut s = SpeciesMoments::new(0.0, [0.0; 3], 0.0);
            for m in sets {
                let x = get(m);
                s.n += x.n * inv;
                s.t += x.t * inv;
                for i in 0..3 {
                    s.u[i] += x.u[i] * inv;
                }
            }
            s
        };
        let avg_v = |get: &dyn Fn(&MomentSet) -> Vec3| {
            let mut v = [0.0; 3];
            for m in sets {
                let x = get(m);
                for i in 0..3 {
                    v[i] += x[i] * inv;
                }
            }
            v
        };
        Some(MomentSet {
            s1: avg_s(&|m| &m.s1),
            s2: avg_s(&|m| &m.s2),
            u12: avg_v(&|m| m.u12),
            u21: avg_v(&|m| m.u21),
            t12: sets.iter().map(|m| m.t12).sum::<f64>() * inv,
            t21: sets.iter().map(|m| m.t21).sum::<f64>() * inv,
        })
    }
}

pub(crate) fn norm_sq(u: &Vec3) -> f64 {
    u[0] * u[0] + u[1] * u[1] + u[2] * u[2]
}

pub(crate) fn dist_sq(a: &Vec3, b: &Vec3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    norm_sq(&d)
}

/// Raw discrete moments `sum w F (1, v, |v|^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RawMoments {
    pub mass: f64,
    pub flux: Vec3,
    pub second: f64,
}

pub(crate) fn raw_moments(f: &[f64], grid: &VelocityGrid) -> RawMoments {
    let mut mass = 0.0;
    let mut flux = [0.0; 3];
    let mut second = 0.0;
    for (x, v) in f.iter().zip(grid.nodes()) {
        mass += x;
        flux[0] += x * v[0];
        flux[1] += x * v[1];
        flux[2] += x * v[2];
        second += x * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    }
    let w = grid.weights()[0];
    RawMoments {
        mass: w * mass,
        flux: [w * flux[0], w * flux[1], w * flux[2]],
        second: w * second,
    }
}

/// Density, bulk velocity and temperature of a gridded distribution.
///
/// The temperature uses the centred second moment, `T = (1/3n) sum w F m |v - U|^2`.
pub fn compute_moments(f: &[f64], m: f64, grid: &VelocityGrid) -> Result<SpeciesMoments> {
    if f.len() != grid.len() {
        return Err(Error::SizeMismatch {
            expected: grid.len(),
            got: f.len(),
        });
    }
    let raw = raw_moments(f, grid);
    if !(raw.mass > 0.0 && raw.mass.is_finite()) {
        return Err(Error::DegenerateCell {
            cell: 0,
            reason: format!("nonpositive mass {:e}", raw.mass),
        });
    }
    let n = raw.mass;
    let u = [raw.flux[0] / n, raw.flux[1] / n, raw.flux[2] / n];
    let w = grid.weights()[0];
    let mut c2 = 0.0;
    for (x, v) in f.iter().zip(grid.nodes()) {
        let d = [v[0] - u[0], v[1] - u[1], v[2] - u[2]];
        c2 += x * norm_sq(&d);
    }
    let t = m * w * c2 / (3.0 * n);
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::DegenerateCell {
            cell: 0,
            reason: format!("nonpositive temperature {t:e}"),
        });
    }
    Ok(SpeciesMoments { n, u, t })
}

/// Inter-species bulk velocities `(U12, U21)`.
pub fn mix_velocities(u1: &Vec3, u2: &Vec3, p: &MixtureParams) -> (Vec3, Vec3) {
    let d = p.delta;
    let a = p.mass_ratio() * (1.0 - d);
    let mut u12 = [0.0; 3];
    let mut u21 = [0.0; 3];
    for i in 0..3 {
        // Increment form keeps equal inputs exactly fixed.
        let gap = u1[i] - u2[i];
        u12[i] = u2[i] + d * gap;
        u21[i] = u2[i] + a * gap;
    }
    (u12, u21)
}

/// Deliberate assembly faults used to check that the verification suite
/// notices broken identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Flips the sign of `gamma` in the `T21` velocity-gap coefficient.
    FlipGammaT21,
}

impl Fault {
    pub fn name(self) -> &'static str {
        match self {
            Fault::None => "none",
            Fault::FlipGammaT21 => "flip-gamma-t21",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Fault::None),
            "flip-gamma-t21" => Some(Fault::FlipGammaT21),
            _ => None,
        }
    }

    pub const NAMES: [&'static str; 2] = ["none", "flip-gamma-t21"];
}

/// Coefficient of `|U2 - U1|^2` in `T21`.
pub fn t21_velocity_coefficient(p: &MixtureParams) -> f64 {
    let r = p.mass_ratio();
    let d = p.delta;
    p.m1 / 3.0 * (1.0 - d) * (r * (d - 1.0) + 1.0 + d) - p.gamma
}

/// Inter-species temperatures `(T12, T21)`.
pub fn mix_temperatures(mom1: &SpeciesMoments, mom2: &SpeciesMoments, p: &MixtureParams) -> (f64, f64) {
    mix_temperatures_with(mom1, mom2, p, Fault::None)
}

pub fn mix_temperatures_with(
    mom1: &SpeciesMoments,
    mom2: &SpeciesMoments,
    p: &MixtureParams,
    fault: Fault,
) -> (f64, f64) {
    let gap = dist_sq(&mom2.u, &mom1.u);
    let w = p.omega;
    let dt = mom1.t - mom2.t;
    let t12 = mom2.t + w * dt + p.gamma * gap;
    let coef = match fault {
        Fault::None => t21_velocity_coefficient(p),
        Fault::FlipGammaT21 => t21_velocity_coefficient(p) + 2.0 * p.gamma,
    };
    let t21 = mom2.t + (1.0 - w) * dt + coef * gap;
    assert!(
        t12 > 0.0 && t21 > 0.0,
        "mixed temperatures must be positive for admissible parameters: T12 = {t12}, T21 = {t21}"
    );
    (t12, t21)
}

/// Mixes two species' moments into a full [`MomentSet`].
pub fn mix_moments(s1: SpeciesMoments, s2: SpeciesMoments, p: &MixtureParams, fault: Fault) -> MomentSet {
    let (u12, u21) = mix_velocities(&s1.u, &s2.u, p);
    let (t12, t21) = mix_temperatures_with(&s1, &s2, p, fault);
    MomentSet {
        s1,
        s2,
        u12,
        u21,
        t12,
        t21,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_velocity_grid;
    use crate::mixture::maxwellian;
    use approx::assert_abs_diff_eq;

    #[test]
    fn velocity_mixing_hand_values() {
        let p = MixtureParams {
            m1: 2.0,
            m2: 1.0,
            delta: 0.5,
            ..Default::default()
        };
        let (u12, u21) = mix_velocities(&[1.0, 0.0, 0.0], &[0.0; 3], &p);
        assert_abs_diff_eq!(u12[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(u21[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn velocity_mixing_near_delta_one() {
        let p = MixtureParams {
            delta: 1.0 - 1e-12,
            ..Default::default()
        };
        let u1 = [0.3, -1.0, 2.0];
        let u2 = [-0.7, 0.5, 1.0];
        let (u12, u21) = mix_velocities(&u1, &u2, &p);
        let gap = dist_sq(&u1, &u2).sqrt();
        for i in 0..3 {
            assert!((u12[i] - u1[i]).abs() <= 1e-10 * gap);
            assert!((u21[i] - u2[i]).abs() <= 1e-10 * gap);
        }
    }

    #[test]
    fn equal_velocities_are_preserved() {
        let p = MixtureParams {
            m1: 5.0,
            m2: 2.0,
            delta: 0.6,
            ..Default::default()
        };
        let u = [0.25, -0.5, 0.125];
        let (u12, u21) = mix_velocities(&u, &u, &p);
        for i in 0..3 {
            assert_abs_diff_eq!(u12[i], u[i], epsilon = 1e-15);
            assert_abs_diff_eq!(u21[i], u[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn temperature_mixing_hand_values() {
        let p = MixtureParams::default();
        let s1 = SpeciesMoments::new(1.0, [1.0, 0.0, 0.0], 1.0);
        let s2 = SpeciesMoments::new(1.0, [0.0; 3], 2.0);
        let (t12, t21) = mix_temperatures(&s1, &s2, &p);
        assert_abs_diff_eq!(t12, 1.5, epsilon = 1e-15);
        // r(delta - 1) + 1 + delta = -0.5 + 1.5 = 1.
        assert_abs_diff_eq!(t21, 1.5 + (1.0 / 3.0) * 0.5 * 1.0, epsilon = 1e-15);
        let ms = mix_moments(s1, s2, &p, Fault::None);
        assert!(ms.energy_exchange(&p).abs() < 1e-14);
    }

    #[test]
    fn temperature_mixing_near_omega_one() {
        let p = MixtureParams {
            omega: 1.0 - 1e-12,
            ..Default::default()
        };
        let s1 = SpeciesMoments::new(1.0, [0.1; 3], 0.7);
        let s2 = SpeciesMoments::new(2.0, [0.1; 3], 1.9);
        let (t12, t21) = mix_temperatures(&s1, &s2, &p);
        assert_abs_diff_eq!(t12, 0.7, epsilon = 1e-10);
        assert_abs_diff_eq!(t21, 1.9, epsilon = 1e-10);
    }

    #[test]
    fn fault_changes_t21_only() {
        let p = MixtureParams {
            gamma: 0.05,
            ..Default::default()
        };
        let s1 = SpeciesMoments::new(1.0, [0.5, 0.0, 0.0], 1.0);
        let s2 = SpeciesMoments::new(1.0, [0.0; 3], 1.0);
        let a = mix_moments(s1, s2, &p, Fault::None);
        let b = mix_moments(s1, s2, &p, Fault::FlipGammaT21);
        assert_eq!(a.t12, b.t12);
        assert!(a.energy_exchange(&p).abs() < 1e-14);
        assert!(b.energy_exchange(&p).abs() > 1e-3);
    }

    #[test]
    fn zero_distribution_is_degenerate() {
        let g = make_velocity_grid(4.0, 8).unwrap();
        let f = vec![0.0; g.len()];
        assert!(matches!(compute_moments(&f, 1.0, &g), Err(Error::DegenerateCell { .. })));
    }

    #[test]
    fn shifted_maxwellian_moments() {
        let g = make_velocity_grid(6.0, 24).unwrap();
        let f = maxwellian(1.0, [0.3, 0.0, 0.0], 1.2, 2.0, &g).unwrap();
        let s = compute_moments(&f, 2.0, &g).unwrap();
        assert_abs_diff_eq!(s.n, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s.u[0], 0.3, epsilon = 1e-6);
        assert_abs_diff_eq!(s.u[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.t, 1.2, epsilon = 1e-6);
    }
}
