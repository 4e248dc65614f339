use std::f64::consts::PI;

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::grid::{DistributionPair, PairKind, PhaseGrid, VelocityGrid};

use super::moments::{raw_moments, norm_sq, SpeciesMoments, Vec3};
use super::params::MixtureParams;

/// How local and global equilibria are represented on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumMode {
    /// The continuous Maxwellian evaluated at the nodes.
    Sampled,
    /// An exponential of a quadratic whose discrete moments match the
    /// prescribed ones exactly.
    MomentMatched,
}

impl EquilibriumMode {
    pub fn name(self) -> &'static str {
        match self {
            EquilibriumMode::Sampled => "sampled",
            EquilibriumMode::MomentMatched => "moment-matched",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sampled" => Some(EquilibriumMode::Sampled),
            "moment-matched" => Some(EquilibriumMode::MomentMatched),
            _ => None,
        }
    }

    pub const NAMES: [&'static str; 2] = ["sampled", "moment-matched"];
}

/// Continuous Maxwellian `n (m / 2 pi T)^{3/2} exp(-m |v - U|^2 / 2T)` sampled at the nodes.
pub fn maxwellian(n: f64, u: Vec3, t: f64, m: f64, grid: &VelocityGrid) -> Result<Vec<f64>> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidInput(format!("Maxwellian density must be positive, got {n}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("Maxwellian temperature must be positive, got {t}")));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidInput(format!("mass must be positive, got {m}")));
    }
    let k = m / (2.0 * t);
    let pre = n * (m / (2.0 * PI * t)).powf(1.5);
    let factor = |d: usize| -> Vec<f64> {
        grid.axis()
            .iter()
            .map(|&x| {
                let y = x - u[d];
                (-k * y * y).exp()
            })
            .collect()
    };
    let mut gx = factor(0);
    gx.iter_mut().for_each(|g| *g *= pre);
    Ok(grid.tensor(&gx, &factor(1), &factor(2)))
}

/// Prescribed discrete moments `sum w G (1, v, m |v|^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTargets {
    pub mass: f64,
    pub momentum: Vec3,
    pub energy: f64,
}

impl MomentTargets {
    /// Targets of a Maxwellian with density `n`, velocity `u`, temperature `t`:
    /// `(n, n u, 3 n t + m n |u|^2)`.
    pub fn from_moments(s: &SpeciesMoments, m: f64) -> Self {
        Self {
            mass: s.n,
            momentum: [s.n * s.u[0], s.n * s.u[1], s.n * s.u[2]],
            energy: 3.0 * s.n * s.t + m * s.n * norm_sq(&s.u),
        }
    }

    /// Discrete moments of a gridded function.
    pub fn of(f: &[f64], m: f64, grid: &VelocityGrid) -> Self {
        let raw = raw_moments(f, grid);
        Self {
            mass: raw.mass,
            momentum: raw.flux,
            energy: m * raw.second,
        }
    }
}

/// Result of the moment-matching solve.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMaxwellian {
    pub values: Vec<f64>,
    /// Parameters of `exp(alpha + beta . v + gamma |v|^2)`.
    pub alpha: f64,
    pub beta: Vec3,
    pub gamma: f64,
    pub iterations: usize,
    /// Final max moment residual relative to the target mass.
    pub residual: f64,
}

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;

/// Per-axis data for the separable solve, in the centred and scaled
/// coordinate `xi = (v - U) / s`.
struct AxisSums {
    g: [Vec<f64>; 3],
    /// `A_d^k / A_d^0` for `k = 1..=4`.
    norm: [[f64; 5]; 3],
    /// `prod_d A_d^0`.
    a0: f64,
}

fn axis_sums(xi: &[Vec<f64>; 3], b: &[f64; 3], c: f64) -> AxisSums {
    let n = xi[0].len();
    let mut g: [Vec<f64>; 3] = Default::default();
    let mut norm = [[0.0; 5]; 3];
    let mut a0 = 1.0;
    for d in 0..3 {
        let gd: Vec<f64> = xi[d].iter().map(|&x| (b[d] * x + c * x * x).exp()).collect();
        let mut s = [0.0; 5];
        // Pair mirror nodes so that odd sums of even profiles cancel exactly.
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let (xa, xb) = (xi[d][i], xi[d][j]);
            let (ga, gb) = (gd[i], gd[j]);
            let (mut pa, mut pb) = (ga, gb);
            for sk in s.iter_mut() {
                *sk += pa + pb;
                pa *= xa;
                pb *= xb;
            }
        }
        if n % 2 == 1 {
            let (x, gv) = (xi[d][n / 2], gd[n / 2]);
            let mut pv = gv;
            for sk in s.iter_mut() {
                *sk += pv;
                pv *= x;
            }
        }
        a0 *= s[0];
        for k in 0..5 {
            norm[d][k] = s[k] / s[0];
        }
        g[d] = gd;
    }
    AxisSums { g, norm, a0 }
}

struct Eval {
    sums: AxisSums,
    scale: f64,
    residual: [f64; 5],
    err: f64,
}

fn evaluate(a: f64, b: &[f64; 3], c: f64, xi: &[Vec<f64>; 3], w: f64, mass: f64) -> Eval {
    let sums = axis_sums(xi, b, c);
    let scale = a.exp() * w * sums.a0;
    let m = &sums.norm;
    let s2: f64 = (0..3).map(|d| m[d][2]).sum();
    let residual = [
        scale - mass,
        scale * m[0][1],
        scale * m[1][1],
        scale * m[2][1],
        scale * s2 - 3.0 * mass,
    ];
    let err = residual.iter().fold(0.0_f64, |e, r| e.max(r.abs())) / mass;
    Eval {
        sums,
        scale,
        residual,
        err: if err.is_finite() { err } else { f64::INFINITY },
    }
}

fn jacobian(e: &Eval) -> SMatrix<f64, 5, 5> {
    let m = &e.sums.norm;
    let p = e.scale;
    let s2: f64 = (0..3).map(|d| m[d][2]).sum();
    let mut j = SMatrix::<f64, 5, 5>::zeros();
    j[(0, 0)] = p;
    j[(0, 4)] = p * s2;
    for d in 0..3 {
        j[(0, 1 + d)] = p * m[d][1];
        for e2 in 0..3 {
            j[(1 + d, 1 + e2)] = if d == e2 { p * m[d][2] } else { p * m[d][1] * m[e2][1] };
        }
        let others: f64 = (0..3).filter(|&e2| e2 != d).map(|e2| m[e2][2]).sum();
        j[(1 + d, 4)] = p * (m[d][3] + m[d][1] * others);
    }
    let mut quartic: f64 = (0..3).map(|d| m[d][4]).sum();
    for d in 0..3 {
        for e2 in 0..3 {
            if d != e2 {
                quartic += m[d][2] * m[e2][2];
            }
        }
    }
    j[(4, 4)] = p * quartic;
    for r in 0..5 {
        for c in 0..r {
            j[(r, c)] = j[(c, r)];
        }
    }
    j
}

/// Finds `G = exp(alpha + beta . v + gamma |v|^2)` whose discrete moments
/// `sum w G (1, v, m |v|^2)` equal `targets` to a relative `1e-12`.
///
/// The unknowns are solved for in the coordinate `xi = (v - U) / sqrt(T / m)`,
/// where `U` and `T` are the velocity and temperature implied by the targets;
/// the continuous Maxwellian is then the initial guess and the Jacobian is
/// close to a fixed, well-conditioned matrix. Because the lattice is a tensor
/// product and `G` is separable, all moments reduce to per-axis sums.
pub fn discrete_maxwellian(targets: &MomentTargets, m: f64, grid: &VelocityGrid) -> Result<DiscreteMaxwellian> {
    let n = targets.mass;
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InfeasibleTarget(format!("target mass must be positive, got {n}")));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidInput(format!("mass must be positive, got {m}")));
    }
    let u = [targets.momentum[0] / n, targets.momentum[1] / n, targets.momentum[2] / n];
    let internal = targets.energy - m * n * norm_sq(&u);
    if !(internal > 0.0 && internal.is_finite()) {
        return Err(Error::InfeasibleTarget(format!(
            "target internal energy must be positive, got {internal:e}"
        )));
    }
    let t = internal / (3.0 * n);
    let s = (t / m).sqrt();

    let xi: [Vec<f64>; 3] = std::array::from_fn(|d| grid.axis().iter().map(|&x| (x - u[d]) / s).collect());
    let w = grid.weights()[0];

    let mut a = (n / ((2.0 * PI).powf(1.5) * s.powi(3))).ln();
    let mut b = [0.0; 3];
    let mut c = -0.5;
    let mut cur = evaluate(a, &b, c, &xi, w, n);
    let mut iterations = 0;
    let mut polish = 0;

    while iterations < NEWTON_MAX_ITER {
        if cur.err <= NEWTON_TOL {
            // A couple of extra steps buy the last digits when they still help.
            polish += 1;
            if polish > 3 {
                break;
            }
        }
        iterations += 1;
        let jac = jacobian(&cur);
        let rhs = SVector::<f64, 5>::from_column_slice(&cur.residual);
        let step = match jac.cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => match jac.lu().solve(&rhs) {
                Some(x) => x,
                None => break,
            },
        };
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let ta = a - lambda * step[0];
            let tb = [b[0] - lambda * step[1], b[1] - lambda * step[2], b[2] - lambda * step[3]];
            let tc = c - lambda * step[4];
            let trial = evaluate(ta, &tb, tc, &xi, w, n);
            if trial.err < cur.err {
                accepted = Some((ta, tb, tc, trial));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((ta, tb, tc, trial)) => {
                a = ta;
                b = tb;
                c = tc;
                cur = trial;
            }
            None => break,
        }
    }

    if !(cur.err <= NEWTON_TOL) {
        return Err(Error::InfeasibleTarget(format!(
            "moment matching did not converge: residual {:e} after {iterations} iterations",
            cur.err
        )));
    }
    if c >= 0.0 {
        return Err(Error::InfeasibleTarget(format!(
            "moment matching produced a non-decaying exponent ({c})"
        )));
    }

    let ea = a.exp();
    let mut gx = cur.sums.g[0].clone();
    gx.iter_mut().for_each(|g| *g *= ea);
    let values = grid.tensor(&gx, &cur.sums.g[1], &cur.sums.g[2]);
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::InfeasibleTarget("moment matching produced non-finite values".into()));
    }

    let s2 = s * s;
    let gamma = c / s2;
    let beta = [
        b[0] / s - 2.0 * c * u[0] / s2,
        b[1] / s - 2.0 * c * u[1] / s2,
        b[2] / s - 2.0 * c * u[2] / s2,
    ];
    let alpha = a - (b[0] * u[0] + b[1] * u[1] + b[2] * u[2]) / s + c * norm_sq(&u) / s2;
    Ok(DiscreteMaxwellian {
        values,
        alpha,
        beta,
        gamma,
        iterations,
        residual: cur.err,
    })
}

/// Local Maxwellian with the given density, velocity and temperature in the
/// requested representation.
pub fn local_maxwellian(
    s: &SpeciesMoments,
    m: f64,
    grid: &VelocityGrid,
    mode: EquilibriumMode,
) -> Result<Vec<f64>> {
    match mode {
        EquilibriumMode::Sampled => maxwellian(s.n, s.u, s.t, m, grid),
        EquilibriumMode::MomentMatched => {
            Ok(discrete_maxwellian(&MomentTargets::from_moments(s, m), m, grid)?.values)
        }
    }
}

/// Global equilibrium `mu_k = n_k0 (m_k / 2 pi)^{3/2} exp(-m_k |v|^2 / 2)` of one species.
pub fn equilibrium_profile(
    p: &MixtureParams,
    species: usize,
    grid: &VelocityGrid,
    mode: EquilibriumMode,
) -> Result<Vec<f64>> {
    let s = SpeciesMoments::new(p.n0(species), [0.0; 3], 1.0);
    local_maxwellian(&s, p.mass(species), grid, mode)
}

/// The sampled global equilibria `(mu_1, mu_2)`, constant in space.
pub fn global_equilibria(p: &MixtureParams, grid: &PhaseGrid) -> Result<DistributionPair> {
    global_equilibria_with(p, grid, EquilibriumMode::Sampled)
}

pub fn global_equilibria_with(p: &MixtureParams, grid: &PhaseGrid, mode: EquilibriumMode) -> Result<DistributionPair> {
    let mu1 = equilibrium_profile(p, 0, &grid.velocity, mode)?;
    let mu2 = equilibrium_profile(p, 1, &grid.velocity, mode)?;
    DistributionPair::uniform(grid, &mu1, &mu2, PairKind::Absolute)
}
