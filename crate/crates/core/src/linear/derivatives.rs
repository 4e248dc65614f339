//! Finite-difference checks of the Maxwellian derivative formulas, the moment
//! Jacobian and the first-order expansion of the inter-species Maxwellians.

use nalgebra::SMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{dot_v, VelocityGrid};
use crate::mixture::{maxwellian, mix_moments, Fault, MixtureParams, Regime, SpeciesMoments, Vec3};

use super::basis::{sampled_species_basis, BasisKind};
use super::operator::LinearizedOperator;

pub type Matrix5 = SMatrix<f64, 5, 5>;

/// Which inter-species Maxwellian a derivative belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedMaxwellian {
    M12,
    M21,
}

impl MixedMaxwellian {
    pub fn name(self) -> &'static str {
        match self {
            MixedMaxwellian::M12 => "M12",
            MixedMaxwellian::M21 => "M21",
        }
    }
}

/// Macroscopic field a derivative is taken with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    N1,
    U1,
    T1,
    N2,
    U2,
    T2,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::N1 => "n1",
            Field::U1 => "U1",
            Field::T1 => "T1",
            Field::N2 => "n2",
            Field::U2 => "U2",
            Field::T2 => "T2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeResidual {
    pub maxwellian: MixedMaxwellian,
    pub field: Field,
    /// Max-norm error relative to the closed form, at the requested step.
    pub rel_error: f64,
    /// Same at half the step; central differences should be about 4x smaller.
    pub rel_error_half_step: f64,
}

/// State of both species' macroscopic fields.
#[derive(Debug, Clone, Copy)]
struct Fields {
    s: [SpeciesMoments; 2],
}

impl Fields {
    fn reference(p: &MixtureParams) -> Self {
        Self {
            s: [
                SpeciesMoments::new(p.n10, [0.0; 3], 1.0),
                SpeciesMoments::new(p.n20, [0.0; 3], 1.0),
            ],
        }
    }

    fn get_mut(&mut self, field: Field, comp: usize) -> &mut f64 {
        match field {
            Field::N1 => &mut self.s[0].n,
            Field::U1 => &mut self.s[0].u[comp],
            Field::T1 => &mut self.s[0].t,
            Field::N2 => &mut self.s[1].n,
            Field::U2 => &mut self.s[1].u[comp],
            Field::T2 => &mut self.s[1].t,
        }
    }

    fn mixed(&self, which: MixedMaxwellian, p: &MixtureParams, grid: &VelocityGrid) -> Result<Vec<f64>> {
        let ms = mix_moments(self.s[0], self.s[1], p, Fault::None);
        match which {
            MixedMaxwellian::M12 => maxwellian(ms.s1.n, ms.u12, ms.t12, p.m1, grid),
            MixedMaxwellian::M21 => maxwellian(ms.s2.n, ms.u21, ms.t21, p.m2, grid),
        }
    }
}

/// Closed-form derivative of `M12` or `M21` at the global equilibrium with
/// respect to one field (component `comp` for velocities).
pub fn closed_form_derivative(
    which: MixedMaxwellian,
    field: Field,
    comp: usize,
    p: &MixtureParams,
    grid: &VelocityGrid,
) -> Result<Vec<f64>> {
    let (k, own, other) = match which {
        MixedMaxwellian::M12 => (0, [Field::N1, Field::U1, Field::T1], [Field::N2, Field::U2, Field::T2]),
        MixedMaxwellian::M21 => (1, [Field::N2, Field::U2, Field::T2], [Field::N1, Field::U1, Field::T1]),
    };
    let m = p.mass(k);
    let mu = maxwellian(p.n0(k), [0.0; 3], 1.0, m, grid)?;
    let r = p.mass_ratio();
    // Weights of the own and the other species' velocity / temperature.
    let (u_own, u_other) = match which {
        MixedMaxwellian::M12 => (p.delta, 1.0 - p.delta),
        MixedMaxwellian::M21 => (1.0 - r * (1.0 - p.delta), r * (1.0 - p.delta)),
    };
    let (t_own, t_other) = (p.omega, 1.0 - p.omega);
    let nodes = grid.nodes();
    let out = mu
        .iter()
        .zip(nodes)
        .map(|(mu, v)| {
            let v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            let thermal = 0.5 * (m * v2 - 3.0) * mu;
            if field == own[0] {
                mu / p.n0(k)
            } else if field == own[1] {
                u_own * m * v[comp] * mu
            } else if field == own[2] {
                t_own * thermal
            } else if field == other[1] {
                u_other * m * v[comp] * mu
            } else if field == other[2] {
                t_other * thermal
            } else {
                0.0
            }
        })
        .collect();
    Ok(out)
}

fn derivative_error(
    which: MixedMaxwellian,
    field: Field,
    p: &MixtureParams,
    grid: &VelocityGrid,
    step: f64,
) -> Result<f64> {
    let base = Fields::reference(p);
    let comps = if matches!(field, Field::U1 | Field::U2) { 3 } else { 1 };
    let k = if which == MixedMaxwellian::M12 { 0 } else { 1 };
    let mu_peak = p.n0(k) * (p.mass(k) / (2.0 * std::f64::consts::PI)).powf(1.5);
    let mut worst = 0.0_f64;
    for comp in 0..comps {
        let mut plus = base;
        let mut minus = base;
        let x0 = *plus.get_mut(field, comp);
        let h = step * x0.abs().max(1.0);
        *plus.get_mut(field, comp) = x0 + h;
        *minus.get_mut(field, comp) = x0 - h;
        let fp = plus.mixed(which, p, grid)?;
        let fm = minus.mixed(which, p, grid)?;
        let exact = closed_form_derivative(which, field, comp, p, grid)?;
        let scale = exact.iter().fold(0.0_f64, |a, x| a.max(x.abs())).max(1e-8 * mu_peak);
        let err = fp
            .iter()
            .zip(&fm)
            .zip(&exact)
            .fold(0.0_f64, |a, ((x, y), e)| a.max(((x - y) / (2.0 * h) - e).abs()));
        worst = worst.max(err / scale);
    }
    Ok(worst)
}

/// Central-difference check of the ten derivative formulas of `M12` and `M21`
/// at the global equilibrium (the `theta = 0` end of the transition).
pub fn verify_mix_derivatives(p: &MixtureParams, grid: &VelocityGrid, step: f64) -> Result<Vec<DerivativeResidual>> {
    if !(1e-7..=1e-3).contains(&step) {
        return Err(Error::InvalidInput(format!("step must lie in [1e-7, 1e-3], got {step}")));
    }
    p.check(Regime::KernelStudy)?;
    let list = [
        (MixedMaxwellian::M12, [Field::N1, Field::U1, Field::T1, Field::U2, Field::T2]),
        (MixedMaxwellian::M21, [Field::N2, Field::U2, Field::T2, Field::U1, Field::T1]),
    ];
    let mut out = Vec::new();
    for (which, fields) in list {
        for field in fields {
            out.push(DerivativeResidual {
                maxwellian: which,
                field,
                rel_error: derivative_error(which, field, p, grid, step)?,
                rel_error_half_step: derivative_error(which, field, p, grid, step / 2.0)?,
            });
        }
    }
    Ok(out)
}

/// Closed-form Jacobian of `(n, nU, G)` with respect to `(n, U, T)`, where
/// `G = (3nT + mn|U|^2 - 3n) / sqrt(6)`.
pub fn moment_jacobian(n: f64, u: Vec3, t: f64, m: f64) -> Matrix5 {
    let s6 = 6.0_f64.sqrt();
    let u2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let mut j = Matrix5::zeros();
    j[(0, 0)] = 1.0;
    for i in 0..3 {
        j[(1 + i, 0)] = u[i];
        j[(1 + i, 1 + i)] = n;
        j[(4, 1 + i)] = 2.0 * n * u[i] * m / s6;
    }
    j[(4, 0)] = (3.0 * t + m * u2 - 3.0) / s6;
    j[(4, 4)] = 3.0 * n / s6;
    j
}

/// Closed-form inverse of [`moment_jacobian`].
pub fn moment_jacobian_inverse(n: f64, u: Vec3, t: f64, m: f64) -> Matrix5 {
    let u2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let mut j = Matrix5::zeros();
    j[(0, 0)] = 1.0;
    for i in 0..3 {
        j[(1 + i, 0)] = -u[i] / n;
        j[(1 + i, 1 + i)] = 1.0 / n;
        j[(4, 1 + i)] = -2.0 * m / 3.0 * u[i] / n;
    }
    j[(4, 0)] = (m * u2 - 3.0 * t + 3.0) / (3.0 * n);
    j[(4, 4)] = (2.0_f64 / 3.0).sqrt() / n;
    j
}

fn moment_map(x: &[f64; 5], m: f64) -> [f64; 5] {
    let (n, u, t) = (x[0], [x[1], x[2], x[3]], x[4]);
    let u2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    [n, n * u[0], n * u[1], n * u[2], (3.0 * n * t + m * n * u2 - 3.0 * n) / 6.0_f64.sqrt()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianResidual {
    /// `max |J J^{-1} - I|`.
    pub inverse_residual: f64,
    /// `max |J_fd - J|`.
    pub fd_residual: f64,
}

pub fn verify_jacobian(n: f64, u: Vec3, t: f64, m: f64) -> Result<JacobianResidual> {
    verify_jacobian_with_step(n, u, t, m, 1e-5)
}

pub fn verify_jacobian_with_step(n: f64, u: Vec3, t: f64, m: f64, step: f64) -> Result<JacobianResidual> {
    if !(n > 0.0 && t > 0.0 && m > 0.0) {
        return Err(Error::InvalidInput(format!(
            "Jacobian check needs n, T, m > 0 (n = {n}, T = {t}, m = {m})"
        )));
    }
    let j = moment_jacobian(n, u, t, m);
    let ji = moment_jacobian_inverse(n, u, t, m);
    let inverse_residual = (j * ji - Matrix5::identity()).amax();
    let x0 = [n, u[0], u[1], u[2], t];
    let mut fd = Matrix5::zeros();
    for c in 0..5 {
        let h = step * x0[c].abs().max(1.0);
        let mut xp = x0;
        let mut xm = x0;
        xp[c] += h;
        xm[c] -= h;
        let (yp, ym) = (moment_map(&xp, m), moment_map(&xm, m));
        for r in 0..5 {
            fd[(r, c)] = (yp[r] - ym[r]) / (2.0 * h);
        }
    }
    Ok(JacobianResidual {
        inverse_residual,
        fd_residual: (fd - j).amax(),
    })
}

/// Taylor-remainder sizes of the first-order expansion of `M12` and `M21`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPartReport {
    pub amplitudes: Vec<f64>,
    /// `|R(eps)|` in the discrete `L^2_v` norm, for `M12` and `M21`.
    pub remainder_12: Vec<f64>,
    pub remainder_21: Vec<f64>,
    /// Fitted slopes of `log |R|` against `log eps`.
    pub slope_12: f64,
    pub slope_21: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Perturbation moments `<f, sqrt mu>`, `<f, v sqrt mu>`, `<f, (m|v|^2 - 3) sqrt mu> / sqrt 6`
/// turned into `(n, U, T)` about the reference state `(n0, 0, 1)`.
fn moments_from_perturbation(f: &[f64], sqrt_mu: &[f64], n0: f64, m: f64, grid: &VelocityGrid) -> SpeciesMoments {
    let w = grid.weights()[0];
    let mut rho = 0.0;
    let mut j = [0.0; 3];
    let mut g = 0.0;
    for ((x, s), v) in f.iter().zip(sqrt_mu).zip(grid.nodes()) {
        let xs = x * s;
        rho += xs;
        for i in 0..3 {
            j[i] += v[i] * xs;
        }
        g += (m * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) - 3.0) * xs;
    }
    let n = n0 + w * rho;
    let u = [w * j[0] / n, w * j[1] / n, w * j[2] / n];
    let gg = w * g / 6.0_f64.sqrt();
    let u2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let t = (6.0_f64.sqrt() * gg + 3.0 * n - m * n * u2) / (3.0 * n);
    SpeciesMoments::new(n, u, t)
}

/// First-order parts of `M12 / sqrt(mu1)` and `M21 / sqrt(mu2)`, assembled
/// from the closed-form expansion with the sampled moment functions:
/// `P1 f1 + (1-delta) sum_i (c <f2,e2i> - <f1,e1i>) e1i + (1-omega)(d <f2,e25> - <f1,e15>) e15`
/// and its counterpart for species 2.
pub fn linear_parts(p: &MixtureParams, grid: &VelocityGrid, f1: &[f64], f2: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (e1, _) = sampled_species_basis(p, 0, grid);
    let (e2, _) = sampled_species_basis(p, 1, grid);
    linear_parts_with(p, grid, &e1, &e2, f1, f2)
}

fn linear_parts_with(
    p: &MixtureParams,
    grid: &VelocityGrid,
    e1: &[Vec<f64>; 5],
    e2: &[Vec<f64>; 5],
    f1: &[f64],
    f2: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let b1: [f64; 5] = std::array::from_fn(|i| dot_v(f1, &e1[i], grid));
    let b2: [f64; 5] = std::array::from_fn(|i| dot_v(f2, &e2[i], grid));
    let d = (p.n10 / p.n20).sqrt();
    let c = d * p.mass_ratio().sqrt();
    let r = p.mass_ratio();
    let mut a1 = b1;
    let mut a2 = b2;
    for i in 1..4 {
        a1[i] += (1.0 - p.delta) * (c * b2[i] - b1[i]);
        a2[i] += r * (1.0 - p.delta) * (b1[i] / c - b2[i]);
    }
    a1[4] += (1.0 - p.omega) * (d * b2[4] - b1[4]);
    a2[4] += (1.0 - p.omega) * (b1[4] / d - b2[4]);
    let combine = |a: &[f64; 5], e: &[Vec<f64>; 5]| {
        let mut out = vec![0.0; grid.len()];
        for (ai, ei) in a.iter().zip(e) {
            for (o, x) in out.iter_mut().zip(ei) {
                *o += ai * x;
            }
        }
        out
    };
    (combine(&a1, e1), combine(&a2, e2))
}

/// Measures `|(M12(F(eps)) - mu1) / sqrt(mu1) - linear part|` for a random
/// smooth moment perturbation of size `eps`, and the same for `M21`.
///
/// The perturbed state is a pair of Maxwellians; its moments are taken
/// relative to the exact reference state so the remainder contains no
/// quadrature offset and is a pure Taylor remainder.
pub fn verify_linear_part(
    p: &MixtureParams,
    grid: &VelocityGrid,
    amplitudes: &[f64],
    seed: u64,
) -> Result<LinearPartReport> {
    p.check(Regime::Strict)?;
    if amplitudes.len() < 2 {
        return Err(Error::InvalidInput("need at least two amplitudes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let dirs: [(f64, Vec3, f64); 2] = std::array::from_fn(|_| {
        let dn: f64 = draw();
        let du = [draw(), draw(), draw()];
        let dt = draw();
        (dn, du, dt)
    });
    let scale = dirs
        .iter()
        .flat_map(|(a, b, c)| [*a, b[0], b[1], b[2], *c])
        .fold(0.0_f64, |m, x| m.max(x.abs()));

    let (e1, sq1) = sampled_species_basis(p, 0, grid);
    let (e2, sq2) = sampled_species_basis(p, 1, grid);
    let sq = [sq1, sq2];
    let mu: [Vec<f64>; 2] = [
        maxwellian(p.n10, [0.0; 3], 1.0, p.m1, grid)?,
        maxwellian(p.n20, [0.0; 3], 1.0, p.m2, grid)?,
    ];

    let mut rem12 = Vec::new();
    let mut rem21 = Vec::new();
    for &eps in amplitudes {
        let mut f: [Vec<f64>; 2] = Default::default();
        for k in 0..2 {
            let (dn, du, dt) = dirs[k];
            let a = eps / scale;
            let fk = maxwellian(
                p.n0(k) * (1.0 + a * dn),
                [a * du[0], a * du[1], a * du[2]],
                1.0 + a * dt,
                p.mass(k),
                grid,
            )?;
            f[k] = fk.iter().zip(&mu[k]).zip(&sq[k]).map(|((x, m), s)| (x - m) / s).collect();
        }
        let s1 = moments_from_perturbation(&f[0], &sq[0], p.n10, p.m1, grid);
        let s2 = moments_from_perturbation(&f[1], &sq[1], p.n20, p.m2, grid);
        let ms = mix_moments(s1, s2, p, Fault::None);
        let m12 = maxwellian(ms.s1.n, ms.u12, ms.t12, p.m1, grid)?;
        let m21 = maxwellian(ms.s2.n, ms.u21, ms.t21, p.m2, grid)?;
        let (l1, l2) = linear_parts_with(p, grid, &e1, &e2, &f[0], &f[1]);
        let remainder = |mm: &[f64], k: usize, lin: &[f64]| {
            let r: Vec<f64> = mm
                .iter()
                .zip(&mu[k])
                .zip(&sq[k])
                .zip(lin)
                .map(|(((x, m), s), l)| (x - m) / s - l)
                .collect();
            dot_v(&r, &r, grid).sqrt()
        };
        rem12.push(remainder(&m12, 0, &l1));
        rem21.push(remainder(&m21, 1, &l2));
    }
    let slope = |r: &[f64]| {
        if r.iter().all(|&x| x > 0.0) {
            loglog_slope(amplitudes, r)
        } else {
            f64::NAN
        }
    };
    Ok(LinearPartReport {
        amplitudes: amplitudes.to_vec(),
        slope_12: slope(&rem12),
        slope_21: slope(&rem21),
        remainder_12: rem12,
        remainder_21: rem21,
    })
}

/// Largest difference between `n20 (lin12 - f1)` from the closed-form
/// expansion and `L12^1 + L12^2` from the operator (and likewise for species 2),
/// relative to the size of the operator output.
pub fn cross_check_linear_part(p: &MixtureParams, grid: &VelocityGrid, f1: &[f64], f2: &[f64]) -> Result<f64> {
    let op = LinearizedOperator::with_basis(p, grid, Regime::KernelStudy, BasisKind::Orthonormalized)?;
    let parts = op.apply_parts_cell(f1, f2);
    let (l1, l2) = linear_parts(p, grid, f1, f2);
    let mut worst = 0.0_f64;
    let mut size = 0.0_f64;
    for j in 0..f1.len() {
        let a = p.n20 * (l1[j] - f1[j]);
        let b = parts.l12_1[j] + parts.l12_2[j];
        let c = p.n10 * (l2[j] - f2[j]);
        let d = parts.l21_1[j] + parts.l21_2[j];
        worst = worst.max((a - b).abs()).max((c - d).abs());
        size = size.max(b.abs()).max(d.abs());
    }
    Ok(worst / size.max(f64::MIN_POSITIVE))
}
