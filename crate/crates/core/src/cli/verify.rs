//! The property suite behind `mixbgk verify`.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::collision::{exchange_diagnostics, RelaxationSettings};
use crate::error::Result;
use crate::grid::{norm_sq_xv, DistributionPair, PairKind, PhaseGrid, VelocityGrid};
use crate::linear::{
    expected_kernel_dimension, kernel_dimension, nonlinear_remainder_with, perturbation_split, verification_grid_with,
    verify_jacobian, verify_linear_part, verify_mix_derivatives, BasisKind, LinearizedOperator, SpeciesBasis,
};
use crate::mixture::{
    equilibrium_profile, local_maxwellian, mix_moments, EquilibriumMode, Fault, MixtureParams, Regime, SpeciesMoments,
};
use crate::solver::{Scenario, ScenarioKind};

use super::config::VerifyConfig;

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    /// Worst measured residual (or the measured quantity for count checks).
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    fn upper(name: &str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.to_owned(),
            measured,
            tolerance,
            passed: measured <= tolerance,
            detail,
            seconds: 0.0,
        }
    }

    fn lower(name: &str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self {
            passed: measured >= tolerance,
            ..Self::upper(name, measured, tolerance, detail)
        }
    }

    fn failed(name: &str, err: impl std::fmt::Display) -> Self {
        Self {
            name: name.to_owned(),
            measured: f64::NAN,
            tolerance: f64::NAN,
            passed: false,
            detail: format!("error: {err}"),
            seconds: 0.0,
        }
    }
}

/// The whole suite's results.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Fixed-width pass/fail table.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<28} {:<6} {:>12} {:>12} {:>8}  detail", "check", "status", "measured", "tolerance", "seconds");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<28} {:<6} {:>12.3e} {:>12.3e} {:>8.2}  {}",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.measured,
                c.tolerance,
                c.seconds,
                c.detail
            );
        }
        let _ = writeln!(
            s,
            "overall: {}",
            if self.all_passed() { "PASS" } else { "FAIL" }
        );
        s
    }
}

fn timed(name: &str, f: impl FnOnce() -> Result<CheckResult>) -> CheckResult {
    let t0 = Instant::now();
    let mut r = f().unwrap_or_else(|e| CheckResult::failed(name, e));
    r.seconds = t0.elapsed().as_secs_f64();
    r
}

/// Admissible parameters with `1 <= m1/m2 <= max_ratio`; a quarter of the
/// draws put `gamma` exactly on its upper bound.
pub fn random_admissible_params(rng: &mut ChaCha8Rng, max_ratio: f64) -> MixtureParams {
    let m2 = rng.random_range(0.5..2.0);
    let m1 = m2 * rng.random_range(1.0..max_ratio);
    let mut p = MixtureParams {
        m1,
        m2,
        n10: rng.random_range(0.3..2.0),
        n20: rng.random_range(0.3..2.0),
        delta: 0.0,
        omega: rng.random_range(0.0..0.99),
        gamma: 0.0,
    };
    p.delta = rng.random_range(p.delta_lower_bound()..0.99);
    let frac = if rng.random_bool(0.25) { 1.0 } else { rng.random_range(0.0..1.0) };
    p.gamma = frac * p.gamma_upper_bound();
    p
}

fn random_moments(rng: &mut ChaCha8Rng, u_max: f64, t_range: (f64, f64)) -> SpeciesMoments {
    SpeciesMoments::new(
        rng.random_range(0.2..3.0),
        std::array::from_fn(|_| rng.random_range(-u_max..u_max)),
        rng.random_range(t_range.0..t_range.1),
    )
}

fn norm3(u: &[f64; 3]) -> f64 {
    (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Reference parameters with unequal masses and nonzero `gamma`, used next
/// to the configured mixture so the formulas are exercised off symmetry.
pub fn asymmetric_reference() -> MixtureParams {
    MixtureParams {
        m1: 2.0,
        m2: 1.0,
        n10: 1.3,
        n20: 0.7,
        delta: 0.4,
        omega: 0.3,
        gamma: 0.05,
    }
}

/// Mixing antisymmetries and positivity of the mixed temperatures over
/// random admissible parameter and moment draws.
pub fn check_mixing(draws: usize, seed: u64, fault: Fault) -> (CheckResult, CheckResult, CheckResult) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mom, mut en, mut t_min) = (0.0_f64, 0.0_f64, f64::INFINITY);
    for _ in 0..draws {
        let p = random_admissible_params(&mut rng, 4.0);
        let s1 = random_moments(&mut rng, 2.0, (0.2, 4.0));
        let s2 = random_moments(&mut rng, 2.0, (0.2, 4.0));
        let ms = mix_moments(s1, s2, &p, fault);
        let pscale = p.m1 * (1.0 + norm3(&s1.u)) + p.m2 * (1.0 + norm3(&s2.u));
        let escale = 3.0 * (s1.t + s2.t)
            + p.m1 * norm3(&s1.u).powi(2)
            + p.m2 * norm3(&s2.u).powi(2)
            + 1.0;
        mom = mom.max(ms.momentum_exchange(&p).iter().fold(0.0_f64, |a, x| a.max(x.abs())) / pscale);
        en = en.max(ms.energy_exchange(&p).abs() / escale);
        t_min = t_min.min(ms.t12.min(ms.t21));
    }
    let d = format!("{draws} draws, relative to the largest term");
    (
        CheckResult::upper("mixing momentum exchange", mom, 1e-12, d.clone()),
        CheckResult::upper("mixing energy exchange", en, 1e-12, d),
        CheckResult::lower("mixed temperatures > 0", t_min, f64::MIN_POSITIVE, format!("min(T12, T21) over {draws} draws")),
    )
}

/// Inter-species cancellation of the relaxation terms in moment-matched mode.
pub fn check_cancellation(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x63616e63);
    let mut worst = 0.0_f64;
    let mut settings = RelaxationSettings::new(EquilibriumMode::MomentMatched);
    settings.fault = cfg.fault;
    let draws = 20;
    for _ in 0..draws {
        let p = random_admissible_params(&mut rng, 3.0);
        let v = VelocityGrid::new(7.0 / p.m2.sqrt(), cfg.dissipation_n_per_axis)?;
        let grid = PhaseGrid::homogeneous(v);
        let s1 = random_moments(&mut rng, 0.4, (0.7, 1.4));
        let s2 = random_moments(&mut rng, 0.4, (0.7, 1.4));
        let f1 = local_maxwellian(&s1, p.m1, &grid.velocity, EquilibriumMode::MomentMatched)?;
        let f2 = local_maxwellian(&s2, p.m2, &grid.velocity, EquilibriumMode::MomentMatched)?;
        let f = DistributionPair::uniform(&grid, &f1, &f2, PairKind::Absolute)?;
        let r = exchange_diagnostics(&f, &p, &grid, &settings)?;
        let scale = s1.n * s2.n * (p.m1 + p.m2) * 10.0;
        worst = worst.max(r[0].max_abs() / scale);
    }
    Ok(CheckResult::upper(
        "relaxation cancellation",
        worst,
        1e-10,
        format!("{draws} moment-matched cells, relative"),
    ))
}

/// Gram matrices of the sampled and discretely orthonormalized bases.
pub fn check_gram(p: &MixtureParams, n: usize) -> Result<CheckResult> {
    let g = verification_grid_with(p, n);
    let mut sampled = 0.0_f64;
    let mut ortho = 0.0_f64;
    for k in 0..2 {
        sampled = sampled.max(SpeciesBasis::new(p, k, &g, BasisKind::Sampled).gram_defect(&g));
        ortho = ortho.max(SpeciesBasis::new(p, k, &g, BasisKind::Orthonormalized).gram_defect(&g));
    }
    let op = LinearizedOperator::new(p, &g, Regime::KernelStudy)?;
    ortho = ortho.max(op.mixture_basis().gram_defect(&g));
    let mut r = CheckResult::upper(
        "gram",
        ortho,
        1e-12,
        format!("sampled-basis quadrature defect {sampled:.3e} on {n}^3"),
    );
    r.passed &= sampled <= 1e-8;
    Ok(r)
}

pub fn check_derivatives(p: &MixtureParams, cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut worst = 0.0_f64;
    let mut which = String::new();
    for q in [*p, asymmetric_reference()] {
        let g = VelocityGrid::new(8.0 / q.m1.min(q.m2).sqrt(), cfg.derivative_n_per_axis)?;
        for r in verify_mix_derivatives(&q, &g, cfg.fd_step)? {
            if r.rel_error > worst {
                worst = r.rel_error;
                which = format!("d{}/d{}", r.maxwellian.name(), r.field.name());
            }
        }
    }
    Ok(CheckResult::upper(
        "mixed maxwellian derivatives",
        worst,
        1e-6,
        format!("10 formulas x 2 parameter sets, step {:e}, grid {}^3, worst {which}", cfg.fd_step, cfg.derivative_n_per_axis),
    ))
}

pub fn check_jacobian(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6a6163);
    let (mut inv, mut fd) = (0.0_f64, 0.0_f64);
    for _ in 0..200 {
        let n = rng.random_range(0.1..5.0);
        let u = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let t = rng.random_range(0.2..4.0);
        let m = rng.random_range(0.2..5.0);
        let r = verify_jacobian(n, u, t, m)?;
        inv = inv.max(r.inverse_residual);
        fd = fd.max(r.fd_residual);
    }
    let mut r = CheckResult::upper("moment jacobian", inv, 1e-12, format!("200 draws, finite-difference residual {fd:.3e} (tol 1e-6)"));
    r.passed &= fd <= 1e-6;
    Ok(r)
}

/// The dissipation inequality and its two partial estimates over random
/// parameter and perturbation draws.
pub fn check_dissipation(cfg: &VerifyConfig) -> Result<(CheckResult, CheckResult, CheckResult)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x646973);
    let (mut margin, mut partial, mut exchange) = (f64::INFINITY, 0.0_f64, f64::INFINITY);
    for _ in 0..cfg.draws {
        let p = random_admissible_params(&mut rng, 3.0);
        let v = VelocityGrid::new(6.0 / p.m2.sqrt(), cfg.dissipation_n_per_axis)?;
        let grid = PhaseGrid::homogeneous(v);
        let mut f = DistributionPair::zeros(&grid, PairKind::Perturbation);
        for k in 0..2 {
            f.species_mut(k).values_mut().iter_mut().for_each(|x| *x = normal(&mut rng));
        }
        let op = LinearizedOperator::new(&p, &grid.velocity, Regime::Strict)?;
        let r = op.dissipation(&f, &grid)?;
        let n2 = r.norm_sq;
        margin = margin.min(r.margin / n2);
        partial = partial.max((r.partial_lhs - r.partial_rhs).abs() / n2);
        exchange = exchange.min((r.exchange_rhs - r.exchange_lhs) / n2);
    }
    let d = format!("{} draws on {}^3, relative to |f|^2", cfg.draws, cfg.dissipation_n_per_axis);
    Ok((
        CheckResult::lower("dissipation inequality", margin, -1e-10, d.clone()),
        CheckResult::upper("dissipation species part", partial, 1e-10, d.clone()),
        CheckResult::lower("dissipation exchange part", exchange, -1e-10, d),
    ))
}

fn kernel_params(p: &MixtureParams, delta: f64, omega: f64) -> MixtureParams {
    let mut q = p.with_exchange(delta, omega);
    q.gamma = q.gamma.min(q.gamma_upper_bound().max(0.0));
    q
}

/// Kernel dimension at one `(delta, omega)`.
pub fn check_kernel_at(p: &MixtureParams, delta: f64, omega: f64) -> Result<CheckResult> {
    let q = kernel_params(p, delta, omega);
    let g = VelocityGrid::new(7.0 / q.m1.min(q.m2).sqrt(), 12)?;
    let r = kernel_dimension(&q, &g, 1e-6)?;
    let want = expected_kernel_dimension(delta, omega);
    let mut c = CheckResult::upper(
        &format!("kernel dim (d={delta}, w={omega})"),
        (r.dimension as f64 - want as f64).abs(),
        0.0,
        format!("dimension {} (expected {want}), relative threshold 1e-6", r.dimension),
    );
    c.measured = r.dimension as f64;
    c.tolerance = want as f64;
    c.passed = r.dimension == want;
    Ok(c)
}

pub fn check_taylor(p: &MixtureParams, seed: u64) -> Result<CheckResult> {
    let g = verification_grid_with(p, 24);
    let eps = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
    let mut worst = f64::INFINITY;
    for s in 0..3 {
        let r = verify_linear_part(p, &g, &eps, seed.wrapping_add(s))?;
        worst = worst.min(r.slope_12.min(r.slope_21));
    }
    Ok(CheckResult::lower(
        "linear part taylor order",
        worst,
        1.9,
        "fitted log-log slope over eps in [1e-3, 1e-1], 3 directions".into(),
    ))
}

/// Ratio of largest to smallest `|Gamma(eps f)| / eps^2`.
pub fn check_gamma_scaling(p: &MixtureParams, n: usize, seed: u64) -> Result<CheckResult> {
    let grid = PhaseGrid::homogeneous(verification_grid_with(p, n));
    let base = 0.5;
    let sc = Scenario::new(ScenarioKind::RandomSmooth, base, seed);
    let f_abs = sc.initial_state(p, &grid, EquilibriumMode::Sampled)?;
    let f = perturbation_split(&f_abs, p, &grid)?;
    let mut ratios = Vec::new();
    for e in [1e-1, 1e-2, 1e-3] {
        let g = nonlinear_remainder_with(&f.scaled(e / base), p, &grid, EquilibriumMode::MomentMatched)?;
        ratios.push(norm_sq_xv(&g, &grid)?.sqrt() / (e * e));
    }
    let hi = ratios.iter().copied().fold(f64::MIN, f64::max);
    let lo = ratios.iter().copied().fold(f64::MAX, f64::min);
    Ok(CheckResult::upper(
        "remainder quadratic scaling",
        hi / lo,
        1.2,
        format!(
            "|Gamma|/eps^2 at eps = 1e-1, 1e-2, 1e-3: {}",
            ratios.iter().map(|r| format!("{r:.4e}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

/// Collision invariants of `L f` against the sampled test functions.
pub fn check_l_conservation(p: &MixtureParams, n: usize, seed: u64) -> Result<CheckResult> {
    let v = verification_grid_with(p, n);
    let grid = PhaseGrid::homogeneous(v.clone());
    let op = LinearizedOperator::new(p, &v, Regime::KernelStudy)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x636f6e);
    let mut f = DistributionPair::zeros(&grid, PairKind::Perturbation);
    for k in 0..2 {
        f.species_mut(k).values_mut().iter_mut().for_each(|x| *x = normal(&mut rng));
    }
    let lf = op.apply(&f, &grid)?;
    let mu: [Vec<f64>; 2] = [
        equilibrium_profile(p, 0, &v, EquilibriumMode::Sampled)?,
        equilibrium_profile(p, 1, &v, EquilibriumMode::Sampled)?,
    ];
    let w = v.weights()[0];
    let dot = |k: usize, g: &dyn Fn(&[f64; 3]) -> f64| -> f64 {
        lf.species(k)
            .cell(0)
            .iter()
            .zip(v.nodes())
            .zip(&mu[k])
            .map(|((x, node), m)| x * g(node) * m.sqrt())
            .sum::<f64>()
            * w
    };
    let mut worst = dot(0, &|_| 1.0).abs().max(dot(1, &|_| 1.0).abs());
    for i in 0..3 {
        worst = worst.max((p.m1 * dot(0, &|x| x[i]) + p.m2 * dot(1, &|x| x[i])).abs());
    }
    let sq = |x: &[f64; 3]| x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    worst = worst.max((p.m1 * dot(0, &sq) + p.m2 * dot(1, &sq)).abs());
    Ok(CheckResult::upper(
        "linearized conservation",
        worst / lf.max_abs(),
        1e-8,
        format!("densities, momentum, energy of L f on {n}^3, relative to max|L f|"),
    ))
}

/// Runs the full suite, or only the kernel count at the configured `(delta, omega)`.
pub fn run_suite(p: &MixtureParams, cfg: &VerifyConfig) -> VerifyReport {
    let mut checks = Vec::new();
    if cfg.kernel_only {
        checks.push(timed("kernel dimension", || check_kernel_at(p, p.delta, p.omega)));
        return VerifyReport { checks };
    }
    // The suite is posed on the configured mixture; kernel corners are derived from it.
    let t0 = Instant::now();
    let (a, b, c) = check_mixing(cfg.mixing_draws, cfg.seed, cfg.fault);
    let secs = t0.elapsed().as_secs_f64();
    for mut r in [a, b, c] {
        r.seconds = secs;
        checks.push(r);
    }
    checks.push(timed("relaxation cancellation", || check_cancellation(cfg)));
    checks.push(timed("gram", || check_gram(p, cfg.n_per_axis)));
    checks.push(timed("mixed maxwellian derivatives", || check_derivatives(p, cfg)));
    checks.push(timed("moment jacobian", || check_jacobian(cfg)));
    let t0 = Instant::now();
    match check_dissipation(cfg) {
        Ok((a, b, c)) => {
            let secs = t0.elapsed().as_secs_f64();
            for mut r in [a, b, c] {
                r.seconds = secs;
                checks.push(r);
            }
        }
        Err(e) => checks.push(CheckResult::failed("dissipation inequality", e)),
    }
    for (d, o) in [(p.delta, p.omega), (1.0, p.omega), (p.delta, 1.0), (1.0, 1.0)] {
        checks.push(timed("kernel dimension", || check_kernel_at(p, d, o)));
    }
    checks.push(timed("linear part taylor order", || check_taylor(p, cfg.seed)));
    checks.push(timed("remainder quadratic scaling", || check_gamma_scaling(p, cfg.n_per_axis, cfg.seed)));
    checks.push(timed("linearized conservation", || check_l_conservation(p, cfg.n_per_axis, cfg.seed)));
    VerifyReport { checks }
}
