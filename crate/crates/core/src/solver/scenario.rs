use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::collision::ConservedTotals;
use crate::error::{Error, Result};
use crate::grid::{DistributionPair, GridFunction, PairKind, PhaseGrid};
use crate::mixture::{equilibrium_profile, local_maxwellian, EquilibriumMode, MixtureParams, SpeciesMoments, Vec3};

/// Shipped initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScenarioKind {
    /// The global equilibria `(mu_1, mu_2)`.
    Equilibrium,
    /// `T1 = 1 + eps`, `T2 = 1 - eps`, at rest with reference densities.
    TemperatureGap,
    /// `U1 = (eps, 0, 0)`, `U2 = (-eps, 0, 0)`, unit temperatures.
    CounterFlow,
    /// Species-1 density `n10 (1 + eps sin(2 pi x / L))`.
    SinusoidalDensity,
    /// Seeded band-limited random perturbation of relative size `eps`.
    #[default]
    RandomSmooth,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Equilibrium => "equilibrium",
            ScenarioKind::TemperatureGap => "temperature-gap",
            ScenarioKind::CounterFlow => "counter-flow",
            ScenarioKind::SinusoidalDensity => "sinusoidal-density",
            ScenarioKind::RandomSmooth => "random-smooth",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::Equilibrium,
        ScenarioKind::TemperatureGap,
        ScenarioKind::CounterFlow,
        ScenarioKind::SinusoidalDensity,
        ScenarioKind::RandomSmooth,
    ];

    pub const NAMES: [&'static str; 5] = [
        "equilibrium",
        "temperature-gap",
        "counter-flow",
        "sinusoidal-density",
        "random-smooth",
    ];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub amplitude: f64,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::RandomSmooth,
            amplitude: 1e-3,
            seed: 1,
        }
    }
}

impl Scenario {
    pub fn new(kind: ScenarioKind, amplitude: f64, seed: u64) -> Self {
        Self { kind, amplitude, seed }
    }

    /// Builds the initial absolute state from Maxwellians in the given
    /// representation; moment-matched states carry exactly the intended
    /// discrete moments.
    pub fn initial_state(&self, p: &MixtureParams, grid: &PhaseGrid, mode: EquilibriumMode) -> Result<DistributionPair> {
        let eps = self.amplitude;
        if !(eps.is_finite() && eps > 0.0) && self.kind != ScenarioKind::Equilibrium {
            return Err(Error::InvalidInput(format!("amplitude must be positive, got {eps}")));
        }
        let v = &grid.velocity;
        let uniform = |s1: SpeciesMoments, s2: SpeciesMoments| -> Result<DistributionPair> {
            let f1 = local_maxwellian(&s1, p.m1, v, mode)?;
            let f2 = local_maxwellian(&s2, p.m2, v, mode)?;
            DistributionPair::uniform(grid, &f1, &f2, PairKind::Absolute)
        };
        let rest = |k: usize, t: f64| SpeciesMoments::new(p.n0(k), [0.0; 3], t);
        match self.kind {
            ScenarioKind::Equilibrium => uniform(rest(0, 1.0), rest(1, 1.0)),
            ScenarioKind::TemperatureGap => {
                if eps >= 1.0 {
                    return Err(Error::InvalidInput(format!("temperature gap needs amplitude < 1, got {eps}")));
                }
                uniform(rest(0, 1.0 + eps), rest(1, 1.0 - eps))
            }
            ScenarioKind::CounterFlow => uniform(
                SpeciesMoments::new(p.n10, [eps, 0.0, 0.0], 1.0),
                SpeciesMoments::new(p.n20, [-eps, 0.0, 0.0], 1.0),
            ),
            ScenarioKind::SinusoidalDensity => {
                if eps >= 1.0 {
                    return Err(Error::InvalidInput(format!("density wave needs amplitude < 1, got {eps}")));
                }
                let l = grid.space.length();
                let first = GridFunction::from_cells(grid, |c| {
                    let x = grid.space.center(c);
                    let n = p.n10 * (1.0 + eps * (std::f64::consts::TAU * x / l).sin());
                    local_maxwellian(&SpeciesMoments::new(n, [0.0; 3], 1.0), p.m1, v, mode)
                })?;
                let second = GridFunction::uniform(grid, &local_maxwellian(&rest(1, 1.0), p.m2, v, mode)?)?;
                DistributionPair::new(first, second, PairKind::Absolute)
            }
            ScenarioKind::RandomSmooth => random_smooth(p, grid, eps, self.seed, mode),
        }
    }
}

/// `F_k = mu_k (1 + eps Q_k(x, v))` with `Q_k` a random quadratic in the
/// scaled velocity times `exp(-m_k |v|^2 / 4)`, carrying spatial harmonics 0..=2,
/// normalized to `max |Q_k| = 1`.
fn random_smooth(p: &MixtureParams, grid: &PhaseGrid, eps: f64, seed: u64, mode: EquilibriumMode) -> Result<DistributionPair> {
    if eps >= 1.0 {
        return Err(Error::InvalidInput(format!("random perturbation needs amplitude < 1, got {eps}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = &grid.velocity;
    let harmonics = if grid.n_cells() > 1 { 3 } else { 1 };
    let mut out = DistributionPair::zeros(grid, PairKind::Absolute);
    for k in 0..2 {
        let m = p.mass(k);
        let mu = equilibrium_profile(p, k, v, mode)?;
        let coef: Vec<[f64; 10]> = (0..harmonics)
            .map(|_| std::array::from_fn(|_| StandardNormal.sample(&mut rng)))
            .collect();
        let phases: Vec<f64> = (0..harmonics).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let mut q = vec![0.0; grid.len()];
        let nv = v.len();
        for c in 0..grid.n_cells() {
            let x = grid.space.center(c) / grid.space.length();
            let a: [f64; 10] = std::array::from_fn(|i| {
                (0..harmonics)
                    .map(|h| coef[h][i] * if h == 0 { 1.0 } else { (std::f64::consts::TAU * h as f64 * x + phases[h]).cos() })
                    .sum()
            });
            for (j, node) in v.nodes().iter().enumerate() {
                let s = m.sqrt();
                let (x1, y1, z1) = (s * node[0], s * node[1], s * node[2]);
                let poly = a[0]
                    + a[1] * x1
                    + a[2] * y1
                    + a[3] * z1
                    + a[4] * (x1 * x1 - 1.0)
                    + a[5] * (y1 * y1 - 1.0)
                    + a[6] * (z1 * z1 - 1.0)
                    + a[7] * x1 * y1
                    + a[8] * y1 * z1
                    + a[9] * x1 * z1;
                q[c * nv + j] = poly * (-(x1 * x1 + y1 * y1 + z1 * z1) / 4.0).exp();
            }
        }
        let qmax = q.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        let vals = out.species_mut(k).values_mut();
        for c in 0..grid.n_cells() {
            for j in 0..nv {
                vals[c * nv + j] = mu[j] * (1.0 + eps * q[c * nv + j] / qmax);
            }
        }
    }
    Ok(out)
}

/// Uniform state with the densities, common velocity and common temperature
/// fixed by a set of conserved totals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalsEquilibrium {
    pub n1: f64,
    pub n2: f64,
    pub u: Vec3,
    pub t: f64,
}

/// `n_k = M_k / |Omega|`, `U = P / (m1 M1 + m2 M2)`,
/// `T = (E - (m1 M1 + m2 M2)|U|^2) / (3 (M1 + M2))`.
pub fn equilibrium_from_totals(totals: &ConservedTotals, p: &MixtureParams, grid: &PhaseGrid) -> Result<TotalsEquilibrium> {
    let vol = grid.space.length();
    let rho = p.m1 * totals.mass1 + p.m2 * totals.mass2;
    if !(totals.mass1 > 0.0 && totals.mass2 > 0.0) {
        return Err(Error::InvalidInput("totals need positive masses".into()));
    }
    let u = totals.momentum.map(|x| x / rho);
    let u2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let t = (totals.energy - rho * u2) / (3.0 * (totals.mass1 + totals.mass2));
    if t <= 0.0 {
        return Err(Error::InvalidInput(format!("totals imply nonpositive temperature {t:e}")));
    }
    Ok(TotalsEquilibrium {
        n1: totals.mass1 / vol,
        n2: totals.mass2 / vol,
        u,
        t,
    })
}

/// The equilibrium pair `G` a run conserving `totals` relaxes towards.
pub fn shifted_equilibrium(
    totals: &ConservedTotals,
    p: &MixtureParams,
    grid: &PhaseGrid,
    mode: EquilibriumMode,
) -> Result<DistributionPair> {
    let eq = equilibrium_from_totals(totals, p, grid)?;
    let g1 = local_maxwellian(&SpeciesMoments::new(eq.n1, eq.u, eq.t), p.m1, &grid.velocity, mode)?;
    let g2 = local_maxwellian(&SpeciesMoments::new(eq.n2, eq.u, eq.t), p.m2, &grid.velocity, mode)?;
    DistributionPair::uniform(grid, &g1, &g2, PairKind::Absolute)
}

/// `|(F - G) / sqrt(G)|^2` in the discrete `L^2_{x,v}` norm.
pub fn perturbation_energy(f: &DistributionPair, g: &DistributionPair, grid: &PhaseGrid) -> Result<f64> {
    if !f.matches(grid) || !g.matches(grid) {
        return Err(Error::GridMismatch);
    }
    let w = grid.velocity.weights()[0] * grid.space.cell_width();
    let mut e = 0.0;
    for k in 0..2 {
        for (x, y) in f.species(k).values().iter().zip(g.species(k).values()) {
            if *y > 0.0 {
                e += (x - y) * (x - y) / y;
            }
        }
    }
    Ok(w * e)
}
