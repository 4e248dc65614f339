#![allow(dead_code)]

use mixbgk::grid::{DistributionPair, PairKind, PhaseGrid};
use mixbgk::mixture::{equilibrium_profile, EquilibriumMode, MixtureParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniformly drawn admissible parameters with `1 <= m1/m2 <= max_ratio`.
pub fn random_params(rng: &mut ChaCha8Rng, max_ratio: f64) -> MixtureParams {
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
    p.gamma = rng.random_range(0.0..=1.0) * p.gamma_upper_bound();
    p
}

/// Unstructured perturbation: independent normals at every node.
pub fn random_pair(grid: &PhaseGrid, rng: &mut ChaCha8Rng) -> DistributionPair {
    let mut f = DistributionPair::zeros(grid, PairKind::Perturbation);
    for k in 0..2 {
        f.species_mut(k).values_mut().iter_mut().for_each(|x| *x = normal(rng));
    }
    f
}

/// Smooth perturbation `f_k = sqrt(mu_k) q_k(x, v) exp(-m_k |v|^2 / 4)` with a
/// random quadratic `q_k` whose coefficients vary sinusoidally in space,
/// normalized so that `|F_k / mu_k - 1| <= 1` for unit amplitude.
pub fn smooth_pair(p: &MixtureParams, grid: &PhaseGrid, rng: &mut ChaCha8Rng) -> DistributionPair {
    let mut f = DistributionPair::zeros(grid, PairKind::Perturbation);
    let nodes = grid.velocity.nodes().to_vec();
    for k in 0..2 {
        let m = p.mass(k);
        let mu = equilibrium_profile(p, k, &grid.velocity, EquilibriumMode::Sampled).unwrap();
        let base: [f64; 10] = std::array::from_fn(|_| normal(rng));
        let wave: [f64; 10] = std::array::from_fn(|_| normal(rng));
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let mut ratio_max = 0.0_f64;
        for c in 0..grid.n_cells() {
            let s = if grid.n_cells() > 1 {
                (std::f64::consts::TAU * grid.space.center(c) / grid.space.length() + phase).sin()
            } else {
                0.0
            };
            let a: [f64; 10] = std::array::from_fn(|i| base[i] + s * wave[i]);
            for ((x, v), mu) in f.species_mut(k).cell_mut(c).iter_mut().zip(&nodes).zip(&mu) {
                let w = m.sqrt();
                let (x1, y1, z1) = (w * v[0], w * v[1], w * v[2]);
                let q = a[0]
                    + a[1] * x1
                    + a[2] * y1
                    + a[3] * z1
                    + a[4] * x1 * x1
                    + a[5] * y1 * y1
                    + a[6] * z1 * z1
                    + a[7] * x1 * y1
                    + a[8] * y1 * z1
                    + a[9] * x1 * z1;
                let r = q * (-(x1 * x1 + y1 * y1 + z1 * z1) / 4.0).exp();
                ratio_max = ratio_max.max(r.abs());
                *x = r * mu.sqrt();
            }
        }
        let s = 1.0 / ratio_max;
        f.species_mut(k).values_mut().iter_mut().for_each(|x| *x *= s);
    }
    f
}
