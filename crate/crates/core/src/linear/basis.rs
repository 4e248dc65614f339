use crate::grid::{dot_v, VelocityGrid};
use crate::mixture::{equilibrium_profile, EquilibriumMode, MixtureParams};

/// How the per-species moment basis is realised on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisKind {
    /// The closed-form functions sampled at the nodes; orthonormal only up to
    /// quadrature error.
    Sampled,
    /// The sampled functions passed through modified Gram-Schmidt in the
    /// discrete inner product; exactly orthonormal on the lattice and spanning
    /// the same space.
    #[default]
    Orthonormalized,
}

/// The five moment functions `e_k1 .. e_k5` of one species.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesBasis {
    species: usize,
    kind: BasisKind,
    e: [Vec<f64>; 5],
    sqrt_mu: Vec<f64>,
    sampled_gram_defect: f64,
}

/// Closed-form basis `sqrt(mu)/sqrt(n0)`, `sqrt(m/n0) v_i sqrt(mu)`,
/// `(m|v|^2 - 3) sqrt(mu) / sqrt(6 n0)` at the nodes.
pub(crate) fn sampled_species_basis(p: &MixtureParams, species: usize, grid: &VelocityGrid) -> ([Vec<f64>; 5], Vec<f64>) {
    let mu = equilibrium_profile(p, species, grid, EquilibriumMode::Sampled)
        .expect("reference densities and masses are positive for validated parameters");
    let sqrt_mu: Vec<f64> = mu.iter().map(|x| x.sqrt()).collect();
    let m = p.mass(species);
    let n0 = p.n0(species);
    let c1 = 1.0 / n0.sqrt();
    let cv = (m / n0).sqrt();
    let c5 = 1.0 / (6.0 * n0).sqrt();
    let nodes = grid.nodes();
    let e: [Vec<f64>; 5] = std::array::from_fn(|i| {
        sqrt_mu
            .iter()
            .zip(nodes)
            .map(|(s, v)| match i {
                0 => c1 * s,
                1..=3 => cv * v[i - 1] * s,
                _ => c5 * (m * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) - 3.0) * s,
            })
            .collect()
    });
    (e, sqrt_mu)
}

pub(crate) fn gram_defect<'a>(vectors: impl Iterator<Item = (&'a [f64], &'a [f64])> + Clone, grid: &VelocityGrid) -> f64 {
    let v: Vec<_> = vectors.collect();
    let mut worst = 0.0_f64;
    for (i, a) in v.iter().enumerate() {
        for (j, b) in v.iter().enumerate() {
            let g = dot_v(a.0, b.0, grid) + dot_v(a.1, b.1, grid);
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}

/// Modified Gram-Schmidt with one reorthogonalisation pass, in the discrete
/// `L^2_v` inner product.
pub(crate) fn orthonormalize(vectors: &mut [Vec<f64>], grid: &VelocityGrid) {
    for i in 0..vectors.len() {
        for _pass in 0..2 {
            for j in 0..i {
                let (done, rest) = vectors.split_at_mut(i);
                let c = dot_v(&rest[0], &done[j], grid);
                for (x, y) in rest[0].iter_mut().zip(&done[j]) {
                    *x -= c * y;
                }
            }
        }
        let norm = dot_v(&vectors[i], &vectors[i], grid).sqrt();
        vectors[i].iter_mut().for_each(|x| *x /= norm);
    }
}

impl SpeciesBasis {
    pub fn new(p: &MixtureParams, species: usize, grid: &VelocityGrid, kind: BasisKind) -> Self {
        let (sampled, sqrt_mu) = sampled_species_basis(p, species, grid);
        let sampled_gram_defect = gram_defect(sampled.iter().map(|e| (e.as_slice(), &[][..])), grid);
        let e = match kind {
            BasisKind::Sampled => sampled,
            BasisKind::Orthonormalized => {
                let mut v = sampled.to_vec();
                orthonormalize(&mut v, grid);
                let mut it = v.into_iter();
                std::array::from_fn(|_| it.next().unwrap())
            }
        };
        Self {
            species,
            kind,
            e,
            sqrt_mu,
            sampled_gram_defect,
        }
    }

    pub fn species(&self) -> usize {
        self.species
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    /// Basis function `e_{k,i+1}` (zero-based `i`).
    pub fn e(&self, i: usize) -> &[f64] {
        &self.e[i]
    }

    pub fn all(&self) -> &[Vec<f64>; 5] {
        &self.e
    }

    /// Sampled `sqrt(mu_k)`.
    pub fn sqrt_mu(&self) -> &[f64] {
        &self.sqrt_mu
    }

    /// Max entrywise deviation of the closed-form functions' discrete Gram
    /// matrix from the identity: the quadrature error of the lattice.
    pub fn sampled_gram_defect(&self) -> f64 {
        self.sampled_gram_defect
    }

    /// Max entrywise deviation of this basis' Gram matrix from the identity.
    pub fn gram_defect(&self, grid: &VelocityGrid) -> f64 {
        gram_defect(self.e.iter().map(|e| (e.as_slice(), &[][..])), grid)
    }

    /// Coefficients `<f, e_ki>`.
    pub fn coefficients(&self, f: &[f64], grid: &VelocityGrid) -> [f64; 5] {
        std::array::from_fn(|i| dot_v(f, &self.e[i], grid))
    }

    pub fn combine(&self, c: &[f64; 5]) -> Vec<f64> {
        let mut out = vec![0.0; self.sqrt_mu.len()];
        for (ci, e) in c.iter().zip(&self.e) {
            for (o, x) in out.iter_mut().zip(e) {
                *o += ci * x;
            }
        }
        out
    }

    /// `P_k f = sum_i <f, e_ki> e_ki`.
    pub fn project(&self, f: &[f64], grid: &VelocityGrid) -> Vec<f64> {
        self.combine(&self.coefficients(f, grid))
    }
}

/// Per-species macroscopic projection of a single-cell array.
pub fn project_species(f: &[f64], basis: &SpeciesBasis, grid: &VelocityGrid) -> Vec<f64> {
    basis.project(f, grid)
}

/// The six pair-valued functions spanning the mixture collision invariants:
/// two densities, the joint momentum and the joint energy.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureBasis {
    e: [[Vec<f64>; 2]; 6],
}

impl MixtureBasis {
    /// Assembles `E_1 .. E_6` from the species bases:
    /// `E_1 = (e_11, 0)`, `E_2 = (0, e_21)`,
    /// `E_{2+i} = (sqrt(m1 n10) e_1,i+1, sqrt(m2 n20) e_2,i+1) / sqrt(m1 n10 + m2 n20)`,
    /// `E_6 = (sqrt(n10) e_15, sqrt(n20) e_25) / sqrt(n10 + n20)`.
    ///
    /// With the closed-form species functions this is exactly the mixture
    /// basis with `E_6` normalised by `sqrt(6 (n10 + n20))`.
    pub fn new(p: &MixtureParams, b1: &SpeciesBasis, b2: &SpeciesBasis) -> Self {
        let zeros = vec![0.0; b1.e(0).len()];
        let pm1 = (p.m1 * p.n10).sqrt();
        let pm2 = (p.m2 * p.n20).sqrt();
        let pn = (p.m1 * p.n10 + p.m2 * p.n20).sqrt();
        let en1 = p.n10.sqrt();
        let en2 = p.n20.sqrt();
        let et = (p.n10 + p.n20).sqrt();
        let scale = |v: &[f64], s: f64| v.iter().map(|x| s * x).collect::<Vec<_>>();
        let e: [[Vec<f64>; 2]; 6] = std::array::from_fn(|i| match i {
            0 => [b1.e(0).to_vec(), zeros.clone()],
            1 => [zeros.clone(), b2.e(0).to_vec()],
            2..=4 => [scale(b1.e(i - 1), pm1 / pn), scale(b2.e(i - 1), pm2 / pn)],
            _ => [scale(b1.e(4), en1 / et), scale(b2.e(4), en2 / et)],
        });
        Self { e }
    }

    pub fn e(&self, i: usize) -> (&[f64], &[f64]) {
        (&self.e[i][0], &self.e[i][1])
    }

    pub fn gram_defect(&self, grid: &VelocityGrid) -> f64 {
        gram_defect(self.e.iter().map(|e| (e[0].as_slice(), e[1].as_slice())), grid)
    }

    pub fn coefficients(&self, f1: &[f64], f2: &[f64], grid: &VelocityGrid) -> [f64; 6] {
        std::array::from_fn(|i| dot_v(f1, &self.e[i][0], grid) + dot_v(f2, &self.e[i][1], grid))
    }

    /// `P(f1, f2) = sum_i <(f1, f2), E_i> E_i`.
    pub fn project(&self, f1: &[f64], f2: &[f64], grid: &VelocityGrid) -> (Vec<f64>, Vec<f64>) {
        let c = self.coefficients(f1, f2, grid);
        let mut o1 = vec![0.0; f1.len()];
        let mut o2 = vec![0.0; f2.len()];
        for (ci, e) in c.iter().zip(&self.e) {
            for (o, x) in o1.iter_mut().zip(&e[0]) {
                *o += ci * x;
            }
            for (o, x) in o2.iter_mut().zip(&e[1]) {
                *o += ci * x;
            }
        }
        (o1, o2)
    }
}

/// Mixture macroscopic projection of a single-cell pair.
pub fn project_mixture(f1: &[f64], f2: &[f64], basis: &MixtureBasis, grid: &VelocityGrid) -> (Vec<f64>, Vec<f64>) {
    basis.project(f1, f2, grid)
}
