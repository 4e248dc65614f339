use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{dot_v, DistributionPair, GridFunction, PairKind, PhaseGrid, VelocityGrid};
use crate::mixture::{equilibrium_profile, EquilibriumMode, MixtureParams, Regime};

use super::basis::{BasisKind, MixtureBasis, SpeciesBasis};

/// The six labelled pieces of the linearized operator at one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellParts {
    pub l11: Vec<f64>,
    pub l12_1: Vec<f64>,
    pub l12_2: Vec<f64>,
    pub l22: Vec<f64>,
    pub l21_1: Vec<f64>,
    pub l21_2: Vec<f64>,
}

/// The six parts over the whole phase grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LParts {
    pub l11: GridFunction,
    pub l12_1: GridFunction,
    pub l12_2: GridFunction,
    pub l22: GridFunction,
    pub l21_1: GridFunction,
    pub l21_2: GridFunction,
}

impl LParts {
    /// `(L11 + L12^1 + L12^2, L22 + L21^1 + L21^2)`.
    pub fn sum(&self) -> DistributionPair {
        let add = |a: &GridFunction, b: &GridFunction, c: &GridFunction| {
            let mut out = a.clone();
            for ((o, x), y) in out.values_mut().iter_mut().zip(b.values()).zip(c.values()) {
                *o += x + y;
            }
            out
        };
        DistributionPair {
            first: add(&self.l11, &self.l12_1, &self.l12_2),
            second: add(&self.l22, &self.l21_1, &self.l21_2),
            kind: PairKind::Perturbation,
        }
    }
}

/// Linearization of the relaxation operator about the global equilibria,
/// together with the moment bases it is built from.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    params: MixtureParams,
    grid: VelocityGrid,
    b1: SpeciesBasis,
    b2: SpeciesBasis,
    mix: MixtureBasis,
}

impl LinearizedOperator {
    /// Builds the operator with discretely orthonormal bases. `regime`
    /// selects whether `delta = 1` / `omega = 1` are accepted.
    pub fn new(p: &MixtureParams, grid: &VelocityGrid, regime: Regime) -> Result<Self> {
        Self::with_basis(p, grid, regime, BasisKind::Orthonormalized)
    }

    pub fn with_basis(p: &MixtureParams, grid: &VelocityGrid, regime: Regime, kind: BasisKind) -> Result<Self> {
        p.check(regime)?;
        let b1 = SpeciesBasis::new(p, 0, grid, kind);
        let b2 = SpeciesBasis::new(p, 1, grid, kind);
        let mix = MixtureBasis::new(p, &b1, &b2);
        Ok(Self {
            params: *p,
            grid: grid.clone(),
            b1,
            b2,
            mix,
        })
    }

    pub fn params(&self) -> &MixtureParams {
        &self.params
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn species_basis(&self, k: usize) -> &SpeciesBasis {
        if k == 0 {
            &self.b1
        } else {
            &self.b2
        }
    }

    pub fn mixture_basis(&self) -> &MixtureBasis {
        &self.mix
    }

    /// Exchange weights `c = sqrt(n10/n20) sqrt(m1/m2)` and `d = sqrt(n10/n20)`.
    fn weights(&self) -> (f64, f64) {
        let p = &self.params;
        let d = (p.n10 / p.n20).sqrt();
        (d * p.mass_ratio().sqrt(), d)
    }

    /// Coefficient vectors of the momentum-energy exchange parts:
    /// `L12^2 = sum_i x_i e_1i`, `L21^2 = sum_i y_i e_2i` (indices 1..=4).
    fn exchange_coefficients(&self, c1: &[f64; 5], c2: &[f64; 5]) -> ([f64; 5], [f64; 5]) {
        let p = &self.params;
        let (c, d) = self.weights();
        let r = p.mass_ratio();
        let mut x = [0.0; 5];
        let mut y = [0.0; 5];
        for i in 1..4 {
            x[i] = p.n20 * (1.0 - p.delta) * (c * c2[i] - c1[i]);
            y[i] = p.n10 * r * (1.0 - p.delta) * (c1[i] / c - c2[i]);
        }
        x[4] = p.n20 * (1.0 - p.omega) * (d * c2[4] - c1[4]);
        y[4] = p.n10 * (1.0 - p.omega) * (c1[4] / d - c2[4]);
        (x, y)
    }

    /// All six parts at one cell.
    pub fn apply_parts_cell(&self, f1: &[f64], f2: &[f64]) -> CellParts {
        let p = &self.params;
        let c1 = self.b1.coefficients(f1, &self.grid);
        let c2 = self.b2.coefficients(f2, &self.grid);
        let p1 = self.b1.combine(&c1);
        let p2 = self.b2.combine(&c2);
        let micro1: Vec<f64> = p1.iter().zip(f1).map(|(a, b)| a - b).collect();
        let micro2: Vec<f64> = p2.iter().zip(f2).map(|(a, b)| a - b).collect();
        let (x, y) = self.exchange_coefficients(&c1, &c2);
        let scale = |v: &[f64], s: f64| v.iter().map(|a| s * a).collect::<Vec<_>>();
        CellParts {
            l11: scale(&micro1, p.n10),
            l12_1: scale(&micro1, p.n20),
            l12_2: self.b1.combine(&x),
            l22: scale(&micro2, p.n20),
            l21_1: scale(&micro2, p.n10),
            l21_2: self.b2.combine(&y),
        }
    }

    /// `L(f1, f2)` at one cell, written into `out1`, `out2`.
    pub fn apply_cell_into(&self, f1: &[f64], f2: &[f64], out1: &mut [f64], out2: &mut [f64]) {
        let p = &self.params;
        let c1 = self.b1.coefficients(f1, &self.grid);
        let c2 = self.b2.coefficients(f2, &self.grid);
        let (x, y) = self.exchange_coefficients(&c1, &c2);
        let nt = p.n10 + p.n20;
        // (n10 + n20)(P_k f_k - f_k) plus the exchange part, in one combination.
        let a1: [f64; 5] = std::array::from_fn(|i| nt * c1[i] + x[i]);
        let a2: [f64; 5] = std::array::from_fn(|i| nt * c2[i] + y[i]);
        let g1 = self.b1.combine(&a1);
        let g2 = self.b2.combine(&a2);
        for j in 0..f1.len() {
            out1[j] = g1[j] - nt * f1[j];
            out2[j] = g2[j] - nt * f2[j];
        }
    }

    pub fn apply_cell(&self, f1: &[f64], f2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut o1 = vec![0.0; f1.len()];
        let mut o2 = vec![0.0; f2.len()];
        self.apply_cell_into(f1, f2, &mut o1, &mut o2);
        (o1, o2)
    }

    fn check(&self, f: &DistributionPair, grid: &PhaseGrid) -> Result<()> {
        if !f.matches(grid) || grid.velocity != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `L f` over the whole phase grid.
    pub fn apply(&self, f: &DistributionPair, grid: &PhaseGrid) -> Result<DistributionPair> {
        self.check(f, grid)?;
        let nv = grid.n_velocity();
        let mut o1 = GridFunction::zeros(grid);
        let mut o2 = GridFunction::zeros(grid);
        o1.values_mut()
            .par_chunks_mut(nv)
            .zip(o2.values_mut().par_chunks_mut(nv))
            .enumerate()
            .for_each(|(c, (a, b))| self.apply_cell_into(f.first.cell(c), f.second.cell(c), a, b));
        DistributionPair::new(o1, o2, PairKind::Perturbation)
    }

    pub fn apply_parts(&self, f: &DistributionPair, grid: &PhaseGrid) -> Result<LParts> {
        self.check(f, grid)?;
        let cells: Vec<CellParts> = (0..grid.n_cells())
            .into_par_iter()
            .map(|c| self.apply_parts_cell(f.first.cell(c), f.second.cell(c)))
            .collect();
        let gather = |get: &dyn Fn(&CellParts) -> &Vec<f64>| {
            let mut v = Vec::with_capacity(grid.len());
            for cp in &cells {
                v.extend_from_slice(get(cp));
            }
            GridFunction::from_values(grid, v)
        };
        Ok(LParts {
            l11: gather(&|c| &c.l11)?,
            l12_1: gather(&|c| &c.l12_1)?,
            l12_2: gather(&|c| &c.l12_2)?,
            l22: gather(&|c| &c.l22)?,
            l21_1: gather(&|c| &c.l21_1)?,
            l21_2: gather(&|c| &c.l21_2)?,
        })
    }

    /// `(P1 f1, P2 f2)` cell by cell.
    pub fn project_species_pair(&self, f: &DistributionPair, grid: &PhaseGrid) -> Result<DistributionPair> {
        self.check(f, grid)?;
        let mut out = DistributionPair::zeros(grid, PairKind::Perturbation);
        for c in 0..grid.n_cells() {
            out.first.cell_mut(c).copy_from_slice(&self.b1.project(f.first.cell(c), &self.grid));
            out.second.cell_mut(c).copy_from_slice(&self.b2.project(f.second.cell(c), &self.grid));
        }
        Ok(out)
    }

    /// `P(f1, f2)` cell by cell.
    pub fn project_mixture_pair(&self, f: &DistributionPair, grid: &PhaseGrid) -> Result<DistributionPair> {
        self.check(f, grid)?;
        let mut out = DistributionPair::zeros(grid, PairKind::Perturbation);
        for c in 0..grid.n_cells() {
            let (a, b) = self.mix.project(f.first.cell(c), f.second.cell(c), &self.grid);
            out.first.cell_mut(c).copy_from_slice(&a);
            out.second.cell_mut(c).copy_from_slice(&b);
        }
        Ok(out)
    }

    /// Evaluates both sides of the dissipation inequality and of the two
    /// partial estimates it is assembled from.
    pub fn dissipation(&self, f: &DistributionPair, grid: &PhaseGrid) -> Result<DissipationReport> {
        self.check(f, grid)?;
        let p = &self.params;
        let dx = grid.space.cell_width();
        let v = &self.grid;
        let mut acc = [0.0_f64; 7];
        for c in 0..grid.n_cells() {
            let (f1, f2) = (f.first.cell(c), f.second.cell(c));
            let parts = self.apply_parts_cell(f1, f2);
            let (q1, q2) = self.mix.project(f1, f2, v);
            let p1 = self.b1.project(f1, v);
            let p2 = self.b2.project(f2, v);
            let diff_sq = |a: &[f64], b: &[f64]| {
                let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                dot_v(&d, &d, v)
            };
            let norm = dot_v(f1, f1, v) + dot_v(f2, f2, v);
            let micro_species = diff_sq(f1, &p1) + diff_sq(f2, &p2);
            let micro_mixture = diff_sq(f1, &q1) + diff_sq(f2, &q2);
            let macro_species = dot_v(&p1, &p1, v) + dot_v(&p2, &p2, v);
            let macro_mixture = dot_v(&q1, &q1, v) + dot_v(&q2, &q2, v);
            let partial = dot_v(&parts.l11, f1, v)
                + dot_v(&parts.l12_1, f1, v)
                + dot_v(&parts.l22, f2, v)
                + dot_v(&parts.l21_1, f2, v);
            let exchange = dot_v(&parts.l12_2, f1, v) + dot_v(&parts.l21_2, f2, v);
            for (a, x) in acc.iter_mut().zip([
                norm,
                micro_species,
                micro_mixture,
                macro_species,
                macro_mixture,
                partial,
                exchange,
            ]) {
                *a += dx * x;
            }
        }
        let [norm_sq, micro_species, micro_mixture, macro_species, macro_mixture, partial, exchange] = acc;
        let nt = p.n10 + p.n20;
        let lo = (1.0 - p.delta).min(1.0 - p.omega);
        let hi = p.delta.max(p.omega);
        let lhs = partial + exchange;
        let rhs = -nt * (hi * micro_species + lo * micro_mixture);
        Ok(DissipationReport {
            lhs,
            rhs,
            margin: rhs - lhs,
            norm_sq,
            micro_species_sq: micro_species,
            micro_mixture_sq: micro_mixture,
            partial_lhs: partial,
            partial_rhs: -nt * micro_species,
            exchange_lhs: exchange,
            exchange_rhs: -lo * nt * (macro_species - macro_mixture),
        })
    }
}

/// Both sides of the dissipation inequality
/// `<Lf, f> <= -(n10 + n20)(max{delta, omega} |(I-P1, I-P2) f|^2 + min{1-delta, 1-omega} |(I-P) f|^2)`
/// and of its two ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationReport {
    /// `<Lf, f>`.
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; nonnegative when the inequality holds.
    pub margin: f64,
    pub norm_sq: f64,
    pub micro_species_sq: f64,
    pub micro_mixture_sq: f64,
    /// `<(L11 + L12^1) f1, f1> + <(L22 + L21^1) f2, f2>`.
    pub partial_lhs: f64,
    /// `-(n10 + n20) |(I-P1, I-P2) f|^2`; equal to `partial_lhs`.
    pub partial_rhs: f64,
    /// `<L12^2, f1> + <L21^2, f2>`.
    pub exchange_lhs: f64,
    /// `-min{1-delta, 1-omega} (n10 + n20)(|(P1, P2) f|^2 - |P f|^2)`; bounds `exchange_lhs` from above.
    pub exchange_rhs: f64,
}

/// `f_k = (F_k - mu_k) / sqrt(mu_k)` with the sampled global equilibria.
pub fn perturbation_split(f: &DistributionPair, p: &MixtureParams, grid: &PhaseGrid) -> Result<DistributionPair> {
    if !f.matches(grid) {
        return Err(Error::GridMismatch);
    }
    let mut out = f.clone();
    out.kind = PairKind::Perturbation;
    for k in 0..2 {
        let mu = equilibrium_profile(p, k, &grid.velocity, EquilibriumMode::Sampled)?;
        let sq: Vec<f64> = mu.iter().map(|x| x.sqrt()).collect();
        for cell in out.species_mut(k).cells_mut() {
            for ((x, m), s) in cell.iter_mut().zip(&mu).zip(&sq) {
                *x = (*x - m) / s;
            }
        }
    }
    Ok(out)
}

/// `F_k = mu_k + sqrt(mu_k) f_k`.
pub fn reconstruct(f: &DistributionPair, p: &MixtureParams, grid: &PhaseGrid) -> Result<DistributionPair> {
    if !f.matches(grid) {
        return Err(Error::GridMismatch);
    }
    let mut out = f.clone();
    out.kind = PairKind::Absolute;
    for k in 0..2 {
        let mu = equilibrium_profile(p, k, &grid.velocity, EquilibriumMode::Sampled)?;
        for cell in out.species_mut(k).cells_mut() {
            for (x, m) in cell.iter_mut().zip(&mu) {
                *x = m + m.sqrt() * *x;
            }
        }
    }
    Ok(out)
}

/// `L f` with admissibility widened to the kernel-study regime.
pub fn apply_l(f: &DistributionPair, p: &MixtureParams, grid: &PhaseGrid) -> Result<DistributionPair> {
    LinearizedOperator::new(p, &grid.velocity, Regime::KernelStudy)?.apply(f, grid)
}

pub fn apply_l_parts(f: &DistributionPair, p: &MixtureParams, grid: &PhaseGrid) -> Result<LParts> {
    LinearizedOperator::new(p, &grid.velocity, Regime::KernelStudy)?.apply_parts(f, grid)
}

pub fn dissipation_check(f: &DistributionPair, p: &MixtureParams, grid: &PhaseGrid) -> Result<DissipationReport> {
    LinearizedOperator::new(p, &grid.velocity, Regime::Strict)?.dissipation(f, grid)
}

/// Coefficients of the mixture macroscopic part
/// `P f = a1 (sqrt mu1, 0) + a2 (0, sqrt mu2) + b . v (m1 sqrt mu1, m2 sqrt mu2) + c |v|^2 (m1 sqrt mu1, m2 sqrt mu2)`,
/// one entry per spatial cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroCoefficients {
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub b: Vec<[f64; 3]>,
    pub c: Vec<f64>,
}

/// Evaluates the closed-form macroscopic coefficients with discrete integrals.
pub fn macro_coefficients(f: &DistributionPair, p: &MixtureParams, grid: &PhaseGrid) -> Result<MacroCoefficients> {
    if !f.matches(grid) {
        return Err(Error::GridMismatch);
    }
    let v = &grid.velocity;
    let sq: [Vec<f64>; 2] = std::array::from_fn(|k| {
        equilibrium_profile(p, k, v, EquilibriumMode::Sampled)
            .map(|mu| mu.iter().map(|x| x.sqrt()).collect())
            .unwrap_or_default()
    });
    let w = v.weights()[0];
    let nt = p.n10 + p.n20;
    let mn = p.m1 * p.n10 + p.m2 * p.n20;
    let mut out = MacroCoefficients {
        a1: Vec::new(),
        a2: Vec::new(),
        b: Vec::new(),
        c: Vec::new(),
    };
    for cell in 0..grid.n_cells() {
        let mut dens = [0.0; 2];
        let mut mom = [0.0; 3];
        let mut energy = 0.0;
        for k in 0..2 {
            let m = p.mass(k);
            let fk = f.species(k).cell(cell);
            for ((x, s), node) in fk.iter().zip(&sq[k]).zip(v.nodes()) {
                let xs = x * s;
                dens[k] += xs;
                for i in 0..3 {
                    mom[i] += m * node[i] * xs;
                }
                energy += (m * (node[0] * node[0] + node[1] * node[1] + node[2] * node[2]) - 3.0) * xs;
            }
        }
        let (dens, mom, energy) = (dens.map(|x| w * x), mom.map(|x| w * x), w * energy);
        out.a1.push(dens[0] / p.n10 - energy / (2.0 * nt));
        out.a2.push(dens[1] / p.n20 - energy / (2.0 * nt));
        out.b.push(mom.map(|x| x / mn));
        out.c.push(energy / (6.0 * nt));
    }
    Ok(out)
}

/// Rebuilds the macroscopic part from its coefficients.
pub fn macro_reconstruct(coef: &MacroCoefficients, p: &MixtureParams, grid: &PhaseGrid) -> Result<DistributionPair> {
    if coef.a1.len() != grid.n_cells() {
        return Err(Error::SizeMismatch {
            expected: grid.n_cells(),
            got: coef.a1.len(),
        });
    }
    let v = &grid.velocity;
    let mut out = DistributionPair::zeros(grid, PairKind::Perturbation);
    for k in 0..2 {
        let mu = equilibrium_profile(p, k, v, EquilibriumMode::Sampled)?;
        let m = p.mass(k);
        for c in 0..grid.n_cells() {
            let a = if k == 0 { coef.a1[c] } else { coef.a2[c] };
            let b = coef.b[c];
            let cc = coef.c[c];
            for ((o, node), mu) in out.species_mut(k).cell_mut(c).iter_mut().zip(v.nodes()).zip(&mu) {
                let s = mu.sqrt();
                let v2 = node[0] * node[0] + node[1] * node[1] + node[2] * node[2];
                *o = a * s + m * (b[0] * node[0] + b[1] * node[1] + b[2] * node[2]) * s + cc * m * v2 * s;
            }
        }
    }
    Ok(out)
}
