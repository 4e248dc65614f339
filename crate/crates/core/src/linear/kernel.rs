use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::grid::{dot_v, VelocityGrid};
use crate::mixture::{MixtureParams, Regime};

use super::operator::LinearizedOperator;

/// Number of random directions added to the moment span in the trial space.
pub const KERNEL_COMPLEMENT_DIM: usize = 20;

/// Singular-value count of the linearized operator on a reduced trial space.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelReport {
    pub dimension: usize,
    pub trial_dimension: usize,
    /// Singular values in decreasing order.
    pub singular_values: Vec<f64>,
    pub tol: f64,
    /// Smallest fraction of a null vector's norm that lies in the ten-dimensional
    /// per-species moment span (1 means the kernel sits entirely inside it).
    pub kernel_in_span: f64,
    /// Null vectors as coefficients on `(e_11..e_15, e_21..e_25)`.
    pub kernel_basis: Vec<[f64; 10]>,
}

/// Dimension expected from the kernel structure for the given exchange rates.
pub fn expected_kernel_dimension(delta: f64, omega: f64) -> usize {
    match (delta >= 1.0, omega >= 1.0) {
        (false, false) => 6,
        (true, false) => 9,
        (false, true) => 7,
        (true, true) => 10,
    }
}

/// Counts singular values of `Q^T L Q` below `tol` times the largest, where
/// `Q` holds the ten per-species moment functions followed by random
/// orthonormal complements. `L` is self-adjoint and maps both the span and its
/// orthogonal complement into themselves, so the kernel is captured exactly.
pub fn kernel_dimension(p: &MixtureParams, grid: &VelocityGrid, tol: f64) -> Result<KernelReport> {
    kernel_dimension_seeded(p, grid, tol, 0x6b65726e)
}

pub fn kernel_dimension_seeded(p: &MixtureParams, grid: &VelocityGrid, tol: f64, seed: u64) -> Result<KernelReport> {
    let op = LinearizedOperator::new(p, grid, Regime::KernelStudy)?;
    let nv = grid.len();
    let zeros = vec![0.0; nv];
    let mut trial: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for i in 0..5 {
        trial.push((op.species_basis(0).e(i).to_vec(), zeros.clone()));
    }
    for i in 0..5 {
        trial.push((zeros.clone(), op.species_basis(1).e(i).to_vec()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pair_dot = |a: &(Vec<f64>, Vec<f64>), b: &(Vec<f64>, Vec<f64>)| dot_v(&a.0, &b.0, grid) + dot_v(&a.1, &b.1, grid);
    while trial.len() < 10 + KERNEL_COMPLEMENT_DIM {
        let mut q: (Vec<f64>, Vec<f64>) = (
            (0..nv).map(|_| StandardNormal.sample(&mut rng)).collect(),
            (0..nv).map(|_| StandardNormal.sample(&mut rng)).collect(),
        );
        for _pass in 0..2 {
            for t in &trial {
                let c = pair_dot(&q, t);
                q.0.iter_mut().zip(&t.0).for_each(|(x, y)| *x -= c * y);
                q.1.iter_mut().zip(&t.1).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = pair_dot(&q, &q).sqrt();
        q.0.iter_mut().for_each(|x| *x /= norm);
        q.1.iter_mut().for_each(|x| *x /= norm);
        trial.push(q);
    }

    let k = trial.len();
    let images: Vec<(Vec<f64>, Vec<f64>)> = trial.iter().map(|q| op.apply_cell(&q.0, &q.1)).collect();
    let a = DMatrix::from_fn(k, k, |i, j| pair_dot(&trial[i], &images[j]));
    let svd = a.svd(false, true);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = singular_values[0];
    let null: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| svd.singular_values[i] < tol * smax)
        .collect();

    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut kernel_basis = Vec::new();
    let mut kernel_in_span: f64 = 1.0;
    for &i in &null {
        let row = v_t.row(i);
        let span_sq: f64 = (0..10).map(|j| row[j] * row[j]).sum();
        let total_sq: f64 = row.iter().map(|x| x * x).sum();
        kernel_in_span = kernel_in_span.min((span_sq / total_sq).sqrt());
        kernel_basis.push(std::array::from_fn(|j| row[j]));
    }
    Ok(KernelReport {
        dimension: null.len(),
        trial_dimension: k,
        singular_values,
        tol,
        kernel_in_span,
        kernel_basis,
    })
}
