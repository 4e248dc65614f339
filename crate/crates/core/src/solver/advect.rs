//! Semi-Lagrangian transport on the periodic 1-D torus with cubic splines.

use rayon::prelude::*;

use crate::grid::{DistributionPair, PhaseGrid};

/// Circulant weights `g` such that the shifted profile is
/// `new_i = sum_d g_d old_{(i - d) mod N}`.
#[derive(Debug, Clone, PartialEq)]
enum Shift {
    /// Lattice-aligned shift by this many cells: a plain rotation.
    Rotate(usize),
    Kernel(Vec<f64>),
}

/// Precomputed shift operators for one time step, one per distinct `v_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvectionPlan {
    dt: f64,
    n_cells: usize,
    shifts: Vec<Shift>,
}

/// First column of the inverse of the periodic spline interpolation matrix
/// `(1/6, 4/6, 1/6)`, from its eigenvalues `(4 + 2 cos(2 pi k / N)) / 6`.
fn spline_inverse_kernel(n: usize) -> Vec<f64> {
    let tau = std::f64::consts::TAU;
    let inv_eig: Vec<f64> = (0..n)
        .map(|k| 6.0 / (4.0 + 2.0 * (tau * k as f64 / n as f64).cos()))
        .collect();
    (0..n)
        .map(|d| {
            inv_eig
                .iter()
                .enumerate()
                .map(|(k, l)| l * (tau * (k * d % n) as f64 / n as f64).cos())
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

fn shift_for(sigma: f64, n: usize, inv: &[f64]) -> Shift {
    let nearest = sigma.round();
    if (sigma - nearest).abs() < 1e-12 {
        return Shift::Rotate((nearest as i64).rem_euclid(n as i64) as usize);
    }
    // Departure point of cell i is i - sigma = j0 + t with t in [0, 1).
    let xi = -sigma;
    let j0 = xi.floor();
    let t = xi - j0;
    let w = [
        (1.0 - t).powi(3) / 6.0,
        (3.0 * t.powi(3) - 6.0 * t * t + 4.0) / 6.0,
        (-3.0 * t.powi(3) + 3.0 * t * t + 3.0 * t + 1.0) / 6.0,
        t.powi(3) / 6.0,
    ];
    let j0 = j0 as i64;
    let mut g = vec![0.0; n];
    for (m, wm) in w.iter().enumerate() {
        // new_i picks coefficient c_{i + o}, with o = j0 - 1 + m.
        let o = j0 - 1 + m as i64;
        for (d, gd) in g.iter_mut().enumerate() {
            *gd += wm * inv[((d as i64 + o).rem_euclid(n as i64)) as usize];
        }
    }
    Shift::Kernel(g)
}

impl AdvectionPlan {
    pub fn new(grid: &PhaseGrid, dt: f64) -> Self {
        let n = grid.n_cells();
        let shifts = if grid.space.dim() == 0 || n == 1 {
            Vec::new()
        } else {
            let inv = spline_inverse_kernel(n);
            let dx = grid.space.cell_width();
            grid.velocity
                .axis()
                .iter()
                .map(|&vx| shift_for(vx * dt / dx, n, &inv))
                .collect()
        };
        Self { dt, n_cells: n, shifts }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn apply_column(&self, shift: &Shift, col: &[f64], out: &mut [f64]) {
        let n = self.n_cells;
        if col.iter().all(|&x| x == col[0]) {
            out.copy_from_slice(col);
            return;
        }
        match shift {
            Shift::Rotate(k) => {
                for i in 0..n {
                    out[(i + k) % n] = col[i];
                }
            }
            Shift::Kernel(g) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for (d, gd) in g.iter().enumerate() {
                        s += gd * col[(i + n - d) % n];
                    }
                    *o = s;
                }
            }
        }
    }

    /// Transports both species by `dt` in place.
    pub fn apply(&self, f: &mut DistributionPair, grid: &PhaseGrid) {
        if self.shifts.is_empty() {
            return;
        }
        let nc = self.n_cells;
        let nv = grid.n_velocity();
        let axis_n = grid.velocity.n_per_axis();
        for k in 0..2 {
            let values = f.species_mut(k).values_mut();
            // Velocity-major copy so each node's spatial profile is contiguous.
            let mut cols = vec![0.0; nc * nv];
            for c in 0..nc {
                for j in 0..nv {
                    cols[j * nc + c] = values[c * nv + j];
                }
            }
            let mut shifted = vec![0.0; nc * nv];
            shifted
                .par_chunks_mut(nc)
                .zip(cols.par_chunks(nc))
                .enumerate()
                .for_each(|(j, (out, col))| {
                    let ix = grid.velocity.axis_indices(j)[0];
                    debug_assert!(ix < axis_n);
                    self.apply_column(&self.shifts[ix], col, out);
                });
            for c in 0..nc {
                for j in 0..nv {
                    values[c * nv + j] = shifted[j * nc + c];
                }
            }
        }
    }
}

/// Shifts every velocity node's spatial profile by `v_x dt` on the torus
/// using periodic cubic-spline interpolation. A no-op on homogeneous grids.
pub fn advect(f: &DistributionPair, dt: f64, grid: &PhaseGrid) -> DistributionPair {
    let mut out = f.clone();
    AdvectionPlan::new(grid, dt).apply(&mut out, grid);
    out
}
