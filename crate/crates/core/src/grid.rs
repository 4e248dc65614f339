//! Phase-space discretization.
//!
//! The velocity lattice is a uniform midpoint-rule tensor grid on the cube
//! `[-v_max, v_max]^3`. With an even number of points per axis there is no node
//! at the origin and the node set is closed under `v -> -v`, so odd moments of
//! radially symmetric functions vanish up to summation rounding.
//!
//! Velocity nodes are stored in row-major order `(ix, iy, iz)` with `iz`
//! fastest. Phase-space arrays are stored cell-major: the velocity block of
//! cell `c` occupies `values[c * n_v .. (c + 1) * n_v]`.

use crate::error::{Error, Result};

/// Uniform midpoint velocity lattice on `[-v_max, v_max]^3`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    v_max: f64,
    n_per_axis: usize,
    spacing: f64,
    axis: Vec<f64>,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl VelocityGrid {
    pub fn new(v_max: f64, n_per_axis: usize) -> Result<Self> {
        if !(v_max.is_finite() && v_max > 0.0) {
            return Err(Error::InvalidGrid(format!("v_max must be positive, got {v_max}")));
        }
        if n_per_axis % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_per_axis must be even so the lattice is symmetric under v -> -v, got {n_per_axis}"
            )));
        }
        if n_per_axis == 0 {
            return Err(Error::InvalidGrid("n_per_axis must be positive".into()));
        }
        let spacing = 2.0 * v_max / n_per_axis as f64;
        // Node k sits at -v_max + (k + 1/2) h; writing it as (k - n/2 + 1/2) h keeps
        // the mirror node k' = n-1-k exactly equal to its negation.
        let half = (n_per_axis / 2) as f64;
        let axis: Vec<f64> = (0..n_per_axis)
            .map(|k| (k as f64 - half + 0.5) * spacing)
            .collect();
        let mut nodes = Vec::with_capacity(n_per_axis.pow(3));
        for &x in &axis {
            for &y in &axis {
                for &z in &axis {
                    nodes.push([x, y, z]);
                }
            }
        }
        let weights = vec![spacing.powi(3); nodes.len()];
        Ok(Self {
            v_max,
            n_per_axis,
            spacing,
            axis,
            nodes,
            weights,
        })
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn n_per_axis(&self) -> usize {
        self.n_per_axis
    }

    /// Lattice spacing `h = 2 v_max / n_per_axis`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Node coordinates along one axis (shared by all three axes).
    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of velocity nodes, `n_per_axis^3`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the node `-v` for node `j`.
    pub fn mirror(&self, j: usize) -> usize {
        self.len() - 1 - j
    }

    /// Splits a flat node index into per-axis indices.
    pub fn axis_indices(&self, j: usize) -> [usize; 3] {
        let n = self.n_per_axis;
        [j / (n * n), (j / n) % n, j % n]
    }

    /// Evaluates `f` at every node.
    pub fn sample(&self, mut f: impl FnMut(&[f64; 3]) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|v| f(v)).collect()
    }

    /// Evaluates a tensor-product function `gx(vx) * gy(vy) * gz(vz)` from its
    /// three axis factors.
    pub fn tensor(&self, gx: &[f64], gy: &[f64], gz: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for &a in gx {
            for &b in gy {
                let ab = a * b;
                for &c in gz {
                    out.push(ab * c);
                }
            }
        }
        out
    }

    fn check(&self, g: &[f64]) -> Result<()> {
        if g.len() != self.len() {
            return Err(Error::SizeMismatch {
                expected: self.len(),
                got: g.len(),
            });
        }
        Ok(())
    }
}

/// Builds the midpoint velocity lattice used throughout the crate.
pub fn make_velocity_grid(v_max: f64, n_per_axis: usize) -> Result<VelocityGrid> {
    VelocityGrid::new(v_max, n_per_axis)
}

/// Periodic spatial lattice: a single cell (`dim = 0`, no transport) or a 1-D torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    n_cells: usize,
    length: f64,
    dim: usize,
}

impl SpatialGrid {
    /// Spatially homogeneous problem: one cell of unit measure.
    pub fn homogeneous() -> Self {
        Self {
            n_cells: 1,
            length: 1.0,
            dim: 0,
        }
    }

    pub fn periodic(n_cells: usize, length: f64) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidGrid("n_cells must be positive".into()));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        Ok(Self {
            n_cells,
            length,
            dim: 1,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_width(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    /// Cell-centre coordinate.
    pub fn center(&self, cell: usize) -> f64 {
        (cell as f64 + 0.5) * self.cell_width()
    }
}

/// Product of a spatial lattice and a velocity lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub space: SpatialGrid,
    pub velocity: VelocityGrid,
}

impl PhaseGrid {
    pub fn new(space: SpatialGrid, velocity: VelocityGrid) -> Self {
        Self { space, velocity }
    }

    pub fn homogeneous(velocity: VelocityGrid) -> Self {
        Self::new(SpatialGrid::homogeneous(), velocity)
    }

    pub fn n_cells(&self) -> usize {
        self.space.n_cells()
    }

    pub fn n_velocity(&self) -> usize {
        self.velocity.len()
    }

    pub fn len(&self) -> usize {
        self.n_cells() * self.n_velocity()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A real function on the phase grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    n_cells: usize,
    n_velocity: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: &PhaseGrid) -> Self {
        Self {
            n_cells: grid.n_cells(),
            n_velocity: grid.n_velocity(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: &PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            n_cells: grid.n_cells(),
            n_velocity: grid.n_velocity(),
            values,
        })
    }

    /// Repeats one velocity profile in every cell.
    pub fn uniform(grid: &PhaseGrid, profile: &[f64]) -> Result<Self> {
        grid.velocity.check(profile)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.n_cells() {
            values.extend_from_slice(profile);
        }
        Ok(Self {
            n_cells: grid.n_cells(),
            n_velocity: grid.n_velocity(),
            values,
        })
    }

    /// Builds a function cell by cell.
    pub fn from_cells(grid: &PhaseGrid, mut cell: impl FnMut(usize) -> Result<Vec<f64>>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for c in 0..grid.n_cells() {
            let block = cell(c)?;
            grid.velocity.check(&block)?;
            values.extend_from_slice(&block);
        }
        Ok(Self {
            n_cells: grid.n_cells(),
            n_velocity: grid.n_velocity(),
            values,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_velocity(&self) -> usize {
        self.n_velocity
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn cell(&self, c: usize) -> &[f64] {
        &self.values[c * self.n_velocity..(c + 1) * self.n_velocity]
    }

    pub fn cell_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.values[c * self.n_velocity..(c + 1) * self.n_velocity]
    }

    pub fn cells(&self) -> std::slice::Chunks<'_, f64> {
        self.values.chunks(self.n_velocity)
    }

    pub fn cells_mut(&mut self) -> std::slice::ChunksMut<'_, f64> {
        self.values.chunks_mut(self.n_velocity)
    }

    pub fn matches(&self, grid: &PhaseGrid) -> bool {
        self.n_cells == grid.n_cells() && self.n_velocity == grid.n_velocity()
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.n_cells == other.n_cells && self.n_velocity == other.n_velocity
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|x| *x *= s);
        out
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::GridMismatch);
        }
        let mut out = self.clone();
        for (o, x) in out.values.iter_mut().zip(&other.values) {
            *o += s * x;
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// Whether a pair holds absolute distributions `(F1, F2)` or weighted
/// perturbations `(f1, f2)` with `F_k = mu_k + sqrt(mu_k) f_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Absolute,
    Perturbation,
}

/// The two species' grid functions.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionPair {
    pub first: GridFunction,
    pub second: GridFunction,
    pub kind: PairKind,
}

impl DistributionPair {
    pub fn new(first: GridFunction, second: GridFunction, kind: PairKind) -> Result<Self> {
        if !first.same_shape(&second) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { first, second, kind })
    }

    pub fn zeros(grid: &PhaseGrid, kind: PairKind) -> Self {
        Self {
            first: GridFunction::zeros(grid),
            second: GridFunction::zeros(grid),
            kind,
        }
    }

    /// Same velocity profiles in every cell.
    pub fn uniform(grid: &PhaseGrid, first: &[f64], second: &[f64], kind: PairKind) -> Result<Self> {
        Ok(Self {
            first: GridFunction::uniform(grid, first)?,
            second: GridFunction::uniform(grid, second)?,
            kind,
        })
    }

    pub fn species(&self, k: usize) -> &GridFunction {
        match k {
            0 => &self.first,
            _ => &self.second,
        }
    }

    pub fn species_mut(&mut self, k: usize) -> &mut GridFunction {
        match k {
            0 => &mut self.first,
            _ => &mut self.second,
        }
    }

    pub fn matches(&self, grid: &PhaseGrid) -> bool {
        self.first.matches(grid) && self.second.matches(grid)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            first: self.first.scaled(s),
            second: self.second.scaled(s),
            kind: self.kind,
        }
    }

    /// `self + s * other`, keeping `self.kind`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        Ok(Self {
            first: self.first.axpy(s, &other.first)?,
            second: self.second.axpy(s, &other.second)?,
            kind: self.kind,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.first.max_abs().max(self.second.max_abs())
    }
}

/// Discrete `L^2_v` inner product `sum_j w_j g_j h_j`.
pub fn inner_product_v(g: &[f64], h: &[f64], grid: &VelocityGrid) -> Result<f64> {
    grid.check(g)?;
    grid.check(h)?;
    Ok(dot_v(g, h, grid))
}

/// Unchecked variant for hot loops where sizes are known to agree.
pub(crate) fn dot_v(g: &[f64], h: &[f64], grid: &VelocityGrid) -> f64 {
    // Uniform weights: factor the cell volume out of the sum.
    let w = grid.weights[0];
    w * g.iter().zip(h).map(|(a, b)| a * b).sum::<f64>()
}

/// Discrete `L^2_{x,v}` inner product of two pairs: cell-width weighted sum of
/// the per-species velocity inner products.
pub fn inner_product_xv(a: &DistributionPair, b: &DistributionPair, grid: &PhaseGrid) -> Result<f64> {
    if !a.matches(grid) || !b.matches(grid) {
        return Err(Error::GridMismatch);
    }
    let dx = grid.space.cell_width();
    let v = &grid.velocity;
    let mut total = 0.0;
    for c in 0..grid.n_cells() {
        total += dot_v(a.first.cell(c), b.first.cell(c), v) + dot_v(a.second.cell(c), b.second.cell(c), v);
    }
    Ok(dx * total)
}

/// Squared discrete `L^2_{x,v}` norm of a pair.
pub fn norm_sq_xv(a: &DistributionPair, grid: &PhaseGrid) -> Result<f64> {
    inner_product_xv(a, a, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_point_lattice() {
        let g = make_velocity_grid(1.0, 2).unwrap();
        assert_eq!(g.axis(), &[-0.5, 0.5]);
        assert_eq!(g.len(), 8);
        assert!(g.weights().iter().all(|&w| w == 1.0));
        for v in g.nodes() {
            assert!(v.iter().all(|c| c.abs() == 0.5));
        }
    }

    #[test]
    fn odd_axis_count_rejected() {
        assert!(matches!(make_velocity_grid(4.0, 15), Err(Error::InvalidGrid(_))));
        assert!(make_velocity_grid(-1.0, 16).is_err());
        assert!(make_velocity_grid(0.0, 16).is_err());
    }

    #[test]
    fn node_set_is_closed_under_negation() {
        for &(vm, n) in &[(1.0, 2), (4.0, 16), (6.0, 24), (3.3, 10)] {
            let g = make_velocity_grid(vm, n).unwrap();
            for j in 0..g.len() {
                let k = g.mirror(j);
                let (a, b) = (g.nodes()[j], g.nodes()[k]);
                assert_eq!(a, [-b[0], -b[1], -b[2]]);
                assert_eq!(g.weights()[j], g.weights()[k]);
            }
        }
    }

    #[test]
    fn weights_sum_to_cube_volume() {
        let g = make_velocity_grid(4.0, 16).unwrap();
        let ones = vec![1.0; g.len()];
        assert_abs_diff_eq!(inner_product_v(&ones, &ones, &g).unwrap(), 512.0, epsilon = 1e-9);
        let zeros = vec![0.0; g.len()];
        assert_eq!(inner_product_v(&zeros, &zeros, &g).unwrap(), 0.0);
    }

    #[test]
    fn size_mismatch_rejected() {
        let g = make_velocity_grid(4.0, 8).unwrap();
        let a = vec![1.0; g.len()];
        let b = vec![1.0; g.len() - 1];
        assert!(matches!(inner_product_v(&a, &b, &g), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn xv_product_rejects_foreign_pairs() {
        let v = make_velocity_grid(4.0, 8).unwrap();
        let g1 = PhaseGrid::homogeneous(v.clone());
        let g2 = PhaseGrid::new(SpatialGrid::periodic(4, 1.0).unwrap(), v);
        let a = DistributionPair::zeros(&g1, PairKind::Perturbation);
        let b = DistributionPair::zeros(&g2, PairKind::Perturbation);
        assert_eq!(inner_product_xv(&a, &a, &g1).unwrap(), 0.0);
        assert!(matches!(inner_product_xv(&a, &b, &g1), Err(Error::GridMismatch)));
    }

    #[test]
    fn tensor_matches_pointwise_product() {
        let g = make_velocity_grid(2.0, 4).unwrap();
        let fx: Vec<f64> = g.axis().iter().map(|x| 1.0 + x).collect();
        let fy: Vec<f64> = g.axis().iter().map(|x| x * x).collect();
        let fz: Vec<f64> = g.axis().iter().map(|x| 2.0 - x).collect();
        let t = g.tensor(&fx, &fy, &fz);
        let direct = g.sample(|v| (1.0 + v[0]) * v[1] * v[1] * (2.0 - v[2]));
        assert_eq!(t, direct);
        for j in 0..g.len() {
            let [i, k, l] = g.axis_indices(j);
            assert_eq!(g.nodes()[j], [g.axis()[i], g.axis()[k], g.axis()[l]]);
        }
    }
}
