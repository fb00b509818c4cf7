//! Discretization layer: uniform lattices over boxes in R^{2n+1}, grid
//! functions, and the discrete horizontal calculus.
//!
//! The discrete gradient uses centered differences (with extension by zero
//! outside the box); the divergence is *defined* as its negative adjoint
//! under the trapezoid quadrature, so summation by parts is exact to
//! rounding. Every inequality checker downstream leans on that.

mod ops;

pub mod io;

pub use ops::{
    d1p_norm, default_eps, gradient_magnitude_pow, h_divergence, h_gradient, integrate,
    p_sub_laplacian, weighted_inner,
};

pub(crate) use ops::neumaier as neumaier_sum;

use crate::error::{Error, Result};
use crate::hgroup::{AnalyticField, GroupPoint};
use std::sync::Arc;

/// Uniform Cartesian lattice over a box in R^{2n+1}, axes ordered
/// (x_1..x_n, y_1..y_n, t), node-centered including the boundary layer.
#[derive(Debug, Clone)]
pub struct HGrid {
    n: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    shape: Vec<usize>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
    boundary: Vec<bool>,
    /// Trapezoid quadrature weight per node (spacings folded in).
    weights: Vec<f64>,
}

impl PartialEq for HGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.lower == other.lower
            && self.upper == other.upper
            && self.shape == other.shape
    }
}

impl HGrid {
    pub fn new(n: usize, lower: Vec<f64>, upper: Vec<f64>, shape: Vec<usize>) -> Result<Arc<Self>> {
        let axes = 2 * n + 1;
        if n < 1 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if lower.len() != axes || upper.len() != axes || shape.len() != axes {
            return Err(Error::InvalidParameter(format!(
                "expected {axes} axes, got lower {}, upper {}, shape {}",
                lower.len(),
                upper.len(),
                shape.len()
            )));
        }
        if shape.iter().any(|&m| m < 3) {
            return Err(Error::InvalidParameter(
                "need at least 3 nodes per axis".into(),
            ));
        }
        let mut spacing = Vec::with_capacity(axes);
        for a in 0..axes {
            let h = (upper[a] - lower[a]) / (shape[a] - 1) as f64;
            if !(h > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "axis {a}: spacing must be strictly positive, got {h}"
                )));
            }
            spacing.push(h);
        }
        let mut strides = vec![0usize; axes];
        let mut acc = 1usize;
        for a in (0..axes).rev() {
            strides[a] = acc;
            acc *= shape[a];
        }
        let node_count = acc;

        let mut boundary = vec![false; node_count];
        let mut weights = vec![1.0; node_count];
        let cell: f64 = spacing.iter().product();
        let mut idx = vec![0usize; axes];
        for lin in 0..node_count {
            let mut w = cell;
            let mut on_boundary = false;
            for a in 0..axes {
                let pos = idx[a];
                if pos == 0 || pos == shape[a] - 1 {
                    on_boundary = true;
                    w *= 0.5;
                }
            }
            boundary[lin] = on_boundary;
            weights[lin] = w;
            // advance the multi-index (row-major, last axis fastest)
            for a in (0..axes).rev() {
                idx[a] += 1;
                if idx[a] < shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }

        Ok(Arc::new(HGrid {
            n,
            lower,
            upper,
            shape,
            spacing,
            strides,
            boundary,
            weights,
        }))
    }

    /// The unit box [0,1]^{2n+1} with `m` nodes per axis.
    pub fn unit_box(n: usize, m: usize) -> Result<Arc<Self>> {
        let axes = 2 * n + 1;
        HGrid::new(n, vec![0.0; axes], vec![1.0; axes], vec![m; axes])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn axes(&self) -> usize {
        2 * self.n + 1
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn node_count(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_boundary(&self, lin: usize) -> bool {
        self.boundary[lin]
    }

    pub fn quad_weight(&self, lin: usize) -> f64 {
        self.weights[lin]
    }

    pub(crate) fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn volume(&self) -> f64 {
        (0..self.axes()).map(|a| self.upper[a] - self.lower[a]).product()
    }

    pub fn diameter(&self) -> f64 {
        (0..self.axes())
            .map(|a| (self.upper[a] - self.lower[a]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Position of `lin` along one axis.
    pub fn axis_pos(&self, lin: usize, axis: usize) -> usize {
        (lin / self.strides[axis]) % self.shape[axis]
    }

    pub fn coords(&self, lin: usize) -> Vec<f64> {
        (0..self.axes())
            .map(|a| self.lower[a] + self.axis_pos(lin, a) as f64 * self.spacing[a])
            .collect()
    }

    pub fn coords_into(&self, lin: usize, out: &mut [f64]) {
        for a in 0..self.axes() {
            out[a] = self.lower[a] + self.axis_pos(lin, a) as f64 * self.spacing[a];
        }
    }

    pub fn group_point(&self, lin: usize) -> GroupPoint {
        GroupPoint::from_coords(&self.coords(lin)).expect("grid coordinates are a valid point")
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(move |&lin| !self.boundary[lin])
    }

    /// Nodes at grid distance >= `depth` from every face; depth 1 is the
    /// interior. Consistency of the composed divergence-of-gradient needs
    /// depth 2 because near-boundary gradient values see the zero extension.
    pub fn deep_interior(&self, depth: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(move |&lin| {
            (0..self.axes()).all(|a| {
                let pos = self.axis_pos(lin, a);
                pos >= depth && pos + depth < self.shape[a]
            })
        })
    }

    pub fn interior_count(&self) -> usize {
        self.shape.iter().map(|&m| m - 2).product()
    }
}

/// Real values on the nodes of an `HGrid`; the discrete stand-in for a
/// member of the horizontal Sobolev space when the Dirichlet flag is set.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<HGrid>,
    values: Vec<f64>,
    dirichlet: bool,
}

impl GridFunction {
    pub fn new(grid: Arc<HGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidParameter(format!(
                "value count {} does not match node count {}",
                values.len(),
                grid.node_count()
            )));
        }
        Ok(GridFunction {
            grid,
            values,
            dirichlet: false,
        })
    }

    /// Dirichlet grid function: boundary nodes are pinned to exactly 0.
    pub fn dirichlet(grid: Arc<HGrid>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidParameter(format!(
                "value count {} does not match node count {}",
                values.len(),
                grid.node_count()
            )));
        }
        for lin in 0..values.len() {
            if grid.is_boundary(lin) {
                values[lin] = 0.0;
            }
        }
        Ok(GridFunction {
            grid,
            values,
            dirichlet: true,
        })
    }

    pub fn zeros(grid: Arc<HGrid>, dirichlet: bool) -> Self {
        let values = vec![0.0; grid.node_count()];
        GridFunction {
            grid,
            values,
            dirichlet,
        }
    }

    pub fn constant(grid: Arc<HGrid>, c: f64) -> Self {
        let values = vec![c; grid.node_count()];
        GridFunction {
            grid,
            values,
            dirichlet: false,
        }
    }

    pub fn from_fn(grid: Arc<HGrid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut coords = vec![0.0; grid.axes()];
        let values = (0..grid.node_count())
            .map(|lin| {
                grid.coords_into(lin, &mut coords);
                f(&coords)
            })
            .collect();
        GridFunction {
            grid,
            values,
            dirichlet: false,
        }
    }

    /// Sample a closed-form field at the nodes.
    pub fn sample(grid: Arc<HGrid>, field: &AnalyticField) -> Result<Self> {
        if field.n() != grid.n() {
            return Err(Error::DimensionMismatch {
                expected: grid.n(),
                got: field.n(),
            });
        }
        Ok(Self::from_fn(grid, |coords| field.value_at(coords)))
    }

    /// Sample then pin the boundary layer to zero.
    pub fn sample_dirichlet(grid: Arc<HGrid>, field: &AnalyticField) -> Result<Self> {
        let sampled = Self::sample(grid.clone(), field)?;
        GridFunction::dirichlet(grid, sampled.values)
    }

    pub fn grid(&self) -> &Arc<HGrid> {
        &self.grid
    }

    pub fn is_dirichlet(&self) -> bool {
        self.dirichlet
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, lin: usize) -> f64 {
        self.values[lin]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            dirichlet: false,
        }
    }

    pub fn zip(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if !same_grid(self.grid(), other.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(GridFunction {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            dirichlet: false,
        })
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| c * v).collect(),
            dirichlet: self.dirichlet,
        }
    }

    pub fn add_scaled(&self, other: &GridFunction, c: f64) -> Result<GridFunction> {
        if !same_grid(self.grid(), other.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(GridFunction {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + c * b)
                .collect(),
            dirichlet: self.dirichlet && other.dirichlet,
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_interior(&self) -> f64 {
        self.grid
            .interior()
            .map(|lin| self.values[lin])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_interior(&self) -> f64 {
        self.grid
            .interior()
            .map(|lin| self.values[lin])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Relative sup-distance, normalized by the larger sup-norm.
    pub fn rel_sup_distance(&self, other: &GridFunction) -> Result<f64> {
        if !same_grid(self.grid(), other.grid()) {
            return Err(Error::GridMismatch);
        }
        let scale = self.sup_norm().max(other.sup_norm());
        let diff = self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()));
        Ok(if scale == 0.0 { diff } else { diff / scale })
    }

    pub fn bit_equal(&self, other: &GridFunction) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// A 2n-component horizontal vector field on the nodes of a grid
/// (components ordered like the gradient: X_1..X_n then Y_1..Y_n).
#[derive(Debug, Clone)]
pub struct HVectorField {
    grid: Arc<HGrid>,
    comps: Vec<Vec<f64>>,
}

impl HVectorField {
    pub fn new(grid: Arc<HGrid>, comps: Vec<Vec<f64>>) -> Result<Self> {
        if comps.len() != 2 * grid.n() {
            return Err(Error::InvalidParameter(format!(
                "expected {} components, got {}",
                2 * grid.n(),
                comps.len()
            )));
        }
        for c in &comps {
            if c.len() != grid.node_count() {
                return Err(Error::InvalidParameter(
                    "component length does not match node count".into(),
                ));
            }
        }
        Ok(HVectorField { grid, comps })
    }

    pub fn zeros(grid: Arc<HGrid>) -> Self {
        let comps = vec![vec![0.0; grid.node_count()]; 2 * grid.n()];
        HVectorField { grid, comps }
    }

    pub fn grid(&self) -> &Arc<HGrid> {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    /// Euclidean length of the 2n-vector at one node.
    pub fn magnitude(&self, lin: usize) -> f64 {
        self.comps
            .iter()
            .map(|c| c[lin] * c[lin])
            .sum::<f64>()
            .sqrt()
    }

    pub fn dot_at(&self, other: &HVectorField, lin: usize) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a[lin] * b[lin])
            .sum()
    }

    /// Scale every component by a nodewise factor.
    pub fn scale_nodewise(&self, factor: &[f64]) -> HVectorField {
        let comps = self
            .comps
            .iter()
            .map(|c| c.iter().zip(factor).map(|(&v, &s)| v * s).collect())
            .collect();
        HVectorField {
            grid: self.grid.clone(),
            comps,
        }
    }
}

pub fn same_grid(a: &Arc<HGrid>, b: &Arc<HGrid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_construction_and_masks() {
        let grid = HGrid::unit_box(1, 5).unwrap();
        assert_eq!(grid.axes(), 3);
        assert_eq!(grid.node_count(), 125);
        assert_eq!(grid.interior_count(), 27);
        assert_eq!(grid.interior().count(), 27);
        assert!((grid.spacing()[0] - 0.25).abs() < 1e-15);

        // boundary mask marks exactly the outermost layer
        let mut boundary_count = 0;
        for lin in 0..grid.node_count() {
            let on_edge = (0..3).any(|a| {
                let pos = grid.axis_pos(lin, a);
                pos == 0 || pos == 4
            });
            assert_eq!(grid.is_boundary(lin), on_edge);
            boundary_count += usize::from(on_edge);
        }
        assert_eq!(boundary_count, 125 - 27);
    }

    #[test]
    fn rejects_degenerate_boxes() {
        assert!(HGrid::new(1, vec![0.0; 3], vec![1.0, 0.0, 1.0], vec![5; 3]).is_err());
        assert!(HGrid::new(1, vec![0.0; 3], vec![1.0; 3], vec![2, 5, 5]).is_err());
        assert!(HGrid::new(1, vec![0.0; 2], vec![1.0; 3], vec![5; 3]).is_err());
    }

    #[test]
    fn dirichlet_pins_boundary() {
        let grid = HGrid::unit_box(1, 5).unwrap();
        let ones = vec![1.0; grid.node_count()];
        let u = GridFunction::dirichlet(grid.clone(), ones).unwrap();
        for lin in 0..grid.node_count() {
            if grid.is_boundary(lin) {
                assert_eq!(u.value(lin), 0.0);
            } else {
                assert_eq!(u.value(lin), 1.0);
            }
        }
        assert!(u.is_dirichlet());
    }

    #[test]
    fn coords_roundtrip() {
        let grid = HGrid::new(
            2,
            vec![-1.0, 0.0, -1.0, 0.0, 2.0],
            vec![1.0, 2.0, 1.0, 2.0, 4.0],
            vec![3, 4, 5, 3, 4],
        )
        .unwrap();
        for lin in [0, 1, 17, grid.node_count() - 1] {
            let coords = grid.coords(lin);
            let q = grid.group_point(lin);
            assert_eq!(q.x()[0], coords[0]);
            assert_eq!(q.y()[1], coords[3]);
            assert_eq!(q.t(), coords[4]);
        }
    }

    #[test]
    fn deep_interior_shrinks() {
        let grid = HGrid::unit_box(1, 7).unwrap();
        assert_eq!(grid.deep_interior(1).count(), 125);
        assert_eq!(grid.deep_interior(2).count(), 27);
    }
}
