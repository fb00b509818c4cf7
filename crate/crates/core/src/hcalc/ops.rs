//! Discrete horizontal calculus: gradient, adjoint divergence, the
//! p-sub-Laplacian, quadrature and norms.
//!
//! All reductions run in linear node order with compensated (Neumaier)
//! accumulation, so results are identical from run to run.

use super::{same_grid, GridFunction, HGrid, HVectorField};
use crate::error::{Error, Result};

/// Centered difference along one axis, with the function extended by zero
/// outside the box (the extension only ever matters for Dirichlet data).
fn diff_axis(grid: &HGrid, values: &[f64], axis: usize) -> Vec<f64> {
    let stride = grid.strides[axis];
    let len = grid.shape[axis];
    let inv2h = 1.0 / (2.0 * grid.spacing[axis]);
    let mut out = vec![0.0; values.len()];
    for lin in 0..values.len() {
        let pos = (lin / stride) % len;
        let up = if pos + 1 < len { values[lin + stride] } else { 0.0 };
        let dn = if pos > 0 { values[lin - stride] } else { 0.0 };
        out[lin] = (up - dn) * inv2h;
    }
    out
}

/// Adjoint of `diff_axis` with respect to the trapezoid inner product:
/// <D u, v>_w = <u, adjoint_diff_axis(v)>_w for all u, v.
fn adjoint_diff_axis(grid: &HGrid, values: &[f64], axis: usize) -> Vec<f64> {
    let stride = grid.strides[axis];
    let len = grid.shape[axis];
    let inv2h = 1.0 / (2.0 * grid.spacing[axis]);
    let w1 = |pos: usize| -> f64 {
        if pos == 0 || pos == len - 1 {
            0.5
        } else {
            1.0
        }
    };
    let mut out = vec![0.0; values.len()];
    for lin in 0..values.len() {
        let pos = (lin / stride) % len;
        let lo = if pos > 0 {
            w1(pos - 1) * values[lin - stride]
        } else {
            0.0
        };
        let hi = if pos + 1 < len {
            w1(pos + 1) * values[lin + stride]
        } else {
            0.0
        };
        out[lin] = (lo - hi) * inv2h / w1(pos);
    }
    out
}

/// Coefficient of the d/dt part of gradient component `comp` at a node:
/// 2 y_i for the X_i components, -2 x_i for the Y_i components, evaluated
/// at the node coordinates.
fn coefficient(grid: &HGrid, comp: usize, lin: usize) -> f64 {
    let n = grid.n;
    if comp < n {
        let axis = n + comp;
        2.0 * (grid.lower[axis] + grid.axis_pos(lin, axis) as f64 * grid.spacing[axis])
    } else {
        let axis = comp - n;
        -2.0 * (grid.lower[axis] + grid.axis_pos(lin, axis) as f64 * grid.spacing[axis])
    }
}

/// Discrete horizontal gradient: component i is D_{x_i} u + 2 y_i D_t u,
/// component n+i is D_{y_i} u - 2 x_i D_t u, all centered differences.
pub fn h_gradient(u: &GridFunction) -> HVectorField {
    let grid = u.grid().clone();
    let n = grid.n();
    let t_axis = 2 * n;
    let dt = diff_axis(&grid, u.values(), t_axis);
    let mut comps = Vec::with_capacity(2 * n);
    for c in 0..2 * n {
        let mut comp = diff_axis(&grid, u.values(), c);
        for (lin, v) in comp.iter_mut().enumerate() {
            *v += coefficient(&grid, c, lin) * dt[lin];
        }
        comps.push(comp);
    }
    HVectorField { grid, comps }
}

/// The exact negative adjoint of `h_gradient` under the quadrature inner
/// product: <h_gradient(u), F>_w = -<u, h_divergence(F)>_w for all u.
pub fn h_divergence(field: &HVectorField) -> GridFunction {
    let grid = field.grid().clone();
    let n = grid.n();
    let t_axis = 2 * n;
    let m = grid.node_count();
    let mut div = vec![0.0; m];
    let mut weighted = vec![0.0; m];
    for c in 0..2 * n {
        let along_axis = adjoint_diff_axis(&grid, field.component(c), c);
        for lin in 0..m {
            weighted[lin] = coefficient(&grid, c, lin) * field.component(c)[lin];
        }
        let along_t = adjoint_diff_axis(&grid, &weighted, t_axis);
        for lin in 0..m {
            div[lin] -= along_axis[lin] + along_t[lin];
        }
    }
    GridFunction {
        grid,
        values: div,
        dirichlet: false,
    }
}

/// Delta_{H,p} u = div( (|grad u|^2 + eps^2)^{(p-2)/2} grad u ).
///
/// Returns the operator itself, not its negative. `eps` regularizes the
/// singular weight for p < 2; with eps = 0 and p >= 2 this is the
/// unregularized operator.
pub fn p_sub_laplacian(u: &GridFunction, p: f64, eps: f64) -> Result<GridFunction> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be nonnegative, got {eps}"
        )));
    }
    let grad = h_gradient(u);
    let m = u.grid().node_count();
    let expo = (p - 2.0) / 2.0;
    let mut sigma = vec![0.0; m];
    for (lin, s) in sigma.iter_mut().enumerate() {
        let s2 = grad
            .comps
            .iter()
            .map(|c| c[lin] * c[lin])
            .sum::<f64>()
            + eps * eps;
        if s2 == 0.0 && p < 2.0 {
            return Err(Error::SingularWeight);
        }
        *s = s2.powf(expo);
    }
    let flux = grad.scale_nodewise(&sigma);
    Ok(h_divergence(&flux))
}

/// Compensated (Neumaier) summation in a fixed order.
pub(crate) fn neumaier(items: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in items {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Quadrature over the box: trapezoid weights (one half on boundary
/// layers), deterministic compensated accumulation.
pub fn integrate(w: &GridFunction) -> f64 {
    let grid = w.grid();
    neumaier((0..grid.node_count()).map(|lin| grid.weights[lin] * w.values()[lin]))
}

/// <a, b> under the quadrature weights.
pub fn weighted_inner(a: &GridFunction, b: &GridFunction) -> Result<f64> {
    if !same_grid(a.grid(), b.grid()) {
        return Err(Error::GridMismatch);
    }
    let grid = a.grid();
    Ok(neumaier(
        (0..grid.node_count()).map(|lin| grid.weights[lin] * a.value(lin) * b.value(lin)),
    ))
}

impl HVectorField {
    /// <F, G> under the quadrature weights, summed over components.
    pub fn weighted_inner(&self, other: &HVectorField) -> Result<f64> {
        if !same_grid(self.grid(), other.grid()) {
            return Err(Error::GridMismatch);
        }
        let grid = self.grid();
        Ok(neumaier((0..grid.node_count()).map(|lin| {
            grid.weights[lin] * self.dot_at(other, lin)
        })))
    }
}

/// |grad_H u|^p as a grid function.
pub fn gradient_magnitude_pow(u: &GridFunction, p: f64) -> GridFunction {
    let grad = h_gradient(u);
    let grid = u.grid().clone();
    let values = (0..grid.node_count())
        .map(|lin| grad.magnitude(lin).powf(p))
        .collect();
    GridFunction {
        grid,
        values,
        dirichlet: false,
    }
}

/// The D^{1,p}_0 seminorm ( integral of |grad_H u|^p )^{1/p}.
pub fn d1p_norm(u: &GridFunction, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    if !u.is_dirichlet() {
        return Err(Error::InvalidParameter(
            "d1p_norm requires a Dirichlet grid function".into(),
        ));
    }
    Ok(integrate(&gradient_magnitude_pow(u, p)).powf(1.0 / p))
}

/// Default regularizer: 1e-8 scaled by the inverse domain diameter.
pub fn default_eps(grid: &HGrid) -> f64 {
    1e-8 / grid.diameter()
}
