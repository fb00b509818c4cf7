//! First-eigenvalue machinery: Rayleigh-quotient minimization for
//! lambda_1(-Delta_p - a |.|^{p-2}.) over Dirichlet fields, plus the dense
//! symmetric eigensolver and direct linear solver used as p = 2 oracles.

use super::SolverConfig;
use crate::error::{Error, Result};
use crate::hcalc::{
    gradient_magnitude_pow, integrate, p_sub_laplacian, same_grid, weighted_inner, GridFunction,
    HGrid,
};
use crate::picone::phi_p;
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Rayleigh quotient (int |grad v|^p - int a |v|^p) / int |v|^p.
fn rayleigh(v: &GridFunction, a: &GridFunction, p: f64) -> Result<f64> {
    let num = integrate(&gradient_magnitude_pow(v, p))
        - integrate(&v.zip(a, |vv, av| av * vv.abs().powf(p))?);
    let den = integrate(&v.map(|vv| vv.abs().powf(p)));
    if !(den > 0.0) {
        return Err(Error::InvalidParameter("v must not vanish".into()));
    }
    Ok(num / den)
}

fn normalize_p(v: &GridFunction, p: f64) -> GridFunction {
    let den = integrate(&v.map(|vv| vv.abs().powf(p)));
    let mut out = v.scale(den.powf(-1.0 / p));
    // orient so the sup node is positive; the quotient is sign-blind
    let mut extreme = 0.0f64;
    for &val in out.values() {
        if val.abs() > extreme.abs() {
            extreme = val;
        }
    }
    if extreme < 0.0 {
        out = out.scale(-1.0);
    }
    out
}

/// Smooth positive Dirichlet bump: the product of 4 s (1 - s) over the
/// normalized axis coordinates. The default eigen iteration start.
pub(crate) fn default_bump(grid: &Arc<HGrid>) -> GridFunction {
    let lower = grid.lower().to_vec();
    let upper = grid.upper().to_vec();
    GridFunction::dirichlet(
        grid.clone(),
        (0..grid.node_count())
            .map(|lin| {
                let coords = grid.coords(lin);
                coords
                    .iter()
                    .enumerate()
                    .map(|(a, &c)| {
                        let s = (c - lower[a]) / (upper[a] - lower[a]);
                        4.0 * s * (1.0 - s)
                    })
                    .product()
            })
            .collect(),
    )
    .expect("bump construction")
}

/// Minimize the Rayleigh quotient by normalized descent starting from the
/// default bump. Returns the minimum and the normalized minimizer.
pub fn lambda1(
    a: &GridFunction,
    p: f64,
    config: &SolverConfig,
    grid: &Arc<HGrid>,
) -> Result<(f64, GridFunction)> {
    lambda1_from(&default_bump(grid), a, p, config)
}

/// Same minimization from a caller-supplied start (restart experiments,
/// homogeneity checks).
pub fn lambda1_from(
    start: &GridFunction,
    a: &GridFunction,
    p: f64,
    config: &SolverConfig,
) -> Result<(f64, GridFunction)> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    if !same_grid(start.grid(), a.grid()) {
        return Err(Error::GridMismatch);
    }
    if !start.is_dirichlet() {
        return Err(Error::InvalidParameter(
            "eigen iteration needs a Dirichlet start".into(),
        ));
    }
    let grid = start.grid().clone();
    let eps = config.resolved_eps(&grid);
    let tol = config.residual_tol.unwrap_or(1e-8);

    let mut v = normalize_p(start, p);
    let mut lambda = rayleigh(&v, a, p)?;
    let mut last_alpha = 1e-2;
    let mut prev: Option<(GridFunction, f64)> = None;
    let mut trace = Vec::new();

    let gradient = |v: &GridFunction, lambda: f64| -> Result<GridFunction> {
        let lap = p_sub_laplacian(v, p, eps)?;
        let mut values = vec![0.0; grid.node_count()];
        for lin in grid.interior() {
            let shift = (a.value(lin) + lambda) * phi_p(v.value(lin), p);
            values[lin] = -lap.value(lin) - shift;
        }
        GridFunction::dirichlet(grid.clone(), values)
    };

    for _iter in 0..config.max_iterations {
        let res = gradient(&v, lambda)?;
        let dec = weighted_inner(&res, &res).expect("same grid");
        let res_norm = dec.max(0.0).sqrt();
        if res_norm <= tol * (1.0 + lambda.abs()) {
            return Ok((lambda, v));
        }

        let mut alpha = match &prev {
            Some((old_res, old_alpha)) => {
                let y = res.add_scaled(old_res, -1.0).expect("same grid");
                let s_dot_y = -old_alpha * weighted_inner(old_res, &y).expect("same grid");
                let s_dot_s = old_alpha * old_alpha * weighted_inner(old_res, old_res).unwrap();
                if s_dot_y > 0.0 {
                    (s_dot_s / s_dot_y).clamp(1e-14, 1e10)
                } else {
                    last_alpha * 2.0
                }
            }
            None => last_alpha,
        };

        let mut accepted = false;
        for _ in 0..config.max_backtracks {
            let trial = normalize_p(&v.add_scaled(&res, -alpha).expect("same grid"), p);
            let trial_lambda = rayleigh(&trial, a, p)?;
            if trial_lambda.is_finite()
                && trial_lambda <= lambda - config.armijo_c1 * alpha * p * dec
            {
                prev = Some((res, alpha));
                last_alpha = alpha;
                v = trial;
                lambda = trial_lambda;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        trace.push(lambda);
        if !accepted {
            // quotient is flat along the residual; accept as converged if
            // the residual certifies it, otherwise give up below
            let res_norm = weighted_inner(&gradient(&v, lambda)?, &gradient(&v, lambda)?)
                .unwrap()
                .sqrt();
            if res_norm <= 1e2 * tol * (1.0 + lambda.abs()) {
                return Ok((lambda, v));
            }
            break;
        }
    }
    let tail: Vec<f64> = trace.iter().rev().take(10).rev().copied().collect();
    Err(Error::NonConvergence {
        iterations: trace.len(),
        trace: tail,
    })
}

/// Assemble the symmetrized interior matrix of -Delta_2 - diag(a) under
/// the quadrature inner product. Returns the matrix and the interior node
/// indices defining its rows/columns.
pub fn assemble_p2_matrix(
    grid: &Arc<HGrid>,
    a: Option<&GridFunction>,
) -> Result<(DMatrix<f64>, Vec<usize>)> {
    let interior: Vec<usize> = grid.interior().collect();
    let m = interior.len();
    let mut column = vec![0.0; grid.node_count()];
    let mut matrix = DMatrix::zeros(m, m);
    for (col, &node) in interior.iter().enumerate() {
        column.fill(0.0);
        column[node] = 1.0;
        let basis = GridFunction::dirichlet(grid.clone(), column.clone())?;
        let lap = p_sub_laplacian(&basis, 2.0, 0.0)?;
        for (row, &rnode) in interior.iter().enumerate() {
            let mut entry = -lap.value(rnode);
            if let Some(a) = a {
                if row == col {
                    entry -= a.value(rnode);
                }
            }
            // symmetrize: B = W^{1/2} A W^{-1/2}
            let scale = (grid.quad_weight(rnode) / grid.quad_weight(node)).sqrt();
            matrix[(row, col)] = entry * scale;
        }
    }
    // enforce exact symmetry against rounding
    for r in 0..m {
        for c in (r + 1)..m {
            let s = 0.5 * (matrix[(r, c)] + matrix[(c, r)]);
            matrix[(r, c)] = s;
            matrix[(c, r)] = s;
        }
    }
    Ok((matrix, interior))
}

/// Dense symmetric-eigensolver value of lambda_1(-Delta_2 - a), the p = 2
/// oracle for `lambda1`.
pub fn lambda1_oracle_p2(grid: &Arc<HGrid>, a: Option<&GridFunction>) -> Result<f64> {
    let (matrix, _) = assemble_p2_matrix(grid, a)?;
    let eigen = matrix.symmetric_eigen();
    Ok(eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Direct dense solve of -Delta_2 u = rhs with Dirichlet data, the p = 2
/// linear oracle for the energy minimizer.
pub fn solve_linear_p2(grid: &Arc<HGrid>, rhs: &GridFunction) -> Result<GridFunction> {
    let (matrix, interior) = assemble_p2_matrix(grid, None)?;
    // symmetrized system: B (W^{1/2} u) = W^{1/2} rhs
    let b = DVector::from_iterator(
        interior.len(),
        interior
            .iter()
            .map(|&node| rhs.value(node) * grid.quad_weight(node).sqrt()),
    );
    let lu = matrix.lu();
    let x = lu
        .solve(&b)
        .ok_or_else(|| Error::InvalidParameter("singular p=2 system".into()))?;
    let mut values = vec![0.0; grid.node_count()];
    for (k, &node) in interior.iter().enumerate() {
        values[node] = x[k] / grid.quad_weight(node).sqrt();
    }
    GridFunction::dirichlet(grid.clone(), values)
}

/// Random Dirichlet start for eigen restarts.
#[cfg(test)]
fn random_start(grid: &Arc<HGrid>, seed: u64) -> GridFunction {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    GridFunction::dirichlet(
        grid.clone(),
        (0..grid.node_count())
            .map(|_| rng.random_range(0.01..1.0))
            .collect(),
    )
    .expect("random start")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Initializer;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid7() -> Arc<HGrid> {
        HGrid::unit_box(1, 7).unwrap()
    }

    fn eigen_config(p: f64) -> SolverConfig {
        SolverConfig {
            p,
            residual_tol: Some(1e-9),
            max_iterations: 30_000,
            initializer: Initializer::Constant(1.0),
            ..Default::default()
        }
    }

    #[test]
    fn p2_eigenvalue_matches_dense_oracle() {
        let grid = grid7();
        let a = GridFunction::constant(grid.clone(), 0.0);
        let (lambda, v) = lambda1(&a, 2.0, &eigen_config(2.0), &grid).unwrap();
        assert!(lambda > 0.0);
        let oracle = lambda1_oracle_p2(&grid, None).unwrap();
        assert!(
            (lambda - oracle).abs() <= 1e-6 * oracle.abs(),
            "descent {lambda} vs oracle {oracle}"
        );
        // the Rayleigh quotient of the minimizer reproduces the value
        assert!((rayleigh(&v, &a, 2.0).unwrap() - lambda).abs() <= 1e-12 * (1.0 + lambda.abs()));
    }

    #[test]
    fn shift_property_is_exact_to_solver_noise() {
        let grid = grid7();
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        let a = GridFunction::from_fn(grid.clone(), |c| 0.5 * c[0] - 0.2 * c[2]);
        for &p in &[2.0, 2.5] {
            let (base, _) = lambda1(&a, p, &eigen_config(p), &grid).unwrap();
            for _ in 0..3 {
                let c: f64 = rng.random_range(-5.0..5.0);
                let shifted_a = a.map(|v| v + c);
                let (shifted, _) = lambda1(&shifted_a, p, &eigen_config(p), &grid).unwrap();
                assert!(
                    (shifted - (base - c)).abs() <= 1e-8 * (1.0 + base.abs() + c.abs()),
                    "shift property violated: {shifted} vs {}",
                    base - c
                );
            }
        }
    }

    #[test]
    fn quotient_is_scale_invariant_so_restarts_are_cheap() {
        let grid = grid7();
        let a = GridFunction::constant(grid.clone(), 0.0);
        let config = eigen_config(2.0);
        let (lambda, v) = lambda1(&a, 2.0, &config, &grid).unwrap();
        let (lambda2, _) = lambda1_from(&v.scale(2.0), &a, 2.0, &config).unwrap();
        assert!(
            (lambda - lambda2).abs() <= 1e-10 * (1.0 + lambda.abs()),
            "{lambda} vs {lambda2}"
        );
    }

    #[test]
    fn restarts_agree_for_p2() {
        let grid = HGrid::unit_box(1, 5).unwrap();
        let a = GridFunction::constant(grid.clone(), 0.0);
        let config = eigen_config(2.0);
        let (reference, _) = lambda1(&a, 2.0, &config, &grid).unwrap();
        for seed in 0..5u64 {
            let start = random_start(&grid, seed);
            let (lambda, _) = lambda1_from(&start, &a, 2.0, &config).unwrap();
            assert!(
                (lambda - reference).abs() <= 1e-8 * (1.0 + reference.abs()),
                "restart {seed}: {lambda} vs {reference}"
            );
        }
    }

    #[test]
    fn linear_solve_satisfies_the_equation() {
        let grid = grid7();
        let rhs = GridFunction::constant(grid.clone(), 1.0);
        let u = solve_linear_p2(&grid, &rhs).unwrap();
        let lap = p_sub_laplacian(&u, 2.0, 0.0).unwrap();
        for lin in grid.interior() {
            assert!(
                (-lap.value(lin) - 1.0).abs() <= 1e-10,
                "residual {} at node {lin}",
                -lap.value(lin) - 1.0
            );
        }
        assert!(u.min_interior() > 0.0);
    }
}
