//! Variational solver for the quasilinear Dirichlet problem
//! -Delta_{H,p} u = f(x,u), u >= 0, u = 0 on the boundary: energy descent
//! with a backtracking (Armijo) line search, hypothesis validation for the
//! reaction term, first-eigenvalue machinery and the uniqueness/existence
//! experiments built on top.

mod eigen;
mod experiment;

pub use eigen::{assemble_p2_matrix, lambda1, lambda1_from, lambda1_oracle_p2, solve_linear_p2};
pub use experiment::{
    existence_check, uniqueness_experiment, ConditionReport, ExistenceReport, PairSummary,
    RunSummary, UniquenessReport, Verdict,
};

use crate::error::{Error, Result};
use crate::hcalc::{
    default_eps, gradient_magnitude_pow, integrate, p_sub_laplacian, weighted_inner, GridFunction,
    HGrid,
};
use crate::hgroup::GroupPoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

type SpatialFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// A reaction term f(x, r) with its closed-form antiderivative in r and
/// declared growth data. f maps into (0, infinity) on r >= 0; below zero
/// the solver sees the constant extension f(x, 0).
#[derive(Clone)]
pub struct NonlinearitySpec {
    f: SpatialFn,
    antiderivative: SpatialFn,
    /// growth constant C in f(x,r) <= C (r^{p-1} + 1)
    pub growth_c: f64,
    /// limit of f(x,r)/r^{p-1} as r -> 0 (infinity allowed)
    pub a0: f64,
    /// limit of f(x,r)/r^{p-1} as r -> infinity (infinity allowed)
    pub a_inf: f64,
    pub label: String,
}

impl std::fmt::Debug for NonlinearitySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "NonlinearitySpec({})", self.label)
    }
}

impl NonlinearitySpec {
    /// f(x,r) = (r+1)^q, the default test nonlinearity; satisfies the
    /// hypotheses for 0 < q < p-1.
    pub fn power_plus_one(q: f64) -> Self {
        assert!(q > 0.0);
        NonlinearitySpec {
            f: Arc::new(move |_x, r| (r + 1.0).powf(q)),
            antiderivative: Arc::new(move |_x, r| ((r + 1.0).powf(q + 1.0) - 1.0) / (q + 1.0)),
            growth_c: 2f64.powf(q),
            a0: f64::INFINITY,
            a_inf: 0.0,
            label: format!("(r+1)^{q}"),
        }
    }

    /// Spatially varying variant c(x) (r+1)^q with c(x) = 1 + x_1^2.
    pub fn spatial_power(q: f64) -> Self {
        assert!(q > 0.0);
        let c = |x: &[f64]| 1.0 + x[0] * x[0];
        NonlinearitySpec {
            f: Arc::new(move |x, r| c(x) * (r + 1.0).powf(q)),
            antiderivative: Arc::new(move |x, r| {
                c(x) * ((r + 1.0).powf(q + 1.0) - 1.0) / (q + 1.0)
            }),
            growth_c: 2.0 * 2f64.powf(q),
            a0: f64::INFINITY,
            a_inf: 0.0,
            label: format!("(1+x1^2)(r+1)^{q}"),
        }
    }

    /// Constant right-hand side f = c; the solve becomes -Delta_p u = c.
    pub fn constant(c: f64) -> Self {
        assert!(c > 0.0);
        NonlinearitySpec {
            f: Arc::new(move |_x, _r| c),
            antiderivative: Arc::new(move |_x, r| c * r),
            growth_c: c,
            a0: f64::INFINITY,
            a_inf: 0.0,
            label: format!("const {c}"),
        }
    }

    /// r-independent positive field mu(x); the solve becomes
    /// -Delta_p u = mu(x).
    pub fn rhs_field(
        label: impl Into<String>,
        growth_c: f64,
        mu: impl Fn(&[f64]) -> f64 + Send + Sync + Clone + 'static,
    ) -> Self {
        let mu2 = mu.clone();
        NonlinearitySpec {
            f: Arc::new(move |x, _r| mu(x)),
            antiderivative: Arc::new(move |x, r| mu2(x) * r),
            growth_c,
            a0: f64::INFINITY,
            a_inf: 0.0,
            label: label.into(),
        }
    }

    /// f(x,r) = a r^{p-1} + 1: finite limit a at infinity, useful for
    /// probing the existence conditions around the first eigenvalue.
    pub fn linear_plus_one(a: f64, p: f64) -> Self {
        assert!(a >= 0.0 && p > 1.0);
        NonlinearitySpec {
            f: Arc::new(move |_x, r| a * r.powf(p - 1.0) + 1.0),
            antiderivative: Arc::new(move |_x, r| a * r.powf(p) / p + r),
            growth_c: a.max(1.0),
            a0: f64::INFINITY,
            a_inf: a,
            label: format!("{a} r^(p-1) + 1"),
        }
    }

    /// f(x,r) = r^{p-1}: zero at r = 0 and constant after division by
    /// r^{p-1}. A known-bad input for the hypothesis validator.
    pub fn pure_power(p: f64) -> Self {
        NonlinearitySpec {
            f: Arc::new(move |_x, r| r.powf(p - 1.0)),
            antiderivative: Arc::new(move |_x, r| r.powf(p) / p),
            growth_c: 1.0,
            a0: 1.0,
            a_inf: 1.0,
            label: "r^(p-1)".into(),
        }
    }

    /// f = e^r: violates the growth bound for every constant.
    pub fn exponential() -> Self {
        NonlinearitySpec {
            f: Arc::new(|_x, r| r.exp()),
            antiderivative: Arc::new(|_x, r| r.exp() - 1.0),
            growth_c: 1e6,
            a0: f64::INFINITY,
            a_inf: f64::INFINITY,
            label: "exp(r)".into(),
        }
    }

    /// Override the declared limits (for synthetic existence probes).
    pub fn with_declared_limits(mut self, a0: f64, a_inf: f64) -> Self {
        self.a0 = a0;
        self.a_inf = a_inf;
        self
    }

    pub fn eval(&self, x: &[f64], r: f64) -> f64 {
        if r >= 0.0 {
            (self.f)(x, r)
        } else {
            (self.f)(x, 0.0)
        }
    }

    /// F(x, r) with F(x, 0) = 0, extended linearly below zero so the
    /// energy stays defined on sign-changing iterates.
    pub fn eval_antiderivative(&self, x: &[f64], r: f64) -> f64 {
        if r >= 0.0 {
            (self.antiderivative)(x, r)
        } else {
            (self.f)(x, 0.0) * r
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub pass: bool,
    pub worst_margin: f64,
    pub detail: String,
}

/// Per-hypothesis outcome of `validate_hypotheses`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesesReport {
    /// f(x,r) > 0 including r = 0
    pub positivity: HypothesisCheck,
    /// r -> f(x,r)/r^{p-1} strictly decreasing along the ladder
    pub strict_decrease: HypothesisCheck,
    /// f(x,r) <= C (r^{p-1} + 1) with the declared C
    pub growth: HypothesisCheck,
    /// dF/dr = f by central differences
    pub antiderivative: HypothesisCheck,
    pub all_pass: bool,
}

/// Check hypotheses (I)-(III) plus antiderivative consistency on a ladder
/// of radii and a set of spatial sample points.
pub fn validate_hypotheses(
    spec: &NonlinearitySpec,
    p: f64,
    r_ladder: &[f64],
    x_samples: &[GroupPoint],
) -> Result<HypothesesReport> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    if r_ladder.len() < 2 || x_samples.is_empty() {
        return Err(Error::InvalidParameter(
            "need at least two radii and one sample point".into(),
        ));
    }
    for w in r_ladder.windows(2) {
        if !(w[0] > 0.0 && w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "r ladder must be strictly increasing and positive".into(),
            ));
        }
    }
    let coord_sets: Vec<Vec<f64>> = x_samples
        .iter()
        .map(|q| {
            let mut c = q.x().to_vec();
            c.extend_from_slice(q.y());
            c.push(q.t());
            c
        })
        .collect();

    let mut min_f = f64::INFINITY;
    let mut min_decrease = f64::INFINITY;
    let mut min_growth = f64::INFINITY;
    let mut worst_fd = 0.0f64;
    for x in &coord_sets {
        min_f = min_f.min(spec.eval(x, 0.0));
        let mut prev_ratio = None;
        for &r in r_ladder {
            let fv = spec.eval(x, r);
            min_f = min_f.min(fv);
            let ratio = fv / r.powf(p - 1.0);
            if let Some(prev) = prev_ratio {
                min_decrease = min_decrease.min(prev - ratio);
            }
            prev_ratio = Some(ratio);
            min_growth = min_growth.min(spec.growth_c * (r.powf(p - 1.0) + 1.0) - fv);

            // central difference of F around r, clipped at 0 from below
            let delta = 1e-5 * (1.0 + r);
            let lo = (r - delta).max(0.0);
            let fd = (spec.eval_antiderivative(x, r + delta) - spec.eval_antiderivative(x, lo))
                / (r + delta - lo);
            worst_fd = worst_fd.max((fd - fv).abs() / (1.0 + fv.abs()));
        }
    }

    let positivity = HypothesisCheck {
        pass: min_f > 0.0,
        worst_margin: min_f,
        detail: "min f(x,r) over samples including r = 0".into(),
    };
    let strict_decrease = HypothesisCheck {
        pass: min_decrease > 0.0,
        worst_margin: min_decrease,
        detail: "min drop of f(x,r)/r^(p-1) between consecutive ladder radii".into(),
    };
    let growth = HypothesisCheck {
        pass: min_growth >= 0.0,
        worst_margin: min_growth,
        detail: format!("min of C (r^(p-1)+1) - f with C = {}", spec.growth_c),
    };
    let antiderivative = HypothesisCheck {
        pass: worst_fd <= 1e-4,
        worst_margin: worst_fd,
        detail: "max relative deviation of dF/dr from f (central differences)".into(),
    };
    let all_pass = positivity.pass && strict_decrease.pass && growth.pass && antiderivative.pass;
    Ok(HypothesesReport {
        positivity,
        strict_decrease,
        growth,
        antiderivative,
        all_pass,
    })
}

/// Default radii for hypothesis checks: log ladder through [1e-3, 1e3].
pub fn default_r_ladder() -> Vec<f64> {
    crate::picone::sample_ladder(1e-3, 1e3, 25)
}

/// Default spatial probes: both box corners plus the center node.
pub fn default_x_samples(grid: &HGrid) -> Vec<GroupPoint> {
    vec![
        grid.group_point(0),
        grid.group_point(grid.node_count() / 2),
        grid.group_point(grid.node_count() - 1),
    ]
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum Initializer {
    /// positive constant on the interior
    Constant(f64),
    /// uniform random values in (0, amplitude]
    RandomPositive { amplitude: f64 },
    /// first eigenfunction of -Delta_p, normalized to unit sup and scaled
    Eigenfunction { scale: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub p: f64,
    /// singular-weight regularizer; None means 1e-8 / diameter
    pub eps: Option<f64>,
    pub max_iterations: usize,
    /// absolute residual tolerance; None means 1e-9 * sqrt(volume)
    pub residual_tol: Option<f64>,
    /// stop when the accepted update falls below this sup-norm
    pub step_tol: f64,
    pub armijo_c1: f64,
    pub max_backtracks: usize,
    pub initializer: Initializer,
    pub seed: u64,
    pub keep_history: bool,
    /// escape hatch for exploring reaction terms that fail the hypothesis
    /// gate; nothing downstream asserts anything about such runs
    pub skip_hypothesis_gate: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            p: 2.0,
            eps: None,
            max_iterations: 50_000,
            residual_tol: None,
            step_tol: 1e-10,
            armijo_c1: 1e-4,
            max_backtracks: 60,
            initializer: Initializer::Constant(1.0),
            seed: 0,
            keep_history: true,
            skip_hypothesis_gate: false,
        }
    }
}

impl SolverConfig {
    pub fn resolved_eps(&self, grid: &HGrid) -> f64 {
        self.eps.unwrap_or_else(|| default_eps(grid))
    }

    pub fn resolved_residual_tol(&self, grid: &HGrid) -> f64 {
        self.residual_tol
            .unwrap_or_else(|| 1e-9 * grid.volume().sqrt())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iteration: usize,
    pub energy: f64,
    pub residual: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: GridFunction,
    pub energy: f64,
    pub residual_l2: f64,
    pub iterations: usize,
    /// min of u over interior nodes; negativity is reported, never hidden
    pub min_interior: f64,
    pub converged: bool,
    pub history: Vec<HistoryRow>,
}

/// E(u) = (1/p) integral |grad_H u|^p - integral F(x, u).
pub fn energy(u: &GridFunction, spec: &NonlinearitySpec, p: f64) -> Result<f64> {
    let (seminorm, potential) = energy_parts(u, spec, p)?;
    Ok(seminorm - potential)
}

/// The two energy terms separately: the p-seminorm term and the
/// F-potential term.
pub fn energy_parts(u: &GridFunction, spec: &NonlinearitySpec, p: f64) -> Result<(f64, f64)> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    if !u.is_dirichlet() {
        return Err(Error::InvalidParameter(
            "energy requires a Dirichlet grid function".into(),
        ));
    }
    let seminorm = integrate(&gradient_magnitude_pow(u, p)) / p;
    let grid = u.grid().clone();
    let mut coords = vec![0.0; grid.axes()];
    let potential_density = (0..grid.node_count())
        .map(|lin| {
            grid.coords_into(lin, &mut coords);
            spec.eval_antiderivative(&coords, u.value(lin))
        })
        .collect();
    let potential = integrate(&GridFunction::new(grid, potential_density)?);
    Ok((seminorm, potential))
}

/// The assembled first variation of E as a grid function on interior
/// nodes: -Delta_p u - f(x, u) (zero on the boundary).
pub fn residual_field(
    u: &GridFunction,
    spec: &NonlinearitySpec,
    p: f64,
    eps: f64,
) -> Result<GridFunction> {
    let lap = p_sub_laplacian(u, p, eps)?;
    let grid = u.grid().clone();
    let mut coords = vec![0.0; grid.axes()];
    let mut values = vec![0.0; grid.node_count()];
    for lin in grid.interior() {
        grid.coords_into(lin, &mut coords);
        values[lin] = -lap.value(lin) - spec.eval(&coords, u.value(lin));
    }
    GridFunction::dirichlet(grid, values)
}

/// Discrete L2 norm under the quadrature weights.
pub fn residual_l2(residual: &GridFunction) -> f64 {
    weighted_inner(residual, residual)
        .expect("same grid")
        .max(0.0)
        .sqrt()
}

fn build_initializer(
    config: &SolverConfig,
    spec_label: &str,
    grid: &Arc<HGrid>,
) -> Result<GridFunction> {
    match &config.initializer {
        Initializer::Constant(c) => {
            if !(*c > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "constant initializer must be positive, got {c}"
                )));
            }
            GridFunction::dirichlet(grid.clone(), vec![*c; grid.node_count()])
        }
        Initializer::RandomPositive { amplitude } => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let values = (0..grid.node_count())
                .map(|_| rng.random_range(0.0..*amplitude) + 1e-3 * amplitude)
                .collect();
            GridFunction::dirichlet(grid.clone(), values)
        }
        Initializer::Eigenfunction { scale } => {
            let mut eigen_config = config.clone();
            eigen_config.initializer = Initializer::Constant(1.0);
            eigen_config.residual_tol = Some(1e-6);
            eigen_config.max_iterations = 20_000;
            let a = GridFunction::constant(grid.clone(), 0.0);
            let (_, v) = eigen::lambda1(&a, config.p, &eigen_config, grid).map_err(|e| {
                Error::InvalidParameter(format!(
                    "eigenfunction initializer for {spec_label} failed: {e}"
                ))
            })?;
            let sup = v.sup_norm();
            Ok(v.scale(scale / sup))
        }
    }
}

/// Descent on E from the configured initializer. Accepted steps never
/// increase the energy; iteration stops once the assembled residual drops
/// below the configured tolerance (converged), the update stalls, or the
/// iteration budget runs out (not converged).
pub fn solve(
    spec: &NonlinearitySpec,
    config: &SolverConfig,
    grid: &Arc<HGrid>,
) -> Result<SolveResult> {
    let p = config.p;
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    if !config.skip_hypothesis_gate {
        let report = validate_hypotheses(spec, p, &default_r_ladder(), &default_x_samples(grid))?;
        if !report.all_pass {
            return Err(Error::InvalidParameter(format!(
                "nonlinearity {} fails hypotheses (I)-(III)",
                spec.label
            )));
        }
    }
    let eps = config.resolved_eps(grid);
    let tol = config.resolved_residual_tol(grid);

    let mut u = build_initializer(config, &spec.label, grid)?;
    let mut e_current = energy(&u, spec, p)?;
    if !e_current.is_finite() {
        return Err(Error::Divergence(0));
    }

    let mut history = Vec::new();
    let mut res = residual_field(&u, spec, p, eps)?;
    let mut res_norm = residual_l2(&res);
    let mut converged = res_norm <= tol;
    let mut last_alpha = 1.0f64;
    // residual and step of the last accepted move, for the BB step guess
    let mut prev_res: Option<(GridFunction, f64)> = None;
    let mut iterations = 0usize;
    let mut best_res = res_norm;
    let mut since_progress = 0usize;

    while !converged && iterations < config.max_iterations {
        iterations += 1;
        let dec = weighted_inner(&res, &res).expect("same grid");
        if dec == 0.0 {
            break;
        }

        // Barzilai-Borwein guess from the last accepted move, safeguarded
        // by Armijo backtracking below
        let mut alpha = match &prev_res {
            Some((old_res, old_alpha)) => {
                let y = res.add_scaled(old_res, -1.0).expect("same grid");
                let s_dot_y = -old_alpha * weighted_inner(old_res, &y).expect("same grid");
                let s_dot_s = old_alpha * old_alpha * weighted_inner(old_res, old_res).unwrap();
                if s_dot_y > 0.0 {
                    (s_dot_s / s_dot_y).clamp(1e-12, 1e12)
                } else {
                    last_alpha * 2.0
                }
            }
            None => 1.0,
        };

        // Near the minimum the predicted decrease c1 a |res|^2 falls under
        // the round-off resolution of E; such steps cannot be certified by
        // the energy and are accepted if they do not increase E beyond
        // that same resolution.
        let noise_floor = 1e-14 * (1.0 + e_current.abs());
        let mut accepted = false;
        let mut step = 0.0;
        for _ in 0..config.max_backtracks {
            let trial = u.add_scaled(&res, -alpha).expect("same grid");
            let e_trial = energy(&trial, spec, p)?;
            let wanted = config.armijo_c1 * alpha * dec;
            let sufficient = e_trial <= e_current - wanted
                || (wanted <= noise_floor && e_trial <= e_current + noise_floor);
            if e_trial.is_finite() && sufficient {
                step = alpha * res.sup_norm();
                prev_res = Some((res.clone(), alpha));
                last_alpha = alpha;
                u = trial;
                e_current = e_trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            let e_trial = energy(&u.add_scaled(&res, -alpha).expect("same grid"), spec, p)?;
            if !e_trial.is_finite() {
                return Err(Error::Divergence(iterations));
            }
            // line search exhausted without decrease; stop and report
            break;
        }

        res = residual_field(&u, spec, p, eps)?;
        res_norm = residual_l2(&res);
        if config.keep_history {
            history.push(HistoryRow {
                iteration: iterations,
                energy: e_current,
                residual: res_norm,
                step,
            });
        }
        // convergence is certified by the residual together with a
        // negligible iterate change
        if res_norm <= tol && step <= config.step_tol {
            break;
        }
        if res_norm < 0.999 * best_res {
            best_res = res_norm;
            since_progress = 0;
        } else {
            since_progress += 1;
            if since_progress >= 2000 {
                break;
            }
        }
    }

    converged = res_norm <= tol;
    Ok(SolveResult {
        min_interior: u.min_interior(),
        energy: e_current,
        residual_l2: res_norm,
        iterations,
        converged,
        history,
        u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hcalc::{d1p_norm, HGrid};
    use rand::Rng;

    #[test]
    fn hypothesis_validation_matches_expectations() {
        let grid = HGrid::unit_box(1, 5).unwrap();
        let ladder = default_r_ladder();
        let xs = default_x_samples(&grid);

        let good = NonlinearitySpec::power_plus_one(0.5);
        let report = validate_hypotheses(&good, 2.0, &ladder, &xs).unwrap();
        assert!(report.all_pass, "{report:?}");

        // f = r^{p-1}: zero at r = 0 and constant ratio
        let bad = NonlinearitySpec::pure_power(2.0);
        let report = validate_hypotheses(&bad, 2.0, &ladder, &xs).unwrap();
        assert!(!report.positivity.pass);
        assert!(!report.strict_decrease.pass);
        assert!(report.strict_decrease.worst_margin.abs() <= 1e-12);

        // f = e^r: the ladder reaches far past r = 50, where no C works
        let exp = NonlinearitySpec::exponential();
        let report = validate_hypotheses(&exp, 2.0, &ladder, &xs).unwrap();
        assert!(!report.growth.pass);

        assert!(validate_hypotheses(&good, 2.0, &[1.0, 0.5], &xs).is_err());
    }

    #[test]
    fn energy_basics() {
        let grid = HGrid::unit_box(1, 9).unwrap();
        let spec = NonlinearitySpec::power_plus_one(0.5);
        let zero = GridFunction::zeros(grid.clone(), true);
        assert_eq!(energy(&zero, &spec, 2.0).unwrap(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let values: Vec<f64> = (0..grid.node_count())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let u = GridFunction::dirichlet(grid.clone(), values).unwrap();
        for &p in &[2.0, 2.5] {
            let (seminorm, _) = energy_parts(&u, &spec, p).unwrap();
            let direct = d1p_norm(&u, p).unwrap().powf(p) / p;
            assert!(
                (seminorm - direct).abs() <= 1e-13 * (1.0 + direct.abs()),
                "seminorm term {seminorm} vs d1p^p/p {direct}"
            );
        }
    }

    #[test]
    fn gradient_matches_directional_derivative() {
        let grid = HGrid::unit_box(1, 7).unwrap();
        let spec = NonlinearitySpec::power_plus_one(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let u = GridFunction::dirichlet(
            grid.clone(),
            (0..grid.node_count())
                .map(|_| rng.random_range(0.1..1.0))
                .collect(),
        )
        .unwrap();
        let p = 2.5;
        let eps = default_eps(&grid);
        let res = residual_field(&u, &spec, p, eps).unwrap();
        let s = 1e-5;
        for _ in 0..20 {
            let phi = GridFunction::dirichlet(
                grid.clone(),
                (0..grid.node_count())
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect(),
            )
            .unwrap();
            let e_plus = energy(&u.add_scaled(&phi, s).unwrap(), &spec, p).unwrap();
            let e_minus = energy(&u.add_scaled(&phi, -s).unwrap(), &spec, p).unwrap();
            let fd = (e_plus - e_minus) / (2.0 * s);
            let assembled = weighted_inner(&res, &phi).unwrap();
            assert!(
                (fd - assembled).abs() <= 1e-4 * (1.0 + assembled.abs()),
                "directional derivative {fd} vs assembled {assembled}"
            );
        }
    }

    #[test]
    fn solve_on_single_interior_node_matches_bisection() {
        let grid = HGrid::unit_box(1, 3).unwrap();
        let spec = NonlinearitySpec::power_plus_one(0.5);
        let p = 2.5;
        let config = SolverConfig {
            p,
            residual_tol: Some(1e-14),
            ..Default::default()
        };
        let result = solve(&spec, &config, &grid).unwrap();
        assert!(result.converged);

        let center = grid.interior().next().unwrap();
        let eps = config.resolved_eps(&grid);
        let coords = grid.coords(center);
        let scalar_eq = |s: f64| -> f64 {
            let mut values = vec![0.0; grid.node_count()];
            values[center] = s;
            let u = GridFunction::dirichlet(grid.clone(), values).unwrap();
            let lap = p_sub_laplacian(&u, p, eps).unwrap();
            -lap.value(center) - spec.eval(&coords, s)
        };
        let (mut lo, mut hi) = (0.0, 10.0);
        assert!(scalar_eq(lo) < 0.0 && scalar_eq(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if scalar_eq(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!(
            (result.u.value(center) - root).abs() <= 1e-10,
            "solver {} vs bisection {root}",
            result.u.value(center)
        );
    }

    #[test]
    fn solve_converges_monotonically_and_positively() {
        let grid = HGrid::unit_box(1, 9).unwrap();
        let spec = NonlinearitySpec::power_plus_one(0.5);
        let config = SolverConfig {
            p: 2.0,
            ..Default::default()
        };
        let result = solve(&spec, &config, &grid).unwrap();
        assert!(result.converged, "residual {}", result.residual_l2);
        assert!(result.min_interior > 0.0);
        for w in result.history.windows(2) {
            // monotone up to the round-off resolution of E
            assert!(
                w[1].energy <= w[0].energy + 1e-13 * (1.0 + w[0].energy.abs()),
                "energy increased: {} -> {}",
                w[0].energy,
                w[1].energy
            );
        }
    }

    #[test]
    fn solve_reports_nonconvergence_without_error() {
        let grid = HGrid::unit_box(1, 9).unwrap();
        let spec = NonlinearitySpec::power_plus_one(0.5);
        let config = SolverConfig {
            p: 2.0,
            max_iterations: 1,
            ..Default::default()
        };
        let result = solve(&spec, &config, &grid).unwrap();
        assert!(!result.converged);
        assert_eq!(result.iterations, 1);
    }

    #[test]
    fn hypothesis_gate_blocks_bad_nonlinearities() {
        let grid = HGrid::unit_box(1, 5).unwrap();
        let config = SolverConfig {
            p: 2.0,
            ..Default::default()
        };
        assert!(matches!(
            solve(&NonlinearitySpec::exponential(), &config, &grid),
            Err(Error::InvalidParameter(_))
        ));
        let bypass = SolverConfig {
            skip_hypothesis_gate: true,
            max_iterations: 5,
            ..config
        };
        assert!(solve(&NonlinearitySpec::exponential(), &bypass, &grid).is_ok());
    }
}
