//! Experiments on top of the solver: the two-sided eigenvalue conditions
//! for existence, and the multi-start uniqueness demonstration.

use super::{eigen, solve, Initializer, NonlinearitySpec, SolveResult, SolverConfig};
use crate::error::{Error, Result};
use crate::hcalc::{neumaier_sum, GridFunction, HGrid};
use crate::picone::{diaz_saa_gap, phi_p};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Unsatisfied,
    Indeterminate,
}

/// One eigenvalue sign condition, evaluated either directly (finite limit)
/// or through a ladder of truncations (infinite limit).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    /// which limit this condition uses: "a0" or "a_inf"
    pub limit_name: String,
    /// the declared limit; None encodes +infinity
    pub limit: Option<f64>,
    /// required sign of lambda_1: "negative" for the zero condition,
    /// "positive" for the infinity condition
    pub required_sign: String,
    /// lambda_1(-Delta_p - limit), when the limit is finite
    pub lambda1: Option<f64>,
    /// (M, lambda_1(-Delta_p - M)) for the truncation ladder, when the
    /// limit is infinite
    pub ladder: Vec<(f64, f64)>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExistenceReport {
    pub p: f64,
    pub nonlinearity: String,
    pub condition_zero: ConditionReport,
    pub condition_infinity: ConditionReport,
    pub verdict: Verdict,
}

const SIGN_RESOLUTION: f64 = 1e-10;

fn lambda_for_constant(
    value: f64,
    p: f64,
    config: &SolverConfig,
    grid: &Arc<HGrid>,
) -> Result<f64> {
    let a = GridFunction::constant(grid.clone(), value);
    Ok(eigen::lambda1(&a, p, config, grid)?.0)
}

fn eval_condition(
    limit_name: &str,
    limit: f64,
    wants_negative: bool,
    p: f64,
    config: &SolverConfig,
    grid: &Arc<HGrid>,
) -> Result<ConditionReport> {
    let required_sign = if wants_negative { "negative" } else { "positive" };
    if limit.is_finite() {
        let lambda = lambda_for_constant(limit, p, config, grid)?;
        let verdict = if lambda.abs() <= SIGN_RESOLUTION {
            Verdict::Indeterminate
        } else if (lambda < 0.0) == wants_negative {
            Verdict::Satisfied
        } else {
            Verdict::Unsatisfied
        };
        Ok(ConditionReport {
            limit_name: limit_name.into(),
            limit: Some(limit),
            required_sign: required_sign.into(),
            lambda1: Some(lambda),
            ladder: Vec::new(),
            verdict,
        })
    } else {
        // condition at an infinite limit: lambda_1(-Delta_p - M) must keep
        // decreasing and end up negative as the truncation M grows
        let mut ladder = Vec::new();
        for &m in &[10.0, 100.0, 1000.0] {
            ladder.push((m, lambda_for_constant(m, p, config, grid)?));
        }
        let decreasing = ladder.windows(2).all(|w| w[1].1 < w[0].1);
        let final_negative = ladder.last().map(|&(_, l)| l < 0.0).unwrap_or(false);
        let limit_holds = decreasing && final_negative;
        let verdict = if !decreasing {
            Verdict::Indeterminate
        } else if limit_holds == wants_negative {
            Verdict::Satisfied
        } else {
            Verdict::Unsatisfied
        };
        Ok(ConditionReport {
            limit_name: limit_name.into(),
            limit: None,
            required_sign: required_sign.into(),
            lambda1: None,
            ladder,
            verdict,
        })
    }
}

/// Evaluate both sign conditions of the existence theorem:
/// lambda_1(-Delta_p - a0) < 0 and lambda_1(-Delta_p - a_inf) > 0, with
/// infinite limits handled by a growing truncation ladder.
pub fn existence_check(
    spec: &NonlinearitySpec,
    p: f64,
    config: &SolverConfig,
    grid: &Arc<HGrid>,
) -> Result<ExistenceReport> {
    let condition_zero = eval_condition("a0", spec.a0, true, p, config, grid)?;
    let condition_infinity = eval_condition("a_inf", spec.a_inf, false, p, config, grid)?;
    let verdict = match (condition_zero.verdict, condition_infinity.verdict) {
        (Verdict::Satisfied, Verdict::Satisfied) => Verdict::Satisfied,
        (Verdict::Unsatisfied, _) | (_, Verdict::Unsatisfied) => Verdict::Unsatisfied,
        _ => Verdict::Indeterminate,
    };
    Ok(ExistenceReport {
        p,
        nonlinearity: spec.label.clone(),
        condition_zero,
        condition_infinity,
        verdict,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub initializer: String,
    pub converged: bool,
    pub residual: f64,
    pub energy: f64,
    pub min_interior: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairSummary {
    pub first: usize,
    pub second: usize,
    pub rel_sup_distance: f64,
    /// Diaz-Saa gap between the pair; None when a solution failed the
    /// positivity precondition
    pub diaz_saa_gap: Option<f64>,
    /// integral of (f(x,u1)/u1^{p-1} - f(x,u2)/u2^{p-1})(u1^p - u2^p),
    /// the quantity the uniqueness argument drives to a contradiction
    pub contradiction_integral: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub p: f64,
    pub nonlinearity: String,
    pub n_starts: usize,
    pub runs: Vec<RunSummary>,
    pub pairs: Vec<PairSummary>,
    pub converged_count: usize,
    pub max_pairwise_distance: f64,
    pub all_positive: bool,
    /// fewer than two starts converged; distances mean nothing
    pub inconclusive: bool,
}

fn initializer_list(n_starts: usize) -> Vec<Initializer> {
    let mut list = vec![
        Initializer::Constant(0.1),
        Initializer::Constant(1.0),
        Initializer::Constant(10.0),
        Initializer::RandomPositive { amplitude: 1.0 },
        Initializer::Eigenfunction { scale: 1.0 },
    ];
    let mut amplitude = 2.0;
    while list.len() < n_starts {
        list.push(Initializer::RandomPositive { amplitude });
        amplitude *= 1.7;
    }
    list.truncate(n_starts);
    list
}

fn describe(init: &Initializer) -> String {
    match init {
        Initializer::Constant(c) => format!("constant {c}"),
        Initializer::RandomPositive { amplitude } => format!("random positive <= {amplitude}"),
        Initializer::Eigenfunction { scale } => format!("eigenfunction x {scale}"),
    }
}

/// Contradiction integral of the uniqueness argument, over interior nodes.
fn contradiction_integral(
    spec: &NonlinearitySpec,
    p: f64,
    u1: &GridFunction,
    u2: &GridFunction,
) -> f64 {
    let grid = u1.grid();
    let mut coords = vec![0.0; grid.axes()];
    neumaier_sum((0..grid.node_count()).map(|lin| {
        if grid.is_boundary(lin) {
            return 0.0;
        }
        grid.coords_into(lin, &mut coords);
        let a1 = u1.value(lin);
        let a2 = u2.value(lin);
        let d = (spec.eval(&coords, a1) / phi_p(a1, p) - spec.eval(&coords, a2) / phi_p(a2, p))
            * (a1.abs().powf(p) - a2.abs().powf(p));
        grid.quad_weight(lin) * d
    }))
}

/// Run the solver from `n_starts` distinct initializers and measure how
/// far apart the converged solutions are, with the Diaz-Saa gap and the
/// contradiction integral reported per pair.
pub fn uniqueness_experiment(
    spec: &NonlinearitySpec,
    p: f64,
    config: &SolverConfig,
    grid: &Arc<HGrid>,
    n_starts: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    if n_starts < 2 {
        return Err(Error::InvalidParameter(
            "uniqueness experiment needs at least 2 starts".into(),
        ));
    }
    let eps = config.resolved_eps(grid);
    let mut runs = Vec::new();
    let mut solutions: Vec<(usize, SolveResult)> = Vec::new();
    for (index, init) in initializer_list(n_starts).into_iter().enumerate() {
        let mut run_config = config.clone();
        run_config.p = p;
        run_config.initializer = init.clone();
        run_config.seed = seed.wrapping_add(index as u64);
        let result = solve(spec, &run_config, grid)?;
        runs.push(RunSummary {
            initializer: describe(&init),
            converged: result.converged,
            residual: result.residual_l2,
            energy: result.energy,
            min_interior: result.min_interior,
            iterations: result.iterations,
        });
        if result.converged {
            solutions.push((index, result));
        }
    }

    let mut pairs = Vec::new();
    let mut max_distance = 0.0f64;
    for i in 0..solutions.len() {
        for j in (i + 1)..solutions.len() {
            let (idx_i, ref sol_i) = solutions[i];
            let (idx_j, ref sol_j) = solutions[j];
            let distance = sol_i.u.rel_sup_distance(&sol_j.u)?;
            max_distance = max_distance.max(distance);
            let both_positive = sol_i.min_interior > 0.0 && sol_j.min_interior > 0.0;
            let gap = if both_positive {
                Some(diaz_saa_gap(&sol_i.u, &sol_j.u, p, eps)?.gap)
            } else {
                None
            };
            let contradiction = if both_positive {
                Some(contradiction_integral(spec, p, &sol_i.u, &sol_j.u))
            } else {
                None
            };
            pairs.push(PairSummary {
                first: idx_i,
                second: idx_j,
                rel_sup_distance: distance,
                diaz_saa_gap: gap,
                contradiction_integral: contradiction,
            });
        }
    }

    let converged_count = solutions.len();
    let all_positive = solutions.iter().all(|(_, s)| s.min_interior > 0.0);
    Ok(UniquenessReport {
        p,
        nonlinearity: spec.label.clone(),
        n_starts,
        runs,
        pairs,
        converged_count,
        max_pairwise_distance: max_distance,
        all_positive,
        inconclusive: converged_count < 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config(p: f64) -> SolverConfig {
        SolverConfig {
            p,
            residual_tol: Some(1e-10),
            max_iterations: 30_000,
            ..Default::default()
        }
    }

    #[test]
    fn existence_verdicts_for_the_three_reference_cases() {
        let grid = HGrid::unit_box(1, 5).unwrap();
        let config = quick_config(2.0);

        // a0 = +inf, a_inf = 0: both conditions hold
        let good = NonlinearitySpec::power_plus_one(0.5);
        let report = existence_check(&good, 2.0, &config, &grid).unwrap();
        assert_eq!(report.verdict, Verdict::Satisfied);
        assert_eq!(report.condition_zero.ladder.len(), 3);
        assert!(report
            .condition_zero
            .ladder
            .windows(2)
            .all(|w| w[1].1 < w[0].1));

        // a_inf above lambda_1 kills the second condition
        let lambda = eigen::lambda1(
            &GridFunction::constant(grid.clone(), 0.0),
            2.0,
            &config,
            &grid,
        )
        .unwrap()
        .0;
        let super_critical = NonlinearitySpec::linear_plus_one(lambda + 1.0, 2.0);
        let report = existence_check(&super_critical, 2.0, &config, &grid).unwrap();
        assert_eq!(report.verdict, Verdict::Unsatisfied);
        assert_eq!(report.condition_infinity.verdict, Verdict::Unsatisfied);

        // declared a0 = a_inf = 0: the first condition needs lambda_1 < 0,
        // impossible with Dirichlet data
        let degenerate = NonlinearitySpec::power_plus_one(0.5).with_declared_limits(0.0, 0.0);
        let report = existence_check(&degenerate, 2.0, &config, &grid).unwrap();
        assert_eq!(report.verdict, Verdict::Unsatisfied);
        assert_eq!(report.condition_zero.verdict, Verdict::Unsatisfied);
    }

    #[test]
    fn uniqueness_on_a_small_grid() {
        let grid = HGrid::unit_box(1, 5).unwrap();
        let spec = NonlinearitySpec::power_plus_one(0.5);
        let report =
            uniqueness_experiment(&spec, 2.0, &quick_config(2.0), &grid, 3, 7).unwrap();
        assert_eq!(report.converged_count, 3);
        assert!(!report.inconclusive);
        assert!(report.all_positive);
        assert!(
            report.max_pairwise_distance <= 1e-6,
            "distance {}",
            report.max_pairwise_distance
        );
        for pair in &report.pairs {
            let gap = pair.diaz_saa_gap.unwrap();
            assert!(gap >= crate::tolerances::GAP_FLOOR, "gap {gap}");
            let contradiction = pair.contradiction_integral.unwrap();
            assert!(
                contradiction.abs() <= 10.0 * report.max_pairwise_distance.max(1e-12),
                "contradiction integral {contradiction} vs distance {}",
                report.max_pairwise_distance
            );
        }
    }

    #[test]
    fn determinism_of_identical_starts() {
        let grid = HGrid::unit_box(1, 5).unwrap();
        let spec = NonlinearitySpec::power_plus_one(0.5);
        let a = uniqueness_experiment(&spec, 2.0, &quick_config(2.0), &grid, 2, 3).unwrap();
        let b = uniqueness_experiment(&spec, 2.0, &quick_config(2.0), &grid, 2, 3).unwrap();
        assert_eq!(
            a.max_pairwise_distance.to_bits(),
            b.max_pairwise_distance.to_bits()
        );
        assert_eq!(a.runs[0].energy.to_bits(), b.runs[0].energy.to_bits());
    }
}
