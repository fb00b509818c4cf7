//! The randomized verification suite behind the `picone` experiment:
//! admissibility, both identity routes, nonnegativity, the Young step,
//! the equality case with its sharpness probe, and (optionally) the
//! integral inequality against a solved supersolution.

use super::{
    equality_case_probe, g_admissible, picone_exact, picone_inequality_gap, picone_l, picone_r,
    sample_ladder, young_step_check, GFunction,
};
use crate::error::Result;
use crate::hcalc::{GridFunction, HGrid};
use crate::hgroup::{random_polynomial, random_positive, GroupPoint};
use crate::solver::{solve, NonlinearitySpec, SolverConfig};
use crate::tolerances;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct SuiteParams {
    pub p: f64,
    pub g: GFunction,
    pub instances: usize,
    pub grid: Arc<HGrid>,
    pub seed: u64,
    pub eps: Option<f64>,
    /// bound on max|L-R|/h for the grid identity route
    pub grid_identity_c_max: f64,
    /// also solve -Delta_p v = 1 and check the integral inequality
    pub run_inequality: bool,
}

impl SuiteParams {
    pub fn new(p: f64, g: GFunction, grid: Arc<HGrid>) -> Self {
        SuiteParams {
            p,
            g,
            instances: 25,
            grid,
            seed: 0,
            eps: None,
            grid_identity_c_max: 100.0,
            run_inequality: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToleranceBlock {
    pub algebraic_identity_rel: f64,
    pub pointwise_floor: f64,
    pub young_floor: f64,
    pub equality_case_abs: f64,
    pub sharpness_min_l: f64,
    pub gap_floor: f64,
    pub gap_equality_abs: f64,
    pub grid_identity_c_max: f64,
}

/// Everything the picone experiment measured, with its pass flags.
/// Optional fields are absent when the corresponding check was skipped
/// (no closed form for g, inadmissible g, inequality not requested).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiconeReport {
    pub p: f64,
    pub g_label: String,
    pub instances: usize,
    pub grid_shape: Vec<usize>,
    pub grid_spacing: Vec<f64>,
    pub eps: f64,
    pub seed: u64,

    pub admissible: bool,
    pub admissibility_margin: f64,

    pub identity_exact_max_dev: Option<f64>,
    pub identity_exact_pass: Option<bool>,

    pub identity_grid_max_dev: f64,
    pub identity_grid_c: f64,
    pub identity_grid_pass: bool,

    pub min_l_normalized: Option<f64>,
    pub nonnegativity_pass: Option<bool>,

    pub young_min_margin: f64,
    pub young_pass: bool,

    pub equality_max_l: f64,
    pub equality_grad_ratio: f64,
    pub equality_pass: bool,
    pub perturbed_max_l: f64,
    pub sharpness_pass: bool,

    pub inequality_min_gap: Option<f64>,
    pub inequality_gap_at_diagonal: Option<f64>,
    pub inequality_shift_k: Option<f64>,
    pub inequality_pass: Option<bool>,

    pub tolerances: ToleranceBlock,
    pub failing_checks: Vec<String>,
    pub all_pass: bool,
}

pub fn run_suite(params: &SuiteParams) -> Result<PiconeReport> {
    let SuiteParams {
        p,
        ref g,
        instances,
        ref grid,
        seed,
        eps,
        grid_identity_c_max,
        run_inequality,
    } = *params;
    let eps = eps.unwrap_or_else(|| crate::hcalc::default_eps(grid));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failing: Vec<String> = Vec::new();

    let (admissible, admissibility_margin) =
        g_admissible(g, p, &sample_ladder(1e-3, 10.0, 60))?;
    if !admissible {
        failing.push("admissibility".into());
    }

    // coordinate bound of the box, for positivity-safe random fields
    let box_bound = grid
        .lower()
        .iter()
        .chain(grid.upper().iter())
        .fold(0.0f64, |m, &c| m.max(c.abs()));

    let mut exact_max_dev: Option<f64> = None;
    let mut grid_max_dev = 0.0f64;
    let mut min_l = f64::INFINITY;
    let mut young_min = f64::INFINITY;
    let h_max = grid.spacing().iter().cloned().fold(0.0f64, f64::max);

    let bump = crate::hgroup::boundary_bump(grid.n(), grid.lower(), grid.upper());
    for _ in 0..instances {
        let u_field = random_polynomial(&mut rng, grid.n(), 1.0);
        let v_field = random_positive(&mut rng, grid.n(), 2.0, 0.5, box_bound);

        // exact-gradient route, when g has a closed form
        if g.compose_expr(v_field.expr()).is_some() {
            let mut worst = exact_max_dev.unwrap_or(0.0);
            for _ in 0..5 {
                let q = GroupPoint::from_coords(
                    &(0..grid.axes())
                        .map(|a| rng.random_range(grid.lower()[a]..grid.upper()[a]))
                        .collect::<Vec<_>>(),
                )?;
                let (l, r) = picone_exact(&u_field, &v_field, g, p, &q)?;
                let dev = (l - r).abs() / (1.0 + l.abs());
                worst = worst.max(dev);
            }
            exact_max_dev = Some(worst);
        }

        // grid routes; the fields are sampled and normalized to unit sup
        let v_raw = GridFunction::sample(grid.clone(), &v_field)?;
        let v = v_raw.scale(1.0 / v_raw.sup_norm());

        // nonnegativity and the Young step are pointwise algebra: any
        // sample works, no boundary smoothness needed
        let u_raw = GridFunction::sample(grid.clone(), &u_field)?;
        let u = u_raw.scale(1.0 / u_raw.sup_norm().max(1e-300));
        min_l = min_l.min(picone_l(&u, &v, g, p)?.min_interior());
        young_min = young_min.min(young_step_check(&u, &v, g, p)?);

        // the grid identity route needs u to vanish smoothly on the
        // boundary, or the Dirichlet kink swamps the chain-rule error
        let u_smooth_field = crate::hgroup::AnalyticField::new(
            grid.n(),
            crate::hgroup::Expr::product(vec![
                u_field.expr().clone(),
                bump.expr().clone(),
            ]),
        );
        let us_raw = GridFunction::sample_dirichlet(grid.clone(), &u_smooth_field)?;
        let us = us_raw.scale(1.0 / us_raw.sup_norm().max(1e-300));
        let l = picone_l(&us, &v, g, p)?;
        let r = picone_r(&us, &v, g, p)?;
        for lin in grid.interior() {
            grid_max_dev = grid_max_dev.max((l.value(lin) - r.value(lin)).abs());
        }
    }

    let identity_exact_pass = exact_max_dev.map(|d| d <= tolerances::ALGEBRAIC_IDENTITY_REL);
    if identity_exact_pass == Some(false) {
        failing.push("identity_exact".into());
    }
    let identity_grid_c = grid_max_dev / h_max;
    let identity_grid_pass = identity_grid_c <= grid_identity_c_max;
    if !identity_grid_pass {
        failing.push("identity_grid".into());
    }

    let (min_l_normalized, nonnegativity_pass) = if admissible {
        let pass = min_l >= tolerances::POINTWISE_INEQ_FLOOR;
        if !pass {
            failing.push("nonnegativity".into());
        }
        (Some(min_l), Some(pass))
    } else {
        (None, None)
    };

    let young_pass = young_min >= tolerances::YOUNG_MARGIN_FLOOR;
    if !young_pass {
        failing.push("young_step".into());
    }

    // equality case, always with the power weight
    let v_field = random_positive(&mut rng, grid.n(), 2.0, 0.5, box_bound);
    let v = GridFunction::sample(grid.clone(), &v_field)?;
    let scale: f64 = rng.random_range(0.5..3.0);
    let probe = equality_case_probe(&v.scale(scale), &v, p, tolerances::EQUALITY_CASE_ABS)?;
    let equality_pass = probe.max_l <= tolerances::EQUALITY_CASE_ABS
        && probe.max_ratio_gradient <= tolerances::EQUALITY_CASE_ABS;
    if !equality_pass {
        failing.push("equality_case".into());
    }

    let wiggle = GridFunction::from_fn(grid.clone(), |c| {
        1.0 + 0.01 * (16.0 * c[0] * (1.0 - c[0]) - 0.5) * (2.0 * c[grid.axes() - 1] - 1.0)
    });
    let perturbed = v.scale(scale).zip(&wiggle, |a, b| a * b)?;
    let sharp = equality_case_probe(&perturbed, &v, p, tolerances::EQUALITY_CASE_ABS)?;
    let sharpness_pass = sharp.max_l > tolerances::SHARPNESS_MIN_L;
    if !sharpness_pass {
        failing.push("equality_sharpness".into());
    }

    // integral inequality against a solved supersolution
    let mut inequality_min_gap = None;
    let mut inequality_gap_at_diagonal = None;
    let mut inequality_shift_k = None;
    let mut inequality_pass = None;
    if run_inequality && admissible {
        let config = SolverConfig {
            p,
            eps: Some(eps),
            seed,
            keep_history: false,
            ..Default::default()
        };
        let supersolution = solve(&NonlinearitySpec::constant(1.0), &config, grid)?;
        let v = supersolution.u;
        let mut min_gap = f64::INFINITY;
        let mut shift_k = 0.0f64;
        for _ in 0..instances.min(10) {
            let u = GridFunction::dirichlet(
                grid.clone(),
                (0..grid.node_count())
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect(),
            )?;
            let out = picone_inequality_gap(&u, &v, g, p, eps)?;
            min_gap = min_gap.min(out.gap);
            shift_k = out.shift_k;
        }
        let diag = picone_inequality_gap(&v, &v, &GFunction::power(p), p, eps)?;
        let pass = min_gap >= tolerances::GAP_FLOOR
            && diag.gap.abs() <= tolerances::GAP_EQUALITY_ABS;
        if !pass {
            failing.push("integral_inequality".into());
        }
        inequality_min_gap = Some(min_gap);
        inequality_gap_at_diagonal = Some(diag.gap);
        inequality_shift_k = Some(shift_k);
        inequality_pass = Some(pass);
    }

    let all_pass = failing.is_empty();
    Ok(PiconeReport {
        p,
        g_label: g.label().to_string(),
        instances,
        grid_shape: grid.shape().to_vec(),
        grid_spacing: grid.spacing().to_vec(),
        eps,
        seed,
        admissible,
        admissibility_margin,
        identity_exact_max_dev: exact_max_dev,
        identity_exact_pass,
        identity_grid_max_dev: grid_max_dev,
        identity_grid_c,
        identity_grid_pass,
        min_l_normalized,
        nonnegativity_pass,
        young_min_margin: young_min,
        young_pass,
        equality_max_l: probe.max_l,
        equality_grad_ratio: probe.max_ratio_gradient,
        equality_pass,
        perturbed_max_l: sharp.max_l,
        sharpness_pass,
        inequality_min_gap,
        inequality_gap_at_diagonal,
        inequality_shift_k,
        inequality_pass,
        tolerances: ToleranceBlock {
            algebraic_identity_rel: tolerances::ALGEBRAIC_IDENTITY_REL,
            pointwise_floor: tolerances::POINTWISE_INEQ_FLOOR,
            young_floor: tolerances::YOUNG_MARGIN_FLOOR,
            equality_case_abs: tolerances::EQUALITY_CASE_ABS,
            sharpness_min_l: tolerances::SHARPNESS_MIN_L,
            gap_floor: tolerances::GAP_FLOOR,
            gap_equality_abs: tolerances::GAP_EQUALITY_ABS,
            grid_identity_c_max,
        },
        failing_checks: failing,
        all_pass,
    })
}
