//! Pointwise and integral checkers for the generalized Picone identity,
//! the Picone inequality and the Diaz-Saa inequality.
//!
//! Every statement is turned into a computable residual: the algebraic
//! identity L = R is evaluated along two independent routes, the
//! inequalities become margins that must stay above a floor, and the
//! equality case becomes a diagnostic on grad(u/v).

mod integral;
mod suite;

pub use integral::{
    diaz_saa_gap, diaz_saa_gap_with_g, picone_inequality_gap, DiazSaaGap, InequalityGap,
};
pub use suite::{run_suite, PiconeReport, SuiteParams};

use crate::error::{Error, Result};
use crate::hcalc::{h_gradient, same_grid, GridFunction};
use crate::hgroup::{apply_x, apply_y, AnalyticField, Expr, GroupPoint};
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum GKind {
    /// x^{p-1}; the equality case of the admissibility condition.
    Power { p: f64 },
    /// e^{(p-1)x}; admissible with strictly positive margin.
    ExpGrowth { p: f64 },
    /// Constant weight; inadmissible for every p > 1.
    Constant(f64),
    /// Arbitrary closures; no closed form for the exact-gradient path.
    Custom { g: ScalarFn, g_prime: ScalarFn },
}

/// An admissible-candidate weight g on (0, infinity) with its derivative.
#[derive(Clone)]
pub struct GFunction {
    kind: GKind,
    label: String,
}

impl std::fmt::Debug for GFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GFunction({})", self.label)
    }
}

impl GFunction {
    pub fn power(p: f64) -> Self {
        GFunction {
            kind: GKind::Power { p },
            label: format!("x^(p-1), p={p}"),
        }
    }

    pub fn exp_growth(p: f64) -> Self {
        GFunction {
            kind: GKind::ExpGrowth { p },
            label: format!("exp((p-1)x), p={p}"),
        }
    }

    pub fn constant(c: f64) -> Self {
        GFunction {
            kind: GKind::Constant(c),
            label: format!("const {c}"),
        }
    }

    /// Decaying weight e^{-x}: g' < 0 everywhere, so the admissibility
    /// condition fails on every interval. Used by sharpness probes.
    pub fn decaying_exp() -> Self {
        GFunction {
            kind: GKind::Custom {
                g: Arc::new(|x: f64| (-x).exp()),
                g_prime: Arc::new(|x: f64| -(-x).exp()),
            },
            label: "exp(-x)".into(),
        }
    }

    pub fn custom(
        label: impl Into<String>,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        GFunction {
            kind: GKind::Custom {
                g: Arc::new(g),
                g_prime: Arc::new(g_prime),
            },
            label: label.into(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            GKind::Power { p } => x.powf(p - 1.0),
            GKind::ExpGrowth { p } => ((p - 1.0) * x).exp(),
            GKind::Constant(c) => *c,
            GKind::Custom { g, .. } => g(x),
        }
    }

    pub fn eval_prime(&self, x: f64) -> f64 {
        match &self.kind {
            GKind::Power { p } => (p - 1.0) * x.powf(p - 2.0),
            GKind::ExpGrowth { p } => (p - 1.0) * ((p - 1.0) * x).exp(),
            GKind::Constant(_) => 0.0,
            GKind::Custom { g_prime, .. } => g_prime(x),
        }
    }

    /// g composed with a closed-form positive field, when g itself has a
    /// closed form in the expression vocabulary.
    pub fn compose_expr(&self, v: &Expr) -> Option<Expr> {
        match &self.kind {
            GKind::Power { p } => Some(v.clone().powf(p - 1.0)),
            GKind::ExpGrowth { p } => Some(v.clone().scale(p - 1.0).exp()),
            GKind::Constant(c) => Some(Expr::Const(*c)),
            GKind::Custom { .. } => None,
        }
    }
}

/// |s|^{p-2} s, continuous through s = 0 for p > 1.
pub(crate) fn phi_p(s: f64, p: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.signum() * s.abs().powf(p - 1.0)
    }
}

/// Check g'(x) >= (p-1) g(x)^{(p-2)/(p-1)} at every sample.
///
/// Returns (admissible, worst margin); errors if g is not positive at a
/// sample.
pub fn g_admissible(g: &GFunction, p: f64, samples: &[f64]) -> Result<(bool, f64)> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no admissibility samples".into()));
    }
    let mut worst = f64::INFINITY;
    for &x in samples {
        if !(x > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "admissibility samples must be positive, got {x}"
            )));
        }
        let gx = g.eval(x);
        if !(gx > 0.0) {
            return Err(Error::GNotPositive(x));
        }
        let margin = g.eval_prime(x) - (p - 1.0) * gx.powf((p - 2.0) / (p - 1.0));
        worst = worst.min(margin);
    }
    Ok((worst >= crate::tolerances::G_ADMISSIBLE_FLOOR, worst))
}

/// Log-spaced ladder of positive samples, the default admissibility probe.
pub fn sample_ladder(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (llo + (lhi - llo) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

fn check_pair(u: &GridFunction, v: &GridFunction, p: f64) -> Result<()> {
    if !same_grid(u.grid(), v.grid()) {
        return Err(Error::GridMismatch);
    }
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    Ok(())
}

fn require_positive_interior(v: &GridFunction) -> Result<()> {
    for lin in v.grid().interior() {
        let value = v.value(lin);
        if !(value > 0.0) {
            return Err(Error::VNotPositive { node: lin, value });
        }
    }
    Ok(())
}

/// The expanded side L(u,v) of the Picone identity, evaluated at interior
/// nodes from the discrete gradients (boundary entries are left at 0):
///
/// L = |grad u|^p - p (|u|^{p-2} u / g(v)) (grad u . grad v) |grad v|^{p-2}
///     + g'(v) |u|^p / g(v)^2 |grad v|^p
pub fn picone_l(u: &GridFunction, v: &GridFunction, g: &GFunction, p: f64) -> Result<GridFunction> {
    check_pair(u, v, p)?;
    require_positive_interior(v)?;
    let gu = h_gradient(u);
    let gv = h_gradient(v);
    let grid = u.grid().clone();
    let mut values = vec![0.0; grid.node_count()];
    for lin in grid.interior() {
        let vv = v.value(lin);
        let uu = u.value(lin);
        let mag_u = gu.magnitude(lin);
        let mag_v = gv.magnitude(lin);
        let gval = g.eval(vv);
        let cross = if mag_v == 0.0 {
            0.0
        } else {
            p * phi_p(uu, p) / gval * gu.dot_at(&gv, lin) * mag_v.powf(p - 2.0)
        };
        let weight = g.eval_prime(vv) * uu.abs().powf(p) / (gval * gval) * mag_v.powf(p);
        values[lin] = mag_u.powf(p) - cross + weight;
    }
    GridFunction::new(grid, values)
}

/// The compact side R(u,v) = |grad u|^p - grad(|u|^p / g(v)) . |grad v|^{p-2} grad v.
///
/// The quotient |u|^p / g(v) is formed nodewise (zero on the boundary,
/// where u vanishes) and differentiated as a grid function, so on grids
/// this side carries the chain-rule discretization error.
pub fn picone_r(u: &GridFunction, v: &GridFunction, g: &GFunction, p: f64) -> Result<GridFunction> {
    check_pair(u, v, p)?;
    if !u.is_dirichlet() {
        return Err(Error::InvalidParameter(
            "picone_r requires Dirichlet u so the quotient is grid-differentiable".into(),
        ));
    }
    require_positive_interior(v)?;
    let grid = u.grid().clone();
    let mut qvals = vec![0.0; grid.node_count()];
    for lin in grid.interior() {
        qvals[lin] = u.value(lin).abs().powf(p) / g.eval(v.value(lin));
    }
    let quotient = GridFunction::dirichlet(grid.clone(), qvals)?;
    let gq = h_gradient(&quotient);
    let gu = h_gradient(u);
    let gv = h_gradient(v);
    let mut values = vec![0.0; grid.node_count()];
    for lin in grid.interior() {
        let mag_v = gv.magnitude(lin);
        let pulled = if mag_v == 0.0 {
            0.0
        } else {
            gq.dot_at(&gv, lin) * mag_v.powf(p - 2.0)
        };
        values[lin] = gu.magnitude(lin).powf(p) - pulled;
    }
    GridFunction::new(grid, values)
}

/// Both sides of the identity at one point with *exact* gradients.
///
/// L comes from the expanded formula; R differentiates the composite
/// |u|^p / g(v) symbolically as a whole, so agreement genuinely tests the
/// expansion algebra rather than restating it.
pub fn picone_exact(
    u: &AnalyticField,
    v: &AnalyticField,
    g: &GFunction,
    p: f64,
    q: &GroupPoint,
) -> Result<(f64, f64)> {
    if u.n() != v.n() {
        return Err(Error::DimensionMismatch {
            expected: u.n(),
            got: v.n(),
        });
    }
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    let n = u.n();
    let vv = v.value(q)?;
    if !(vv > 0.0) {
        return Err(Error::VNotPositive { node: 0, value: vv });
    }
    let uu = u.value(q)?;

    let horizontal = |f: &AnalyticField| -> Result<Vec<f64>> {
        let mut comps = Vec::with_capacity(2 * n);
        for i in 1..=n {
            comps.push(apply_x(i, f, q)?);
        }
        for i in 1..=n {
            comps.push(apply_y(i, f, q)?);
        }
        Ok(comps)
    };
    let gu = horizontal(u)?;
    let gv = horizontal(v)?;
    let mag = |g: &[f64]| g.iter().map(|c| c * c).sum::<f64>().sqrt();
    let dot: f64 = gu.iter().zip(&gv).map(|(a, b)| a * b).sum();
    let (mag_u, mag_v) = (mag(&gu), mag(&gv));

    let gval = g.eval(vv);
    let cross = if mag_v == 0.0 {
        0.0
    } else {
        p * phi_p(uu, p) / gval * dot * mag_v.powf(p - 2.0)
    };
    let l = mag_u.powf(p) - cross
        + g.eval_prime(vv) * uu.abs().powf(p) / (gval * gval) * mag_v.powf(p);

    // |u|^p as (u^2)^{p/2}, divided by the closed form of g(v)
    let g_of_v = g.compose_expr(v.expr()).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "g = {} has no closed form for the exact-gradient path",
            g.label
        ))
    })?;
    let quotient = AnalyticField::new(
        n,
        Expr::product(vec![
            u.expr().clone().powi(2).powf(p / 2.0),
            g_of_v.powf(-1.0),
        ]),
    );
    let gq = horizontal(&quotient)?;
    let pulled = if mag_v == 0.0 {
        0.0
    } else {
        gq.iter().zip(&gv).map(|(a, b)| a * b).sum::<f64>() * mag_v.powf(p - 2.0)
    };
    let r = mag_u.powf(p) - pulled;
    Ok((l, r))
}

/// Pointwise margin of the Young-inequality step used to prove L >= 0:
/// minimum over interior nodes of
///   |grad u|^p + (p-1) |u|^p |grad v|^p / g(v)^{p/(p-1)}
///   - p (|u|^{p-1} / g(v)) |grad v|^{p-1} |grad u|.
pub fn young_step_check(u: &GridFunction, v: &GridFunction, g: &GFunction, p: f64) -> Result<f64> {
    check_pair(u, v, p)?;
    require_positive_interior(v)?;
    let gu = h_gradient(u);
    let gv = h_gradient(v);
    let mut min_margin = f64::INFINITY;
    for lin in u.grid().interior() {
        let gval = g.eval(v.value(lin));
        let au = u.value(lin).abs();
        let mag_u = gu.magnitude(lin);
        let mag_v = gv.magnitude(lin);
        let lhs = p * au.powf(p - 1.0) / gval * mag_v.powf(p - 1.0) * mag_u;
        let rhs = mag_u.powf(p) + (p - 1.0) * au.powf(p) * mag_v.powf(p) / gval.powf(p / (p - 1.0));
        min_margin = min_margin.min(rhs - lhs);
    }
    Ok(min_margin)
}

/// Diagnostic for the equality case of the identity with g = x^{p-1}:
/// where L is (near) zero, grad(u/v) must be too, and vice versa.
#[derive(Debug, Clone)]
pub struct EqualityCaseProbe {
    /// max L over interior nodes
    pub max_l: f64,
    /// max |grad_H(u/v)| over interior nodes with L <= tol_l
    pub max_ratio_gradient: f64,
    /// how many interior nodes had L <= tol_l
    pub low_l_nodes: usize,
}

/// The ratio gradient is computed by the quotient rule from the discrete
/// gradients, (v grad u - u grad v)/v^2, so it never touches the 0/0
/// boundary values of u/v; statistics cover interior nodes only.
pub fn equality_case_probe(
    u: &GridFunction,
    v: &GridFunction,
    p: f64,
    tol_l: f64,
) -> Result<EqualityCaseProbe> {
    let g = GFunction::power(p);
    let l = picone_l(u, v, &g, p)?;
    let gu = h_gradient(u);
    let gv = h_gradient(v);
    let mut max_l = f64::NEG_INFINITY;
    let mut max_ratio_gradient = 0.0f64;
    let mut low_l_nodes = 0usize;
    for lin in u.grid().interior() {
        let lv = l.value(lin);
        max_l = max_l.max(lv);
        if lv <= tol_l {
            low_l_nodes += 1;
            let vv = v.value(lin);
            let uu = u.value(lin);
            let mut s2 = 0.0;
            for c in 0..gu.components().len() {
                let d = (vv * gu.component(c)[lin] - uu * gv.component(c)[lin]) / (vv * vv);
                s2 += d * d;
            }
            max_ratio_gradient = max_ratio_gradient.max(s2.sqrt());
        }
    }
    Ok(EqualityCaseProbe {
        max_l,
        max_ratio_gradient,
        low_l_nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hcalc::HGrid;
    use crate::hgroup::{random_polynomial, random_positive};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn admissibility_of_the_named_weights() {
        // x^{p-1} sits on the equality line
        let samples = sample_ladder(0.1, 10.0, 40);
        let (ok, margin) = g_admissible(&GFunction::power(3.0), 3.0, &samples).unwrap();
        assert!(ok);
        assert!(margin.abs() <= 1e-12);

        // e^{(p-1)x} has a strictly positive margin
        let (ok, margin) = g_admissible(&GFunction::exp_growth(2.0), 2.0, &samples).unwrap();
        assert!(ok);
        assert!(margin > 0.0);

        // a constant weight fails: g' = 0 < (p-1) g^{(p-2)/(p-1)} = 1 at p = 2
        let (ok, margin) = g_admissible(&GFunction::constant(1.0), 2.0, &samples).unwrap();
        assert!(!ok);
        assert!((margin + 1.0).abs() <= 1e-12);

        // nonpositive g is an error
        let bad = GFunction::custom("x-5", |x| x - 5.0, |_| 1.0);
        assert!(matches!(
            g_admissible(&bad, 2.0, &samples),
            Err(Error::GNotPositive(_))
        ));
    }

    fn unit_grid(m: usize) -> std::sync::Arc<HGrid> {
        HGrid::unit_box(1, m).unwrap()
    }

    #[test]
    fn l_vanishes_on_the_diagonal_for_power_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let grid = unit_grid(9);
        for &p in &[1.5, 2.0, 2.5, 3.0] {
            let v =
                GridFunction::sample(grid.clone(), &random_positive(&mut rng, 1, 2.0, 0.5, 1.0))
                    .unwrap();
            let l = picone_l(&v, &v, &GFunction::power(p), p).unwrap();
            let scale = h_gradient(&v)
                .magnitude(grid.interior().next().unwrap())
                .powf(p);
            for lin in grid.interior() {
                assert!(
                    l.value(lin).abs() <= 1e-11 * (1.0 + scale),
                    "L(u,u) = {} at node {lin} for p = {p}",
                    l.value(lin)
                );
            }
        }
    }

    #[test]
    fn l_for_constant_u_is_the_weight_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let grid = unit_grid(7);
        let v = GridFunction::sample(grid.clone(), &random_positive(&mut rng, 1, 2.0, 0.5, 1.0))
            .unwrap();
        let u = GridFunction::constant(grid.clone(), 1.7);
        let p = 2.5;
        let g = GFunction::power(p);
        let l = picone_l(&u, &v, &g, p).unwrap();
        let gv = h_gradient(&v);
        for lin in grid.interior() {
            let vv = v.value(lin);
            let expected = g.eval_prime(vv) * 1.7f64.powf(p) / (g.eval(vv) * g.eval(vv))
                * gv.magnitude(lin).powf(p);
            assert!((l.value(lin) - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
            assert!(l.value(lin) >= 0.0);
        }
    }

    #[test]
    fn nonpositive_v_is_rejected() {
        let grid = unit_grid(5);
        let u = GridFunction::zeros(grid.clone(), true);
        let v = GridFunction::constant(grid.clone(), 0.0);
        assert!(matches!(
            picone_l(&u, &v, &GFunction::power(2.0), 2.0),
            Err(Error::VNotPositive { .. })
        ));
    }

    #[test]
    fn exact_identity_for_both_closed_form_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for case in 0..50 {
            let p = [1.5, 2.0, 2.5, 3.0][case % 4];
            let u = random_polynomial(&mut rng, 1, 1.0);
            let v = random_positive(&mut rng, 1, 1.5, 0.4, 1.0);
            let g = if case % 2 == 0 {
                GFunction::power(p)
            } else {
                GFunction::exp_growth(p)
            };
            for _ in 0..5 {
                let q = GroupPoint::new(
                    vec![rng.random_range(0.0..1.0)],
                    vec![rng.random_range(0.0..1.0)],
                    rng.random_range(0.0..1.0),
                )
                .unwrap();
                let (l, r) = picone_exact(&u, &v, &g, p, &q).unwrap();
                assert!(
                    (l - r).abs() <= 1e-12 * (1.0 + l.abs()),
                    "exact identity violated: L = {l}, R = {r}, p = {p}, g = {}",
                    g.label()
                );
                assert!(l >= -1e-12 * (1.0 + l.abs()), "nonnegativity: L = {l}");
            }
        }
    }

    #[test]
    fn grid_identity_error_is_first_order() {
        // max |L - R| on the grid path measures the chain-rule
        // discretization error; the sample must vanish smoothly at the
        // boundary or the kink dominates, so damp the polynomial by the
        // boundary bump
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let p = 2.5;
        let g = GFunction::power(p);
        let poly = random_polynomial(&mut rng, 1, 1.0);
        let bump = crate::hgroup::boundary_bump(1, &[0.0; 3], &[1.0; 3]);
        let u_field = AnalyticField::new(
            1,
            Expr::product(vec![poly.expr().clone(), bump.expr().clone()]),
        );
        let v_field = random_positive(&mut rng, 1, 2.0, 0.5, 1.0);
        let mut deviations = Vec::new();
        for m in [9usize, 17, 33] {
            let grid = unit_grid(m);
            let u = GridFunction::sample_dirichlet(grid.clone(), &u_field).unwrap();
            let v = GridFunction::sample(grid.clone(), &v_field).unwrap();
            let l = picone_l(&u, &v, &g, p).unwrap();
            let r = picone_r(&u, &v, &g, p).unwrap();
            let max_dev = grid
                .interior()
                .map(|lin| (l.value(lin) - r.value(lin)).abs())
                .fold(0.0f64, f64::max);
            deviations.push(max_dev);
        }
        assert!(
            deviations[2] < deviations[0],
            "grid identity deviation should shrink under refinement: {deviations:?}"
        );
        let h = 1.0 / 32.0;
        let c = deviations[2] / h;
        assert!(c.is_finite() && c < 100.0, "reported C = {c}");
    }

    #[test]
    fn r_reduces_to_gradient_power_for_constant_v() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let grid = unit_grid(7);
        let values = (0..grid.node_count())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let u = GridFunction::dirichlet(grid.clone(), values).unwrap();
        let v = GridFunction::constant(grid.clone(), 3.0);
        let p = 2.5;
        let r = picone_r(&u, &v, &GFunction::power(p), p).unwrap();
        let gu = h_gradient(&u);
        for lin in grid.interior() {
            let expected = gu.magnitude(lin).powf(p);
            assert!((r.value(lin) - expected).abs() <= 1e-13 * (1.0 + expected));
        }

        let zero = GridFunction::zeros(grid.clone(), true);
        let r0 = picone_r(&zero, &v, &GFunction::power(p), p).unwrap();
        assert_eq!(r0.sup_norm(), 0.0);
    }

    #[test]
    fn randomized_nonnegativity_on_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let grid = unit_grid(9);
        for case in 0..50 {
            let p = [1.5, 2.0, 2.5, 3.0][case % 4];
            let g = if case % 3 == 0 {
                GFunction::exp_growth(p)
            } else {
                GFunction::power(p)
            };
            let u_raw =
                GridFunction::sample(grid.clone(), &random_polynomial(&mut rng, 1, 1.0)).unwrap();
            let u = u_raw.scale(1.0 / u_raw.sup_norm().max(1e-12));
            let v_raw =
                GridFunction::sample(grid.clone(), &random_positive(&mut rng, 1, 2.0, 0.5, 1.0))
                    .unwrap();
            let v = v_raw.scale(1.0 / v_raw.sup_norm());
            let l = picone_l(&u, &v, &g, p).unwrap();
            let min_l = l.min_interior();
            assert!(
                min_l >= crate::tolerances::POINTWISE_INEQ_FLOOR,
                "min L = {min_l} for p = {p}, g = {}",
                g.label()
            );
        }
    }

    #[test]
    fn inadmissible_weight_admits_negative_l() {
        // g = e^{-x} violates the admissibility condition everywhere;
        // a constant u and any nonconstant v > 0 expose L < 0
        let grid = unit_grid(7);
        let g = GFunction::decaying_exp();
        let (ok, _) = g_admissible(&g, 2.0, &sample_ladder(0.5, 3.0, 20)).unwrap();
        assert!(!ok);
        let u = GridFunction::constant(grid.clone(), 1.0);
        let v = GridFunction::from_fn(grid.clone(), |c| 1.0 + 0.8 * c[0] + 0.3 * c[2]);
        let l = picone_l(&u, &v, &g, 2.0).unwrap();
        assert!(
            l.min_interior() < 0.0,
            "sharpness probe failed: min L = {}",
            l.min_interior()
        );
    }

    #[test]
    fn young_margin_is_nonnegative_and_detects_equality() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let grid = unit_grid(7);
        let p = 2.5;
        let g = GFunction::power(p);

        for _ in 0..100 {
            let u =
                GridFunction::sample(grid.clone(), &random_polynomial(&mut rng, 1, 1.0)).unwrap();
            let v =
                GridFunction::sample(grid.clone(), &random_positive(&mut rng, 1, 2.0, 0.5, 1.0))
                    .unwrap();
            let margin = young_step_check(&u, &v, &g, p).unwrap();
            assert!(margin >= -1e-12, "Young margin {margin}");
        }

        // constant u: margin reduces to the nonnegative weight term
        let u = GridFunction::constant(grid.clone(), 2.0);
        let v = GridFunction::from_fn(grid.clone(), |c| 1.5 + 0.4 * c[1]);
        let margin = young_step_check(&u, &v, &g, p).unwrap();
        assert!(margin >= 0.0);

        // tune a constant shift of u by bisection until
        // |grad u| = |u| |grad v| / g(v)^{1/(p-1)} at a chosen node,
        // where the margin must collapse to zero
        let v = GridFunction::from_fn(grid.clone(), |c| 2.0 + 0.5 * c[0]);
        let target = grid.interior().nth(8).unwrap();
        let linear = GridFunction::from_fn(grid.clone(), |c| c[0]);
        let equality_defect = |beta: f64| -> f64 {
            let u = linear.map(|s| s + beta);
            let gu = h_gradient(&u);
            let gv = h_gradient(&v);
            let gval = g.eval(v.value(target));
            gu.magnitude(target)
                - u.value(target).abs() * gv.magnitude(target) / gval.powf(1.0 / (p - 1.0))
        };
        let (mut lo, mut hi) = (0.0, 50.0);
        assert!(equality_defect(lo) > 0.0 && equality_defect(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if equality_defect(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let u = linear.map(|s| s + 0.5 * (lo + hi));
        let gu = h_gradient(&u);
        let gv = h_gradient(&v);
        let gval = g.eval(v.value(target));
        let lhs = p * u.value(target).abs().powf(p - 1.0) / gval
            * gv.magnitude(target).powf(p - 1.0)
            * gu.magnitude(target);
        let rhs = gu.magnitude(target).powf(p)
            + (p - 1.0) * u.value(target).abs().powf(p) * gv.magnitude(target).powf(p)
                / gval.powf(p / (p - 1.0));
        assert!(
            (rhs - lhs).abs() <= 1e-10 * (1.0 + rhs.abs()),
            "equality not detected: margin {}",
            rhs - lhs
        );
        let global = young_step_check(&u, &v, &g, p).unwrap();
        assert!(global >= -1e-12 && global <= 1e-9);
    }

    #[test]
    fn equality_case_probe_detects_proportional_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let grid = unit_grid(9);
        let p = 2.5;
        let v = GridFunction::sample(grid.clone(), &random_positive(&mut rng, 1, 2.0, 0.5, 1.0))
            .unwrap();

        // u = 3 v: both diagnostics vanish
        let probe = equality_case_probe(&v.scale(3.0), &v, p, 1e-10).unwrap();
        assert!(probe.max_l <= 1e-10, "max L = {}", probe.max_l);
        assert!(
            probe.max_ratio_gradient <= 1e-10,
            "grad ratio = {}",
            probe.max_ratio_gradient
        );
        assert_eq!(probe.low_l_nodes, grid.interior_count());

        // u = 0: L and grad(u/v) both vanish identically
        let probe =
            equality_case_probe(&GridFunction::zeros(grid.clone(), true), &v, p, 1e-12).unwrap();
        assert_eq!(probe.max_l, 0.0);
        assert_eq!(probe.max_ratio_gradient, 0.0);

        // a 1% multiplicative perturbation breaks both
        let wiggle = GridFunction::from_fn(grid.clone(), |c| {
            1.0 + 0.01 * (c[0] * (1.0 - c[0]) * 16.0 - 0.5) * (2.0 * c[2] - 1.0)
        });
        let u = v.zip(&wiggle, |a, b| a * b).unwrap();
        let probe = equality_case_probe(&u, &v, p, 1e-10).unwrap();
        assert!(probe.max_l > 1e-6, "perturbed max L = {}", probe.max_l);
        assert!(probe.max_ratio_gradient > 0.0 || probe.low_l_nodes == 0);
    }
}
