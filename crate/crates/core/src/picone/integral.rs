//! Integral forms: the generalized Picone inequality and the Diaz-Saa
//! inequality, each as a computed gap that the theorems force to be
//! nonnegative (up to the documented floors).

use super::{g_admissible, phi_p, sample_ladder, GFunction};
use crate::error::{Error, Result};
use crate::hcalc::{
    gradient_magnitude_pow, integrate, p_sub_laplacian, same_grid, GridFunction,
};
use crate::tolerances;

/// Result of the Picone-inequality check
/// integral |grad u|^p  >=  integral (|u|^p / g(v)) (-Delta_p v).
#[derive(Debug, Clone)]
pub struct InequalityGap {
    /// gradient term minus right-hand term; the theorem makes this >= 0
    pub gap: f64,
    pub gradient_term: f64,
    pub rhs_term: f64,
    /// shift 1/k applied at interior nodes where v = 0 (k doubles until
    /// the right-hand term is stable to 1%)
    pub shift_k: f64,
    /// min interior value of -Delta_p v, the supersolution certificate
    pub min_mu: f64,
}

fn rhs_with_shift(
    u: &GridFunction,
    v: &GridFunction,
    g: &GFunction,
    p: f64,
    mu: &GridFunction,
    k: f64,
) -> f64 {
    let grid = u.grid();
    let quotient = (0..grid.node_count()).map(|lin| {
        if grid.is_boundary(lin) {
            return 0.0;
        }
        let vv = v.value(lin);
        let base = if vv > 0.0 { vv } else { vv + 1.0 / k };
        let q = u.value(lin).abs().powf(p) / g.eval(base);
        grid.quad_weight(lin) * q * mu.value(lin)
    });
    crate::hcalc::neumaier_sum(quotient)
}

/// Evaluate the gap of the generalized Picone inequality.
///
/// Preconditions checked here: u, v Dirichlet; v >= 0 and not identically
/// zero; -Delta_p v >= 0 at interior nodes (within tolerance), which is the
/// discrete stand-in for the positive measure on the right-hand side; g
/// admissible on the sampled range of v.
pub fn picone_inequality_gap(
    u: &GridFunction,
    v: &GridFunction,
    g: &GFunction,
    p: f64,
    eps: f64,
) -> Result<InequalityGap> {
    if !same_grid(u.grid(), v.grid()) {
        return Err(Error::GridMismatch);
    }
    if !u.is_dirichlet() || !v.is_dirichlet() {
        return Err(Error::InvalidParameter(
            "picone_inequality_gap requires Dirichlet u and v".into(),
        ));
    }
    let grid = u.grid().clone();
    let mut vmax = 0.0f64;
    for lin in grid.interior() {
        let vv = v.value(lin);
        if vv < 0.0 {
            return Err(Error::VNotPositive {
                node: lin,
                value: vv,
            });
        }
        vmax = vmax.max(vv);
    }
    if vmax == 0.0 {
        return Err(Error::InvalidParameter("v must not be identically zero".into()));
    }

    let lap = p_sub_laplacian(v, p, eps)?;
    let mu = lap.scale(-1.0);
    let min_mu = mu.min_interior();
    if min_mu < tolerances::SUPERSOLUTION_FLOOR {
        return Err(Error::NotSupersolution(min_mu));
    }

    // admissibility over the range the quotient will actually see
    let samples = sample_ladder(1e-6 * vmax.max(1e-6), vmax.max(1.0) * 2.0, 60);
    let (admissible, worst) = g_admissible(g, p, &samples)?;
    if !admissible {
        return Err(Error::GNotAdmissible(worst));
    }

    let gradient_term = integrate(&gradient_magnitude_pow(u, p));

    let mut k = 1024.0;
    let mut rhs = rhs_with_shift(u, v, g, p, &mu, k);
    loop {
        let next = rhs_with_shift(u, v, g, p, &mu, 2.0 * k);
        if (next - rhs).abs() <= tolerances::SHIFT_STABILITY_REL * (next.abs() + 1e-14) {
            rhs = next;
            k *= 2.0;
            break;
        }
        rhs = next;
        k *= 2.0;
        if k > 2f64.powi(60) {
            return Err(Error::InvalidParameter(
                "shift lifting did not stabilize under doubling".into(),
            ));
        }
    }

    Ok(InequalityGap {
        gap: gradient_term - rhs,
        gradient_term,
        rhs_term: rhs,
        shift_k: k,
        min_mu,
    })
}

/// Result of the Diaz-Saa check
/// integral (-Delta_p u1 / u1^{p-1} + Delta_p u2 / u2^{p-1}) (u1^p - u2^p) >= 0,
/// with the weight fixed to g(x) = x^{p-1}.
#[derive(Debug, Clone)]
pub struct DiazSaaGap {
    pub gap: f64,
    /// one-sided inequality weighted by u1^p
    pub side_u1: f64,
    /// one-sided inequality weighted by u2^p
    pub side_u2: f64,
    pub min_mu: [f64; 2],
}

fn positive_interior(u: &GridFunction) -> Result<()> {
    for lin in u.grid().interior() {
        let value = u.value(lin);
        if !(value > 0.0) {
            return Err(Error::VNotPositive { node: lin, value });
        }
    }
    Ok(())
}

pub fn diaz_saa_gap(u1: &GridFunction, u2: &GridFunction, p: f64, eps: f64) -> Result<DiazSaaGap> {
    if !same_grid(u1.grid(), u2.grid()) {
        return Err(Error::GridMismatch);
    }
    if !u1.is_dirichlet() || !u2.is_dirichlet() {
        return Err(Error::InvalidParameter(
            "diaz_saa_gap requires Dirichlet inputs".into(),
        ));
    }
    positive_interior(u1)?;
    positive_interior(u2)?;
    let grid = u1.grid().clone();

    let mu1 = p_sub_laplacian(u1, p, eps)?.scale(-1.0);
    let mu2 = p_sub_laplacian(u2, p, eps)?.scale(-1.0);
    let min_mu = [mu1.min_interior(), mu2.min_interior()];
    for (i, m) in min_mu.iter().enumerate() {
        if *m < tolerances::SUPERSOLUTION_FLOOR {
            return Err(Error::NotSupersolution(min_mu[i]));
        }
    }

    // densities at interior nodes; the boundary contributes exactly zero
    // because u1^p - u2^p and the one-sided weights vanish there
    let density = |lin: usize| -> (f64, f64, f64) {
        let a1 = u1.value(lin);
        let a2 = u2.value(lin);
        let q1 = mu1.value(lin) / phi_p(a1, p);
        let q2 = mu2.value(lin) / phi_p(a2, p);
        let p1 = a1.abs().powf(p);
        let p2 = a2.abs().powf(p);
        ((q1 - q2) * (p1 - p2), (q1 - q2) * p1, (q2 - q1) * p2)
    };
    let gap = crate::hcalc::neumaier_sum((0..grid.node_count()).map(|lin| {
        if grid.is_boundary(lin) {
            0.0
        } else {
            grid.quad_weight(lin) * density(lin).0
        }
    }));
    let side_u1 = crate::hcalc::neumaier_sum((0..grid.node_count()).map(|lin| {
        if grid.is_boundary(lin) {
            0.0
        } else {
            grid.quad_weight(lin) * density(lin).1
        }
    }));
    let side_u2 = crate::hcalc::neumaier_sum((0..grid.node_count()).map(|lin| {
        if grid.is_boundary(lin) {
            0.0
        } else {
            grid.quad_weight(lin) * density(lin).2
        }
    }));

    Ok(DiazSaaGap {
        gap,
        side_u1,
        side_u2,
        min_mu,
    })
}

/// The same integral with a general weight g in place of x^{p-1}. The
/// inequality is *not* claimed for general admissible g; this exists so a
/// counterexample search can report what it finds, with no sign asserted.
pub fn diaz_saa_gap_with_g(
    u1: &GridFunction,
    u2: &GridFunction,
    g: &GFunction,
    p: f64,
    eps: f64,
) -> Result<f64> {
    if !same_grid(u1.grid(), u2.grid()) {
        return Err(Error::GridMismatch);
    }
    positive_interior(u1)?;
    positive_interior(u2)?;
    let grid = u1.grid().clone();
    let mu1 = p_sub_laplacian(u1, p, eps)?.scale(-1.0);
    let mu2 = p_sub_laplacian(u2, p, eps)?.scale(-1.0);
    Ok(crate::hcalc::neumaier_sum((0..grid.node_count()).map(
        |lin| {
            if grid.is_boundary(lin) {
                return 0.0;
            }
            let a1 = u1.value(lin);
            let a2 = u2.value(lin);
            let d = (mu1.value(lin) / g.eval(a1) - mu2.value(lin) / g.eval(a2))
                * (a1.abs().powf(p) - a2.abs().powf(p));
            grid.quad_weight(lin) * d
        },
    )))
}
