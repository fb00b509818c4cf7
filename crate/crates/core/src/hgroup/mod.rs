//! The Heisenberg group H^n: group law, left-invariant vector fields and
//! their commutators, applied exactly to closed-form test functions.
//!
//! Everything here is grid-free. The discretization layer checks itself
//! against these exact values.

mod field;

pub use field::{boundary_bump, random_polynomial, random_positive, AnalyticField, Coord, Expr};

use crate::error::{Error, Result};

/// An element (x, y, t) of H^n.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint {
    x: Vec<f64>,
    y: Vec<f64>,
    t: f64,
}

impl GroupPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>, t: f64) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: x.len().max(1),
                got: y.len(),
            });
        }
        if !t.is_finite() || x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "group point coordinates must be finite".into(),
            ));
        }
        Ok(GroupPoint { x, y, t })
    }

    pub fn identity(n: usize) -> Self {
        GroupPoint {
            x: vec![0.0; n],
            y: vec![0.0; n],
            t: 0.0,
        }
    }

    /// Build from a flat (x_1..x_n, y_1..y_n, t) coordinate slice.
    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        if coords.len() < 3 || coords.len() % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "coordinate slice of length {} is not 2n+1",
                coords.len()
            )));
        }
        let n = (coords.len() - 1) / 2;
        GroupPoint::new(
            coords[..n].to_vec(),
            coords[n..2 * n].to_vec(),
            coords[2 * n],
        )
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// The group inverse (-x, -y, -t).
    pub fn inverse(&self) -> GroupPoint {
        GroupPoint {
            x: self.x.iter().map(|v| -v).collect(),
            y: self.y.iter().map(|v| -v).collect(),
            t: -self.t,
        }
    }
}

/// The group law (x,y,t)·(x',y',t') = (x+x', y+y', t+t'+2(<y,x'> - <x,y'>)).
pub fn group_product(a: &GroupPoint, b: &GroupPoint) -> Result<GroupPoint> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    let n = a.n();
    let mut twist = 0.0;
    for i in 0..n {
        twist += a.y[i] * b.x[i] - a.x[i] * b.y[i];
    }
    Ok(GroupPoint {
        x: (0..n).map(|i| a.x[i] + b.x[i]).collect(),
        y: (0..n).map(|i| a.y[i] + b.y[i]).collect(),
        t: a.t + b.t + 2.0 * twist,
    })
}

fn check_index(i: usize, n: usize) -> Result<usize> {
    if i == 0 || i > n {
        Err(Error::IndexOutOfRange { index: i, n })
    } else {
        Ok(i - 1)
    }
}

/// (X_i f)(q) with X_i = d/dx_i + 2 y_i d/dt; i is 1-based.
pub fn apply_x(i: usize, f: &AnalyticField, q: &GroupPoint) -> Result<f64> {
    let i = check_index(i, f.n())?;
    f.horizontal_x(i).value(q)
}

/// (Y_i f)(q) with Y_i = d/dy_i - 2 x_i d/dt; i is 1-based.
pub fn apply_y(i: usize, f: &AnalyticField, q: &GroupPoint) -> Result<f64> {
    let i = check_index(i, f.n())?;
    f.horizontal_y(i).value(q)
}

/// (T f)(q) with T = d/dt.
pub fn apply_t(f: &AnalyticField, q: &GroupPoint) -> Result<f64> {
    f.vertical().value(q)
}

/// Both sides of [X_i, Y_j] f = -4 delta_ij T f at q, evaluated by nesting
/// the exact symbolic derivatives (lhs) and from the structure relation
/// (rhs). Indices are 1-based.
pub fn commutator_check(
    i: usize,
    j: usize,
    f: &AnalyticField,
    q: &GroupPoint,
) -> Result<(f64, f64)> {
    let n = f.n();
    let i0 = check_index(i, n)?;
    let j0 = check_index(j, n)?;
    let xy = f.horizontal_y(j0).horizontal_x(i0).value(q)?;
    let yx = f.horizontal_x(i0).horizontal_y(j0).value(q)?;
    let lhs = xy - yx;
    let rhs = if i0 == j0 { -4.0 * apply_t(f, q)? } else { 0.0 };
    Ok((lhs, rhs))
}

/// [X_i, X_j] f (1-based); should vanish identically.
pub fn commutator_xx(i: usize, j: usize, f: &AnalyticField, q: &GroupPoint) -> Result<f64> {
    let n = f.n();
    let i0 = check_index(i, n)?;
    let j0 = check_index(j, n)?;
    Ok(f.horizontal_x(j0).horizontal_x(i0).value(q)?
        - f.horizontal_x(i0).horizontal_x(j0).value(q)?)
}

/// [Y_i, Y_j] f (1-based); should vanish identically.
pub fn commutator_yy(i: usize, j: usize, f: &AnalyticField, q: &GroupPoint) -> Result<f64> {
    let n = f.n();
    let i0 = check_index(i, n)?;
    let j0 = check_index(j, n)?;
    Ok(f.horizontal_y(j0).horizontal_y(i0).value(q)?
        - f.horizontal_y(i0).horizontal_y(j0).value(q)?)
}

/// [X_i, T] f (1-based); should vanish identically.
pub fn commutator_xt(i: usize, f: &AnalyticField, q: &GroupPoint) -> Result<f64> {
    let i0 = check_index(i, f.n())?;
    Ok(f.vertical().horizontal_x(i0).value(q)? - f.horizontal_x(i0).vertical().value(q)?)
}

/// [Y_i, T] f (1-based); should vanish identically.
pub fn commutator_yt(i: usize, f: &AnalyticField, q: &GroupPoint) -> Result<f64> {
    let i0 = check_index(i, f.n())?;
    Ok(f.vertical().horizontal_y(i0).value(q)? - f.horizontal_y(i0).vertical().value(q)?)
}
