//! Closed-form scalar fields on R^{2n+1} with exact symbolic derivatives.
//!
//! The vocabulary is deliberately small — polynomials in the coordinates,
//! `exp`, and composition with scalar powers — but it is closed under
//! differentiation, which is all the oracle work needs. No finite
//! differences anywhere in this module.

use crate::error::{Error, Result};
use crate::hgroup::GroupPoint;
use rand::Rng;

/// A coordinate of H^n in the order (x_1..x_n, y_1..y_n, t).
/// Indices are 0-based here; the public vector-field API is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    X(usize),
    Y(usize),
    T,
}

#[derive(Debug, Clone)]
pub enum Expr {
    Const(f64),
    Coord(Coord),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    /// Integer power of a subexpression.
    Powi(Box<Expr>, i32),
    /// Scalar power; evaluation requires a positive base.
    Powf(Box<Expr>, f64),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn x(i: usize) -> Expr {
        Expr::Coord(Coord::X(i))
    }

    pub fn y(i: usize) -> Expr {
        Expr::Coord(Coord::Y(i))
    }

    pub fn t() -> Expr {
        Expr::Coord(Coord::T)
    }

    /// Sum with constant folding; an empty list is 0.
    pub fn sum(terms: Vec<Expr>) -> Expr {
        let mut flat = Vec::new();
        let mut acc = 0.0;
        for term in terms {
            match term {
                Expr::Const(v) => acc += v,
                Expr::Add(inner) => {
                    for e in inner {
                        match e {
                            Expr::Const(v) => acc += v,
                            other => flat.push(other),
                        }
                    }
                }
                other => flat.push(other),
            }
        }
        if acc != 0.0 || flat.is_empty() {
            flat.push(Expr::Const(acc));
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Expr::Add(flat)
        }
    }

    /// Product with constant folding; any exact zero collapses the product.
    pub fn product(factors: Vec<Expr>) -> Expr {
        let mut flat = Vec::new();
        let mut acc = 1.0;
        for factor in factors {
            match factor {
                Expr::Const(v) => acc *= v,
                Expr::Mul(inner) => {
                    for e in inner {
                        match e {
                            Expr::Const(v) => acc *= v,
                            other => flat.push(other),
                        }
                    }
                }
                other => flat.push(other),
            }
        }
        if acc == 0.0 {
            return Expr::Const(0.0);
        }
        if acc != 1.0 || flat.is_empty() {
            flat.insert(0, Expr::Const(acc));
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Expr::Mul(flat)
        }
    }

    pub fn neg(self) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(-v),
            Expr::Neg(e) => *e,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn powi(self, k: i32) -> Expr {
        match k {
            0 => Expr::Const(1.0),
            1 => self,
            _ => Expr::Powi(Box::new(self), k),
        }
    }

    pub fn powf(self, a: f64) -> Expr {
        Expr::Powf(Box::new(self), a)
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn scale(self, c: f64) -> Expr {
        Expr::product(vec![Expr::Const(c), self])
    }

    fn eval(&self, coords: &dyn Fn(Coord) -> f64) -> f64 {
        match self {
            Expr::Const(v) => *v,
            Expr::Coord(c) => coords(*c),
            Expr::Add(es) => es.iter().map(|e| e.eval(coords)).sum(),
            Expr::Mul(es) => es.iter().map(|e| e.eval(coords)).product(),
            Expr::Neg(e) => -e.eval(coords),
            Expr::Powi(e, k) => e.eval(coords).powi(*k),
            Expr::Powf(e, a) => e.eval(coords).powf(*a),
            Expr::Exp(e) => e.eval(coords).exp(),
        }
    }

    /// Exact partial derivative with respect to one coordinate.
    pub fn diff(&self, c: Coord) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Coord(d) => Expr::Const(if *d == c { 1.0 } else { 0.0 }),
            Expr::Add(es) => Expr::sum(es.iter().map(|e| e.diff(c)).collect()),
            Expr::Mul(es) => {
                // n-ary product rule
                let mut terms = Vec::with_capacity(es.len());
                for k in 0..es.len() {
                    let mut factors = Vec::with_capacity(es.len());
                    for (j, e) in es.iter().enumerate() {
                        factors.push(if j == k { e.diff(c) } else { e.clone() });
                    }
                    terms.push(Expr::product(factors));
                }
                Expr::sum(terms)
            }
            Expr::Neg(e) => e.diff(c).neg(),
            Expr::Powi(e, k) => Expr::product(vec![
                Expr::Const(f64::from(*k)),
                e.as_ref().clone().powi(k - 1),
                e.diff(c),
            ]),
            Expr::Powf(e, a) => Expr::product(vec![
                Expr::Const(*a),
                e.as_ref().clone().powf(a - 1.0),
                e.diff(c),
            ]),
            Expr::Exp(e) => Expr::product(vec![self.clone(), e.diff(c)]),
        }
    }

    /// Replace every coordinate by another expression.
    pub fn substitute(&self, map: &dyn Fn(Coord) -> Expr) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(*v),
            Expr::Coord(c) => map(*c),
            Expr::Add(es) => Expr::sum(es.iter().map(|e| e.substitute(map)).collect()),
            Expr::Mul(es) => Expr::product(es.iter().map(|e| e.substitute(map)).collect()),
            Expr::Neg(e) => e.substitute(map).neg(),
            Expr::Powi(e, k) => e.substitute(map).powi(*k),
            Expr::Powf(e, a) => e.substitute(map).powf(*a),
            Expr::Exp(e) => e.substitute(map).exp(),
        }
    }
}

/// A closed-form function on H^n together with its exact derivatives.
#[derive(Debug, Clone)]
pub struct AnalyticField {
    n: usize,
    expr: Expr,
}

impl AnalyticField {
    pub fn new(n: usize, expr: Expr) -> Self {
        assert!(n >= 1, "n must be at least 1");
        AnalyticField { n, expr }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn constant(n: usize, v: f64) -> Self {
        Self::new(n, Expr::Const(v))
    }

    pub fn value(&self, q: &GroupPoint) -> Result<f64> {
        if q.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: q.n(),
            });
        }
        Ok(self.value_at_coords(&|c| match c {
            Coord::X(i) => q.x()[i],
            Coord::Y(i) => q.y()[i],
            Coord::T => q.t(),
        }))
    }

    /// Evaluate with coordinates supplied directly (used for grid sampling,
    /// where points come as flat (x.., y.., t) slices).
    pub fn value_at(&self, coords: &[f64]) -> f64 {
        let n = self.n;
        debug_assert_eq!(coords.len(), 2 * n + 1);
        self.value_at_coords(&|c| match c {
            Coord::X(i) => coords[i],
            Coord::Y(i) => coords[n + i],
            Coord::T => coords[2 * n],
        })
    }

    fn value_at_coords(&self, coords: &dyn Fn(Coord) -> f64) -> f64 {
        self.expr.eval(coords)
    }

    pub fn diff(&self, c: Coord) -> AnalyticField {
        AnalyticField {
            n: self.n,
            expr: self.expr.diff(c),
        }
    }

    /// The field X_i f = df/dx_i + 2 y_i df/dt as a new closed form
    /// (0-based i).
    pub fn horizontal_x(&self, i: usize) -> AnalyticField {
        let dt = self.expr.diff(Coord::T);
        let expr = Expr::sum(vec![
            self.expr.diff(Coord::X(i)),
            Expr::product(vec![Expr::Const(2.0), Expr::y(i), dt]),
        ]);
        AnalyticField { n: self.n, expr }
    }

    /// The field Y_i f = df/dy_i - 2 x_i df/dt (0-based i).
    pub fn horizontal_y(&self, i: usize) -> AnalyticField {
        let dt = self.expr.diff(Coord::T);
        let expr = Expr::sum(vec![
            self.expr.diff(Coord::Y(i)),
            Expr::product(vec![Expr::Const(-2.0), Expr::x(i), dt]),
        ]);
        AnalyticField { n: self.n, expr }
    }

    /// The field T f = df/dt.
    pub fn vertical(&self) -> AnalyticField {
        self.diff(Coord::T)
    }

    /// f composed with the left translation L_a(q) = a . q.
    pub fn left_translate(&self, a: &GroupPoint) -> Result<AnalyticField> {
        if a.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: a.n(),
            });
        }
        let n = self.n;
        let ax = a.x().to_vec();
        let ay = a.y().to_vec();
        let at = a.t();
        let expr = self.expr.substitute(&|c| match c {
            Coord::X(i) => Expr::sum(vec![Expr::x(i), Expr::Const(ax[i])]),
            Coord::Y(i) => Expr::sum(vec![Expr::y(i), Expr::Const(ay[i])]),
            Coord::T => {
                // t-component of a . q: a_t + t + 2(<a_y, x> - <a_x, y>)
                let mut terms = vec![Expr::t(), Expr::Const(at)];
                for i in 0..n {
                    terms.push(Expr::x(i).scale(2.0 * ay[i]));
                    terms.push(Expr::y(i).scale(-2.0 * ax[i]));
                }
                Expr::sum(terms)
            }
        });
        Ok(AnalyticField { n, expr })
    }
}

/// Random polynomial of total degree <= 2 with coefficients in
/// [-scale, scale]; smooth test input for consistency checks.
pub fn random_polynomial<R: Rng>(rng: &mut R, n: usize, scale: f64) -> AnalyticField {
    let dim = 2 * n + 1;
    let coord = |a: usize| -> Expr {
        if a < n {
            Expr::x(a)
        } else if a < 2 * n {
            Expr::y(a - n)
        } else {
            Expr::t()
        }
    };
    let mut terms = vec![Expr::Const(rng.random_range(-scale..scale))];
    for a in 0..dim {
        terms.push(coord(a).scale(rng.random_range(-scale..scale)));
    }
    for a in 0..dim {
        for b in a..dim {
            terms.push(Expr::product(vec![
                Expr::Const(rng.random_range(-scale..scale)),
                coord(a),
                coord(b),
            ]));
        }
    }
    AnalyticField::new(n, Expr::sum(terms))
}

/// Product of 4 s (1 - s) over the normalized coordinates of a box:
/// vanishes exactly on the boundary, smooth inside, peak value 1. Useful
/// for building Dirichlet-compatible smooth samples.
pub fn boundary_bump(n: usize, lower: &[f64], upper: &[f64]) -> AnalyticField {
    let dim = 2 * n + 1;
    assert_eq!(lower.len(), dim);
    assert_eq!(upper.len(), dim);
    let coord = |a: usize| -> Expr {
        if a < n {
            Expr::x(a)
        } else if a < 2 * n {
            Expr::y(a - n)
        } else {
            Expr::t()
        }
    };
    let mut factors = Vec::with_capacity(dim);
    for a in 0..dim {
        let width = upper[a] - lower[a];
        factors.push(Expr::product(vec![
            Expr::Const(4.0 / (width * width)),
            Expr::sum(vec![coord(a), Expr::Const(-lower[a])]),
            Expr::sum(vec![Expr::Const(upper[a]), coord(a).neg()]),
        ]));
    }
    AnalyticField::new(n, Expr::product(factors))
}

/// Random field bounded below by `floor` on any box with coordinates in
/// [-box_bound, box_bound]: a positive base plus a polynomial whose
/// coefficient budget keeps its sup-norm under base - floor.
pub fn random_positive<R: Rng>(
    rng: &mut R,
    n: usize,
    base: f64,
    floor: f64,
    box_bound: f64,
) -> AnalyticField {
    assert!(base > floor && floor > 0.0);
    let dim = 2 * n + 1;
    let mon_bound = box_bound.max(box_bound * box_bound).max(1.0);
    let n_terms = (dim + dim * (dim + 1) / 2) as f64;
    let budget = (base - floor) / (n_terms * mon_bound);
    let poly = random_polynomial(rng, n, budget);
    AnalyticField::new(n, Expr::sum(vec![Expr::Const(base), poly.expr]))
}
