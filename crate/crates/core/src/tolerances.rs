//! Every tolerance used by the verification suites, in one place.
//!
//! Two families:
//! * algebraic identities evaluated with exact derivatives — machine
//!   precision, relative;
//! * discrete inequalities on grids — absolute, after normalizing the
//!   fields to unit sup-norm, so O(h) discretization effects never get
//!   mistaken for sign violations.

/// Pointwise algebraic identities with exact gradients (relative).
pub const ALGEBRAIC_IDENTITY_REL: f64 = 1e-12;

/// Floor for pointwise inequalities on grids after unit sup-norm
/// normalization (absolute).
pub const POINTWISE_INEQ_FLOOR: f64 = -1e-10;

/// Floor for the Young-step margin, a pure algebraic inequality.
pub const YOUNG_MARGIN_FLOOR: f64 = -1e-12;

/// Admissibility margin floor for the weight condition on g.
pub const G_ADMISSIBLE_FLOOR: f64 = -1e-12;

/// Summation-by-parts (adjointness) residual, relative.
pub const ADJOINT_REL: f64 = 1e-13;

/// Commutator and left-invariance identities of the group layer (absolute).
pub const GROUP_IDENTITY_ABS: f64 = 1e-12;

/// Equality-case residuals: u = c v must give both max L and
/// max |grad(u/v)| below this.
pub const EQUALITY_CASE_ABS: f64 = 1e-10;

/// Sharpness: a 1%-perturbed u must push max L above this.
pub const SHARPNESS_MIN_L: f64 = 1e-6;

/// Floor for integral gaps (Picone inequality, Diaz-Saa).
pub const GAP_FLOOR: f64 = -1e-10;

/// The gap with u = v and the power weight collapses to the
/// summation-by-parts residue (absolute).
pub const GAP_EQUALITY_ABS: f64 = 1e-12;

/// Tolerance on the supersolution precondition -Delta_p v >= 0.
pub const SUPERSOLUTION_FLOOR: f64 = -1e-8;

/// Relative stability required of the v + 1/k lifting under k -> 2k.
pub const SHIFT_STABILITY_REL: f64 = 0.01;

/// Uniqueness experiment: max pairwise relative sup-distance.
pub const UNIQUENESS_DIST_P2: f64 = 1e-6;
pub const UNIQUENESS_DIST_OTHER: f64 = 1e-5;

/// Energy minimizer vs direct linear solve (p = 2), relative sup-norm.
pub const LINEAR_ORACLE_REL: f64 = 1e-8;

/// Single-interior-node solve vs scalar bisection (absolute).
pub const BISECTION_ABS: f64 = 1e-10;

/// Rayleigh minimum vs dense symmetric eigensolver (p = 2), relative.
pub const EIGEN_ORACLE_REL: f64 = 0.02;

/// Shift identity lambda1(a + c) = lambda1(a) - c (absolute).
pub const EIGEN_SHIFT_ABS: f64 = 1e-8;

/// Assembled first variation vs central differences of the energy.
pub const GRADIENT_CONSISTENCY_REL: f64 = 1e-4;
/// Same check when the energy is exactly quadratic (p = 2, f linear).
pub const GRADIENT_CONSISTENCY_QUADRATIC_REL: f64 = 1e-8;

/// Gradient consistency order: error ratio under h -> h/2 must land here.
pub const CONSISTENCY_RATIO_LO: f64 = 3.5;
pub const CONSISTENCY_RATIO_HI: f64 = 4.5;

/// Swap symmetry of the Diaz-Saa integral (relative).
pub const SWAP_SYMMETRY_REL: f64 = 1e-13;
