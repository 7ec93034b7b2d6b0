//! Centralized numerical tolerances.
//!
//! Every threshold used by the solvers and checkers is defined here with its
//! rationale; the modules never introduce ad-hoc magic numbers. All
//! tolerances scale together through [`Tols::scaled`], which is what the
//! CLI's `--tol-scale` flag feeds.

/// Feasibility and optimality tolerance for the LP kernel.
///
/// The simplex works on desk-scale data (dimension <= ~30 after slack and
/// sign-splitting), where accumulated pivot rounding stays far below 1e-12
/// for well-scaled inputs. 1e-9 leaves three orders of headroom.
pub const LP_FEAS: f64 = 1e-9;

/// Membership tolerance for polyhedral cones (Euclidean distance).
///
/// Cone membership is decided by a nonnegative least-squares distance; the
/// active-set solve is accurate to ~1e-12, and downstream consumers quantify
/// "on the cone" as distance <= 1e-8.
pub const CONE_MEMBERSHIP: f64 = 1e-8;

/// Residual bound for reported equalities (duality gaps, certificate
/// identities such as the zero-sum and unit-norm conditions).
///
/// These are composites of several solves, so the bound is looser than the
/// per-solve tolerance: 1e-7.
pub const RESIDUAL: f64 = 1e-7;

/// Margin used to assert strict inequalities.
///
/// A strict bound `a < b` is accepted as `a <= b - STRICT_MARGIN`; ties
/// within the margin are reported, not silently passed.
pub const STRICT_MARGIN: f64 = 1e-9;

/// Activity tolerance for polyhedral constraints.
///
/// A row `<a, x> <= b` counts as active when `<a, x> >= b - ACTIVE`. Set
/// geometry at desk scale is exact to ~1e-12, so 1e-8 is conservative.
pub const ACTIVE: f64 = 1e-8;

/// Pivot threshold for the dense simplex and Gaussian elimination.
///
/// Entries below this magnitude are treated as zero when selecting pivots.
pub const PIVOT: f64 = 1e-11;

/// Quotient bound for sampled Frechet-normal checks.
///
/// For a candidate normal `g` at `x` the sampled check requires
/// `<g, x' - x> / |x' - x| <= QUOTIENT` for set points `x'` near `x`;
/// on polyhedral data the exact value is 0, and 0.01 absorbs the sampling
/// radius.
pub const QUOTIENT: f64 = 1e-2;

/// Iteration cap for descent loops and active-set methods.
pub const ITER_CAP: usize = 10_000;

/// Bundle of the scalable tolerances, threaded through the pipelines.
#[derive(Clone, Copy, Debug)]
pub struct Tols {
    /// LP feasibility/optimality ([`LP_FEAS`] scaled).
    pub lp: f64,
    /// Cone membership ([`CONE_MEMBERSHIP`] scaled).
    pub cone: f64,
    /// Reported residual bound ([`RESIDUAL`] scaled).
    pub residual: f64,
    /// Strict-inequality margin ([`STRICT_MARGIN`] scaled).
    pub margin: f64,
    /// Constraint activity ([`ACTIVE`] scaled).
    pub active: f64,
}

impl Default for Tols {
    fn default() -> Self {
        Self::scaled(1.0)
    }
}

impl Tols {
    /// All tolerances multiplied by `scale` (>= 1 loosens, <= 1 tightens).
    pub fn scaled(scale: f64) -> Self {
        Tols {
            lp: LP_FEAS * scale,
            cone: CONE_MEMBERSHIP * scale,
            residual: RESIDUAL * scale,
            margin: STRICT_MARGIN * scale,
            active: ACTIVE * scale,
        }
    }
}
