//! Stationarity, extremality, and transversality checkers for collections
//! of closed sets sharing a reference point.
//!
//! Given closed sets `Ω_1, …, Ω_n` in `R^d` with a common point `x̄`, this
//! module answers three kinds of questions:
//!
//! * **Primal checkers.** Can the collection be pushed apart near `x̄` by
//!   small translations? [`check_extremal`] searches for shift tuples `â`
//!   with `⦀â⦀ < ε` that empty `⋂(Ω_i − a_i)` inside a ball around `x̄`;
//!   [`check_stationary`] requires the shifts to shrink with the ball
//!   (`⦀â⦀ < ε·ρ`); [`check_alpha_stationary`] fixes the rate `⦀â⦀ < α·ρ`
//!   and also moves the anchor points `x_i ∈ Ω_i` near `x̄`. Positive
//!   answers are [`StationarityWitness`]es whose emptiness claim is
//!   re-verified by an independent feasibility solve; negative answers are
//!   search reports qualified by the budget spent.
//! * **Dual bridges.** [`dual_stationarity_certificate`] turns an
//!   approximate-stationarity witness into a unit dual tuple
//!   `x̂* ∈ N_Ω̂(x̂)` with small sum `‖Σ x_i*‖ < β`, by running the
//!   localized separation pipeline at a carefully chosen scale and
//!   projecting its output onto the true normal cones.
//!   [`dual_to_primal`] walks the other way: from a unit normal tuple with
//!   `‖Σ x_i*‖ < β < α` it constructs translations at rate `α` that
//!   verifiably empty the intersection.
//! * **Transversality.** [`transversality_constant`] computes
//!   `α̂ = min ‖Σ x_i*‖` over unit dual tuples attached to set faces near
//!   `x̄` by exact polyhedral enumeration, and [`check_alpha_transversal`]
//!   scans adversarially for a stationarity witness at rate `α` (whose
//!   existence refutes transversality at that rate).
//!
//! Two suites tie the notions together on concrete instances:
//! [`convex_equivalence_suite`] cross-checks the four equivalent
//! formulations available for convex sets, and [`extended_ep_suite`]
//! cross-checks approximate stationarity against the full and simplified
//! dual conditions.
//!
//! Balls are closed throughout and strict inequalities are enforced with an
//! explicit margin; emptiness against a closed ball implies emptiness
//! against the open one, so witnesses remain sound for either convention.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::norms::{
    estimate_kappa, eval_norm, phi_eval, prod_dual_attainer, prod_dual_spec, prod_eval,
    prod_lp_representable, prod_norm_le, norm_le, validate_product, Compatibility, NormError,
    NormSpec, ProductKind, ProductNormSpec,
};
use crate::polysolve::{
    cone_distance, cone_distance_euclid, polyhedron_feasible, Cone, Feasibility, Lin, LpBuilder,
    LpOutcome, PolyError,
};
use crate::sample::Sampler;
use crate::separation::{
    atomic_members, branch_assignments, piece_rows, separate_shifted_with, CheckItem, SepError,
    SepOptions,
};
use crate::sets::{normal_cone, project, Flavor, SetError, SetExpr};
use crate::tol::Tols;
use crate::vector::Vector;

/// Errors from the stationarity and transversality checkers.
#[derive(Debug, thiserror::Error)]
pub enum VarError {
    /// Malformed input (dimensions, parameter ranges, inconsistent data).
    #[error("invalid input: {0}")]
    Invalid(String),
    /// The reference point does not belong to the indicated set.
    #[error("the reference point is outside set {0}")]
    NotInIntersection(usize),
    /// The requested computation needs structure the inputs lack.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A required compatibility constant has no exact closed form, so the
    /// computation that must not rely on sampled bounds refuses to run.
    #[error("compatibility constant not certified: {0}")]
    Uncertified(String),
    /// The parameters leave no room for the internal scale choice.
    #[error("no admissible scale: {0}")]
    NoMargin(String),
    /// No witness was found within the search budget.
    #[error("no witness found: {0}")]
    NoWitness(String),
    /// A produced object failed its independent re-verification.
    #[error("verification failed: {0}")]
    Verification(String),
    /// Failure inside the separation pipeline.
    #[error(transparent)]
    Sep(#[from] SepError),
    /// Failure in norm evaluation or encoding.
    #[error("norm error: {0}")]
    Norm(#[from] NormError),
    /// Failure in set geometry.
    #[error("set error: {0}")]
    Set(#[from] SetError),
    /// Failure in the linear solver.
    #[error("solver error: {0}")]
    Poly(#[from] PolyError),
}

/// Knobs shared by every checker in this module.
#[derive(Clone, Debug)]
pub struct VarOptions {
    /// Seed for the random direction tuples (results are deterministic for
    /// a fixed seed).
    pub seed: u64,
    /// Number of random shift directions appended to the deterministic
    /// schedule (coordinate rays, opposite pairs, normal generators).
    pub budget: usize,
    /// Numerical tolerances.
    pub tols: Tols,
}

impl Default for VarOptions {
    fn default() -> Self {
        VarOptions { seed: 17, budget: 256, tols: Tols::default() }
    }
}

/// Scales probed by the schedule-driven checkers, descending.
pub const SCALE_SCHEDULE: [f64; 4] = [1.0, 0.1, 0.01, 1e-3];

/// Fractions of the allowed shift size tried per direction, descending.
const SHIFT_SCALES: [f64; 3] = [0.999_999, 0.5, 0.1];

/// Cap on emptiness solves per top-level checker call.
const MAX_EMPTINESS_LPS: usize = 50_000;

/// Cap on normal-generator product tuples in the direction schedule.
const MAX_GEN_TUPLES: usize = 64;

/// Cap on enumerated face tuples and on unit-sphere facets.
const MAX_ENUM: usize = 4096;

/// Per-set cap on constraint rows in the face-enumeration path.
const MAX_FACE_ROWS: usize = 10;

/// Halvings tried when hunting for an admissible localization radius.
const MAX_RADIUS_HALVINGS: usize = 20;

/// Relative slack enforcing strict inequalities whose bounds scale with the
/// instance (an absolute margin would dominate tiny bounds).
const STRICT_REL: f64 = 1e-7;

// ---------------------------------------------------------------------------
// Witnesses.
// ---------------------------------------------------------------------------

/// A verified perturbation that empties the intersection: points
/// `x_i ∈ Ω_i` and shifts `a_i` such that `⋂_i (Ω_i − x_i − a_i)` misses
/// the closed ball of radius `rho` around the origin, with `⦀â⦀` strictly
/// below `shift_bound`.
///
/// The checkers that keep the anchor points at the reference point store
/// `points = (x̄, …, x̄)` and `closeness = 0`; then the emptiness condition
/// reads `⋂_i (Ω_i − a_i) ∩ B̄_ρ(x̄) = ∅`.
#[derive(Clone, Debug)]
pub struct StationarityWitness {
    /// Ball radius in the emptiness condition; `+∞` drops the ball.
    pub rho: f64,
    /// Anchor points, one per set, members of their sets.
    pub points: Vec<Vector>,
    /// Shifts, one per set.
    pub shifts: Vec<Vector>,
    /// `⦀(x_1 − x̄, …, x_n − x̄)⦀`.
    pub closeness: f64,
    /// `⦀(a_1, …, a_n)⦀`.
    pub shift_size: f64,
    /// Strict upper bound obeyed by `shift_size` (`ε`, `ε·ρ`, or `α·ρ`
    /// depending on the checker).
    pub shift_bound: f64,
    /// Scale parameter of the property this witness certifies.
    pub eps: f64,
}

/// Re-verifies a witness from scratch: membership of the anchor points,
/// the recorded norms, the strict shift bound, and — independently of how
/// the witness was found — emptiness of the shifted intersection by a
/// feasibility solve.
pub fn verify_stationarity_witness(
    sets: &[SetExpr],
    x_bar: &Vector,
    norm: &ProductNormSpec,
    w: &StationarityWitness,
    tols: &Tols,
) -> Result<(), VarError> {
    let n = sets.len();
    let d = x_bar.dim();
    if w.points.len() != n || w.shifts.len() != n {
        return Err(VarError::Verification("witness block count mismatch".into()));
    }
    for b in w.points.iter().chain(&w.shifts) {
        if b.dim() != d {
            return Err(VarError::Verification("witness block dimension mismatch".into()));
        }
    }
    if w.rho.is_nan() || w.rho <= 0.0 {
        return Err(VarError::Verification(format!("ball radius must be positive, got {}", w.rho)));
    }
    for (i, (s, p)) in sets.iter().zip(&w.points).enumerate() {
        let (_, dist) = project(s, p, &norm.base)?;
        if dist > tols.cone {
            return Err(VarError::Verification(format!(
                "anchor point {i} lies {dist} outside its set"
            )));
        }
    }
    let moved: Vec<Vector> = w.points.iter().map(|p| p.sub(x_bar)).collect();
    let closeness = prod_eval(norm, &moved)?;
    if (closeness - w.closeness).abs() > tols.residual {
        return Err(VarError::Verification(format!(
            "recorded closeness {} but recomputed {closeness}",
            w.closeness
        )));
    }
    // Bounds scale with the instance, so strictness is enforced with slack
    // relative to the bound rather than the absolute margin.
    if closeness.is_finite() && w.eps.is_finite() && closeness > w.eps * (1.0 - STRICT_REL) {
        return Err(VarError::Verification(format!(
            "anchor points sit {closeness} from the reference, not strictly below {}",
            w.eps
        )));
    }
    let size = prod_eval(norm, &w.shifts)?;
    if (size - w.shift_size).abs() > tols.residual {
        return Err(VarError::Verification(format!(
            "recorded shift size {} but recomputed {size}",
            w.shift_size
        )));
    }
    if !size.is_finite() || size >= w.shift_bound * (1.0 - STRICT_REL) {
        return Err(VarError::Verification(format!(
            "shift size {size} does not stay strictly below {}",
            w.shift_bound
        )));
    }
    let offsets: Vec<Vector> = w.points.iter().zip(&w.shifts).map(|(p, a)| p.add(a)).collect();
    match shifted_intersection_point(sets, &offsets, w.rho, &norm.base)? {
        None => Ok(()),
        Some(p) => Err(VarError::Verification(format!(
            "shifted intersection still contains ({:?})",
            p.as_slice()
        ))),
    }
}

/// Result of a schedule-driven witness search.
#[derive(Clone, Debug)]
pub struct ScheduleReport {
    /// Scales probed, descending.
    pub schedule: Vec<f64>,
    /// Verified witness per scale (aligned with `schedule`), when found.
    pub witnesses: Vec<Option<StationarityWitness>>,
    /// Every probed scale produced a witness.
    pub all_hold: bool,
    /// Emptiness solves spent.
    pub lp_calls: usize,
    /// The solve cap was hit before some scan finished; absent witnesses
    /// are then budget-qualified, not conclusive.
    pub exhausted: bool,
    pub notes: Vec<String>,
}

// ---------------------------------------------------------------------------
// Shared search machinery.
// ---------------------------------------------------------------------------

/// Finds a point of `⋂_i (Ω_i − off_i) ∩ B̄_ρ(0)` or proves emptiness,
/// branching over union pieces. `rho = +∞` drops the ball rows. Returns a
/// common point when one exists, `None` when the intersection is empty.
fn shifted_intersection_point(
    sets: &[SetExpr],
    offsets: &[Vector],
    rho: f64,
    ball_base: &NormSpec,
) -> Result<Option<Vector>, VarError> {
    let d = offsets.first().map(Vector::dim).unwrap_or(0);
    let mut ball_rows: Vec<Vector> = Vec::new();
    let mut ball_bounds: Vec<f64> = Vec::new();
    if rho.is_finite() {
        let ball = SetExpr::Ball {
            center: Vector::zeros(d),
            radius: rho,
            norm: ball_base.clone(),
            closed: true,
        };
        let (r, b) = piece_rows(&ball, sets.len())?;
        ball_rows = r;
        ball_bounds = b;
    }
    let mut atoms: Vec<Vec<SetExpr>> = Vec::with_capacity(sets.len());
    for s in sets {
        atoms.push(atomic_members(s)?);
    }
    for assignment in branch_assignments(&atoms)? {
        let mut rows = ball_rows.clone();
        let mut bounds = ball_bounds.clone();
        for (i, &j) in assignment.iter().enumerate() {
            let (r, b) = piece_rows(&atoms[i][j], i)?;
            for (a, bb) in r.into_iter().zip(b) {
                let shifted = bb - a.dot(&offsets[i]);
                rows.push(a);
                bounds.push(shifted);
            }
        }
        if rows.is_empty() {
            return Ok(Some(Vector::zeros(d)));
        }
        if let Feasibility::Feasible(p) = polyhedron_feasible(&rows, &bounds)? {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// Candidate shift directions, deterministic schedule first: products of
/// outward normal generators at the reference point (pushing each set along
/// its own outward normal pulls the collection apart fastest on polyhedral
/// data), single-set coordinate rays, opposite coordinate pairs, then
/// `n_random` seeded random tuples. Only directions matter; callers rescale.
fn shift_directions(
    sets: &[SetExpr],
    x_bar: &Vector,
    n_random: usize,
    seed: u64,
    tols: &Tols,
) -> Result<Vec<Vec<Vector>>, VarError> {
    let n = sets.len();
    let d = x_bar.dim();
    let mut dirs: Vec<Vec<Vector>> = Vec::new();

    let mut gens: Vec<Vec<Vector>> = Vec::with_capacity(n);
    for s in sets {
        let c = normal_cone(s, x_bar, Flavor::Frechet, tols.active)?;
        let g = c.cone.generators().to_vec();
        gens.push(if g.is_empty() { vec![Vector::zeros(d)] } else { g });
    }
    let mut counters = vec![0usize; n];
    let mut produced = 0usize;
    'outer: while produced < MAX_GEN_TUPLES {
        let tuple: Vec<Vector> = (0..n).map(|i| gens[i][counters[i]].clone()).collect();
        if tuple.iter().any(|t| t.norm_inf() > 0.0) {
            dirs.push(tuple);
        }
        produced += 1;
        let mut k = 0;
        loop {
            counters[k] += 1;
            if counters[k] < gens[k].len() {
                break;
            }
            counters[k] = 0;
            k += 1;
            if k == n {
                break 'outer;
            }
        }
    }

    for i in 0..n {
        for j in 0..d {
            for sgn in [1.0, -1.0] {
                let mut t = vec![Vector::zeros(d); n];
                t[i] = Vector::basis(d, j).scale(sgn);
                dirs.push(t);
            }
        }
    }
    for i in 0..n {
        for k in (i + 1)..n {
            for j in 0..d {
                for sgn in [1.0, -1.0] {
                    let mut t = vec![Vector::zeros(d); n];
                    t[i] = Vector::basis(d, j).scale(sgn);
                    t[k] = Vector::basis(d, j).scale(-sgn);
                    dirs.push(t);
                }
            }
        }
    }

    let mut smp = Sampler::new(seed).fork(0x7368_6966_7464_6972);
    for _ in 0..n_random {
        let tuple: Vec<Vector> = (0..n).map(|_| smp.direction(d)).collect();
        dirs.push(tuple);
    }
    Ok(dirs)
}

/// Twelve logarithmically spaced radii in `(0, eps)`, descending from
/// `0.9·eps` down to `10^-3·eps`.
fn rho_grid(eps: f64) -> Vec<f64> {
    let hi = 0.9 * eps;
    let lo = 1e-3 * eps;
    let ratio = libm::pow(lo / hi, 1.0 / 11.0);
    let mut out = Vec::with_capacity(12);
    let mut r = hi;
    for _ in 0..12 {
        out.push(r);
        r *= ratio;
    }
    out
}

/// Anchor-point tuples for the checkers that move the points: the reference
/// tuple first, then `k` tuples of per-set projections of seeded nearby
/// samples, keeping only tuples strictly within `eps` of the reference.
fn point_candidates(
    sets: &[SetExpr],
    x_bar: &Vector,
    norm: &ProductNormSpec,
    eps: f64,
    k: usize,
    seed: u64,
) -> Result<Vec<(Vec<Vector>, f64)>, VarError> {
    let n = sets.len();
    let d = x_bar.dim();
    let mut out = vec![(vec![x_bar.clone(); n], 0.0)];
    if k == 0 || !eps.is_finite() {
        return Ok(out);
    }
    let ones = vec![1.0; n];
    let unit_scale = phi_eval(&norm.kind, &ones)?.max(1.0);
    let radius = 0.25 * eps / unit_scale;
    let mut smp = Sampler::new(seed).fork(0x616e_6368_6f72_7074);
    for _ in 0..k {
        let mut pts = Vec::with_capacity(n);
        for s in sets {
            let target = x_bar.add(&smp.direction(d).scale(radius));
            let (p, _) = project(s, &target, &norm.base)?;
            pts.push(p);
        }
        let moved: Vec<Vector> = pts.iter().map(|p| p.sub(x_bar)).collect();
        let closeness = prod_eval(norm, &moved)?;
        if closeness < eps * (1.0 - 1e-6) {
            out.push((pts, closeness));
        }
    }
    Ok(out)
}

/// Scans (radius × anchor tuple × direction × scale) for a perturbation
/// whose shifted intersection is empty; the first hit is verified and
/// returned. `bound_of_rho` maps a radius to the strict shift bound in
/// force there. Returns the witness, whether the solve cap was hit, and
/// the number of solves spent.
#[allow(clippy::too_many_arguments)]
fn scan_for_witness(
    sets: &[SetExpr],
    x_bar: &Vector,
    norm: &ProductNormSpec,
    candidates: &[(Vec<Vector>, f64)],
    dirs: &[Vec<Vector>],
    rhos: &[f64],
    bound_of_rho: &dyn Fn(f64) -> f64,
    eps: f64,
    remaining: &mut isize,
    lp_calls: &mut usize,
    tols: &Tols,
) -> Result<(Option<StationarityWitness>, bool), VarError> {
    for &rho in rhos {
        let bound = bound_of_rho(rho);
        if !bound.is_finite() || bound <= 0.0 {
            continue;
        }
        for (pts, closeness) in candidates {
            for dir in dirs {
                let nu = prod_eval(norm, dir)?;
                if nu <= 1e-12 {
                    continue;
                }
                for s in SHIFT_SCALES {
                    if *remaining <= 0 {
                        return Ok((None, true));
                    }
                    *remaining -= 1;
                    *lp_calls += 1;
                    let factor = s * bound / nu;
                    let shifts: Vec<Vector> = dir.iter().map(|g| g.scale(factor)).collect();
                    let offsets: Vec<Vector> =
                        pts.iter().zip(&shifts).map(|(p, a)| p.add(a)).collect();
                    if shifted_intersection_point(sets, &offsets, rho, &norm.base)?.is_none() {
                        let size = prod_eval(norm, &shifts)?;
                        let w = StationarityWitness {
                            rho,
                            points: pts.clone(),
                            shifts,
                            closeness: *closeness,
                            shift_size: size,
                            shift_bound: bound,
                            eps,
                        };
                        verify_stationarity_witness(sets, x_bar, norm, &w, tols)?;
                        return Ok((Some(w), false));
                    }
                }
            }
        }
    }
    Ok((None, false))
}

/// Shared input validation: at least two sets of equal dimension matching
/// the reference point and the product norm, with the reference point a
/// member of every set.
fn validate_inputs(
    sets: &[SetExpr],
    x_bar: &Vector,
    norm: &ProductNormSpec,
    tols: &Tols,
) -> Result<(), VarError> {
    let n = sets.len();
    let d = x_bar.dim();
    if n < 2 {
        return Err(VarError::Invalid("need at least two sets".into()));
    }
    if norm.n != n {
        return Err(VarError::Invalid(format!(
            "the product norm has {} blocks but there are {n} sets",
            norm.n
        )));
    }
    validate_product(norm, d)?;
    for (i, s) in sets.iter().enumerate() {
        if s.dim() != d {
            return Err(VarError::Invalid(format!(
                "set {i} lives in dimension {}, expected {d}",
                s.dim()
            )));
        }
        if !s.contains(x_bar, tols.cone)? {
            return Err(VarError::NotInIntersection(i));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Primal checkers.
// ---------------------------------------------------------------------------

/// Searches, for every scale `ε` in [`SCALE_SCHEDULE`], for shifts `â` with
/// `⦀â⦀ < ε` such that `⋂_i (Ω_i − a_i)` misses the closed ball of radius
/// `rho` around `x_bar` (`rho = +∞` drops the ball). The collection is
/// extremal at `x_bar` relative to `rho` exactly when such shifts exist for
/// every `ε`; a report with `all_hold` and per-scale verified witnesses is
/// returned either way.
pub fn check_extremal(
    sets: &[SetExpr],
    x_bar: &Vector,
    rho: f64,
    norm: &ProductNormSpec,
    opts: &VarOptions,
) -> Result<ScheduleReport, VarError> {
    validate_inputs(sets, x_bar, norm, &opts.tols)?;
    if rho.is_nan() || rho <= 0.0 {
        return Err(VarError::Invalid(format!("ball radius must be positive, got {rho}")));
    }
    let dirs = shift_directions(sets, x_bar, opts.budget, opts.seed, &opts.tols)?;
    let candidates = vec![(vec![x_bar.clone(); sets.len()], 0.0)];
    let mut remaining = MAX_EMPTINESS_LPS as isize;
    let mut lp_calls = 0usize;
    let mut witnesses = Vec::new();
    let mut exhausted = false;
    for &eps in &SCALE_SCHEDULE {
        let (w, ex) = scan_for_witness(
            sets,
            x_bar,
            norm,
            &candidates,
            &dirs,
            &[rho],
            &|_| eps,
            eps,
            &mut remaining,
            &mut lp_calls,
            &opts.tols,
        )?;
        exhausted |= ex;
        witnesses.push(w);
    }
    let all_hold = witnesses.iter().all(Option::is_some);
    let mut notes = vec![String::from(
        "emptiness is checked against the closed ball; this is sound for the open-ball reading",
    )];
    if exhausted {
        notes.push(String::from("solve cap hit: absent witnesses are budget-qualified"));
    }
    Ok(ScheduleReport {
        schedule: SCALE_SCHEDULE.to_vec(),
        witnesses,
        all_hold,
        lp_calls,
        exhausted,
        notes,
    })
}

/// Searches, for every scale `ε` in [`SCALE_SCHEDULE`], for a radius
/// `ρ ∈ (0, ε)` and shifts with `⦀â⦀ < ε·ρ` emptying
/// `⋂_i (Ω_i − a_i) ∩ B̄_ρ(x_bar)`. The shifts must shrink with the ball,
/// which is what distinguishes stationarity from extremality.
pub fn check_stationary(
    sets: &[SetExpr],
    x_bar: &Vector,
    norm: &ProductNormSpec,
    opts: &VarOptions,
) -> Result<ScheduleReport, VarError> {
    validate_inputs(sets, x_bar, norm, &opts.tols)?;
    let dirs = shift_directions(sets, x_bar, opts.budget, opts.seed, &opts.tols)?;
    let candidates = vec![(vec![x_bar.clone(); sets.len()], 0.0)];
    let mut remaining = MAX_EMPTINESS_LPS as isize;
    let mut lp_calls = 0usize;
    let mut witnesses = Vec::new();
    let mut exhausted = false;
    for &eps in &SCALE_SCHEDULE {
        let rhos = rho_grid(eps);
        let (w, ex) = scan_for_witness(
            sets,
            x_bar,
            norm,
            &candidates,
            &dirs,
            &rhos,
            &|r| eps * r,
            eps,
            &mut remaining,
            &mut lp_calls,
            &opts.tols,
        )?;
        exhausted |= ex;
        witnesses.push(w);
    }
    let all_hold = witnesses.iter().all(Option::is_some);
    let mut notes = vec![String::from("radii scanned over a 12-point logarithmic grid per scale")];
    if exhausted {
        notes.push(String::from("solve cap hit: absent witnesses are budget-qualified"));
    }
    Ok(ScheduleReport {
        schedule: SCALE_SCHEDULE.to_vec(),
        witnesses,
        all_hold,
        lp_calls,
        exhausted,
        notes,
    })
}

/// Searches for a single witness of approximate stationarity at rate
/// `alpha` and scale `eps`: a radius `ρ ∈ (0, eps)`, anchor points
/// `x_i ∈ Ω_i` with `⦀(x_i − x̄)_i⦀ < eps`, and shifts with `⦀â⦀ < alpha·ρ`
/// emptying `⋂_i (Ω_i − x_i − a_i) ∩ ρB̄`. Returns the first verified
/// witness, or `None` when the budgeted scan finds nothing.
pub fn check_alpha_stationary(
    sets: &[SetExpr],
    x_bar: &Vector,
    norm: &ProductNormSpec,
    alpha: f64,
    eps: f64,
    opts: &VarOptions,
) -> Result<Option<StationarityWitness>, VarError> {
    validate_inputs(sets, x_bar, norm, &opts.tols)?;
    if alpha.is_nan() || alpha <= 0.0 || !eps.is_finite() || eps <= 0.0 {
        return Err(VarError::Invalid("rate and scale must be positive and finite".into()));
    }
    let dirs = shift_directions(sets, x_bar, opts.budget, opts.seed, &opts.tols)?;
    let candidates = point_candidates(sets, x_bar, norm, eps, 4, opts.seed)?;
    let rhos = rho_grid(eps);
    let mut remaining = MAX_EMPTINESS_LPS as isize;
    let mut lp_calls = 0usize;
    let (w, _) = scan_for_witness(
        sets,
        x_bar,
        norm,
        &candidates,
        &dirs,
        &rhos,
        &|r| alpha * r,
        eps,
        &mut remaining,
        &mut lp_calls,
        &opts.tols,
    )?;
    Ok(w)
}

// ---------------------------------------------------------------------------
// Transversality.
// ---------------------------------------------------------------------------

/// Outcome of an adversarial transversality probe at a fixed rate.
#[derive(Clone, Debug)]
pub enum TransversalCheck {
    /// No perturbation at the probed rate emptied the intersection within
    /// the budget; the rate survives, qualified by the budget spent.
    ConfirmedUpToBudget { lp_calls: usize, exhausted: bool },
    /// A verified witness that refutes transversality at the probed rate.
    Counterexample(Box<StationarityWitness>),
}

/// Adversarially scans radii `ρ ∈ (0, eps)`, anchor tuples near `x_bar`,
/// and shift tuples with `⦀â⦀ < alpha·ρ` for one that empties
/// `⋂_i (Ω_i − x_i − a_i) ∩ ρB̄`. Transversality at rate `alpha` means no
/// such perturbation exists; a hit is exactly a stationarity witness.
pub fn check_alpha_transversal(
    sets: &[SetExpr],
    x_bar: &Vector,
    norm: &ProductNormSpec,
    alpha: f64,
    eps: f64,
    opts: &VarOptions,
) -> Result<TransversalCheck, VarError> {
    validate_inputs(sets, x_bar, norm, &opts.tols)?;
    if alpha.is_nan() || alpha <= 0.0 || !eps.is_finite() || eps <= 0.0 {
        return Err(VarError::Invalid("rate and scale must be positive and finite".into()));
    }
    let dirs = shift_directions(sets, x_bar, opts.budget, opts.seed, &opts.tols)?;
    let candidates = point_candidates(sets, x_bar, norm, eps, 4, opts.seed)?;
    let rhos = rho_grid(eps);
    let mut remaining = MAX_EMPTINESS_LPS as isize;
    let mut lp_calls = 0usize;
    let (w, exhausted) = scan_for_witness(
        sets,
        x_bar,
        norm,
        &candidates,
        &dirs,
        &rhos,
        &|r| alpha * r,
        eps,
        &mut remaining,
        &mut lp_calls,
        &opts.tols,
    )?;
    Ok(match w {
        Some(witness) => TransversalCheck::Counterexample(Box::new(witness)),
        None => TransversalCheck::ConfirmedUpToBudget { lp_calls, exhausted },
    })
}

/// Exact transversality constant of a polyhedral collection at `x_bar`.
#[derive(Clone, Debug)]
pub struct TransversalityReport {
    /// `min ‖Σ x_i*‖` over unit dual tuples attached to faces near `x_bar`;
    /// `+∞` when every nearby normal cone is trivial (the minimum runs over
    /// an empty set).
    pub alpha_hat: f64,
    /// Dual tuple attaining `alpha_hat`, when the minimum is finite.
    pub x_star: Option<Vec<Vector>>,
    /// Per-set points realizing the attaining faces.
    pub points: Option<Vec<Vector>>,
    /// Face tuples enumerated.
    pub face_tuples: usize,
    /// Unit-sphere facets used to pin the dual norm to one.
    pub sphere_facets: usize,
    /// Neighborhood radius within which faces were collected.
    pub eps: f64,
    /// Linear programs solved.
    pub lp_calls: usize,
    pub notes: Vec<String>,
}

/// Vertices of the unit ball of a base norm, when the ball is a polytope
/// with a known vertex list.
fn base_ball_vertices(spec: &NormSpec, d: usize) -> Result<Vec<Vector>, VarError> {
    let sign_patterns = |scale: &dyn Fn(usize) -> f64| -> Result<Vec<Vector>, VarError> {
        if d > 12 {
            return Err(VarError::Unsupported(format!(
                "sign-pattern vertex enumeration needs dimension <= 12, got {d}"
            )));
        }
        let mut out = Vec::with_capacity(1usize << d);
        for mask in 0..(1usize << d) {
            let mut v = Vec::with_capacity(d);
            for j in 0..d {
                let s = if mask & (1 << j) != 0 { -1.0 } else { 1.0 };
                v.push(s * scale(j));
            }
            out.push(Vector::new(v));
        }
        Ok(out)
    };
    match spec {
        NormSpec::Lp { p } if p.is_infinite() => sign_patterns(&|_| 1.0),
        NormSpec::Lp { p } if *p == 1.0 => {
            let mut out = Vec::with_capacity(2 * d);
            for j in 0..d {
                out.push(Vector::basis(d, j));
                out.push(Vector::basis(d, j).neg());
            }
            Ok(out)
        }
        NormSpec::WeightedLp { p, weights } if p.is_infinite() => {
            sign_patterns(&|j| 1.0 / weights[j])
        }
        NormSpec::WeightedLp { p, weights } if *p == 1.0 => {
            let mut out = Vec::with_capacity(2 * d);
            for (j, w) in weights.iter().enumerate().take(d) {
                out.push(Vector::basis(d, j).scale(1.0 / w));
                out.push(Vector::basis(d, j).scale(-1.0 / w));
            }
            Ok(out)
        }
        NormSpec::Polyhedral { vertices } => Ok(vertices.clone()),
        other => Err(VarError::Unsupported(format!(
            "no vertex description for the base ball of {other:?}"
        ))),
    }
}

/// Vertices of the unit ball of a product norm, as block tuples. Max-type
/// combinations have the product of the block balls as their ball (vertices
/// = tuples of block vertices); sum-type combinations have the convex hull
/// of the block embeddings (vertices = embedded block vertices); tail
/// variants scale the last block by `1/γ`. Listed points always lie on the
/// unit sphere and include every extreme point, which is all the facet
/// cover below needs.
fn product_ball_vertices(
    kind: &ProductKind,
    n: usize,
    d: usize,
    base_verts: &[Vector],
) -> Result<Vec<Vec<Vector>>, VarError> {
    let cross = |head: Vec<Vec<Vector>>, tail: &[Vector]| -> Result<Vec<Vec<Vector>>, VarError> {
        if head.len().saturating_mul(tail.len()) > MAX_ENUM {
            return Err(VarError::Unsupported(format!(
                "vertex product exceeds the cap of {MAX_ENUM}"
            )));
        }
        let mut out = Vec::with_capacity(head.len() * tail.len());
        for h in &head {
            for t in tail {
                let mut tuple = h.clone();
                tuple.push(t.clone());
                out.push(tuple);
            }
        }
        Ok(out)
    };
    let embed = |scales: &dyn Fn(usize) -> f64| -> Vec<Vec<Vector>> {
        let mut out = Vec::with_capacity(n * base_verts.len());
        for i in 0..n {
            for v in base_verts {
                let mut tuple = vec![Vector::zeros(d); n];
                tuple[i] = v.scale(scales(i));
                out.push(tuple);
            }
        }
        out
    };
    match kind {
        ProductKind::Max => {
            let mut out: Vec<Vec<Vector>> = vec![Vec::new()];
            for _ in 0..n {
                out = cross(out, base_verts)?;
            }
            Ok(out)
        }
        ProductKind::P { p } if p.is_infinite() => {
            product_ball_vertices(&ProductKind::Max, n, d, base_verts)
        }
        ProductKind::P { p } if *p == 1.0 => Ok(embed(&|_| 1.0)),
        ProductKind::WeightedP { p, weights } if *p == 1.0 => Ok(embed(&|i| 1.0 / weights[i])),
        ProductKind::WeightedP { p, weights } if p.is_infinite() => {
            let mut out: Vec<Vec<Vector>> = vec![Vec::new()];
            for w in weights.iter().take(n) {
                let scaled: Vec<Vector> = base_verts.iter().map(|v| v.scale(1.0 / w)).collect();
                out = cross(out, &scaled)?;
            }
            Ok(out)
        }
        ProductKind::MaxTail { inner, gamma } => {
            let head = product_ball_vertices(inner, n - 1, d, base_verts)?;
            let tail: Vec<Vector> = base_verts.iter().map(|v| v.scale(1.0 / gamma)).collect();
            cross(head, &tail)
        }
        ProductKind::SumTail { inner, gamma } => {
            let mut out = Vec::new();
            for mut tuple in product_ball_vertices(inner, n - 1, d, base_verts)? {
                tuple.push(Vector::zeros(d));
                out.push(tuple);
            }
            for v in base_verts {
                let mut tuple = vec![Vector::zeros(d); n - 1];
                tuple.push(v.scale(1.0 / gamma));
                out.push(tuple);
            }
            Ok(out)
        }
        other => Err(VarError::Unsupported(format!(
            "no vertex description for the product ball of {other:?}"
        ))),
    }
}

/// Maximal subsets of constraint rows that can be simultaneously tight at a
/// feasible point within `eps` of `x_bar` (in the base norm), each with a
/// witness point. Active sets at points near `x_bar` are exactly subsets of
/// these, and the normal cone grows with the active set, so minimizing over
/// the maximal ones covers all nearby faces.
fn maximal_tight_subsets(
    rows: &[Vector],
    bounds: &[f64],
    x_bar: &Vector,
    eps: f64,
    base: &NormSpec,
    lp_calls: &mut usize,
) -> Result<Vec<(Vec<usize>, Vector)>, VarError> {
    let m = rows.len();
    if m > MAX_FACE_ROWS {
        return Err(VarError::Unsupported(format!(
            "face enumeration needs at most {MAX_FACE_ROWS} rows per set, got {m}"
        )));
    }
    let ball =
        SetExpr::Ball { center: x_bar.clone(), radius: eps, norm: base.clone(), closed: true };
    let (ball_rows, ball_bounds) = piece_rows(&ball, usize::MAX)?;
    let mut feasible: Vec<(usize, Vec<usize>, Vector)> = Vec::new();
    for mask in 0..(1usize << m) {
        let mut r: Vec<Vector> = ball_rows.clone();
        let mut b: Vec<f64> = ball_bounds.clone();
        let mut members = Vec::new();
        for i in 0..m {
            r.push(rows[i].clone());
            b.push(bounds[i]);
            if mask & (1 << i) != 0 {
                members.push(i);
                r.push(rows[i].neg());
                b.push(-bounds[i]);
            }
        }
        *lp_calls += 1;
        if r.is_empty() {
            feasible.push((mask, members, x_bar.clone()));
            continue;
        }
        if let Feasibility::Feasible(p) = polyhedron_feasible(&r, &b)? {
            feasible.push((mask, members, p));
        }
    }
    let mut out = Vec::new();
    'keep: for (mask, members, p) in &feasible {
        for (other, _, _) in &feasible {
            if other != mask && other & mask == *mask {
                continue 'keep;
            }
        }
        out.push((members.clone(), p.clone()));
    }
    Ok(out)
}

/// Computes the transversality constant of a polyhedral collection at
/// `x_bar`: the minimum of `‖Σ_i x_i*‖` (dual base norm) over tuples
/// `x̂* = (x_1*, …, x_n*)` with unit dual product norm whose blocks lie in
/// normal cones of faces meeting the `eps`-ball around `x_bar`.
///
/// Faces are enumerated exactly (tight-row subsets per set), the unit
/// sphere is covered by its facets — pinned by the vertices of the primal
/// ball — and each (face tuple, facet) pair contributes one linear program
/// over cone multipliers. A strictly positive constant certifies that every
/// nearby unit normal tuple has sum norm at least `alpha_hat`; the constant
/// is `+∞` when all nearby normal cones are trivial.
pub fn transversality_constant(
    sets: &[SetExpr],
    x_bar: &Vector,
    norm: &ProductNormSpec,
    eps: f64,
    opts: &VarOptions,
) -> Result<TransversalityReport, VarError> {
    validate_inputs(sets, x_bar, norm, &opts.tols)?;
    if !eps.is_finite() || eps <= 0.0 {
        return Err(VarError::Invalid("neighborhood radius must be positive and finite".into()));
    }
    let n = sets.len();
    let d = x_bar.dim();
    let dual_spec = prod_dual_spec(norm)?;
    if !prod_lp_representable(&dual_spec, d) {
        return Err(VarError::Unsupported(
            "the dual product norm admits no exact linear encoding".into(),
        ));
    }
    let mut lp_calls = 0usize;

    let mut face_lists: Vec<Vec<(Vec<Vector>, Vector)>> = Vec::with_capacity(n);
    for (i, s) in sets.iter().enumerate() {
        let atoms = atomic_members(s)?;
        if atoms.len() != 1 {
            return Err(VarError::Unsupported(format!(
                "set {i} is a union; the face-enumeration path needs convex polyhedral sets"
            )));
        }
        let (rows, bounds) = piece_rows(&atoms[0], i)?;
        let subsets =
            maximal_tight_subsets(&rows, &bounds, x_bar, eps, &norm.base, &mut lp_calls)?;
        let mut faces = Vec::with_capacity(subsets.len());
        for (members, point) in subsets {
            let gens: Vec<Vector> = members.iter().map(|&r| rows[r].clone()).collect();
            faces.push((gens, point));
        }
        face_lists.push(faces);
    }
    let tuples_total: usize = face_lists.iter().map(Vec::len).product();
    if tuples_total > MAX_ENUM {
        return Err(VarError::Unsupported(format!(
            "face tuple count {tuples_total} exceeds the cap of {MAX_ENUM}"
        )));
    }

    let base_verts = base_ball_vertices(&norm.base, d)?;
    let verts = product_ball_vertices(&norm.kind, n, d, &base_verts)?;

    let dual_base = dual_spec.base.clone();
    let mut best: Option<(f64, Vec<Vector>, Vec<Vector>)> = None;
    let mut counters = vec![0usize; n];
    let mut enumerated = 0usize;
    loop {
        enumerated += 1;
        let tuple: Vec<&(Vec<Vector>, Vector)> =
            (0..n).map(|i| &face_lists[i][counters[i]]).collect();
        for vert in &verts {
            let mut b = LpBuilder::new();
            let mut lam: Vec<Vec<usize>> = Vec::with_capacity(n);
            for f in &tuple {
                let idx = b.fresh_block(f.0.len());
                for &v in &idx {
                    b.nonneg(v);
                }
                lam.push(idx);
            }
            let xstar_lins: Vec<Vec<Lin>> = (0..n)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            let parts: Vec<(f64, Lin)> = tuple[i]
                                .0
                                .iter()
                                .zip(&lam[i])
                                .map(|(g, &v)| (g[j], Lin::var(v)))
                                .collect();
                            let refs: Vec<(f64, &Lin)> =
                                parts.iter().map(|(c, l)| (*c, l)).collect();
                            Lin::combine(&refs)
                        })
                        .collect()
                })
                .collect();
            prod_norm_le(&mut b, &dual_spec, &xstar_lins, &Lin::constant(1.0))?;
            let mut pin = Lin::constant(0.0);
            for i in 0..n {
                for j in 0..d {
                    if vert[i][j] != 0.0 {
                        pin = pin.plus(&xstar_lins[i][j].scaled(vert[i][j]));
                    }
                }
            }
            b.eq(&pin, &Lin::constant(1.0));
            let r = b.fresh();
            b.nonneg(r);
            let sum_lins: Vec<Lin> = (0..d)
                .map(|j| {
                    let mut l = Lin::constant(0.0);
                    for row in &xstar_lins {
                        l = l.plus(&row[j]);
                    }
                    l
                })
                .collect();
            norm_le(&mut b, &dual_base, &sum_lins, &Lin::var(r))?;
            b.minimize(Lin::var(r));
            lp_calls += 1;
            match b.solve()? {
                LpOutcome::Optimal(sol) => {
                    let value = sol.value;
                    if best.as_ref().is_none_or(|(v, _, _)| value < *v) {
                        let xs: Vec<Vector> = xstar_lins
                            .iter()
                            .map(|row| {
                                Vector::new(row.iter().map(|l| l.eval(&sol.point)).collect())
                            })
                            .collect();
                        let pts: Vec<Vector> = tuple.iter().map(|f| f.1.clone()).collect();
                        best = Some((value, xs, pts));
                    }
                }
                LpOutcome::Infeasible { .. } => {}
                LpOutcome::Unbounded { .. } => {
                    return Err(VarError::Verification(
                        "a bounded face program reported an unbounded ray".into(),
                    ))
                }
            }
        }
        let mut k = 0;
        loop {
            counters[k] += 1;
            if counters[k] < face_lists[k].len() {
                break;
            }
            counters[k] = 0;
            k += 1;
            if k == n {
                let mut notes = vec![format!(
                    "faces collected within radius {eps} of the reference point; \
                     sphere covered by {} facets",
                    verts.len()
                )];
                let (alpha_hat, x_star, points) = match best {
                    Some((v, xs, pts)) => {
                        let recomputed = {
                            let mut sum = Vector::zeros(d);
                            for x in &xs {
                                sum = sum.add(x);
                            }
                            eval_norm(&dual_base, &sum)?
                        };
                        let unit = prod_eval(&dual_spec, &xs)?;
                        if (recomputed - v).abs() > opts.tols.residual
                            || (unit - 1.0).abs() > opts.tols.residual
                        {
                            return Err(VarError::Verification(format!(
                                "attaining tuple recomputes to sum {recomputed} and unit \
                                 {unit}, reported minimum {v}"
                            )));
                        }
                        (v.max(0.0), Some(xs), Some(pts))
                    }
                    None => {
                        notes.push(String::from(
                            "all nearby normal cones are trivial: the minimum runs over an \
                             empty set and the constant is infinite",
                        ));
                        (f64::INFINITY, None, None)
                    }
                };
                return Ok(TransversalityReport {
                    alpha_hat,
                    x_star,
                    points,
                    face_tuples: enumerated,
                    sphere_facets: verts.len(),
                    eps,
                    lp_calls,
                    notes,
                });
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Dual bridges.
// ---------------------------------------------------------------------------

/// Dual conditions extracted from an approximate-stationarity witness: a
/// unit normal tuple with small sum, anchored at set points near the
/// reference, together with the witness data it was derived from and the
/// re-verified inequalities.
#[derive(Clone, Debug)]
pub struct DualStationarityCertificate {
    /// Points `x_i ∈ Ω_i` carrying the normal cones (original coordinates).
    pub x: Vec<Vector>,
    /// Anchor points of the underlying stationarity witness.
    pub x_prime: Vec<Vector>,
    /// Shifts of the underlying stationarity witness.
    pub shifts: Vec<Vector>,
    /// Ball point of the localized separation run (translated coordinates;
    /// its base norm stays below `rho`).
    pub x0: Vector,
    /// Unit dual tuple: `x_i* ∈ N_{Ω_i}(x_i)`, `⦀x̂*⦀' = 1`.
    pub x_star: Vec<Vector>,
    /// Cone flavor used for the normal cones.
    pub flavor: Flavor,
    /// Rate of the underlying witness search.
    pub alpha: f64,
    /// Strict bound certified for `‖Σ x_i*‖`.
    pub beta: f64,
    /// Scale certified for the closeness conditions.
    pub eps: f64,
    /// Alignment fraction carried through the separation run.
    pub tau: f64,
    /// Internal scale: the witness is requested at `xi²` and all slack
    /// budgeting derives from it.
    pub xi: f64,
    /// Dual-sum compatibility constant of the product norm used in the
    /// scale selection.
    pub kappa6: f64,
    /// Witness radius actually used.
    pub rho: f64,
    /// Localized separation scale `alpha·rho`.
    pub eps_prime: f64,
    /// Localized separation radius `alpha·sqrt(rho)`.
    pub delta: f64,
    /// `⦀(x_i − x̄)_i⦀`.
    pub closeness: f64,
    /// `‖Σ x_i*‖` in the dual base norm.
    pub sum_norm: f64,
    /// `|⦀x̂*⦀' − 1|`.
    pub unit_error: f64,
    /// Largest per-block Euclidean distance of `x_i*` to its normal cone.
    pub cone_residual: f64,
    /// `Σ_i ⟨x_i*, x_0 − (x_i − shift_i − x_i')⟩` over translated blocks.
    pub alignment: f64,
    /// Product norm of the alignment offsets.
    pub alignment_rhs: f64,
    /// Re-verified inequalities.
    pub checks: Vec<CheckItem>,
    /// All checks passed (always true for returned certificates).
    pub ok: bool,
    pub warnings: Vec<String>,
}

/// The projection of the full dual conditions that keeps only the points
/// and the dual tuple with their residuals.
#[derive(Clone, Debug)]
pub struct SimplifiedDualConditions {
    pub x: Vec<Vector>,
    pub x_star: Vec<Vector>,
    /// `⦀(x_i − x̄)_i⦀`.
    pub closeness: f64,
    /// `‖Σ x_i*‖` in the dual base norm.
    pub sum_norm: f64,
    /// `|⦀x̂*⦀' − 1|`.
    pub unit_error: f64,
    /// Largest per-block Euclidean distance to the normal cones.
    pub cone_residual: f64,
}

impl DualStationarityCertificate {
    /// Drops the witness data, keeping point tuple and dual tuple: the
    /// simplified dual conditions follow from the full ones by projection.
    pub fn simplified(&self) -> SimplifiedDualConditions {
        SimplifiedDualConditions {
            x: self.x.clone(),
            x_star: self.x_star.clone(),
            closeness: self.closeness,
            sum_norm: self.sum_norm,
            unit_error: self.unit_error,
            cone_residual: self.cone_residual,
        }
    }
}

fn push_check(
    checks: &mut Vec<CheckItem>,
    key: &'static str,
    observed: f64,
    bound: f64,
    strict: bool,
    tols: &Tols,
) {
    let ok = if strict { observed <= bound - tols.margin } else { observed <= bound };
    checks.push(CheckItem { key, observed, bound, strict, ok });
}

/// Derives unit dual conditions from approximate stationarity at rate
/// `alpha`: finds a witness at the internal scale `xi²`, runs the localized
/// separation pipeline on the witness-translated sets at scale
/// `(alpha·rho, alpha·sqrt(rho))`, projects the resulting dual tuple onto
/// the true normal cones, and rescales it to unit dual norm. The returned
/// certificate satisfies, with every inequality re-verified:
///
/// * `x_i ∈ Ω_i` with `⦀(x_i − x̄)_i⦀ < eps`,
/// * `x_i* ∈ N_{Ω_i}(x_i)` with `⦀x̂*⦀' = 1` and `‖Σ x_i*‖ < beta`,
/// * alignment `Σ ⟨x_i*, o_i⟩ > tau·⦀ô⦀` for the localization offsets `ô`.
///
/// Needs `0 < alpha < beta`; the internal scale exists whenever
/// `tau ∈ (0, 1)` and `eps > 0`.
#[allow(clippy::too_many_arguments)]
pub fn dual_stationarity_certificate(
    sets: &[SetExpr],
    x_bar: &Vector,
    norm: &ProductNormSpec,
    alpha: f64,
    beta: f64,
    eps: f64,
    tau: f64,
    opts: &VarOptions,
) -> Result<DualStationarityCertificate, VarError> {
    validate_inputs(sets, x_bar, norm, &opts.tols)?;
    if alpha.is_nan() || beta.is_nan() || alpha <= 0.0 || beta <= alpha {
        return Err(VarError::Invalid(format!(
            "needs 0 < alpha < beta, got alpha={alpha}, beta={beta}"
        )));
    }
    if eps.is_nan() || eps <= 0.0 || tau.is_nan() || tau <= 0.0 || tau >= 1.0 {
        return Err(VarError::Invalid("needs eps > 0 and tau in (0, 1)".into()));
    }
    let d = x_bar.dim();
    let n = sets.len();
    let mut warnings: Vec<String> = Vec::new();

    let k6 = estimate_kappa(Compatibility::C6, norm, None, d, 2000, opts.seed)?;
    let kappa = k6.kappa_hat;
    if k6.analytic.is_none() {
        warnings.push(String::from(
            "the dual-sum compatibility constant is sampled, not exact; the final \
             inequalities are re-verified, so a failure surfaces as an error",
        ));
    }

    let xi = 0.9
        * (0.5 * (1.0 - tau))
            .min(0.5 * (-alpha + libm::sqrt(alpha * alpha + 4.0 * eps)))
            .min((beta - alpha) / (kappa + beta));
    if xi.is_nan() || xi <= 0.0 {
        return Err(VarError::NoMargin(format!(
            "the scale selection collapsed (xi = {xi}) for alpha={alpha}, beta={beta}, \
             eps={eps}, tau={tau}, kappa={kappa}"
        )));
    }
    let eps_w = xi * xi;
    let w = check_alpha_stationary(sets, x_bar, norm, alpha, eps_w, opts)?.ok_or_else(|| {
        VarError::NoWitness(format!(
            "no approximate-stationarity witness at rate {alpha} and scale {eps_w}"
        ))
    })?;
    let rho = w.rho;
    let eps_prime = alpha * rho;
    let delta = alpha * libm::sqrt(rho);

    let shifts: Vec<Vector> = w.points.iter().zip(&w.shifts).map(|(p, a)| p.add(a)).collect();
    let sep_opts = SepOptions { seed: opts.seed, tols: opts.tols, ..SepOptions::default() };
    let lc = separate_shifted_with(
        sets, &w.points, &shifts, rho, eps_prime, delta, tau, norm, &sep_opts,
    )?;
    warnings.extend(lc.warnings.iter().cloned());

    let flavor =
        if sets.iter().all(SetExpr::is_convex) { Flavor::Convex } else { Flavor::Frechet };
    let dual_spec = prod_dual_spec(norm)?;
    let dual_base = dual_spec.base.clone();
    let mut cones: Vec<Cone> = Vec::with_capacity(n);
    let mut z: Vec<Vector> = Vec::with_capacity(n);
    let mut prof: Vec<f64> = Vec::with_capacity(n);
    for (s, (xi_pt, xs)) in sets.iter().zip(lc.x.iter().zip(&lc.x_star)) {
        let c = normal_cone(s, xi_pt, flavor, opts.tols.active)?;
        warnings.extend(c.warnings.iter().cloned());
        let cd = cone_distance(xs, &c.cone, &dual_base)?;
        z.push(cd.witness);
        prof.push(cd.distance);
        cones.push(c.cone);
    }
    let proj_dist = phi_eval(&dual_spec.kind, &prof)?;
    let nu = prod_eval(&dual_spec, &z)?;
    if nu <= opts.tols.residual {
        return Err(VarError::Verification(format!(
            "the cone projection of the dual tuple vanished (norm {nu})"
        )));
    }
    let x_star: Vec<Vector> = z.iter().map(|zi| zi.scale(1.0 / nu)).collect();

    let mut sum = Vector::zeros(d);
    for xs in &x_star {
        sum = sum.add(xs);
    }
    let sum_norm = eval_norm(&dual_base, &sum)?;
    let unit_error = (prod_eval(&dual_spec, &x_star)? - 1.0).abs();
    let mut cone_residual = 0.0_f64;
    for (xs, c) in x_star.iter().zip(&cones) {
        cone_residual = cone_residual.max(cone_distance_euclid(c, xs)?.0);
    }
    let offsets: Vec<Vector> =
        (0..n).map(|i| lc.x0.sub(&lc.x[i].sub(&shifts[i]))).collect();
    let alignment: f64 = x_star.iter().zip(&offsets).map(|(xs, o)| xs.dot(o)).sum();
    let alignment_rhs = prod_eval(norm, &offsets)?;
    if (alignment_rhs - lc.alignment_rhs).abs() > opts.tols.residual {
        warnings.push(format!(
            "alignment offsets recompute to {alignment_rhs}, the separation run reported {}",
            lc.alignment_rhs
        ));
    }
    let moved: Vec<Vector> = lc.x.iter().map(|p| p.sub(x_bar)).collect();
    let closeness = prod_eval(norm, &moved)?;
    let x0_norm = eval_norm(&norm.base, &lc.x0)?;

    let tols = &opts.tols;
    let mut checks = Vec::new();
    // The witness inequalities live at the internal scale xi^2, far below
    // the absolute margin; recording them as ratios against one keeps the
    // strictness check meaningful at every scale.
    push_check(&mut checks, "witness_scale_ratio", rho / (xi * xi), 1.0, true, tols);
    push_check(&mut checks, "witness_closeness_ratio", w.closeness / eps_w, 1.0, true, tols);
    push_check(&mut checks, "witness_shift_ratio", w.shift_size / (alpha * rho), 1.0, true, tols);
    push_check(&mut checks, "point_closeness", closeness, eps, true, tols);
    push_check(&mut checks, "projection_gap", proj_dist, eps_prime / delta, true, tols);
    push_check(&mut checks, "unit_dual", unit_error, tols.residual, false, tols);
    push_check(&mut checks, "cone_membership", cone_residual, tols.cone, false, tols);
    push_check(&mut checks, "sum_norm", sum_norm, beta, true, tols);
    push_check(&mut checks, "alignment_tau", tau * alignment_rhs - alignment, 0.0, true, tols);
    push_check(&mut checks, "ball_point", x0_norm, eps, true, tols);
    let ok = checks.iter().all(|c| c.ok);
    if !ok {
        let failed: Vec<&str> =
            checks.iter().filter(|c| !c.ok).map(|c| c.key).collect();
        return Err(VarError::Verification(format!(
            "dual conditions failed re-verification on: {}",
            failed.join(", ")
        )));
    }

    Ok(DualStationarityCertificate {
        x: lc.x,
        x_prime: w.points,
        shifts: w.shifts,
        x0: lc.x0,
        x_star,
        flavor,
        alpha,
        beta,
        eps,
        tau,
        xi,
        kappa6: kappa,
        rho,
        eps_prime,
        delta,
        closeness,
        sum_norm,
        unit_error,
        cone_residual,
        alignment,
        alignment_rhs,
        checks,
        ok,
        warnings,
    })
}

/// From simplified dual conditions — points `x_i ∈ Ω_i` near `x_bar` and a
/// unit normal tuple with `‖Σ x_i*‖ < beta` — constructs a verified
/// stationarity witness at any rate `alpha > beta`: shifts along the primal
/// attainer of `x̂*`, sized `(alpha − (alpha−beta)/4)·ρ`, empty the shifted
/// intersection inside the `ρ`-ball once `ρ` is small enough that every
/// block quotient `⟨x_i*, y − x_i⟩ / ‖y − x_i‖` stays below its curvature
/// budget on `Ω_i` near `x_i` (automatic for convex sets; checked by exact
/// per-piece maximization otherwise, halving `ρ` on failure).
#[allow(clippy::too_many_arguments)]
pub fn dual_to_primal(
    sets: &[SetExpr],
    x_bar: &Vector,
    norm: &ProductNormSpec,
    x: &[Vector],
    x_star: &[Vector],
    alpha: f64,
    beta: f64,
    eps: f64,
    opts: &VarOptions,
) -> Result<StationarityWitness, VarError> {
    validate_inputs(sets, x_bar, norm, &opts.tols)?;
    let n = sets.len();
    let d = x_bar.dim();
    if x.len() != n || x_star.len() != n {
        return Err(VarError::Invalid("point and dual tuples must have one block per set".into()));
    }
    if alpha.is_nan() || beta.is_nan() || beta < 0.0 || alpha <= beta {
        return Err(VarError::Invalid(format!(
            "needs 0 <= beta < alpha, got alpha={alpha}, beta={beta}"
        )));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(VarError::Invalid("needs a positive finite scale".into()));
    }
    let tols = &opts.tols;
    for (i, (s, xi_pt)) in sets.iter().zip(x).enumerate() {
        let (_, dist) = project(s, xi_pt, &norm.base)?;
        if dist > tols.cone {
            return Err(VarError::Invalid(format!("point {i} lies {dist} outside its set")));
        }
    }
    let moved: Vec<Vector> = x.iter().map(|p| p.sub(x_bar)).collect();
    let closeness = prod_eval(norm, &moved)?;
    if !closeness.is_finite() || closeness >= eps - tols.margin {
        return Err(VarError::Invalid(format!(
            "points sit {closeness} from the reference, not strictly below {eps}"
        )));
    }
    let dual_spec = prod_dual_spec(norm)?;
    let dual_base = dual_spec.base.clone();
    let unit_error = (prod_eval(&dual_spec, x_star)? - 1.0).abs();
    if unit_error > tols.residual {
        return Err(VarError::Invalid(format!(
            "the dual tuple has norm error {unit_error}, expected a unit tuple"
        )));
    }
    let flavor =
        if sets.iter().all(SetExpr::is_convex) { Flavor::Convex } else { Flavor::Frechet };
    let mut cones = Vec::with_capacity(n);
    for i in 0..n {
        let c = normal_cone(&sets[i], &x[i], flavor, tols.active)?;
        let dist = cone_distance_euclid(&c.cone, &x_star[i])?.0;
        if dist > tols.cone {
            return Err(VarError::Invalid(format!(
                "dual block {i} lies {dist} outside the normal cone at its point"
            )));
        }
        cones.push(c.cone);
    }
    let mut sum = Vector::zeros(d);
    for xs in x_star {
        sum = sum.add(xs);
    }
    let sum_norm = eval_norm(&dual_base, &sum)?;
    if !sum_norm.is_finite() || sum_norm >= beta - tols.margin {
        return Err(VarError::Invalid(format!(
            "the dual tuple sums to {sum_norm}, not strictly below beta = {beta}"
        )));
    }

    let k5 = estimate_kappa(Compatibility::C5, norm, None, d, 2000, opts.seed)?;
    let kappa = k5.kappa_hat;
    let xi = 0.5 * (alpha - beta);
    // Per-block share of the curvature budget: a tuple within radius R has
    // every block below R / phi(e_i), and block quotients q sum to at most
    // q * (sum_i 1/phi(e_i)) * product-norm.
    let mut inv_sum = 0.0;
    let mut block_caps = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let phi_ei = phi_eval(&norm.kind, &e)?;
        if phi_ei.is_nan() || phi_ei <= 0.0 {
            return Err(VarError::Invalid("degenerate product norm".into()));
        }
        inv_sum += 1.0 / phi_ei;
        block_caps.push(phi_ei);
    }
    let quotient_target = xi / ((kappa + alpha) * inv_sum);

    let attainer = prod_dual_attainer(&dual_spec, x_star)?;
    let mut rho = 0.9 * eps;
    let mut last_violation: Option<Vector> = None;
    for _ in 0..MAX_RADIUS_HALVINGS {
        let radius_full = (kappa + alpha) * rho;
        let mut quotient_ok = true;
        for i in 0..n {
            if sets[i].is_convex() {
                continue;
            }
            let block_radius = radius_full / block_caps[i];
            let mut worst = f64::NEG_INFINITY;
            for atom in atomic_members(&sets[i])? {
                let (rows, bounds) = piece_rows(&atom, i)?;
                let mut b = LpBuilder::new();
                let y = b.fresh_block(d);
                let s = b.fresh();
                b.nonneg(s);
                for (a, bb) in rows.iter().zip(&bounds) {
                    let mut lhs = Lin::constant(0.0);
                    for j in 0..d {
                        if a[j] != 0.0 {
                            lhs = lhs.plus(&Lin::term(y[j], a[j]));
                        }
                    }
                    b.le(&lhs, &Lin::constant(*bb));
                }
                let diff: Vec<Lin> =
                    (0..d).map(|j| Lin::var(y[j]).shifted(-x[i][j])).collect();
                norm_le(&mut b, &norm.base, &diff, &Lin::var(s))?;
                b.le(&Lin::var(s), &Lin::constant(block_radius));
                let mut obj = Lin::term(s, -quotient_target);
                for j in 0..d {
                    if x_star[i][j] != 0.0 {
                        obj = obj.plus(&diff[j].scaled(x_star[i][j]));
                    }
                }
                b.maximize(obj);
                match b.solve()? {
                    LpOutcome::Optimal(sol) => worst = worst.max(sol.value),
                    LpOutcome::Infeasible { .. } => {}
                    LpOutcome::Unbounded { .. } => {
                        return Err(VarError::Verification(
                            "a radius-bounded quotient program reported an unbounded ray"
                                .into(),
                        ))
                    }
                }
            }
            if worst > tols.residual {
                quotient_ok = false;
                break;
            }
        }
        if quotient_ok {
            let scale = (alpha - 0.5 * xi) * rho;
            let shifts: Vec<Vector> = attainer.iter().map(|v| v.scale(scale)).collect();
            let offsets: Vec<Vector> = x.iter().zip(&shifts).map(|(p, a)| p.add(a)).collect();
            match shifted_intersection_point(sets, &offsets, rho, &norm.base)? {
                None => {
                    let w = StationarityWitness {
                        rho,
                        points: x.to_vec(),
                        shifts,
                        closeness,
                        shift_size: prod_eval(norm, &attainer)? * scale,
                        shift_bound: alpha * rho,
                        eps,
                    };
                    verify_stationarity_witness(sets, x_bar, norm, &w, tols)?;
                    return Ok(w);
                }
                Some(p) => last_violation = Some(p),
            }
        }
        rho *= 0.5;
    }
    Err(VarError::NoWitness(match last_violation {
        Some(p) => format!(
            "no radius emptied the shifted intersection; last surviving point {:?}",
            p.as_slice()
        ),
        None => String::from("no radius passed the curvature-budget check"),
    }))
}

// ---------------------------------------------------------------------------
// Suites.
// ---------------------------------------------------------------------------

/// Cross-check of the four formulations that coincide for convex sets.
#[derive(Clone, Debug)]
pub struct EquivalenceTable {
    /// Shifts bounded by `ε` empty the intersection in some probed ball.
    pub extremal: bool,
    /// Shifts bounded by `ε·ρ` empty the intersection in a `ρ`-ball.
    pub stationary: bool,
    /// Rate-bounded shifts with moving anchor points (all probed rates).
    pub approx_stationary: bool,
    /// Shifts bounded by `ε` empty the intersection in every probed ball.
    pub global_perturbation: bool,
    /// All four answers coincide.
    pub agree: bool,
    /// Emptiness solves spent across the probes.
    pub lp_calls: usize,
    pub notes: Vec<String>,
}

/// Runs the four convex-case formulations on one instance and reports
/// whether they agree: relative extremality (some probed ball), plain
/// stationarity, approximate stationarity over a rate schedule, and the
/// global perturbation property (every probed ball, including no ball).
/// Positive answers rest on verified witnesses; negative answers are
/// budget-qualified.
pub fn convex_equivalence_suite(
    sets: &[SetExpr],
    x_bar: &Vector,
    norm: &ProductNormSpec,
    opts: &VarOptions,
) -> Result<EquivalenceTable, VarError> {
    validate_inputs(sets, x_bar, norm, &opts.tols)?;
    if !sets.iter().all(SetExpr::is_convex) {
        return Err(VarError::Unsupported(
            "the four-way equivalence holds for convex sets; got a nonconvex member".into(),
        ));
    }
    let mut lp_calls = 0usize;
    let ball_probes = [f64::INFINITY, 1.0, 0.1];

    let mut extremal = false;
    let mut global = true;
    for &rho in &ball_probes {
        let rep = check_extremal(sets, x_bar, rho, norm, opts)?;
        lp_calls += rep.lp_calls;
        extremal |= rep.all_hold;
        global &= rep.all_hold;
    }

    let st = check_stationary(sets, x_bar, norm, opts)?;
    lp_calls += st.lp_calls;
    let stationary = st.all_hold;

    let mut approx = true;
    for &alpha in &[1.0, 0.25] {
        for &eps in &[0.5, 0.05] {
            let found = check_alpha_stationary(sets, x_bar, norm, alpha, eps, opts)?.is_some();
            approx &= found;
        }
    }

    let agree =
        extremal == stationary && stationary == approx && approx == global;
    Ok(EquivalenceTable {
        extremal,
        stationary,
        approx_stationary: approx,
        global_perturbation: global,
        agree,
        lp_calls,
        notes: vec![
            format!("ball probes: {ball_probes:?}; rate probes: [1.0, 0.25] x [0.5, 0.05]"),
            String::from("positives carry verified witnesses; negatives are budget-qualified"),
        ],
    })
}

/// Cross-check of approximate stationarity against its dual conditions.
#[derive(Clone, Debug)]
pub struct EpSuiteTable {
    /// Rate-schedule approximate stationarity held.
    pub approx_stationary: bool,
    /// The full dual conditions were derived and re-verified.
    pub dual_full: bool,
    /// The simplified dual conditions (projection of the full ones) held.
    pub dual_simplified: bool,
    /// The three answers coincide.
    pub agree: bool,
    /// Exact constant-tuple compatibility constant of the product norm
    /// (the suite requires it to be certified).
    pub kappa4: f64,
    pub notes: Vec<String>,
}

/// Runs the three-way check: (i) approximate stationarity over a rate
/// schedule, (ii) full dual conditions at `beta = ε`, and (iii) the
/// simplified dual conditions obtained by projection. Requires the
/// constant-tuple compatibility constant of the product norm to admit an
/// exact closed form.
pub fn extended_ep_suite(
    sets: &[SetExpr],
    x_bar: &Vector,
    norm: &ProductNormSpec,
    opts: &VarOptions,
) -> Result<EpSuiteTable, VarError> {
    validate_inputs(sets, x_bar, norm, &opts.tols)?;
    let d = x_bar.dim();
    let k4 = estimate_kappa(Compatibility::C4, norm, None, d, 2000, opts.seed)?;
    let Some(kappa4) = k4.analytic else {
        return Err(VarError::Uncertified(
            "the constant-tuple compatibility constant of the product norm has no exact \
             closed form"
                .into(),
        ));
    };

    let mut approx = true;
    for &alpha in &[1.0, 0.5] {
        for &eps in &[0.5, 0.05] {
            approx &= check_alpha_stationary(sets, x_bar, norm, alpha, eps, opts)?.is_some();
        }
    }

    let mut dual_full = true;
    let mut simplified_ok: Option<bool> = None;
    for &eps in &[0.5, 0.1] {
        match dual_stationarity_certificate(
            sets,
            x_bar,
            norm,
            0.5 * eps,
            eps,
            eps,
            0.5,
            opts,
        ) {
            Ok(cert) => {
                let s = cert.simplified();
                let ok = s.closeness < eps
                    && s.unit_error <= opts.tols.residual
                    && s.cone_residual <= opts.tols.cone
                    && s.sum_norm < eps;
                simplified_ok = Some(simplified_ok.unwrap_or(true) && ok);
            }
            Err(VarError::NoWitness(_)) => {
                dual_full = false;
                simplified_ok = Some(false);
            }
            Err(e) => return Err(e),
        }
    }
    let dual_simplified = dual_full && simplified_ok.unwrap_or(false);

    let agree = approx == dual_full && dual_full == dual_simplified;
    Ok(EpSuiteTable {
        approx_stationary: approx,
        dual_full,
        dual_simplified,
        agree,
        kappa4,
        notes: vec![
            String::from("dual conditions probed at scales [0.5, 0.1] with rate = scale/2"),
            String::from("the simplified conditions are the projection of the full ones"),
        ],
    })
}

// ---------------------------------------------------------------------------
// Tests.
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(coords: &[f64]) -> Vector {
        Vector::new(coords.to_vec())
    }

    fn halfspace(a: &[f64], b: f64) -> SetExpr {
        SetExpr::halfspace(v(a), b)
    }

    fn max_norm(n: usize) -> ProductNormSpec {
        ProductNormSpec::max(n, NormSpec::linf())
    }

    fn opposite_half_planes() -> Vec<SetExpr> {
        vec![halfspace(&[0.0, 1.0], 0.0), halfspace(&[0.0, -1.0], 0.0)]
    }

    fn small_opts() -> VarOptions {
        VarOptions { budget: 8, ..VarOptions::default() }
    }

    #[test]
    fn extremal_opposite_half_planes() {
        let sets = opposite_half_planes();
        let x_bar = v(&[0.0, 0.0]);
        let rep =
            check_extremal(&sets, &x_bar, 1.0, &max_norm(2), &VarOptions::default()).unwrap();
        assert!(rep.all_hold);
        assert!(!rep.exhausted);
        for (w, eps) in rep.witnesses.iter().zip(&rep.schedule) {
            let w = w.as_ref().unwrap();
            assert_eq!(w.closeness, 0.0);
            assert!(w.shift_size < *eps);
            // The first hit comes from the outward-normal product
            // direction: set one pushed up, set two pushed down.
            assert!(w.shifts[0][1] > 0.0 && w.shifts[1][1] < 0.0);
            verify_stationarity_witness(&sets, &x_bar, &max_norm(2), w, &Tols::default())
                .unwrap();
        }
    }

    #[test]
    fn stationary_scan_scales_shifts_with_the_radius() {
        let sets = opposite_half_planes();
        let rep = check_stationary(&sets, &v(&[0.0, 0.0]), &max_norm(2), &small_opts()).unwrap();
        assert!(rep.all_hold);
        for (w, eps) in rep.witnesses.iter().zip(&rep.schedule) {
            let w = w.as_ref().unwrap();
            assert!(w.rho < *eps);
            assert!(w.shift_size < eps * w.rho);
            assert!((w.shift_bound - eps * w.rho).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_boxes_are_not_stationary() {
        let b = SetExpr::box_set(&[-1.0, -1.0], &[1.0, 1.0]);
        let sets = vec![b.clone(), b];
        let opts = VarOptions { budget: 4, ..VarOptions::default() };
        let rep = check_stationary(&sets, &v(&[0.0, 0.0]), &max_norm(2), &opts).unwrap();
        assert!(!rep.all_hold);
        assert!(rep.witnesses.iter().all(Option::is_none));
        let ext = check_extremal(&sets, &v(&[0.0, 0.0]), 0.5, &max_norm(2), &opts).unwrap();
        assert!(ext.witnesses.iter().all(Option::is_none));
    }

    #[test]
    fn witness_verification_rejects_corruption() {
        let sets = opposite_half_planes();
        let x_bar = v(&[0.0, 0.0]);
        let norm = max_norm(2);
        let rep = check_extremal(&sets, &x_bar, 1.0, &norm, &small_opts()).unwrap();
        let w = rep.witnesses[0].clone().unwrap();

        let mut wrong_size = w.clone();
        wrong_size.shift_size = 0.0;
        assert!(matches!(
            verify_stationarity_witness(&sets, &x_bar, &norm, &wrong_size, &Tols::default()),
            Err(VarError::Verification(_))
        ));

        let mut too_big = w.clone();
        too_big.shifts = too_big.shifts.iter().map(|a| a.scale(10.0)).collect();
        assert!(verify_stationarity_witness(&sets, &x_bar, &norm, &too_big, &Tols::default())
            .is_err());

        let mut outside = w.clone();
        outside.points[0] = v(&[0.0, 5.0]);
        assert!(matches!(
            verify_stationarity_witness(&sets, &x_bar, &norm, &outside, &Tols::default()),
            Err(VarError::Verification(_))
        ));

        // A harmless no-op change keeps the witness valid.
        verify_stationarity_witness(&sets, &x_bar, &norm, &w, &Tols::default()).unwrap();
    }

    #[test]
    fn crossing_axes_constant_is_one() {
        // The two coordinate axes in the plane: each normal cone is the
        // orthogonal line, and the best unit tuple splits its mass so that
        // the sum still carries full weight.
        let x_axis = SetExpr::Polyhedron {
            dim: 2,
            rows: vec![v(&[0.0, 1.0]), v(&[0.0, -1.0])],
            bounds: vec![0.0, 0.0],
        };
        let y_axis = SetExpr::Polyhedron {
            dim: 2,
            rows: vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0])],
            bounds: vec![0.0, 0.0],
        };
        let rep = transversality_constant(
            &[x_axis, y_axis],
            &v(&[0.0, 0.0]),
            &max_norm(2),
            0.5,
            &VarOptions::default(),
        )
        .unwrap();
        assert!((rep.alpha_hat - 1.0).abs() < 1e-7, "got {}", rep.alpha_hat);
        assert!(rep.x_star.is_some());
    }

    #[test]
    fn opposite_half_planes_constant_is_zero_with_counterexample() {
        let sets = opposite_half_planes();
        let x_bar = v(&[0.0, 0.0]);
        let norm = max_norm(2);
        let rep =
            transversality_constant(&sets, &x_bar, &norm, 0.5, &VarOptions::default()).unwrap();
        assert!(rep.alpha_hat.abs() < 1e-9, "got {}", rep.alpha_hat);
        // Opposing unit normals cancel exactly.
        let xs = rep.x_star.unwrap();
        let sum = xs[0].add(&xs[1]);
        assert!(sum.norm_inf() < 1e-9);

        // Consistency: a rate above the constant is refuted by a witness.
        match check_alpha_transversal(&sets, &x_bar, &norm, 0.25, 0.5, &small_opts()).unwrap() {
            TransversalCheck::Counterexample(w) => {
                assert!(w.shift_size < 0.25 * w.rho);
            }
            other => panic!("expected a counterexample, got {other:?}"),
        }
    }

    #[test]
    fn half_plane_with_full_space_constant_is_one() {
        let sets = vec![
            halfspace(&[0.0, 1.0], 0.0),
            SetExpr::Polyhedron { dim: 2, rows: vec![], bounds: vec![] },
        ];
        let x_bar = v(&[0.0, 0.0]);
        let norm = max_norm(2);
        let rep =
            transversality_constant(&sets, &x_bar, &norm, 0.5, &VarOptions::default()).unwrap();
        assert!((rep.alpha_hat - 1.0).abs() < 1e-7, "got {}", rep.alpha_hat);
        // The whole space contributes a zero dual block.
        let xs = rep.x_star.unwrap();
        assert!(xs[1].norm_inf() < 1e-9);

        // A rate below the constant survives the adversarial scan.
        match check_alpha_transversal(&sets, &x_bar, &norm, 0.5, 0.25, &small_opts()).unwrap() {
            TransversalCheck::ConfirmedUpToBudget { lp_calls, .. } => assert!(lp_calls > 0),
            other => panic!("expected confirmation, got {other:?}"),
        }
    }

    #[test]
    fn crossing_axes_alpha_scan_matches_the_constant() {
        let x_axis = SetExpr::Polyhedron {
            dim: 2,
            rows: vec![v(&[0.0, 1.0]), v(&[0.0, -1.0])],
            bounds: vec![0.0, 0.0],
        };
        let y_axis = SetExpr::Polyhedron {
            dim: 2,
            rows: vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0])],
            bounds: vec![0.0, 0.0],
        };
        let sets = vec![x_axis, y_axis];
        let x_bar = v(&[0.0, 0.0]);
        let norm = max_norm(2);
        // Below the constant (1): no emptying perturbation exists at all —
        // shifted axes always cross inside a ball of radius above the shift.
        match check_alpha_transversal(&sets, &x_bar, &norm, 0.9, 0.5, &small_opts()).unwrap() {
            TransversalCheck::ConfirmedUpToBudget { .. } => {}
            other => panic!("expected confirmation, got {other:?}"),
        }
        // Above the constant: pushing both axes by their outward normals
        // moves the crossing point out of the ball.
        match check_alpha_transversal(&sets, &x_bar, &norm, 1.2, 0.5, &small_opts()).unwrap() {
            TransversalCheck::Counterexample(w) => {
                assert!(w.shift_size < 1.2 * w.rho);
                assert!(w.shift_size > 0.9 * w.rho, "needs a shift beyond the ball radius");
            }
            other => panic!("expected a counterexample, got {other:?}"),
        }
    }

    #[test]
    fn interior_point_reports_infinite_constant() {
        let sets = vec![
            SetExpr::box_set(&[-1.0, -1.0], &[1.0, 1.0]),
            SetExpr::box_set(&[-2.0, -2.0], &[2.0, 2.0]),
        ];
        let rep = transversality_constant(
            &sets,
            &v(&[0.0, 0.0]),
            &max_norm(2),
            0.5,
            &VarOptions::default(),
        )
        .unwrap();
        assert!(rep.alpha_hat.is_infinite());
        assert!(rep.x_star.is_none());
    }

    #[test]
    fn dual_certificate_on_opposite_half_planes() {
        let sets = opposite_half_planes();
        let x_bar = v(&[0.0, 0.0]);
        let norm = max_norm(2);
        let cert = dual_stationarity_certificate(
            &sets,
            &x_bar,
            &norm,
            0.5,
            0.75,
            0.25,
            0.5,
            &VarOptions::default(),
        )
        .unwrap();
        assert!(cert.ok);
        assert!(cert.rho < cert.xi * cert.xi);
        // The unit dual tuple splits evenly across the opposing normals.
        assert!(cert.x_star[0].sub(&v(&[0.0, 0.5])).norm_inf() < 1e-6);
        assert!(cert.x_star[1].sub(&v(&[0.0, -0.5])).norm_inf() < 1e-6);
        assert!(cert.sum_norm < 1e-7);
        assert!(cert.alignment > 0.5 * cert.alignment_rhs);
        assert!(cert.closeness < 0.25);
        let s = cert.simplified();
        assert_eq!(s.x_star.len(), 2);
        assert!(s.sum_norm == cert.sum_norm && s.closeness == cert.closeness);
        assert!(s.unit_error <= 1e-7 && s.cone_residual <= 1e-8);
    }

    #[test]
    fn dual_to_primal_round_trip() {
        let sets = opposite_half_planes();
        let x_bar = v(&[0.0, 0.0]);
        let norm = max_norm(2);
        let cert = dual_stationarity_certificate(
            &sets,
            &x_bar,
            &norm,
            0.5,
            0.75,
            0.25,
            0.5,
            &VarOptions::default(),
        )
        .unwrap();
        let w = dual_to_primal(
            &sets,
            &x_bar,
            &norm,
            &cert.x,
            &cert.x_star,
            0.8,
            0.1,
            0.5,
            &VarOptions::default(),
        )
        .unwrap();
        // Convex sets need no radius halving: the first radius works.
        assert!((w.rho - 0.45).abs() < 1e-12);
        assert!((w.shift_size - (0.8 - 0.35 / 2.0) * 0.45).abs() < 1e-9);
        assert!(w.shift_size < w.shift_bound);
        // Shifts follow the attainer of the dual tuple: up for the lower
        // half-plane, down for the upper one.
        assert!(w.shifts[0][1] > 0.0 && w.shifts[1][1] < 0.0);
        verify_stationarity_witness(&sets, &x_bar, &norm, &w, &Tols::default()).unwrap();
    }

    #[test]
    fn dual_to_primal_rejects_missing_margin() {
        let sets = opposite_half_planes();
        let x_bar = v(&[0.0, 0.0]);
        let norm = max_norm(2);
        let x = vec![x_bar.clone(), x_bar.clone()];
        let x_star = vec![v(&[0.0, 0.5]), v(&[0.0, -0.5])];
        let err = dual_to_primal(
            &sets,
            &x_bar,
            &norm,
            &x,
            &x_star,
            0.1,
            0.5,
            0.5,
            &VarOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, VarError::Invalid(_)));
    }

    #[test]
    fn equivalence_suite_agrees_both_ways() {
        let opts = VarOptions { budget: 6, ..VarOptions::default() };
        let norm = max_norm(2);

        let table = convex_equivalence_suite(
            &opposite_half_planes(),
            &v(&[0.0, 0.0]),
            &norm,
            &opts,
        )
        .unwrap();
        assert!(table.agree);
        assert!(table.extremal && table.stationary);
        assert!(table.approx_stationary && table.global_perturbation);

        let b = SetExpr::box_set(&[-1.0, -1.0], &[1.0, 1.0]);
        let table =
            convex_equivalence_suite(&[b.clone(), b], &v(&[0.0, 0.0]), &norm, &opts).unwrap();
        assert!(table.agree);
        assert!(!table.extremal && !table.stationary);
        assert!(!table.approx_stationary && !table.global_perturbation);
    }

    #[test]
    fn ep_suite_agrees_both_ways() {
        let opts = VarOptions { budget: 6, ..VarOptions::default() };
        let norm = max_norm(2);

        let table =
            extended_ep_suite(&opposite_half_planes(), &v(&[0.0, 0.0]), &norm, &opts).unwrap();
        assert!(table.agree);
        assert!(table.approx_stationary && table.dual_full && table.dual_simplified);
        assert!((table.kappa4 - 1.0).abs() < 1e-12);

        let b = SetExpr::box_set(&[-1.0, -1.0], &[1.0, 1.0]);
        let table =
            extended_ep_suite(&[b.clone(), b], &v(&[0.0, 0.0]), &norm, &opts).unwrap();
        assert!(table.agree);
        assert!(!table.approx_stationary && !table.dual_full && !table.dual_simplified);
    }

    #[test]
    fn union_sets_run_through_the_primal_checkers() {
        // A square assembled from two halves sharing a seam, pushed against
        // a box that touches it along an edge: the pair is extremal, and
        // the union branches of the emptiness solve must agree.
        let left = SetExpr::box_set(&[-1.0, -1.0], &[0.0, 1.0]);
        let right = SetExpr::box_set(&[0.0, -1.0], &[1.0, 1.0]);
        let square = SetExpr::Union { members: vec![left, right] };
        let top = SetExpr::box_set(&[-1.0, 1.0], &[1.0, 2.0]);
        let sets = vec![square, top];
        let x_bar = v(&[0.0, 1.0]);
        let rep = check_extremal(&sets, &x_bar, 1.0, &max_norm(2), &small_opts()).unwrap();
        assert!(rep.all_hold);
        let w = rep.witnesses[0].as_ref().unwrap();
        // Pushing the square down and the top box up separates them.
        assert!(w.shifts[0][1] > 0.0 && w.shifts[1][1] < 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let sets = opposite_half_planes();
        let norm = max_norm(2);
        let opts = VarOptions::default();

        // Reference point outside a set: (0, 5) violates the lower
        // half-plane, which comes first.
        assert!(matches!(
            check_extremal(&sets, &v(&[0.0, 5.0]), 1.0, &norm, &opts),
            Err(VarError::NotInIntersection(0))
        ));
        // Block-count mismatch.
        assert!(matches!(
            check_stationary(&sets, &v(&[0.0, 0.0]), &max_norm(3), &opts),
            Err(VarError::Invalid(_))
        ));
        // Rate ordering for the dual bridge.
        assert!(matches!(
            dual_stationarity_certificate(
                &sets,
                &v(&[0.0, 0.0]),
                &norm,
                0.75,
                0.5,
                0.25,
                0.5,
                &opts
            ),
            Err(VarError::Invalid(_))
        ));
        // Unions are outside the face-enumeration path.
        let u = SetExpr::Union {
            members: vec![
                SetExpr::box_set(&[-2.0, -1.0], &[0.0, 1.0]),
                SetExpr::box_set(&[0.0, -1.0], &[2.0, 1.0]),
            ],
        };
        assert!(matches!(
            transversality_constant(
                &[u, halfspace(&[0.0, 1.0], 0.0)],
                &v(&[0.0, 0.0]),
                &norm,
                0.5,
                &opts
            ),
            Err(VarError::Unsupported(_))
        ));
    }

    #[test]
    fn checkers_are_deterministic() {
        let sets = opposite_half_planes();
        let x_bar = v(&[0.0, 0.0]);
        let norm = max_norm(2);
        let opts = small_opts();
        let a = check_stationary(&sets, &x_bar, &norm, &opts).unwrap();
        let b = check_stationary(&sets, &x_bar, &norm, &opts).unwrap();
        assert_eq!(a.lp_calls, b.lp_calls);
        for (wa, wb) in a.witnesses.iter().zip(&b.witnesses) {
            let (wa, wb) = (wa.as_ref().unwrap(), wb.as_ref().unwrap());
            assert_eq!(wa.rho, wb.rho);
            assert!(wa.shifts.iter().zip(&wb.shifts).all(|(x, y)| x.approx_eq(y, 0.0)));
        }
    }
}
