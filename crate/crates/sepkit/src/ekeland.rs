//! Constructive Ekeland variational principle: given a point that nearly
//! minimizes an objective, iterated perturbed-argmin steps produce a nearby
//! point that exactly minimizes the objective penalized by a distance term.
//!
//! The returned point `x` satisfies, with `c = eps / lambda`:
//! `d(x, x0) ≤ lambda`, `f(x) ≤ f(x0)`, and
//! `f(u) + c·d(u, x) ≥ f(x)` for every feasible `u` — the inequality is
//! anchored at the returned point, which is the form the separation proof
//! consumes. (The classical statement anchors it at `f(x0)`; that variant
//! is implied and not separately tracked.)

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::norms::{
    eval_norm, prod_eval_flat, prod_lp_representable, prod_norm_le, NormError, NormSpec,
    ProductNormSpec,
};
use crate::polysolve::{Lin, LpBuilder, LpOutcome, PolyError};
use crate::sets::{SetError, SetExpr};
use crate::tol::ITER_CAP;
use crate::vector::Vector;

/// Errors from the descent driver and its oracles.
#[derive(Clone, Debug, Error)]
pub enum EkelandError {
    #[error(
        "near-minimality premise fails: f(x0) = {f0} but the infimum is {infimum} \
         and the slack budget is {eps}"
    )]
    PremiseFailed { f0: f64, infimum: f64, eps: f64 },
    #[error("argmin oracle failure: {0}")]
    Oracle(String),
    #[error("descent did not terminate within {0} iterations")]
    IterationLimit(usize),
    #[error("invalid descent instance: {0}")]
    Invalid(String),
}

impl From<NormError> for EkelandError {
    fn from(e: NormError) -> Self {
        EkelandError::Oracle(format!("{e}"))
    }
}

impl From<PolyError> for EkelandError {
    fn from(e: PolyError) -> Self {
        EkelandError::Oracle(format!("{e}"))
    }
}

impl From<SetError> for EkelandError {
    fn from(e: SetError) -> Self {
        EkelandError::Invalid(format!("{e}"))
    }
}

/// An objective with the oracles the descent needs: evaluation, the
/// metric, the global infimum (for the premise check), and exact
/// minimization of `f(u) + c·d(u, anchor)` over the feasible set.
pub trait DescentOracle {
    fn value(&self, x: &Vector) -> Result<f64, EkelandError>;
    fn metric(&self, a: &Vector, b: &Vector) -> Result<f64, EkelandError>;
    fn infimum(&self) -> Result<f64, EkelandError>;
    fn perturbed_argmin(&self, c: f64, anchor: &Vector) -> Result<Vector, EkelandError>;
}

/// Outcome of [`ekeland_descent`] with its verification numbers.
#[derive(Clone, Debug)]
pub struct EkelandResult {
    /// The stabilized point `x`.
    pub point: Vector,
    /// Accepted descent steps.
    pub iterations: usize,
    /// Objective drop of the last accepted step.
    pub final_decrement: f64,
    /// `d(x, x0)`; at most `lambda` (strictly under a strict premise).
    pub moved: f64,
    /// `f(x) − f(x0)`; never positive.
    pub value_change: f64,
    /// `f(x)`.
    pub value: f64,
    /// `max(0, f(x) − min_u [f(u) + c·d(u, x)])`, computed by one extra
    /// oracle call at the returned point: zero (up to solver tolerance)
    /// certifies the perturbation inequality globally over the feasible
    /// set the oracle ranges over.
    pub worst_violation: f64,
}

/// Runs the constructive principle from `x0` with slack budget `eps` and
/// localization radius `lambda`. `tol` is the termination/acceptance
/// tolerance on objective decrements and step sizes.
pub fn ekeland_descent<O: DescentOracle>(
    oracle: &O,
    x0: &Vector,
    eps: f64,
    lambda: f64,
    tol: f64,
) -> Result<EkelandResult, EkelandError> {
    if eps <= 0.0 || !eps.is_finite() || lambda <= 0.0 || !lambda.is_finite() {
        return Err(EkelandError::Invalid(format!(
            "eps and lambda must be positive and finite, got eps={eps}, lambda={lambda}"
        )));
    }
    let c = eps / lambda;
    let f0 = oracle.value(x0)?;
    let infimum = oracle.infimum()?;
    if f0 - infimum >= eps - 1e-12 {
        return Err(EkelandError::PremiseFailed { f0, infimum, eps });
    }
    let mut x = x0.clone();
    let mut fx = f0;
    let mut iterations = 0usize;
    let mut final_decrement = 0.0;
    loop {
        if iterations >= ITER_CAP {
            return Err(EkelandError::IterationLimit(ITER_CAP));
        }
        let p = oracle.perturbed_argmin(c, &x)?;
        let fp = oracle.value(&p)?;
        let step = oracle.metric(&p, &x)?;
        let decrement = fx - fp;
        // Stop when the argmin is the current point (within tol). A move
        // is accepted only with the full decrement and a strict objective
        // drop; the strictness rules out cycling through tied minimizers,
        // since reversing a step would need the opposite drop to also be
        // positive.
        if step <= tol {
            break;
        }
        if decrement < c * step - tol || decrement <= 0.0 {
            break;
        }
        x = p;
        fx = fp;
        iterations += 1;
        final_decrement = decrement;
    }
    // Independent verification pass at the stabilized point.
    let probe = oracle.perturbed_argmin(c, &x)?;
    let perturbed_min = oracle.value(&probe)? + c * oracle.metric(&probe, &x)?;
    let worst_violation = (fx - perturbed_min).max(0.0);
    let moved = oracle.metric(&x, x0)?;
    Ok(EkelandResult {
        point: x,
        iterations,
        final_decrement,
        moved,
        value_change: fx - f0,
        value: fx,
        worst_violation,
    })
}

/// Finite candidate-set oracle: objective values tabulated on an explicit
/// point list, metric by a norm. Serves as the seeded-grid fallback and as
/// the independent verification oracle in tests.
#[derive(Clone, Debug)]
pub struct GridObjective {
    pub points: Vec<Vector>,
    pub values: Vec<f64>,
    pub metric_norm: NormSpec,
}

impl GridObjective {
    pub fn new(points: Vec<Vector>, values: Vec<f64>, metric_norm: NormSpec) -> Self {
        assert_eq!(points.len(), values.len(), "one value per grid point");
        assert!(!points.is_empty(), "grid must be nonempty");
        GridObjective { points, values, metric_norm }
    }

    fn locate(&self, x: &Vector) -> Result<usize, EkelandError> {
        self.points
            .iter()
            .position(|p| p.approx_eq(x, 1e-9))
            .ok_or_else(|| EkelandError::Oracle("query point is not on the grid".into()))
    }
}

impl DescentOracle for GridObjective {
    fn value(&self, x: &Vector) -> Result<f64, EkelandError> {
        Ok(self.values[self.locate(x)?])
    }

    fn metric(&self, a: &Vector, b: &Vector) -> Result<f64, EkelandError> {
        Ok(eval_norm(&self.metric_norm, &a.sub(b))?)
    }

    fn infimum(&self) -> Result<f64, EkelandError> {
        Ok(self.values.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    fn perturbed_argmin(&self, c: f64, anchor: &Vector) -> Result<Vector, EkelandError> {
        let mut best = 0usize;
        let mut best_val = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let v = self.values[i] + c * self.metric(p, anchor)?;
            if v < best_val - 1e-15 {
                best_val = v;
                best = i;
            }
        }
        Ok(self.points[best].clone())
    }
}

/// The separation objective: `f(u1,…,un) = prodnorm(u1−un, …, u_{n−1}−un)`
/// over the product of polyhedral sets, with the metric induced by a
/// product norm on the full tuple. All argmin calls are single exact LPs
/// in epigraph form.
#[derive(Clone, Debug)]
pub struct ProductObjective {
    blocks: Vec<(Vec<Vector>, Vec<f64>)>,
    norm: ProductNormSpec,
    norm_plus: ProductNormSpec,
    n: usize,
    d: usize,
}

impl ProductObjective {
    /// Builds the objective from the component sets (each must convert to
    /// a single half-space system) and the two product norms: `norm` on
    /// the (n−1)-tuple of differences, `norm_plus` on the full n-tuple.
    pub fn new(
        sets: &[SetExpr],
        norm: &ProductNormSpec,
        norm_plus: &ProductNormSpec,
    ) -> Result<Self, EkelandError> {
        let n = sets.len();
        if n < 2 {
            return Err(EkelandError::Invalid(format!("need at least two sets, got {n}")));
        }
        let d = sets[0].dim();
        let mut blocks = Vec::with_capacity(n);
        for s in sets {
            if s.dim() != d {
                return Err(EkelandError::Invalid(format!(
                    "sets live in mixed dimensions {d} and {}",
                    s.dim()
                )));
            }
            blocks.push(s.as_polyhedron().ok_or_else(|| {
                EkelandError::Invalid(
                    "every set must be a polyhedron (or polytope ball) for the exact \
                     descent oracle"
                        .into(),
                )
            })?);
        }
        if norm.n != n - 1 || norm_plus.n != n {
            return Err(EkelandError::Invalid(format!(
                "product norms must have {} and {n} blocks, got {} and {}",
                n - 1,
                norm.n,
                norm_plus.n
            )));
        }
        if !prod_lp_representable(norm, d) || !prod_lp_representable(norm_plus, d) {
            return Err(EkelandError::Invalid(
                "both product norms must be LP-encodable for the exact descent oracle".into(),
            ));
        }
        Ok(ProductObjective { blocks, norm: norm.clone(), norm_plus: norm_plus.clone(), n, d })
    }

    pub fn tuple_dim(&self) -> usize {
        self.n * self.d
    }

    /// Linear expressions of the difference tuple `(u1−un, …, u_{n−1}−un)`.
    fn diff_lins(&self) -> Vec<Vec<Lin>> {
        let (n, d) = (self.n, self.d);
        (0..n - 1)
            .map(|i| {
                (0..d)
                    .map(|j| Lin::term(i * d + j, 1.0).plus(&Lin::term((n - 1) * d + j, -1.0)))
                    .collect()
            })
            .collect()
    }

    /// Adds the feasibility rows `u_i ∈ Ω_i` for the tuple variables
    /// `0..n·d` of `b`.
    fn feasibility_rows(&self, b: &mut LpBuilder) {
        for (i, (rows, bounds)) in self.blocks.iter().enumerate() {
            for (a, bb) in rows.iter().zip(bounds) {
                let mut lhs = Lin::constant(0.0);
                for (j, &coef) in a.iter().enumerate() {
                    if coef != 0.0 {
                        lhs = lhs.plus(&Lin::term(i * self.d + j, coef));
                    }
                }
                b.le(&lhs, &Lin::constant(*bb));
            }
        }
    }

    fn solve_point(&self, b: &LpBuilder) -> Result<(Vector, f64), EkelandError> {
        match b.solve()? {
            LpOutcome::Optimal(sol) => {
                let u = Vector::new(sol.point.as_slice()[..self.tuple_dim()].to_vec());
                Ok((u, sol.value))
            }
            LpOutcome::Infeasible { .. } => {
                Err(EkelandError::Oracle("feasible product set is empty".into()))
            }
            LpOutcome::Unbounded { .. } => {
                Err(EkelandError::Oracle("descent objective is unbounded".into()))
            }
        }
    }
}

impl DescentOracle for ProductObjective {
    fn value(&self, x: &Vector) -> Result<f64, EkelandError> {
        if x.dim() != self.tuple_dim() {
            return Err(EkelandError::Invalid(format!(
                "expected a {}-dimensional tuple, got {}",
                self.tuple_dim(),
                x.dim()
            )));
        }
        let blocks = crate::vector::split_blocks(x, self.n);
        Ok(crate::norms::prod_eval(&self.norm, &crate::vector::diffs_against_last(&blocks))?)
    }

    fn metric(&self, a: &Vector, b: &Vector) -> Result<f64, EkelandError> {
        Ok(prod_eval_flat(&self.norm_plus, &a.sub(b))?)
    }

    fn infimum(&self) -> Result<f64, EkelandError> {
        let mut b = LpBuilder::new();
        let _u = b.fresh_block(self.tuple_dim());
        let s = b.fresh();
        self.feasibility_rows(&mut b);
        prod_norm_le(&mut b, &self.norm, &self.diff_lins(), &Lin::var(s))?;
        b.nonneg(s);
        b.minimize(Lin::var(s));
        Ok(self.solve_point(&b)?.1)
    }

    fn perturbed_argmin(&self, c: f64, anchor: &Vector) -> Result<Vector, EkelandError> {
        let nd = self.tuple_dim();
        if anchor.dim() != nd {
            return Err(EkelandError::Invalid(format!(
                "anchor has dimension {}, expected {nd}",
                anchor.dim()
            )));
        }
        let mut b = LpBuilder::new();
        let _u = b.fresh_block(nd);
        let s = b.fresh();
        let t = b.fresh();
        self.feasibility_rows(&mut b);
        prod_norm_le(&mut b, &self.norm, &self.diff_lins(), &Lin::var(s))?;
        let shifted: Vec<Vec<Lin>> = (0..self.n)
            .map(|i| {
                (0..self.d)
                    .map(|j| Lin::term(i * self.d + j, 1.0).shifted(-anchor[i * self.d + j]))
                    .collect()
            })
            .collect();
        prod_norm_le(&mut b, &self.norm_plus, &shifted, &Lin::var(t))?;
        b.nonneg(s);
        b.nonneg(t);
        b.minimize(Lin::combine(&[(1.0, &Lin::var(s)), (c, &Lin::var(t))]));
        Ok(self.solve_point(&b)?.0)
    }
}

/// The stabilized near-minimizer of the separation objective, with the
/// numbers the downstream proof steps consume.
#[derive(Clone, Debug)]
pub struct Claim1 {
    /// The point as one block per set.
    pub blocks: Vec<Vector>,
    /// Objective value at the point (positive iff the sets stay apart
    /// along the tuple).
    pub value: f64,
    /// Tuple-norm distance from the starting tuple; at most `delta`.
    pub distance: f64,
    /// Whether the distance is strictly inside `delta` (up to 1e−12);
    /// ties are reported, not failed.
    pub strictly_inside: bool,
    /// Full descent record, including the verified perturbation
    /// inequality residual.
    pub descent: EkelandResult,
}

/// Runs the descent on the separation objective from the tuple
/// `omega_hat` with slack `eps_prime` and radius `delta`: the returned
/// point minimizes `f(u) + (eps_prime/delta)·tuple_norm(u − x)` exactly
/// over the product set.
pub fn claim1_point(
    sets: &[SetExpr],
    omega_hat: &[Vector],
    eps_prime: f64,
    delta: f64,
    norm: &ProductNormSpec,
    norm_plus: &ProductNormSpec,
    tol: f64,
) -> Result<Claim1, EkelandError> {
    let oracle = ProductObjective::new(sets, norm, norm_plus)?;
    if omega_hat.len() != sets.len() {
        return Err(EkelandError::Invalid(format!(
            "starting tuple has {} blocks for {} sets",
            omega_hat.len(),
            sets.len()
        )));
    }
    for (s, w) in sets.iter().zip(omega_hat) {
        if !s.contains(w, tol)? {
            return Err(EkelandError::Invalid(
                "starting tuple must lie in the product set".into(),
            ));
        }
    }
    let x0 = crate::vector::flatten(omega_hat);
    let r = ekeland_descent(&oracle, &x0, eps_prime, delta, tol)?;
    Ok(Claim1 {
        blocks: crate::vector::split_blocks(&r.point, sets.len()),
        value: r.value,
        distance: r.moved,
        strictly_inside: r.moved <= delta - 1e-12,
        descent: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::ProductKind;

    fn abs_grid() -> GridObjective {
        // f(x) = |x| tabulated on [−1, 1] at step 1e−3.
        let mut points = Vec::new();
        let mut values = Vec::new();
        for i in -1000..=1000 {
            let x = (i as f64) / 1000.0;
            points.push(Vector::new(alloc::vec![x]));
            values.push(x.abs());
        }
        GridObjective::new(points, values, NormSpec::Euclidean)
    }

    #[test]
    fn abs_on_grid_descends_to_zero() {
        let g = abs_grid();
        let x0 = Vector::new(alloc::vec![0.5]);
        let r = ekeland_descent(&g, &x0, 1.0, 1.0, 1e-9).unwrap();
        assert!(r.point.approx_eq(&Vector::zeros(1), 1e-12));
        assert!(r.moved <= 1.0 + 1e-9);
        assert!(r.value_change <= 0.0);
        assert!(r.worst_violation <= 1e-9);
        // Independent check of the perturbation inequality over the grid.
        for (p, v) in g.points.iter().zip(&g.values) {
            assert!(v + 1.0 * p.sub(&r.point).norm2() >= r.value - 1e-12);
        }
    }

    #[test]
    fn global_minimizer_stays_put() {
        let g = abs_grid();
        let x0 = Vector::zeros(1);
        let r = ekeland_descent(&g, &x0, 0.5, 1.0, 1e-9).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.point.approx_eq(&x0, 1e-12));
        assert_eq!(r.moved, 0.0);
        assert_eq!(r.value_change, 0.0);
    }

    #[test]
    fn premise_failure_is_reported() {
        let g = abs_grid();
        // f(0.5) = 0.5 = inf + 0.5, so eps = 0.3 violates the premise.
        let r = ekeland_descent(&g, &Vector::new(alloc::vec![0.5]), 0.3, 1.0, 1e-9);
        assert!(matches!(r, Err(EkelandError::PremiseFailed { .. })));
    }

    fn half_lines() -> Vec<SetExpr> {
        alloc::vec![
            SetExpr::halfspace(Vector::new(alloc::vec![1.0]), 0.0),
            SetExpr::halfspace(Vector::new(alloc::vec![-1.0]), -1.0),
        ]
    }

    fn pair_norms() -> (ProductNormSpec, ProductNormSpec) {
        let base = NormSpec::linf();
        (
            ProductNormSpec { n: 1, base: base.clone(), kind: ProductKind::Max },
            ProductNormSpec { n: 2, base, kind: ProductKind::Max },
        )
    }

    #[test]
    fn half_lines_optimal_start_is_fixed_point() {
        let sets = half_lines();
        let (norm, norm_plus) = pair_norms();
        let omega = [Vector::new(alloc::vec![0.0]), Vector::new(alloc::vec![1.0])];
        let c1 = claim1_point(&sets, &omega, 0.25, 0.1, &norm, &norm_plus, 1e-9).unwrap();
        assert!(c1.blocks[0].approx_eq(&omega[0], 1e-9));
        assert!(c1.blocks[1].approx_eq(&omega[1], 1e-9));
        assert!((c1.value - 1.0).abs() < 1e-9);
        assert!(c1.value > 0.0);
        assert!(c1.distance < 1e-9);
        assert!(c1.descent.worst_violation <= 1e-8);
    }

    #[test]
    fn parallel_strips_optimal_start_is_fixed_point() {
        // Ω1 = {x2 ≤ 0}, Ω2 = {x2 ≥ 1} in the plane; the start realizes
        // the vertical gap 1.
        let sets = alloc::vec![
            SetExpr::halfspace(Vector::new(alloc::vec![0.0, 1.0]), 0.0),
            SetExpr::halfspace(Vector::new(alloc::vec![0.0, -1.0]), -1.0),
        ];
        let (norm, norm_plus) = pair_norms();
        let omega = [
            Vector::new(alloc::vec![2.0, 0.0]),
            Vector::new(alloc::vec![2.0, 1.0]),
        ];
        let c1 = claim1_point(&sets, &omega, 0.5, 0.25, &norm, &norm_plus, 1e-9).unwrap();
        assert!((c1.value - 1.0).abs() < 1e-9);
        assert!(c1.distance < 1e-9);
    }

    #[test]
    fn suboptimal_start_moves_within_delta_and_decreases() {
        let sets = half_lines();
        let (norm, norm_plus) = pair_norms();
        let omega = [Vector::new(alloc::vec![-0.1]), Vector::new(alloc::vec![1.0])];
        let c1 = claim1_point(&sets, &omega, 0.25, 0.5, &norm, &norm_plus, 1e-9).unwrap();
        assert!(c1.value < 1.1 - 1e-12, "objective must strictly decrease");
        assert!(c1.distance <= 0.5 + 1e-9);
        assert!(c1.strictly_inside);
        assert!(c1.descent.worst_violation <= 1e-8);
        // Grid verification of the perturbation inequality over the
        // product set near the optimum: f(u) + (eps'/delta)·d(u, x̂) ≥ f(x̂).
        let c = 0.25 / 0.5;
        let xh = crate::vector::flatten(&c1.blocks);
        let fxh = c1.value;
        for i in 0..=200 {
            for j in 0..=200 {
                let u1 = -2.0 + 2.0 * (i as f64) / 200.0;
                let u2 = 1.0 + 2.0 * (j as f64) / 200.0;
                let f = (u1 - u2).abs();
                let d = (u1 - xh[0]).abs().max((u2 - xh[1]).abs());
                assert!(f + c * d >= fxh - 1e-9, "violated at ({u1}, {u2})");
            }
        }
    }

    #[test]
    fn lp_infimum_matches_gap() {
        let sets = half_lines();
        let (norm, norm_plus) = pair_norms();
        let oracle = ProductObjective::new(&sets, &norm, &norm_plus).unwrap();
        assert!((oracle.infimum().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn union_member_is_rejected() {
        let sets = alloc::vec![
            SetExpr::Union { members: half_lines() },
            SetExpr::halfspace(Vector::new(alloc::vec![1.0]), 0.0),
        ];
        let (norm, norm_plus) = pair_norms();
        assert!(ProductObjective::new(&sets, &norm, &norm_plus).is_err());
    }
}
