//! Dense two-phase simplex over free variables with `<=` rows.
//!
//! The problem form is
//!
//! ```text
//!     min / max  c . x    subject to    rows[k] . x <= bounds[k],
//! ```
//!
//! with `x` free (sign-unrestricted). Internally each variable splits into a
//! nonnegative pair, rows with negative right-hand sides are flipped and get
//! artificial variables, and phase I minimizes the artificial sum. Bland's
//! rule (lowest eligible index enters; ratio-test ties resolved by lowest
//! basic index) makes the pivot sequence finite and deterministic.
//!
//! Guarantees on return:
//!
//! * `Optimal` — vertex point, objective value, nonnegative row duals, and a
//!   duality residual checked against [`crate::tol::RESIDUAL`];
//! * `Infeasible` — a Farkas certificate `mu >= 0`, `mu^T A = 0`,
//!   `mu^T b < 0`, verified numerically before being returned;
//! * `Unbounded` — an improving recession ray, verified numerically.

#![allow(clippy::needless_range_loop)] // index loops mirror the tableau math

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::PolyError;
use crate::tol::{LP_FEAS, PIVOT, RESIDUAL};
use crate::vector::Vector;

/// Optimization direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `sense (c . x)` subject to `rows[k] . x <= bounds[k]`, `x` free.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vector,
    pub rows: Vec<Vector>,
    pub bounds: Vec<f64>,
}

/// Primal-dual solution of a solvable program.
#[derive(Clone, Debug)]
pub struct LpSolution {
    /// Optimal vertex.
    pub point: Vector,
    /// Objective value at `point` (in the problem's own sense).
    pub value: f64,
    /// Nonnegative row multipliers `lambda`. For `Minimize`:
    /// `A^T lambda = -c` and `value = -b . lambda`; for `Maximize`:
    /// `A^T lambda = c` and `value = b . lambda`.
    pub row_duals: Vec<f64>,
    /// `|primal value - dual value|`; bounded by [`RESIDUAL`] or the solve
    /// errors out.
    pub duality_residual: f64,
}

/// Outcome of [`solve_lp`].
#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal(LpSolution),
    /// `farkas >= 0`, `farkas^T A = 0`, `farkas^T b < 0`: no point satisfies
    /// the rows.
    Infeasible { farkas: Vec<f64> },
    /// Feasible direction along which the objective improves without bound.
    Unbounded { ray: Vector },
}

/// Feasibility verdict for a bare row system (no objective).
#[derive(Clone, Debug)]
pub enum Feasibility {
    Feasible(Vector),
    Infeasible { farkas: Vec<f64> },
}

const MAX_PIVOTS: usize = 50_000;
/// Entries snapped to zero after each pivot; keeps tableaus clean and the
/// pivot sequence deterministic.
const SNAP: f64 = 1e-13;

struct Tableau {
    ncols: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    obj: Vec<f64>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let d = self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            *x /= d;
        }
        self.rhs[r] /= d;
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f != 0.0 {
                for j in 0..self.ncols {
                    self.rows[i][j] -= f * self.rows[r][j];
                    if self.rows[i][j].abs() < SNAP {
                        self.rows[i][j] = 0.0;
                    }
                }
                self.rhs[i] -= f * self.rhs[r];
                if self.rhs[i].abs() < SNAP {
                    self.rhs[i] = 0.0;
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for j in 0..self.ncols {
                self.obj[j] -= f * self.rows[r][j];
                if self.obj[j].abs() < SNAP {
                    self.obj[j] = 0.0;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Bland iteration until optimal; `Ok(None)` on success, `Ok(Some(col))`
    /// when `col` can enter but no row limits it (unbounded).
    fn run(&mut self, allowed: &dyn Fn(usize) -> bool) -> Result<Option<usize>, PolyError> {
        for _ in 0..MAX_PIVOTS {
            let mut enter = None;
            for j in 0..self.ncols {
                if allowed(j) && self.obj[j] < -LP_FEAS {
                    enter = Some(j);
                    break;
                }
            }
            let Some(c) = enter else {
                return Ok(None);
            };
            let mut leave: Option<usize> = None;
            let mut best = f64::INFINITY;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT {
                    let ratio = self.rhs[r] / a;
                    let better = ratio < best - 1e-12;
                    let tied = !better && ratio <= best + 1e-12;
                    if better || (tied && leave.is_some_and(|l| self.basis[r] < self.basis[l])) {
                        best = ratio;
                        leave = Some(r);
                    }
                }
            }
            match leave {
                Some(r) => self.pivot(r, c),
                None => return Ok(Some(c)),
            }
        }
        Err(PolyError::IterationLimit(MAX_PIVOTS))
    }
}

/// Solves the program. See the module docs for the guarantees per outcome.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome, PolyError> {
    let d = lp.objective.dim();
    let m = lp.rows.len();
    if lp.bounds.len() != m {
        return Err(PolyError::DimensionMismatch { expected: m, got: lp.bounds.len() });
    }
    for row in &lp.rows {
        if row.dim() != d {
            return Err(PolyError::DimensionMismatch { expected: d, got: row.dim() });
        }
    }
    // Internal sense is always Minimize.
    let c_int: Vec<f64> = match lp.sense {
        Sense::Minimize => lp.objective.as_slice().to_vec(),
        Sense::Maximize => lp.objective.as_slice().iter().map(|v| -v).collect(),
    };

    // Row flips so every right-hand side is nonnegative.
    let sigma: Vec<f64> = lp.bounds.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
    let art_rows: Vec<usize> = (0..m).filter(|&i| sigma[i] < 0.0).collect();
    let n_art = art_rows.len();
    // Columns: [x+ (d) | x- (d) | slacks (m) | artificials (n_art)].
    let ncols = 2 * d + m + n_art;
    let art_col = |slot: usize| 2 * d + m + slot;

    let mut t = Tableau {
        ncols,
        rows: vec![vec![0.0; ncols]; m],
        rhs: vec![0.0; m],
        basis: vec![0; m],
        obj: vec![0.0; ncols],
    };
    let mut next_slot = 0;
    for i in 0..m {
        for j in 0..d {
            let a = sigma[i] * lp.rows[i][j];
            t.rows[i][j] = a;
            t.rows[i][d + j] = -a;
        }
        t.rows[i][2 * d + i] = sigma[i];
        t.rhs[i] = sigma[i] * lp.bounds[i];
        if sigma[i] < 0.0 {
            let col = art_col(next_slot);
            t.rows[i][col] = 1.0;
            t.basis[i] = col;
            next_slot += 1;
        } else {
            t.basis[i] = 2 * d + i;
        }
    }

    // ---- Phase I ----
    if n_art > 0 {
        for slot in 0..n_art {
            t.obj[art_col(slot)] = 1.0;
        }
        // Canonicalize: basic artificials must have zero reduced cost.
        for i in 0..m {
            if t.basis[i] >= 2 * d + m {
                for j in 0..ncols {
                    t.obj[j] -= t.rows[i][j];
                }
            }
        }
        if let Some(_col) = t.run(&|_| true)? {
            // Phase I objective is bounded below by zero; a missing ratio row
            // would mean the tableau lost feasibility.
            return Err(PolyError::Numerical("phase I reported unbounded".into()));
        }
        let phase1: f64 = (0..m)
            .filter(|&i| t.basis[i] >= 2 * d + m)
            .map(|i| t.rhs[i])
            .sum();
        if phase1 > LP_FEAS {
            // Farkas multipliers: for the original rows these equal the
            // phase-I reduced costs of the slack columns (the sigma factors
            // cancel exactly as for the optimal duals below).
            let mut mu = vec![0.0; m];
            for (i, v) in mu.iter_mut().enumerate() {
                *v = t.obj[2 * d + i];
            }
            let scale = mu.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
            for v in mu.iter_mut() {
                *v /= scale;
                if v.abs() < SNAP {
                    *v = 0.0;
                }
            }
            verify_farkas(lp, &mu)?;
            return Ok(LpOutcome::Infeasible { farkas: mu });
        }
        // Drive residual basic artificials (value ~0) out of the basis where
        // possible; rows that cannot pivot are redundant and stay inert.
        for i in 0..m {
            if t.basis[i] >= 2 * d + m {
                let piv = (0..2 * d + m).find(|&j| t.rows[i][j].abs() > PIVOT);
                if let Some(j) = piv {
                    t.pivot(i, j);
                }
                // If no pivot exists the row is all-zero over the real
                // columns; it stays basic-artificial at zero and never
                // re-enters, which is harmless.
            }
        }
    }

    // ---- Phase II ----
    t.obj = vec![0.0; ncols];
    for j in 0..d {
        t.obj[j] = c_int[j];
        t.obj[d + j] = -c_int[j];
    }
    for i in 0..m {
        let b = t.basis[i];
        let cb = if b < d {
            c_int[b]
        } else if b < 2 * d {
            -c_int[b - d]
        } else {
            0.0
        };
        if cb != 0.0 {
            for j in 0..t.ncols {
                t.obj[j] -= cb * t.rows[i][j];
            }
        }
    }
    let real = move |j: usize| j < 2 * d + m;
    if let Some(col) = t.run(&real)? {
        // Unbounded: build the improving ray and verify it.
        let mut dir = vec![0.0; 2 * d + m];
        dir[col] = 1.0;
        for r in 0..m {
            if t.basis[r] < 2 * d + m {
                dir[t.basis[r]] = -t.rows[r][col];
            }
        }
        let ray = Vector::new((0..d).map(|j| dir[j] - dir[d + j]).collect());
        let scale = ray.norm_inf();
        if scale <= PIVOT {
            return Err(PolyError::Numerical("degenerate unbounded ray".into()));
        }
        let ray = ray.scale(1.0 / scale);
        for (i, row) in lp.rows.iter().enumerate() {
            if row.dot(&ray) > 1e-7 {
                return Err(PolyError::Numerical(format!(
                    "unbounded ray violates row {i}"
                )));
            }
        }
        let drift = c_int.iter().zip(ray.iter()).map(|(c, r)| c * r).sum::<f64>();
        if drift > -1e-9 {
            return Err(PolyError::Numerical("unbounded ray does not improve".into()));
        }
        return Ok(LpOutcome::Unbounded { ray });
    }

    // Optimal: read the vertex and the row duals.
    let mut vals = vec![0.0; ncols];
    for r in 0..m {
        vals[t.basis[r]] = t.rhs[r];
    }
    let point = Vector::new((0..d).map(|j| vals[j] - vals[d + j]).collect());
    let value_min: f64 = c_int.iter().zip(point.iter()).map(|(c, x)| c * x).sum();
    let mut duals = vec![0.0; m];
    for i in 0..m {
        // The slack column of row i has the single coefficient sigma_i, so
        // its reduced cost is -sigma_i * y_i; the multiplier of the
        // original (unflipped) row is lambda_i = -sigma_i y_i, which is the
        // reduced cost itself — nonnegative at a minimization optimum.
        duals[i] = t.obj[2 * d + i];
        if duals[i].abs() < SNAP {
            duals[i] = 0.0;
        }
        if duals[i] < 0.0 {
            if duals[i] < -1e-7 {
                return Err(PolyError::Numerical(format!("negative dual on row {i}")));
            }
            duals[i] = 0.0;
        }
    }
    let dual_value_min: f64 = -(0..m).map(|i| lp.bounds[i] * duals[i]).sum::<f64>();
    let residual = (value_min - dual_value_min).abs();
    if residual > RESIDUAL * (1.0 + value_min.abs()) {
        return Err(PolyError::Numerical(format!(
            "duality residual {residual:.3e} out of tolerance"
        )));
    }
    let value = match lp.sense {
        Sense::Minimize => value_min,
        Sense::Maximize => -value_min,
    };
    Ok(LpOutcome::Optimal(LpSolution {
        point,
        value,
        row_duals: duals,
        duality_residual: residual,
    }))
}

fn verify_farkas(lp: &LinearProgram, mu: &[f64]) -> Result<(), PolyError> {
    let d = lp.objective.dim();
    let mut combo = vec![0.0; d];
    let mut rhs = 0.0;
    for (i, row) in lp.rows.iter().enumerate() {
        if mu[i] < -1e-9 {
            return Err(PolyError::Numerical(format!("farkas multiplier {i} negative")));
        }
        for j in 0..d {
            combo[j] += mu[i] * row[j];
        }
        rhs += mu[i] * lp.bounds[i];
    }
    let comb_norm = combo.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if comb_norm > 1e-7 || rhs > -1e-9 {
        return Err(PolyError::Numerical(format!(
            "farkas certificate failed verification (|mu^T A| = {comb_norm:.3e}, mu^T b = {rhs:.3e})"
        )));
    }
    Ok(())
}

/// Decides `rows[k] . x <= bounds[k]` with a feasible witness or a Farkas
/// certificate.
pub fn polyhedron_feasible(rows: &[Vector], bounds: &[f64]) -> Result<Feasibility, PolyError> {
    let d = rows.first().map(Vector::dim).unwrap_or(0);
    let lp = LinearProgram {
        sense: Sense::Minimize,
        objective: Vector::zeros(d),
        rows: rows.to_vec(),
        bounds: bounds.to_vec(),
    };
    match solve_lp(&lp)? {
        LpOutcome::Optimal(sol) => Ok(Feasibility::Feasible(sol.point)),
        LpOutcome::Infeasible { farkas } => Ok(Feasibility::Infeasible { farkas }),
        LpOutcome::Unbounded { .. } => Err(PolyError::Numerical("zero objective reported unbounded".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn lp(sense: Sense, c: Vec<f64>, rows: Vec<Vec<f64>>, b: Vec<f64>) -> LinearProgram {
        LinearProgram {
            sense,
            objective: Vector::new(c),
            rows: rows.into_iter().map(Vector::new).collect(),
            bounds: b,
        }
    }

    fn expect_opt(out: LpOutcome) -> LpSolution {
        match out {
            LpOutcome::Optimal(s) => s,
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn one_dimensional_bound() {
        // min x subject to -x <= -1, i.e. x >= 1.
        let sol = expect_opt(solve_lp(&lp(Sense::Minimize, vec![1.0], vec![vec![-1.0]], vec![-1.0])).unwrap());
        assert!((sol.value - 1.0).abs() < 1e-9);
        assert!((sol.point[0] - 1.0).abs() < 1e-9);
        assert!(sol.duality_residual <= 1e-7);
    }

    #[test]
    fn box_corner_maximization() {
        // max 3x + 2y over [0,1]^2 -> (1,1), value 5.
        let sol = expect_opt(
            solve_lp(&lp(
                Sense::Maximize,
                vec![3.0, 2.0],
                vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
                vec![1.0, 1.0, 0.0, 0.0],
            ))
            .unwrap(),
        );
        assert!((sol.value - 5.0).abs() < 1e-9);
        assert!(sol.point.approx_eq(&Vector::new(vec![1.0, 1.0]), 1e-9));
        // Maximize duals: A^T lambda = c, value = b . lambda.
        let lam = &sol.row_duals;
        assert!((lam[0] - 3.0).abs() < 1e-7 && (lam[1] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn degenerate_vertex_is_handled() {
        // Three rows through the optimum (0,0) of min x + y with x,y >= 0.
        let sol = expect_opt(
            solve_lp(&lp(
                Sense::Minimize,
                vec![1.0, 1.0],
                vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![-1.0, -1.0]],
                vec![0.0, 0.0, 0.0],
            ))
            .unwrap(),
        );
        assert!(sol.value.abs() < 1e-9);
    }

    #[test]
    fn infeasible_produces_verified_farkas() {
        // x <= 0 and x >= 1.
        let out = solve_lp(&lp(Sense::Minimize, vec![0.0], vec![vec![1.0], vec![-1.0]], vec![0.0, -1.0])).unwrap();
        match out {
            LpOutcome::Infeasible { farkas } => {
                assert!(farkas.iter().all(|&m| m >= 0.0));
                let combo = farkas[0] - farkas[1];
                assert!(combo.abs() < 1e-9);
                assert!(farkas[0] * 0.0 - farkas[1] < -1e-9);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_produces_verified_ray() {
        // min -x with x >= 0: ray +e1.
        let out = solve_lp(&lp(Sense::Minimize, vec![-1.0], vec![vec![-1.0]], vec![0.0])).unwrap();
        match out {
            LpOutcome::Unbounded { ray } => {
                assert!(ray[0] > 0.9);
            }
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn equality_via_row_pair() {
        // min y s.t. x + y = 2 (two rows), x <= 1 -> y >= 1.
        let sol = expect_opt(
            solve_lp(&lp(
                Sense::Minimize,
                vec![0.0, 1.0],
                vec![vec![1.0, 1.0], vec![-1.0, -1.0], vec![1.0, 0.0]],
                vec![2.0, -2.0, 1.0],
            ))
            .unwrap(),
        );
        assert!((sol.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn feasibility_wrapper_reports_both_ways() {
        let ok = polyhedron_feasible(
            &[Vector::new(vec![1.0, 0.0]), Vector::new(vec![-1.0, 0.0])],
            &[1.0, 0.0],
        )
        .unwrap();
        assert!(matches!(ok, Feasibility::Feasible(_)));
        let bad = polyhedron_feasible(
            &[Vector::new(vec![1.0, 0.0]), Vector::new(vec![-1.0, 0.0])],
            &[-2.0, 1.0],
        )
        .unwrap();
        assert!(matches!(bad, Feasibility::Infeasible { .. }));
    }
}
