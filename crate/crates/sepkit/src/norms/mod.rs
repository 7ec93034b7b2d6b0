//! Base-space norms with exact dual calculus.
//!
//! A [`NormSpec`] describes a norm on `R^d` in one of five families:
//! Euclidean, `l_p`, entrywise-weighted `l_p`, and polyhedral norms given
//! either by unit-ball vertices or by facet functionals. Every family is
//! closed under duality ([`dual_norm_spec`] is exact, no approximation), and
//! every polyhedral or `l_1`/`l_inf` norm admits an exact linear epigraph
//! encoding ([`norm_le`]) so downstream optimization stays inside the LP
//! kernel. [`dual_attainer`] produces the subgradient certificates used by
//! the separation pipeline: a functional of dual norm one aligned with a
//! given vector.

mod kappa;
mod product;

pub use kappa::{
    estimate_kappa, kappa_ratio, verify_relations, Compatibility, CompatibilityReport,
    RelationReport,
};
pub use product::{
    check_monotone, check_triangle, compose_monotone, phi_dual_attainer, phi_dual_kind, phi_eval,
    prod_dual_attainer, prod_dual_spec, prod_eval, prod_eval_flat, prod_lp_representable,
    prod_norm_le, skew_abs_norm, validate_product, MonotoneReport, ProductKind, ProductNormSpec,
};
pub(crate) use product::{phi_lp_representable, phi_norm_le};

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::polysolve::{Lin, LpBuilder, LpOutcome, PolyError};
use crate::vector::Vector;

/// Errors from norm construction and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum NormError {
    #[error("invalid norm specification: {0}")]
    InvalidSpec(String),
    #[error("norm has no exact linear encoding: {0}")]
    NotRepresentable(String),
    #[error("dual attainment is undefined at the zero vector")]
    ZeroVector,
    #[error("linear solver failed inside norm evaluation: {0}")]
    Solver(String),
}

impl From<PolyError> for NormError {
    fn from(e: PolyError) -> Self {
        NormError::Solver(format!("{e}"))
    }
}

/// A norm on a finite-dimensional base space.
#[derive(Clone, Debug, PartialEq)]
pub enum NormSpec {
    /// `||x||_2`.
    Euclidean,
    /// `||x||_p` with `p` in `[1, +inf]` (`f64::INFINITY` for the max norm).
    Lp { p: f64 },
    /// `|| (w_1 x_1, ..., w_d x_d) ||_p` with strictly positive weights.
    WeightedLp { p: f64, weights: Vec<f64> },
    /// Gauge of the symmetric polytope `conv(vertices)`.
    Polyhedral { vertices: Vec<Vector> },
    /// `max_k <f_k, x>` over a symmetric facet family: the gauge of
    /// `{ x : <f_k, x> <= 1 for all k }`.
    PolyhedralH { facets: Vec<Vector> },
}

impl NormSpec {
    /// Shorthand for the `l_inf` norm.
    pub fn linf() -> NormSpec {
        NormSpec::Lp { p: f64::INFINITY }
    }

    /// Shorthand for the `l_1` norm.
    pub fn l1() -> NormSpec {
        NormSpec::Lp { p: 1.0 }
    }
}

fn check_p(p: f64) -> Result<(), NormError> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(NormError::InvalidSpec(format!("p must lie in [1, +inf], got {p}")))
    }
}

/// Validates a specification against the ambient dimension: positive
/// weights, symmetric generator/facet families, and full span (which makes
/// polyhedral balls bounded with nonempty interior, hence genuine norms).
pub fn validate(spec: &NormSpec, dim: usize) -> Result<(), NormError> {
    match spec {
        NormSpec::Euclidean => Ok(()),
        NormSpec::Lp { p } => check_p(*p),
        NormSpec::WeightedLp { p, weights } => {
            check_p(*p)?;
            if weights.len() != dim {
                return Err(NormError::InvalidSpec(format!(
                    "expected {dim} weights, got {}",
                    weights.len()
                )));
            }
            if weights.iter().any(|&w| w <= 0.0 || !w.is_finite()) {
                return Err(NormError::InvalidSpec(String::from(
                    "weights must be strictly positive and finite",
                )));
            }
            Ok(())
        }
        NormSpec::Polyhedral { vertices } => check_symmetric_spanning(vertices, dim, "vertex"),
        NormSpec::PolyhedralH { facets } => check_symmetric_spanning(facets, dim, "facet"),
    }
}

fn check_symmetric_spanning(family: &[Vector], dim: usize, what: &str) -> Result<(), NormError> {
    if family.is_empty() {
        return Err(NormError::InvalidSpec(format!("empty {what} family")));
    }
    for v in family {
        if v.dim() != dim {
            return Err(NormError::InvalidSpec(format!(
                "{what} dimension {} does not match space dimension {dim}",
                v.dim()
            )));
        }
        if v.norm2() <= 1e-12 {
            return Err(NormError::InvalidSpec(format!("zero {what} vector")));
        }
        if !family.iter().any(|u| u.approx_eq(&v.neg(), 1e-9)) {
            return Err(NormError::InvalidSpec(format!(
                "{what} family is not symmetric: missing the opposite of {:?}",
                v.as_slice()
            )));
        }
    }
    if crate::polysolve::rank(family, 1e-9) < dim {
        return Err(NormError::InvalidSpec(format!(
            "{what} family does not span the space; the unit ball is degenerate"
        )));
    }
    Ok(())
}

/// Convenience: closes a point family under sign symmetry.
pub fn symmetric_hull(points: &[Vector]) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(2 * points.len());
    for p in points {
        out.push(p.clone());
    }
    for p in points {
        let n = p.neg();
        if !out.iter().any(|u| u.approx_eq(&n, 1e-12)) {
            out.push(n);
        }
    }
    out
}

/// Evaluates the norm. Polyhedral vertex form solves one small gauge LP;
/// every other family is closed form.
pub fn eval_norm(spec: &NormSpec, x: &Vector) -> Result<f64, NormError> {
    match spec {
        NormSpec::Euclidean => Ok(x.norm2()),
        NormSpec::Lp { p } => {
            check_p(*p)?;
            Ok(lp_of(x.as_slice(), *p))
        }
        NormSpec::WeightedLp { p, weights } => {
            validate(spec, x.dim())?;
            let scaled: Vec<f64> = x.iter().zip(weights).map(|(xi, w)| xi * w).collect();
            Ok(lp_of(&scaled, *p))
        }
        NormSpec::PolyhedralH { facets } => {
            validate(spec, x.dim())?;
            let mut best = 0.0f64;
            for f in facets {
                best = best.max(f.dot(x));
            }
            Ok(best)
        }
        NormSpec::Polyhedral { vertices } => {
            validate(spec, x.dim())?;
            gauge_of_hull(vertices, x)
        }
    }
}

fn lp_of(xs: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        xs.iter().fold(0.0, |m, &v| m.max(v.abs()))
    } else if p == 1.0 {
        xs.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        libm::sqrt(xs.iter().map(|v| v * v).sum())
    } else {
        let s: f64 = xs.iter().map(|&v| libm::pow(v.abs(), p)).sum();
        libm::pow(s, 1.0 / p)
    }
}

/// Minkowski gauge of `conv(vertices)` at `x`:
/// `min { sum s_j : sum s_j v_j = x, s >= 0 }`.
fn gauge_of_hull(vertices: &[Vector], x: &Vector) -> Result<f64, NormError> {
    if x.norm2() == 0.0 {
        return Ok(0.0);
    }
    let d = x.dim();
    let mut b = LpBuilder::new();
    let s = b.fresh_block(vertices.len());
    for &sj in &s {
        b.nonneg(sj);
    }
    for i in 0..d {
        let mut lin = Lin::constant(0.0);
        for (j, v) in vertices.iter().enumerate() {
            if v[i] != 0.0 {
                lin = lin.plus(&Lin::term(s[j], v[i]));
            }
        }
        b.eq(&lin, &Lin::constant(x[i]));
    }
    let mut obj = Lin::constant(0.0);
    for &sj in &s {
        obj = obj.plus(&Lin::var(sj));
    }
    b.minimize(obj);
    match b.solve()? {
        LpOutcome::Optimal(sol) => Ok(sol.value.max(0.0)),
        LpOutcome::Infeasible { .. } => Err(NormError::InvalidSpec(String::from(
            "vertex family does not span the space at this point",
        ))),
        LpOutcome::Unbounded { .. } => Err(NormError::Solver(String::from(
            "gauge program unbounded; vertex family is degenerate",
        ))),
    }
}

/// The exact dual specification. Every family is closed under duality:
/// `l_p` pairs with `l_q`, weights invert, and the two polyhedral forms
/// swap (support of a hull is a facet maximum; the polar of a facet ball is
/// the hull of the facet vectors).
pub fn dual_norm_spec(spec: &NormSpec) -> Result<NormSpec, NormError> {
    Ok(match spec {
        NormSpec::Euclidean => NormSpec::Euclidean,
        NormSpec::Lp { p } => {
            check_p(*p)?;
            NormSpec::Lp { p: conjugate(*p) }
        }
        NormSpec::WeightedLp { p, weights } => NormSpec::WeightedLp {
            p: conjugate(*p),
            weights: weights.iter().map(|w| 1.0 / w).collect(),
        },
        NormSpec::Polyhedral { vertices } => NormSpec::PolyhedralH { facets: vertices.clone() },
        NormSpec::PolyhedralH { facets } => NormSpec::Polyhedral { vertices: facets.clone() },
    })
}

/// Hölder conjugate exponent.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Dual norm value `max { <y, x> : norm(x) <= 1 }`, via the exact dual spec.
pub fn dual_eval(spec: &NormSpec, y: &Vector) -> Result<f64, NormError> {
    eval_norm(&dual_norm_spec(spec)?, y)
}

/// True when [`norm_le`] has an exact encoding for this family in any
/// dimension (one-dimensional coordinates are additionally always exact).
pub fn lp_representable(spec: &NormSpec) -> bool {
    match spec {
        NormSpec::Euclidean => false,
        NormSpec::Lp { p } => *p == 1.0 || p.is_infinite(),
        NormSpec::WeightedLp { p, .. } => *p == 1.0 || p.is_infinite(),
        NormSpec::Polyhedral { .. } | NormSpec::PolyhedralH { .. } => true,
    }
}

/// Appends rows encoding `norm(coords) <= bound` to the program. The
/// encoding is an exact epigraph: it neither cuts feasible points nor adds
/// spurious ones (auxiliary variables are existentially quantified).
pub fn norm_le(
    b: &mut LpBuilder,
    spec: &NormSpec,
    coords: &[Lin],
    bound: &Lin,
) -> Result<(), NormError> {
    let d = coords.len();
    // Any norm of a single coordinate is a positive multiple of |c|.
    if d == 1 {
        let unit = eval_norm(spec, &Vector::new(alloc::vec![1.0]))?;
        b.le(&coords[0].scaled(unit), bound);
        b.le(&coords[0].scaled(-unit), bound);
        return Ok(());
    }
    match spec {
        NormSpec::Lp { p } if p.is_infinite() => {
            for c in coords {
                b.le(c, bound);
                b.le(&c.scaled(-1.0), bound);
            }
            Ok(())
        }
        NormSpec::Lp { p } if *p == 1.0 => {
            let s = b.fresh_block(d);
            for (i, c) in coords.iter().enumerate() {
                b.le(c, &Lin::var(s[i]));
                b.le(&c.scaled(-1.0), &Lin::var(s[i]));
            }
            let mut total = Lin::constant(0.0);
            for &si in &s {
                total = total.plus(&Lin::var(si));
            }
            b.le(&total, bound);
            Ok(())
        }
        NormSpec::WeightedLp { p, weights } if p.is_infinite() => {
            for (c, &w) in coords.iter().zip(weights) {
                b.le(&c.scaled(w), bound);
                b.le(&c.scaled(-w), bound);
            }
            Ok(())
        }
        NormSpec::WeightedLp { p, weights } if *p == 1.0 => {
            let s = b.fresh_block(d);
            for (i, (c, &w)) in coords.iter().zip(weights).enumerate() {
                b.le(&c.scaled(w), &Lin::var(s[i]));
                b.le(&c.scaled(-w), &Lin::var(s[i]));
            }
            let mut total = Lin::constant(0.0);
            for &si in &s {
                total = total.plus(&Lin::var(si));
            }
            b.le(&total, bound);
            Ok(())
        }
        NormSpec::PolyhedralH { facets } => {
            for f in facets {
                let mut lin = Lin::constant(0.0);
                for (i, c) in coords.iter().enumerate() {
                    if f[i] != 0.0 {
                        lin = lin.plus(&c.scaled(f[i]));
                    }
                }
                b.le(&lin, bound);
            }
            Ok(())
        }
        NormSpec::Polyhedral { vertices } => {
            // gauge(x) <= t  iff  x = sum s_j v_j with s >= 0, sum s_j <= t.
            let s = b.fresh_block(vertices.len());
            for &sj in &s {
                b.nonneg(sj);
            }
            for (i, c) in coords.iter().enumerate() {
                let mut lin = Lin::constant(0.0);
                for (j, v) in vertices.iter().enumerate() {
                    if v[i] != 0.0 {
                        lin = lin.plus(&Lin::term(s[j], v[i]));
                    }
                }
                b.eq(&lin, c);
            }
            let mut total = Lin::constant(0.0);
            for &sj in &s {
                total = total.plus(&Lin::var(sj));
            }
            b.le(&total, bound);
            Ok(())
        }
        other => Err(NormError::NotRepresentable(format!("{other:?}"))),
    }
}

/// Returns `v` with `dual(v) = 1` and `<v, w> = norm(w)` — the subgradient
/// certificate of the norm at `w != 0`.
pub fn dual_attainer(spec: &NormSpec, w: &Vector) -> Result<Vector, NormError> {
    let value = eval_norm(spec, w)?;
    if value <= 0.0 {
        return Err(NormError::ZeroVector);
    }
    let v = match spec {
        NormSpec::Euclidean => w.scale(1.0 / value),
        NormSpec::Lp { p } => lp_attainer(w.as_slice(), *p, value),
        NormSpec::WeightedLp { p, weights } => {
            // Reduce to the unweighted case through z_i = w_i * weight_i.
            let z: Vec<f64> = w.iter().zip(weights).map(|(wi, s)| wi * s).collect();
            let a = lp_attainer(&z, *p, value);
            Vector::new(a.iter().zip(weights).map(|(ai, s)| ai * s).collect())
        }
        NormSpec::PolyhedralH { facets } => {
            let mut best = 0usize;
            let mut best_val = f64::NEG_INFINITY;
            for (k, f) in facets.iter().enumerate() {
                let val = f.dot(w);
                if val > best_val {
                    best_val = val;
                    best = k;
                }
            }
            facets[best].clone()
        }
        NormSpec::Polyhedral { vertices } => {
            // maximize <y, w> over <y, v_j> <= 1: complementary slackness
            // forces the optimum to touch the dual ball boundary.
            let mut b = LpBuilder::new();
            let y = b.fresh_block(w.dim());
            for v in vertices {
                let mut lin = Lin::constant(0.0);
                for (i, &yi) in y.iter().enumerate() {
                    if v[i] != 0.0 {
                        lin = lin.plus(&Lin::term(yi, v[i]));
                    }
                }
                b.le(&lin, &Lin::constant(1.0));
            }
            let mut obj = Lin::constant(0.0);
            for (i, &yi) in y.iter().enumerate() {
                if w[i] != 0.0 {
                    obj = obj.plus(&Lin::term(yi, w[i]));
                }
            }
            b.maximize(obj);
            match b.solve()? {
                LpOutcome::Optimal(sol) => {
                    Vector::new(y.iter().map(|&i| sol.point[i]).collect())
                }
                _ => {
                    return Err(NormError::Solver(String::from(
                        "support program for hull norm not optimal",
                    )))
                }
            }
        }
    };
    Ok(v)
}

fn lp_attainer(w: &[f64], p: f64, value: f64) -> Vector {
    if p.is_infinite() {
        // Lowest-index coordinate attaining the maximum modulus.
        let mut best = 0usize;
        let mut best_val = f64::NEG_INFINITY;
        for (i, &wi) in w.iter().enumerate() {
            if wi.abs() > best_val {
                best_val = wi.abs();
                best = i;
            }
        }
        let mut data = alloc::vec![0.0; w.len()];
        data[best] = if w[best] >= 0.0 { 1.0 } else { -1.0 };
        Vector::new(data)
    } else if p == 1.0 {
        Vector::new(w.iter().map(|&wi| if wi > 0.0 { 1.0 } else if wi < 0.0 { -1.0 } else { 0.0 }).collect())
    } else {
        Vector::new(
            w.iter()
                .map(|&wi| {
                    let m = libm::pow(wi.abs() / value, p - 1.0);
                    if wi >= 0.0 {
                        m
                    } else {
                        -m
                    }
                })
                .collect(),
        )
    }
}

/// Largest `c` with `norm(x) >= c * ||x||_2` for all `x`: the equivalence
/// constant certifying lower bounds on the fallback distance path.
pub fn euclid_lower_factor(spec: &NormSpec, dim: usize) -> f64 {
    match spec {
        NormSpec::Euclidean => 1.0,
        NormSpec::Lp { p } => {
            if *p <= 2.0 {
                1.0
            } else if p.is_infinite() {
                libm::pow(dim as f64, -0.5)
            } else {
                libm::pow(dim as f64, 1.0 / p - 0.5)
            }
        }
        NormSpec::WeightedLp { p, weights } => {
            let min_w = weights.iter().fold(f64::INFINITY, |m, &w| m.min(w));
            euclid_lower_factor(&NormSpec::Lp { p: *p }, dim) * min_w
        }
        NormSpec::Polyhedral { vertices } => {
            let r = vertices.iter().fold(0.0f64, |m, v| m.max(v.norm2()));
            if r > 0.0 {
                1.0 / r
            } else {
                0.0
            }
        }
        NormSpec::PolyhedralH { facets } => {
            match crate::polysolve::polytope_vertices(facets, &alloc::vec![1.0; facets.len()]) {
                Ok((verts, _)) => {
                    let r = verts.iter().fold(0.0f64, |m, v| m.max(v.norm2()));
                    if r > 0.0 {
                        1.0 / r
                    } else {
                        0.0
                    }
                }
                Err(_) => 0.0,
            }
        }
    }
}

/// Facet functionals of the unit ball, when the ball is a polytope.
/// Scaled so the ball is exactly `{ x : <f, x> <= 1 }`.
pub fn ball_halfspaces(spec: &NormSpec, dim: usize) -> Option<Vec<Vector>> {
    match spec {
        NormSpec::PolyhedralH { facets } => Some(facets.clone()),
        NormSpec::Polyhedral { .. } => {
            match dual_norm_spec(spec) {
                // Facets of conv(V) are the unit-ball vertices of the dual
                // norm, which is the facet-form norm with facets = V.
                Ok(dual) => ball_vertices(&dual, dim),
                Err(_) => None,
            }
        }
        NormSpec::Lp { p } if p.is_infinite() => {
            let mut rows = Vec::with_capacity(2 * dim);
            for i in 0..dim {
                rows.push(Vector::basis(dim, i));
                rows.push(Vector::basis(dim, i).neg());
            }
            Some(rows)
        }
        NormSpec::Lp { p } if *p == 1.0 => Some(sign_patterns(dim, &alloc::vec![1.0; dim])),
        NormSpec::WeightedLp { p, weights } if p.is_infinite() => {
            let mut rows = Vec::with_capacity(2 * dim);
            for (i, &w) in weights.iter().enumerate().take(dim) {
                rows.push(Vector::basis(dim, i).scale(w));
                rows.push(Vector::basis(dim, i).scale(-w));
            }
            Some(rows)
        }
        NormSpec::WeightedLp { p, weights } if *p == 1.0 => Some(sign_patterns(dim, weights)),
        _ => None,
    }
}

/// Vertices of the unit ball, when the ball is a polytope.
pub fn ball_vertices(spec: &NormSpec, dim: usize) -> Option<Vec<Vector>> {
    match spec {
        NormSpec::Polyhedral { vertices } => Some(vertices.clone()),
        NormSpec::PolyhedralH { facets } => {
            crate::polysolve::polytope_vertices(facets, &alloc::vec![1.0; facets.len()])
                .ok()
                .map(|(v, _)| v)
        }
        NormSpec::Lp { p } if p.is_infinite() => Some(sign_patterns(dim, &alloc::vec![1.0; dim])),
        NormSpec::Lp { p } if *p == 1.0 => {
            let mut verts = Vec::with_capacity(2 * dim);
            for i in 0..dim {
                verts.push(Vector::basis(dim, i));
                verts.push(Vector::basis(dim, i).neg());
            }
            Some(verts)
        }
        NormSpec::WeightedLp { p, weights } if p.is_infinite() => {
            Some(sign_patterns(dim, &weights.iter().map(|w| 1.0 / w).collect::<Vec<_>>()))
        }
        NormSpec::WeightedLp { p, weights } if *p == 1.0 => {
            let mut verts = Vec::with_capacity(2 * dim);
            for (i, &w) in weights.iter().enumerate().take(dim) {
                verts.push(Vector::basis(dim, i).scale(1.0 / w));
                verts.push(Vector::basis(dim, i).scale(-1.0 / w));
            }
            Some(verts)
        }
        _ => None,
    }
}

/// All `2^d` sign patterns scaled by per-coordinate magnitudes.
fn sign_patterns(dim: usize, mags: &[f64]) -> Vec<Vector> {
    let mut out = Vec::with_capacity(1 << dim);
    for mask in 0..(1usize << dim) {
        let data: Vec<f64> = (0..dim)
            .map(|i| if mask & (1 << i) != 0 { -mags[i] } else { mags[i] })
            .collect();
        out.push(Vector::new(data));
    }
    out
}

/// Checks absolute homogeneity and the triangle inequality on sampled
/// points; returns the first violation as a message.
pub fn check_norm_axioms(
    spec: &NormSpec,
    dim: usize,
    sampler: &mut crate::sample::Sampler,
    samples: usize,
) -> Result<(), String> {
    for _ in 0..samples {
        let x = sampler.in_cube(dim, 2.0);
        let y = sampler.in_cube(dim, 2.0);
        let t = sampler.uniform(-3.0, 3.0);
        let nx = eval_norm(spec, &x).map_err(|e| format!("{e}"))?;
        let ny = eval_norm(spec, &y).map_err(|e| format!("{e}"))?;
        let nxy = eval_norm(spec, &x.add(&y)).map_err(|e| format!("{e}"))?;
        if nxy > nx + ny + 1e-7 {
            return Err(format!(
                "triangle violation: n(x+y)={nxy} > {nx}+{ny} at x={:?} y={:?}",
                x.as_slice(),
                y.as_slice()
            ));
        }
        let ntx = eval_norm(spec, &x.scale(t)).map_err(|e| format!("{e}"))?;
        if (ntx - t.abs() * nx).abs() > 1e-7 * (1.0 + ntx.abs()) {
            return Err(format!("homogeneity violation at t={t}, x={:?}", x.as_slice()));
        }
    }
    Ok(())
}

/// Boxed product kind helper used by spec constructors.
pub fn boxed(kind: ProductKind) -> Box<ProductKind> {
    Box::new(kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Sampler;
    use alloc::vec;

    fn diamond() -> NormSpec {
        NormSpec::Polyhedral {
            vertices: vec![
                Vector::new(vec![1.0, 0.0]),
                Vector::new(vec![-1.0, 0.0]),
                Vector::new(vec![0.0, 1.0]),
                Vector::new(vec![0.0, -1.0]),
            ],
        }
    }

    #[test]
    fn lp_values_match_closed_forms() {
        let x = Vector::new(vec![3.0, -4.0]);
        assert!((eval_norm(&NormSpec::Euclidean, &x).unwrap() - 5.0).abs() < 1e-12);
        assert!((eval_norm(&NormSpec::l1(), &x).unwrap() - 7.0).abs() < 1e-12);
        assert!((eval_norm(&NormSpec::linf(), &x).unwrap() - 4.0).abs() < 1e-12);
        let p3 = eval_norm(&NormSpec::Lp { p: 3.0 }, &x).unwrap();
        assert!((p3 - libm::pow(27.0 + 64.0, 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn hull_gauge_matches_l1() {
        let x = Vector::new(vec![0.3, -0.9]);
        let g = eval_norm(&diamond(), &x).unwrap();
        assert!((g - 1.2).abs() < 1e-9);
    }

    #[test]
    fn dual_specs_round_trip() {
        let spec = NormSpec::WeightedLp { p: 3.0, weights: vec![2.0, 0.5] };
        let dd = dual_norm_spec(&dual_norm_spec(&spec).unwrap()).unwrap();
        match dd {
            NormSpec::WeightedLp { p, weights } => {
                assert!((p - 3.0).abs() < 1e-12);
                assert!((weights[0] - 2.0).abs() < 1e-12);
                assert!((weights[1] - 0.5).abs() < 1e-12);
            }
            other => panic!("unexpected round trip: {other:?}"),
        }
    }

    #[test]
    fn dual_of_hull_is_facet_max() {
        // Dual of the diamond (l1 ball) is the max norm.
        let y = Vector::new(vec![0.7, -0.2]);
        let d = dual_eval(&diamond(), &y).unwrap();
        assert!((d - 0.7).abs() < 1e-9);
    }

    #[test]
    fn attainers_align_and_have_unit_dual_norm() {
        let mut s = Sampler::new(7);
        let specs = vec![
            NormSpec::Euclidean,
            NormSpec::l1(),
            NormSpec::linf(),
            NormSpec::Lp { p: 2.5 },
            NormSpec::WeightedLp { p: 1.0, weights: vec![2.0, 3.0, 0.5] },
            diamond3(),
            facet3(),
        ];
        for spec in &specs {
            for _ in 0..25 {
                let w = s.in_cube(3, 2.0);
                if w.norm2() < 1e-6 {
                    continue;
                }
                let v = dual_attainer(spec, &w).unwrap();
                let nv = dual_eval(spec, &v).unwrap();
                let align = v.dot(&w);
                let nw = eval_norm(spec, &w).unwrap();
                assert!((nv - 1.0).abs() < 1e-7, "dual norm {nv} for {spec:?}");
                assert!((align - nw).abs() < 1e-7 * (1.0 + nw), "alignment for {spec:?}");
            }
        }
    }

    fn diamond3() -> NormSpec {
        let mut vs = Vec::new();
        for i in 0..3 {
            vs.push(Vector::basis(3, i));
            vs.push(Vector::basis(3, i).neg());
        }
        NormSpec::Polyhedral { vertices: vs }
    }

    fn facet3() -> NormSpec {
        // Skewed facet norm: max of |x1|, |x1 - 2 x2|, |x3|.
        NormSpec::PolyhedralH {
            facets: symmetric_hull(&[
                Vector::new(vec![1.0, 0.0, 0.0]),
                Vector::new(vec![1.0, -2.0, 0.0]),
                Vector::new(vec![0.0, 0.0, 1.0]),
            ]),
        }
    }

    #[test]
    fn epigraph_encoding_matches_eval() {
        // minimize t subject to norm(x0 - c) <= t reproduces eval at x0.
        let specs = vec![NormSpec::l1(), NormSpec::linf(), diamond(), skew2()];
        let x0 = Vector::new(vec![0.4, -1.3]);
        for spec in specs {
            let mut b = LpBuilder::new();
            let t = b.fresh();
            let coords = vec![Lin::constant(x0[0]), Lin::constant(x0[1])];
            norm_le(&mut b, &spec, &coords, &Lin::var(t)).unwrap();
            b.minimize(Lin::var(t));
            let direct = eval_norm(&spec, &x0).unwrap();
            match b.solve().unwrap() {
                LpOutcome::Optimal(sol) => {
                    assert!((sol.value - direct).abs() < 1e-8, "{spec:?}: {} vs {direct}", sol.value)
                }
                other => panic!("{other:?}"),
            }
        }
    }

    fn skew2() -> NormSpec {
        NormSpec::PolyhedralH {
            facets: symmetric_hull(&[
                Vector::new(vec![1.0, 0.0]),
                Vector::new(vec![1.0, -2.0]),
            ]),
        }
    }

    #[test]
    fn axioms_hold_on_samples() {
        let mut s = Sampler::new(11);
        for spec in [NormSpec::Lp { p: 1.7 }, skew2(), diamond()] {
            check_norm_axioms(&spec, 2, &mut s, 60).unwrap();
        }
    }

    #[test]
    fn ball_vertex_and_facet_forms_agree() {
        // Facet form of the diamond has the four box facets.
        let hs = ball_halfspaces(&diamond(), 2).unwrap();
        // Every computed facet must certify the ball: max over vertices = 1.
        for f in &hs {
            let m = [
                Vector::new(vec![1.0, 0.0]),
                Vector::new(vec![-1.0, 0.0]),
                Vector::new(vec![0.0, 1.0]),
                Vector::new(vec![0.0, -1.0]),
            ]
            .iter()
            .fold(f64::NEG_INFINITY, |m, v| m.max(f.dot(v)));
            assert!((m - 1.0).abs() < 1e-9);
        }
        assert_eq!(hs.len(), 4);
    }
}
