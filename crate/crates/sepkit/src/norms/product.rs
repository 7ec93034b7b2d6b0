//! Product-space norms built as monotone compositions.
//!
//! A norm on `(R^d)^n` is described by one shared base norm on `R^d` and a
//! [`ProductKind`]: a monotone vector norm `phi` on `R^n` applied to the
//! tuple of block norms. Monotonicity of `phi` on the nonnegative orthant
//! is exactly what makes the composition a norm, and it is what every dual
//! formula and linear encoding below relies on. The [`Composed`] kind
//! accepts an arbitrary vector norm: uncertified compositions can still be
//! evaluated (so that failures of monotonicity and of the triangle
//! inequality can be exhibited concretely), but duality and encodings
//! refuse to run until [`compose_monotone`] has certified the norm.
//!
//! [`Composed`]: ProductKind::Composed

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{
    conjugate, dual_attainer, dual_norm_spec, eval_norm, lp_attainer, lp_of, lp_representable,
    norm_le, validate, NormError, NormSpec,
};
use crate::polysolve::{Lin, LpBuilder};
use crate::sample::Sampler;
use crate::vector::{split_blocks, Vector};

/// The vector norm `phi` applied to the tuple of block norms.
#[derive(Clone, Debug, PartialEq)]
pub enum ProductKind {
    /// `max_i t_i` — the classical maximum product norm.
    Max,
    /// `(sum t_i^p)^(1/p)`, `p` in `[1, +inf]`.
    P { p: f64 },
    /// `(sum (w_i t_i)^p)^(1/p)` with strictly positive weights.
    WeightedP { p: f64, weights: Vec<f64> },
    /// `max { inner(t_1..t_{n-1}), gamma * t_n }`: an inner product norm on
    /// the leading blocks joined with a scaled last block.
    MaxTail { inner: Box<ProductKind>, gamma: f64 },
    /// `inner(t_1..t_{n-1}) + gamma * t_n` — the dual partner of `MaxTail`.
    SumTail { inner: Box<ProductKind>, gamma: f64 },
    /// An explicit vector norm on `R^n`. `certified` records that
    /// monotonicity has been verified; only certified compositions admit
    /// duals, attainers, and linear encodings.
    Composed { vec_norm: NormSpec, certified: bool },
}

/// A norm on `(R^d)^n`: `phi(base(u_1), ..., base(u_n))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductNormSpec {
    /// Number of blocks.
    pub n: usize,
    /// Shared base norm on each block.
    pub base: NormSpec,
    /// Monotone vector norm combining the block values.
    pub kind: ProductKind,
}

impl ProductNormSpec {
    pub fn max(n: usize, base: NormSpec) -> ProductNormSpec {
        ProductNormSpec { n, base, kind: ProductKind::Max }
    }

    pub fn p(n: usize, p: f64, base: NormSpec) -> ProductNormSpec {
        ProductNormSpec { n, base, kind: ProductKind::P { p } }
    }

    /// The `max{ inner, gamma * base(u_n) }` extension of an inner product
    /// norm by one block.
    pub fn with_tail(inner: ProductNormSpec, gamma: f64) -> ProductNormSpec {
        ProductNormSpec {
            n: inner.n + 1,
            base: inner.base,
            kind: ProductKind::MaxTail { inner: Box::new(inner.kind), gamma },
        }
    }
}

fn kind_blocks_ok(kind: &ProductKind, n: usize) -> Result<(), NormError> {
    match kind {
        ProductKind::Max => Ok(()),
        ProductKind::P { p } => {
            if *p >= 1.0 {
                Ok(())
            } else {
                Err(NormError::InvalidSpec(format!("p must lie in [1, +inf], got {p}")))
            }
        }
        ProductKind::WeightedP { p, weights } => {
            if *p < 1.0 {
                return Err(NormError::InvalidSpec(format!("p must lie in [1, +inf], got {p}")));
            }
            if weights.len() != n {
                return Err(NormError::InvalidSpec(format!(
                    "expected {n} block weights, got {}",
                    weights.len()
                )));
            }
            if weights.iter().any(|&w| w <= 0.0 || !w.is_finite()) {
                return Err(NormError::InvalidSpec(String::from(
                    "block weights must be strictly positive and finite",
                )));
            }
            Ok(())
        }
        ProductKind::MaxTail { inner, gamma } | ProductKind::SumTail { inner, gamma } => {
            if n < 2 {
                return Err(NormError::InvalidSpec(String::from(
                    "tail kinds need at least two blocks",
                )));
            }
            if *gamma <= 0.0 || !gamma.is_finite() {
                return Err(NormError::InvalidSpec(format!("tail scale must be positive, got {gamma}")));
            }
            kind_blocks_ok(inner, n - 1)
        }
        ProductKind::Composed { vec_norm, .. } => validate(vec_norm, n),
    }
}

/// Validates the block count, kind parameters, and base norm together.
pub fn validate_product(spec: &ProductNormSpec, block_dim: usize) -> Result<(), NormError> {
    if spec.n == 0 {
        return Err(NormError::InvalidSpec(String::from("product norm needs at least one block")));
    }
    validate(&spec.base, block_dim)?;
    kind_blocks_ok(&spec.kind, spec.n)
}

/// Evaluates the combining vector norm `phi` at a nonnegative tuple.
pub fn phi_eval(kind: &ProductKind, t: &[f64]) -> Result<f64, NormError> {
    kind_blocks_ok(kind, t.len())?;
    Ok(match kind {
        ProductKind::Max => t.iter().fold(0.0f64, |m, &v| m.max(v.abs())),
        ProductKind::P { p } => lp_of(t, *p),
        ProductKind::WeightedP { p, weights } => {
            let scaled: Vec<f64> = t.iter().zip(weights).map(|(v, w)| v * w).collect();
            lp_of(&scaled, *p)
        }
        ProductKind::MaxTail { inner, gamma } => {
            let head = phi_eval(inner, &t[..t.len() - 1])?;
            head.max(gamma * t[t.len() - 1].abs())
        }
        ProductKind::SumTail { inner, gamma } => {
            phi_eval(inner, &t[..t.len() - 1])? + gamma * t[t.len() - 1].abs()
        }
        ProductKind::Composed { vec_norm, .. } => eval_norm(vec_norm, &Vector::new(t.to_vec()))?,
    })
}

/// The exact dual combining norm. `Max` pairs with the block sum, `p` with
/// its conjugate, weights invert, and the two tail forms swap.
pub fn phi_dual_kind(kind: &ProductKind) -> Result<ProductKind, NormError> {
    Ok(match kind {
        ProductKind::Max => ProductKind::P { p: 1.0 },
        ProductKind::P { p } => ProductKind::P { p: conjugate(*p) },
        ProductKind::WeightedP { p, weights } => ProductKind::WeightedP {
            p: conjugate(*p),
            weights: weights.iter().map(|w| 1.0 / w).collect(),
        },
        ProductKind::MaxTail { inner, gamma } => ProductKind::SumTail {
            inner: Box::new(phi_dual_kind(inner)?),
            gamma: 1.0 / gamma,
        },
        ProductKind::SumTail { inner, gamma } => ProductKind::MaxTail {
            inner: Box::new(phi_dual_kind(inner)?),
            gamma: 1.0 / gamma,
        },
        ProductKind::Composed { vec_norm, certified } => {
            if !certified {
                return Err(NormError::NotRepresentable(String::from(
                    "composition is not certified monotone; its dual is undefined here",
                )));
            }
            // The dual of a monotone absolute norm is monotone and
            // absolute, so certification transfers.
            ProductKind::Composed { vec_norm: dual_norm_spec(vec_norm)?, certified: true }
        }
    })
}

/// Nonnegative weights `a` with `phi_dual(a) = 1` and `<a, t> = phi(t)`,
/// for a nonzero nonnegative tuple `t`.
pub fn phi_dual_attainer(kind: &ProductKind, t: &[f64]) -> Result<Vec<f64>, NormError> {
    let value = phi_eval(kind, t)?;
    if value <= 0.0 {
        return Err(NormError::ZeroVector);
    }
    Ok(match kind {
        ProductKind::Max => {
            let mut best = 0usize;
            let mut best_val = f64::NEG_INFINITY;
            for (i, &ti) in t.iter().enumerate() {
                if ti > best_val {
                    best_val = ti;
                    best = i;
                }
            }
            let mut a = alloc::vec![0.0; t.len()];
            a[best] = 1.0;
            a
        }
        ProductKind::P { p } => lp_attainer(t, *p, value).as_slice().to_vec(),
        ProductKind::WeightedP { p, weights } => {
            let z: Vec<f64> = t.iter().zip(weights).map(|(v, w)| v * w).collect();
            let c = lp_attainer(&z, *p, value);
            c.iter().zip(weights).map(|(ci, w)| ci * w).collect()
        }
        ProductKind::MaxTail { inner, gamma } => {
            let last = t.len() - 1;
            let head_val = phi_eval(inner, &t[..last])?;
            let tail_val = gamma * t[last];
            let mut a = alloc::vec![0.0; t.len()];
            if head_val >= tail_val {
                let ah = phi_dual_attainer(inner, &t[..last])?;
                a[..last].copy_from_slice(&ah);
            } else {
                a[last] = *gamma;
            }
            a
        }
        ProductKind::SumTail { inner, gamma } => {
            let last = t.len() - 1;
            let head_val = phi_eval(inner, &t[..last])?;
            let mut a = alloc::vec![0.0; t.len()];
            if head_val > 0.0 {
                let ah = phi_dual_attainer(inner, &t[..last])?;
                a[..last].copy_from_slice(&ah);
            }
            a[last] = *gamma;
            a
        }
        ProductKind::Composed { vec_norm, certified } => {
            if !certified {
                return Err(NormError::NotRepresentable(String::from(
                    "composition is not certified monotone; no dual attainer",
                )));
            }
            let raw = dual_attainer(vec_norm, &Vector::new(t.to_vec()))?;
            // Monotone absolute norms admit nonnegative attainers at
            // nonnegative points: taking moduli preserves both the unit
            // dual value and the alignment.
            raw.iter().map(|v| v.abs()).collect()
        }
    })
}

pub(crate) fn phi_lp_representable(kind: &ProductKind) -> bool {
    match kind {
        ProductKind::Max => true,
        ProductKind::P { p } => *p == 1.0 || p.is_infinite(),
        ProductKind::WeightedP { p, .. } => *p == 1.0 || p.is_infinite(),
        ProductKind::MaxTail { inner, .. } | ProductKind::SumTail { inner, .. } => {
            phi_lp_representable(inner)
        }
        ProductKind::Composed { vec_norm, certified } => {
            *certified && lp_representable(vec_norm)
        }
    }
}

/// Encodes `phi(t) <= bound` for tuple variables already constrained to
/// dominate the block norms. Soundness rests on monotonicity of `phi`.
pub(crate) fn phi_norm_le(
    b: &mut LpBuilder,
    kind: &ProductKind,
    ts: &[Lin],
    bound: &Lin,
) -> Result<(), NormError> {
    match kind {
        ProductKind::Max => {
            for t in ts {
                b.le(t, bound);
            }
            Ok(())
        }
        ProductKind::P { p } if p.is_infinite() => {
            for t in ts {
                b.le(t, bound);
            }
            Ok(())
        }
        ProductKind::P { p } if *p == 1.0 => {
            let mut total = Lin::constant(0.0);
            for t in ts {
                total = total.plus(t);
            }
            b.le(&total, bound);
            Ok(())
        }
        ProductKind::WeightedP { p, weights } if p.is_infinite() => {
            for (t, &w) in ts.iter().zip(weights) {
                b.le(&t.scaled(w), bound);
            }
            Ok(())
        }
        ProductKind::WeightedP { p, weights } if *p == 1.0 => {
            let mut total = Lin::constant(0.0);
            for (t, &w) in ts.iter().zip(weights) {
                total = total.plus(&t.scaled(w));
            }
            b.le(&total, bound);
            Ok(())
        }
        ProductKind::MaxTail { inner, gamma } => {
            phi_norm_le(b, inner, &ts[..ts.len() - 1], bound)?;
            b.le(&ts[ts.len() - 1].scaled(*gamma), bound);
            Ok(())
        }
        ProductKind::SumTail { inner, gamma } => {
            let s = b.fresh();
            b.nonneg(s);
            phi_norm_le(b, inner, &ts[..ts.len() - 1], &Lin::var(s))?;
            b.le(&Lin::var(s).plus(&ts[ts.len() - 1].scaled(*gamma)), bound);
            Ok(())
        }
        ProductKind::Composed { vec_norm, certified } => {
            if !certified {
                return Err(NormError::NotRepresentable(String::from(
                    "composition is not certified monotone; no sound linear encoding",
                )));
            }
            norm_le(b, vec_norm, ts, bound)
        }
        other => Err(NormError::NotRepresentable(format!("{other:?}"))),
    }
}

/// True when [`prod_norm_le`] has an exact encoding for blocks of the given
/// dimension.
pub fn prod_lp_representable(spec: &ProductNormSpec, block_dim: usize) -> bool {
    (lp_representable(&spec.base) || block_dim == 1) && phi_lp_representable(&spec.kind)
}

/// Appends rows encoding `prodnorm(blocks) <= bound`, introducing one
/// dominating tuple variable per block.
pub fn prod_norm_le(
    b: &mut LpBuilder,
    spec: &ProductNormSpec,
    blocks: &[Vec<Lin>],
    bound: &Lin,
) -> Result<(), NormError> {
    if blocks.len() != spec.n {
        return Err(NormError::InvalidSpec(format!(
            "expected {} blocks, got {}",
            spec.n,
            blocks.len()
        )));
    }
    let t = b.fresh_block(spec.n);
    for (i, block) in blocks.iter().enumerate() {
        b.nonneg(t[i]);
        norm_le(b, &spec.base, block, &Lin::var(t[i]))?;
    }
    let ts: Vec<Lin> = t.iter().map(|&i| Lin::var(i)).collect();
    phi_norm_le(b, &spec.kind, &ts, bound)
}

/// Value of the product norm on a block tuple.
pub fn prod_eval(spec: &ProductNormSpec, blocks: &[Vector]) -> Result<f64, NormError> {
    if blocks.len() != spec.n {
        return Err(NormError::InvalidSpec(format!(
            "expected {} blocks, got {}",
            spec.n,
            blocks.len()
        )));
    }
    let mut t = Vec::with_capacity(spec.n);
    for u in blocks {
        t.push(eval_norm(&spec.base, u)?);
    }
    phi_eval(&spec.kind, &t)
}

/// Value of the product norm on a flattened tuple (dimension must divide).
pub fn prod_eval_flat(spec: &ProductNormSpec, flat: &Vector) -> Result<f64, NormError> {
    if !flat.dim().is_multiple_of(spec.n) {
        return Err(NormError::InvalidSpec(format!(
            "flat dimension {} is not a multiple of the block count {}",
            flat.dim(),
            spec.n
        )));
    }
    prod_eval(spec, &split_blocks(flat, spec.n))
}

/// The exact dual product norm: dual base under the dual combining norm.
pub fn prod_dual_spec(spec: &ProductNormSpec) -> Result<ProductNormSpec, NormError> {
    Ok(ProductNormSpec {
        n: spec.n,
        base: dual_norm_spec(&spec.base)?,
        kind: phi_dual_kind(&spec.kind)?,
    })
}

/// Block functionals `v` with `dualnorm(v) = 1` and
/// `sum_i <v_i, u_i> = prodnorm(u)` — the product-space subgradient
/// certificate at a nonzero tuple.
pub fn prod_dual_attainer(
    spec: &ProductNormSpec,
    blocks: &[Vector],
) -> Result<Vec<Vector>, NormError> {
    if blocks.len() != spec.n {
        return Err(NormError::InvalidSpec(format!(
            "expected {} blocks, got {}",
            spec.n,
            blocks.len()
        )));
    }
    let d = blocks.first().map(Vector::dim).unwrap_or(0);
    let mut t = Vec::with_capacity(spec.n);
    for u in blocks {
        t.push(eval_norm(&spec.base, u)?);
    }
    let a = phi_dual_attainer(&spec.kind, &t)?;
    let mut out = Vec::with_capacity(spec.n);
    for (i, u) in blocks.iter().enumerate() {
        if a[i] == 0.0 {
            out.push(Vector::zeros(d));
        } else if t[i] > 0.0 {
            out.push(dual_attainer(&spec.base, u)?.scale(a[i]));
        } else {
            // Zero block with positive weight: any unit-dual functional
            // keeps the alignment identity (its block contributes zero).
            out.push(dual_attainer(&spec.base, &Vector::basis(d, 0))?.scale(a[i]));
        }
    }
    Ok(out)
}

/// Report of a monotonicity check of a vector norm on the orthant.
#[derive(Clone, Debug)]
pub struct MonotoneReport {
    pub monotone: bool,
    /// `(x, y)` with `|x| <= |y|` componentwise but `norm(x) > norm(y)`.
    pub witness: Option<(Vector, Vector)>,
}

/// Searches for a monotonicity violation: componentwise-dominated tuples
/// whose norm values are reversed. Deterministic grid first, then seeded
/// random pairs.
pub fn check_monotone(vec_norm: &NormSpec, dim: usize, sampler: &mut Sampler) -> MonotoneReport {
    let fail = |x: &Vector, y: &Vector| -> Option<(f64, f64)> {
        let nx = eval_norm(vec_norm, x).ok()?;
        let ny = eval_norm(vec_norm, y).ok()?;
        if nx > ny + 1e-9 {
            Some((nx, ny))
        } else {
            None
        }
    };
    // Grid pass: tuples with entries in a small ladder, compared pairwise.
    if dim <= 3 {
        let ladder = [0.0, 0.5, 1.0, 2.0];
        let pts: Vec<Vector> = grid_points(dim, &ladder);
        for x in &pts {
            for y in &pts {
                if (0..dim).all(|i| x[i] <= y[i]) && fail(x, y).is_some() {
                    return MonotoneReport { monotone: false, witness: Some((x.clone(), y.clone())) };
                }
            }
        }
    }
    for _ in 0..400 {
        let x = sampler.in_cube(dim, 2.0);
        let x = Vector::new(x.iter().map(|v| v.abs()).collect());
        let bump = sampler.in_cube(dim, 1.0);
        let y = Vector::new(x.iter().zip(bump.iter()).map(|(xi, b)| xi + b.abs()).collect());
        if fail(&x, &y).is_some() {
            return MonotoneReport { monotone: false, witness: Some((x, y)) };
        }
    }
    MonotoneReport { monotone: true, witness: None }
}

fn grid_points(dim: usize, ladder: &[f64]) -> Vec<Vector> {
    let mut out = Vec::new();
    let total = ladder.len().pow(dim as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut data = Vec::with_capacity(dim);
        for _ in 0..dim {
            data.push(ladder[rem % ladder.len()]);
            rem /= ladder.len();
        }
        out.push(Vector::new(data));
    }
    out
}

/// Searches for a triangle-inequality violation of the composed product
/// norm; returns the violating block tuples if found.
pub fn check_triangle(
    spec: &ProductNormSpec,
    block_dim: usize,
    sampler: &mut Sampler,
) -> Option<(Vec<Vector>, Vec<Vector>)> {
    let total = spec.n * block_dim;
    let violates = |u: &Vector, v: &Vector| -> bool {
        let (nu, nv, nuv) = match (
            prod_eval_flat(spec, u),
            prod_eval_flat(spec, v),
            prod_eval_flat(spec, &u.add(v)),
        ) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            _ => return false,
        };
        nuv > nu + nv + 1e-9
    };
    if total <= 4 {
        let ladder = [-1.0, 0.0, 1.0, 2.0];
        let pts = grid_points(total, &ladder);
        for u in &pts {
            for v in &pts {
                if violates(u, v) {
                    return Some((split_blocks(u, spec.n), split_blocks(v, spec.n)));
                }
            }
        }
    }
    for _ in 0..600 {
        let u = sampler.in_cube(total, 2.0);
        let v = sampler.in_cube(total, 2.0);
        if violates(&u, &v) {
            return Some((split_blocks(&u, spec.n), split_blocks(&v, spec.n)));
        }
    }
    None
}

/// Builds a certified composed product norm, or reports why the
/// composition fails: either a monotonicity witness for the vector norm or
/// a triangle violation of the composition.
pub fn compose_monotone(
    vec_norm: NormSpec,
    n: usize,
    base: NormSpec,
    sampler: &mut Sampler,
) -> Result<ProductNormSpec, MonotoneReport> {
    let report = check_monotone(&vec_norm, n, sampler);
    if !report.monotone {
        return Err(report);
    }
    Ok(ProductNormSpec {
        n,
        base,
        kind: ProductKind::Composed { vec_norm, certified: true },
    })
}

/// The standard non-monotone vector norm on the plane,
/// `phi(a, b) = |a - b| + |b|`, in facet form
/// (`max{ |a|, |a - 2b| }` — the same function).
pub fn skew_abs_norm() -> NormSpec {
    NormSpec::PolyhedralH {
        facets: alloc::vec![
            Vector::new(alloc::vec![1.0, 0.0]),
            Vector::new(alloc::vec![-1.0, 0.0]),
            Vector::new(alloc::vec![1.0, -2.0]),
            Vector::new(alloc::vec![-1.0, 2.0]),
        ],
    }
}
