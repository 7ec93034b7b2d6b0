//! Closed-set representations — polyhedra, norm balls, translations, finite
//! unions and products — with membership tests, exact projections, and
//! tangent/normal cones (Fréchet, Clarke, convex) including product-cone
//! assembly.
//!
//! Conventions: a polyhedron is `{x : ⟨aᵢ, x⟩ ≤ bᵢ}`; normal cones are
//! generated by finitely many vectors; the zero vector belongs to every
//! cone. Open balls are admitted only so the local separation routine can
//! append one as its final set — everywhere else sets are closed.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::norms::{
    ball_halfspaces, dual_attainer, eval_norm, lp_representable, norm_le, NormError, NormSpec,
};
use crate::polysolve::{
    cone_from_halfspaces, cone_intersect, polyhedron_feasible, Cone, Feasibility, Lin, LpBuilder,
    LpOutcome, PolyError,
};
use crate::tol::RESIDUAL;
use crate::vector::Vector;

/// Errors surfaced by set geometry routines.
#[derive(Clone, Debug, Error)]
pub enum SetError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("empty set: {0}")]
    EmptySet(String),
    #[error("point is not in the set, so the requested cone is undefined")]
    PointNotInSet,
    #[error("{flavor} cone unavailable: {why}")]
    UnsupportedFlavor { flavor: &'static str, why: String },
    #[error("set is not convex: {0}")]
    NotConvex(String),
    #[error("no exact projection path for this set/norm pair: {0}")]
    NotExact(String),
    #[error("norm failure: {0}")]
    Norm(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl From<NormError> for SetError {
    fn from(e: NormError) -> Self {
        SetError::Norm(format!("{e}"))
    }
}

impl From<PolyError> for SetError {
    fn from(e: PolyError) -> Self {
        SetError::Solver(format!("{e}"))
    }
}

/// Cone flavor: which normal (or tangent) cone a [`ConeAtPoint`] carries.
///
/// On convex sets all three coincide; the distinction matters only at
/// points of nonconvex unions, where the Fréchet cone is computed and the
/// Clarke cone is refused rather than approximated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Frechet,
    Clarke,
    Convex,
}

impl Flavor {
    pub fn label(self) -> &'static str {
        match self {
            Flavor::Frechet => "frechet",
            Flavor::Clarke => "clarke",
            Flavor::Convex => "convex",
        }
    }
}

/// A tangent or normal cone anchored at a point of a set.
#[derive(Clone, Debug)]
pub struct ConeAtPoint {
    /// Anchor point (a member of the set).
    pub point: Vector,
    /// Which cone this is.
    pub flavor: Flavor,
    /// Finitely generated cone (generators; empty = the zero cone).
    pub cone: Cone,
    /// Activity tolerance used to decide which constraints were binding.
    pub activity_tol: f64,
    /// Hypothesis warnings attached during assembly (e.g. uncertified
    /// product-norm compatibility); empty when all hypotheses were checked.
    pub warnings: Vec<String>,
}

/// A closed set built from polyhedra, norm balls, translations, finite
/// unions, and products.
#[derive(Clone, Debug, PartialEq)]
pub enum SetExpr {
    /// `{x : ⟨rows[i], x⟩ ≤ bounds[i] for all i}`; no rows = the whole space.
    Polyhedron { dim: usize, rows: Vec<Vector>, bounds: Vec<f64> },
    /// `{x : norm(x − center) ≤ radius}` (or `<` when `closed` is false).
    Ball { center: Vector, radius: f64, norm: NormSpec, closed: bool },
    /// `inner + shift`.
    Translate { inner: Box<SetExpr>, shift: Vector },
    /// Finite union of same-dimension members.
    Union { members: Vec<SetExpr> },
    /// Cartesian product; dimension is the sum of factor dimensions.
    Product { factors: Vec<SetExpr> },
}

impl SetExpr {
    /// Half-space `{x : ⟨a, x⟩ ≤ b}`.
    pub fn halfspace(a: Vector, b: f64) -> SetExpr {
        let dim = a.dim();
        SetExpr::Polyhedron { dim, rows: alloc::vec![a], bounds: alloc::vec![b] }
    }

    /// Axis-aligned box `[lo, hi]` (componentwise).
    pub fn box_set(lo: &[f64], hi: &[f64]) -> SetExpr {
        assert_eq!(lo.len(), hi.len(), "box bounds must share dimension");
        let dim = lo.len();
        let mut rows = Vec::with_capacity(2 * dim);
        let mut bounds = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            rows.push(Vector::basis(dim, i));
            bounds.push(hi[i]);
            rows.push(Vector::basis(dim, i).neg());
            bounds.push(-lo[i]);
        }
        SetExpr::Polyhedron { dim, rows, bounds }
    }

    /// The singleton `{v}`.
    pub fn point(v: &Vector) -> SetExpr {
        let dim = v.dim();
        let mut rows = Vec::with_capacity(2 * dim);
        let mut bounds = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            rows.push(Vector::basis(dim, i));
            bounds.push(v[i]);
            rows.push(Vector::basis(dim, i).neg());
            bounds.push(-v[i]);
        }
        SetExpr::Polyhedron { dim, rows, bounds }
    }

    /// This set shifted by `shift`.
    pub fn translated(self, shift: Vector) -> SetExpr {
        SetExpr::Translate { inner: Box::new(self), shift }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            SetExpr::Polyhedron { dim, .. } => *dim,
            SetExpr::Ball { center, .. } => center.dim(),
            SetExpr::Translate { inner, .. } => inner.dim(),
            SetExpr::Union { members } => members.first().map_or(0, |m| m.dim()),
            SetExpr::Product { factors } => factors.iter().map(|f| f.dim()).sum(),
        }
    }

    /// True when the set is closed (only open balls break closedness).
    pub fn is_closed(&self) -> bool {
        match self {
            SetExpr::Polyhedron { .. } => true,
            SetExpr::Ball { closed, .. } => *closed,
            SetExpr::Translate { inner, .. } => inner.is_closed(),
            SetExpr::Union { members } => members.iter().all(|m| m.is_closed()),
            SetExpr::Product { factors } => factors.iter().all(|f| f.is_closed()),
        }
    }

    /// True when the set is convex by construction (unions only when they
    /// have a single convex member).
    pub fn is_convex(&self) -> bool {
        match self {
            SetExpr::Polyhedron { .. } | SetExpr::Ball { .. } => true,
            SetExpr::Translate { inner, .. } => inner.is_convex(),
            SetExpr::Union { members } => members.len() == 1 && members[0].is_convex(),
            SetExpr::Product { factors } => factors.iter().all(|f| f.is_convex()),
        }
    }

    /// Structural and nonemptiness checks; call once at load time.
    pub fn validate(&self) -> Result<(), SetError> {
        match self {
            SetExpr::Polyhedron { dim, rows, bounds } => {
                if *dim == 0 {
                    return Err(SetError::InvalidSet("polyhedron dimension is zero".into()));
                }
                if rows.len() != bounds.len() {
                    return Err(SetError::InvalidSet(format!(
                        "{} rows but {} bounds",
                        rows.len(),
                        bounds.len()
                    )));
                }
                for r in rows {
                    if r.dim() != *dim {
                        return Err(SetError::DimensionMismatch { expected: *dim, got: r.dim() });
                    }
                }
                if !bounds.iter().all(|b| b.is_finite()) {
                    return Err(SetError::InvalidSet("non-finite bound".into()));
                }
                match polyhedron_feasible(rows, bounds)? {
                    Feasibility::Feasible(_) => Ok(()),
                    Feasibility::Infeasible { .. } => {
                        Err(SetError::EmptySet("polyhedron has no feasible point".into()))
                    }
                }
            }
            SetExpr::Ball { center, radius, norm, .. } => {
                if *radius <= 0.0 || !radius.is_finite() {
                    return Err(SetError::InvalidSet(format!("ball radius {radius}")));
                }
                crate::norms::validate(norm, center.dim())?;
                Ok(())
            }
            SetExpr::Translate { inner, shift } => {
                if inner.dim() != shift.dim() {
                    return Err(SetError::DimensionMismatch {
                        expected: inner.dim(),
                        got: shift.dim(),
                    });
                }
                inner.validate()
            }
            SetExpr::Union { members } => {
                if members.is_empty() {
                    return Err(SetError::InvalidSet("union of zero members".into()));
                }
                let d = members[0].dim();
                for m in members {
                    if m.dim() != d {
                        return Err(SetError::DimensionMismatch { expected: d, got: m.dim() });
                    }
                    m.validate()?;
                }
                Ok(())
            }
            SetExpr::Product { factors } => {
                if factors.is_empty() {
                    return Err(SetError::InvalidSet("product of zero factors".into()));
                }
                for f in factors {
                    f.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Membership within tolerance: polyhedra row by row, balls by norm
    /// evaluation (strict when open), unions by any member, products
    /// blockwise.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool, SetError> {
        if x.dim() != self.dim() {
            return Err(SetError::DimensionMismatch { expected: self.dim(), got: x.dim() });
        }
        match self {
            SetExpr::Polyhedron { rows, bounds, .. } => {
                Ok(rows.iter().zip(bounds).all(|(a, b)| a.dot(x) <= b + tol))
            }
            SetExpr::Ball { center, radius, norm, closed } => {
                let v = eval_norm(norm, &x.sub(center))?;
                Ok(if *closed { v <= radius + tol } else { v < *radius })
            }
            SetExpr::Translate { inner, shift } => inner.contains(&x.sub(shift), tol),
            SetExpr::Union { members } => {
                for m in members {
                    if m.contains(x, tol)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            SetExpr::Product { factors } => {
                let mut off = 0;
                for f in factors {
                    let d = f.dim();
                    let block = Vector::new(x.as_slice()[off..off + d].to_vec());
                    if !f.contains(&block, tol)? {
                        return Ok(false);
                    }
                    off += d;
                }
                Ok(true)
            }
        }
    }

    /// The set as a single system of half-space rows, when it is one:
    /// polyhedra directly, closed balls with polytope balls via their
    /// facets, translations by shifting bounds, products by block
    /// embedding. Unions and non-polytopal balls return `None`.
    pub fn as_polyhedron(&self) -> Option<(Vec<Vector>, Vec<f64>)> {
        match self {
            SetExpr::Polyhedron { rows, bounds, .. } => Some((rows.clone(), bounds.clone())),
            SetExpr::Ball { center, radius, norm, closed } => {
                if !closed {
                    return None;
                }
                let facets = ball_halfspaces(norm, center.dim())?;
                let bounds = facets.iter().map(|f| radius + f.dot(center)).collect();
                Some((facets, bounds))
            }
            SetExpr::Translate { inner, shift } => {
                let (rows, bounds) = inner.as_polyhedron()?;
                let shifted = rows.iter().zip(&bounds).map(|(a, b)| b + a.dot(shift)).collect();
                Some((rows, shifted))
            }
            SetExpr::Union { members } => {
                if members.len() == 1 {
                    members[0].as_polyhedron()
                } else {
                    None
                }
            }
            SetExpr::Product { factors } => {
                let total: usize = self.dim();
                let mut rows = Vec::new();
                let mut bounds = Vec::new();
                let mut off = 0;
                for f in factors {
                    let d = f.dim();
                    let (frows, fbounds) = f.as_polyhedron()?;
                    for (a, b) in frows.iter().zip(&fbounds) {
                        let mut full = alloc::vec![0.0; total];
                        full[off..off + d].copy_from_slice(a.as_slice());
                        rows.push(Vector::new(full));
                        bounds.push(*b);
                    }
                    off += d;
                }
                Some((rows, bounds))
            }
        }
    }

    /// Union members (within tolerance) that contain `x`; singleton list
    /// for every other kind.
    fn active_members(&self, x: &Vector, tol: f64) -> Result<Vec<&SetExpr>, SetError> {
        match self {
            SetExpr::Union { members } => {
                let mut out = Vec::new();
                for m in members {
                    if m.contains(x, tol)? {
                        out.push(m);
                    }
                }
                Ok(out)
            }
            _ => Ok(alloc::vec![self]),
        }
    }
}

/// Nearest point of `s` to `x` in the given norm, with the distance.
///
/// Exact paths: any polyhedral configuration with an LP-encodable norm;
/// Euclidean projection onto a polyhedron in dimension ≤ 6 (active-set
/// enumeration); balls in their own norm by the radial formula; unions by
/// the best member. Distance to a non-closed set is the distance to its
/// closure (the infimum; the witness then lies in the closure).
pub fn project(s: &SetExpr, x: &Vector, norm: &NormSpec) -> Result<(Vector, f64), SetError> {
    if x.dim() != s.dim() {
        return Err(SetError::DimensionMismatch { expected: s.dim(), got: x.dim() });
    }
    match s {
        SetExpr::Union { members } => {
            let mut best: Option<(Vector, f64)> = None;
            for m in members {
                let (p, d) = project(m, x, norm)?;
                if best.as_ref().is_none_or(|(_, bd)| d < *bd) {
                    best = Some((p, d));
                }
            }
            best.ok_or_else(|| SetError::InvalidSet("union of zero members".into()))
        }
        SetExpr::Translate { inner, shift } => {
            let (p, d) = project(inner, &x.sub(shift), norm)?;
            Ok((p.add(shift), d))
        }
        SetExpr::Ball { center, radius, norm: ball_norm, .. } if ball_norm == norm => {
            let diff = x.sub(center);
            let v = eval_norm(norm, &diff)?;
            if v <= *radius {
                Ok((x.clone(), 0.0))
            } else {
                let p = center.add(&diff.scale(radius / v));
                Ok((p, v - radius))
            }
        }
        _ => {
            let (rows, bounds) = s.as_polyhedron().ok_or_else(|| {
                SetError::NotExact(
                    "set is neither a polyhedron nor a ball in the projection norm".into(),
                )
            })?;
            if lp_representable(norm) {
                project_lp(&rows, &bounds, x, norm)
            } else if *norm == NormSpec::Euclidean {
                project_euclid(&rows, &bounds, x)
            } else {
                Err(SetError::NotExact(
                    "norm has no LP encoding and is not Euclidean".into(),
                ))
            }
        }
    }
}

/// Exact projection via the epigraph LP: minimize `s` over `A y ≤ b`,
/// `norm(x − y) ≤ s`.
fn project_lp(
    rows: &[Vector],
    bounds: &[f64],
    x: &Vector,
    norm: &NormSpec,
) -> Result<(Vector, f64), SetError> {
    let d = x.dim();
    let mut b = LpBuilder::new();
    let y: Vec<usize> = b.fresh_block(d);
    let s = b.fresh();
    for (a, bb) in rows.iter().zip(bounds) {
        let mut lhs = Lin::constant(0.0);
        for (c, &vi) in a.iter().zip(&y) {
            lhs = lhs.plus(&Lin::term(vi, *c));
        }
        b.le(&lhs, &Lin::constant(*bb));
    }
    let diff: Vec<Lin> = (0..d).map(|i| Lin::term(y[i], -1.0).shifted(x[i])).collect();
    norm_le(&mut b, norm, &diff, &Lin::var(s))?;
    b.minimize(Lin::var(s));
    match b.solve()? {
        LpOutcome::Optimal(sol) => {
            let p = Vector::new(y.iter().map(|&vi| sol.point[vi]).collect());
            Ok((p, sol.value.max(0.0)))
        }
        LpOutcome::Infeasible { .. } => {
            Err(SetError::EmptySet("projection target is empty".into()))
        }
        LpOutcome::Unbounded { .. } => {
            Err(SetError::Solver("projection program is unbounded".into()))
        }
    }
}

/// Euclidean projection onto `{A y ≤ b}` by enumerating candidate active
/// sets: for each subset `S` of rows (size ≤ dim) solve the
/// equality-constrained least-squares problem, keep feasible candidates,
/// return the closest. Exact for dimension ≤ 6 and modest row counts.
fn project_euclid(rows: &[Vector], bounds: &[f64], x: &Vector) -> Result<(Vector, f64), SetError> {
    let d = x.dim();
    let m = rows.len();
    let feasible =
        |y: &Vector| rows.iter().zip(bounds).all(|(a, b)| a.dot(y) <= b + RESIDUAL);
    if feasible(x) {
        return Ok((x.clone(), 0.0));
    }
    if d > 6 || m > 24 {
        return Err(SetError::NotExact(format!(
            "active-set enumeration supports dim <= 6 and <= 24 rows, got dim {d} with {m} rows"
        )));
    }
    let mut best: Option<(Vector, f64)> = None;
    // Iterate subsets by bitmask, skipping those larger than the dimension.
    for mask in 1u32..(1u32 << m) {
        if (mask.count_ones() as usize) > d {
            continue;
        }
        let idx: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        // KKT for min |y - x|^2 s.t. A_S y = b_S: y = x - A_S^T t with
        // (A_S A_S^T) t = A_S x - b_S; solve the normal equations in t.
        let k = idx.len();
        let gram_cols: Vec<Vector> = (0..k)
            .map(|j| Vector::new(idx.iter().map(|&i| rows[i].dot(&rows[idx[j]])).collect()))
            .collect();
        let target = Vector::new(idx.iter().map(|&i| rows[i].dot(x) - bounds[i]).collect());
        let t = crate::polysolve::lstsq(&gram_cols, &target);
        let mut y = x.clone();
        for (j, &i) in idx.iter().enumerate() {
            y = y.sub(&rows[i].scale(t[j]));
        }
        if feasible(&y) {
            let dist = y.sub(x).norm2();
            if best.as_ref().is_none_or(|(_, bd)| dist < *bd) {
                best = Some((y, dist));
            }
        }
    }
    best.ok_or_else(|| SetError::EmptySet("no feasible candidate in active-set sweep".into()))
}

/// Normal cone of `s` at `x` in the requested flavor.
///
/// Polyhedra: the cone generated by outward normals of active rows. Balls:
/// zero cone at interior points; at boundary points, active facets for
/// polytope balls and the dual-attainer ray for smooth balls. Unions
/// (Fréchet): the intersection of the cones of all members containing the
/// point; Clarke/convex flavors are refused at genuine multi-member
/// points. Products: blockwise cones assembled by [`product_cone`].
pub fn normal_cone(
    s: &SetExpr,
    x: &Vector,
    flavor: Flavor,
    tol: f64,
) -> Result<ConeAtPoint, SetError> {
    if !s.contains(x, tol)? {
        return Err(SetError::PointNotInSet);
    }
    let dim = s.dim();
    let cone = match s {
        SetExpr::Polyhedron { rows, bounds, .. } => {
            let active: Vec<Vector> = rows
                .iter()
                .zip(bounds)
                .filter(|(a, b)| a.dot(x) >= *b - tol && a.norm2() > 1e-14)
                .map(|(a, _)| a.clone())
                .collect();
            Cone::new(dim, active)?
        }
        SetExpr::Ball { center, radius, norm, closed } => {
            let diff = x.sub(center);
            let v = eval_norm(norm, &diff)?;
            if !closed || v < radius - tol {
                Cone::zero(dim)
            } else if let Some(facets) = ball_halfspaces(norm, dim) {
                let active: Vec<Vector> =
                    facets.into_iter().filter(|f| f.dot(&diff) >= radius - tol).collect();
                Cone::new(dim, active)?
            } else {
                // Smooth ball: the unique outward normal direction is the
                // norming functional of x - center.
                Cone::new(dim, alloc::vec![dual_attainer(norm, &diff)?])?
            }
        }
        SetExpr::Translate { inner, shift } => {
            normal_cone(inner, &x.sub(shift), flavor, tol)?.cone
        }
        SetExpr::Union { .. } => {
            let active = s.active_members(x, tol)?;
            if active.len() == 1 {
                normal_cone(active[0], x, flavor, tol)?.cone
            } else {
                if flavor != Flavor::Frechet {
                    return Err(SetError::UnsupportedFlavor {
                        flavor: flavor.label(),
                        why: format!(
                            "point lies in {} union members; only the Fréchet cone is \
                             computed there",
                            active.len()
                        ),
                    });
                }
                let mut acc: Option<Cone> = None;
                for m in active {
                    let c = normal_cone(m, x, Flavor::Frechet, tol)?.cone;
                    acc = Some(match acc {
                        None => c,
                        Some(prev) => cone_intersect(&prev, &c)?,
                    });
                }
                acc.unwrap_or_else(|| Cone::zero(dim))
            }
        }
        SetExpr::Product { factors } => {
            let mut parts = Vec::with_capacity(factors.len());
            let mut off = 0;
            for f in factors {
                let d = f.dim();
                let block = Vector::new(x.as_slice()[off..off + d].to_vec());
                parts.push(normal_cone(f, &block, flavor, tol)?);
                off += d;
            }
            // Compatibility of the ambient product norm is the caller's
            // hypothesis; assembling here is certified blockwise.
            return Ok(ConeAtPoint { point: x.clone(), ..product_cone(&parts, true)? });
        }
    };
    Ok(ConeAtPoint { point: x.clone(), flavor, cone, activity_tol: tol, warnings: Vec::new() })
}

/// Clarke tangent cone of a convex set at `x`: the closed cone of feasible
/// directions (active rows become homogeneous half-spaces).
pub fn tangent_cone(s: &SetExpr, x: &Vector, tol: f64) -> Result<ConeAtPoint, SetError> {
    if !s.is_convex() {
        return Err(SetError::NotConvex(
            "tangent cones are computed for convex sets only".into(),
        ));
    }
    if !s.contains(x, tol)? {
        return Err(SetError::PointNotInSet);
    }
    let dim = s.dim();
    let cone = match s {
        SetExpr::Polyhedron { rows, bounds, .. } => {
            let active: Vec<Vector> = rows
                .iter()
                .zip(bounds)
                .filter(|(a, b)| a.dot(x) >= *b - tol && a.norm2() > 1e-14)
                .map(|(a, _)| a.clone())
                .collect();
            cone_from_halfspaces(dim, &active)?
        }
        SetExpr::Ball { center, radius, norm, closed } => {
            let diff = x.sub(center);
            let v = eval_norm(norm, &diff)?;
            if !closed || v < radius - tol {
                Cone::full(dim)
            } else if let Some(facets) = ball_halfspaces(norm, dim) {
                let active: Vec<Vector> =
                    facets.into_iter().filter(|f| f.dot(&diff) >= radius - tol).collect();
                cone_from_halfspaces(dim, &active)?
            } else {
                cone_from_halfspaces(dim, &[dual_attainer(norm, &diff)?])?
            }
        }
        SetExpr::Translate { inner, shift } => tangent_cone(inner, &x.sub(shift), tol)?.cone,
        SetExpr::Union { members } => tangent_cone(&members[0], x, tol)?.cone,
        SetExpr::Product { factors } => {
            let mut gens = Vec::new();
            let mut off = 0;
            for f in factors {
                let d = f.dim();
                let block = Vector::new(x.as_slice()[off..off + d].to_vec());
                let part = tangent_cone(f, &block, tol)?;
                for g in part.cone.generators() {
                    let mut full = alloc::vec![0.0; dim];
                    full[off..off + d].copy_from_slice(g.as_slice());
                    gens.push(Vector::new(full));
                }
                off += d;
            }
            Cone::new(dim, gens)?
        }
    };
    Ok(ConeAtPoint {
        point: x.clone(),
        flavor: Flavor::Convex,
        cone,
        activity_tol: tol,
        warnings: Vec::new(),
    })
}

/// Assembles the cone of a product set from per-factor cones: generators
/// are the block embeddings of each factor's generators. Valid as the
/// normal cone of the product exactly when the ambient product norm is
/// compatible blockwise (conditions C3 and C4); pass
/// `compatibility_certified = false` to attach a hypothesis warning
/// instead of silently assuming it.
pub fn product_cone(
    parts: &[ConeAtPoint],
    compatibility_certified: bool,
) -> Result<ConeAtPoint, SetError> {
    let Some(first) = parts.first() else {
        return Err(SetError::InvalidSet("product of zero cones".into()));
    };
    let flavor = first.flavor;
    if parts.iter().any(|p| p.flavor != flavor) {
        return Err(SetError::UnsupportedFlavor {
            flavor: flavor.label(),
            why: "product factors carry mixed cone flavors".into(),
        });
    }
    let dim: usize = parts.iter().map(|p| p.point.dim()).sum();
    let mut gens = Vec::new();
    let mut point = Vec::with_capacity(dim);
    let mut warnings: Vec<String> = Vec::new();
    let mut off = 0;
    for p in parts {
        let d = p.point.dim();
        point.extend_from_slice(p.point.as_slice());
        for g in p.cone.generators() {
            let mut full = alloc::vec![0.0; dim];
            full[off..off + d].copy_from_slice(g.as_slice());
            gens.push(Vector::new(full));
        }
        warnings.extend(p.warnings.iter().cloned());
        off += d;
    }
    if !compatibility_certified {
        warnings.push(
            "product-norm compatibility (C3/C4) not certified; blockwise normal-cone \
             decomposition is a hypothesis here"
                .into(),
        );
    }
    Ok(ConeAtPoint {
        point: Vector::new(point),
        flavor,
        cone: Cone::new(dim, gens)?,
        activity_tol: parts.iter().map(|p| p.activity_tol).fold(0.0, f64::max),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysolve::{cone_contains, cone_polar};
    use crate::sample::Sampler;
    use crate::tol::ACTIVE;

    fn halfplane() -> SetExpr {
        SetExpr::halfspace(Vector::new(alloc::vec![1.0, 0.0]), 0.0)
    }

    #[test]
    fn contains_boundary_and_unions() {
        let s = halfplane();
        assert!(s.contains(&Vector::new(alloc::vec![0.0, 5.0]), ACTIVE).unwrap());
        let ball = SetExpr::Ball {
            center: Vector::zeros(2),
            radius: 1.0,
            norm: NormSpec::Euclidean,
            closed: true,
        };
        assert!(ball.contains(&Vector::new(alloc::vec![1.0, 0.0]), ACTIVE).unwrap());
        let open = SetExpr::Ball {
            center: Vector::zeros(2),
            radius: 1.0,
            norm: NormSpec::Euclidean,
            closed: false,
        };
        assert!(!open.contains(&Vector::new(alloc::vec![1.0, 0.0]), ACTIVE).unwrap());
        let u = SetExpr::Union {
            members: alloc::vec![
                halfplane(),
                SetExpr::halfspace(Vector::new(alloc::vec![-1.0, 0.0]), -1.0),
            ],
        };
        assert!(!u.contains(&Vector::new(alloc::vec![0.5, 0.0]), ACTIVE).unwrap());
        assert!(u.contains(&Vector::new(alloc::vec![1.0, 0.0]), ACTIVE).unwrap());
    }

    #[test]
    fn project_halfspace_euclid() {
        let s = halfplane();
        let (p, d) = project(&s, &Vector::new(alloc::vec![2.0, 0.0]), &NormSpec::Euclidean)
            .unwrap();
        assert!(p.approx_eq(&Vector::new(alloc::vec![0.0, 0.0]), 1e-9));
        assert!((d - 2.0).abs() < 1e-9);
    }

    #[test]
    fn project_box_corner_euclid() {
        let s = SetExpr::box_set(&[0.0, 0.0], &[1.0, 1.0]);
        let (p, d) = project(&s, &Vector::new(alloc::vec![2.0, 2.0]), &NormSpec::Euclidean)
            .unwrap();
        assert!(p.approx_eq(&Vector::new(alloc::vec![1.0, 1.0]), 1e-9));
        assert!((d - libm::sqrt(2.0)).abs() < 1e-9);
    }

    #[test]
    fn project_union_picks_closer_member() {
        // Two disjoint segments on the x-axis: [0,1] and [3,4].
        let seg = |a: f64, b: f64| SetExpr::box_set(&[a, 0.0], &[b, 0.0]);
        let u = SetExpr::Union { members: alloc::vec![seg(0.0, 1.0), seg(3.0, 4.0)] };
        let (p, d) = project(&u, &Vector::new(alloc::vec![1.6, 0.0]), &NormSpec::Euclidean)
            .unwrap();
        assert!(p.approx_eq(&Vector::new(alloc::vec![1.0, 0.0]), 1e-9));
        assert!((d - 0.6).abs() < 1e-9);
        // Exact LP path agrees in the l1 norm.
        let (p1, d1) = project(&u, &Vector::new(alloc::vec![1.6, 0.0]), &NormSpec::l1()).unwrap();
        assert!(p1.approx_eq(&p, 1e-7));
        assert!((d1 - 0.6).abs() < 1e-7);
    }

    #[test]
    fn project_ball_radial_matches_lp() {
        let ball = SetExpr::Ball {
            center: Vector::new(alloc::vec![1.0, -1.0]),
            radius: 2.0,
            norm: NormSpec::linf(),
            closed: true,
        };
        let x = Vector::new(alloc::vec![6.0, -1.0]);
        let (p, d) = project(&ball, &x, &NormSpec::linf()).unwrap();
        assert!((d - 3.0).abs() < 1e-9);
        assert!((eval_norm(&NormSpec::linf(), &p.sub(&Vector::new(alloc::vec![1.0, -1.0])))
            .unwrap()
            - 2.0)
            .abs()
            < 1e-9);
        // Same query through the facet LP (ball as polyhedron).
        let (rows, bounds) = ball.as_polyhedron().unwrap();
        let poly = SetExpr::Polyhedron { dim: 2, rows, bounds };
        let (_, d2) = project(&poly, &x, &NormSpec::linf()).unwrap();
        assert!((d2 - 3.0).abs() < 1e-7);
    }

    #[test]
    fn normal_cone_polyhedron_and_interior() {
        let s = halfplane();
        let nc = normal_cone(&s, &Vector::new(alloc::vec![0.0, 5.0]), Flavor::Convex, ACTIVE)
            .unwrap();
        assert_eq!(nc.cone.generators().len(), 1);
        assert!(nc.cone.generators()[0].approx_eq(&Vector::new(alloc::vec![1.0, 0.0]), 1e-12));
        let inner = normal_cone(&s, &Vector::new(alloc::vec![-1.0, 0.0]), Flavor::Convex, ACTIVE)
            .unwrap();
        assert!(inner.cone.is_zero());
        let outside = normal_cone(&s, &Vector::new(alloc::vec![1.0, 0.0]), Flavor::Convex, ACTIVE);
        assert!(matches!(outside, Err(SetError::PointNotInSet)));
    }

    #[test]
    fn union_frechet_cone_is_intersection() {
        // {x2 <= 0} ∪ {x1 <= 0} at the origin: cones {(0,1)} and {(1,0)}
        // intersect in the zero cone.
        let u = SetExpr::Union {
            members: alloc::vec![
                SetExpr::halfspace(Vector::new(alloc::vec![0.0, 1.0]), 0.0),
                SetExpr::halfspace(Vector::new(alloc::vec![1.0, 0.0]), 0.0),
            ],
        };
        let nc = normal_cone(&u, &Vector::zeros(2), Flavor::Frechet, ACTIVE).unwrap();
        assert!(nc.cone.is_zero());
        // Clarke is refused at the multi-member point.
        let clarke = normal_cone(&u, &Vector::zeros(2), Flavor::Clarke, ACTIVE);
        assert!(matches!(clarke, Err(SetError::UnsupportedFlavor { .. })));
        // Away from the junction only one member is active: delegate.
        let nc2 =
            normal_cone(&u, &Vector::new(alloc::vec![5.0, 0.0]), Flavor::Frechet, ACTIVE).unwrap();
        assert_eq!(nc2.cone.generators().len(), 1);
    }

    #[test]
    fn union_frechet_cone_sampled_limsup() {
        // Definition check: generators g of the Fréchet cone satisfy
        // <g, x' - x> <= 0.01 |x' - x| for sampled set points x' near x.
        let u = SetExpr::Union {
            members: alloc::vec![
                SetExpr::halfspace(Vector::new(alloc::vec![0.0, 1.0]), 0.0),
                SetExpr::box_set(&[-2.0, -2.0], &[0.0, 0.0]),
            ],
        };
        let x = Vector::zeros(2);
        let nc = normal_cone(&u, &x, Flavor::Frechet, ACTIVE).unwrap();
        // Cones {(0,1)} and {(1,0),(0,1)} intersect in the upward ray.
        assert!(!nc.cone.is_zero());
        assert!(cone_contains(&nc.cone, &Vector::new(alloc::vec![0.0, 1.0]), 1e-9));
        assert!(!cone_contains(&nc.cone, &Vector::new(alloc::vec![1.0, 0.0]), 1e-9));
        let mut sampler = Sampler::new(7);
        let mut checked = 0usize;
        for _ in 0..10_000 {
            let z = x.add(&sampler.in_cube(2, 0.05));
            let (xp, _) = project(&u, &z, &NormSpec::Euclidean).unwrap();
            let step = xp.sub(&x);
            let n = step.norm2();
            if n < 1e-12 {
                continue;
            }
            checked += 1;
            for g in nc.cone.generators() {
                assert!(
                    g.dot(&step) <= 0.01 * g.norm2() * n + 1e-12,
                    "limsup violation: g={:?} step={:?}",
                    g.as_slice(),
                    step.as_slice()
                );
            }
        }
        assert!(checked > 5_000);
    }

    #[test]
    fn tangent_cone_box_corner_and_polarity() {
        let s = SetExpr::box_set(&[0.0, 0.0], &[1.0, 1.0]);
        let corner = Vector::zeros(2);
        let tc = tangent_cone(&s, &corner, ACTIVE).unwrap();
        for g in [
            Vector::new(alloc::vec![1.0, 0.0]),
            Vector::new(alloc::vec![0.0, 1.0]),
            Vector::new(alloc::vec![0.7, 0.3]),
        ] {
            assert!(cone_contains(&tc.cone, &g, 1e-8));
        }
        assert!(!cone_contains(&tc.cone, &Vector::new(alloc::vec![-0.1, 0.5]), 1e-8));
        // Polarity: tangent cone = polar of normal cone at every tested point.
        let mut sampler = Sampler::new(11);
        for _ in 0..20 {
            let x = {
                let z = sampler.in_cube(2, 1.5).add(&Vector::new(alloc::vec![0.5, 0.5]));
                project(&s, &z, &NormSpec::Euclidean).unwrap().0
            };
            let nc = normal_cone(&s, &x, Flavor::Convex, ACTIVE).unwrap();
            let tc = tangent_cone(&s, &x, ACTIVE).unwrap();
            let polar = cone_polar(&nc.cone).unwrap();
            assert!(polar.set_eq(&tc.cone, 1e-7), "polarity failed at {:?}", x.as_slice());
        }
    }

    #[test]
    fn translate_shifts_geometry() {
        let s = halfplane().translated(Vector::new(alloc::vec![3.0, 1.0]));
        assert!(s.contains(&Vector::new(alloc::vec![3.0, 9.0]), ACTIVE).unwrap());
        assert!(!s.contains(&Vector::new(alloc::vec![3.1, 0.0]), ACTIVE).unwrap());
        let nc = normal_cone(&s, &Vector::new(alloc::vec![3.0, 0.0]), Flavor::Convex, ACTIVE)
            .unwrap();
        assert_eq!(nc.cone.generators().len(), 1);
        assert_eq!(nc.point, Vector::new(alloc::vec![3.0, 0.0]));
        let (p, d) = project(&s, &Vector::new(alloc::vec![5.0, 0.0]), &NormSpec::Euclidean)
            .unwrap();
        assert!(p.approx_eq(&Vector::new(alloc::vec![3.0, 0.0]), 1e-9));
        assert!((d - 2.0).abs() < 1e-9);
    }

    #[test]
    fn product_cone_blockwise() {
        let h1 = normal_cone(
            &halfplane(),
            &Vector::new(alloc::vec![0.0, 2.0]),
            Flavor::Convex,
            ACTIVE,
        )
        .unwrap();
        let h2 = normal_cone(
            &SetExpr::halfspace(Vector::new(alloc::vec![0.0, -1.0]), 0.0),
            &Vector::new(alloc::vec![7.0, 0.0]),
            Flavor::Convex,
            ACTIVE,
        )
        .unwrap();
        let prod = product_cone(&[h1.clone(), h2], true).unwrap();
        assert_eq!(prod.cone.dim(), 4);
        assert_eq!(prod.cone.generators().len(), 2);
        assert!(cone_contains(
            &prod.cone,
            &Vector::new(alloc::vec![2.0, 0.0, 0.0, -3.0]),
            1e-9
        ));
        assert!(!cone_contains(
            &prod.cone,
            &Vector::new(alloc::vec![2.0, 0.0, 0.0, 3.0]),
            1e-9
        ));
        // Zero cone × cone keeps only the second block's generators.
        let z = ConeAtPoint {
            point: Vector::zeros(2),
            flavor: Flavor::Convex,
            cone: Cone::zero(2),
            activity_tol: ACTIVE,
            warnings: Vec::new(),
        };
        let with_zero = product_cone(&[z, h1], true).unwrap();
        assert_eq!(with_zero.cone.generators().len(), 1);
        assert_eq!(with_zero.cone.generators()[0].dim(), 4);
        // Uncertified compatibility shows up as a warning.
        let warned = product_cone(
            &[ConeAtPoint {
                point: Vector::zeros(1),
                flavor: Flavor::Convex,
                cone: Cone::zero(1),
                activity_tol: ACTIVE,
                warnings: Vec::new(),
            }],
            false,
        )
        .unwrap();
        assert_eq!(warned.warnings.len(), 1);
    }

    #[test]
    fn product_cone_sampled_equivalence() {
        // Random cone members of the product are blockwise members and
        // conversely.
        let box1 = SetExpr::box_set(&[0.0, 0.0], &[1.0, 1.0]);
        let c1 = normal_cone(&box1, &Vector::zeros(2), Flavor::Convex, ACTIVE).unwrap();
        let c2 = normal_cone(
            &halfplane(),
            &Vector::new(alloc::vec![0.0, 1.0]),
            Flavor::Convex,
            ACTIVE,
        )
        .unwrap();
        let prod = product_cone(&[c1.clone(), c2.clone()], true).unwrap();
        let mut sampler = Sampler::new(23);
        for _ in 0..10_000 {
            // Forward: blockwise members flatten into the product cone.
            let w1 = sampler.simplex_weights(c1.cone.generators().len().max(1));
            let w2 = sampler.simplex_weights(c2.cone.generators().len().max(1));
            let mut v = alloc::vec![0.0; 4];
            for (g, w) in c1.cone.generators().iter().zip(&w1) {
                v[0] += w * g[0];
                v[1] += w * g[1];
            }
            for (g, w) in c2.cone.generators().iter().zip(&w2) {
                v[2] += w * g[0];
                v[3] += w * g[1];
            }
            assert!(cone_contains(&prod.cone, &Vector::new(v), 1e-8));
            // Reverse: product members restrict to blockwise members.
            let wp = sampler.simplex_weights(prod.cone.generators().len());
            let mut u = alloc::vec![0.0; 4];
            for (g, w) in prod.cone.generators().iter().zip(&wp) {
                for i in 0..4 {
                    u[i] += w * g[i];
                }
            }
            assert!(cone_contains(&c1.cone, &Vector::new(u[0..2].to_vec()), 1e-8));
            assert!(cone_contains(&c2.cone, &Vector::new(u[2..4].to_vec()), 1e-8));
        }
    }

    #[test]
    fn smooth_ball_normal_is_radial_ray() {
        let ball = SetExpr::Ball {
            center: Vector::zeros(2),
            radius: 5.0,
            norm: NormSpec::Euclidean,
            closed: true,
        };
        let x = Vector::new(alloc::vec![3.0, 4.0]);
        let nc = normal_cone(&ball, &x, Flavor::Convex, ACTIVE).unwrap();
        assert_eq!(nc.cone.generators().len(), 1);
        let g = &nc.cone.generators()[0];
        assert!(g.approx_eq(&Vector::new(alloc::vec![0.6, 0.8]), 1e-9));
        // Open ball: interior points carry the zero cone, boundary is outside.
        let open = SetExpr::Ball {
            center: Vector::zeros(2),
            radius: 5.0,
            norm: NormSpec::Euclidean,
            closed: false,
        };
        let inner = normal_cone(&open, &Vector::new(alloc::vec![1.0, 1.0]), Flavor::Frechet, ACTIVE)
            .unwrap();
        assert!(inner.cone.is_zero());
        assert!(matches!(
            normal_cone(&open, &x, Flavor::Frechet, ACTIVE),
            Err(SetError::PointNotInSet)
        ));
    }

    #[test]
    fn convex_flavor_agreement() {
        let sets = [
            SetExpr::box_set(&[0.0, 0.0], &[1.0, 1.0]),
            SetExpr::Ball {
                center: Vector::zeros(2),
                radius: 1.0,
                norm: NormSpec::l1(),
                closed: true,
            },
            halfplane(),
        ];
        let pts = [
            Vector::new(alloc::vec![0.0, 0.0]),
            Vector::new(alloc::vec![1.0, 0.0]),
            Vector::new(alloc::vec![0.0, 3.0]),
        ];
        for (s, x) in sets.iter().zip(&pts) {
            let f = normal_cone(s, x, Flavor::Frechet, ACTIVE).unwrap();
            let c = normal_cone(s, x, Flavor::Clarke, ACTIVE).unwrap();
            let v = normal_cone(s, x, Flavor::Convex, ACTIVE).unwrap();
            assert!(f.cone.set_eq(&c.cone, 1e-9));
            assert!(f.cone.set_eq(&v.cone, 1e-9));
        }
    }

    #[test]
    fn projection_matches_bruteforce_grid() {
        // Oracle: dense grid scan over the set, d <= 3.
        let s = SetExpr::box_set(&[-1.0, 0.0], &[1.0, 2.0]);
        let x = Vector::new(alloc::vec![2.5, -1.0]);
        let mut best = f64::INFINITY;
        let n = 200;
        for i in 0..=n {
            for j in 0..=n {
                let y = Vector::new(alloc::vec![
                    -1.0 + 2.0 * (i as f64) / (n as f64),
                    2.0 * (j as f64) / (n as f64),
                ]);
                best = best.min(y.sub(&x).norm2());
            }
        }
        let (_, d) = project(&s, &x, &NormSpec::Euclidean).unwrap();
        assert!((d - best).abs() < 2e-2);
        assert!(d <= best + 1e-9);
    }

    #[test]
    fn validate_rejects_empty_and_mismatched() {
        let empty = SetExpr::Polyhedron {
            dim: 1,
            rows: alloc::vec![Vector::new(alloc::vec![1.0]), Vector::new(alloc::vec![-1.0])],
            bounds: alloc::vec![0.0, -1.0],
        };
        assert!(matches!(empty.validate(), Err(SetError::EmptySet(_))));
        let mixed = SetExpr::Union {
            members: alloc::vec![halfplane(), SetExpr::halfspace(Vector::new(alloc::vec![1.0]), 0.0)],
        };
        assert!(matches!(mixed.validate(), Err(SetError::DimensionMismatch { .. })));
        assert!(SetExpr::box_set(&[0.0], &[1.0]).validate().is_ok());
    }
}
