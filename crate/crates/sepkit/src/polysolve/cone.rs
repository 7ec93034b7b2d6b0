//! Finitely generated convex cones.
//!
//! A [`Cone`] is the set of nonnegative combinations of its generators; the
//! zero cone has no generators, and a lineality direction appears as an
//! opposite generator pair. Conversions between the generator and
//! half-space views run the double-description method with redundancy
//! pruning, so polarity, intersection and vertex enumeration are exact
//! (up to the pivot tolerance) at desk dimensions.

use alloc::format;
use alloc::vec::Vec;

use super::nnls::nnls;
use super::PolyError;
use crate::norms::{self, NormSpec};
use crate::vector::Vector;

/// Generator representation limit for the double-description paths. Base
/// spaces at desk scale are far below this; product-space cones are always
/// assembled blockwise and never pass through here.
const MAX_DD_DIM: usize = 9;

/// Finitely generated cone `{ sum t_j g_j : t >= 0 }`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cone {
    dim: usize,
    gens: Vec<Vector>,
}

impl Cone {
    /// Builds a cone from generators; zero generators are rejected.
    pub fn new(dim: usize, gens: Vec<Vector>) -> Result<Cone, PolyError> {
        for g in &gens {
            if g.dim() != dim {
                return Err(PolyError::DimensionMismatch { expected: dim, got: g.dim() });
            }
            if g.norm2() <= 1e-14 {
                return Err(PolyError::ZeroGenerator);
            }
        }
        Ok(Cone { dim, gens })
    }

    /// The zero cone `{0}`.
    pub fn zero(dim: usize) -> Cone {
        Cone { dim, gens: Vec::new() }
    }

    /// The whole space, generated by the signed standard basis.
    pub fn full(dim: usize) -> Cone {
        let mut gens = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            gens.push(Vector::basis(dim, i));
            gens.push(Vector::basis(dim, i).neg());
        }
        Cone { dim, gens }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vector] {
        &self.gens
    }

    pub fn is_zero(&self) -> bool {
        self.gens.is_empty()
    }

    /// Set equality via mutual generator membership.
    pub fn set_eq(&self, other: &Cone, tol: f64) -> bool {
        self.dim == other.dim
            && self.gens.iter().all(|g| cone_contains(other, g, tol))
            && other.gens.iter().all(|g| cone_contains(self, g, tol))
    }

    /// Embeds this cone as block `block` of `nblocks` copies of its space.
    pub fn embed(&self, nblocks: usize, block: usize) -> Cone {
        let d = self.dim;
        let gens = self
            .gens
            .iter()
            .map(|g| {
                let mut data = alloc::vec![0.0; nblocks * d];
                data[block * d..(block + 1) * d].copy_from_slice(g.as_slice());
                Vector::new(data)
            })
            .collect();
        Cone { dim: nblocks * d, gens }
    }
}

/// True iff `v` lies within Euclidean distance `tol` of the cone, decided by
/// the certified nonnegative least-squares projection.
pub fn cone_contains(c: &Cone, v: &Vector, tol: f64) -> bool {
    match cone_distance_euclid(c, v) {
        Ok((d, _)) => d <= tol,
        Err(_) => false,
    }
}

/// Euclidean distance to the cone and the projection point attaining it.
pub fn cone_distance_euclid(c: &Cone, v: &Vector) -> Result<(f64, Vector), PolyError> {
    if v.dim() != c.dim {
        return Err(PolyError::DimensionMismatch { expected: c.dim, got: v.dim() });
    }
    if c.is_zero() {
        return Ok((v.norm2(), Vector::zeros(c.dim)));
    }
    let out = nnls(&c.gens, v)?;
    Ok((out.distance, out.point))
}

/// Distance to a cone measured in an arbitrary norm.
#[derive(Clone, Debug)]
pub struct ConeDistance {
    /// Attained value `norm(v - witness)`; an upper bound on the infimum
    /// that is exact (gap 0) on the Euclidean and polyhedral paths.
    pub distance: f64,
    /// Cone point realizing `distance`.
    pub witness: Vector,
    /// Certified `distance - lower_bound`; 0 on exact paths.
    pub gap: f64,
}

/// Distance from `v` to the cone in the given norm.
///
/// Exact for Euclidean (nonnegative least squares) and for
/// LP-representable norms (epigraph program); other `l_p` norms take a
/// descent path from the Euclidean projection and report a norm-equivalence
/// gap bound.
pub fn cone_distance(v: &Vector, c: &Cone, norm: &NormSpec) -> Result<ConeDistance, PolyError> {
    if v.dim() != c.dim {
        return Err(PolyError::DimensionMismatch { expected: c.dim, got: v.dim() });
    }
    if c.is_zero() {
        let value = norms::eval_norm(norm, v).map_err(to_poly)?;
        return Ok(ConeDistance { distance: value, witness: Vector::zeros(c.dim), gap: 0.0 });
    }
    if matches!(norm, NormSpec::Euclidean) {
        let (d, w) = cone_distance_euclid(c, v)?;
        return Ok(ConeDistance { distance: d, witness: w, gap: 0.0 });
    }
    if norms::lp_representable(norm) {
        // min s  s.t.  norm(v - G t) <= s, t >= 0.
        let mut b = super::LpBuilder::new();
        let t = b.fresh_block(c.gens.len());
        for &tj in &t {
            b.nonneg(tj);
        }
        let s = b.fresh();
        let coords: Vec<super::Lin> = (0..c.dim)
            .map(|i| {
                let mut lin = super::Lin::constant(v[i]);
                for (j, g) in c.gens.iter().enumerate() {
                    if g[i] != 0.0 {
                        lin = lin.plus(&super::Lin::term(t[j], -g[i]));
                    }
                }
                lin
            })
            .collect();
        norms::norm_le(&mut b, norm, &coords, &super::Lin::var(s)).map_err(to_poly)?;
        b.minimize(super::Lin::var(s));
        match b.solve()? {
            super::LpOutcome::Optimal(sol) => {
                let weights: Vec<f64> = t.iter().map(|&i| sol.point[i].max(0.0)).collect();
                let witness = combine(&c.gens, &weights, c.dim);
                let attained = norms::eval_norm(norm, &v.sub(&witness)).map_err(to_poly)?;
                Ok(ConeDistance { distance: attained, witness, gap: 0.0 })
            }
            other => Err(PolyError::Numerical(format!(
                "cone distance program not optimal: {other:?}"
            ))),
        }
    } else {
        sampled_cone_distance(v, c, norm)
    }
}

/// Descent fallback for norms without an exact path: coordinate descent on
/// the generator weights from the Euclidean projection, with a
/// norm-equivalence lower bound certifying the reported gap.
fn sampled_cone_distance(v: &Vector, c: &Cone, norm: &NormSpec) -> Result<ConeDistance, PolyError> {
    let nn = nnls(&c.gens, v)?;
    let mut w = nn.weights;
    let eval = |weights: &[f64]| -> Result<f64, PolyError> {
        let point = combine(&c.gens, weights, c.dim);
        norms::eval_norm(norm, &v.sub(&point)).map_err(to_poly)
    };
    let mut cur = eval(&w)?;
    for _ in 0..200 {
        let before = cur;
        for j in 0..w.len() {
            // Golden-section over t_j >= 0 around the current weight.
            let span = (w[j].abs() + 1.0).max(v.norm2());
            let (mut lo, mut hi) = (0.0f64, w[j] + span);
            for _ in 0..60 {
                let m1 = lo + 0.381_966 * (hi - lo);
                let m2 = hi - 0.381_966 * (hi - lo);
                let mut wj = w.clone();
                wj[j] = m1;
                let f1 = eval(&wj)?;
                wj[j] = m2;
                let f2 = eval(&wj)?;
                if f1 <= f2 {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let mid = 0.5 * (lo + hi);
            let mut wj = w.clone();
            wj[j] = mid;
            let f = eval(&wj)?;
            if f < cur {
                w = wj;
                cur = f;
            }
        }
        if before - cur < 1e-12 {
            break;
        }
    }
    let witness = combine(&c.gens, &w, c.dim);
    // Lower bound: the norm dominates c * Euclidean with the standard
    // l_p-equivalence constant, so the true infimum is at least c * d_2.
    let d2 = nn.distance;
    let cp = norms::euclid_lower_factor(norm, c.dim);
    let lower = cp * d2;
    Ok(ConeDistance { distance: cur, witness, gap: (cur - lower).max(0.0) })
}

fn combine(gens: &[Vector], weights: &[f64], dim: usize) -> Vector {
    let mut p = Vector::zeros(dim);
    for (g, &w) in gens.iter().zip(weights) {
        if w != 0.0 {
            p = p.add(&g.scale(w));
        }
    }
    p
}

fn to_poly(e: norms::NormError) -> PolyError {
    PolyError::UnsupportedNorm(format!("{e}"))
}

/// Generators of `{ x : rows[k] . x <= 0 }` by incremental double
/// description starting from the full space.
pub fn cone_from_halfspaces(dim: usize, rows: &[Vector]) -> Result<Cone, PolyError> {
    if dim > MAX_DD_DIM {
        return Err(PolyError::Numerical(format!(
            "double description limited to dimension {MAX_DD_DIM}, got {dim}"
        )));
    }
    let mut rays: Vec<Vector> = Cone::full(dim).gens;
    for h in rows {
        if h.dim() != dim {
            return Err(PolyError::DimensionMismatch { expected: dim, got: h.dim() });
        }
        let mut keep: Vec<Vector> = Vec::new();
        let mut plus: Vec<Vector> = Vec::new();
        let mut minus: Vec<Vector> = Vec::new();
        for r in &rays {
            let s = h.dot(r);
            if s > 1e-10 {
                plus.push(r.clone());
            } else if s < -1e-10 {
                minus.push(r.clone());
                keep.push(r.clone());
            } else {
                keep.push(r.clone());
            }
        }
        for p in &plus {
            for m in &minus {
                let hp = h.dot(p);
                let hm = h.dot(m);
                // Combination lying exactly on the hyperplane h . x = 0.
                let w = m.scale(hp).sub(&p.scale(hm));
                let n = w.norm2();
                if n > 1e-10 {
                    keep.push(w.scale(1.0 / n));
                }
            }
        }
        rays = prune(keep)?;
    }
    Cone::new(dim, rays)
}

/// Normalizes, deduplicates, and removes generators expressible by the rest.
fn prune(mut rays: Vec<Vector>) -> Result<Vec<Vector>, PolyError> {
    for r in rays.iter_mut() {
        let n = r.norm2();
        if n > 0.0 {
            *r = r.scale(1.0 / n);
        }
    }
    rays.retain(|r| r.norm2() > 0.5);
    // Deduplicate identical directions (keep the first occurrence).
    let mut unique: Vec<Vector> = Vec::new();
    for r in rays {
        if !unique.iter().any(|u| u.dot(&r) >= 1.0 - 1e-12) {
            unique.push(r);
        }
    }
    // Drop rays already generated by the others (membership is certified by
    // the projection KKT check, so this preserves the set exactly).
    let mut i = 0;
    while i < unique.len() {
        let candidate = unique[i].clone();
        let rest: Vec<Vector> = unique
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| v.clone())
            .collect();
        if !rest.is_empty() {
            if let Ok(out) = nnls(&rest, &candidate) {
                if out.distance <= 1e-10 {
                    unique.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    Ok(unique)
}

/// Polar cone `{ h : <h, g> <= 0 for all generators g }`.
pub fn cone_polar(c: &Cone) -> Result<Cone, PolyError> {
    cone_from_halfspaces(c.dim, &c.gens)
}

/// Intersection of two cones of the same dimension (generator output).
pub fn cone_intersect(a: &Cone, b: &Cone) -> Result<Cone, PolyError> {
    if a.dim != b.dim {
        return Err(PolyError::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    let pa = cone_polar(a)?;
    let pb = cone_polar(b)?;
    let mut rows = pa.gens;
    rows.extend(pb.gens);
    cone_from_halfspaces(a.dim, &rows)
}

/// Vertices and recession rays of `{ x : rows[k] . x <= bounds[k] }` via the
/// homogenization cone in one extra dimension.
pub fn polytope_vertices(
    rows: &[Vector],
    bounds: &[f64],
) -> Result<(Vec<Vector>, Vec<Vector>), PolyError> {
    let d = rows.first().map(Vector::dim).unwrap_or(0);
    let mut hrows: Vec<Vector> = Vec::with_capacity(rows.len() + 1);
    for (r, &b) in rows.iter().zip(bounds) {
        let mut data = r.as_slice().to_vec();
        data.push(-b);
        hrows.push(Vector::new(data));
    }
    let mut w_floor = alloc::vec![0.0; d + 1];
    w_floor[d] = -1.0;
    hrows.push(Vector::new(w_floor));
    let cone = cone_from_halfspaces(d + 1, &hrows)?;
    let mut verts = Vec::new();
    let mut recession = Vec::new();
    for g in cone.generators() {
        let w = g[d];
        let x = Vector::new(g.as_slice()[..d].to_vec());
        if w > 1e-9 {
            verts.push(x.scale(1.0 / w));
        } else if x.norm2() > 1e-9 {
            recession.push(x.scale(1.0 / x.norm2()));
        }
    }
    Ok((verts, recession))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol::CONE_MEMBERSHIP;
    use alloc::vec;

    #[test]
    fn halfspace_cone_of_quadrant() {
        // { x : -x1 <= 0, -x2 <= 0 } = nonnegative quadrant.
        let c = cone_from_halfspaces(
            2,
            &[Vector::new(vec![-1.0, 0.0]), Vector::new(vec![0.0, -1.0])],
        )
        .unwrap();
        assert!(cone_contains(&c, &Vector::new(vec![2.0, 3.0]), CONE_MEMBERSHIP));
        assert!(!cone_contains(&c, &Vector::new(vec![-1.0, 1.0]), CONE_MEMBERSHIP));
        assert_eq!(c.generators().len(), 2);
    }

    #[test]
    fn polar_of_quadrant_is_negative_quadrant() {
        let quad = Cone::new(2, vec![Vector::basis(2, 0), Vector::basis(2, 1)]).unwrap();
        let polar = cone_polar(&quad).unwrap();
        let neg = Cone::new(2, vec![Vector::basis(2, 0).neg(), Vector::basis(2, 1).neg()]).unwrap();
        assert!(polar.set_eq(&neg, CONE_MEMBERSHIP));
    }

    #[test]
    fn double_polar_returns_the_cone() {
        let c = Cone::new(
            3,
            vec![
                Vector::new(vec![1.0, 0.0, 0.0]),
                Vector::new(vec![1.0, 1.0, 0.0]),
                Vector::new(vec![0.0, 0.0, 1.0]),
            ],
        )
        .unwrap();
        let pp = cone_polar(&cone_polar(&c).unwrap()).unwrap();
        assert!(pp.set_eq(&c, CONE_MEMBERSHIP));
    }

    #[test]
    fn intersect_halfplanes() {
        // cone{(1,0),(0,1)} meet cone{(0,1),(-1,0)} = ray{(0,1)}.
        let a = Cone::new(2, vec![Vector::basis(2, 0), Vector::basis(2, 1)]).unwrap();
        let b = Cone::new(2, vec![Vector::basis(2, 1), Vector::basis(2, 0).neg()]).unwrap();
        let c = cone_intersect(&a, &b).unwrap();
        let ray = Cone::new(2, vec![Vector::basis(2, 1)]).unwrap();
        assert!(c.set_eq(&ray, CONE_MEMBERSHIP));
    }

    #[test]
    fn lineality_survives_round_trip() {
        // The x1-axis as a two-sided generator pair.
        let line = Cone::new(2, vec![Vector::basis(2, 0), Vector::basis(2, 0).neg()]).unwrap();
        let pp = cone_polar(&cone_polar(&line).unwrap()).unwrap();
        assert!(pp.set_eq(&line, CONE_MEMBERSHIP));
        // Polar is the x2-axis line.
        let polar = cone_polar(&line).unwrap();
        let x2line = Cone::new(2, vec![Vector::basis(2, 1), Vector::basis(2, 1).neg()]).unwrap();
        assert!(polar.set_eq(&x2line, CONE_MEMBERSHIP));
    }

    #[test]
    fn unit_box_vertices() {
        let rows = vec![
            Vector::new(vec![1.0, 0.0]),
            Vector::new(vec![-1.0, 0.0]),
            Vector::new(vec![0.0, 1.0]),
            Vector::new(vec![0.0, -1.0]),
        ];
        let (mut verts, rays) = polytope_vertices(&rows, &[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(rays.is_empty());
        verts.sort_by(|a, b| (a[0], a[1]).partial_cmp(&(b[0], b[1])).unwrap());
        assert_eq!(verts.len(), 4);
        assert!(verts[0].approx_eq(&Vector::new(vec![0.0, 0.0]), 1e-9));
        assert!(verts[3].approx_eq(&Vector::new(vec![1.0, 1.0]), 1e-9));
    }

    #[test]
    fn halfline_polytope_reports_ray() {
        // { x >= 1 } in one dimension.
        let (verts, rays) = polytope_vertices(&[Vector::new(vec![-1.0])], &[-1.0]).unwrap();
        assert_eq!(verts.len(), 1);
        assert!((verts[0][0] - 1.0).abs() < 1e-9);
        assert_eq!(rays.len(), 1);
        assert!(rays[0][0] > 0.9);
    }
}
