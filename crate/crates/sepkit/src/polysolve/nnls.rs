//! Nonnegative least squares (Lawson–Hanson active set).
//!
//! Solves `min |G t - v|_2` over `t >= 0`, which is exactly the Euclidean
//! projection onto the finitely generated cone with generators the columns
//! of `G`. The returned weights satisfy the KKT conditions to tolerance,
//! which is re-verified before returning — so the distance is certified, not
//! merely iterated.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::linalg::lstsq;
use super::PolyError;
use crate::vector::Vector;

/// Result of an NNLS solve.
#[derive(Clone, Debug)]
pub struct NnlsResult {
    /// Nonnegative weights, one per generator.
    pub weights: Vec<f64>,
    /// `G t`, the projection point.
    pub point: Vector,
    /// `|v - G t|_2`.
    pub distance: f64,
}

/// Lawson–Hanson with lowest-index tie-breaking (deterministic).
pub fn nnls(gens: &[Vector], v: &Vector) -> Result<NnlsResult, PolyError> {
    let k = gens.len();
    let dim = v.dim();
    for g in gens {
        if g.dim() != dim {
            return Err(PolyError::DimensionMismatch { expected: dim, got: g.dim() });
        }
    }
    let mut t = vec![0.0; k];
    let mut passive: Vec<bool> = vec![false; k];
    let resid = |t: &[f64]| -> Vector {
        let mut r = v.clone();
        for (j, g) in gens.iter().enumerate() {
            if t[j] != 0.0 {
                r = r.sub(&g.scale(t[j]));
            }
        }
        r
    };
    let scale = gens
        .iter()
        .map(Vector::norm2)
        .fold(v.norm2(), f64::max)
        .max(1.0);
    let grad_tol = 1e-12 * scale * scale;
    let outer_cap = 3 * k + 30;
    let mut outer = 0;
    loop {
        outer += 1;
        if outer > outer_cap {
            return Err(PolyError::Numerical(format!(
                "nonnegative least squares failed to converge in {outer_cap} passes"
            )));
        }
        let r = resid(&t);
        // Gradient of 1/2 |v - G t|^2 w.r.t. t_j is -<g_j, r>.
        let mut enter = None;
        let mut best = grad_tol;
        for (j, g) in gens.iter().enumerate() {
            if !passive[j] {
                let w = g.dot(&r);
                if w > best {
                    best = w;
                    enter = Some(j);
                }
            }
        }
        let Some(j) = enter else {
            // KKT satisfied: all inactive gradients nonpositive.
            let point = v.sub(&r);
            return verify(gens, v, t, point, r.norm2(), grad_tol);
        };
        passive[j] = true;
        // Inner loop: restrict to the passive set, restore nonnegativity.
        for _ in 0..outer_cap {
            let idx: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
            let cols: Vec<Vector> = idx.iter().map(|&i| gens[i].clone()).collect();
            let z = lstsq(&cols, v);
            if z.iter().all(|&zi| zi > -1e-14) {
                for (slot, &i) in idx.iter().enumerate() {
                    t[i] = z[slot].max(0.0);
                }
                for i in 0..k {
                    if !passive[i] {
                        t[i] = 0.0;
                    }
                }
                break;
            }
            // Step from t toward z until the first weight hits zero.
            let mut alpha = 1.0f64;
            let mut drop_i = None;
            for (slot, &i) in idx.iter().enumerate() {
                if z[slot] <= 1e-14 {
                    let denom = t[i] - z[slot];
                    let a = if denom > 0.0 { t[i] / denom } else { 0.0 };
                    if a < alpha {
                        alpha = a;
                        drop_i = Some(i);
                    }
                }
            }
            for (slot, &i) in idx.iter().enumerate() {
                t[i] += alpha * (z[slot] - t[i]);
            }
            if let Some(i) = drop_i {
                t[i] = 0.0;
                passive[i] = false;
            } else {
                // No blocking weight; accept z on the next pass.
            }
        }
    }
}

fn verify(
    gens: &[Vector],
    v: &Vector,
    weights: Vec<f64>,
    point: Vector,
    distance: f64,
    grad_tol: f64,
) -> Result<NnlsResult, PolyError> {
    let r = v.sub(&point);
    for (j, g) in gens.iter().enumerate() {
        let w = g.dot(&r);
        // Inactive: gradient <= 0; active: gradient ~ 0 (complementarity).
        let cap = if weights[j] > 1e-12 { 1e3 * grad_tol } else { grad_tol * 10.0 };
        if w > cap {
            return Err(PolyError::Numerical(format!(
                "projection KKT violated on generator {j} (score {w:.3e})"
            )));
        }
    }
    Ok(NnlsResult { weights, point, distance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn inside_the_cone_projects_to_itself() {
        let gens = [Vector::basis(2, 0), Vector::basis(2, 1)];
        let out = nnls(&gens, &Vector::new(vec![2.0, 3.0])).unwrap();
        assert!(out.distance < 1e-12);
        assert!((out.weights[0] - 2.0).abs() < 1e-10);
        assert!((out.weights[1] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn opposite_of_a_ray_projects_to_origin() {
        let gens = [Vector::basis(2, 0)];
        let out = nnls(&gens, &Vector::new(vec![-1.0, 0.0])).unwrap();
        assert!((out.distance - 1.0).abs() < 1e-12);
        assert!(out.point.norm2() < 1e-12);
    }

    #[test]
    fn quadrant_distance_is_to_the_nearest_face() {
        let gens = [Vector::basis(2, 0), Vector::basis(2, 1)];
        let out = nnls(&gens, &Vector::new(vec![1.0, -2.0])).unwrap();
        assert!((out.distance - 2.0).abs() < 1e-12);
        assert!(out.point.approx_eq(&Vector::new(vec![1.0, 0.0]), 1e-10));
    }

    #[test]
    fn duplicate_generators_are_tolerated() {
        let gens = [
            Vector::new(vec![1.0, 0.0]),
            Vector::new(vec![1.0, 0.0]),
            Vector::new(vec![1.0, 1.0]),
        ];
        let out = nnls(&gens, &Vector::new(vec![0.5, 0.25])).unwrap();
        assert!(out.distance < 1e-10);
    }
}
