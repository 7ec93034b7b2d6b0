//! Small dense linear-algebra helpers (Gaussian elimination with full
//! pivoting). Shared by the simplex ray checks, least-squares solves and
//! cone pruning; never exposed outside the crate.

#![allow(clippy::needless_range_loop)] // index loops mirror the tableau math

use alloc::vec;
use alloc::vec::Vec;

use crate::tol::PIVOT;
use crate::vector::Vector;

/// Solves the square system `A z = b` in place; `None` if `A` is singular
/// relative to the pivot tolerance.
#[cfg(test)]
pub(crate) fn solve_square(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    solve_square_with_tol(a, b, PIVOT).ok()
}

/// Least-squares weights `z` minimizing `|cols * z - target|_2`, via normal
/// equations with full pivoting. Rank-deficient directions get weight zero,
/// so the result is always *a* minimizer (not necessarily the min-norm one).
pub(crate) fn lstsq(cols: &[Vector], target: &Vector) -> Vec<f64> {
    let k = cols.len();
    if k == 0 {
        return Vec::new();
    }
    let mut g: Vec<Vec<f64>> = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for i in 0..k {
        for j in i..k {
            let v = cols[i].dot(&cols[j]);
            g[i][j] = v;
            g[j][i] = v;
        }
        rhs[i] = cols[i].dot(target);
    }
    // Eliminate with symmetric pivoting; zero out directions whose pivot
    // falls below the tolerance (they are linearly dependent on the rest).
    let mut active: Vec<usize> = (0..k).collect();
    let scale = g.iter().flat_map(|r| r.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    let drop_tol = PIVOT * scale.max(1.0);
    let mut z = vec![0.0; k];
    // Repeatedly try to solve on the active set, dropping dependent columns.
    for _ in 0..=k {
        let mut sub: Vec<Vec<f64>> = active
            .iter()
            .map(|&i| active.iter().map(|&j| g[i][j]).collect())
            .collect();
        let mut sb: Vec<f64> = active.iter().map(|&i| rhs[i]).collect();
        if active.is_empty() {
            break;
        }
        match solve_square_with_tol(&mut sub, &mut sb, drop_tol) {
            Ok(sol) => {
                for (slot, &i) in active.iter().enumerate() {
                    z[i] = sol[slot];
                }
                return z;
            }
            Err(dependent_slot) => {
                active.remove(dependent_slot);
            }
        }
    }
    z
}

/// Like [`solve_square`] but reports *which* column broke (for rank-deficient
/// handling) instead of just `None`.
fn solve_square_with_tol(
    a: &mut [Vec<f64>],
    b: &mut [f64],
    tol: f64,
) -> Result<Vec<f64>, usize> {
    let n = b.len();
    let mut col_perm: Vec<usize> = (0..n).collect();
    for step in 0..n {
        let (mut pr, mut pc, mut pv) = (step, step, 0.0f64);
        for r in step..n {
            for c in step..n {
                if a[r][c].abs() > pv {
                    pv = a[r][c].abs();
                    pr = r;
                    pc = c;
                }
            }
        }
        if pv <= tol {
            return Err(col_perm[step]);
        }
        a.swap(step, pr);
        b.swap(step, pr);
        if pc != step {
            for row in a.iter_mut() {
                row.swap(step, pc);
            }
            col_perm.swap(step, pc);
        }
        let d = a[step][step];
        for r in 0..n {
            if r == step {
                continue;
            }
            let f = a[r][step] / d;
            if f != 0.0 {
                for c in step..n {
                    a[r][c] -= f * a[step][c];
                }
                a[r][step] = 0.0;
                b[r] -= f * b[step];
            }
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        z[col_perm[i]] = b[i] / a[i][i];
    }
    Ok(z)
}

/// Numerical rank of a list of vectors.
pub(crate) fn rank(rows: &[Vector], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let dim = rows[0].dim();
    let mut mat: Vec<Vec<f64>> = rows.iter().map(|r| r.as_slice().to_vec()).collect();
    let mut r = 0;
    for c in 0..dim {
        let (mut pi, mut pv) = (r, 0.0f64);
        for i in r..mat.len() {
            if mat[i][c].abs() > pv {
                pv = mat[i][c].abs();
                pi = i;
            }
        }
        if pv <= tol {
            continue;
        }
        mat.swap(r, pi);
        for i in 0..mat.len() {
            if i == r {
                continue;
            }
            let f = mat[i][c] / mat[r][c];
            if f != 0.0 {
                for cc in c..dim {
                    mat[i][cc] -= f * mat[r][cc];
                }
            }
        }
        r += 1;
        if r == mat.len() {
            break;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let mut a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let mut b = vec![5.0, 10.0];
        let z = solve_square(&mut a, &mut b).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-12);
        assert!((z[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_detected() {
        let mut a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        let mut b = vec![1.0, 2.0];
        assert!(solve_square(&mut a, &mut b).is_none());
    }

    #[test]
    fn lstsq_projects() {
        // Project (1, 1, 1) onto span{e1, e2}: weights (1, 1).
        let cols = [Vector::basis(3, 0), Vector::basis(3, 1)];
        let z = lstsq(&cols, &Vector::new(vec![1.0, 1.0, 1.0]));
        assert!((z[0] - 1.0).abs() < 1e-12 && (z[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lstsq_handles_dependent_columns() {
        let cols = [
            Vector::new(vec![1.0, 0.0]),
            Vector::new(vec![1.0, 0.0]),
            Vector::new(vec![0.0, 1.0]),
        ];
        let z = lstsq(&cols, &Vector::new(vec![2.0, 3.0]));
        let rec = Vector::new(vec![z[0] + z[1], z[2]]);
        assert!(rec.approx_eq(&Vector::new(vec![2.0, 3.0]), 1e-10));
    }

    #[test]
    fn rank_counts_independent_rows() {
        let rows = [
            Vector::new(vec![1.0, 0.0, 0.0]),
            Vector::new(vec![0.0, 1.0, 0.0]),
            Vector::new(vec![1.0, 1.0, 0.0]),
        ];
        assert_eq!(rank(&rows, 1e-9), 2);
    }
}
