//! Dense real vectors and block tuples.
//!
//! [`Vector`] is the single coordinate type used across the crate. Points of
//! a product space `X^n` (all factors the same `R^d`) are carried either as
//! slices `&[Vector]` or flattened into one `Vector` of length `n * d`;
//! [`flatten`] and [`split_blocks`] convert between the two.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Index;

/// Dense real coordinate tuple with finite entries.
#[derive(Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    /// Wraps raw coordinates.
    ///
    /// # Panics
    ///
    /// Panics if any entry is NaN or infinite; every constructor in the
    /// crate maintains the finiteness invariant, and file loaders validate
    /// before calling in.
    pub fn new(data: Vec<f64>) -> Self {
        assert!(
            data.iter().all(|x| x.is_finite()),
            "vector entries must be finite"
        );
        Vector { data }
    }

    /// The zero vector of dimension `dim`.
    pub fn zeros(dim: usize) -> Self {
        Vector { data: vec![0.0; dim] }
    }

    /// The `i`-th standard basis vector of dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut data = vec![0.0; dim];
        data[i] = 1.0;
        Vector { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn add(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector {
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector {
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector {
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn neg(&self) -> Vector {
        self.scale(-1.0)
    }

    /// Euclidean length; the default metric for membership tolerances.
    pub fn norm2(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|a| a * a).sum())
    }

    /// Largest absolute coordinate.
    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// True when every coordinate is within `tol` of `other`'s.
    pub fn approx_eq(&self, other: &Vector, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .data
                .iter()
                .zip(other.data.iter())
                .all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Sum of several vectors of equal dimension.
    pub fn sum(vs: &[Vector]) -> Vector {
        assert!(!vs.is_empty(), "sum of no vectors is dimensionless");
        let mut acc = Vector::zeros(vs[0].dim());
        for v in vs {
            acc = acc.add(v);
        }
        acc
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.iter()).finish()
    }
}

impl From<Vec<f64>> for Vector {
    fn from(data: Vec<f64>) -> Self {
        Vector::new(data)
    }
}

/// Concatenates the blocks of a product-space point into one flat vector.
pub fn flatten(blocks: &[Vector]) -> Vector {
    let mut data = Vec::with_capacity(blocks.iter().map(Vector::dim).sum());
    for b in blocks {
        data.extend_from_slice(b.as_slice());
    }
    Vector { data }
}

/// Splits a flat product-space point into `n` equal blocks.
///
/// # Panics
///
/// Panics if the dimension is not divisible by `n`.
pub fn split_blocks(v: &Vector, n: usize) -> Vec<Vector> {
    assert!(n > 0 && v.dim().is_multiple_of(n), "dimension must split into n blocks");
    let d = v.dim() / n;
    (0..n)
        .map(|i| Vector::new(v.as_slice()[i * d..(i + 1) * d].to_vec()))
        .collect()
}

/// Pairwise differences against the last block: `(u_1 - u_n, ..., u_{n-1} - u_n)`.
///
/// This is the argument tuple of the separation objective; collections whose
/// blocks agree map to zero.
pub fn diffs_against_last(blocks: &[Vector]) -> Vec<Vector> {
    let n = blocks.len();
    assert!(n >= 2, "need at least two blocks");
    let last = &blocks[n - 1];
    blocks[..n - 1].iter().map(|b| b.sub(last)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_and_split_round_trip() {
        let blocks = vec![
            Vector::new(vec![1.0, 2.0]),
            Vector::new(vec![3.0, 4.0]),
            Vector::new(vec![5.0, 6.0]),
        ];
        let flat = flatten(&blocks);
        assert_eq!(flat.dim(), 6);
        assert_eq!(split_blocks(&flat, 3), blocks);
    }

    #[test]
    fn diffs_subtract_last_block() {
        let blocks = vec![
            Vector::new(vec![1.0, 0.0]),
            Vector::new(vec![0.0, 2.0]),
            Vector::new(vec![1.0, 1.0]),
        ];
        let d = diffs_against_last(&blocks);
        assert_eq!(d.len(), 2);
        assert_eq!(d[0], Vector::new(vec![0.0, -1.0]));
        assert_eq!(d[1], Vector::new(vec![-1.0, 1.0]));
    }

    #[test]
    #[should_panic]
    fn non_finite_rejected() {
        let _ = Vector::new(vec![f64::NAN]);
    }
}
