//! Incremental LP construction.
//!
//! The variational layers assemble programs out of affine forms over a
//! growing variable pool (epigraph variables, cone weights, block
//! coordinates). [`LpBuilder`] collects sparse `<=`/`==` rows over such
//! forms and densifies them into a [`LinearProgram`] on solve.

use alloc::vec;
use alloc::vec::Vec;

use super::lp::{solve_lp, LinearProgram, LpOutcome, Sense};
use super::PolyError;
use crate::vector::Vector;

/// Sparse affine form `sum(coeff * var) + constant`.
#[derive(Clone, Debug, Default)]
pub struct Lin {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Lin {
    pub fn var(i: usize) -> Lin {
        Lin { terms: vec![(i, 1.0)], constant: 0.0 }
    }

    pub fn constant(c: f64) -> Lin {
        Lin { terms: Vec::new(), constant: c }
    }

    pub fn term(i: usize, coeff: f64) -> Lin {
        Lin { terms: vec![(i, coeff)], constant: 0.0 }
    }

    pub fn plus(&self, other: &Lin) -> Lin {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().copied());
        Lin { terms, constant: self.constant + other.constant }
    }

    pub fn minus(&self, other: &Lin) -> Lin {
        self.plus(&other.scaled(-1.0))
    }

    pub fn scaled(&self, s: f64) -> Lin {
        Lin {
            terms: self.terms.iter().map(|&(i, c)| (i, c * s)).collect(),
            constant: self.constant * s,
        }
    }

    pub fn shifted(&self, c: f64) -> Lin {
        Lin { terms: self.terms.clone(), constant: self.constant + c }
    }

    /// Weighted sum of forms.
    pub fn combine(parts: &[(f64, &Lin)]) -> Lin {
        let mut out = Lin::default();
        for &(w, lin) in parts {
            out = out.plus(&lin.scaled(w));
        }
        out
    }

    /// Evaluates the form at a dense assignment.
    pub fn eval(&self, x: &Vector) -> f64 {
        self.constant + self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>()
    }
}

/// Accumulates an optimization program over a growing variable pool.
#[derive(Clone, Debug)]
pub struct LpBuilder {
    nvars: usize,
    rows: Vec<(Lin, f64)>,
    objective: Lin,
    sense: Sense,
}

impl LpBuilder {
    pub fn new() -> Self {
        LpBuilder { nvars: 0, rows: Vec::new(), objective: Lin::default(), sense: Sense::Minimize }
    }

    pub fn num_vars(&self) -> usize {
        self.nvars
    }

    /// Allocates a fresh free variable.
    pub fn fresh(&mut self) -> usize {
        self.nvars += 1;
        self.nvars - 1
    }

    /// Allocates `k` fresh free variables, returned in order.
    pub fn fresh_block(&mut self, k: usize) -> Vec<usize> {
        (0..k).map(|_| self.fresh()).collect()
    }

    /// Adds `lhs <= rhs`.
    pub fn le(&mut self, lhs: &Lin, rhs: &Lin) {
        let diff = lhs.minus(rhs);
        // Moved-constant convention: terms <= -constant.
        let bound = -diff.constant;
        self.rows.push((Lin { terms: diff.terms, constant: 0.0 }, bound));
    }

    /// Adds `lhs == rhs` (as a row pair).
    pub fn eq(&mut self, lhs: &Lin, rhs: &Lin) {
        self.le(lhs, rhs);
        self.le(rhs, lhs);
    }

    /// Constrains `var >= 0`.
    pub fn nonneg(&mut self, var: usize) {
        self.le(&Lin::term(var, -1.0), &Lin::constant(0.0));
    }

    pub fn minimize(&mut self, obj: Lin) {
        self.objective = obj;
        self.sense = Sense::Minimize;
    }

    pub fn maximize(&mut self, obj: Lin) {
        self.objective = obj;
        self.sense = Sense::Maximize;
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Densifies and solves; the objective's constant offset is folded into
    /// the reported value.
    pub fn solve(&self) -> Result<LpOutcome, PolyError> {
        let mut obj = vec![0.0; self.nvars];
        for &(i, c) in &self.objective.terms {
            obj[i] += c;
        }
        let mut rows = Vec::with_capacity(self.rows.len());
        let mut bounds = Vec::with_capacity(self.rows.len());
        for (lin, b) in &self.rows {
            let mut dense = vec![0.0; self.nvars];
            for &(i, c) in &lin.terms {
                dense[i] += c;
            }
            rows.push(Vector::new(dense));
            bounds.push(*b);
        }
        let lp = LinearProgram {
            sense: self.sense,
            objective: Vector::new(obj),
            rows,
            bounds,
        };
        let out = solve_lp(&lp)?;
        Ok(match out {
            LpOutcome::Optimal(mut sol) => {
                sol.value += self.objective.constant;
                LpOutcome::Optimal(sol)
            }
            other => other,
        })
    }
}

impl Default for LpBuilder {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epigraph_of_abs() {
        // min s with |x - 3| <= s and 0 <= x <= 1: optimum s = 2 at x = 1.
        let mut b = LpBuilder::new();
        let x = b.fresh();
        let s = b.fresh();
        b.le(&Lin::var(x).shifted(-3.0), &Lin::var(s));
        b.le(&Lin::var(x).shifted(-3.0).scaled(-1.0), &Lin::var(s));
        b.nonneg(x);
        b.le(&Lin::var(x), &Lin::constant(1.0));
        b.minimize(Lin::var(s));
        match b.solve().unwrap() {
            LpOutcome::Optimal(sol) => {
                assert!((sol.value - 2.0).abs() < 1e-9);
                assert!((sol.point[x] - 1.0).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn objective_constant_folded_in() {
        let mut b = LpBuilder::new();
        let x = b.fresh();
        b.nonneg(x);
        b.minimize(Lin::var(x).shifted(5.0));
        match b.solve().unwrap() {
            LpOutcome::Optimal(sol) => assert!((sol.value - 5.0).abs() < 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }
}
