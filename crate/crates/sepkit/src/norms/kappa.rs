//! Compatibility constants between base and product norms.
//!
//! Six inequalities tie a base norm, product norms on the `(n-1)`- and
//! `n`-fold spaces, and their duals; each holds with some constant `kappa`
//! and various results require specific ones. [`estimate_kappa`] returns
//! the best constant it can certify, preferring exact closed forms.
//!
//! For a product norm `phi(base(u_1), ..., base(u_n))` with monotone `phi`,
//! homogeneity and monotonicity give exact constants directly:
//! the supremum defining C3 is attained on one-hot tuples
//! (`kappa = max_i 1/phi(e_i)`), and C4, C5, C6 are all attained on
//! constant tuples (`kappa = phi(1, ..., 1)`; for C6 via biduality of
//! `phi`). For the two-norm conditions C1/C2 the `max{inner, gamma*tail}`
//! construction gives `kappa = max{1, c5(inner)/gamma}` and
//! `max{1, 1/gamma}`. Anything else falls back to seeded ratio
//! maximization with coordinate-ascent refinement; sampled values are
//! certified lower bounds, never upper bounds, and every report carries a
//! witness tuple that reproduces `kappa_hat`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::product::{
    phi_dual_attainer, phi_eval, prod_dual_spec, prod_eval, ProductKind, ProductNormSpec,
};
use super::{dual_attainer, eval_norm, validate, NormError, NormSpec};
use crate::sample::Sampler;
use crate::vector::{split_blocks, Vector};

/// The six base/product norm compatibility conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Compatibility {
    /// `max{ inner(u_1..u_{n-1}), inner(u_n, ..., u_n) } <= kappa * plus(u)`.
    C1,
    /// `max{ inner(u_1..u_{n-1}), base(u_n) } <= kappa * plus(u)`.
    C2,
    /// `max_i base(u_i) <= kappa * prod(u)`.
    C3,
    /// `prod(u) <= kappa * max_i base(u_i)`.
    C4,
    /// `prod(u, ..., u) <= kappa * base(u)`.
    C5,
    /// `sum_i dualbase(y_i) <= kappa * dualprod(y)`.
    C6,
}

impl Compatibility {
    pub fn label(&self) -> &'static str {
        match self {
            Compatibility::C1 => "C1",
            Compatibility::C2 => "C2",
            Compatibility::C3 => "C3",
            Compatibility::C4 => "C4",
            Compatibility::C5 => "C5",
            Compatibility::C6 => "C6",
        }
    }
}

/// Outcome of a constant estimation.
#[derive(Clone, Debug)]
pub struct CompatibilityReport {
    pub cond: Compatibility,
    /// Best certified constant: the analytic value when available,
    /// otherwise the largest sampled ratio.
    pub kappa_hat: f64,
    /// Block tuple attaining `kappa_hat` (a single base vector for C5;
    /// dual-space blocks for C6).
    pub witness: Vec<Vector>,
    /// Exact closed form, when the family admits one.
    pub analytic: Option<f64>,
    /// Ratio evaluations spent.
    pub budget_used: usize,
}

/// Recomputes the defining ratio at a block tuple, so that reports can be
/// re-verified independently of how they were produced.
pub fn kappa_ratio(
    cond: Compatibility,
    prod: &ProductNormSpec,
    inner: Option<&ProductNormSpec>,
    blocks: &[Vector],
) -> Result<f64, NormError> {
    let need_inner = || {
        inner.ok_or_else(|| {
            NormError::InvalidSpec(String::from("this condition needs the smaller product norm"))
        })
    };
    match cond {
        Compatibility::C3 => {
            let mut num = 0.0f64;
            for u in blocks {
                num = num.max(eval_norm(&prod.base, u)?);
            }
            ratio(num, prod_eval(prod, blocks)?)
        }
        Compatibility::C4 => {
            let mut den = 0.0f64;
            for u in blocks {
                den = den.max(eval_norm(&prod.base, u)?);
            }
            ratio(prod_eval(prod, blocks)?, den)
        }
        Compatibility::C5 => {
            if blocks.len() != 1 {
                return Err(NormError::InvalidSpec(String::from(
                    "the diagonal condition takes a single base vector",
                )));
            }
            let u = &blocks[0];
            let repeated: Vec<Vector> = (0..prod.n).map(|_| u.clone()).collect();
            ratio(prod_eval(prod, &repeated)?, eval_norm(&prod.base, u)?)
        }
        Compatibility::C6 => {
            let dual = prod_dual_spec(prod)?;
            let mut num = 0.0;
            for y in blocks {
                num += eval_norm(&dual.base, y)?;
            }
            ratio(num, prod_eval(&dual, blocks)?)
        }
        Compatibility::C1 => {
            let inner = need_inner()?;
            let head = &blocks[..blocks.len() - 1];
            let last = &blocks[blocks.len() - 1];
            let repeated: Vec<Vector> = (0..inner.n).map(|_| last.clone()).collect();
            let num = prod_eval(inner, head)?.max(prod_eval(inner, &repeated)?);
            ratio(num, prod_eval(prod, blocks)?)
        }
        Compatibility::C2 => {
            let inner = need_inner()?;
            let head = &blocks[..blocks.len() - 1];
            let last = &blocks[blocks.len() - 1];
            let num = prod_eval(inner, head)?.max(eval_norm(&prod.base, last)?);
            ratio(num, prod_eval(prod, blocks)?)
        }
    }
}

fn ratio(num: f64, den: f64) -> Result<f64, NormError> {
    if den <= 1e-12 {
        Err(NormError::ZeroVector)
    } else {
        Ok(num / den)
    }
}

/// `phi(1, ..., 1)`: the exact C4/C5/C6 constant of a monotone kind.
fn phi_at_ones(kind: &ProductKind, n: usize) -> Result<f64, NormError> {
    phi_eval(kind, &alloc::vec![1.0; n])
}

fn analytic_kappa(
    cond: Compatibility,
    prod: &ProductNormSpec,
    inner: Option<&ProductNormSpec>,
) -> Result<Option<(f64, Vec<Vector>)>, NormError> {
    let d_guess = base_dim_hint(&prod.base);
    match cond {
        Compatibility::C3 => {
            let mut best = 0.0f64;
            let mut best_i = 0usize;
            for i in 0..prod.n {
                let mut e = alloc::vec![0.0; prod.n];
                e[i] = 1.0;
                let v = phi_eval(&prod.kind, &e)?;
                if v <= 1e-12 {
                    return Ok(None);
                }
                if 1.0 / v > best {
                    best = 1.0 / v;
                    best_i = i;
                }
            }
            let mut blocks = alloc::vec![Vector::zeros(d_guess); prod.n];
            blocks[best_i] = Vector::basis(d_guess, 0);
            Ok(Some((best, blocks)))
        }
        Compatibility::C4 => {
            let k = phi_at_ones(&prod.kind, prod.n)?;
            let u = Vector::basis(d_guess, 0);
            Ok(Some((k, alloc::vec![u; prod.n])))
        }
        Compatibility::C5 => {
            let k = phi_at_ones(&prod.kind, prod.n)?;
            Ok(Some((k, alloc::vec![Vector::basis(d_guess, 0)])))
        }
        Compatibility::C6 => {
            let k = phi_at_ones(&prod.kind, prod.n)?;
            let a = phi_dual_attainer(&prod.kind, &alloc::vec![1.0; prod.n])?;
            let unit = dual_attainer(&prod.base, &Vector::basis(d_guess, 0))?;
            let blocks: Vec<Vector> = a.iter().map(|&ai| unit.scale(ai)).collect();
            Ok(Some((k, blocks)))
        }
        Compatibility::C1 | Compatibility::C2 => {
            let inner = match inner {
                Some(i) => i,
                None => return Ok(None),
            };
            // Closed forms cover the max{inner, gamma*tail} construction
            // when the supplied inner norm is the one inside the tail.
            if let ProductKind::MaxTail { inner: ik, gamma } = &prod.kind {
                if **ik == inner.kind && prod.base == inner.base && inner.n + 1 == prod.n {
                    let lever = match cond {
                        Compatibility::C1 => phi_at_ones(&inner.kind, inner.n)? / gamma,
                        _ => 1.0 / gamma,
                    };
                    let k = lever.max(1.0);
                    let mut blocks = alloc::vec![Vector::zeros(d_guess); prod.n];
                    if lever >= 1.0 {
                        // Zero head, unit tail attains the ratio.
                        blocks[prod.n - 1] = Vector::basis(d_guess, 0);
                    } else {
                        // Zero tail, one-hot head attains ratio 1.
                        blocks[0] = Vector::basis(d_guess, 0);
                    }
                    return Ok(Some((k, blocks)));
                }
            }
            Ok(None)
        }
    }
}

/// Dimension a family naturally lives in, used to build witnesses; scalar
/// families (Euclidean, plain `l_p`) default to one dimension, which is
/// enough because the ratios only involve block norm values.
fn base_dim_hint(base: &NormSpec) -> usize {
    match base {
        NormSpec::Euclidean | NormSpec::Lp { .. } => 1,
        NormSpec::WeightedLp { weights, .. } => weights.len(),
        NormSpec::Polyhedral { vertices } => vertices[0].dim(),
        NormSpec::PolyhedralH { facets } => facets[0].dim(),
    }
}

/// Estimates the compatibility constant of `cond` for the given norms.
///
/// `prod` is the norm on the larger product space (the `+`-decorated norm
/// for C1/C2); `inner` supplies the smaller-space product norm that C1 and
/// C2 compare against. `block_dim` fixes the base space. The analytic
/// constant is substituted whenever the family admits one, and seeded
/// sampling both cross-checks it and covers the remaining families.
pub fn estimate_kappa(
    cond: Compatibility,
    prod: &ProductNormSpec,
    inner: Option<&ProductNormSpec>,
    block_dim: usize,
    budget: usize,
    seed: u64,
) -> Result<CompatibilityReport, NormError> {
    validate(&prod.base, block_dim)?;
    if matches!(cond, Compatibility::C1 | Compatibility::C2) {
        let inner = inner.ok_or_else(|| {
            NormError::InvalidSpec(String::from("this condition needs the smaller product norm"))
        })?;
        if inner.n + 1 != prod.n {
            return Err(NormError::InvalidSpec(format!(
                "smaller norm must have {} blocks, got {}",
                prod.n - 1,
                inner.n
            )));
        }
    }
    let analytic = analytic_kappa(cond, prod, inner)?;
    // Witness tuples sampled in the requested block dimension.
    let nblocks = if matches!(cond, Compatibility::C5) { 1 } else { prod.n };
    let flat_dim = nblocks * block_dim;
    let eval_point = |flat: &Vector| -> Option<f64> {
        let blocks = split_blocks(flat, nblocks);
        kappa_ratio(cond, prod, inner, &blocks).ok()
    };
    let mut used = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    let mut best_pt: Option<Vector> = None;
    let mut sampler = Sampler::new(seed);
    let sample_budget = budget.max(64);
    while used < sample_budget {
        let pt = if used.is_multiple_of(2) {
            sampler.in_cube(flat_dim, 1.0)
        } else {
            sampler.direction(flat_dim)
        };
        used += 1;
        if let Some(v) = eval_point(&pt) {
            if v > best_val {
                best_val = v;
                best_pt = Some(pt);
            }
        }
    }
    // Coordinate-ascent refinement around the sampled maximizer.
    if let Some(mut pt) = best_pt.clone() {
        let mut h = 0.5;
        while h > 1e-6 && used < 4 * sample_budget {
            let mut improved = false;
            for i in 0..flat_dim {
                for sign in [1.0, -1.0] {
                    let mut cand = pt.as_slice().to_vec();
                    cand[i] += sign * h;
                    let cand = Vector::new(cand);
                    used += 1;
                    if let Some(v) = eval_point(&cand) {
                        if v > best_val + 1e-14 {
                            best_val = v;
                            pt = cand;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        best_pt = Some(pt);
    }
    match analytic {
        Some((k, witness)) => {
            // The closed form is exact; prefer the sampled value only in
            // the (defensive) event that observation exceeds it.
            if best_val > k * (1.0 + 1e-9) {
                let w = split_blocks(&best_pt.expect("sampled value implies a point"), nblocks);
                Ok(CompatibilityReport {
                    cond,
                    kappa_hat: best_val,
                    witness: w,
                    analytic: Some(k),
                    budget_used: used,
                })
            } else {
                let ratio_at = kappa_ratio(cond, prod, inner, &witness)?;
                debug_assert!((ratio_at - k).abs() <= 1e-7 * (1.0 + k));
                Ok(CompatibilityReport {
                    cond,
                    kappa_hat: ratio_at,
                    witness,
                    analytic: Some(k),
                    budget_used: used,
                })
            }
        }
        None => {
            let pt = best_pt.ok_or_else(|| {
                NormError::Solver(String::from("no sampled point produced a finite ratio"))
            })?;
            Ok(CompatibilityReport {
                cond,
                kappa_hat: best_val,
                witness: split_blocks(&pt, nblocks),
                analytic: None,
                budget_used: used,
            })
        }
    }
}

/// One checked implication among the compatibility conditions.
#[derive(Clone, Debug)]
pub struct RelationReport {
    /// Which implication was checked, e.g. `"C2 & C5 => C1"`.
    pub relation: String,
    /// Constant for the conclusion composed from the premise constants.
    pub bound: f64,
    /// Measured constant of the conclusion.
    pub measured: f64,
    pub holds: bool,
}

/// Checks the implications among estimated constants:
/// `C2 & C5 => C1` with bound `k2 * max{1, k5}`,
/// `C1 & C3 => C2` with bound `k1 * max{1, k3}`,
/// and `C4 => C5`, `C4 => C6` with bound `k4`.
///
/// The C5/C3 premises concern the smaller product norm (the one C1/C2
/// compare against); the caller is responsible for passing reports
/// produced from one consistent norm family.
pub fn verify_relations(reports: &[CompatibilityReport]) -> Vec<RelationReport> {
    let get = |c: Compatibility| reports.iter().find(|r| r.cond == c).map(|r| r.kappa_hat);
    let mut out = Vec::new();
    let tol = 1e-7;
    if let (Some(k1), Some(k2), Some(k5)) =
        (get(Compatibility::C1), get(Compatibility::C2), get(Compatibility::C5))
    {
        let bound = k2 * k5.max(1.0);
        out.push(RelationReport {
            relation: String::from("C2 & C5 => C1"),
            bound,
            measured: k1,
            holds: k1 <= bound + tol,
        });
    }
    if let (Some(k1), Some(k2), Some(k3)) =
        (get(Compatibility::C1), get(Compatibility::C2), get(Compatibility::C3))
    {
        let bound = k1 * k3.max(1.0);
        out.push(RelationReport {
            relation: String::from("C1 & C3 => C2"),
            bound,
            measured: k2,
            holds: k2 <= bound + tol,
        });
    }
    if let (Some(k4), Some(k5)) = (get(Compatibility::C4), get(Compatibility::C5)) {
        out.push(RelationReport {
            relation: String::from("C4 => C5"),
            bound: k4,
            measured: k5,
            holds: k5 <= k4 + tol,
        });
    }
    if let (Some(k4), Some(k6)) = (get(Compatibility::C4), get(Compatibility::C6)) {
        out.push(RelationReport {
            relation: String::from("C4 => C6"),
            bound: k4,
            measured: k6,
            holds: k6 <= k4 + tol,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn report(
        cond: Compatibility,
        prod: &ProductNormSpec,
        inner: Option<&ProductNormSpec>,
        d: usize,
    ) -> CompatibilityReport {
        estimate_kappa(cond, prod, inner, d, 256, 42).unwrap()
    }

    #[test]
    fn lp_family_constants_match_closed_forms() {
        for (p, n) in [(1.0, 2usize), (2.0, 3), (f64::INFINITY, 4)] {
            let prod = ProductNormSpec::p(n, p, NormSpec::Euclidean);
            let expected = if p.is_infinite() { 1.0 } else { libm::pow(n as f64, 1.0 / p) };
            let r3 = report(Compatibility::C3, &prod, None, 2);
            let r4 = report(Compatibility::C4, &prod, None, 2);
            let r5 = report(Compatibility::C5, &prod, None, 2);
            let r6 = report(Compatibility::C6, &prod, None, 2);
            assert!((r3.kappa_hat - 1.0).abs() < 1e-6, "C3 p={p} n={n}");
            assert!((r4.kappa_hat - expected).abs() < 1e-6, "C4 p={p} n={n}");
            assert!((r5.kappa_hat - expected).abs() < 1e-6, "C5 p={p} n={n}");
            assert!((r6.kappa_hat - expected).abs() < 1e-6, "C6 p={p} n={n}");
        }
    }

    #[test]
    fn sqrt3_for_squared_composition_of_three() {
        let prod = ProductNormSpec::p(3, 2.0, NormSpec::Euclidean);
        let r = report(Compatibility::C5, &prod, None, 3);
        assert!((r.kappa_hat - libm::sqrt(3.0)).abs() < 1e-9);
    }

    #[test]
    fn witnesses_reproduce_reported_constants() {
        let prod = ProductNormSpec::p(3, 2.0, NormSpec::l1());
        let inner = ProductNormSpec::p(2, 2.0, NormSpec::l1());
        let plus = ProductNormSpec::with_tail(inner.clone(), 0.5);
        let cases = vec![
            (Compatibility::C3, prod.clone(), None),
            (Compatibility::C4, prod.clone(), None),
            (Compatibility::C5, prod.clone(), None),
            (Compatibility::C6, prod.clone(), None),
            (Compatibility::C1, plus.clone(), Some(inner.clone())),
            (Compatibility::C2, plus.clone(), Some(inner.clone())),
        ];
        for (cond, p, inn) in cases {
            let r = report(cond, &p, inn.as_ref(), 2);
            let again = kappa_ratio(cond, &p, inn.as_ref(), &r.witness).unwrap();
            assert!(
                (again - r.kappa_hat).abs() <= 1e-7 * (1.0 + r.kappa_hat),
                "{cond:?}: witness gives {again}, reported {}",
                r.kappa_hat
            );
        }
    }

    #[test]
    fn weighted_family_constants() {
        let w = vec![2.0, 0.5, 1.0];
        let prod = ProductNormSpec {
            n: 3,
            base: NormSpec::Euclidean,
            kind: ProductKind::WeightedP { p: 2.0, weights: w.clone() },
        };
        let r3 = report(Compatibility::C3, &prod, None, 2);
        let r4 = report(Compatibility::C4, &prod, None, 2);
        let norm_w = libm::sqrt(w.iter().map(|x| x * x).sum::<f64>());
        assert!((r3.kappa_hat - 2.0).abs() < 1e-9, "1/min weight");
        assert!((r4.kappa_hat - norm_w).abs() < 1e-9);
    }

    #[test]
    fn tail_construction_constants() {
        let inner = ProductNormSpec::p(2, 1.0, NormSpec::linf());
        let plus = ProductNormSpec::with_tail(inner.clone(), 0.25);
        let r2 = report(Compatibility::C2, &plus, Some(&inner), 2);
        assert!((r2.kappa_hat - 4.0).abs() < 1e-9, "max(1, 1/gamma)");
        let r1 = report(Compatibility::C1, &plus, Some(&inner), 2);
        // c5(inner) = 2, so the constant is 2 / 0.25 = 8.
        assert!((r1.kappa_hat - 8.0).abs() < 1e-9);
    }

    #[test]
    fn relations_hold_for_tail_family() {
        let inner = ProductNormSpec::p(2, 2.0, NormSpec::Euclidean);
        let plus = ProductNormSpec::with_tail(inner.clone(), 0.5);
        let reports = vec![
            report(Compatibility::C1, &plus, Some(&inner), 2),
            report(Compatibility::C2, &plus, Some(&inner), 2),
            // C3/C5 premises concern the smaller product norm.
            report(Compatibility::C3, &inner, None, 2),
            report(Compatibility::C5, &inner, None, 2),
        ];
        for rel in verify_relations(&reports) {
            assert!(rel.holds, "{}: measured {} > bound {}", rel.relation, rel.measured, rel.bound);
        }
    }

    #[test]
    fn c4_dominates_c5_and_c6() {
        let prod = ProductNormSpec::p(3, 1.0, NormSpec::l1());
        let reports = vec![
            report(Compatibility::C4, &prod, None, 2),
            report(Compatibility::C5, &prod, None, 2),
            report(Compatibility::C6, &prod, None, 2),
        ];
        let rels = verify_relations(&reports);
        assert_eq!(rels.len(), 2);
        for rel in rels {
            assert!(rel.holds);
        }
    }

    #[test]
    fn sampling_stays_below_analytic_bound() {
        let prod = ProductNormSpec::p(2, 2.0, NormSpec::Euclidean);
        let r = report(Compatibility::C4, &prod, None, 2);
        // Sampled refinement ran; the reported constant is the closed form.
        assert!(r.analytic.is_some());
        assert!((r.kappa_hat - libm::sqrt(2.0)).abs() < 1e-9);
        assert!(r.budget_used >= 256);
    }
}
