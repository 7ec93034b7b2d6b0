//! Instance files: a small, versioned, human-writable text format.
//!
//! One instance per file. The top-level field `schema = 1` versions the
//! layout. Vectors are arrays of floats, polyhedra are `{rows, bounds}`
//! pairs, norms are tagged kinds with parameters. Loading re-checks every
//! declared invariant (dimensions, finiteness, membership of the starting
//! tuple) and names the failing field or set in the error.
//!
//! Each instance carries a digest: the SHA-256 of its canonical form (the
//! parsed structure re-serialized with fixed field order). Loading the
//! emitted canonical form reproduces the digest byte for byte, no matter
//! how the original file was formatted.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sepkit::norms::{
    skew_abs_norm, validate as validate_norm, NormSpec, ProductKind, ProductNormSpec,
};
use sepkit::sample::Sampler;
use sepkit::sets::SetExpr;
use sepkit::norms::check_monotone;
use sepkit::Vector;

/// Raw file structure, mirroring the text format field for field.
///
/// Scalar and array fields come first so the canonical serialization can
/// emit them before the table-valued fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    /// Format version; always 1.
    pub schema: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Ambient dimension shared by every set.
    pub dimension: usize,
    /// Block count for norm checks on files that carry no sets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    /// Common point candidate for the pointwise checkers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_bar: Option<Vec<f64>>,
    /// Starting tuple, one block per set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<Vec<f64>>>,
    /// Per-set translations for the shifted commands.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shifts: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<SetNode>,
    /// Product norm on the difference tuple (or on the full tuple for the
    /// pointwise commands; the command picks the block count).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormNode>,
    /// Product norm on the extended tuple.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_plus: Option<NormNode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsNode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchNode>,
}

/// Set constructors, tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetNode {
    /// `{x : rows[i] . x <= bounds[i]}`; no rows means the whole space.
    Polyhedron { rows: Vec<Vec<f64>>, bounds: Vec<f64> },
    /// Single inequality `{x : row . x <= bound}`.
    Halfspace { row: Vec<f64>, bound: f64 },
    /// Axis-aligned box `[lo, hi]`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// The singleton `{at}`.
    Point { at: Vec<f64> },
    /// Norm ball around `center`; `closed` defaults to true.
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        closed: Option<bool>,
        norm: BaseNormNode,
    },
    /// `inner + shift`.
    Translate { shift: Vec<f64>, inner: Box<SetNode> },
    /// Finite union of members in the same space.
    Union { members: Vec<SetNode> },
    /// Cartesian product; `dims` lists each factor's dimension.
    Product { dims: Vec<usize>, factors: Vec<SetNode> },
}

/// Base (block-level) norms, tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseNormNode {
    Euclidean,
    /// Max norm.
    Linf,
    /// Sum norm.
    L1,
    /// `p`-norm, `1 <= p <= inf`.
    Lp { p: f64 },
    WeightedLp { p: f64, weights: Vec<f64> },
    /// Gauge of the symmetric polytope spanned by `vertices`.
    Polyhedral { vertices: Vec<Vec<f64>> },
    /// Gauge with facet functionals: `max_k <facets[k], x>`.
    PolyhedralH { facets: Vec<Vec<f64>> },
    /// The planar norm `|a - b| + |b|`; not monotone on the positive cone.
    SkewAbs,
}

/// A product norm: a base norm per block plus a combiner over block values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormNode {
    pub base: BaseNormNode,
    pub combine: CombineNode,
}

/// Block-value combiners, tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CombineNode {
    Max,
    /// Power mean `(sum t_i^p)^(1/p)`.
    P { p: f64 },
    WeightedP { p: f64, weights: Vec<f64> },
    /// `max{inner(leading blocks), gamma * last block}`.
    MaxTail { gamma: f64, inner: Box<CombineNode> },
    /// `inner(leading blocks) + gamma * last block`.
    SumTail { gamma: f64, inner: Box<CombineNode> },
    /// Explicit vector norm on the block values; certified monotone at
    /// load when it passes the sampled monotonicity check.
    Composed { vec_norm: BaseNormNode },
}

/// Scalar problem parameters. All optional; commands demand what they need.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsNode {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Specialization profile label; the `--profile` flag overrides it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    /// Compatibility conditions to measure (`"C1"` through `"C6"`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<Vec<String>>,
}

/// Seed and budget defaults baked into the instance; flags override them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchNode {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
}

/// A parsed, validated instance with its canonical digest.
#[derive(Clone, Debug)]
pub struct LoadedInstance {
    pub raw: InstanceFile,
    pub name: String,
    pub dimension: usize,
    pub sets: Vec<SetExpr>,
    pub x_bar: Option<Vector>,
    pub omega: Option<Vec<Vector>>,
    pub shifts: Option<Vec<Vector>>,
    /// SHA-256 (hex) of the canonical serialization.
    pub digest: String,
}

impl LoadedInstance {
    /// Builds the leading product norm with `n` blocks.
    pub fn product_norm(&self, n: usize, seed: u64) -> Result<ProductNormSpec> {
        let node =
            self.raw.norm.as_ref().ok_or_else(|| anyhow!("this command needs a [norm] table"))?;
        to_product(node, n, self.dimension, seed, "norm")
    }

    /// Builds the extended product norm with `n` blocks.
    pub fn product_norm_plus(&self, n: usize, seed: u64) -> Result<ProductNormSpec> {
        let node = self
            .raw
            .norm_plus
            .as_ref()
            .ok_or_else(|| anyhow!("this command needs a [norm_plus] table"))?;
        to_product(node, n, self.dimension, seed, "norm_plus")
    }

    pub fn params(&self) -> ParamsNode {
        self.raw.params.clone().unwrap_or_default()
    }

    /// Fetches a required scalar parameter by name.
    pub fn require(&self, name: &str) -> Result<f64> {
        let p = self.params();
        let v = match name {
            "eps" => p.eps,
            "delta" => p.delta,
            "rho" => p.rho,
            "tau" => p.tau,
            "alpha" => p.alpha,
            "beta" => p.beta,
            _ => None,
        };
        v.ok_or_else(|| anyhow!("this command needs params.{name}"))
    }

    pub fn seed(&self) -> Option<u64> {
        self.raw.search.as_ref().and_then(|s| s.seed)
    }

    pub fn budget(&self) -> Option<usize> {
        self.raw.search.as_ref().and_then(|s| s.budget)
    }

    /// Canonical text form; loading it reproduces `self.digest`.
    pub fn canonical(&self) -> Result<String> {
        canonical(&self.raw)
    }
}

/// Serializes the parsed structure with fixed field order.
pub fn canonical(raw: &InstanceFile) -> Result<String> {
    toml::to_string(raw).context("canonical serialization failed")
}

/// SHA-256 hex digest of the canonical text.
pub fn digest_of(canonical_text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical_text.as_bytes());
    let out = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in out {
        use std::fmt::Write;
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// Loads and validates an instance file.
pub fn load_path(path: &Path) -> Result<LoadedInstance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let fallback = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    load_str(&text, fallback).with_context(|| format!("in {}", path.display()))
}

/// Parses and validates instance text.
pub fn load_str(text: &str, fallback_name: &str) -> Result<LoadedInstance> {
    let raw: InstanceFile = toml::from_str(text).context("schema violation")?;
    if raw.schema != 1 {
        bail!("schema: expected version 1, found {}", raw.schema);
    }
    let d = raw.dimension;
    if d == 0 || d > 64 {
        bail!("dimension: must be between 1 and 64, found {d}");
    }
    if let Some(b) = raw.blocks {
        if b < 2 || b > 16 {
            bail!("blocks: must be between 2 and 16, found {b}");
        }
    }

    let mut sets = Vec::with_capacity(raw.sets.len());
    for (i, node) in raw.sets.iter().enumerate() {
        let expr = to_set(node, d, &format!("sets[{i}]"))?;
        expr.validate().map_err(|e| anyhow!("sets[{i}]: {e}"))?;
        sets.push(expr);
    }

    let x_bar = match &raw.x_bar {
        Some(coords) => Some(to_vector(coords, d, "x_bar")?),
        None => None,
    };
    let omega = match &raw.omega {
        Some(blocks) => {
            if !sets.is_empty() && blocks.len() != sets.len() {
                bail!("omega: {} blocks for {} sets", blocks.len(), sets.len());
            }
            let mut out = Vec::with_capacity(blocks.len());
            for (i, b) in blocks.iter().enumerate() {
                out.push(to_vector(b, d, &format!("omega[{i}]"))?);
            }
            // The starting tuple must begin inside its sets; this is the
            // invariant every downstream theorem leans on.
            for (i, (w, s)) in out.iter().zip(&sets).enumerate() {
                let inside = s
                    .contains(w, 1e-7)
                    .map_err(|e| anyhow!("omega[{i}] membership check failed: {e}"))?;
                if !inside {
                    bail!("omega[{i}] lies outside sets[{i}]");
                }
            }
            Some(out)
        }
        None => None,
    };
    let shifts = match &raw.shifts {
        Some(blocks) => {
            if !sets.is_empty() && blocks.len() != sets.len() {
                bail!("shifts: {} blocks for {} sets", blocks.len(), sets.len());
            }
            let mut out = Vec::with_capacity(blocks.len());
            for (i, b) in blocks.iter().enumerate() {
                out.push(to_vector(b, d, &format!("shifts[{i}]"))?);
            }
            Some(out)
        }
        None => None,
    };

    if let Some(p) = &raw.params {
        check_param(p.eps, "eps", true)?;
        check_param(p.delta, "delta", true)?;
        check_param(p.rho, "rho", true)?;
        check_param(p.alpha, "alpha", false)?;
        check_param(p.beta, "beta", false)?;
        if let Some(tau) = p.tau {
            if !(tau > 0.0 && tau < 1.0) {
                bail!("params.tau: must lie strictly between 0 and 1, found {tau}");
            }
        }
        if let Some(conds) = &p.conditions {
            for c in conds {
                if !matches!(c.as_str(), "C1" | "C2" | "C3" | "C4" | "C5" | "C6") {
                    bail!("params.conditions: unknown condition {c:?} (use C1 through C6)");
                }
            }
        }
    }

    let canon = canonical(&raw)?;
    let digest = digest_of(&canon);
    let name = raw.name.clone().unwrap_or_else(|| fallback_name.to_string());
    Ok(LoadedInstance {
        name,
        dimension: d,
        sets,
        x_bar,
        omega,
        shifts,
        digest,
        raw,
    })
}

fn check_param(v: Option<f64>, name: &str, positive: bool) -> Result<()> {
    if let Some(x) = v {
        if x.is_nan() {
            bail!("params.{name}: must be a number, found NaN");
        }
        // rho = inf is allowed (an unbounded localization radius); the
        // other radii and levels must be positive reals.
        if positive && x <= 0.0 {
            bail!("params.{name}: must be positive, found {x}");
        }
        if !positive && x < 0.0 {
            bail!("params.{name}: must be nonnegative, found {x}");
        }
        if positive && name != "rho" && !x.is_finite() {
            bail!("params.{name}: must be finite, found {x}");
        }
    }
    Ok(())
}

fn to_vector(coords: &[f64], d: usize, path: &str) -> Result<Vector> {
    if coords.len() != d {
        bail!("{path}: {} entries for dimension {d}", coords.len());
    }
    for (j, c) in coords.iter().enumerate() {
        if !c.is_finite() {
            bail!("{path}[{j}]: must be finite, found {c}");
        }
    }
    Ok(Vector::new(coords.to_vec()))
}

fn to_set(node: &SetNode, d: usize, path: &str) -> Result<SetExpr> {
    match node {
        SetNode::Polyhedron { rows, bounds } => {
            if rows.len() != bounds.len() {
                bail!("{path}: {} rows against {} bounds", rows.len(), bounds.len());
            }
            let mut rvs = Vec::with_capacity(rows.len());
            for (i, r) in rows.iter().enumerate() {
                rvs.push(to_vector(r, d, &format!("{path}.rows[{i}]"))?);
            }
            for (i, b) in bounds.iter().enumerate() {
                if !b.is_finite() {
                    bail!("{path}.bounds[{i}]: must be finite, found {b}");
                }
            }
            Ok(SetExpr::Polyhedron { dim: d, rows: rvs, bounds: bounds.clone() })
        }
        SetNode::Halfspace { row, bound } => {
            if !bound.is_finite() {
                bail!("{path}.bound: must be finite, found {bound}");
            }
            Ok(SetExpr::halfspace(to_vector(row, d, &format!("{path}.row"))?, *bound))
        }
        SetNode::Box { lo, hi } => {
            let lov = to_vector(lo, d, &format!("{path}.lo"))?;
            let hiv = to_vector(hi, d, &format!("{path}.hi"))?;
            for j in 0..d {
                if lov[j] > hiv[j] {
                    bail!("{path}: lo[{j}] = {} exceeds hi[{j}] = {}", lov[j], hiv[j]);
                }
            }
            Ok(SetExpr::box_set(lov.as_slice(), hiv.as_slice()))
        }
        SetNode::Point { at } => {
            let p = to_vector(at, d, &format!("{path}.at"))?;
            Ok(SetExpr::box_set(p.as_slice(), p.as_slice()))
        }
        SetNode::Ball { center, radius, closed, norm } => {
            if !(radius.is_finite() && *radius > 0.0) {
                bail!("{path}.radius: must be a positive real, found {radius}");
            }
            let spec = to_base(norm, &format!("{path}.norm"))?;
            validate_norm(&spec, d).map_err(|e| anyhow!("{path}.norm: {e}"))?;
            Ok(SetExpr::Ball {
                center: to_vector(center, d, &format!("{path}.center"))?,
                radius: *radius,
                norm: spec,
                closed: closed.unwrap_or(true),
            })
        }
        SetNode::Translate { shift, inner } => {
            let inner_expr = to_set(inner, d, &format!("{path}.inner"))?;
            Ok(SetExpr::Translate {
                inner: Box::new(inner_expr),
                shift: to_vector(shift, d, &format!("{path}.shift"))?,
            })
        }
        SetNode::Union { members } => {
            if members.is_empty() {
                bail!("{path}.members: a union needs at least one member");
            }
            let mut exprs = Vec::with_capacity(members.len());
            for (i, m) in members.iter().enumerate() {
                exprs.push(to_set(m, d, &format!("{path}.members[{i}]"))?);
            }
            Ok(SetExpr::Union { members: exprs })
        }
        SetNode::Product { dims, factors } => {
            if dims.len() != factors.len() {
                bail!("{path}: {} dims against {} factors", dims.len(), factors.len());
            }
            let total: usize = dims.iter().sum();
            if total != d {
                bail!("{path}.dims: factor dimensions sum to {total}, expected {d}");
            }
            let mut exprs = Vec::with_capacity(factors.len());
            for (i, (f, &fd)) in factors.iter().zip(dims).enumerate() {
                if fd == 0 {
                    bail!("{path}.dims[{i}]: factors need positive dimension");
                }
                exprs.push(to_set(f, fd, &format!("{path}.factors[{i}]"))?);
            }
            Ok(SetExpr::Product { factors: exprs })
        }
    }
}

/// Converts a base-norm node, naming `path` in errors.
pub fn to_base(node: &BaseNormNode, path: &str) -> Result<NormSpec> {
    let spec = match node {
        BaseNormNode::Euclidean => NormSpec::Euclidean,
        BaseNormNode::Linf => NormSpec::Lp { p: f64::INFINITY },
        BaseNormNode::L1 => NormSpec::Lp { p: 1.0 },
        BaseNormNode::Lp { p } => {
            if !(*p >= 1.0) {
                bail!("{path}.p: must satisfy p >= 1, found {p}");
            }
            NormSpec::Lp { p: *p }
        }
        BaseNormNode::WeightedLp { p, weights } => {
            if !(*p >= 1.0) {
                bail!("{path}.p: must satisfy p >= 1, found {p}");
            }
            for (j, w) in weights.iter().enumerate() {
                if !(w.is_finite() && *w > 0.0) {
                    bail!("{path}.weights[{j}]: must be a positive real, found {w}");
                }
            }
            NormSpec::WeightedLp { p: *p, weights: weights.clone() }
        }
        BaseNormNode::Polyhedral { vertices } => {
            let dim = vertices.first().map(|v| v.len()).unwrap_or(0);
            let mut vs = Vec::with_capacity(vertices.len());
            for (i, v) in vertices.iter().enumerate() {
                vs.push(to_vector(v, dim, &format!("{path}.vertices[{i}]"))?);
            }
            NormSpec::Polyhedral { vertices: vs }
        }
        BaseNormNode::PolyhedralH { facets } => {
            let dim = facets.first().map(|v| v.len()).unwrap_or(0);
            let mut fs = Vec::with_capacity(facets.len());
            for (i, f) in facets.iter().enumerate() {
                fs.push(to_vector(f, dim, &format!("{path}.facets[{i}]"))?);
            }
            NormSpec::PolyhedralH { facets: fs }
        }
        BaseNormNode::SkewAbs => skew_abs_norm(),
    };
    Ok(spec)
}

fn to_combine(node: &CombineNode, n: usize, seed: u64, path: &str) -> Result<ProductKind> {
    let kind = match node {
        CombineNode::Max => ProductKind::Max,
        CombineNode::P { p } => {
            if !(*p >= 1.0) {
                bail!("{path}.p: must satisfy p >= 1, found {p}");
            }
            ProductKind::P { p: *p }
        }
        CombineNode::WeightedP { p, weights } => {
            if !(*p >= 1.0) {
                bail!("{path}.p: must satisfy p >= 1, found {p}");
            }
            if weights.len() != n {
                bail!("{path}.weights: {} weights for {n} blocks", weights.len());
            }
            for (j, w) in weights.iter().enumerate() {
                if !(w.is_finite() && *w > 0.0) {
                    bail!("{path}.weights[{j}]: must be a positive real, found {w}");
                }
            }
            ProductKind::WeightedP { p: *p, weights: weights.clone() }
        }
        CombineNode::MaxTail { gamma, inner } => {
            if !(gamma.is_finite() && *gamma > 0.0) {
                bail!("{path}.gamma: must be a positive real, found {gamma}");
            }
            let inner_kind =
                to_combine(inner, n.saturating_sub(1), seed, &format!("{path}.inner"))?;
            ProductKind::MaxTail { inner: Box::new(inner_kind), gamma: *gamma }
        }
        CombineNode::SumTail { gamma, inner } => {
            if !(gamma.is_finite() && *gamma > 0.0) {
                bail!("{path}.gamma: must be a positive real, found {gamma}");
            }
            let inner_kind =
                to_combine(inner, n.saturating_sub(1), seed, &format!("{path}.inner"))?;
            ProductKind::SumTail { inner: Box::new(inner_kind), gamma: *gamma }
        }
        CombineNode::Composed { vec_norm } => {
            let spec = to_base(vec_norm, &format!("{path}.vec_norm"))?;
            validate_norm(&spec, n).map_err(|e| anyhow!("{path}.vec_norm: {e}"))?;
            // Certify monotonicity with a seeded sample; an uncertified
            // composition still evaluates but admits no dual machinery.
            let mut sampler = Sampler::new(seed ^ 0x636f_6d70_6f73_6564);
            let report = check_monotone(&spec, n, &mut sampler);
            ProductKind::Composed { vec_norm: spec, certified: report.monotone }
        }
    };
    Ok(kind)
}

/// Converts a norm node to a product norm with `n` blocks.
pub fn to_product(
    node: &NormNode,
    n: usize,
    block_dim: usize,
    seed: u64,
    path: &str,
) -> Result<ProductNormSpec> {
    if n == 0 {
        bail!("{path}: a product norm needs at least one block");
    }
    let base = to_base(&node.base, &format!("{path}.base"))?;
    validate_norm(&base, block_dim).map_err(|e| anyhow!("{path}.base: {e}"))?;
    let kind = to_combine(&node.combine, n, seed, &format!("{path}.combine"))?;
    Ok(ProductNormSpec { n, base, kind })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALF_LINES: &str = r#"
schema = 1
name = "half-lines"
dimension = 1
omega = [[0.0], [1.0]]

[[sets]]
kind = "polyhedron"
rows = [[1.0]]
bounds = [0.0]

[[sets]]
kind = "halfspace"
row = [-1.0]
bound = -1.0

[norm]
base = { kind = "linf" }
combine = { kind = "max" }

[norm_plus]
base = { kind = "linf" }
combine = { kind = "max_tail", gamma = 1.0, inner = { kind = "max" } }

[params]
eps = 0.5
delta = 0.1
tau = 0.5

[search]
seed = 17
budget = 160
"#;

    #[test]
    fn loads_and_round_trips_the_digest() {
        let inst = load_str(HALF_LINES, "fallback").unwrap();
        assert_eq!(inst.name, "half-lines");
        assert_eq!(inst.sets.len(), 2);
        assert_eq!(inst.omega.as_ref().unwrap().len(), 2);
        let canon = inst.canonical().unwrap();
        let again = load_str(&canon, "fallback").unwrap();
        assert_eq!(inst.digest, again.digest);
        assert_eq!(inst.raw, again.raw);
    }

    #[test]
    fn formatting_does_not_change_the_digest() {
        let reordered = HALF_LINES.replace("eps = 0.5\ndelta = 0.1", "delta = 0.1\neps = 0.5");
        assert_ne!(reordered, HALF_LINES);
        let a = load_str(HALF_LINES, "x").unwrap();
        let b = load_str(&reordered, "x").unwrap();
        assert_eq!(a.digest, b.digest);
    }

    #[test]
    fn every_node_kind_survives_the_round_trip() {
        let text = r#"
schema = 1
dimension = 2
x_bar = [0.0, 0.0]

[[sets]]
kind = "union"

[[sets.members]]
kind = "box"
lo = [0.0, 0.0]
hi = [1.0, 1.0]

[[sets.members]]
kind = "translate"
shift = [1.0, 0.0]

[sets.members.inner]
kind = "point"
at = [0.0, 0.0]

[[sets]]
kind = "product"
dims = [1, 1]

[[sets.factors]]
kind = "halfspace"
row = [1.0]
bound = 0.0

[[sets.factors]]
kind = "ball"
center = [0.0]
radius = 2.0
norm = { kind = "l1" }

[norm]
base = { kind = "weighted_lp", p = 2.0, weights = [1.0, 2.0] }
combine = { kind = "sum_tail", gamma = 0.5, inner = { kind = "p", p = 1.0 } }

[norm_plus]
base = { kind = "polyhedral_h", facets = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] }
combine = { kind = "composed", vec_norm = { kind = "l1" } }
"#;
        let inst = load_str(text, "mixed").unwrap();
        let canon = inst.canonical().unwrap();
        let again = load_str(&canon, "mixed").unwrap();
        assert_eq!(inst.raw, again.raw);
        assert_eq!(inst.digest, again.digest);
        let norm = inst.product_norm(2, 7).unwrap();
        assert_eq!(norm.n, 2);
        let plus = inst.product_norm_plus(2, 7).unwrap();
        assert!(matches!(plus.kind, ProductKind::Composed { certified: true, .. }));
    }

    #[test]
    fn membership_errors_name_the_set() {
        let bad = HALF_LINES.replace("omega = [[0.0], [1.0]]", "omega = [[0.0], [0.25]]");
        let err = format!("{:?}", load_str(&bad, "x").unwrap_err());
        assert!(err.contains("omega[1] lies outside sets[1]"), "{err}");
    }

    #[test]
    fn schema_violations_are_named() {
        let wrong_version = HALF_LINES.replace("schema = 1", "schema = 3");
        let err = format!("{:?}", load_str(&wrong_version, "x").unwrap_err());
        assert!(err.contains("expected version 1"), "{err}");

        let unknown_kind = HALF_LINES.replace("kind = \"halfspace\"", "kind = \"simplex\"");
        let err = format!("{:?}", load_str(&unknown_kind, "x").unwrap_err());
        assert!(err.contains("schema violation"), "{err}");

        let bad_row = HALF_LINES.replace("rows = [[1.0]]", "rows = [[1.0, 2.0]]");
        let err = format!("{:?}", load_str(&bad_row, "x").unwrap_err());
        assert!(err.contains("sets[0].rows[0]"), "{err}");

        let bad_tau = HALF_LINES.replace("tau = 0.5", "tau = 1.5");
        let err = format!("{:?}", load_str(&bad_tau, "x").unwrap_err());
        assert!(err.contains("params.tau"), "{err}");
    }

    #[test]
    fn non_monotone_composition_loads_uncertified() {
        let text = r#"
schema = 1
dimension = 1
blocks = 2

[norm]
base = { kind = "l1" }
combine = { kind = "composed", vec_norm = { kind = "skew_abs" } }
"#;
        let inst = load_str(text, "skew").unwrap();
        let norm = inst.product_norm(2, 17).unwrap();
        assert!(matches!(norm.kind, ProductKind::Composed { certified: false, .. }));
    }
}
