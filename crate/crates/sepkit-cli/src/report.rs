//! Reports: structured, byte-stable output for every command.
//!
//! A report is a fixed-order JSON document (or an aligned text table). Field
//! order is the struct order, map keys are sorted, and floats print in the
//! shortest round-trip form, so a fixed (instance, seed, version) triple
//! always produces identical bytes. Every numeric claim is a row carrying
//! its own bound and strictness, never a bare number.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use sepkit::separation::CheckItem;
use sepkit::Vector;

/// Output format selector for `--format`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Fixed-order JSON.
    Structured,
    /// Human-readable aligned text.
    Table,
}

/// Command outcome; doubles as the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// The requested property was established and re-verified.
    Verified,
    /// Nothing wrong with the input; the property is absent or no witness
    /// surfaced within the budget.
    NoneFound,
    /// The command could not run: bad input, unsupported shape, or an
    /// internal verification mismatch.
    Error,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Verified => 0,
            Outcome::NoneFound => 1,
            Outcome::Error => 2,
        }
    }
}

/// One residual-table row: an observed quantity against its bound.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub key: String,
    pub observed: Value,
    pub bound: Value,
    pub strict: bool,
    pub ok: bool,
}

/// The full report for one command on one instance.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    /// Report format version.
    pub schema: u32,
    /// Toolkit name and version.
    pub toolkit: String,
    pub command: String,
    pub instance: String,
    /// SHA-256 of the instance's canonical form.
    pub digest: String,
    pub seed: u64,
    pub budget: usize,
    pub tol_scale: f64,
    pub outcome: Outcome,
    /// Residual table: every numeric claim with its bound.
    pub checks: Vec<CheckRow>,
    /// Named scalar results.
    pub values: BTreeMap<String, Value>,
    /// Named integer results (budgets spent, items scanned).
    pub counts: BTreeMap<String, u64>,
    /// Named point tuples (witnesses, dual tuples), one row per block.
    pub points: BTreeMap<String, Vec<Vec<f64>>>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
}

/// Encodes a float as JSON, spelling out non-finite values (JSON numbers
/// cannot carry them).
pub fn json_num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::String("nan".to_string())
    } else if x > 0.0 {
        Value::String("inf".to_string())
    } else {
        Value::String("-inf".to_string())
    }
}

impl Report {
    pub fn new(
        command: &str,
        instance: &str,
        digest: &str,
        seed: u64,
        budget: usize,
        tol_scale: f64,
    ) -> Report {
        Report {
            schema: 1,
            toolkit: format!("sepkit {}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            instance: instance.to_string(),
            digest: digest.to_string(),
            seed,
            budget,
            tol_scale,
            outcome: Outcome::Error,
            checks: Vec::new(),
            values: BTreeMap::new(),
            counts: BTreeMap::new(),
            points: BTreeMap::new(),
            notes: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn push_check(&mut self, key: &str, observed: f64, bound: f64, strict: bool, ok: bool) {
        self.checks.push(CheckRow {
            key: key.to_string(),
            observed: json_num(observed),
            bound: json_num(bound),
            strict,
            ok,
        });
    }

    /// Appends library check items verbatim, optionally prefixing keys.
    pub fn push_items(&mut self, prefix: &str, items: &[CheckItem]) {
        for item in items {
            let key =
                if prefix.is_empty() { item.key.to_string() } else { format!("{prefix}{}", item.key) };
            self.checks.push(CheckRow {
                key,
                observed: json_num(item.observed),
                bound: json_num(item.bound),
                strict: item.strict,
                ok: item.ok,
            });
        }
    }

    pub fn all_checks_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn value(&mut self, key: &str, v: f64) {
        self.values.insert(key.to_string(), json_num(v));
    }

    pub fn count(&mut self, key: &str, v: u64) {
        self.counts.insert(key.to_string(), v);
    }

    pub fn point(&mut self, key: &str, v: &Vector) {
        self.points.insert(key.to_string(), vec![v.as_slice().to_vec()]);
    }

    pub fn tuple(&mut self, key: &str, vs: &[Vector]) {
        self.points
            .insert(key.to_string(), vs.iter().map(|v| v.as_slice().to_vec()).collect());
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn warn(&mut self, text: impl Into<String>) {
        self.warnings.push(text.into());
    }

    /// Renders the report in the requested format, newline-terminated.
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Structured => {
                let mut s = serde_json::to_string_pretty(self)
                    .expect("report serialization cannot fail");
                s.push('\n');
                s
            }
            Format::Table => self.render_table(),
        }
    }

    fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} :: {} :: {}", self.toolkit, self.command, self.instance);
        let _ = writeln!(out, "digest   {}", self.digest);
        let _ = writeln!(
            out,
            "seed {}  budget {}  tol-scale {}",
            self.seed, self.budget, self.tol_scale
        );
        let _ = writeln!(out, "outcome  {}", outcome_label(self.outcome));
        if !self.checks.is_empty() {
            let _ = writeln!(out, "\nresidual table");
            let width = self.checks.iter().map(|c| c.key.len()).max().unwrap_or(0).max(5);
            for c in &self.checks {
                let rel = if c.strict { "<" } else { "<=" };
                let _ = writeln!(
                    out,
                    "  {:<width$}  {}  {} {}  [{}]",
                    c.key,
                    value_label(&c.observed),
                    rel,
                    value_label(&c.bound),
                    if c.ok { "pass" } else { "FAIL" },
                );
            }
        }
        if !self.values.is_empty() {
            let _ = writeln!(out, "\nvalues");
            for (k, v) in &self.values {
                let _ = writeln!(out, "  {k} = {}", value_label(v));
            }
        }
        if !self.counts.is_empty() {
            let _ = writeln!(out, "\ncounts");
            for (k, v) in &self.counts {
                let _ = writeln!(out, "  {k} = {v}");
            }
        }
        if !self.points.is_empty() {
            let _ = writeln!(out, "\npoints");
            for (k, rows) in &self.points {
                let blocks: Vec<String> = rows
                    .iter()
                    .map(|r| {
                        let coords: Vec<String> = r.iter().map(|x| format!("{x}")).collect();
                        format!("({})", coords.join(", "))
                    })
                    .collect();
                let _ = writeln!(out, "  {k} = [{}]", blocks.join(", "));
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

fn outcome_label(o: Outcome) -> &'static str {
    match o {
        Outcome::Verified => "verified",
        Outcome::NoneFound => "none_found",
        Outcome::Error => "error",
    }
}

fn value_label(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structured_output_is_reproducible_and_ordered() {
        let build = || {
            let mut r = Report::new("separate", "demo", "abc123", 17, 160, 1.0);
            r.outcome = Outcome::Verified;
            r.push_check("sum_zero", 0.0, 1e-9, false, true);
            r.value("zeta", 0.5);
            r.value("alpha_hat", f64::INFINITY);
            r.count("lp_calls", 42);
            r.tuple("x", &[Vector::new(vec![0.0]), Vector::new(vec![1.0])]);
            r.note("demo note");
            r.render(Format::Structured)
        };
        let a = build();
        let b = build();
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        // Map keys arrive sorted, and non-finite values are spelled out.
        let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed["values"]["alpha_hat"], serde_json::json!("inf"));
        let keys: Vec<&String> = parsed["values"].as_object().unwrap().keys().collect();
        assert_eq!(keys, ["alpha_hat", "zeta"]);
        assert_eq!(parsed["outcome"], serde_json::json!("verified"));
    }

    #[test]
    fn table_output_marks_failures() {
        let mut r = Report::new("separate", "demo", "abc123", 17, 160, 1.0);
        r.outcome = Outcome::NoneFound;
        r.push_check("cone_distance", 2.0, 1.0, true, false);
        let text = r.render(Format::Table);
        assert!(text.contains("[FAIL]"), "{text}");
        assert!(text.contains("none_found"), "{text}");
    }

    #[test]
    fn exit_codes_follow_the_outcome() {
        assert_eq!(Outcome::Verified.exit_code(), 0);
        assert_eq!(Outcome::NoneFound.exit_code(), 1);
        assert_eq!(Outcome::Error.exit_code(), 2);
    }
}
