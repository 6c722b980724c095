//! Report envelope, shared serialization of arithmetic values, and the
//! flattened CSV writer.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use dlab_core::padic::{PadicScalar, PrimeCtx};
use dlab_core::val::{Rat, Val};
use dlab_core::Error;

/// Command failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
    pub hint: Option<String>,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
            hint: None,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match &e {
            Error::Contract(_) | Error::Unsupported(_) => CliError {
                code: 2,
                message: e.to_string(),
                hint: None,
            },
            Error::Precision(_) | Error::Divergence(_) => CliError {
                code: 3,
                message: e.to_string(),
                hint: Some(
                    "rerun with a higher --prec (or raise the truncation order in the config)"
                        .into(),
                ),
            },
        }
    }
}

impl From<toml::de::Error> for CliError {
    fn from(e: toml::de::Error) -> Self {
        CliError::config(format!("config schema error: {e}"))
    }
}

/// Counts for the human summary line.
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

/// A finished report: canonical JSON body plus the CSV flattening.
pub struct Report {
    pub body: Value,
    pub csv: String,
    pub pass: bool,
    pub summary: Summary,
}

impl Report {
    /// Assemble the envelope: rows must already be sorted canonically.
    pub fn new(command: &str, config: Value, rows: Vec<Value>, pass_flags: &[bool]) -> Report {
        let total = pass_flags.len();
        let passed = pass_flags.iter().filter(|p| **p).count();
        let failed = total - passed;
        let pass = failed == 0;
        let csv = to_csv(&rows);
        let body = json!({
            "schema": 1,
            "command": command,
            "config": config,
            "rows": rows,
            "summary": {"total": total, "passed": passed, "failed": failed},
            "pass": pass,
        });
        Report {
            body,
            csv,
            pass,
            summary: Summary {
                total,
                passed,
                failed,
            },
        }
    }
}

/// Flatten JSON rows into CSV: scalar fields become columns (union over all
/// rows, sorted); nested values are embedded as compact JSON.
fn to_csv(rows: &[Value]) -> String {
    use std::collections::BTreeSet;
    let mut cols: BTreeSet<String> = BTreeSet::new();
    for row in rows {
        if let Value::Object(m) = row {
            for k in m.keys() {
                cols.insert(k.clone());
            }
        }
    }
    let cols: Vec<String> = cols.into_iter().collect();
    let mut out = String::new();
    out.push_str(&cols.join(","));
    out.push('\n');
    for row in rows {
        let Value::Object(m) = row else { continue };
        let cells: Vec<String> = cols
            .iter()
            .map(|c| match m.get(c) {
                None | Some(Value::Null) => String::new(),
                Some(Value::String(s)) => csv_escape(s),
                Some(Value::Bool(b)) => b.to_string(),
                Some(Value::Number(n)) => n.to_string(),
                Some(v) => csv_escape(&v.to_string()),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// JSON form of a valuation: `{"exact": [num, den]}` or
/// `{"at_least": [num, den]}`.
pub fn val_json(v: &Val) -> Value {
    match v {
        Val::Exact(r) => json!({"exact": [*r.numer(), *r.denom()]}),
        Val::AtLeast(r) => json!({"at_least": [*r.numer(), *r.denom()]}),
    }
}

pub fn rat_json(r: &Rat) -> Value {
    json!([*r.numer(), *r.denom()])
}

/// JSON form of a scalar: little-endian base-p digit vectors per
/// coordinate, with the denominator exponent and absolute precision.
pub fn scalar_json(ctx: &PrimeCtx, x: &PadicScalar) -> Value {
    json!({
        "digits": ctx.coord_digits(x),
        "den_exp": x.den_exp(),
        "prec": x.abs_prec(),
    })
}

/// Config-side integer entry: either a plain integer or little-endian
/// base-p digits (for values beyond i64).
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum IntEntry {
    Plain(i64),
    Digits { digits: Vec<u64>, #[serde(default)] neg: bool },
}

impl IntEntry {
    pub fn to_scalar(&self, ctx: &PrimeCtx) -> PadicScalar {
        match self {
            IntEntry::Plain(v) => ctx.from_i64(*v),
            IntEntry::Digits { digits, neg } => {
                let mut acc = ctx.zero();
                for (k, d) in digits.iter().enumerate() {
                    let term = ctx.mul_p_pow(&ctx.from_i64(*d as i64), k as i64);
                    acc = ctx.add(&acc, &term);
                }
                if *neg {
                    ctx.neg(&acc)
                } else {
                    acc
                }
            }
        }
    }
}

/// Rational config entry `[num, den]` or plain integer.
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(untagged)]
pub enum RatEntry {
    Int(i64),
    Pair(i64, i64),
}

impl RatEntry {
    pub fn to_rat(&self) -> Rat {
        match self {
            RatEntry::Int(n) => Rat::new(*n, 1),
            RatEntry::Pair(n, d) => Rat::new(*n, *d),
        }
    }
}

/// Canonical row sorting: rows carry a "sort_key" string injected by each
/// command; strip it after sorting.
pub fn sort_rows(mut rows: Vec<(String, Value, bool)>) -> (Vec<Value>, Vec<bool>) {
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let flags = rows.iter().map(|r| r.2).collect();
    let vals = rows.into_iter().map(|r| r.1).collect();
    (vals, flags)
}

/// Resolved-config helper: serialize back to JSON for the envelope.
pub fn config_json<T: Serialize>(cfg: &T) -> Result<Value, CliError> {
    serde_json::to_value(cfg).map_err(|e| CliError::config(e.to_string()))
}
