//! One module per subcommand, plus the config helpers they share.

pub mod bound;
pub mod can;
pub mod decompose;
pub mod epsilon;
pub mod genus;
pub mod slopes;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use dlab_core::padic::{PPoly, PrimeCtx};

use crate::formats::{scalar_json, CliError, IntEntry};

/// Tower polynomial selection: the cyclotomic `(1+X)^p - 1`, the family
/// member `X^p + zeta^i p X^{p-1} + p X`, or explicit coefficients.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum FPolyChoice {
    Named(String),
    Family { family_index: usize },
    Coeffs { coeffs: Vec<IntEntry> },
}

impl Default for FPolyChoice {
    fn default() -> Self {
        FPolyChoice::Named("cyclotomic".into())
    }
}

pub fn resolve_f(ctx: &PrimeCtx, choice: &FPolyChoice) -> Result<PPoly, CliError> {
    match choice {
        FPolyChoice::Named(name) if name == "cyclotomic" => Ok(dlab_core::tower::cyclotomic_f(ctx)),
        FPolyChoice::Named(other) => Err(CliError::config(format!(
            "unknown tower polynomial '{other}' (expected \"cyclotomic\", a family index, or coefficients)"
        ))),
        FPolyChoice::Family { family_index } => Ok(dlab_core::tower::family_f(ctx, *family_index)),
        FPolyChoice::Coeffs { coeffs } => {
            let c = coeffs.iter().map(|e| e.to_scalar(ctx)).collect();
            Ok(PPoly::new(c))
        }
    }
}

pub fn parse_poly(ctx: &PrimeCtx, coeffs: &[IntEntry]) -> Result<PPoly, CliError> {
    if coeffs.is_empty() {
        return Err(CliError::config("polynomial with no coefficients"));
    }
    Ok(PPoly::new(coeffs.iter().map(|e| e.to_scalar(ctx)).collect()))
}

pub fn poly_json(ctx: &PrimeCtx, p: &PPoly) -> Value {
    json!(p
        .coeffs()
        .iter()
        .map(|c| scalar_json(ctx, c))
        .collect::<Vec<_>>())
}

pub fn default_prec() -> u32 {
    20
}

/// Module input: inline matrix or a JSON file in the documented format
/// (`{"rank": r, "prec": N, "f": [[entries]]}` with entries either plain
/// integers or little-endian base-p digit vectors).
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct ModuleSpec {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub rank: Option<usize>,
    #[serde(default)]
    pub f: Option<Vec<Vec<IntEntry>>>,
}

#[derive(Debug, Deserialize)]
struct ModuleFile {
    rank: usize,
    #[serde(default)]
    prec: Option<u32>,
    f: Vec<Vec<IntEntry>>,
}

pub fn load_module_spec(
    ctx: &PrimeCtx,
    input: &ModuleSpec,
) -> Result<dlab_core::linalg::Mat, CliError> {
    let (rank, rows) = match (&input.path, &input.f) {
        (Some(path), _) => {
            let raw = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read {path}: {e}")))?;
            let file: ModuleFile = serde_json::from_str(&raw)
                .map_err(|e| CliError::config(format!("{path}: {e}")))?;
            let _ = file.prec;
            (file.rank, file.f)
        }
        (None, Some(f)) => (input.rank.unwrap_or(f.len()), f.clone()),
        _ => return Err(CliError::config("module needs either `path` or `f`")),
    };
    if rows.len() != rank || rows.iter().any(|r| r.len() != rank) {
        return Err(CliError::config("module matrix shape does not match rank"));
    }
    let mut data = Vec::with_capacity(rank * rank);
    for row in &rows {
        for e in row {
            data.push(e.to_scalar(ctx));
        }
    }
    Ok(dlab_core::linalg::Mat::new(rank, rank, data))
}

pub fn default_fdeg() -> usize {
    1
}
