//! `dlab epsilon`: build the correction constants and check their defining
//! identity across a polynomial grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use dlab_core::logpoints::{build_epsilon, koko_check};
use dlab_core::padic::PrimeCtx;
use dlab_core::val::rat;

use crate::formats::{config_json, scalar_json, sort_rows, val_json, CliError, IntEntry, Report};

use super::{default_fdeg, default_prec, parse_poly, resolve_f, FPolyChoice};

#[derive(Debug, Deserialize, Serialize)]
struct Config {
    p: u64,
    #[serde(default = "default_fdeg")]
    f_deg: usize,
    #[serde(default = "default_prec")]
    prec: u32,
    #[serde(default)]
    f_poly: FPolyChoice,
    poly: Vec<PolyIn>,
    #[serde(default)]
    n_values: Vec<i64>,
    /// Residual pass target (default prec - 2).
    #[serde(default)]
    residual_target: Option<i64>,
}

#[derive(Debug, Deserialize, Serialize)]
struct PolyIn {
    coeffs: Vec<IntEntry>,
}

pub fn run(
    raw: &str,
    p_override: Option<u64>,
    prec_override: Option<u32>,
) -> Result<Report, CliError> {
    let mut cfg: Config = toml::from_str(raw)?;
    if let Some(p) = p_override {
        cfg.p = p;
    }
    if let Some(prec) = prec_override {
        cfg.prec = prec;
    }
    if cfg.poly.is_empty() {
        return Err(CliError::config("empty polynomial grid"));
    }
    if cfg.n_values.is_empty() {
        cfg.n_values = (0..2 * cfg.f_deg.max(1) as i64).collect();
    }
    let ctx = PrimeCtx::new(cfg.p, cfg.f_deg, cfg.prec)?;
    let f = resolve_f(&ctx, &cfg.f_poly)?;
    let target = rat(cfg.residual_target.unwrap_or(cfg.prec as i64 - 2), 1);

    // families are independent across polynomials: build them in parallel
    let families: Vec<_> = cfg
        .poly
        .par_iter()
        .map(|pin| {
            let p_poly = parse_poly(&ctx, &pin.coeffs)?;
            let eps = build_epsilon(&ctx, &p_poly, &f)?;
            Ok::<_, CliError>(eps)
        })
        .collect();

    let mut rows = Vec::new();
    for (idx, fam) in families.into_iter().enumerate() {
        let eps = fam?;
        for &n in &cfg.n_values {
            let residual = koko_check(&ctx, &eps, n)?;
            let pass = residual.at_least(target);
            let row = json!({
                "poly": idx,
                "n": n,
                "values": eps.values().iter().map(|v| scalar_json(&ctx, v)).collect::<Vec<_>>(),
                "residual": val_json(&residual),
                "target": [ *target.numer(), *target.denom() ],
                "pass": pass,
            });
            rows.push((format!("{idx:06}:{n:+08}"), row, pass));
        }
    }

    let (rows, flags) = sort_rows(rows);
    Ok(Report::new("epsilon", config_json(&cfg)?, rows, &flags))
}
