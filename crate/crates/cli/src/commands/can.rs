//! `dlab can`: trace identities over `(level, shift)` grids, plus optional
//! point-family norm relations.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use dlab_core::dieudonne::DieudonneModule;
use dlab_core::logpoints::{build_point_data, can_check, mexico_check, PointRow};
use dlab_core::padic::PrimeCtx;
use dlab_core::tower::TowerSpec;
use dlab_core::val::rat;

use crate::formats::{config_json, rat_json, sort_rows, val_json, CliError, IntEntry, Report};

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
    #[serde(default)]
    check: Vec<CheckIn>,
    #[serde(default)]
    family: Vec<FamilyIn>,
}

#[derive(Debug, Deserialize, Serialize)]
struct CheckIn {
    poly: Vec<IntEntry>,
    levels: Vec<usize>,
    #[serde(default)]
    shifts: Vec<usize>,
    /// Residual target; defaults to the working precision.
    #[serde(default)]
    target: Option<i64>,
    /// Series truncation override (absent = automatic).
    #[serde(default)]
    trunc: Option<usize>,
}

#[derive(Debug, Deserialize, Serialize)]
struct FamilyIn {
    poly: Vec<IntEntry>,
    module: super::ModuleSpec,
    m: Vec<IntEntry>,
    rows: Vec<RowIn>,
    level: usize,
    #[serde(default)]
    target: Option<i64>,
    #[serde(default)]
    trunc: Option<usize>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RowIn {
    label: String,
    #[serde(default)]
    beta: Vec<IntEntry>,
    #[serde(default)]
    complement: bool,
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
    if cfg.check.is_empty() && cfg.family.is_empty() {
        return Err(CliError::config("empty grid: no checks or families"));
    }
    let ctx = Arc::new(PrimeCtx::new(cfg.p, cfg.f_deg, cfg.prec)?);
    let f = resolve_f(&ctx, &cfg.f_poly)?;
    let max_level = cfg
        .check
        .iter()
        .flat_map(|c| c.levels.iter().copied())
        .chain(cfg.family.iter().map(|f| f.level))
        .max()
        .unwrap_or(1);
    let tower = TowerSpec::new(ctx.clone(), f, max_level)?;

    // flatten the (check, n, i) grid and evaluate cells in parallel
    let mut cells = Vec::new();
    for (ci, check) in cfg.check.iter().enumerate() {
        let shifts = if check.shifts.is_empty() {
            vec![0usize]
        } else {
            check.shifts.clone()
        };
        for &n in &check.levels {
            for &i in &shifts {
                cells.push((ci, n, i));
            }
        }
    }
    let cell_rows: Vec<Result<(String, serde_json::Value, bool), CliError>> = cells
        .par_iter()
        .map(|&(ci, n, i)| {
            let check = &cfg.check[ci];
            let p_poly = parse_poly(&ctx, &check.poly)?;
            let target = rat(check.target.unwrap_or(cfg.prec as i64), 1);
            let trunc = check.trunc.filter(|t| *t > 0);
            let rep = can_check(&tower, &p_poly, n, i, target, trunc)?;
            let row = json!({
                "check": "can",
                "grid": ci,
                "n": n,
                "i": i,
                "residual": val_json(&rep.residual),
                "target": rat_json(&rep.target),
                "pass": rep.pass,
                "truncation_D": rep.trunc,
                "cert_floor": rat_json(&rep.cert_floor),
                "precision_loss_budget": rat_json(&(rat(cfg.prec as i64, 1) - rep.precision_floor.min(rat(cfg.prec as i64, 1)))),
                "bottom_window": rep.bottom_window,
            });
            Ok((format!("can:{ci:04}:{n:04}:{i:04}"), row, rep.pass))
        })
        .collect();

    let mut rows = Vec::new();
    for r in cell_rows {
        rows.push(r?);
    }

    for (fi, fam) in cfg.family.iter().enumerate() {
        let p_poly = parse_poly(&ctx, &fam.poly)?;
        let f_mat = super::load_module_spec(&ctx, &fam.module)?;
        let module = DieudonneModule::new(&ctx, f_mat)?;
        let m: Vec<_> = fam.m.iter().map(|e| e.to_scalar(&ctx)).collect();
        let point_rows: Vec<PointRow> = fam
            .rows
            .iter()
            .map(|r| PointRow {
                label: r.label.clone(),
                beta: r.beta.iter().map(|e| e.to_scalar(&ctx)).collect(),
                complement: r.complement,
            })
            .collect();
        let entry = build_point_data(&ctx, &module, &m, &p_poly, point_rows)?;
        let target = rat(fam.target.unwrap_or(cfg.prec as i64), 1);
        let rep = mexico_check(&tower, &entry, fam.level, target, fam.trunc.filter(|t| *t > 0))?;
        for mr in &rep.rows {
            let row = json!({
                "check": "mexico",
                "family": fi,
                "label": mr.label,
                "level": fam.level,
                "residual": val_json(&mr.residual),
                "target": rat_json(&rep.target),
                "truncation_D": rep.trunc,
                "c_exp": entry.c_exp,
                "pass": mr.pass,
            });
            rows.push((format!("mexico:{fi:04}:{}", mr.label), row, mr.pass));
        }
    }

    let (rows, flags) = sort_rows(rows);
    Ok(Report::new("can", config_json(&cfg)?, rows, &flags))
}
