//! `dlab slopes`: Newton polygons and the slope-1 factorization, for
//! explicit polynomials and for module characteristic polynomials.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use dlab_core::dieudonne::{self, DieudonneModule};
use dlab_core::padic::{newton_polygon, slope_split, PrimeCtx};
use dlab_core::val::rat;

use crate::formats::{config_json, sort_rows, val_json, CliError, IntEntry, RatEntry, Report};

use super::{default_prec, load_module_spec, parse_poly, poly_json, ModuleSpec};

#[derive(Debug, Deserialize, Serialize)]
struct Config {
    p: u64,
    #[serde(default = "default_prec")]
    prec: u32,
    #[serde(default)]
    poly: Vec<PolyIn>,
    #[serde(default)]
    modules: Vec<ModuleSpec>,
    /// Slope threshold (default 1).
    #[serde(default)]
    threshold: Option<RatEntry>,
    /// Product-defect pass target (default prec - 2).
    #[serde(default)]
    residual_target: Option<i64>,
}

#[derive(Debug, Deserialize, Serialize)]
struct PolyIn {
    coeffs: Vec<IntEntry>,
}

pub fn run(raw: &str, p_override: Option<u64>, prec_override: Option<u32>) -> Result<Report, CliError> {
    let mut cfg: Config = toml::from_str(raw)?;
    if let Some(p) = p_override {
        cfg.p = p;
    }
    if let Some(prec) = prec_override {
        cfg.prec = prec;
    }
    if cfg.poly.is_empty() && cfg.modules.is_empty() {
        return Err(CliError::config("empty grid: no polynomials or modules"));
    }
    let ctx = PrimeCtx::new(cfg.p, 1, cfg.prec)?;
    let threshold = cfg.threshold.map(|r| r.to_rat()).unwrap_or(rat(1, 1));
    let target = rat(cfg.residual_target.unwrap_or(cfg.prec as i64 - 2), 1);

    let mut rows = Vec::new();
    for (idx, pin) in cfg.poly.iter().enumerate() {
        let q = parse_poly(&ctx, &pin.coeffs)?;
        let np = newton_polygon(&ctx, &q)?;
        let split = slope_split(&ctx, &q, threshold)?;
        let pass = split.product_defect.at_least(target);
        let row = json!({
            "kind": "poly",
            "index": idx,
            "newton_polygon": np.iter().map(|(s, m)| json!([*s.numer(), *s.denom(), m])).collect::<Vec<_>>(),
            "pow_x": split.pow_x,
            "f1": poly_json(&ctx, &split.at_threshold),
            "f2": poly_json(&ctx, &split.below),
            "product_defect": val_json(&split.product_defect),
            "pass": pass,
        });
        rows.push((format!("poly:{idx:06}"), row, pass));
    }

    for (idx, min) in cfg.modules.iter().enumerate() {
        let f_mat = load_module_spec(&ctx, min)?;
        let fv = dieudonne::check_fv(&ctx, &f_mat)?;
        let module = DieudonneModule::new(&ctx, f_mat)?;
        let cp = dieudonne::char_poly(&ctx, &module);
        let np = newton_polygon(&ctx, &cp)?;
        let split = dieudonne::split_ord_nonord(&ctx, &module)?;
        let pass = fv.pass();
        let row = json!({
            "kind": "module",
            "index": idx,
            "rank": module.rank(),
            "char_poly": poly_json(&ctx, &cp),
            "newton_polygon": np.iter().map(|(s, m)| json!([*s.numer(), *s.denom(), m])).collect::<Vec<_>>(),
            "ordinary_rank": split.ordinary.cols(),
            "non_ordinary_rank": split.non_ordinary.cols(),
            "fv": {
                "v_integral": fv.v_integral,
                "fv_commutes": fv.fv_commutes,
                "slopes_ok": fv.slopes_ok,
                "worst_v_entry": val_json(&fv.worst_v_entry),
            },
            "pass": pass,
        });
        rows.push((format!("module:{idx:06}"), row, pass));
    }

    let (rows, flags) = sort_rows(rows);
    Ok(Report::new("slopes", config_json(&cfg)?, rows, &flags))
}
