use crate::error::{Error, Result};
use crate::val::{rat, Rat, Val};

use super::poly::{poly_xgcd, PPoly};
use super::scalar::PrimeCtx;

/// Worst coefficient valuation of a polynomial.
fn poly_val(ctx: &PrimeCtx, q: &PPoly) -> Val {
    q.coeffs()
        .iter()
        .map(|c| ctx.valuation(c))
        .fold(Val::AtLeast(rat(i64::MAX, 1)), Val::smallest)
}

/// Lift a coprime factorization `q = g h (mod p^e)` to `mod p^target_prec`.
///
/// `g0` must be monic; `h0` may have leading coefficients of positive
/// valuation (its degree slot is `deg q - deg g0`). The Bezout pair is
/// computed once over `K[x]`; its denominators measure the coprimality
/// defect `r`, and lifting requires the seed congruence to hold past `2r`.
pub fn hensel_lift_coprime(
    ctx: &PrimeCtx,
    q: &PPoly,
    g0: &PPoly,
    h0: &PPoly,
    target_prec: u32,
) -> Result<(PPoly, PPoly)> {
    let g0 = g0.trimmed(ctx);
    if !g0.is_monic(ctx) {
        return Err(Error::contract("hensel seed g0 must be monic"));
    }
    if g0.degree() > q.degree() {
        return Err(Error::contract("hensel seed g0 has degree above q"));
    }

    let (s, t) = poly_xgcd(ctx, &g0, h0).map_err(|_| {
        Error::divergence("coprimality defect too large: no Bezout pair at this precision")
    })?;
    let r_eff: Rat = s
        .coeffs()
        .iter()
        .chain(t.coeffs().iter())
        .map(|c| ctx.valuation(c).bound())
        .fold(rat(0, 1), |acc, v| acc.min(v));
    let r_eff = -r_eff; // >= 0: how many digits the Bezout pair costs

    let seed_val = poly_val(ctx, &q.sub(ctx, &g0.mul(ctx, h0))).bound();
    if seed_val <= r_eff + r_eff {
        return Err(Error::divergence(alloc::format!(
            "coprimality defect too large: seed congruence holds to {seed_val}, resultant loss {r_eff}"
        )));
    }

    let target = rat(target_prec as i64, 1);
    let mut g = g0.clone();
    let mut h = h0.clone();
    let mut last = seed_val;
    for _ in 0..64 {
        let e = q.sub(ctx, &g.mul(ctx, &h));
        let ev = poly_val(ctx, &e);
        if ev.at_least(target) {
            return Ok((g, h));
        }
        if !ev.is_exact() {
            // no digits left to improve on
            return Err(Error::precision(alloc::format!(
                "hensel lift stalled at valuation {ev} before reaching {target_prec}"
            )));
        }
        let dg = t.mul(ctx, &e).divrem(ctx, &g)?.1;
        let num = e.sub(ctx, &h.mul(ctx, &dg));
        let (dh, _rr) = num.divrem(ctx, &g)?;
        g = g.add(ctx, &dg);
        h = h.add(ctx, &dh);
        let new_val = poly_val(ctx, &q.sub(ctx, &g.mul(ctx, &h))).bound();
        if new_val <= last {
            return Err(Error::divergence(
                "hensel iteration failed to gain valuation",
            ));
        }
        last = new_val;
    }
    Err(Error::divergence("hensel iteration limit exceeded"))
}
