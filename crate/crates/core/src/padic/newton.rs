use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::val::{rat, Rat, Val};

use super::hensel::hensel_lift_coprime;
use super::poly::PPoly;
use super::scalar::{PadicScalar, PrimeCtx};

/// Newton polygon of `q`: the list of `(root valuation, multiplicity)` in
/// ascending valuation order, read off the lower convex hull of
/// `(i, val(coeff_i))`.
///
/// Leading (low-degree) coefficients indistinguishable from zero count as
/// vanishing at 0 and are excluded; the multiplicities sum to
/// `deg q - ord_0 q`. A hull vertex whose valuation is only a bound cannot be
/// certified and raises a precision error.
pub fn newton_polygon(ctx: &PrimeCtx, q: &PPoly) -> Result<Vec<(Rat, usize)>> {
    Ok(polygon_with_ord(ctx, q)?.1)
}

pub(crate) fn polygon_with_ord(ctx: &PrimeCtx, q: &PPoly) -> Result<(usize, Vec<(Rat, usize)>)> {
    let q = q.trimmed(ctx);
    let vals: Vec<Val> = (0..=q.degree()).map(|i| q.coeff_val(ctx, i)).collect();
    let ord = vals.iter().take_while(|v| !v.is_exact()).count();
    if ord > q.degree() {
        return Err(Error::precision(
            "all coefficients are indistinguishable from zero",
        ));
    }

    // lower convex hull over (i, bound) with collinear points dropped
    let pts: Vec<(i64, Rat, bool)> = (ord..=q.degree())
        .map(|i| (i as i64, vals[i].bound(), vals[i].is_exact()))
        .collect();
    let mut hull: Vec<usize> = Vec::new();
    for (idx, p) in pts.iter().enumerate() {
        while hull.len() >= 2 {
            let a = &pts[hull[hull.len() - 2]];
            let b = &pts[hull[hull.len() - 1]];
            // keep b only if it turns strictly left of the a->p chord
            let lhs = (b.1 - a.1) * rat(p.0 - a.0, 1);
            let rhs = (p.1 - a.1) * rat(b.0 - a.0, 1);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        let _ = idx;
        hull.push(idx);
    }

    for &h in &hull {
        if !pts[h].2 {
            return Err(Error::precision(
                "a Newton polygon vertex has indeterminate valuation; increase precision",
            ));
        }
    }

    let mut segs = Vec::new();
    for w in hull.windows(2) {
        let a = &pts[w[0]];
        let b = &pts[w[1]];
        let mult = (b.0 - a.0) as usize;
        let root_val = (a.1 - b.1) / rat(b.0 - a.0, 1);
        segs.push((root_val, mult));
    }
    segs.reverse(); // ascending root valuation
    Ok((ord, segs))
}

/// Result of the split at a slope threshold.
#[derive(Debug, Clone)]
pub struct SlopeSplit {
    /// Order of vanishing at 0, factored out before splitting.
    pub pow_x: usize,
    /// Monic factor carrying exactly the roots of valuation `threshold`.
    pub at_threshold: PPoly,
    /// Monic factor carrying the roots of valuation below `threshold`.
    pub below: PPoly,
    /// Valuation of `q / x^pow_x - at_threshold * below`.
    pub product_defect: Val,
}

/// Split a monic `q` over `Z_p` into the factor with root valuation exactly
/// `threshold` and the factor with root valuation below it.
///
/// Roots of valuation above the threshold are rejected (for the default
/// threshold 1 they cannot occur on a Dieudonne characteristic polynomial).
/// The method scales `x -> p^threshold y`, splits off the unit-root part of
/// the scaled polynomial by Hensel lifting, and scales back; both factors
/// come out monic over `Z_p`.
pub fn slope_split(ctx: &PrimeCtx, q: &PPoly, threshold: Rat) -> Result<SlopeSplit> {
    let q = q.trimmed(ctx);
    if !q.is_monic(ctx) {
        return Err(Error::contract("slope_split requires a monic polynomial"));
    }
    if !q.is_over_zp(ctx) {
        return Err(Error::contract(
            "slope_split requires coefficients in Z_p (fixed by sigma)",
        ));
    }
    let (ord, segs) = polygon_with_ord(ctx, &q)?;
    for (v, _) in &segs {
        if *v > threshold {
            return Err(Error::contract(alloc::format!(
                "root valuation {v} exceeds the threshold {threshold}"
            )));
        }
    }
    let d1: usize = segs
        .iter()
        .filter(|(v, _)| *v == threshold)
        .map(|(_, m)| m)
        .sum();

    // strip x^ord
    let stripped = PPoly::new(q.coeffs()[ord..].to_vec());
    let deg = stripped.degree();

    let full_prec = Val::AtLeast(rat(ctx.pow_cap() as i64, 1));
    if d1 == 0 {
        return Ok(SlopeSplit {
            pow_x: ord,
            at_threshold: PPoly::one(ctx),
            below: stripped,
            product_defect: full_prec,
        });
    }
    if d1 == deg {
        return Ok(SlopeSplit {
            pow_x: ord,
            at_threshold: stripped,
            below: PPoly::one(ctx),
            product_defect: full_prec,
        });
    }

    if !threshold.is_integer() || threshold < rat(1, 1) {
        return Err(Error::unsupported(
            "only integer thresholds >= 1 are implemented",
        ));
    }
    let k = threshold.to_integer();

    // q~(y) = q(p^k y) / p^v, v = min_i (val c_i + i k)
    let mut v_min: Option<Rat> = None;
    for i in 0..=deg {
        if let Some(ev) = stripped.coeff_val(ctx, i).exact() {
            let t = ev + rat(i as i64, 1) * rat(k, 1);
            v_min = Some(v_min.map_or(t, |m: Rat| m.min(t)));
        }
    }
    let v_min = v_min.ok_or_else(|| Error::precision("no certifiable coefficient"))?;
    debug_assert!(v_min.is_integer());
    let v = v_min.to_integer();
    let scaled: Vec<PadicScalar> = (0..=deg)
        .map(|i| ctx.mul_p_pow(&stripped.coeffs()[i], i as i64 * k - v))
        .collect();
    let scaled = PPoly::new(scaled);

    // seed: the reduction of q~ has degree d1 with unit constant term
    let lead = scaled.coeffs()[d1].clone();
    let lead_val = ctx.valuation(&lead);
    if lead_val != Val::Exact(rat(0, 1)) {
        return Err(Error::precision(
            "scaled polynomial does not show a unit at the split degree",
        ));
    }
    let lead_inv = ctx.inv(&lead)?;
    let mut g0_coeffs: Vec<PadicScalar> = (0..d1)
        .map(|i| ctx.mul(&scaled.coeffs()[i], &lead_inv))
        .collect();
    g0_coeffs.push(ctx.one());
    let g0 = PPoly::new(g0_coeffs);
    let mut h0_coeffs = vec![ctx.zero(); deg - d1 + 1];
    h0_coeffs[0] = lead;
    let h0 = PPoly::new(h0_coeffs);

    let avail = scaled
        .coeffs()
        .iter()
        .map(|c| c.abs_prec())
        .min()
        .unwrap_or(1)
        .max(1) as u32;
    let (g, _h) = hensel_lift_coprime(ctx, &scaled, &g0, &h0, avail)?;

    // scale back: f1(x) = p^{k d1} G(x / p^k)
    let f1 = PPoly::new(
        (0..=d1)
            .map(|i| ctx.mul_p_pow(&g.coeffs()[i], (d1 as i64 - i as i64) * k))
            .collect(),
    );
    let (f2, _) = stripped.div_exact(ctx, &f1, rat(1, 1))?;
    let defect = stripped
        .sub(ctx, &f1.mul(ctx, &f2))
        .coeffs()
        .iter()
        .map(|c| ctx.valuation(c))
        .fold(full_prec, Val::smallest);

    Ok(SlopeSplit {
        pow_x: ord,
        at_threshold: f1,
        below: f2,
        product_defect: defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrimeCtx {
        PrimeCtx::new(5, 1, 20).unwrap()
    }

    #[test]
    fn polygon_of_simple_shapes() {
        let c = ctx();
        // x - p
        let np = newton_polygon(&c, &PPoly::from_i64(&c, &[-5, 1])).unwrap();
        assert_eq!(np, vec![(rat(1, 1), 1)]);
        // x^2 + p: hull of (0,1),(2,0)
        let np = newton_polygon(&c, &PPoly::from_i64(&c, &[5, 0, 1])).unwrap();
        assert_eq!(np, vec![(rat(1, 2), 2)]);
        // (x - p)(x^2 + p) = x^3 - p x^2 + p x - p^2
        let q = PPoly::from_i64(&c, &[-25, 5, -5, 1]);
        let np = newton_polygon(&c, &q).unwrap();
        assert_eq!(np, vec![(rat(1, 2), 2), (rat(1, 1), 1)]);
    }

    #[test]
    fn polygon_counts_vanishing_order() {
        let c = ctx();
        // x * (x - p)
        let q = PPoly::from_i64(&c, &[0, -5, 1]);
        let (ord, segs) = polygon_with_ord(&c, &q).unwrap();
        assert_eq!(ord, 1);
        assert_eq!(segs, vec![(rat(1, 1), 1)]);
    }

    #[test]
    fn split_pure_cases() {
        let c = ctx();
        let q = PPoly::from_i64(&c, &[5, 0, 1]);
        let s = slope_split(&c, &q, rat(1, 1)).unwrap();
        assert_eq!(s.at_threshold.degree(), 0);
        assert_eq!(s.below.degree(), 2);
        let q = PPoly::from_i64(&c, &[-5, 1]);
        let s = slope_split(&c, &q, rat(1, 1)).unwrap();
        assert_eq!(s.at_threshold.degree(), 1);
        assert_eq!(s.below.degree(), 0);
    }

    #[test]
    fn split_mixed_cubic() {
        let c = ctx();
        // (x - p)(x^2 + p)
        let q = PPoly::from_i64(&c, &[-25, 5, -5, 1]);
        let s = slope_split(&c, &q, rat(1, 1)).unwrap();
        assert_eq!(s.at_threshold.degree(), 1);
        assert!(c.eq_to(&s.at_threshold.coeffs()[0], &c.from_i64(-5), rat(18, 1)));
        assert_eq!(s.below.degree(), 2);
        assert!(c.eq_to(&s.below.coeffs()[0], &c.from_i64(5), rat(18, 1)));
        assert!(c.eq_to(&s.below.coeffs()[1], &c.zero(), rat(18, 1)));
        assert!(s.product_defect.at_least(rat(18, 1)));
    }

    #[test]
    fn split_rejects_steep_slopes() {
        let c = ctx();
        // x - p^2 has a root of valuation 2
        let q = PPoly::from_i64(&c, &[-25, 1]);
        assert!(slope_split(&c, &q, rat(1, 1)).is_err());
    }
}
