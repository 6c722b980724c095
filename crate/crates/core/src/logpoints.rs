//! Logarithm-style series, their correction constants, and the trace
//! relations they satisfy at tower points.
//!
//! For an admissible `P(x) = x^d + b_{d-1} x^{d-1} + ... + b_0` over `Z_p`
//! (all roots of valuation strictly between 0 and 1, lower coefficients in
//! `p Z_p`) and a tower polynomial `f`, this module builds:
//!
//! - the series `l(x)` solving `l = x - j(phi) l` with
//!   `j(x) = P(x)/b_0 - 1`, coefficient by coefficient (the per-degree
//!   equation is contractive, so each coefficient is solved exactly at the
//!   working precision);
//! - the constants `eps^{sigma^n}` obtained by expanding the same operator
//!   identity in the other direction, where `V/p` acts on constants as
//!   `sigma^{-1}`;
//! - the residuals of the finite trace identity
//!   `sum_s p^s b_s Tr_{n-s/n-d}(eps^{sigma^{-n+s+i}} + (phi^i l^{sigma^{-n+s}})(pi_{n-s}))`
//!   evaluated with honest truncated-series arithmetic and tail
//!   certificates.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dieudonne::{annihilator_index, minimal_poly, DieudonneModule};
use crate::error::{Error, Result};
use crate::iwasawa::{LambdaElem, NormSequence};
use crate::padic::{newton_polygon, PPoly, PadicScalar, PrimeCtx};
use crate::pseries::{auto_truncation, PSeriesK};
use crate::tower::{TowerElem, TowerSpec};
use crate::val::{rat, Rat, Val};

/// Validate the hypotheses on `P` and return its degree.
///
/// Monic over `Z_p`, lower coefficients in `p Z_p`, and all root valuations
/// strictly inside `(0, 1)` (in particular `b_0` is not a unit, which is
/// what makes the operator expansions converge).
pub fn validate_p_poly(ctx: &PrimeCtx, p_poly: &PPoly) -> Result<usize> {
    let p_poly = p_poly.trimmed(ctx);
    let d = p_poly.degree();
    if d < 1 {
        return Err(Error::contract("P must have degree at least 1"));
    }
    if !p_poly.is_monic(ctx) || !p_poly.is_over_zp(ctx) {
        return Err(Error::contract("P must be monic over Z_p"));
    }
    for i in 0..d {
        if !ctx.valuation(&p_poly.coeffs()[i]).at_least(rat(1, 1)) {
            return Err(Error::contract(
                "the lower coefficients of P must lie in p Z_p",
            ));
        }
    }
    let np = newton_polygon(ctx, &p_poly)?;
    for (slope, _) in &np {
        if *slope <= rat(0, 1) || *slope >= rat(1, 1) {
            return Err(Error::contract(alloc::format!(
                "P has a root of valuation {slope}, outside (0, 1)"
            )));
        }
    }
    Ok(d)
}

// ---------------------------------------------------------------------------
// epsilon constants
// ---------------------------------------------------------------------------

/// The family `eps^{sigma^n}` (periodic in `n` mod `f`).
#[derive(Debug, Clone)]
pub struct EpsilonFamily {
    values: Vec<PadicScalar>,
    p_poly: PPoly,
    alpha_top: PadicScalar,
}

impl EpsilonFamily {
    pub fn value(&self, n: i64) -> &PadicScalar {
        let f = self.values.len() as i64;
        &self.values[n.rem_euclid(f) as usize]
    }

    pub fn values(&self) -> &[PadicScalar] {
        &self.values
    }

    pub fn p_poly(&self) -> &PPoly {
        &self.p_poly
    }

    pub fn alpha_top(&self) -> &PadicScalar {
        &self.alpha_top
    }
}

/// Build the epsilon family for `P` and the tower polynomial `f`.
///
/// On constants `V/p` acts as `sigma^{-1}`, so the inverse operator
/// `j(F)^{-1} = b_0 sigma^{-d} (1 + b_{d-1} sigma^{-1} + ...)^{-1}` gains at
/// least `val(b_0) >= 1` per application and the alternating series in its
/// powers converges; each value is computed by running that series on
/// `-alpha_{p-1}^{sigma^n} / p`.
pub fn build_epsilon(
    ctx: &PrimeCtx,
    p_poly: &PPoly,
    f_poly: &PPoly,
) -> Result<EpsilonFamily> {
    let d = validate_p_poly(ctx, p_poly)?;
    let p = ctx.p() as usize;
    if f_poly.degree() != p {
        return Err(Error::contract("f must have degree p"));
    }
    let alpha_top = f_poly.coeffs()[p - 1].clone();
    if !ctx.valuation(&alpha_top).at_least(rat(1, 1)) {
        return Err(Error::contract("alpha_{p-1} must be divisible by p"));
    }

    let b = p_poly.coeffs();
    let b0 = &b[0];
    let guard = 4 * ctx.pow_cap() as usize + 16;

    // y = (1 + b_{d-1} sigma^{-1} + ... + b_1 sigma^{-(d-1)})^{-1} x
    let inner_inverse = |x: &PadicScalar| -> Result<PadicScalar> {
        let mut acc = x.clone();
        let mut term = x.clone();
        for _ in 0..guard {
            // term <- -(b_{d-1} sigma^{-1} + ... + b_1 sigma^{-(d-1)}) term
            let mut next = ctx.zero();
            for s in 1..d {
                let c = &b[d - s];
                if ctx.is_zero(c) {
                    continue;
                }
                let t = ctx.mul(c, &ctx.frobenius(&term, -(s as i64)));
                next = ctx.add(&next, &t);
            }
            term = ctx.neg(&next);
            if ctx.is_zero(&term) {
                return Ok(acc);
            }
            acc = ctx.add(&acc, &term);
        }
        Err(Error::divergence(
            "inner operator expansion failed to converge",
        ))
    };
    let apply_s = |x: &PadicScalar| -> Result<PadicScalar> {
        let y = inner_inverse(x)?;
        Ok(ctx.mul(b0, &ctx.frobenius(&y, -(d as i64))))
    };

    let mut values = Vec::with_capacity(ctx.f());
    for n in 0..ctx.f() {
        let u = ctx.neg(&ctx.mul_p_pow(&ctx.frobenius(&alpha_top, n as i64), -1));
        // eps = sum_{t>=1} (-1)^t S^t(u)
        let mut w = u;
        let mut total = ctx.zero();
        let mut negative = true;
        let mut done = false;
        for _ in 0..guard {
            w = apply_s(&w)?;
            if ctx.is_zero(&w) {
                done = true;
                break;
            }
            total = if negative {
                ctx.sub(&total, &w)
            } else {
                ctx.add(&total, &w)
            };
            negative = !negative;
        }
        if !done && !ctx.is_zero(&w) {
            return Err(Error::divergence(
                "epsilon series failed to converge: is b_0 a unit?",
            ));
        }
        values.push(total);
    }
    Ok(EpsilonFamily {
        values,
        p_poly: p_poly.clone(),
        alpha_top,
    })
}

/// Valuation of `eps^{sigma^n} + sum_s (b_s/b_0) eps^{sigma^{n+s}}
///  - alpha_{p-1}^{sigma^n}/p`.
pub fn koko_check(ctx: &PrimeCtx, eps: &EpsilonFamily, n: i64) -> Result<Val> {
    let b = eps.p_poly.coeffs();
    let d = eps.p_poly.degree();
    let b0_inv = ctx.inv(&b[0])?;
    let mut lhs = eps.value(n).clone();
    for s in 1..=d {
        let ratio = ctx.mul(&b[s], &b0_inv);
        lhs = ctx.add(&lhs, &ctx.mul(&ratio, eps.value(n + s as i64)));
    }
    let rhs = ctx.mul_p_pow(&ctx.frobenius(&eps.alpha_top, n), -1);
    Ok(ctx.valuation(&ctx.sub(&lhs, &rhs)))
}

// ---------------------------------------------------------------------------
// the series l(x)
// ---------------------------------------------------------------------------

fn ser_mul_trunc(
    ctx: &PrimeCtx,
    a: &[PadicScalar],
    b: &[PadicScalar],
    len: usize,
) -> Vec<PadicScalar> {
    let mut out = vec![ctx.zero(); len.min(a.len() + b.len() - 1)];
    for (i, x) in a.iter().enumerate() {
        if i >= len {
            break;
        }
        if ctx.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j >= len {
                break;
            }
            if ctx.is_zero(y) {
                continue;
            }
            let t = ctx.mul(x, y);
            out[i + j] = ctx.add(&out[i + j], &t);
        }
    }
    out.resize(len, ctx.zero());
    out
}

/// Substitute the series/polynomial `inner` into `outer` (Horner),
/// truncating at `len` coefficients. `inner` must have zero constant term.
fn subst_series(
    ctx: &PrimeCtx,
    outer: &[PadicScalar],
    inner: &[PadicScalar],
    len: usize,
) -> Vec<PadicScalar> {
    let mut acc = vec![ctx.zero(); len];
    if let Some(top) = outer.last() {
        acc[0] = top.clone();
    }
    for c in outer.iter().rev().skip(1) {
        acc = ser_mul_trunc(ctx, &acc, inner, len);
        acc[0] = ctx.add(&acc[0], c);
    }
    acc
}

/// Build the truncated series `l(x) = [1 - j(phi) + j(phi)^2 - ...] o x`.
///
/// Writing the fixed-point identity `l = x - j(phi) l` degree by degree
/// gives, at each `m`, a semilinear equation
/// `A_m + sum_s (b_s/b_0) c_s^m sigma^s(A_m) = (known from A_j, j < m)`
/// whose correction term has positive valuation (the hypotheses on `P`
/// force `val(b_s) + s m > val(b_0)`), so it is solved by a convergent
/// iteration. The composites `phi^s o l` are accumulated incrementally, so
/// the whole construction costs `O(d D^2)` coefficient operations.
pub fn build_l(
    ctx: &PrimeCtx,
    p_poly: &PPoly,
    f_poly: &PPoly,
    trunc: usize,
) -> Result<PSeriesK> {
    let d = validate_p_poly(ctx, p_poly)?;
    let p = ctx.p() as usize;
    if f_poly.degree() != p {
        return Err(Error::contract("f must have degree p"));
    }
    if !ctx.is_zero(&f_poly.coeffs()[0]) {
        return Err(Error::contract("f must have zero constant term"));
    }
    let len = trunc + 1;
    let b = p_poly.coeffs();
    let b0_inv = ctx.inv(&b[0])?;
    // ratios r_s = b_s / b_0 for s = 1..=d
    let ratios: Vec<PadicScalar> = (1..=d).map(|s| ctx.mul(&b[s], &b0_inv)).collect();

    // twisted composites f^{(s)} = f^{sigma^{s-1}} o ... o f, truncated
    let mut composites: Vec<Vec<PadicScalar>> = Vec::with_capacity(d);
    composites.push({
        let mut v = f_poly.coeffs().to_vec();
        v.truncate(len);
        v
    });
    for s in 2..=d {
        let outer = f_poly.twist(ctx, s as i64 - 1);
        let prev = &composites[s - 2];
        composites.push(subst_series(ctx, outer.coeffs(), prev, len));
    }
    // linear coefficients c_s = [X] f^{(s)} (valuation s)
    let lin: Vec<PadicScalar> = composites
        .iter()
        .map(|g| g.get(1).cloned().unwrap_or_else(|| ctx.zero()))
        .collect();

    // incremental state: pow[s] = (f^{(s+1)})^m, acc[s] = sum_j sigma^{s+1}(A_j) (f^{(s+1)})^j
    let mut pow: Vec<Vec<PadicScalar>> = (0..d)
        .map(|_| {
            let mut v = vec![ctx.zero(); 1];
            v[0] = ctx.one();
            v
        })
        .collect();
    let mut acc: Vec<Vec<PadicScalar>> = (0..d).map(|_| vec![ctx.zero(); len]).collect();
    let mut lin_pow: Vec<PadicScalar> = (0..d).map(|_| ctx.one()).collect();

    let mut coeffs = vec![ctx.zero(); len];
    let guard = ctx.pow_cap() as usize + 16;
    for m in 1..=trunc {
        // advance powers to exponent m
        for s in 0..d {
            pow[s] = ser_mul_trunc(ctx, &pow[s], &composites[s], len);
            lin_pow[s] = ctx.mul(&lin_pow[s], &lin[s]);
        }
        // rhs: delta_{m,1} - sum_s r_s [X^m] acc_s (contributions j < m)
        let mut rhs = if m == 1 { ctx.one() } else { ctx.zero() };
        for s in 0..d {
            if ctx.is_zero(&ratios[s]) {
                continue;
            }
            let t = ctx.mul(&ratios[s], &acc[s][m]);
            rhs = ctx.sub(&rhs, &t);
        }
        // solve x + sum_s mu_s sigma^{s+1}(x) = rhs, mu_s = r_s c_s^m
        let mus: Vec<PadicScalar> = (0..d).map(|s| ctx.mul(&ratios[s], &lin_pow[s])).collect();
        let mut x = rhs.clone();
        let mut solved = false;
        for _ in 0..guard {
            let mut t = rhs.clone();
            for (s, mu) in mus.iter().enumerate() {
                if ctx.is_zero(mu) {
                    continue;
                }
                let term = ctx.mul(mu, &ctx.frobenius(&x, s as i64 + 1));
                t = ctx.sub(&t, &term);
            }
            if ctx.is_zero(&ctx.sub(&t, &x)) {
                x = t;
                solved = true;
                break;
            }
            x = t;
        }
        if !solved {
            return Err(Error::divergence(
                "coefficient iteration failed to contract: P violates the root hypotheses",
            ));
        }
        coeffs[m] = x.clone();
        // fold the new coefficient into the accumulated composites
        if !ctx.is_zero(&x) {
            for s in 0..d {
                let xs = ctx.frobenius(&x, s as i64 + 1);
                for (k, pk) in pow[s].iter().enumerate() {
                    if k >= len {
                        break;
                    }
                    if ctx.is_zero(pk) {
                        continue;
                    }
                    let t = ctx.mul(&xs, pk);
                    acc[s][k] = ctx.add(&acc[s][k], &t);
                }
            }
        }
    }
    Ok(PSeriesK::new(coeffs))
}

/// `phi_{f^{sigma^{twist}}}` applied to a truncated series: coefficients
/// get `sigma`, the variable gets `f^{sigma^{twist}}(X)`.
pub fn phi_apply(
    ctx: &PrimeCtx,
    g: &PSeriesK,
    f_poly: &PPoly,
    twist: i64,
) -> PSeriesK {
    let len = g.truncation() + 1;
    let g_sigma: Vec<PadicScalar> = g.coeffs().iter().map(|c| ctx.frobenius(c, 1)).collect();
    let f_tw = f_poly.twist(ctx, twist);
    PSeriesK::new(subst_series(ctx, &g_sigma, f_tw.coeffs(), len))
}

// ---------------------------------------------------------------------------
// the trace identity
// ---------------------------------------------------------------------------

/// Outcome of one trace-identity evaluation.
#[derive(Debug, Clone)]
pub struct CanReport {
    pub n: usize,
    pub i: usize,
    /// Valuation of the evaluated left-hand side.
    pub residual: Val,
    /// Pass threshold (the requested tail target).
    pub target: Rat,
    pub pass: bool,
    /// Truncation order used for the series evaluations.
    pub trunc: usize,
    /// Certified lower bound on the truncation error of the whole sum.
    pub cert_floor: Rat,
    /// Tracked precision of the residual value.
    pub precision_floor: Rat,
    /// True when the trace window reaches the base field (`n = d`), where
    /// the relative degree of the last step drops from `p` to `p - 1`.
    pub bottom_window: bool,
}

/// Evaluate the trace-identity sum at `(n, i)` and return the level-`(n-d)`
/// element together with the certified truncation floor.
fn can_sum(
    tower: &TowerSpec,
    p_poly: &PPoly,
    l: &PSeriesK,
    eps: &EpsilonFamily,
    n: usize,
    i: usize,
    target: Rat,
) -> Result<(TowerElem, Rat)> {
    let ctx = tower.ctx();
    let d = p_poly.degree();
    let b = p_poly.coeffs();
    let base = n - d;
    let mut sum = tower.zero(base);
    let mut cert_floor = rat(i64::MAX, 1);
    for s in 0..=d {
        if ctx.is_zero(&b[s]) {
            continue;
        }
        let twist = -(n as i64) + s as i64 + i as i64;
        let w = n as i64 - s as i64 - i as i64;
        let level_s = n - s;
        let mut value = tower.from_scalar(eps.value(twist), level_s);
        if w >= 1 {
            let w = w as usize;
            let l_tw = l.twist(ctx, twist);
            let (ev, cert) = tower.eval_series(&l_tw, &tower.pi(w), target)?;
            let ev = tower.embed(&ev, level_s)?;
            value = tower.add(&value, &ev);
            let term_floor = cert
                + rat(s as i64, 1)
                + ctx.valuation(&b[s]).bound();
            if term_floor < cert_floor {
                cert_floor = term_floor;
            }
        }
        let traced = tower.trace(&value, base)?;
        let scaled = tower.scale(&traced, &ctx.mul_p_pow(&b[s], s as i64));
        sum = tower.add(&sum, &scaled);
    }
    Ok((sum, cert_floor))
}

/// Verify the trace identity at level window `[n, n-d]` with shift `i`.
///
/// All series are evaluated with tail certificates at the requested target;
/// the check passes when the residual valuation reaches the target.
pub fn can_check(
    tower: &TowerSpec,
    p_poly: &PPoly,
    n: usize,
    i: usize,
    target: Rat,
    trunc: Option<usize>,
) -> Result<CanReport> {
    let ctx = tower.ctx();
    let d = validate_p_poly(ctx, p_poly)?;
    if i >= d {
        return Err(Error::contract(alloc::format!(
            "shift i = {i} must be below d = {d}"
        )));
    }
    if n < d {
        return Err(Error::contract(alloc::format!(
            "level n = {n} must be at least d = {d}"
        )));
    }
    if n > tower.max_level() {
        return Err(Error::contract("n exceeds the tower's built levels"));
    }
    let trunc = trunc.unwrap_or_else(|| auto_truncation(ctx.p(), tower.ext_deg(n), target));
    let l = build_l(ctx, p_poly, tower.f_poly(), trunc)?;
    let eps = build_epsilon(ctx, p_poly, tower.f_poly())?;
    let (sum, cert_floor) = can_sum(tower, p_poly, &l, &eps, n, i, target)?;
    let residual = tower.valuation(&sum);
    let precision_floor = tower.precision_floor(&sum);
    Ok(CanReport {
        n,
        i,
        residual,
        target,
        pass: residual.at_least(target),
        trunc,
        cert_floor,
        precision_floor,
        bottom_window: n == d,
    })
}

/// Same check, but with the level-`n` point replaced by an arbitrary root
/// of the level polynomial (conjugate of the canonical generator).
///
/// The whole chain of lower points is regenerated from `top_point` by the
/// tower maps, everything is represented at level `n`, and the traces from
/// intermediate levels are recovered by dividing the full trace by the
/// relative degree.
pub fn can_check_at_point(
    tower: &TowerSpec,
    p_poly: &PPoly,
    n: usize,
    i: usize,
    target: Rat,
    trunc: Option<usize>,
    top_point: &TowerElem,
) -> Result<CanReport> {
    let ctx = tower.ctx();
    let d = validate_p_poly(ctx, p_poly)?;
    if i >= d || n < d || n > tower.max_level() || top_point.level() != n {
        return Err(Error::contract("bad parameters for the conjugated check"));
    }
    let trunc = trunc.unwrap_or_else(|| auto_truncation(ctx.p(), tower.ext_deg(n), target));
    let l = build_l(ctx, p_poly, tower.f_poly(), trunc)?;
    let eps = build_epsilon(ctx, p_poly, tower.f_poly())?;

    // chain points pi'_w at level-n representation
    let mut chain: Vec<TowerElem> = vec![tower.zero(n); n + 1];
    chain[n] = top_point.clone();
    for w in (0..n).rev() {
        let f_tw = tower.f_poly().twist(ctx, -(w as i64 + 1));
        chain[w] = tower.eval_poly(&f_tw, &chain[w + 1]);
    }

    let b = p_poly.coeffs();
    let base = n - d;
    let mut sum = tower.zero(base);
    let mut cert_floor = rat(i64::MAX, 1);
    for s in 0..=d {
        if ctx.is_zero(&b[s]) {
            continue;
        }
        let twist = -(n as i64) + s as i64 + i as i64;
        let w = n as i64 - s as i64 - i as i64;
        let level_s = n - s;
        let mut value = tower.from_scalar(eps.value(twist), n);
        if w >= 1 {
            let l_tw = l.twist(ctx, twist);
            let (ev, cert) = tower.eval_series(&l_tw, &chain[w as usize], target)?;
            value = tower.add(&value, &ev);
            let t = cert + rat(s as i64, 1) + ctx.valuation(&b[s]).bound();
            if t < cert_floor {
                cert_floor = t;
            }
        }
        // Tr_{n-s/n-d} = Tr_{n/n-d} / [K(pi_n) : K(pi_{n-s})]
        let traced = tower.trace(&value, base)?;
        let deg_factor = (tower.ext_deg(n) / tower.ext_deg(level_s)) as i64;
        let inv_deg = ctx.inv(&ctx.from_i64(deg_factor))?;
        let scaled = tower.scale(
            &traced,
            &ctx.mul(&ctx.mul_p_pow(&b[s], s as i64), &inv_deg),
        );
        sum = tower.add(&sum, &scaled);
    }
    let residual = tower.valuation(&sum);
    let precision_floor = tower.precision_floor(&sum);
    Ok(CanReport {
        n,
        i,
        residual,
        target,
        pass: residual.at_least(target),
        trunc,
        cert_floor,
        precision_floor,
        bottom_window: n == d,
    })
}

// ---------------------------------------------------------------------------
// point families
// ---------------------------------------------------------------------------

/// One logarithm generator's worth of point data: its expansion over the
/// basis `F^k m` (the finite single-level form).
#[derive(Debug, Clone)]
pub struct PointRow {
    pub label: String,
    /// Coefficients `beta_0 .. beta_{d-1}`; may carry denominators bounded
    /// by the annihilator constant.
    pub beta: Vec<PadicScalar>,
    /// Rows mapping through the complement are identically zero.
    pub complement: bool,
}

/// Assembled data for one `(P, m)` pair.
#[derive(Debug, Clone)]
pub struct PointFamilyEntry {
    pub p_poly: PPoly,
    /// Exponent of the annihilator constant `C = p^{c_exp}`.
    pub c_exp: u32,
    pub rows: Vec<PointRow>,
}

/// Validate and assemble the point data for a module element.
///
/// `P` must be the minimal polynomial of `m`; the constant `C` is computed
/// from the Krylov lattice. Each row describes one logarithm generator as
/// `y(l_h) = C sum_k beta_k (eps^{sigma^{n+k}} + phi^k l^{sigma^n})`.
pub fn build_point_data(
    ctx: &PrimeCtx,
    module: &DieudonneModule,
    m: &[PadicScalar],
    p_poly: &PPoly,
    rows: Vec<PointRow>,
) -> Result<PointFamilyEntry> {
    let d = validate_p_poly(ctx, p_poly)?;
    let minp = minimal_poly(ctx, module, m)?;
    if minp.degree() != d {
        return Err(Error::contract(alloc::format!(
            "P has degree {d} but the minimal polynomial of m has degree {}",
            minp.degree()
        )));
    }
    let tol = rat((ctx.max_prec() / 2).max(1) as i64, 1);
    for i in 0..=d {
        if !ctx.eq_to(&minp.coeffs()[i], &p_poly.coeffs()[i], tol) {
            return Err(Error::contract(
                "P is not the minimal polynomial of m at the working precision",
            ));
        }
    }
    let c_exp = annihilator_index(ctx, module, m)?;
    for row in &rows {
        if row.complement {
            if row.beta.iter().any(|c| !ctx.is_zero(c)) {
                return Err(Error::contract(
                    "complement rows must have zero coefficients",
                ));
            }
        } else if row.beta.len() != d {
            return Err(Error::contract(alloc::format!(
                "row '{}' must expand over F^0..F^{}",
                row.label,
                d - 1
            )));
        }
    }
    Ok(PointFamilyEntry {
        p_poly: p_poly.clone(),
        c_exp,
        rows,
    })
}

/// Per-row residual of the norm relation.
#[derive(Debug, Clone)]
pub struct MexicoRow {
    pub label: String,
    pub residual: Val,
    pub pass: bool,
}

/// Outcome of the norm-relation check on a whole point family.
#[derive(Debug, Clone)]
pub struct MexicoReport {
    pub rows: Vec<MexicoRow>,
    pub target: Rat,
    pub trunc: usize,
    pub pass: bool,
}

/// Verify the norm-relation sum on every generator row of a family.
///
/// Each row's residual is the `beta`-combination of the shift-`i` trace
/// sums, scaled by `C`; complement rows contribute exactly zero.
pub fn mexico_check(
    tower: &TowerSpec,
    entry: &PointFamilyEntry,
    n: usize,
    target: Rat,
    trunc: Option<usize>,
) -> Result<MexicoReport> {
    let ctx = tower.ctx();
    let d = entry.p_poly.degree();
    if n < d || n > tower.max_level() {
        return Err(Error::contract("level out of range for the family"));
    }
    let trunc = trunc.unwrap_or_else(|| auto_truncation(ctx.p(), tower.ext_deg(n), target));
    let l = build_l(ctx, &entry.p_poly, tower.f_poly(), trunc)?;
    let eps = build_epsilon(ctx, &entry.p_poly, tower.f_poly())?;
    // shift sums S_i, shared across rows
    let mut sums = Vec::with_capacity(d);
    for i in 0..d {
        let (s, _) = can_sum(tower, &entry.p_poly, &l, &eps, n, i, target)?;
        sums.push(s);
    }
    let c_scalar = ctx.mul_p_pow(&ctx.one(), entry.c_exp as i64);
    let mut rows = Vec::with_capacity(entry.rows.len());
    let mut all_pass = true;
    for row in &entry.rows {
        let base = n - d;
        let mut acc = tower.zero(base);
        if !row.complement {
            for (k, beta) in row.beta.iter().enumerate() {
                if ctx.is_zero(beta) {
                    continue;
                }
                acc = tower.add(&acc, &tower.scale(&sums[k], beta));
            }
        }
        let acc = tower.scale(&acc, &c_scalar);
        let residual = tower.valuation(&acc);
        let pass = residual.at_least(target);
        all_pass &= pass;
        rows.push(MexicoRow {
            label: row.label.clone(),
            residual,
            pass,
        });
    }
    Ok(MexicoReport {
        rows,
        target,
        trunc,
        pass: all_pass,
    })
}

// ---------------------------------------------------------------------------
// ordinary points (synthetic norm-compatible data)
// ---------------------------------------------------------------------------

/// Deterministic splitmix64 stream for synthetic data.
struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
}

/// Synthesize `count` norm-compatible sequences (recurrence `x - 1`),
/// usable by the finite-level decomposition layer.
///
/// Each sequence is the compatible projection family of one row of a
/// count-by-count matrix over the top-level algebra; the matrix is
/// unit-diagonal plus `p`-small noise, so the family generates a free rank-
/// `count` submodule (certified by the augmentation rank).
pub fn ordinary_points(
    ctx: &PrimeCtx,
    count: usize,
    first_level: usize,
    last_level: usize,
    seed: u64,
) -> Result<Vec<NormSequence>> {
    if count == 0 || first_level > last_level {
        return Err(Error::contract("bad ordinary-point parameters"));
    }
    let mut rng = SplitMix(seed);
    let top_len = (ctx.p() as usize).pow(last_level as u32);
    let q = PPoly::from_i64(ctx, &[-1, 1]);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        // row i of I + p * noise
        let mut top_row = Vec::with_capacity(count);
        for j in 0..count {
            let mut xs = Vec::with_capacity(top_len);
            for k in 0..top_len {
                let base = if i == j && k == 0 { 1 } else { 0 };
                let noise = (rng.next() % 1000) as i64;
                xs.push(ctx.from_i64(base + ctx.p() as i64 * noise));
            }
            top_row.push(LambdaElem::from_x_coeffs(ctx, last_level, &xs)?);
        }
        let entries: Vec<Vec<LambdaElem>> = (first_level..=last_level)
            .map(|n| {
                top_row
                    .iter()
                    .map(|l| l.project(ctx, n))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        out.push(NormSequence::new(ctx, count, q.clone(), first_level, entries)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dieudonne::companion;
    use crate::tower::{cyclotomic_f, family_f};
    use alloc::sync::Arc;

    fn q5(prec: u32) -> PrimeCtx {
        PrimeCtx::new(5, 1, prec).unwrap()
    }

    #[test]
    fn epsilon_closed_form_over_qp() {
        let ctx = q5(24);
        let p_poly = PPoly::from_i64(&ctx, &[5, 0, 1]);
        let f = cyclotomic_f(&ctx);
        let eps = build_epsilon(&ctx, &p_poly, &f).unwrap();
        // (1 + j(F)) eps = alpha/p with j(F)^{-1} = 5 on constants: eps = 5/6
        let expect = ctx.from_ratio(5, 6).unwrap();
        assert!(ctx.eq_to(eps.value(0), &expect, rat(24, 1)));
        let r = koko_check(&ctx, &eps, 0).unwrap();
        assert!(r.at_least(rat(22, 1)), "koko residual {r}");
    }

    #[test]
    fn epsilon_zero_when_alpha_vanishes() {
        let ctx = q5(20);
        let p_poly = PPoly::from_i64(&ctx, &[5, 0, 1]);
        // f = X^5 + 5X: alpha_{p-1} = 0
        let f = PPoly::from_i64(&ctx, &[0, 5, 0, 0, 0, 1]);
        let eps = build_epsilon(&ctx, &p_poly, &f).unwrap();
        assert!(ctx.is_zero(eps.value(0)));
        assert!(koko_check(&ctx, &eps, 3).unwrap().at_least(rat(19, 1)));
    }

    #[test]
    fn epsilon_family_over_quadratic_extension() {
        let ctx = PrimeCtx::new(5, 2, 20).unwrap();
        let p_poly = PPoly::from_i64(&ctx, &[5, 0, 1]);
        let f = family_f(&ctx, 1); // alpha_{p-1} = zeta p
        let eps = build_epsilon(&ctx, &p_poly, &f).unwrap();
        // closed form from sigma^2 = 1: eps_n (1 + 1/5) = zeta^{sigma^n},
        // i.e. eps_n = (5/6) zeta^{sigma^n}
        let five_sixths = ctx.from_ratio(5, 6).unwrap();
        for n in 0..2i64 {
            let expect = ctx.mul(&five_sixths, &ctx.frobenius(&ctx.zeta(), n));
            assert!(ctx.eq_to(eps.value(n), &expect, rat(18, 1)), "n = {n}");
            let r = koko_check(&ctx, &eps, n).unwrap();
            assert!(r.at_least(rat(18, 1)), "koko at {n}: {r}");
        }
        // periodicity in n mod f
        assert!(ctx.eq_to(eps.value(0), eps.value(2), rat(20, 1)));
    }

    #[test]
    fn l_series_structure() {
        let ctx = q5(20);
        let p_poly = PPoly::from_i64(&ctx, &[5, 0, 1]);
        let f = cyclotomic_f(&ctx);
        let l = build_l(&ctx, &p_poly, &f, 60).unwrap();
        // A_0 = 0
        assert!(ctx.is_zero(&l.coeffs()[0]));
        // A_1 = 1/6: the degree-1 self-term is (1/5) alpha_1^2 = 5
        let expect = ctx.from_ratio(1, 6).unwrap();
        assert!(ctx.eq_to(&l.coeffs()[1], &expect, rat(16, 1)));
        // class membership: n A_n integral
        assert!(l.membership_defect(&ctx).at_least(rat(0, 1)));
    }

    #[test]
    fn l_series_matches_direct_composition() {
        let ctx = q5(20);
        let p_poly = PPoly::from_i64(&ctx, &[5, 0, 1]);
        let f = cyclotomic_f(&ctx);
        let tower = TowerSpec::new(Arc::new(q5(20)), f.clone(), 2).unwrap();
        let trunc = auto_truncation(5, 20, rat(12, 1));
        let l = build_l(&ctx, &p_poly, &f, trunc).unwrap();

        // torsion point: every chain term vanishes, l(pi_2) = pi_2
        let (v, _) = tower.eval_series(&l, &tower.pi(2), rat(12, 1)).unwrap();
        assert!(tower.eq_to(&v, &tower.pi(2), rat(12, 1)));

        // non-torsion point x = pi_2^2: independent oracle by the direct
        // partial sum  sum_k (-1)^k f^{(2k)}(x) / p^k
        let x = tower.mul(&tower.pi(2), &tower.pi(2));
        let (v, _) = tower.eval_series(&l, &x, rat(12, 1)).unwrap();
        let mut oracle = tower.zero(2);
        let mut chain = x.clone();
        let mut sign = false;
        for k in 0..18i64 {
            if k > 0 {
                chain = tower.eval_poly(&f, &chain);
                chain = tower.eval_poly(&f, &chain);
            }
            let term = tower.scale(&chain, &ctx.mul_p_pow(&ctx.one(), -k));
            oracle = if sign {
                tower.sub(&oracle, &term)
            } else {
                tower.add(&oracle, &term)
            };
            sign = !sign;
        }
        assert!(
            tower.eq_to(&v, &oracle, rat(12, 1)),
            "series {} vs oracle {}",
            tower.valuation(&tower.sub(&v, &oracle)),
            rat(12, 1)
        );
    }

    #[test]
    fn phi_apply_identities() {
        let ctx = PrimeCtx::new(5, 2, 16).unwrap();
        let f = family_f(&ctx, 1);
        // phi(X) = f(X)
        let ident = PSeriesK::new({
            let mut v = vec![ctx.zero(); 8];
            v[1] = ctx.one();
            v
        });
        let img = phi_apply(&ctx, &ident, &f, 0);
        for i in 0..=5 {
            assert!(ctx.eq_to(&img.coeffs()[i], &f.coeffs()[i], rat(16, 1)));
        }
        // phi(constant) = sigma(constant)
        let c = PSeriesK::new(vec![ctx.zeta()]);
        let img = phi_apply(&ctx, &c, &f, 0);
        assert!(ctx.eq_to(&img.coeffs()[0], &ctx.frobenius(&ctx.zeta(), 1), rat(16, 1)));
        // phi^2 (X) = f^sigma(f(X))
        let img2 = phi_apply(&ctx, &phi_apply(&ctx, &ident, &f, 0), &f, 0);
        let composed = f.twist(&ctx, 1).compose(&ctx, &f);
        for i in 0..img2.coeffs().len().min(composed.degree() + 1) {
            assert!(ctx.eq_to(&img2.coeffs()[i], &composed.coeffs()[i], rat(16, 1)));
        }
    }

    fn p2_tower(prec: u32, max_level: usize) -> TowerSpec {
        let ctx = Arc::new(PrimeCtx::new(2, 1, prec).unwrap());
        let f = cyclotomic_f(&ctx);
        TowerSpec::new(ctx, f, max_level).unwrap()
    }

    #[test]
    fn trace_identity_holds_above_the_base() {
        // p = 2 keeps the degrees tiny: ext degrees 1, 2, 4, 8
        let tower = p2_tower(24, 4);
        let p_poly = PPoly::from_i64(tower.ctx(), &[2, 0, 1]);
        for n in [3usize, 4] {
            for i in [0usize, 1] {
                let rep = can_check(&tower, &p_poly, n, i, rat(8, 1), None).unwrap();
                assert!(
                    rep.pass,
                    "n={n} i={i}: residual {} target {}",
                    rep.residual, rep.target
                );
                assert!(!rep.bottom_window);
            }
        }
    }

    #[test]
    fn trace_identity_fails_at_the_bottom_window() {
        // at n = d the last trace step has relative degree p - 1, not p,
        // and the telescoping constant changes: the residual is measurably
        // nonzero (valuation exactly d at i = 0)
        let tower = p2_tower(24, 2);
        let p_poly = PPoly::from_i64(tower.ctx(), &[2, 0, 1]);
        let rep = can_check(&tower, &p_poly, 2, 0, rat(8, 1), None).unwrap();
        assert!(rep.bottom_window);
        assert!(!rep.pass);
        assert_eq!(rep.residual, Val::Exact(rat(2, 1)));
    }

    #[test]
    fn conjugated_points_give_the_same_residual() {
        let tower = p2_tower(24, 3);
        let ctx = tower.ctx();
        let p_poly = PPoly::from_i64(ctx, &[2, 0, 1]);
        let base = can_check(&tower, &p_poly, 3, 0, rat(8, 1), None).unwrap();
        // conjugate root of the cyclotomic level polynomial:
        // (1 + pi)^a - 1 for a odd
        let one = tower.from_scalar(&ctx.one(), 3);
        let mut pw = tower.add(&one, &tower.pi(3));
        let u = pw.clone();
        pw = tower.mul(&pw, &u);
        pw = tower.mul(&pw, &u); // (1+pi)^3
        let conj = tower.sub(&pw, &one);
        // sanity: conj is a root of the level polynomial
        let e3 = tower.level_min_poly(3).unwrap().clone();
        let at = tower.eval_poly(&e3, &conj);
        assert!(tower.valuation(&at).at_least(rat(12, 1)));
        let rep = can_check_at_point(&tower, &p_poly, 3, 0, rat(8, 1), None, &conj).unwrap();
        assert!(rep.pass, "residual {}", rep.residual);
        assert_eq!(rep.pass, base.pass);
    }

    #[test]
    fn point_family_and_norm_relation() {
        let tower = p2_tower(24, 3);
        let ctx = tower.ctx();
        let p_poly = PPoly::from_i64(ctx, &[2, 0, 1]);
        let module = DieudonneModule::new(ctx, companion(ctx, &p_poly)).unwrap();
        let m = vec![ctx.one(), ctx.zero()];
        let rows = vec![
            PointRow {
                label: "l1".into(),
                beta: vec![ctx.one(), ctx.zero()],
                complement: false,
            },
            PointRow {
                label: "l2".into(),
                beta: vec![ctx.zero(), ctx.one()],
                complement: false,
            },
            PointRow {
                label: "lc".into(),
                beta: vec![],
                complement: true,
            },
        ];
        let entry = build_point_data(ctx, &module, &m, &p_poly, rows).unwrap();
        assert_eq!(entry.c_exp, 0);
        let rep = mexico_check(&tower, &entry, 3, rat(8, 1), None).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.rows.len(), 3);
        // the complement row is exactly zero (full-precision bound)
        assert!(rep.rows[2].residual.at_least(rat(20, 1)));
    }

    #[test]
    fn scaled_generator_shifts_the_constant() {
        let tower = p2_tower(24, 3);
        let ctx = tower.ctx();
        let p_poly = PPoly::from_i64(ctx, &[2, 0, 1]);
        let module = DieudonneModule::new(ctx, companion(ctx, &p_poly)).unwrap();
        let m = vec![ctx.from_i64(2), ctx.zero()];
        let entry = build_point_data(ctx, &module, &m, &p_poly, vec![]).unwrap();
        assert_eq!(entry.c_exp, 1);
    }

    #[test]
    fn ordinary_points_are_norm_compatible() {
        let ctx = q5(20);
        let seqs = ordinary_points(&ctx, 2, 0, 2, 42).unwrap();
        assert_eq!(seqs.len(), 2);
        for seq in &seqs {
            let res = crate::iwasawa::check_recurrence(&ctx, seq).unwrap();
            for r in res {
                assert!(r.residual.at_least(rat(20, 1)));
            }
        }
        // rank via the augmentation matrix
        let mut entries = Vec::new();
        for seq in &seqs {
            for l in seq.at_level(0).unwrap() {
                entries.push(l.augmentation(&ctx));
            }
        }
        let mat = crate::linalg::Mat::new(2, 2, entries);
        let s = crate::linalg::smith(&ctx, &mat).unwrap();
        assert_eq!(s.rank, 2);
    }
}
