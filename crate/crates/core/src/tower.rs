//! The totally ramified tower `K(pi_n)` attached to a degree-`p` polynomial
//! `f(X) = X^p + a_{p-1} X^{p-1} + ... + a_1 X` over `O_K` with `p | a_i`
//! and `val(a_1) = 1`.
//!
//! Levels are generated by compatible roots: `pi_0 = 0` and
//! `f^{sigma^{-n}}(pi_n) = pi_{n-1}`. Each level is represented as a single
//! flattened extension of `K`: an element is a coefficient vector of length
//! `(p-1) p^{n-1}` reduced modulo the level's Eisenstein polynomial. The
//! level polynomials are the exact quotients `g_n / g_{n-1}` with
//! `g_n = g_{n-1}(f^{sigma^{-n}}(x))`, computed once at construction and
//! frozen.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::padic::{PPoly, PadicScalar, PrimeCtx};
use crate::pseries::{auto_truncation_at, tail_certificate_at, PSeriesK};
use crate::val::{rat, Rat, Val};

/// A tower context: the base field, the defining polynomial, and the frozen
/// per-level data.
pub struct TowerSpec {
    ctx: Arc<PrimeCtx>,
    f_poly: PPoly,
    levels: Vec<LevelData>,
}

struct LevelData {
    /// Eisenstein minimal polynomial of `pi_n` over `K` (level 0: `x`).
    min_poly: PPoly,
    ext_deg: usize,
}

/// Element of `K(pi_n)` as a reduced coefficient vector over `K`.
#[derive(Debug, Clone)]
pub struct TowerElem {
    level: usize,
    coords: Vec<PadicScalar>,
}

impl TowerElem {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coords(&self) -> &[PadicScalar] {
        &self.coords
    }
}

impl TowerSpec {
    /// Validate `f` and build levels `0 ..= max_level`.
    pub fn new(ctx: Arc<PrimeCtx>, f_poly: PPoly, max_level: usize) -> Result<Self> {
        let p = ctx.p() as usize;
        let f_poly = f_poly.trimmed(&ctx);
        if f_poly.degree() != p {
            return Err(Error::contract("f must have degree exactly p"));
        }
        if !f_poly.is_monic(&ctx) {
            return Err(Error::contract("f must be monic"));
        }
        if !ctx.valuation(&f_poly.coeffs()[0]).at_least(rat(ctx.max_prec() as i64, 1)) {
            return Err(Error::contract("f must have zero constant term"));
        }
        for i in 1..p {
            if !ctx.valuation(&f_poly.coeffs()[i]).at_least(rat(1, 1)) {
                return Err(Error::contract(alloc::format!(
                    "coefficient of X^{i} must be divisible by p"
                )));
            }
        }
        if ctx.valuation(&f_poly.coeffs()[1]) != Val::Exact(rat(1, 1)) {
            return Err(Error::contract("the linear coefficient must have valuation 1"));
        }

        let mut levels = Vec::with_capacity(max_level + 1);
        levels.push(LevelData {
            min_poly: PPoly::x(&ctx),
            ext_deg: 1,
        });
        // g_0 = x, g_n = g_{n-1}(f^{sigma^{-n}}(x)), E_n = g_n / g_{n-1}
        let mut g_prev = PPoly::x(&ctx);
        for n in 1..=max_level {
            let f_tw = f_poly.twist(&ctx, -(n as i64));
            let g_n = g_prev.compose(&ctx, &f_tw);
            let (e_n, _) = g_n
                .div_exact(&ctx, &g_prev, rat(ctx.max_prec() as i64, 1))
                .map_err(|_| {
                    Error::contract(
                        "level polynomial division is not exact: f violates the tower hypotheses",
                    )
                })?;
            let e_n = e_n.trimmed(&ctx);
            let ext = (p - 1) * p.pow(n as u32 - 1);
            if e_n.degree() != ext {
                return Err(Error::contract("level polynomial has unexpected degree"));
            }
            check_eisenstein(&ctx, &e_n)?;
            levels.push(LevelData {
                min_poly: e_n,
                ext_deg: ext,
            });
            g_prev = g_n;
        }
        Ok(TowerSpec {
            ctx,
            f_poly,
            levels,
        })
    }

    pub fn ctx(&self) -> &PrimeCtx {
        &self.ctx
    }

    pub fn ctx_arc(&self) -> Arc<PrimeCtx> {
        Arc::clone(&self.ctx)
    }

    pub fn f_poly(&self) -> &PPoly {
        &self.f_poly
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn ext_deg(&self, n: usize) -> usize {
        self.levels[n].ext_deg
    }

    /// Eisenstein polynomial of level `n >= 1` over `K`.
    pub fn level_min_poly(&self, n: usize) -> Result<&PPoly> {
        if n == 0 || n > self.max_level() {
            return Err(Error::contract("level out of range"));
        }
        Ok(&self.levels[n].min_poly)
    }

    // ---- element constructors ---------------------------------------------

    pub fn zero(&self, level: usize) -> TowerElem {
        TowerElem {
            level,
            coords: vec![self.ctx.zero(); self.levels[level].ext_deg],
        }
    }

    pub fn from_scalar(&self, c: &PadicScalar, level: usize) -> TowerElem {
        let mut z = self.zero(level);
        z.coords[0] = c.clone();
        z
    }

    /// The canonical generator `pi_n` (`pi_0 = 0`).
    pub fn pi(&self, level: usize) -> TowerElem {
        if level == 0 {
            return self.zero(0);
        }
        let mut z = self.zero(level);
        if z.coords.len() == 1 {
            // a degree-1 level: the generator is the root itself
            z.coords[0] = self
                .ctx
                .neg(&self.levels[level].min_poly.coeffs()[0]);
        } else {
            z.coords[1] = self.ctx.one();
        }
        z
    }

    // ---- arithmetic ---------------------------------------------------------

    pub fn add(&self, a: &TowerElem, b: &TowerElem) -> TowerElem {
        assert_eq!(a.level, b.level);
        TowerElem {
            level: a.level,
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| self.ctx.add(x, y))
                .collect(),
        }
    }

    pub fn sub(&self, a: &TowerElem, b: &TowerElem) -> TowerElem {
        assert_eq!(a.level, b.level);
        TowerElem {
            level: a.level,
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| self.ctx.sub(x, y))
                .collect(),
        }
    }

    pub fn neg(&self, a: &TowerElem) -> TowerElem {
        TowerElem {
            level: a.level,
            coords: a.coords.iter().map(|x| self.ctx.neg(x)).collect(),
        }
    }

    pub fn scale(&self, a: &TowerElem, s: &PadicScalar) -> TowerElem {
        TowerElem {
            level: a.level,
            coords: a.coords.iter().map(|x| self.ctx.mul(x, s)).collect(),
        }
    }

    pub fn mul(&self, a: &TowerElem, b: &TowerElem) -> TowerElem {
        assert_eq!(a.level, b.level);
        let e = self.levels[a.level].ext_deg;
        if e == 1 {
            return TowerElem {
                level: a.level,
                coords: vec![self.ctx.mul(&a.coords[0], &b.coords[0])],
            };
        }
        let ctx = &*self.ctx;
        let mut prod = vec![ctx.zero(); 2 * e - 1];
        for (i, x) in a.coords.iter().enumerate() {
            if ctx.is_zero(x) {
                continue;
            }
            for (j, y) in b.coords.iter().enumerate() {
                if ctx.is_zero(y) {
                    continue;
                }
                let t = ctx.mul(x, y);
                prod[i + j] = ctx.add(&prod[i + j], &t);
            }
        }
        self.reduce(a.level, prod)
    }

    fn reduce(&self, level: usize, coords: Vec<PadicScalar>) -> TowerElem {
        let e = self.levels[level].ext_deg;
        if coords.len() <= e {
            let mut c = coords;
            c.resize(e, self.ctx.zero());
            return TowerElem { level, coords: c };
        }
        let poly = PPoly::new(coords);
        let (_, rem) = poly
            .divrem(&self.ctx, &self.levels[level].min_poly)
            .expect("level polynomial is monic");
        let mut c = rem.coeffs().to_vec();
        c.resize(e, self.ctx.zero());
        c.truncate(e);
        TowerElem { level, coords: c }
    }

    /// Evaluate a polynomial over `K` at a tower element (Horner).
    pub fn eval_poly(&self, p: &PPoly, x: &TowerElem) -> TowerElem {
        let mut acc = self.from_scalar(p.coeffs().last().unwrap(), x.level);
        for c in p.coeffs().iter().rev().skip(1) {
            acc = self.mul(&acc, x);
            acc.coords[0] = self.ctx.add(&acc.coords[0], c);
        }
        acc
    }

    /// `f^{sigma^{-n}}` applied to a level-`n` element; the value is
    /// `pi_{n-1}`-like data but stays represented at level `n`.
    pub fn apply_f_down(&self, x: &TowerElem) -> TowerElem {
        let f_tw = self.f_poly.twist(&self.ctx, -(x.level as i64));
        self.eval_poly(&f_tw, x)
    }

    /// Embed a level-`m` element into level `n >= m`.
    pub fn embed(&self, x: &TowerElem, n: usize) -> Result<TowerElem> {
        if n < x.level {
            return Err(Error::contract("cannot embed downwards"));
        }
        if n > self.max_level() {
            return Err(Error::contract("level out of range"));
        }
        if n == x.level {
            return Ok(x.clone());
        }
        // image of pi_m inside level n: descend the chain from pi_n
        let mut gen_img = self.pi(n);
        for j in (x.level + 1..=n).rev() {
            let f_tw = self.f_poly.twist(&self.ctx, -(j as i64));
            gen_img = self.eval_poly(&f_tw, &gen_img);
        }
        // Horner in the embedded generator
        let mut acc = self.from_scalar(x.coords.last().unwrap(), n);
        for c in x.coords.iter().rev().skip(1) {
            acc = self.mul(&acc, &gen_img);
            acc.coords[0] = self.ctx.add(&acc.coords[0], c);
        }
        Ok(acc)
    }

    /// Minimal polynomial of `pi_n` over `K(pi_m)`, with coefficients as
    /// level-`m` elements (monic, degree `p^{n-m}`, or `ext_deg(n)` for
    /// `m = 0`).
    fn rel_min_poly(&self, n: usize, m: usize) -> Result<Vec<TowerElem>> {
        if m == 0 {
            let e = &self.levels[n].min_poly;
            return Ok(e
                .coeffs()
                .iter()
                .map(|c| self.from_scalar(c, 0))
                .collect());
        }
        // chain F_{m+1} o ... o F_n as a polynomial over K
        let mut chain = PPoly::x(&self.ctx);
        let mut first = true;
        for j in (m + 1..=n).rev() {
            let f_tw = self.f_poly.twist(&self.ctx, -(j as i64));
            chain = if first {
                first = false;
                f_tw
            } else {
                chain.compose(&self.ctx, &f_tw)
            };
        }
        let mut coeffs: Vec<TowerElem> = chain
            .coeffs()
            .iter()
            .map(|c| self.from_scalar(c, m))
            .collect();
        // subtract pi_m from the constant term
        coeffs[0] = self.sub(&coeffs[0], &self.pi(m));
        Ok(coeffs)
    }

    /// Trace of `x` from its level down to level `m`.
    ///
    /// The trace of the multiplication endomorphism is computed through the
    /// power sums of the relative minimal polynomial (Newton's identities),
    /// so it needs no division and is `K(pi_m)`-linear by construction.
    pub fn trace(&self, x: &TowerElem, m: usize) -> Result<TowerElem> {
        let n = x.level;
        if m > n {
            return Err(Error::contract("trace target level above the element"));
        }
        if m == n {
            return Ok(x.clone());
        }
        let g = self.rel_min_poly(n, m)?;
        let t = g.len() - 1; // relative degree
        let e_n = self.levels[n].ext_deg;

        // power sums s_j = Tr(pi_n^j) for j < e_n
        let mut sums: Vec<TowerElem> = Vec::with_capacity(e_n);
        sums.push(self.from_scalar(&self.ctx.from_i64(t as i64), m));
        for j in 1..e_n {
            // s_j = -j g_{t-j} - sum_{r=1}^{j-1} g_{t-r} s_{j-r}   (j <= t)
            // s_j = -sum_{r=1}^{t} g_{t-r} s_{j-r}                 (j > t)
            let mut acc = self.zero(m);
            let rmax = t.min(j);
            for r in 1..=rmax {
                if j == r {
                    continue; // handled by the j g_{t-j} term
                }
                let term = self.mul(&g[t - r], &sums[j - r]);
                acc = self.add(&acc, &term);
            }
            if j <= t {
                let jg = self.scale(&g[t - j], &self.ctx.from_i64(j as i64));
                acc = self.add(&acc, &jg);
            } else {
                // r = j is out of range; the g_0 s_{j-t} term has r = t
                // which is included above unless j == t (impossible here)
            }
            sums.push(self.neg(&acc));
        }

        // K(pi_m)-linear combination by x's K-coordinates
        let mut out = self.zero(m);
        for (j, a) in x.coords.iter().enumerate() {
            if self.ctx.is_zero(a) {
                continue;
            }
            out = self.add(&out, &self.scale(&sums[j], a));
        }
        Ok(out)
    }

    /// Norm of `x` down to `K`: determinant of the multiplication matrix.
    pub fn norm_to_base(&self, x: &TowerElem) -> Result<PadicScalar> {
        let e = self.levels[x.level].ext_deg;
        let mut cols = Vec::with_capacity(e);
        let mut cur = TowerElem {
            level: x.level,
            coords: x.coords.clone(),
        };
        let gen = self.pi(x.level);
        for j in 0..e {
            if j > 0 {
                cur = self.mul(&cur, &gen);
            }
            cols.push(cur.coords.clone());
        }
        let mut mat = Mat::zeros(&self.ctx, e, e);
        for (j, col) in cols.iter().enumerate() {
            for (i, c) in col.iter().enumerate() {
                mat.set(i, j, c.clone());
            }
        }
        linalg::det(&self.ctx, &mat)
    }

    /// Valuation of a tower element.
    ///
    /// Coordinates sit at distinct valuations mod 1 (`val(pi_n^j) = j/e`),
    /// so the minimum over `val(a_j) + j/e` is exact whenever the achieving
    /// coordinate is.
    pub fn valuation(&self, x: &TowerElem) -> Val {
        let e = self.levels[x.level].ext_deg as i64;
        let mut out = Val::AtLeast(rat(i64::MAX, 1));
        for (j, a) in x.coords.iter().enumerate() {
            let shift = rat(j as i64, e);
            let v = match self.ctx.valuation(a) {
                Val::Exact(v) => Val::Exact(v + shift),
                Val::AtLeast(b) => Val::AtLeast(b + shift),
            };
            out = out.smallest(v);
        }
        out
    }

    pub fn eq_to(&self, a: &TowerElem, b: &TowerElem, tol: Rat) -> bool {
        self.valuation(&self.sub(a, b)).at_least(tol)
    }

    /// Bound at which the element is pinned down: the error of the stored
    /// representative has at least this valuation.
    pub fn precision_floor(&self, x: &TowerElem) -> Rat {
        let e = self.levels[x.level].ext_deg as i64;
        let mut out = rat(i64::MAX, 1);
        for (j, a) in x.coords.iter().enumerate() {
            let b = rat(a.abs_prec(), 1) + rat(j as i64, e);
            if b < out {
                out = b;
            }
        }
        out
    }

    /// Evaluate a truncated `P_K`-series at `x` (valuation must be exactly
    /// positive), returning the partial sum and the certified tail bound.
    ///
    /// Uses block (Paterson-Stockmeyer) evaluation: `sqrt(D)` full
    /// multiplications instead of `D`.
    pub fn eval_series(
        &self,
        s: &PSeriesK,
        x: &TowerElem,
        tail_target: Rat,
    ) -> Result<(TowerElem, Rat)> {
        let v = match self.valuation(x) {
            Val::Exact(v) if v > rat(0, 1) => v,
            Val::AtLeast(b) => {
                // zero at precision: the series value is its constant term
                let _ = b;
                let out = self.from_scalar(&s.coeffs()[0], x.level);
                return Ok((out, rat(i64::MAX, 1)));
            }
            _ => return Err(Error::contract("series evaluation needs val(x) > 0")),
        };
        let d = s.truncation();
        let cert = tail_certificate_at(self.ctx.p(), v, d);
        if cert < tail_target {
            let needed = auto_truncation_at(self.ctx.p(), v, tail_target);
            return Err(Error::precision(alloc::format!(
                "tail certificate {cert} below target {tail_target}: increase truncation to {needed}"
            )));
        }

        let block = isqrt(d + 1).max(1);
        let mut powers = Vec::with_capacity(block + 1);
        let mut cur = self.from_scalar(&self.ctx.one(), x.level);
        powers.push(cur.clone());
        for _ in 1..=block {
            cur = self.mul(&cur, x);
            powers.push(cur.clone());
        }
        let xb = &powers[block];
        let nblocks = (d + 1).div_ceil(block);
        let mut acc = self.zero(x.level);
        for blk in (0..nblocks).rev() {
            if blk + 1 < nblocks {
                acc = self.mul(&acc, xb);
            } else {
                // top block: start from zero, no multiply needed
            }
            let base = blk * block;
            for i in (0..block).rev() {
                let idx = base + i;
                if idx > d {
                    continue;
                }
                let c = &s.coeffs()[idx];
                if self.ctx.is_zero(c) {
                    continue;
                }
                acc = self.add(&acc, &self.scale(&powers[i], c));
            }
        }
        Ok((acc, cert))
    }
}

/// Unit leading coefficient, positive lower coefficients, constant term of
/// valuation exactly 1.
fn check_eisenstein(ctx: &PrimeCtx, e: &PPoly) -> Result<()> {
    if !e.is_monic(ctx) {
        return Err(Error::contract("level polynomial is not monic"));
    }
    for i in 0..e.degree() {
        if !ctx.valuation(&e.coeffs()[i]).at_least(rat(1, 1)) {
            return Err(Error::contract(
                "level polynomial is not Eisenstein: a lower coefficient is a unit",
            ));
        }
    }
    if ctx.valuation(&e.coeffs()[0]) != Val::Exact(rat(1, 1)) {
        return Err(Error::contract(
            "level polynomial is not Eisenstein: constant term valuation != 1",
        ));
    }
    Ok(())
}

fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    while r * r > n {
        r -= 1;
    }
    r
}

/// The polynomial `(1+X)^p - 1` (cyclotomic tower).
pub fn cyclotomic_f(ctx: &PrimeCtx) -> PPoly {
    let p = ctx.p();
    let mut coeffs = vec![ctx.zero(); p as usize + 1];
    // binomial coefficients C(p, k)
    let mut c: u128 = 1;
    for k in 1..=p {
        c = c * (p as u128 - k as u128 + 1) / k as u128;
        coeffs[k as usize] = mul_u128(ctx, c);
    }
    PPoly::new(coeffs)
}

/// `f_i(X) = X^p + zeta^i p X^{p-1} + p X`: the simplest member of the
/// family with prescribed top and linear coefficients.
pub fn family_f(ctx: &PrimeCtx, i: usize) -> PPoly {
    let p = ctx.p() as usize;
    let mut coeffs = vec![ctx.zero(); p + 1];
    coeffs[p] = ctx.one();
    let zi = ctx.pow_u64(&ctx.zeta(), i as u64);
    coeffs[p - 1] = ctx.mul(&zi, &ctx.from_i64(ctx.p() as i64));
    coeffs[1] = ctx.from_i64(ctx.p() as i64);
    PPoly::new(coeffs)
}

fn mul_u128(ctx: &PrimeCtx, v: u128) -> PadicScalar {
    // binomials here fit i64 for desk-scale p, but stay general
    if v <= i64::MAX as u128 {
        ctx.from_i64(v as i64)
    } else {
        let hi = (v >> 62) as i64;
        let lo = (v & ((1 << 62) - 1)) as i64;
        let two62 = ctx.pow_u64(&ctx.from_i64(2), 62);
        ctx.add(&ctx.mul(&ctx.from_i64(hi), &two62), &ctx.from_i64(lo))
    }
}
