//! Finite-level Iwasawa algebra arithmetic.
//!
//! `Lambda_n = Z_p[x]/((1+x)^{p^n} - 1)` is stored on the group basis
//! `u = 1 + x` (powers of the chosen topological generator), where
//! multiplication is a cyclic convolution and the projection to a lower
//! level folds exponents. The x-basis is exposed for input/output.
//!
//! A [`NormSequence`] is a level-indexed family of `Lambda_n`-vectors tied
//! together by a polynomial norm recurrence `q`; [`decompose`] splits it
//! into per-root components through a finite-level Vandermonde solve, and
//! [`assemble_l`] forms the determinant that plays the role of the
//! algebraic p-adic L-function at finite level.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::padic::{newton_polygon, slope_split, PPoly, PadicScalar, PrimeCtx};
use crate::val::{rat, Rat, Val};

/// Element of `Lambda_n` on the group basis (`coeffs[j]` is the coefficient
/// of `u^j`, `u = 1 + x`, length `p^n`).
#[derive(Debug, Clone)]
pub struct LambdaElem {
    level: usize,
    coeffs: Vec<PadicScalar>,
}

fn level_len(p: u64, level: usize) -> usize {
    (p as usize).pow(level as u32)
}

impl LambdaElem {
    pub fn zero(ctx: &PrimeCtx, level: usize) -> Self {
        LambdaElem {
            level,
            coeffs: vec![ctx.zero(); level_len(ctx.p(), level)],
        }
    }

    pub fn one(ctx: &PrimeCtx, level: usize) -> Self {
        let mut z = Self::zero(ctx, level);
        z.coeffs[0] = ctx.one();
        z
    }

    /// The group generator `u = 1 + x`.
    pub fn gamma(ctx: &PrimeCtx, level: usize) -> Self {
        let mut z = Self::zero(ctx, level);
        if z.coeffs.len() > 1 {
            z.coeffs[1] = ctx.one();
        } else {
            z.coeffs[0] = ctx.one();
        }
        z
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn group_coeffs(&self) -> &[PadicScalar] {
        &self.coeffs
    }

    /// Build from coefficients of `1, x, x^2, ...` (length at most `p^n`).
    pub fn from_x_coeffs(ctx: &PrimeCtx, level: usize, xs: &[PadicScalar]) -> Result<Self> {
        let len = level_len(ctx.p(), level);
        if xs.len() > len {
            return Err(Error::contract("too many x-coefficients for the level"));
        }
        // Horner in x = u - 1
        let mut acc = Self::zero(ctx, level);
        for c in xs.iter().rev() {
            // acc <- acc * (u - 1) + c
            let mut next = vec![ctx.zero(); len];
            for (j, a) in acc.coeffs.iter().enumerate() {
                if ctx.is_zero(a) {
                    continue;
                }
                let up = (j + 1) % len;
                next[up] = ctx.add(&next[up], a);
                next[j] = ctx.sub(&next[j], a);
            }
            next[0] = ctx.add(&next[0], c);
            acc.coeffs = next;
        }
        Ok(acc)
    }

    /// Coefficients on the basis `1, x, ..., x^{p^n - 1}`.
    pub fn x_coeffs(&self, ctx: &PrimeCtx) -> Vec<PadicScalar> {
        // Horner in u = 1 + x
        let len = self.coeffs.len();
        let mut acc = vec![ctx.zero(); len];
        for c in self.coeffs.iter().rev() {
            // acc <- acc * (1 + x) + c; deg stays < len because the original
            // element is reduced
            let mut next = vec![ctx.zero(); len];
            for (j, a) in acc.iter().enumerate() {
                if ctx.is_zero(a) {
                    continue;
                }
                next[j] = ctx.add(&next[j], a);
                if j + 1 < len {
                    next[j + 1] = ctx.add(&next[j + 1], a);
                }
            }
            next[0] = ctx.add(&next[0], c);
            acc = next;
        }
        acc
    }

    pub fn add(&self, ctx: &PrimeCtx, rhs: &Self) -> Self {
        assert_eq!(self.level, rhs.level, "level mismatch");
        LambdaElem {
            level: self.level,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| ctx.add(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, ctx: &PrimeCtx, rhs: &Self) -> Self {
        assert_eq!(self.level, rhs.level, "level mismatch");
        LambdaElem {
            level: self.level,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| ctx.sub(a, b))
                .collect(),
        }
    }

    pub fn neg(&self, ctx: &PrimeCtx) -> Self {
        LambdaElem {
            level: self.level,
            coeffs: self.coeffs.iter().map(|a| ctx.neg(a)).collect(),
        }
    }

    pub fn scale(&self, ctx: &PrimeCtx, s: &PadicScalar) -> Self {
        LambdaElem {
            level: self.level,
            coeffs: self.coeffs.iter().map(|a| ctx.mul(a, s)).collect(),
        }
    }

    /// Ring multiplication: cyclic convolution on the group basis.
    pub fn mul(&self, ctx: &PrimeCtx, rhs: &Self) -> Result<Self> {
        if self.level != rhs.level {
            return Err(Error::contract("lambda elements at different levels"));
        }
        let len = self.coeffs.len();
        let mut out = vec![ctx.zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if ctx.is_zero(a) {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if ctx.is_zero(b) {
                    continue;
                }
                let k = (i + j) % len;
                out[k] = ctx.add(&out[k], &ctx.mul(a, b));
            }
        }
        Ok(LambdaElem {
            level: self.level,
            coeffs: out,
        })
    }

    /// Natural projection to a lower level (fold group exponents).
    pub fn project(&self, ctx: &PrimeCtx, level: usize) -> Result<Self> {
        if level > self.level {
            return Err(Error::contract("projection target above the element"));
        }
        let len = level_len(ctx.p(), level);
        let mut out = vec![ctx.zero(); len];
        for (j, a) in self.coeffs.iter().enumerate() {
            out[j % len] = ctx.add(&out[j % len], a);
        }
        Ok(LambdaElem {
            level,
            coeffs: out,
        })
    }

    /// Minimum coefficient valuation (basis-independent for unimodular
    /// basis changes, so this is canonical).
    pub fn min_val(&self, ctx: &PrimeCtx) -> Val {
        self.coeffs
            .iter()
            .map(|c| ctx.valuation(c))
            .fold(Val::AtLeast(rat(i64::MAX, 1)), Val::smallest)
    }

    pub fn is_zero_at(&self, ctx: &PrimeCtx, tol: Rat) -> bool {
        self.min_val(ctx).at_least(tol)
    }

    /// Evaluate at `x = 0` (the augmentation `u = 1`).
    pub fn augmentation(&self, ctx: &PrimeCtx) -> PadicScalar {
        let mut acc = ctx.zero();
        for c in &self.coeffs {
            acc = ctx.add(&acc, c);
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// root fields
// ---------------------------------------------------------------------------

/// `Q_p[t] / (modulus)` for a monic `modulus` over `Z_p` (degree 1 means
/// plain `Q_p`).
#[derive(Debug, Clone)]
pub struct RootField {
    modulus: PPoly,
}

/// Element of a [`RootField`], as coordinates on `1, t, ..., t^{e-1}`.
#[derive(Debug, Clone)]
pub struct RFElem {
    pub coords: Vec<PadicScalar>,
}

impl RootField {
    pub fn rational(ctx: &PrimeCtx) -> Self {
        RootField {
            modulus: PPoly::x(ctx),
        }
    }

    pub fn new(modulus: PPoly) -> Self {
        assert!(modulus.degree() >= 1);
        RootField { modulus }
    }

    pub fn degree(&self) -> usize {
        self.modulus.degree().max(1)
    }

    pub fn modulus(&self) -> &PPoly {
        &self.modulus
    }

    pub fn zero(&self, ctx: &PrimeCtx) -> RFElem {
        RFElem {
            coords: vec![ctx.zero(); self.degree()],
        }
    }

    pub fn from_scalar(&self, ctx: &PrimeCtx, c: &PadicScalar) -> RFElem {
        let mut z = self.zero(ctx);
        z.coords[0] = c.clone();
        z
    }

    /// The class of `t` (for degree 1 this is the root 0 of `x`).
    pub fn generator(&self, ctx: &PrimeCtx) -> RFElem {
        let mut z = self.zero(ctx);
        if self.degree() > 1 {
            z.coords[1] = ctx.one();
        }
        z
    }

    pub fn add(&self, ctx: &PrimeCtx, a: &RFElem, b: &RFElem) -> RFElem {
        RFElem {
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| ctx.add(x, y))
                .collect(),
        }
    }

    pub fn sub(&self, ctx: &PrimeCtx, a: &RFElem, b: &RFElem) -> RFElem {
        RFElem {
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| ctx.sub(x, y))
                .collect(),
        }
    }

    pub fn neg(&self, ctx: &PrimeCtx, a: &RFElem) -> RFElem {
        RFElem {
            coords: a.coords.iter().map(|x| ctx.neg(x)).collect(),
        }
    }

    pub fn mul(&self, ctx: &PrimeCtx, a: &RFElem, b: &RFElem) -> RFElem {
        let e = self.degree();
        if e == 1 {
            return RFElem {
                coords: vec![ctx.mul(&a.coords[0], &b.coords[0])],
            };
        }
        let pa = PPoly::new(a.coords.clone());
        let pb = PPoly::new(b.coords.clone());
        let prod = pa.mul(ctx, &pb);
        let (_, rem) = prod.divrem(ctx, &self.modulus).expect("monic modulus");
        let mut coords = rem.coeffs().to_vec();
        coords.resize(e, ctx.zero());
        coords.truncate(e);
        RFElem { coords }
    }

    pub fn inv(&self, ctx: &PrimeCtx, a: &RFElem) -> Result<RFElem> {
        if self.degree() == 1 {
            return Ok(RFElem {
                coords: vec![ctx.inv(&a.coords[0])?],
            });
        }
        let pa = PPoly::new(a.coords.clone()).trimmed(ctx);
        let (s, _t) = crate::padic::poly_xgcd(ctx, &pa, &self.modulus)?;
        let (_, rem) = s.divrem(ctx, &self.modulus)?;
        let mut coords = rem.coeffs().to_vec();
        coords.resize(self.degree(), ctx.zero());
        coords.truncate(self.degree());
        Ok(RFElem { coords })
    }

    pub fn pow(&self, ctx: &PrimeCtx, a: &RFElem, mut e: u64) -> RFElem {
        let mut acc = self.from_scalar(ctx, &ctx.one());
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(ctx, &acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(ctx, &base, &base);
            }
        }
        acc
    }

    /// Valuation: `v_p(Norm(a)) / degree` (the unique extension of `v_p`).
    pub fn valuation(&self, ctx: &PrimeCtx, a: &RFElem) -> Result<Val> {
        let e = self.degree();
        if e == 1 {
            return Ok(ctx.valuation(&a.coords[0]));
        }
        // multiplication matrix determinant
        let mut mat = Mat::zeros(ctx, e, e);
        let mut cur = a.clone();
        for j in 0..e {
            if j > 0 {
                cur = self.mul(ctx, &cur, &self.generator(ctx));
            }
            for i in 0..e {
                mat.set(i, j, cur.coords[i].clone());
            }
        }
        let d = linalg::det(ctx, &mat)?;
        Ok(match ctx.valuation(&d) {
            Val::Exact(v) => Val::Exact(v / rat(e as i64, 1)),
            Val::AtLeast(b) => Val::AtLeast(b / rat(e as i64, 1)),
        })
    }

    pub fn is_zero(&self, ctx: &PrimeCtx, a: &RFElem) -> bool {
        a.coords.iter().all(|c| ctx.is_zero(c))
    }
}

/// `Lambda_n`-vector with coefficients in a root field: stored as one
/// `LambdaElem` per power of the field generator.
#[derive(Debug, Clone)]
pub struct ExtLambda {
    pub parts: Vec<LambdaElem>,
}

impl ExtLambda {
    pub fn zero(ctx: &PrimeCtx, field: &RootField, level: usize) -> Self {
        ExtLambda {
            parts: vec![LambdaElem::zero(ctx, level); field.degree()],
        }
    }

    pub fn from_lambda(field: &RootField, ctx: &PrimeCtx, l: LambdaElem) -> Self {
        let mut z = ExtLambda::zero(ctx, field, l.level());
        z.parts[0] = l;
        z
    }

    pub fn add(&self, ctx: &PrimeCtx, rhs: &Self) -> Self {
        ExtLambda {
            parts: self
                .parts
                .iter()
                .zip(&rhs.parts)
                .map(|(a, b)| a.add(ctx, b))
                .collect(),
        }
    }

    pub fn sub(&self, ctx: &PrimeCtx, rhs: &Self) -> Self {
        ExtLambda {
            parts: self
                .parts
                .iter()
                .zip(&rhs.parts)
                .map(|(a, b)| a.sub(ctx, b))
                .collect(),
        }
    }

    /// Multiply by a root-field scalar.
    pub fn scale_rf(&self, ctx: &PrimeCtx, field: &RootField, s: &RFElem) -> Self {
        let e = field.degree();
        let level = self.parts[0].level();
        let mut acc = vec![LambdaElem::zero(ctx, level); 2 * e - 1];
        for (i, part) in self.parts.iter().enumerate() {
            for (j, c) in s.coords.iter().enumerate() {
                if ctx.is_zero(c) {
                    continue;
                }
                acc[i + j] = acc[i + j].add(ctx, &part.scale(ctx, c));
            }
        }
        reduce_ext(ctx, field, acc)
    }

    /// Full ring multiplication in `Lambda_n tensor Q_p(t)`.
    pub fn mul(&self, ctx: &PrimeCtx, field: &RootField, rhs: &Self) -> Result<Self> {
        let e = field.degree();
        let level = self.parts[0].level();
        let mut acc = vec![LambdaElem::zero(ctx, level); 2 * e - 1];
        for (i, a) in self.parts.iter().enumerate() {
            for (j, b) in rhs.parts.iter().enumerate() {
                acc[i + j] = acc[i + j].add(ctx, &a.mul(ctx, b)?);
            }
        }
        Ok(reduce_ext(ctx, field, acc))
    }

    pub fn project(&self, ctx: &PrimeCtx, level: usize) -> Result<Self> {
        Ok(ExtLambda {
            parts: self
                .parts
                .iter()
                .map(|p| p.project(ctx, level))
                .collect::<Result<_>>()?,
        })
    }

    pub fn min_val(&self, ctx: &PrimeCtx) -> Val {
        self.parts
            .iter()
            .map(|p| p.min_val(ctx))
            .fold(Val::AtLeast(rat(i64::MAX, 1)), Val::smallest)
    }

    pub fn is_zero_at(&self, ctx: &PrimeCtx, tol: Rat) -> bool {
        self.min_val(ctx).at_least(tol)
    }
}

fn reduce_ext(ctx: &PrimeCtx, field: &RootField, mut acc: Vec<LambdaElem>) -> ExtLambda {
    let e = field.degree();
    if e > 1 {
        for idx in (e..acc.len()).rev() {
            let top = acc[idx].clone();
            // t^idx = t^{idx-e} * t^e, t^e = -(m_0 + ... + m_{e-1} t^{e-1})
            for j in 0..e {
                let mj = &field.modulus().coeffs()[j];
                if ctx.is_zero(mj) {
                    continue;
                }
                let contrib = top.scale(ctx, &ctx.neg(mj));
                acc[idx - e + j] = acc[idx - e + j].add(ctx, &contrib);
            }
        }
    }
    acc.truncate(e);
    ExtLambda { parts: acc }
}

// ---------------------------------------------------------------------------
// norm sequences
// ---------------------------------------------------------------------------

/// Level-indexed family of `Lambda_n^s` vectors satisfying a polynomial norm
/// recurrence `q`.
#[derive(Debug, Clone)]
pub struct NormSequence {
    /// Vector dimension.
    pub s: usize,
    /// Monic recurrence polynomial over `Z_p`.
    pub q: PPoly,
    /// Level of `entries[0]`.
    pub first_level: usize,
    /// `entries[i]` is the vector at level `first_level + i`.
    pub entries: Vec<Vec<LambdaElem>>,
}

impl NormSequence {
    pub fn new(
        ctx: &PrimeCtx,
        s: usize,
        q: PPoly,
        first_level: usize,
        entries: Vec<Vec<LambdaElem>>,
    ) -> Result<Self> {
        if !q.is_monic(ctx) || !q.is_over_zp(ctx) {
            return Err(Error::contract("recurrence polynomial must be monic over Z_p"));
        }
        for (i, v) in entries.iter().enumerate() {
            if v.len() != s {
                return Err(Error::contract("entry vector has wrong dimension"));
            }
            for l in v {
                if l.level() != first_level + i {
                    return Err(Error::contract("entry level mismatch"));
                }
            }
        }
        Ok(NormSequence {
            s,
            q,
            first_level,
            entries,
        })
    }

    pub fn last_level(&self) -> usize {
        self.first_level + self.entries.len() - 1
    }

    pub fn at_level(&self, n: usize) -> Option<&Vec<LambdaElem>> {
        n.checked_sub(self.first_level)
            .and_then(|i| self.entries.get(i))
    }
}

/// Residual of the companion recurrence, per level window.
#[derive(Debug, Clone)]
pub struct RecurrenceResidual {
    /// Base level of the window.
    pub level: usize,
    /// Worst residual valuation across the `s` coordinates.
    pub residual: Val,
}

/// Check `sum_k g_k proj_n(R_{n+k}) = 0` in `Lambda_n` for every window.
pub fn check_recurrence(ctx: &PrimeCtx, seq: &NormSequence) -> Result<Vec<RecurrenceResidual>> {
    let e = seq.q.degree();
    if seq.entries.len() < e + 1 {
        return Err(Error::contract(alloc::format!(
            "need at least {} levels, have {}",
            e + 1,
            seq.entries.len()
        )));
    }
    let mut out = Vec::new();
    for w in 0..=seq.entries.len() - (e + 1) {
        let n = seq.first_level + w;
        let mut worst = Val::AtLeast(rat(i64::MAX, 1));
        for coord in 0..seq.s {
            let mut acc = LambdaElem::zero(ctx, n);
            for (k, g) in seq.q.coeffs().iter().enumerate() {
                if ctx.is_zero(g) {
                    continue;
                }
                let term = seq.entries[w + k][coord]
                    .project(ctx, n)?
                    .scale(ctx, g);
                acc = acc.add(ctx, &term);
            }
            worst = worst.smallest(acc.min_val(ctx));
        }
        out.push(RecurrenceResidual {
            level: n,
            residual: worst,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// decomposition into root components
// ---------------------------------------------------------------------------

/// One root's worth of the finite-level decomposition.
#[derive(Debug, Clone)]
pub struct AlphaComponent {
    /// Which field the component lives over.
    pub field: RootField,
    /// The chosen root of `q` inside that field.
    pub alpha: RFElem,
    /// `v_p(alpha)`.
    pub lambda: Rat,
    /// Per analysis level `n`: the vector `sum_k W_{alpha,k} proj_n(R_{n+k})`,
    /// which recovers `f_alpha * alpha^{n+1}` on synthesized input.
    pub levels: Vec<(usize, Vec<ExtLambda>)>,
    /// Empirical growth offset: the largest observed excess of
    /// `-(n+1) lambda` over the component's minimum coefficient valuation.
    pub growth_offset: Rat,
    /// Human-readable root description.
    pub label: String,
}

/// Factor `q` (monic, squarefree over `Z_p`) and return every root inside a
/// single field descriptor.
///
/// Supported shapes: distinct unit roots that split over `Z_p` (after an
/// integer-slope rescale), plus at most one irreducible quadratic factor.
/// Anything wilder is reported as unsupported at desk scale.
pub fn roots_of(ctx: &PrimeCtx, q: &PPoly) -> Result<(RootField, Vec<RFElem>)> {
    if !q.is_monic(ctx) || !q.is_over_zp(ctx) {
        return Err(Error::contract("q must be monic over Z_p"));
    }
    let np = newton_polygon(ctx, q)?;
    // handle the pure fractional-slope irreducible case first
    if np.len() == 1 {
        let (slope, mult) = np[0];
        if !slope.is_integer() && mult == q.degree() {
            if *slope.denom() as usize == q.degree() {
                // Eisenstein-type irreducibility
                if q.degree() == 2 {
                    let field = RootField::new(q.clone());
                    let t = field.generator(ctx);
                    // second root: -b1 - t
                    let mut other = field.neg(ctx, &t);
                    other.coords[0] = ctx.sub(&other.coords[0], &q.coeffs()[1]);
                    return Ok((field, vec![t, other]));
                }
                return Err(Error::unsupported(
                    "irreducible factors of degree above 2 are not implemented",
                ));
            }
            return Err(Error::unsupported(
                "fractional-slope factor that is not certifiably irreducible",
            ));
        }
    }
    // integer slopes only: rescale each slope group to unit roots
    let mut rest = q.clone();
    let mut roots: Vec<PadicScalar> = Vec::new();
    // iterate: strip the highest integer slope part via slope_split
    let mut guard = 0;
    loop {
        guard += 1;
        if guard > 8 {
            return Err(Error::unsupported("slope structure too deep"));
        }
        let rest_np = newton_polygon(ctx, &rest)?;
        let Some(&(top_slope, _)) = rest_np.last() else {
            break;
        };
        if rest.degree() == 0 {
            break;
        }
        if !top_slope.is_integer() {
            return Err(Error::unsupported(
                "mixed fractional slopes are not implemented",
            ));
        }
        let k = top_slope.to_integer();
        if k == 0 {
            // unit roots: factor mod p by root scanning + Newton lifting
            roots.extend(lift_unit_roots(ctx, &rest)?);
            break;
        }
        let split = slope_split(ctx, &rest, top_slope)?;
        if split.pow_x > 0 {
            return Err(Error::contract("q must not vanish at 0 (squarefree)"));
        }
        // at_threshold has all roots of valuation k: substitute x = p^k y
        let part = split.at_threshold;
        let d = part.degree();
        let scaled = PPoly::new(
            (0..=d)
                .map(|i| ctx.mul_p_pow(&part.coeffs()[i], (i as i64 - d as i64) * k))
                .collect(),
        );
        for r in lift_unit_roots(ctx, &scaled)? {
            roots.push(ctx.mul_p_pow(&r, k));
        }
        rest = split.below;
        if rest.degree() == 0 {
            break;
        }
    }
    let field = RootField::rational(ctx);
    let out = roots
        .into_iter()
        .map(|r| RFElem { coords: vec![r] })
        .collect();
    Ok((field, out))
}

/// Distinct unit roots of a monic polynomial, by scanning mod `p` and
/// Newton lifting (roots must be simple mod `p`).
fn lift_unit_roots(ctx: &PrimeCtx, q: &PPoly) -> Result<Vec<PadicScalar>> {
    let p = ctx.p();
    let qd = q.derivative(ctx);
    let mut out = Vec::new();
    for a in 0..p {
        let x0 = ctx.from_i64(a as i64);
        let v = q.eval(ctx, &x0);
        if !ctx.valuation(&v).at_least(rat(1, 1)) {
            continue;
        }
        // require simplicity mod p
        let dv = qd.eval(ctx, &x0);
        if ctx.valuation(&dv).at_least(rat(1, 1)) {
            return Err(Error::precision(
                "roots are not separable at the working precision",
            ));
        }
        // Newton iteration
        let mut x = x0;
        for _ in 0..ctx.pow_cap() {
            let fx = q.eval(ctx, &x);
            if ctx.is_zero(&fx) {
                break;
            }
            let fpx = qd.eval(ctx, &x);
            x = ctx.sub(&x, &ctx.div(&fx, &fpx)?);
        }
        out.push(x);
    }
    if out.len() != q.degree() {
        return Err(Error::unsupported(
            "the unit-root part does not split into distinct roots over Z_p",
        ));
    }
    Ok(out)
}

/// Decompose a norm sequence into per-root components.
///
/// For each window of `deg q` consecutive levels projected to the base
/// level `n`, the inverse Vandermonde in the roots applies; on input
/// synthesized as `R_n = sum_alpha f_alpha alpha^{n+1}` the alpha-row
/// recovers `f_alpha alpha^{n+1}` exactly.
pub fn decompose(ctx: &PrimeCtx, seq: &NormSequence) -> Result<Vec<AlphaComponent>> {
    let e = seq.q.degree();
    if seq.entries.len() < e {
        return Err(Error::contract("not enough levels to decompose"));
    }
    let (field, roots) = roots_of(ctx, &seq.q)?;
    // distinct-roots check at working precision
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let d = field.sub(ctx, &roots[i], &roots[j]);
            if field.is_zero(ctx, &d) {
                return Err(Error::precision(
                    "roots are not separable at the working precision (repeated roots unsupported)",
                ));
            }
        }
    }

    // inverse Vandermonde W: V_{k,alpha} = alpha^k, W = V^{-1}
    let w = invert_vandermonde(ctx, &field, &roots)?;

    let mut comps = Vec::new();
    for (ai, alpha) in roots.iter().enumerate() {
        let lambda = field
            .valuation(ctx, alpha)?
            .exact()
            .ok_or_else(|| Error::precision("root valuation is indeterminate"))?;
        let mut levels = Vec::new();
        let mut growth: Rat = rat(0, 1);
        for wstart in 0..=seq.entries.len() - e {
            let n = seq.first_level + wstart;
            let mut vecs = Vec::with_capacity(seq.s);
            for coord in 0..seq.s {
                let mut acc = ExtLambda::zero(ctx, &field, n);
                for k in 0..e {
                    let y = seq.entries[wstart + k][coord].project(ctx, n)?;
                    let contrib =
                        ExtLambda::from_lambda(&field, ctx, y).scale_rf(ctx, &field, &w[ai][k]);
                    acc = acc.add(ctx, &contrib);
                }
                vecs.push(acc);
            }
            // growth bookkeeping: minimum coefficient valuation vs -(n+1) lambda
            let mv = vecs
                .iter()
                .map(|v| v.min_val(ctx))
                .fold(Val::AtLeast(rat(i64::MAX, 1)), Val::smallest);
            let bound = -rat(n as i64 + 1, 1) * lambda;
            let excess = bound - mv.bound();
            if excess > growth {
                growth = excess;
            }
            levels.push((n, vecs));
        }
        comps.push(AlphaComponent {
            field: field.clone(),
            alpha: alpha.clone(),
            lambda,
            levels,
            growth_offset: growth,
            label: alloc::format!("root{ai}"),
        });
    }
    Ok(comps)
}

fn invert_vandermonde(
    ctx: &PrimeCtx,
    field: &RootField,
    roots: &[RFElem],
) -> Result<Vec<Vec<RFElem>>> {
    let e = roots.len();
    // Gaussian elimination on [V | I] over the root field
    let mut v: Vec<Vec<RFElem>> = (0..e)
        .map(|k| {
            roots
                .iter()
                .map(|r| field.pow(ctx, r, k as u64))
                .collect()
        })
        .collect();
    let mut inv: Vec<Vec<RFElem>> = (0..e)
        .map(|i| {
            (0..e)
                .map(|j| {
                    if i == j {
                        field.from_scalar(ctx, &ctx.one())
                    } else {
                        field.zero(ctx)
                    }
                })
                .collect()
        })
        .collect();
    for t in 0..e {
        // find a usable pivot
        let mut pi = None;
        for i in t..e {
            if !field.is_zero(ctx, &v[i][t]) {
                pi = Some(i);
                break;
            }
        }
        let pi = pi.ok_or_else(|| Error::precision("vandermonde is singular at precision"))?;
        v.swap(t, pi);
        inv.swap(t, pi);
        let d = field.inv(ctx, &v[t][t])?;
        for j in 0..e {
            v[t][j] = field.mul(ctx, &v[t][j], &d);
            inv[t][j] = field.mul(ctx, &inv[t][j], &d);
        }
        for i in 0..e {
            if i == t || field.is_zero(ctx, &v[i][t]) {
                continue;
            }
            let f = v[i][t].clone();
            for j in 0..e {
                let x = field.mul(ctx, &f, &v[t][j]);
                v[i][j] = field.sub(ctx, &v[i][j], &x);
                let y = field.mul(ctx, &f, &inv[t][j]);
                inv[i][j] = field.sub(ctx, &inv[i][j], &y);
            }
        }
    }
    // rows of inv, transposed into per-root weight lists: W[alpha][k]
    let mut w = Vec::with_capacity(e);
    for a in 0..e {
        let mut row = Vec::with_capacity(e);
        for k in 0..e {
            row.push(inv[a][k].clone());
        }
        w.push(row);
    }
    Ok(w)
}

// ---------------------------------------------------------------------------
// determinant assembly
// ---------------------------------------------------------------------------

/// The assembled finite-level determinant and where its first nonvanishing
/// x-coefficient sits.
#[derive(Debug, Clone)]
pub struct AssembledL {
    pub det: ExtLambda,
    /// Index and valuation of the lowest x-coefficient with certified
    /// nonzero value, or `None` when the determinant is zero at precision.
    pub lowest: Option<(usize, Val)>,
}

/// `g_tor` times the determinant of the matrix whose `i`-th column is the
/// level-`n` vector of `components[i]`.
///
/// Columns are projected to the common level first; all components must
/// live over the same field descriptor.
pub fn assemble_l(
    ctx: &PrimeCtx,
    components: &[&AlphaComponent],
    g_tor: &LambdaElem,
    level: usize,
) -> Result<AssembledL> {
    let s = components.len();
    if s == 0 {
        return Err(Error::contract("no components"));
    }
    for c in components {
        if c.levels.iter().all(|(n, _)| *n < level) {
            return Err(Error::contract("component has no data at the level"));
        }
        if c.field.degree() != components[0].field.degree() {
            return Err(Error::unsupported(
                "mixed root fields in one determinant are not implemented",
            ));
        }
        if c.field.degree() > 1 {
            let same = c
                .field
                .modulus()
                .coeffs()
                .iter()
                .zip(components[0].field.modulus().coeffs())
                .all(|(a, b)| ctx.eq_to(a, b, rat(ctx.max_prec() as i64, 1)));
            if !same {
                return Err(Error::unsupported(
                    "mixed root fields in one determinant are not implemented",
                ));
            }
        }
    }
    let field = &components[0].field;

    // columns at the common level
    let mut cols: Vec<Vec<ExtLambda>> = Vec::with_capacity(s);
    for (i, c) in components.iter().enumerate() {
        let (_, vec_at) = c
            .levels
            .iter()
            .find(|(n, _)| *n >= level)
            .ok_or_else(|| Error::contract("no level data"))?;
        if vec_at.len() != s {
            return Err(Error::contract(alloc::format!(
                "component {i} has dimension {} != {s}",
                vec_at.len()
            )));
        }
        let projected: Vec<ExtLambda> = vec_at
            .iter()
            .map(|v| v.project(ctx, level))
            .collect::<Result<_>>()?;
        cols.push(projected);
    }

    // division-free determinant by Leibniz expansion (s is small)
    if s > 5 {
        return Err(Error::unsupported("determinants above 5x5 are not implemented"));
    }
    let mut det = ExtLambda::zero(ctx, field, level);
    let mut perm: Vec<usize> = (0..s).collect();
    permute_det(ctx, field, &cols, &mut perm, 0, true, &mut det)?;

    let g_ext = ExtLambda::from_lambda(field, ctx, g_tor.clone());
    let det = det.mul(ctx, field, &g_ext)?;

    // lowest nonvanishing x-coefficient (rational part only is meaningful
    // for reporting; scan all parts and report the first certified index)
    let mut lowest: Option<(usize, Val)> = None;
    'outer: for part in &det.parts {
        let xs = part.x_coeffs(ctx);
        for (i, c) in xs.iter().enumerate() {
            if let Val::Exact(v) = ctx.valuation(c) {
                lowest = Some((i, Val::Exact(v)));
                break 'outer;
            }
        }
    }
    Ok(AssembledL { det, lowest })
}

fn permute_det(
    ctx: &PrimeCtx,
    field: &RootField,
    cols: &[Vec<ExtLambda>],
    perm: &mut Vec<usize>,
    k: usize,
    sign: bool,
    det: &mut ExtLambda,
) -> Result<()> {
    let s = perm.len();
    if k == s {
        let mut prod: Option<ExtLambda> = None;
        for j in 0..s {
            let entry = &cols[j][perm[j]];
            prod = Some(match prod {
                None => entry.clone(),
                Some(p) => p.mul(ctx, field, entry)?,
            });
        }
        let prod = prod.unwrap();
        *det = if sign {
            det.add(ctx, &prod)
        } else {
            det.sub(ctx, &prod)
        };
        return Ok(());
    }
    for i in k..s {
        perm.swap(k, i);
        let new_sign = if i == k { sign } else { !sign };
        permute_det(ctx, field, cols, perm, k + 1, new_sign, det)?;
        perm.swap(k, i);
    }
    Ok(())
}
