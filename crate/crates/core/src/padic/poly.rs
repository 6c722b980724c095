use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::val::{rat, Val};

use super::scalar::{PadicScalar, PrimeCtx};

/// Dense polynomial over `K` with [`PadicScalar`] coefficients.
///
/// `coeffs[i]` is the coefficient of `x^i`. The stored length is the declared
/// degree plus one; use [`PPoly::trimmed`] to drop leading coefficients that
/// vanish at the working precision.
#[derive(Debug, Clone)]
pub struct PPoly {
    coeffs: Vec<PadicScalar>,
}

impl PPoly {
    pub fn new(coeffs: Vec<PadicScalar>) -> Self {
        assert!(!coeffs.is_empty(), "a polynomial needs a constant term");
        PPoly { coeffs }
    }

    pub fn from_i64(ctx: &PrimeCtx, coeffs: &[i64]) -> Self {
        PPoly::new(coeffs.iter().map(|&c| ctx.from_i64(c)).collect())
    }

    pub fn constant(c: PadicScalar) -> Self {
        PPoly { coeffs: vec![c] }
    }

    pub fn one(ctx: &PrimeCtx) -> Self {
        PPoly::constant(ctx.one())
    }

    pub fn x(ctx: &PrimeCtx) -> Self {
        PPoly::new(vec![ctx.zero(), ctx.one()])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[PadicScalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Option<&PadicScalar> {
        self.coeffs.get(i)
    }

    /// Drop leading coefficients that are zero at precision.
    pub fn trimmed(&self, ctx: &PrimeCtx) -> PPoly {
        let mut end = self.coeffs.len();
        while end > 1 && ctx.is_zero(&self.coeffs[end - 1]) {
            end -= 1;
        }
        PPoly {
            coeffs: self.coeffs[..end].to_vec(),
        }
    }

    /// Leading coefficient must be 1 to the stated valuation.
    pub fn is_monic(&self, ctx: &PrimeCtx) -> bool {
        ctx.eq_to(
            self.coeffs.last().unwrap(),
            &ctx.one(),
            rat(ctx.max_prec() as i64, 1),
        )
    }

    /// All coefficients lie in `Z_p` (rational and integral) to precision.
    pub fn is_over_zp(&self, ctx: &PrimeCtx) -> bool {
        self.coeffs.iter().all(|c| ctx.is_rational_integral(c))
    }

    pub fn add(&self, ctx: &PrimeCtx, rhs: &PPoly) -> PPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let z = ctx.zero();
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).unwrap_or(&z);
                let b = rhs.coeffs.get(i).unwrap_or(&z);
                ctx.add(a, b)
            })
            .collect();
        PPoly { coeffs }
    }

    pub fn sub(&self, ctx: &PrimeCtx, rhs: &PPoly) -> PPoly {
        self.add(ctx, &rhs.neg(ctx))
    }

    pub fn neg(&self, ctx: &PrimeCtx) -> PPoly {
        PPoly {
            coeffs: self.coeffs.iter().map(|c| ctx.neg(c)).collect(),
        }
    }

    pub fn scale(&self, ctx: &PrimeCtx, s: &PadicScalar) -> PPoly {
        PPoly {
            coeffs: self.coeffs.iter().map(|c| ctx.mul(c, s)).collect(),
        }
    }

    pub fn mul(&self, ctx: &PrimeCtx, rhs: &PPoly) -> PPoly {
        let mut coeffs = vec![ctx.zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if ctx.is_zero(a) {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                let t = ctx.mul(a, b);
                coeffs[i + j] = ctx.add(&coeffs[i + j], &t);
            }
        }
        PPoly { coeffs }
    }

    /// Quotient and remainder by a divisor whose leading coefficient is
    /// exactly invertible (monic or unit-leading).
    pub fn divrem(&self, ctx: &PrimeCtx, den: &PPoly) -> Result<(PPoly, PPoly)> {
        let den = den.trimmed(ctx);
        let d = den.degree();
        let lead_inv = ctx.inv(den.coeffs.last().unwrap()).map_err(|_| {
            Error::precision("division by a polynomial with indeterminate leading coefficient")
        })?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return Ok((PPoly::constant(ctx.zero()), PPoly { coeffs: rem }));
        }
        let n = rem.len() - 1;
        let mut quot = vec![ctx.zero(); n - d + 1];
        for i in (0..=n - d).rev() {
            let c = ctx.mul(&rem[i + d], &lead_inv);
            if ctx.is_zero(&c) {
                quot[i] = c;
                continue;
            }
            for j in 0..=d {
                let t = ctx.mul(&c, &den.coeffs[j]);
                rem[i + j] = ctx.sub(&rem[i + j], &t);
            }
            quot[i] = c;
        }
        rem.truncate(d.max(1));
        Ok((PPoly { coeffs: quot }, PPoly { coeffs: rem }))
    }

    /// Exact division: the remainder must vanish to `tol`; returns the
    /// quotient and the worst remainder valuation observed.
    pub fn div_exact(&self, ctx: &PrimeCtx, den: &PPoly, tol: crate::val::Rat) -> Result<(PPoly, Val)> {
        let (q, r) = self.divrem(ctx, den)?;
        let worst = r
            .coeffs
            .iter()
            .map(|c| ctx.valuation(c))
            .fold(Val::AtLeast(rat(i64::MAX, 1)), Val::smallest);
        if !worst.at_least(tol) {
            return Err(Error::contract(alloc::format!(
                "division is not exact: remainder valuation {worst} below {tol}"
            )));
        }
        Ok((q, worst))
    }

    /// Substitute `inner` for the variable (polynomial composition).
    pub fn compose(&self, ctx: &PrimeCtx, inner: &PPoly) -> PPoly {
        let mut acc = PPoly::constant(self.coeffs.last().unwrap().clone());
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.mul(ctx, inner);
            acc.coeffs[0] = ctx.add(&acc.coeffs[0], c);
        }
        acc
    }

    pub fn eval(&self, ctx: &PrimeCtx, x: &PadicScalar) -> PadicScalar {
        let mut acc = self.coeffs.last().unwrap().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = ctx.mul(&acc, x);
            acc = ctx.add(&acc, c);
        }
        acc
    }

    pub fn derivative(&self, ctx: &PrimeCtx) -> PPoly {
        if self.coeffs.len() == 1 {
            return PPoly::constant(ctx.zero());
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| ctx.mul(&ctx.from_i64((i + 1) as i64), c))
            .collect();
        PPoly { coeffs }
    }

    /// Apply `sigma^e` to every coefficient.
    pub fn twist(&self, ctx: &PrimeCtx, e: i64) -> PPoly {
        PPoly {
            coeffs: self.coeffs.iter().map(|c| ctx.frobenius(c, e)).collect(),
        }
    }

    /// Valuation of coefficient `i` (`AtLeast` at full precision when absent).
    pub fn coeff_val(&self, ctx: &PrimeCtx, i: usize) -> Val {
        match self.coeffs.get(i) {
            Some(c) => ctx.valuation(c),
            None => Val::AtLeast(rat(ctx.pow_cap() as i64, 1)),
        }
    }
}

/// Extended Euclid over `K[x]`: returns `(s, t)` with `s a + t b = 1`.
///
/// Fails when the gcd is provably nonconstant or when a leading coefficient
/// becomes indistinguishable from zero before the algorithm terminates.
pub(crate) fn poly_xgcd(ctx: &PrimeCtx, a: &PPoly, b: &PPoly) -> Result<(PPoly, PPoly)> {
    let mut r0 = a.trimmed(ctx);
    let mut r1 = b.trimmed(ctx);
    let mut s0 = PPoly::one(ctx);
    let mut s1 = PPoly::constant(ctx.zero());
    let mut t0 = PPoly::constant(ctx.zero());
    let mut t1 = PPoly::one(ctx);
    let mut guard = 0usize;
    while r1.degree() > 0 || !ctx.is_zero(&r1.coeffs[0]) {
        if r1.degree() == 0 {
            break;
        }
        let (q, r) = r0.divrem(ctx, &r1)?;
        let r = r.trimmed(ctx);
        let s2 = s0.sub(ctx, &q.mul(ctx, &s1)).trimmed(ctx);
        let t2 = t0.sub(ctx, &q.mul(ctx, &t1)).trimmed(ctx);
        r0 = core::mem::replace(&mut r1, r);
        s0 = core::mem::replace(&mut s1, s2);
        t0 = core::mem::replace(&mut t1, t2);
        guard += 1;
        if guard > a.degree() + b.degree() + 4 {
            return Err(Error::divergence("polynomial gcd did not terminate"));
        }
    }
    let c = &r1.coeffs[0];
    if ctx.is_zero(c) {
        return Err(Error::precision(
            "gcd constant is indistinguishable from zero: inputs not provably coprime",
        ));
    }
    let cinv = ctx.inv(c)?;
    Ok((
        s1.scale(ctx, &cinv),
        t1.scale(ctx, &cinv),
    ))
}
