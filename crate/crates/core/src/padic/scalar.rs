use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::val::{rat, Rat, Val};

/// Extra headroom above the user-facing precision, so that intermediate
/// divisions by `p`-powers do not silently empty the digit budget.
const POW_SLACK: u32 = 32;

/// Arithmetic context for `K = Q_{p^f}` at a fixed precision cap.
///
/// Construction for `f >= 2` Hensel-lifts the minimal polynomial of the
/// Teichmuller generator out of `x^{p^f - 1} - 1`, and precomputes the matrix
/// of `sigma` on the power basis.
pub struct PrimeCtx {
    p: u64,
    f: usize,
    max_prec: u32,
    pow_cap: u32,
    big_p: BigUint,
    /// `pow[k] = p^k` for `k <= pow_cap`.
    pow: Vec<BigUint>,
    /// Monic minimal polynomial of `zeta` over `Z_p`, length `f + 1`,
    /// coefficients mod `p^pow_cap`.
    min_poly: Vec<BigUint>,
    /// `red[j]` = coordinates of `t^{f+j} mod min_poly`, for `j < f - 1`.
    red: Vec<Vec<BigUint>>,
    /// Coordinates of `sigma^j(t^i)` laid out as `sigma_pows[j][i]`, each a
    /// length-`f` coordinate vector mod `p^pow_cap`.
    sigma_pows: Vec<Vec<Vec<BigUint>>>,
}

/// Element of the fraction field of `W(F_{p^f})` at tracked precision.
///
/// The value is `(sum coords[i] * zeta^i) / p^den`, with every coordinate a
/// residue mod `p^mod_exp`; the absolute precision is `mod_exp - den`.
#[derive(Debug, Clone)]
pub struct PadicScalar {
    coords: Vec<BigUint>,
    den: u32,
    mod_exp: u32,
}

impl PadicScalar {
    /// Denominator exponent (the value is integral iff this is 0 after
    /// normalization).
    pub fn den_exp(&self) -> u32 {
        self.den
    }

    /// Modulus exponent of the stored residues.
    pub fn mod_exp(&self) -> u32 {
        self.mod_exp
    }

    /// Absolute precision: the value is determined mod `p^{abs_prec}`.
    pub fn abs_prec(&self) -> i64 {
        self.mod_exp as i64 - self.den as i64
    }

    /// Raw residue coordinates (numerator side).
    pub fn coords(&self) -> &[BigUint] {
        &self.coords
    }
}

impl PrimeCtx {
    /// Build a context for `Q_{p^f}` with user precision `prec`.
    pub fn new(p: u64, f: usize, prec: u32) -> Result<Self> {
        if f == 0 {
            return Err(Error::contract("unramified degree f must be >= 1"));
        }
        if prec == 0 {
            return Err(Error::contract("precision must be >= 1"));
        }
        if !is_prime_u64(p) {
            return Err(Error::contract(alloc::format!("{p} is not prime")));
        }
        let pow_cap = prec + POW_SLACK;
        let big_p = BigUint::from(p);
        let mut pow = Vec::with_capacity(pow_cap as usize + 1);
        let mut acc = BigUint::one();
        for _ in 0..=pow_cap {
            pow.push(acc.clone());
            acc *= &big_p;
        }

        let mut ctx = PrimeCtx {
            p,
            f: 1,
            max_prec: prec,
            pow_cap,
            big_p,
            pow,
            // For f = 1 the basis is just {1}; min_poly = t - 1 is formal.
            min_poly: Vec::new(),
            red: Vec::new(),
            sigma_pows: Vec::new(),
        };
        ctx.min_poly = vec![ctx.modulus().clone() - BigUint::one(), BigUint::one()];
        ctx.sigma_pows = vec![vec![vec![BigUint::one()]]];
        if f == 1 {
            return Ok(ctx);
        }

        // Lift the minimal polynomial of the residue generator inside
        // x^{p^f - 1} - 1, then switch the context over to degree f.
        let min_poly = lift_unramified_min_poly(&ctx, f)?;
        let mut full = PrimeCtx {
            p,
            f,
            max_prec: prec,
            pow_cap,
            big_p: ctx.big_p.clone(),
            pow: ctx.pow,
            min_poly,
            red: Vec::new(),
            sigma_pows: Vec::new(),
        };
        full.red = full.reduction_rows();
        full.sigma_pows = full.sigma_tables()?;
        Ok(full)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn max_prec(&self) -> u32 {
        self.max_prec
    }

    pub fn pow_cap(&self) -> u32 {
        self.pow_cap
    }

    pub fn p_pow(&self, k: u32) -> &BigUint {
        &self.pow[k.min(self.pow_cap) as usize]
    }

    fn modulus(&self) -> &BigUint {
        &self.pow[self.pow_cap as usize]
    }

    /// Coordinates of `t^{f+j} mod min_poly` for j = 0..f-1.
    fn reduction_rows(&self) -> Vec<Vec<BigUint>> {
        let f = self.f;
        let m = self.modulus().clone();
        // t^f = -(m_0 + m_1 t + ... + m_{f-1} t^{f-1})
        let mut row0: Vec<BigUint> = (0..f)
            .map(|i| (&m - (&self.min_poly[i] % &m)) % &m)
            .collect();
        let mut rows = Vec::with_capacity(f.saturating_sub(1));
        rows.push(row0.clone());
        for _ in 1..f - 1 {
            // multiply by t and reduce once more
            let carry = row0[f - 1].clone();
            for i in (1..f).rev() {
                row0[i] = row0[i - 1].clone();
            }
            row0[0] = BigUint::zero();
            for i in 0..f {
                row0[i] = (&row0[i] + &carry * &rows[0][i]) % &m;
            }
            rows.push(row0.clone());
        }
        rows
    }

    /// Multiply two coordinate vectors as polynomials in `t` mod `min_poly`,
    /// working mod `p^w`.
    fn coord_mul(&self, a: &[BigUint], b: &[BigUint], w: u32) -> Vec<BigUint> {
        let f = self.f;
        let m = self.p_pow(w);
        if f == 1 {
            return vec![(&a[0] * &b[0]) % m];
        }
        let mut prod = vec![BigUint::zero(); 2 * f - 1];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                prod[i + j] += ai * bj;
            }
        }
        for idx in (f..2 * f - 1).rev() {
            if prod[idx].is_zero() {
                continue;
            }
            let c = core::mem::take(&mut prod[idx]);
            let row = &self.red[idx - f];
            for i in 0..f {
                prod[i] += &c * &row[i];
            }
        }
        prod.truncate(f);
        for c in &mut prod {
            *c %= m;
        }
        prod
    }

    /// Tables of `sigma^j` on the power basis.
    fn sigma_tables(&self) -> Result<Vec<Vec<Vec<BigUint>>>> {
        let f = self.f;
        // sigma(t) = t^p mod min_poly, computed by square-and-multiply.
        let w = self.pow_cap;
        let mut t = vec![BigUint::zero(); f];
        t[1] = BigUint::one();
        let mut acc = vec![BigUint::zero(); f];
        acc[0] = BigUint::one();
        let mut base = t.clone();
        let mut e = self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.coord_mul(&acc, &base, w);
            }
            e >>= 1;
            if e > 0 {
                base = self.coord_mul(&base, &base, w);
            }
        }
        let sigma_t = acc;

        // sigma^j(t^i) for all j, i.
        let mut tables: Vec<Vec<Vec<BigUint>>> = Vec::with_capacity(f);
        let mut id = Vec::with_capacity(f);
        for i in 0..f {
            let mut v = vec![BigUint::zero(); f];
            v[i] = BigUint::one();
            id.push(v);
        }
        tables.push(id);
        for j in 1..f {
            let prev = &tables[j - 1];
            // sigma^j(t) = sigma^{j-1}(sigma t): evaluate sigma_t's
            // coordinates through the previous table.
            let mut img_t = vec![BigUint::zero(); f];
            for (i, c) in sigma_t.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for k in 0..f {
                    img_t[k] = (&img_t[k] + c * &prev[i][k]) % self.modulus();
                }
            }
            let mut tab = Vec::with_capacity(f);
            let mut cur = vec![BigUint::zero(); f];
            cur[0] = BigUint::one();
            tab.push(cur.clone());
            for _ in 1..f {
                cur = self.coord_mul(&cur, &img_t, w);
                tab.push(cur.clone());
            }
            tables.push(tab);
        }

        // sigma^f must be the identity.
        let prev = &tables[f - 1];
        let mut img_t = vec![BigUint::zero(); f];
        for (i, c) in sigma_t.iter().enumerate() {
            for k in 0..f {
                img_t[k] = (&img_t[k] + c * &prev[i][k]) % self.modulus();
            }
        }
        let mut expect = vec![BigUint::zero(); f];
        expect[1] = BigUint::one();
        if img_t != expect {
            return Err(Error::precision(
                "sigma^f != id on the lifted basis; increase precision",
            ));
        }
        Ok(tables)
    }

    // ---- constructors ---------------------------------------------------

    /// Exact zero at the precision cap.
    pub fn zero(&self) -> PadicScalar {
        PadicScalar {
            coords: vec![BigUint::zero(); self.f],
            den: 0,
            mod_exp: self.pow_cap,
        }
    }

    pub fn one(&self) -> PadicScalar {
        self.from_i64(1)
    }

    /// Embed a (signed) integer at full precision.
    pub fn from_i64(&self, v: i64) -> PadicScalar {
        let m = self.modulus();
        let res = if v >= 0 {
            BigUint::from(v as u64) % m
        } else {
            (m - (BigUint::from(v.unsigned_abs()) % m)) % m
        };
        let mut coords = vec![BigUint::zero(); self.f];
        coords[0] = res;
        PadicScalar {
            coords,
            den: 0,
            mod_exp: self.pow_cap,
        }
    }

    /// Embed an exact rational `num / den_int` (denominator prime to `p`).
    pub fn from_ratio(&self, num: i64, den_int: i64) -> Result<PadicScalar> {
        let d = self.from_i64(den_int);
        self.div(&self.from_i64(num), &d)
    }

    /// Value from raw coordinates, interpreted mod `p^mod_exp`.
    pub fn from_coords(&self, coords: Vec<BigUint>, den: u32, mod_exp: u32) -> Result<PadicScalar> {
        if coords.len() != self.f {
            return Err(Error::contract("coordinate vector has wrong length"));
        }
        if mod_exp > self.pow_cap || mod_exp as i64 - (den as i64) < 1 {
            return Err(Error::contract("modulus exponent out of range"));
        }
        let m = self.p_pow(mod_exp);
        let coords = coords.into_iter().map(|c| c % m).collect();
        Ok(self.normalized(PadicScalar {
            coords,
            den,
            mod_exp,
        }))
    }

    /// The fixed Teichmuller generator `zeta` (for `f = 1` this is 1).
    pub fn zeta(&self) -> PadicScalar {
        if self.f == 1 {
            return self.one();
        }
        let mut coords = vec![BigUint::zero(); self.f];
        coords[1] = BigUint::one();
        PadicScalar {
            coords,
            den: 0,
            mod_exp: self.pow_cap,
        }
    }

    // ---- queries ---------------------------------------------------------

    /// p-adic valuation of a residue mod `p^w`; `None` when the residue is 0.
    fn residue_val(&self, c: &BigUint, w: u32) -> Option<u32> {
        if c.is_zero() {
            return None;
        }
        let mut v = 0u32;
        let mut cur = c.clone();
        while v < w {
            let (q, r) = num_integer::Integer::div_rem(&cur, &self.big_p);
            if !r.is_zero() {
                break;
            }
            cur = q;
            v += 1;
        }
        if v >= w {
            None
        } else {
            Some(v)
        }
    }

    /// Valuation of the numerator vector (min over coordinates); `None` if
    /// all coordinates vanish mod `p^w`.
    fn num_val(&self, x: &PadicScalar) -> Option<u32> {
        let mut best: Option<u32> = None;
        for c in &x.coords {
            if let Some(v) = self.residue_val(c, x.mod_exp) {
                best = Some(best.map_or(v, |b| b.min(v)));
                if best == Some(0) {
                    break;
                }
            }
        }
        best
    }

    /// Valuation of `x`: exact if a nonzero digit is visible, otherwise a
    /// lower bound at the absolute precision.
    pub fn valuation(&self, x: &PadicScalar) -> Val {
        match self.num_val(x) {
            Some(v) => Val::Exact(rat(v as i64 - x.den as i64, 1)),
            None => Val::AtLeast(rat(x.abs_prec(), 1)),
        }
    }

    /// True when every digit of `x` vanishes (zero at precision).
    pub fn is_zero(&self, x: &PadicScalar) -> bool {
        self.num_val(x).is_none()
    }

    /// Valuation of `a - b`.
    pub fn dist(&self, a: &PadicScalar, b: &PadicScalar) -> Val {
        self.valuation(&self.sub(a, b))
    }

    /// True when `a` and `b` agree to valuation `t`.
    pub fn eq_to(&self, a: &PadicScalar, b: &PadicScalar, t: Rat) -> bool {
        self.dist(a, b).at_least(t)
    }

    // ---- normalization helpers -------------------------------------------

    /// Strip common powers of `p` between the numerator and denominator, and
    /// clamp the modulus to the cap.
    fn normalized(&self, mut x: PadicScalar) -> PadicScalar {
        if x.den > 0 {
            let strip = match self.num_val(&x) {
                Some(v) => v.min(x.den),
                None => x.den, // zero numerator: fold the denominator away
            };
            if strip > 0 {
                let d = self.p_pow(strip).clone();
                for c in &mut x.coords {
                    *c /= &d;
                }
                x.den -= strip;
                x.mod_exp -= strip;
            }
        }
        if x.mod_exp > self.pow_cap {
            let m = self.p_pow(self.pow_cap);
            for c in &mut x.coords {
                *c %= m;
            }
            x.mod_exp = self.pow_cap;
        }
        x
    }

    fn clamp_mod(&self, e: i64) -> u32 {
        e.clamp(1, self.pow_cap as i64) as u32
    }

    // ---- ring operations ---------------------------------------------------

    pub fn add(&self, a: &PadicScalar, b: &PadicScalar) -> PadicScalar {
        let den = a.den.max(b.den);
        let prec = a.abs_prec().min(b.abs_prec());
        let mod_exp = self.clamp_mod(prec + den as i64);
        let m = self.p_pow(mod_exp);
        let sa = self.p_pow(den - a.den);
        let sb = self.p_pow(den - b.den);
        let coords = (0..self.f)
            .map(|i| ((&a.coords[i] * sa) + (&b.coords[i] * sb)) % m)
            .collect();
        self.normalized(PadicScalar {
            coords,
            den,
            mod_exp,
        })
    }

    pub fn neg(&self, a: &PadicScalar) -> PadicScalar {
        let m = self.p_pow(a.mod_exp);
        let coords = a.coords.iter().map(|c| (m - (c % m)) % m).collect();
        PadicScalar {
            coords,
            den: a.den,
            mod_exp: a.mod_exp,
        }
    }

    pub fn sub(&self, a: &PadicScalar, b: &PadicScalar) -> PadicScalar {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &PadicScalar, b: &PadicScalar) -> PadicScalar {
        let va = self.num_val(a).unwrap_or(a.mod_exp) as i64 - a.den as i64;
        let vb = self.num_val(b).unwrap_or(b.mod_exp) as i64 - b.den as i64;
        let prec = (a.abs_prec() + vb).min(b.abs_prec() + va);
        let den = a.den + b.den;
        let mod_exp = self.clamp_mod(prec + den as i64);
        let coords = self.coord_mul(&a.coords, &b.coords, mod_exp);
        self.normalized(PadicScalar {
            coords,
            den,
            mod_exp,
        })
    }

    /// Multiply by `p^k` (k may be negative: a division losing `-k` digits).
    pub fn mul_p_pow(&self, a: &PadicScalar, k: i64) -> PadicScalar {
        if k >= 0 {
            let k = k as u32;
            let strip = k.min(a.den);
            let mut x = a.clone();
            x.den -= strip;
            let rest = k - strip;
            if rest > 0 {
                let s = self.p_pow(rest).clone();
                let mod_exp = self.clamp_mod(a.mod_exp as i64 + rest as i64);
                let m = self.p_pow(mod_exp);
                for c in &mut x.coords {
                    *c = (&*c * &s) % m;
                }
                x.mod_exp = mod_exp;
            }
            x
        } else {
            let mut x = a.clone();
            x.den += (-k) as u32;
            self.normalized(x)
        }
    }

    /// Invert `x`; requires the valuation to be exactly determined.
    pub fn inv(&self, x: &PadicScalar) -> Result<PadicScalar> {
        let v = self
            .num_val(x)
            .ok_or_else(|| Error::precision("cannot invert a value indistinguishable from zero"))?;
        // unit part u = numerator / p^v
        let sh = self.p_pow(v).clone();
        let unit: Vec<BigUint> = x.coords.iter().map(|c| c / &sh).collect();
        let w = x.mod_exp - v;
        if w == 0 {
            return Err(Error::precision("no digits left to invert"));
        }
        let inv_unit = self.invert_unit(&unit, w)?;
        // 1/x = p^{den - v} * u^{-1}
        let shift = x.den as i64 - v as i64;
        let base = PadicScalar {
            coords: inv_unit,
            den: 0,
            mod_exp: w,
        };
        Ok(self.mul_p_pow(&base, shift))
    }

    pub fn div(&self, a: &PadicScalar, b: &PadicScalar) -> Result<PadicScalar> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Newton inversion of a unit coordinate vector mod `p^w`.
    fn invert_unit(&self, u: &[BigUint], w: u32) -> Result<Vec<BigUint>> {
        // mod-p inverse by extended Euclid in F_p[t] / min_poly
        let x0 = self.invert_unit_mod_p(u)?;
        let mut x = x0;
        let mut cur: u32 = 1;
        while cur < w {
            cur = (cur * 2).min(w);
            // x <- x (2 - u x) mod p^cur
            let ux = self.coord_mul(u, &x, cur);
            let m = self.p_pow(cur);
            let two = BigUint::from(2u8);
            let mut corr = vec![BigUint::zero(); self.f];
            corr[0] = two % m;
            for i in 0..self.f {
                corr[i] = (&corr[i] + (m - &ux[i])) % m;
            }
            x = self.coord_mul(&x, &corr, cur);
        }
        Ok(x)
    }

    fn invert_unit_mod_p(&self, u: &[BigUint]) -> Result<Vec<BigUint>> {
        let p = self.p;
        let red = |c: &BigUint| -> u64 { (c % &self.big_p).try_into().unwrap_or(0) };
        if self.f == 1 {
            let a = red(&u[0]);
            if a == 0 {
                return Err(Error::precision("unit inversion on a non-unit"));
            }
            return Ok(vec![BigUint::from(pow_mod_u64(a, p - 2, p))]);
        }
        // extended Euclid of u(t) against min_poly(t) over F_p
        let mp: Vec<u64> = self.min_poly.iter().map(red).collect();
        let ut: Vec<u64> = u.iter().map(red).collect();
        let inv = fp_poly_inverse(&ut, &mp, p)
            .ok_or_else(|| Error::precision("unit inversion on a non-unit"))?;
        Ok(inv
            .into_iter()
            .chain(core::iter::repeat(0))
            .take(self.f)
            .map(BigUint::from)
            .collect())
    }

    // ---- Galois action -----------------------------------------------------

    /// Apply `sigma^e` (any integer exponent; `sigma^f = 1`).
    pub fn frobenius(&self, x: &PadicScalar, e: i64) -> PadicScalar {
        let f = self.f as i64;
        let j = e.rem_euclid(f) as usize;
        if j == 0 || self.f == 1 {
            return x.clone();
        }
        let tab = &self.sigma_pows[j];
        let m = self.p_pow(x.mod_exp);
        let mut coords = vec![BigUint::zero(); self.f];
        for (i, c) in x.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for k in 0..self.f {
                coords[k] = (&coords[k] + c * &tab[i][k]) % m;
            }
        }
        PadicScalar {
            coords,
            den: x.den,
            mod_exp: x.mod_exp,
        }
    }

    /// Teichmuller lift of a nonzero residue-field element, given by its
    /// coordinates over `F_p` on the basis `1, zeta-bar, ...`.
    pub fn teichmuller(&self, residue: &[u64]) -> Result<PadicScalar> {
        if residue.len() != self.f || residue.iter().all(|&c| c % self.p == 0) {
            return Err(Error::contract(
                "teichmuller lift requires a nonzero residue",
            ));
        }
        let mut x = PadicScalar {
            coords: residue
                .iter()
                .map(|&c| BigUint::from(c % self.p))
                .collect(),
            den: 0,
            mod_exp: self.pow_cap,
        };
        // iterate x -> x^{p^f}; gains at least one digit per step
        let q_exp = self.f as u32;
        for _ in 0..=self.pow_cap {
            let mut y = x.clone();
            for _ in 0..q_exp {
                y = self.pow_u64(&y, self.p);
            }
            if self.is_zero(&self.sub(&y, &x)) {
                return Ok(y);
            }
            x = y;
        }
        Err(Error::divergence("teichmuller iteration did not stabilize"))
    }

    pub fn pow_u64(&self, x: &PadicScalar, mut e: u64) -> PadicScalar {
        let mut acc = self.one();
        let mut base = x.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// True if `x` lies in `Z_p` (coordinates above the first vanish) to
    /// precision, with no denominator.
    pub fn is_rational_integral(&self, x: &PadicScalar) -> bool {
        let x = self.normalized(x.clone());
        if x.den != 0 {
            return false;
        }
        x.coords[1..].iter().all(|c| {
            let r = c % self.p_pow(x.mod_exp);
            r.is_zero()
        })
    }

    /// Little-endian base-p digits of each coordinate, for serialization.
    pub fn coord_digits(&self, x: &PadicScalar) -> Vec<Vec<u64>> {
        x.coords
            .iter()
            .map(|c| {
                let mut digits = Vec::new();
                let mut cur = c.clone();
                for _ in 0..x.mod_exp {
                    let (q, r) = num_integer::Integer::div_rem(&cur, &self.big_p);
                    digits.push(r.try_into().unwrap_or(0));
                    cur = q;
                }
                digits
            })
            .collect()
    }
}

/// Trial-division primality; inputs here are desk-scale.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn pow_mod_u64(b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc: u128 = 1;
    let mm = m as u128;
    let mut bb = (b % m) as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % mm;
        }
        e >>= 1;
        bb = bb * bb % mm;
    }
    acc as u64
}

fn fp_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

/// Quotient and remainder over `F_p[t]`; the divisor's leading coefficient
/// must be nonzero.
fn fp_poly_divmod(num: &[u64], den: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let mut rem: Vec<u64> = num.iter().map(|&c| c % p).collect();
    fp_trim(&mut rem);
    let d = den.len() - 1;
    let lead_inv = pow_mod_u64(den[d], p - 2, p);
    if rem.len() <= d {
        return (Vec::new(), rem);
    }
    let n = rem.len() - 1;
    let mut quot = vec![0u64; n - d + 1];
    for i in (0..=n - d).rev() {
        let c = rem[i + d] % p * lead_inv % p;
        quot[i] = c;
        if c == 0 {
            continue;
        }
        for j in 0..=d {
            rem[i + j] = (rem[i + j] + p - c * den[j] % p) % p;
        }
    }
    fp_trim(&mut rem);
    (quot, rem)
}

fn fp_poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    fp_trim(&mut prod);
    prod
}

fn fp_poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0) % p;
        let y = b.get(i).copied().unwrap_or(0) % p;
        *o = (x + p - y) % p;
    }
    fp_trim(&mut out);
    out
}

/// Inverse of `u(t)` modulo the monic irreducible `m(t)` over `F_p`, by the
/// extended Euclidean algorithm. Returns `None` when `u` is not invertible.
fn fp_poly_inverse(u: &[u64], m: &[u64], p: u64) -> Option<Vec<u64>> {
    let mut r0: Vec<u64> = m.iter().map(|&c| c % p).collect();
    let mut r1: Vec<u64> = u.iter().map(|&c| c % p).collect();
    fp_trim(&mut r0);
    fp_trim(&mut r1);
    if r1.is_empty() {
        return None;
    }
    let mut t0: Vec<u64> = Vec::new();
    let mut t1: Vec<u64> = vec![1];
    while r1.len() > 1 {
        let (q, r) = fp_poly_divmod(&r0, &r1, p);
        let t2 = fp_poly_sub(&t0, &fp_poly_mul(&q, &t1, p), p);
        r0 = core::mem::replace(&mut r1, r);
        t0 = core::mem::replace(&mut t1, t2);
        if r1.is_empty() {
            return None; // gcd has positive degree
        }
    }
    let c = pow_mod_u64(r1[0], p - 2, p);
    let mut out: Vec<u64> = t1.iter().map(|&x| x * c % p).collect();
    fp_trim(&mut out);
    if out.is_empty() {
        out.push(0);
    }
    Some(out)
}

/// Hensel-lift the minimal polynomial of a degree-`f` residue generator as a
/// divisor of `x^{p^f-1} - 1` over `Z_p`, to the context's precision cap.
fn lift_unramified_min_poly(ctx1: &PrimeCtx, f: usize) -> Result<Vec<BigUint>> {
    use super::hensel::hensel_lift_coprime;
    use super::poly::PPoly;

    let p = ctx1.p();
    // find a monic irreducible polynomial of degree f over F_p whose roots
    // are nonzero (automatic: irreducible of degree >= 2, or x - a, a != 0)
    let mbar = find_irreducible_fp(p, f)
        .ok_or_else(|| Error::unsupported("no irreducible polynomial found"))?;

    let q_order = pow_checked(p, f)? - 1;
    if q_order > 1 << 20 {
        return Err(Error::unsupported(
            "p^f - 1 too large for the unramified bootstrap",
        ));
    }
    // x^{p^f - 1} - 1 over Z_p
    let mut coeffs = vec![ctx1.zero(); q_order as usize + 1];
    coeffs[0] = ctx1.from_i64(-1);
    coeffs[q_order as usize] = ctx1.one();
    let big = PPoly::new(coeffs);

    // cofactor mod p
    let cof = fp_poly_div_exact(&cyclic_minus_one(q_order, p), &mbar, p)
        .ok_or_else(|| Error::contract("chosen polynomial does not divide x^{p^f-1}-1 mod p"))?;

    let g0 = PPoly::new(mbar.iter().map(|&c| ctx1.from_i64(c as i64)).collect());
    let h0 = PPoly::new(cof.iter().map(|&c| ctx1.from_i64(c as i64)).collect());
    let (g, _h) = hensel_lift_coprime(ctx1, &big, &g0, &h0, ctx1.pow_cap())?;

    let m = ctx1.p_pow(ctx1.pow_cap());
    Ok(g.coeffs()
        .iter()
        .map(|c| {
            debug_assert_eq!(c.den_exp(), 0);
            c.coords()[0].clone() % m
        })
        .collect())
}

fn pow_checked(p: u64, f: usize) -> Result<u64> {
    let mut acc: u64 = 1;
    for _ in 0..f {
        acc = acc
            .checked_mul(p)
            .ok_or_else(|| Error::unsupported("p^f overflows"))?;
    }
    Ok(acc)
}

fn cyclic_minus_one(order: u64, p: u64) -> Vec<u64> {
    let mut v = vec![0u64; order as usize + 1];
    v[0] = p - 1;
    v[order as usize] = 1;
    v
}

/// Schoolbook exact division over F_p; `None` if the division is not exact.
fn fp_poly_div_exact(num: &[u64], den: &[u64], p: u64) -> Option<Vec<u64>> {
    if den.last().map_or(true, |&c| c % p == 0) {
        return None;
    }
    let (q, r) = fp_poly_divmod(num, den, p);
    if r.is_empty() {
        Some(q)
    } else {
        None
    }
}

/// Smallest (in lexicographic coefficient order) monic irreducible of degree
/// `f` over `F_p`. Degrees here are tiny.
fn find_irreducible_fp(p: u64, f: usize) -> Option<Vec<u64>> {
    if f == 1 {
        return Some(vec![p - 1, 1]); // x - 1
    }
    let mut coeffs = vec![0u64; f + 1];
    coeffs[f] = 1;
    loop {
        if fp_is_irreducible(&coeffs, p) {
            return Some(coeffs);
        }
        // increment the low coefficients
        let mut i = 0;
        loop {
            if i == f {
                return None;
            }
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}

/// Irreducibility over F_p by checking gcd(x^{p^k} - x, m) for k <= f/2.
fn fp_is_irreducible(m: &[u64], p: u64) -> bool {
    let f = m.len() - 1;
    if f == 1 {
        return true;
    }
    // x^{p^k} mod m by repeated powering
    let mulmod = |a: &[u64], b: &[u64]| -> Vec<u64> {
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ai * bj) % p;
            }
        }
        // reduce mod m (monic)
        for idx in (f..prod.len()).rev() {
            let c = prod[idx];
            if c == 0 {
                continue;
            }
            prod[idx] = 0;
            for j in 0..f {
                prod[idx - f + j] = (prod[idx - f + j] + p - c * m[j] % p) % p;
            }
        }
        prod.truncate(f);
        prod
    };
    let powp = |a: &[u64]| -> Vec<u64> {
        let mut acc = vec![0u64; f];
        acc[0] = 1;
        let mut base = a.to_vec();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = mulmod(&base, &base);
            }
        }
        acc
    };

    let mut x = vec![0u64; f];
    if f > 1 {
        x[1] = 1;
    }
    let x_orig = x.clone();
    // m is irreducible iff x^{p^f} = x mod m and x^{p^{f/q}} != x for prime q | f
    let mut frob = x.clone();
    let mut images = Vec::with_capacity(f);
    for _ in 0..f {
        frob = powp(&frob);
        images.push(frob.clone());
    }
    if images[f - 1] != x_orig {
        return false;
    }
    for q in 2..=f {
        if f % q == 0 && is_prime_u64(q as u64) {
            let k = f / q;
            if images[k - 1] == x_orig {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::val::rat;

    #[test]
    fn integer_arithmetic_mod_p_powers() {
        let ctx = PrimeCtx::new(5, 1, 20).unwrap();
        let a = ctx.from_i64(7);
        let b = ctx.from_i64(-3);
        let s = ctx.add(&a, &b);
        assert!(ctx.eq_to(&s, &ctx.from_i64(4), rat(20, 1)));
        let m = ctx.mul(&a, &b);
        assert!(ctx.eq_to(&m, &ctx.from_i64(-21), rat(20, 1)));
    }

    #[test]
    fn valuation_of_uniformizer_and_zero() {
        let ctx = PrimeCtx::new(5, 1, 20).unwrap();
        assert_eq!(ctx.valuation(&ctx.from_i64(5)), Val::Exact(rat(1, 1)));
        assert_eq!(ctx.valuation(&ctx.from_i64(50)), Val::Exact(rat(2, 1)));
        match ctx.valuation(&ctx.zero()) {
            Val::AtLeast(b) => assert!(b >= rat(20, 1)),
            _ => panic!("zero must be a bound"),
        }
    }

    #[test]
    fn division_tracks_denominators() {
        let ctx = PrimeCtx::new(5, 1, 20).unwrap();
        let x = ctx.from_ratio(5, 6).unwrap();
        assert_eq!(ctx.valuation(&x), Val::Exact(rat(1, 1)));
        let six = ctx.from_i64(6);
        let back = ctx.mul(&x, &six);
        assert!(ctx.eq_to(&back, &ctx.from_i64(5), rat(19, 1)));
        let inv_p = ctx.inv(&ctx.from_i64(5)).unwrap();
        assert_eq!(ctx.valuation(&inv_p), Val::Exact(rat(-1, 1)));
        assert_eq!(inv_p.abs_prec(), ctx.pow_cap() as i64 - 2);
    }

    #[test]
    fn teichmuller_in_z5() {
        let ctx = PrimeCtx::new(5, 1, 24).unwrap();
        assert!(ctx.eq_to(
            &ctx.teichmuller(&[1]).unwrap(),
            &ctx.one(),
            rat(24, 1)
        ));
        // the torsion unit congruent to 4 mod 5 is -1
        let t4 = ctx.teichmuller(&[4]).unwrap();
        assert!(ctx.eq_to(&t4, &ctx.from_i64(-1), rat(24, 1)));
        // omega(2)^4 = 1
        let t2 = ctx.teichmuller(&[2]).unwrap();
        let mut pow = ctx.one();
        for _ in 0..4 {
            pow = ctx.mul(&pow, &t2);
        }
        assert!(ctx.eq_to(&pow, &ctx.one(), rat(24, 1)));
    }

    #[test]
    fn unramified_quadratic_frobenius() {
        let ctx = PrimeCtx::new(5, 2, 16).unwrap();
        let z = ctx.zeta();
        // zeta is a (p^2 - 1)-st root of unity
        let mut pow = ctx.one();
        for _ in 0..24 {
            pow = ctx.mul(&pow, &z);
        }
        assert!(ctx.eq_to(&pow, &ctx.one(), rat(16, 1)));
        // frobenius(zeta) = zeta^p, frobenius^2 = id
        let fz = ctx.frobenius(&z, 1);
        assert!(ctx.eq_to(&fz, &ctx.pow_u64(&z, 5), rat(16, 1)));
        assert!(ctx.eq_to(&ctx.frobenius(&fz, 1), &z, rat(16, 1)));
        // sigma fixes Z_p
        let c = ctx.from_i64(17);
        assert!(ctx.eq_to(&ctx.frobenius(&c, 1), &c, rat(16, 1)));
    }

    #[test]
    fn frobenius_is_ring_hom() {
        let ctx = PrimeCtx::new(5, 2, 16).unwrap();
        let a = ctx.add(&ctx.zeta(), &ctx.from_i64(3));
        let b = ctx.sub(&ctx.mul(&ctx.zeta(), &ctx.zeta()), &ctx.from_i64(7));
        let lhs = ctx.frobenius(&ctx.mul(&a, &b), 1);
        let rhs = ctx.mul(&ctx.frobenius(&a, 1), &ctx.frobenius(&b, 1));
        assert!(ctx.eq_to(&lhs, &rhs, rat(16, 1)));
    }
}
