//! Matrices over [`PadicScalar`] and the lattice arithmetic used by the
//! Dieudonne layer: Berkowitz characteristic polynomials (division-free),
//! Smith normal form over `Z_p` with valuation pivoting, and membership
//! tests for `Z_p`-lattices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::padic::{PPoly, PadicScalar, PrimeCtx};
use crate::val::{rat, Rat, Val};

/// Dense row-major matrix over `K`.
#[derive(Debug, Clone)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<PadicScalar>,
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<PadicScalar>) -> Self {
        assert_eq!(rows * cols, data.len());
        Mat { rows, cols, data }
    }

    pub fn zeros(ctx: &PrimeCtx, rows: usize, cols: usize) -> Self {
        Mat::new(rows, cols, vec![ctx.zero(); rows * cols])
    }

    pub fn identity(ctx: &PrimeCtx, n: usize) -> Self {
        let mut m = Mat::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, ctx.one());
        }
        m
    }

    pub fn from_i64(ctx: &PrimeCtx, rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Mat::new(
            rows,
            cols,
            entries.iter().map(|&v| ctx.from_i64(v)).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &PadicScalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: PadicScalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<PadicScalar> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn mul(&self, ctx: &PrimeCtx, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Mat::zeros(ctx, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if ctx.is_zero(a) {
                    continue;
                }
                for j in 0..rhs.cols {
                    let t = ctx.mul(a, rhs.at(k, j));
                    let cur = ctx.add(out.at(i, j), &t);
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, ctx: &PrimeCtx, v: &[PadicScalar]) -> Vec<PadicScalar> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = ctx.zero();
                for j in 0..self.cols {
                    acc = ctx.add(&acc, &ctx.mul(self.at(i, j), &v[j]));
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, ctx: &PrimeCtx, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat::new(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| ctx.add(a, b))
                .collect(),
        )
    }

    pub fn sub(&self, ctx: &PrimeCtx, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat::new(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| ctx.sub(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, ctx: &PrimeCtx, s: &PadicScalar) -> Mat {
        Mat::new(
            self.rows,
            self.cols,
            self.data.iter().map(|a| ctx.mul(a, s)).collect(),
        )
    }

    /// Horizontal concatenation.
    pub fn hcat(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.rows, rhs.rows);
        let mut data = Vec::with_capacity(self.data.len() + rhs.data.len());
        for i in 0..self.rows {
            data.extend_from_slice(&self.data[i * self.cols..(i + 1) * self.cols]);
            data.extend_from_slice(&rhs.data[i * rhs.cols..(i + 1) * rhs.cols]);
        }
        Mat::new(self.rows, self.cols + rhs.cols, data)
    }

    /// Worst valuation across all entries.
    pub fn min_val(&self, ctx: &PrimeCtx) -> Val {
        self.data
            .iter()
            .map(|c| ctx.valuation(c))
            .fold(Val::AtLeast(rat(i64::MAX, 1)), Val::smallest)
    }
}

/// Characteristic polynomial `det(x I - A)` by the Berkowitz algorithm
/// (division-free, so exact at the working precision).
pub fn charpoly(ctx: &PrimeCtx, a: &Mat) -> PPoly {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    // coefficients stored leading-first: [1] is the char poly of the
    // empty matrix
    let mut poly: Vec<PadicScalar> = vec![ctx.one()];
    for k in 1..=n {
        // principal (k-1)x(k-1) block M, row R, column C, corner a_kk
        let m = k - 1;
        let corner = a.at(m, m).clone();
        let row: Vec<PadicScalar> = (0..m).map(|j| a.at(m, j).clone()).collect();
        let col: Vec<PadicScalar> = (0..m).map(|i| a.at(i, m).clone()).collect();
        // first column of the Toeplitz factor:
        // [1, -a_kk, -R C, -R M C, ..., -R M^{k-2} C]
        let mut t = Vec::with_capacity(k + 1);
        t.push(ctx.one());
        t.push(ctx.neg(&corner));
        let mut w = col.clone();
        while t.len() < k + 1 {
            let mut dot = ctx.zero();
            for (r, x) in row.iter().zip(&w) {
                dot = ctx.add(&dot, &ctx.mul(r, x));
            }
            t.push(ctx.neg(&dot));
            if t.len() == k + 1 {
                break;
            }
            // w <- M w
            let mut nw = vec![ctx.zero(); m];
            for i in 0..m {
                for j in 0..m {
                    nw[i] = ctx.add(&nw[i], &ctx.mul(a.at(i, j), &w[j]));
                }
            }
            w = nw;
        }
        // poly <- Toeplitz(t) * poly
        let mut next = vec![ctx.zero(); k + 1];
        for (i, ti) in t.iter().enumerate() {
            for (j, pj) in poly.iter().enumerate() {
                if i + j <= k {
                    next[i + j] = ctx.add(&next[i + j], &ctx.mul(ti, pj));
                }
            }
        }
        poly = next;
    }
    // poly is leading-first; PPoly stores constant-first
    poly.reverse();
    PPoly::new(poly)
}

/// Evaluate a polynomial at a matrix argument (Horner).
pub fn poly_at_mat(ctx: &PrimeCtx, p: &PPoly, a: &Mat) -> Mat {
    let n = a.rows();
    let mut acc = Mat::zeros(ctx, n, n);
    for i in 0..n {
        acc.set(i, i, p.coeffs().last().unwrap().clone());
    }
    for c in p.coeffs().iter().rev().skip(1) {
        acc = acc.mul(ctx, a);
        for i in 0..n {
            let t = ctx.add(acc.at(i, i), c);
            acc.set(i, i, t);
        }
    }
    acc
}

/// Smith normal form data over `Z_p`: `U A V = D` with `U, V` invertible
/// over `Z_p` and `D` diagonal with entries `p^{e_0} | p^{e_1} | ...`.
pub struct Smith {
    pub u: Mat,
    pub v: Mat,
    pub d: Mat,
    /// Valuations of the diagonal: `Exact(e)` or `AtLeast(prec)` when the
    /// remaining block was indistinguishable from zero.
    pub divisors: Vec<Val>,
    /// Number of exactly-certified (nonzero) divisors.
    pub rank: usize,
}

/// Smith normal form with minimal-valuation pivoting.
///
/// Entries must be integral (`Z_p`-matrix). Pivots need an exact minimal
/// valuation; once every remaining entry is indistinguishable from zero the
/// corresponding divisors are reported as bounds only.
pub fn smith(ctx: &PrimeCtx, a: &Mat) -> Result<Smith> {
    smith_with_cutoff(ctx, a, None)
}

/// Smith form that refuses pivots at or beyond `cutoff`: an entry whose
/// valuation reaches the cutoff is treated as zero. Use this when the
/// matrix entries are themselves approximate and near-precision divisors
/// are numerical debris rather than structure.
pub fn smith_with_cutoff(ctx: &PrimeCtx, a: &Mat, cutoff: Option<Rat>) -> Result<Smith> {
    let rows = a.rows();
    let cols = a.cols();
    let mut w = a.clone();
    let mut u = Mat::identity(ctx, rows);
    let mut v = Mat::identity(ctx, cols);
    let mut divisors = Vec::new();
    let steps = rows.min(cols);

    for t in 0..steps {
        // locate the minimal-valuation exact pivot in the working block
        let mut best: Option<(usize, usize, i64)> = None;
        let mut best_bound = rat(i64::MAX, 1);
        for i in t..rows {
            for j in t..cols {
                match ctx.valuation(w.at(i, j)) {
                    Val::Exact(e) if cutoff.map_or(true, |c| e < c) => {
                        let e = *e.numer();
                        if best.map_or(true, |(_, _, b)| e < b) {
                            best = Some((i, j, e));
                        }
                    }
                    Val::Exact(e) => best_bound = best_bound.min(e),
                    Val::AtLeast(b) => best_bound = best_bound.min(b),
                }
            }
        }
        let Some((pi, pj, e)) = best else {
            for _ in t..steps {
                divisors.push(Val::AtLeast(best_bound));
            }
            return Ok(Smith {
                rank: t,
                u,
                v,
                d: w,
                divisors,
            });
        };
        if e < 0 {
            return Err(Error::contract("smith form requires an integral matrix"));
        }

        if pi != t {
            for j in 0..cols {
                let a1 = w.at(t, j).clone();
                let a2 = w.at(pi, j).clone();
                w.set(t, j, a2);
                w.set(pi, j, a1);
            }
            for j in 0..rows {
                let a1 = u.at(t, j).clone();
                let a2 = u.at(pi, j).clone();
                u.set(t, j, a2);
                u.set(pi, j, a1);
            }
        }
        if pj != t {
            for i in 0..rows {
                let a1 = w.at(i, t).clone();
                let a2 = w.at(i, pj).clone();
                w.set(i, t, a2);
                w.set(i, pj, a1);
            }
            for i in 0..cols {
                let a1 = v.at(i, t).clone();
                let a2 = v.at(i, pj).clone();
                v.set(i, t, a2);
                v.set(i, pj, a1);
            }
        }

        // normalize the pivot row so the pivot becomes exactly p^e
        let unit = ctx.mul_p_pow(w.at(t, t), -e);
        let unit_inv = ctx.inv(&unit)?;
        for j in 0..cols {
            let x = ctx.mul(w.at(t, j), &unit_inv);
            w.set(t, j, x);
        }
        for j in 0..rows {
            let x = ctx.mul(u.at(t, j), &unit_inv);
            u.set(t, j, x);
        }

        for i in t + 1..rows {
            let factor = ctx.mul_p_pow(w.at(i, t), -e);
            if ctx.is_zero(&factor) {
                continue;
            }
            for j in 0..cols {
                let x = ctx.sub(w.at(i, j), &ctx.mul(&factor, w.at(t, j)));
                w.set(i, j, x);
            }
            for j in 0..rows {
                let x = ctx.sub(u.at(i, j), &ctx.mul(&factor, u.at(t, j)));
                u.set(i, j, x);
            }
        }
        for j in t + 1..cols {
            let factor = ctx.mul_p_pow(w.at(t, j), -e);
            if ctx.is_zero(&factor) {
                continue;
            }
            for i in 0..rows {
                let x = ctx.sub(w.at(i, j), &ctx.mul(&factor, w.at(i, t)));
                w.set(i, j, x);
            }
            for i in 0..cols {
                let x = ctx.sub(v.at(i, j), &ctx.mul(&factor, v.at(i, t)));
                v.set(i, j, x);
            }
        }
        divisors.push(Val::Exact(rat(e, 1)));
    }

    let rank = divisors.len();
    Ok(Smith {
        u,
        v,
        d: w,
        divisors,
        rank,
    })
}

/// Basis of the column span of `a` as a `Z_p`-lattice.
///
/// Uses `A = U^{-1} D V^{-1}`: with `V` invertible over `Z_p` the column
/// lattice of `A` equals that of `U^{-1} D`, whose nonzero columns give the
/// basis.
pub fn column_lattice_basis(ctx: &PrimeCtx, a: &Mat) -> Result<Mat> {
    column_lattice_basis_with_cutoff(ctx, a, None)
}

/// Column-lattice basis with a rank cutoff (see [`smith_with_cutoff`]).
pub fn column_lattice_basis_with_cutoff(
    ctx: &PrimeCtx,
    a: &Mat,
    cutoff: Option<Rat>,
) -> Result<Mat> {
    let s = smith_with_cutoff(ctx, a, cutoff)?;
    let uinv = invert_unimodular(ctx, &s.u)?;
    let mut cols = Vec::new();
    for (j, dv) in s.divisors.iter().enumerate() {
        if let Val::Exact(e) = dv {
            let e = *e.numer();
            let mut col = Vec::with_capacity(a.rows());
            for i in 0..a.rows() {
                col.push(ctx.mul_p_pow(uinv.at(i, j), e));
            }
            cols.push(col);
        }
    }
    let rank = cols.len();
    let mut out = Mat::zeros(ctx, a.rows(), rank);
    for (j, col) in cols.into_iter().enumerate() {
        for (i, x) in col.into_iter().enumerate() {
            out.set(i, j, x);
        }
    }
    Ok(out)
}

/// Invert a matrix that is invertible over `Z_p` (unit determinant).
pub fn invert_unimodular(ctx: &PrimeCtx, a: &Mat) -> Result<Mat> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut w = a.clone();
    let mut inv = Mat::identity(ctx, n);
    for t in 0..n {
        let mut pivot = None;
        for i in t..n {
            if let Val::Exact(e) = ctx.valuation(w.at(i, t)) {
                if e == rat(0, 1) {
                    pivot = Some(i);
                    break;
                }
            }
        }
        let pi = pivot.ok_or_else(|| {
            Error::precision("matrix is not invertible over Z_p at this precision")
        })?;
        if pi != t {
            for j in 0..n {
                let a1 = w.at(t, j).clone();
                let a2 = w.at(pi, j).clone();
                w.set(t, j, a2);
                w.set(pi, j, a1);
                let b1 = inv.at(t, j).clone();
                let b2 = inv.at(pi, j).clone();
                inv.set(t, j, b2);
                inv.set(pi, j, b1);
            }
        }
        let d = ctx.inv(w.at(t, t))?;
        for j in 0..n {
            let x = ctx.mul(w.at(t, j), &d);
            w.set(t, j, x);
            let y = ctx.mul(inv.at(t, j), &d);
            inv.set(t, j, y);
        }
        for i in 0..n {
            if i == t {
                continue;
            }
            let factor = w.at(i, t).clone();
            if ctx.is_zero(&factor) {
                continue;
            }
            for j in 0..n {
                let x = ctx.sub(w.at(i, j), &ctx.mul(&factor, w.at(t, j)));
                w.set(i, j, x);
                let y = ctx.sub(inv.at(i, j), &ctx.mul(&factor, inv.at(t, j)));
                inv.set(i, j, y);
            }
        }
    }
    Ok(inv)
}

/// Solve `basis * x = target` over `Z_p`, if an integral solution exists.
///
/// Returns `Ok(None)` when the target provably misses the lattice.
pub fn solve_in_lattice(
    ctx: &PrimeCtx,
    basis: &Mat,
    target: &[PadicScalar],
    tol: Rat,
) -> Result<Option<Vec<PadicScalar>>> {
    let s = smith(ctx, basis)?;
    let ub = s.u.mul_vec(ctx, target);
    let mut y = vec![ctx.zero(); basis.cols()];
    for (i, x) in ub.iter().enumerate() {
        match s.divisors.get(i) {
            Some(Val::Exact(e)) => {
                let e = *e.numer();
                let quot = ctx.mul_p_pow(x, -e);
                if quot.den_exp() > 0 && !ctx.is_zero(&quot) {
                    return Ok(None); // non-integral coordinate
                }
                y[i] = quot;
            }
            _ => {
                if !ctx.valuation(x).at_least(tol) {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(s.v.mul_vec(ctx, &y)))
}

/// Determinant by elimination with valuation pivoting.
pub fn det(ctx: &PrimeCtx, a: &Mat) -> Result<PadicScalar> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut w = a.clone();
    let mut acc = ctx.one();
    let mut sign = false;
    for t in 0..n {
        let mut best: Option<(usize, Rat)> = None;
        for i in t..n {
            if let Val::Exact(e) = ctx.valuation(w.at(i, t)) {
                if best.map_or(true, |(_, b)| e < b) {
                    best = Some((i, e));
                }
            }
        }
        let Some((pi, _)) = best else {
            // a column is zero at precision: so is the determinant
            return Ok(ctx.mul(&ctx.zero(), &acc));
        };
        if pi != t {
            sign = !sign;
            for j in 0..n {
                let a1 = w.at(t, j).clone();
                let a2 = w.at(pi, j).clone();
                w.set(t, j, a2);
                w.set(pi, j, a1);
            }
        }
        let pivot = w.at(t, t).clone();
        acc = ctx.mul(&acc, &pivot);
        let pinv = ctx.inv(&pivot)?;
        for i in t + 1..n {
            let factor = ctx.mul(w.at(i, t), &pinv);
            if ctx.is_zero(&factor) {
                continue;
            }
            for j in t..n {
                let x = ctx.sub(w.at(i, j), &ctx.mul(&factor, w.at(t, j)));
                w.set(i, j, x);
            }
        }
    }
    Ok(if sign { ctx.neg(&acc) } else { acc })
}
