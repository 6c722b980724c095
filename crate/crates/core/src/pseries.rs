//! Truncated power series of the class `P_K`: series `sum A_n x^n` with
//! `A_0` and `n A_n` integral.
//!
//! Members of this class converge on the open unit disc, and the class bound
//! `val(A_m) >= -floor(log_p m)` yields a certified lower bound on the
//! valuation of any discarded tail; [`tail_certificate`] computes that bound
//! and [`auto_truncation`] inverts it.

use alloc::vec::Vec;

use crate::padic::{PadicScalar, PrimeCtx};
use crate::val::{rat, Rat, Val};

/// Truncated series with coefficients `A_0 ... A_D`.
#[derive(Debug, Clone)]
pub struct PSeriesK {
    coeffs: Vec<PadicScalar>,
}

impl PSeriesK {
    pub fn new(coeffs: Vec<PadicScalar>) -> Self {
        assert!(!coeffs.is_empty());
        PSeriesK { coeffs }
    }

    /// Truncation order `D` (the last stored index).
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[PadicScalar] {
        &self.coeffs
    }

    /// Apply `sigma^e` coefficient-wise.
    pub fn twist(&self, ctx: &PrimeCtx, e: i64) -> PSeriesK {
        PSeriesK {
            coeffs: self.coeffs.iter().map(|c| ctx.frobenius(c, e)).collect(),
        }
    }

    /// Worst case over the class conditions `val(A_0) >= 0` and
    /// `val(n A_n) >= 0`; membership holds iff the result is `>= 0`.
    pub fn membership_defect(&self, ctx: &PrimeCtx) -> Val {
        let mut worst = ctx.valuation(&self.coeffs[0]);
        for (n, a) in self.coeffs.iter().enumerate().skip(1) {
            let na = ctx.mul(&ctx.from_i64(n as i64), a);
            worst = worst.smallest(ctx.valuation(&na));
        }
        worst
    }

    pub fn a0_val(&self, ctx: &PrimeCtx) -> Val {
        ctx.valuation(&self.coeffs[0])
    }
}

/// Floor of `log_p m` for `m >= 1`.
fn floor_log_p(p: u64, m: u64) -> i64 {
    let mut l = 0i64;
    let mut acc = p;
    while acc <= m {
        l += 1;
        match acc.checked_mul(p) {
            Some(v) => acc = v,
            None => break,
        }
    }
    l
}

/// Lower bound on `val(sum_{m > D} A_m x^m)` for a class-`P_K` series
/// evaluated at a point of valuation `v > 0`.
///
/// Per-term bound: `m v - floor(log_p m)`; within one window
/// `[p^L, p^{L+1})` the bound grows with `m`, so the tail minimum is
/// attained either right after the truncation or at a power of `p`.
pub fn tail_certificate_at(p: u64, v: Rat, trunc: usize) -> Rat {
    assert!(v > rat(0, 1));
    let start = trunc as u64 + 1;
    let t = |m: u64| -> Rat { rat(m as i64, 1) * v - rat(floor_log_p(p, m), 1) };
    let mut best = t(start);
    let mut pw: u64 = 1;
    while pw <= start {
        match pw.checked_mul(p) {
            Some(x) => pw = x,
            None => return best,
        }
    }
    loop {
        let cand = t(pw);
        if cand < best {
            best = cand;
        }
        // the window minimum increases by p^L (p-1) v - 1 per step: once
        // that is positive and the candidate is past the best, later
        // windows cannot win
        let gain = rat(pw as i64, 1) * rat(p as i64 - 1, 1) * v - rat(1, 1);
        if gain > rat(0, 1) && cand > best {
            break;
        }
        match pw.checked_mul(p) {
            Some(x) => pw = x,
            None => break,
        }
        if pw > (1u64 << 62) {
            break;
        }
    }
    best
}

/// Tail bound for the canonical generator of a degree-`ext_deg` level
/// (valuation `1/ext_deg`).
pub fn tail_certificate(p: u64, ext_deg: usize, trunc: usize) -> Rat {
    tail_certificate_at(p, rat(1, ext_deg as i64), trunc)
}

/// Smallest truncation `D` whose tail certificate at valuation `v` reaches
/// `target`.
pub fn auto_truncation_at(p: u64, v: Rat, target: Rat) -> usize {
    assert!(v > rat(0, 1));
    let mut worst: i64 = 0;
    let mut pw: i64 = 1; // p^l
    let mut l: i64 = 0;
    loop {
        // in the window [p^l, p^{l+1}) the requirement is m v - l >= target
        let need = (target + rat(l, 1)) / v;
        let hi = pw.saturating_mul(p as i64) - 1;
        if rat(pw, 1) < need {
            // largest integer strictly below `need`
            let c = need.ceil().to_integer();
            let max_violating = c - 1;
            worst = worst.max(max_violating.min(hi));
        } else {
            break;
        }
        l += 1;
        pw = match pw.checked_mul(p as i64) {
            Some(x) => x,
            None => break,
        };
    }
    worst.max(0) as usize
}

/// Smallest truncation for the canonical generator of a degree-`ext_deg`
/// level.
pub fn auto_truncation(p: u64, ext_deg: usize, target: Rat) -> usize {
    auto_truncation_at(p, rat(1, ext_deg as i64), target)
}
