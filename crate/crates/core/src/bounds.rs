//! Genus formulas for the curves `y^2 = x^{3p^N} + a x^{p^N} + b` and
//! `y^{2p^M} = x^{3p^N} + a x^{p^N} + b`, an independent Riemann-Hurwitz
//! evaluator, and the corank-bound calculator.
//!
//! Branching data for the `x`-projection (generic `a, b`): the `3 p^N`
//! finite branch points are totally ramified of index `2 p^M`; over
//! infinity there are `gcd(2 p^M, 3 p^N) = p^{min(M,N)}` points of index
//! `2 p^{M - min(M,N)}`. The closed formulas below match that data exactly
//! (including the degenerate `M = 0` case, which reduces to the
//! hyperelliptic curve).

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::val::{rat, Rat};

fn check_p(p: u64) -> Result<()> {
    if p <= 3 {
        return Err(Error::contract("curve formulas require p > 3"));
    }
    // primality is checked by the arithmetic layer for contexts; here a
    // quick trial division suffices
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return Err(Error::contract("p must be prime"));
        }
        d += 1;
    }
    Ok(())
}

fn pow_u128(p: u64, e: u32) -> Result<u128> {
    let mut acc: u128 = 1;
    for _ in 0..e {
        acc = acc
            .checked_mul(p as u128)
            .ok_or_else(|| Error::unsupported("p^e overflows"))?;
    }
    Ok(acc)
}

/// Genus of `y^2 = x^{3 p^N} + a x^{p^N} + b`: `(3 p^N - 1) / 2`.
pub fn genus_cn(p: u64, n: u32) -> Result<u128> {
    check_p(p)?;
    let pn = pow_u128(p, n)?;
    Ok((3 * pn - 1) / 2)
}

/// Genus of `y^{2 p^M} = x^{3 p^N} + a x^{p^N} + b`.
///
/// From Riemann-Hurwitz with the branching data in the module docs:
///
/// - `M <= N`: `1 - 2 p^M + (3 p^N (2 p^M - 1) + p^M) / 2`
/// - `M >  N`: `1 - 2 p^M + (3 p^N (2 p^M - 1) + 2 p^M - p^N) / 2`
///
/// At `M = 0` this reduces to `genus_cn`, and the two branches agree at
/// `M = N`.
pub fn genus_cmn(p: u64, m: u32, n: u32) -> Result<u128> {
    check_p(p)?;
    let pm = pow_u128(p, m)?;
    let pn = pow_u128(p, n)?;
    let shared = 3 * pn * (2 * pm - 1);
    let half = if m <= n {
        (shared + pm) / 2
    } else {
        (shared + 2 * pm - pn) / 2
    };
    // g = 1 - 2 p^M + half: the formula is nonnegative for p > 3
    Ok((1 + half) - 2 * pm)
}

/// One ramification class: `count` points with index `e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RamPoint {
    pub count: u128,
    pub e: u128,
}

/// Genus from `2g - 2 = -2 deg + sum count (e - 1)`.
///
/// Rejects odd parity and negative genus (a degree-2 cover of the line with
/// no branching is not a curve of nonnegative genus).
pub fn rh_oracle(degree: u128, ram: &[RamPoint]) -> Result<u128> {
    if degree == 0 {
        return Err(Error::contract("cover degree must be positive"));
    }
    let mut rhs: i128 = -2 * degree as i128;
    for r in ram {
        if r.e == 0 {
            return Err(Error::contract("ramification index must be >= 1"));
        }
        rhs += (r.count as i128) * (r.e as i128 - 1);
    }
    if rhs % 2 != 0 {
        return Err(Error::contract("Riemann-Hurwitz parity violation"));
    }
    let two_g = rhs + 2;
    if two_g < 0 {
        return Err(Error::contract("negative genus: invalid ramification data"));
    }
    Ok((two_g / 2) as u128)
}

/// The branching data of `y^2 = x^{3 p^N} + ...` over the line.
pub fn rh_data_cn(p: u64, n: u32) -> Result<(u128, Vec<RamPoint>)> {
    check_p(p)?;
    let pn = pow_u128(p, n)?;
    Ok((2, vec![RamPoint { count: 3 * pn + 1, e: 2 }]))
}

/// The branching data of `y^{2 p^M} = x^{3 p^N} + ...` over the line.
pub fn rh_data_cmn(p: u64, m: u32, n: u32) -> Result<(u128, Vec<RamPoint>)> {
    check_p(p)?;
    let pm = pow_u128(p, m)?;
    let pn = pow_u128(p, n)?;
    let minv = pow_u128(p, m.min(n))?;
    Ok((
        2 * pm,
        vec![
            RamPoint {
                count: 3 * pn,
                e: 2 * pm,
            },
            RamPoint {
                count: minv,
                e: 2 * pm / minv,
            },
        ],
    ))
}

// ---------------------------------------------------------------------------
// corank bounds
// ---------------------------------------------------------------------------

/// Parameters of the corank bound: `s` geometric sums with growth rates
/// `lambda_i` and explicit offsets fixing the `O(1)` in
/// `n - m_i = lambda_i n + O(1)`.
#[derive(Debug, Clone)]
pub struct BoundInput {
    pub p: u64,
    pub s: u64,
    /// Growth rates in `[0, 1]`, one per term.
    pub lambdas: Vec<Rat>,
    /// Offsets `c0_i`; `m_i = clamp(n - floor(lambda_i n) - c0_i, 0, n)`.
    pub offsets: Vec<i64>,
}

impl BoundInput {
    pub fn uniform(p: u64, s: u64, lambda: Rat, offset: i64) -> Result<Self> {
        if lambda < rat(0, 1) || lambda > rat(1, 1) {
            return Err(Error::contract("lambda must lie in [0, 1]"));
        }
        Ok(BoundInput {
            p,
            s,
            lambdas: vec![lambda; s as usize],
            offsets: vec![offset; s as usize],
        })
    }
}

/// Evaluated bound at one level: the numeric sum, always understood as
/// "plus an unspecified fixed constant C".
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub n: u32,
    /// `sum_i (p-1)(p^{n-1} + ... + p^{m_i})`.
    pub sum: BigUint,
    /// The convention-resolved `m_i`.
    pub m_values: Vec<u32>,
}

/// Evaluate `sum_{i=1..s} (p-1)(p^{n-1} + ... + p^{m_i})`, with
/// `m_i = max(0, n - floor(lambda_i n) - c0_i)` (empty sums vanish).
pub fn selmer_bound(input: &BoundInput, n: u32) -> Result<BoundReport> {
    if input.lambdas.len() != input.s as usize || input.offsets.len() != input.s as usize {
        return Err(Error::contract("lambda/offset lists must have length s"));
    }
    let p = BigUint::from(input.p);
    let mut sum = BigUint::zero();
    let mut m_values = Vec::with_capacity(input.s as usize);
    for (lam, c0) in input.lambdas.iter().zip(&input.offsets) {
        if *lam < rat(0, 1) || *lam > rat(1, 1) {
            return Err(Error::contract("lambda must lie in [0, 1]"));
        }
        let floor_ln = (*lam * rat(n as i64, 1)).floor().to_integer();
        let m = (n as i64 - floor_ln - c0).clamp(0, n as i64) as u32;
        m_values.push(m);
        // (p-1)(p^{n-1} + ... + p^{m}) = p^n - p^m when m <= n-1
        if m < n {
            let mut pk = pow_big(&p, m);
            for _ in m..n {
                let next = &pk * &p;
                sum += &next - &pk;
                pk = next;
            }
        }
    }
    Ok(BoundReport { n, sum, m_values })
}

fn pow_big(p: &BigUint, e: u32) -> BigUint {
    let mut acc = BigUint::one();
    for _ in 0..e {
        acc *= p;
    }
    acc
}

/// Which curve family a preset refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Cn { n: u32 },
    Cmn { m: u32, n: u32 },
}

/// The Jacobian preset: `s = (dim of the Jacobian) * [H F_n : Q]`, with the
/// dimension given by the genus formulas and a single growth rate.
pub fn jacobian_preset(
    p: u64,
    kind: CurveKind,
    field_degree: u64,
    lambda: Rat,
    offset: i64,
) -> Result<BoundInput> {
    let genus = match kind {
        CurveKind::Cn { n } => genus_cn(p, n)?,
        CurveKind::Cmn { m, n } => genus_cmn(p, m, n)?,
    };
    let s = genus
        .checked_mul(field_degree as u128)
        .filter(|v| *v <= u64::MAX as u128)
        .ok_or_else(|| Error::unsupported("preset dimension overflows"))? as u64;
    BoundInput::uniform(p, s, lambda, offset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genus_cn_values() {
        assert_eq!(genus_cn(5, 0).unwrap(), 1);
        assert_eq!(genus_cn(5, 1).unwrap(), 7);
        assert_eq!(genus_cn(7, 1).unwrap(), 10);
        assert_eq!(genus_cn(5, 2).unwrap(), 37);
    }

    #[test]
    fn genus_cmn_degenerates_to_cn() {
        for p in [5u64, 7, 11] {
            for n in 0..3 {
                assert_eq!(genus_cmn(p, 0, n).unwrap(), genus_cn(p, n).unwrap());
            }
        }
    }

    #[test]
    fn genus_cmn_agrees_with_hurwitz_data() {
        for p in [5u64, 7, 11] {
            for m in 0..3 {
                for n in 0..3 {
                    let g = genus_cmn(p, m, n).unwrap();
                    let (deg, ram) = rh_data_cmn(p, m, n).unwrap();
                    assert_eq!(g, rh_oracle(deg, &ram).unwrap(), "p={p} m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn branch_formulas_agree_at_m_equals_n() {
        // the two case formulas coincide on the diagonal
        for p in [5u64, 7, 11] {
            for k in 0..3 {
                let pm = pow_u128(p, k).unwrap();
                let pn = pm;
                let shared = 3 * pn * (2 * pm - 1);
                assert_eq!((shared + pm) / 2, (shared + 2 * pm - pn) / 2);
            }
        }
    }

    #[test]
    fn oracle_rejects_degenerate_data() {
        // unbranched degree-2 cover of the line: genus -1
        assert!(rh_oracle(2, &[]).is_err());
        // odd total ramification: parity violation
        assert!(rh_oracle(2, &[RamPoint { count: 3, e: 2 }]).is_err());
    }

    #[test]
    fn bound_matches_direct_loop() {
        let input = BoundInput::uniform(5, 1, rat(1, 2), 0).unwrap();
        let rep = selmer_bound(&input, 2).unwrap();
        // m = 2 - 1 - 0 = 1: (p-1)(p^1) = 20
        assert_eq!(rep.m_values, vec![1]);
        assert_eq!(rep.sum, BigUint::from(20u32));
        // explicit example: p = 5, n = 2, m = 0: (5-1)(5+1) = 24
        let input = BoundInput {
            p: 5,
            s: 1,
            lambdas: vec![rat(1, 1)],
            offsets: vec![0],
        };
        let rep = selmer_bound(&input, 2).unwrap();
        assert_eq!(rep.m_values, vec![0]);
        assert_eq!(rep.sum, BigUint::from(24u32));
    }

    #[test]
    fn empty_sums_vanish() {
        let input = BoundInput::uniform(5, 3, rat(0, 1), 0).unwrap();
        let rep = selmer_bound(&input, 4).unwrap();
        assert_eq!(rep.m_values, vec![4, 4, 4]);
        assert!(rep.sum.is_zero());
    }

    #[test]
    fn bound_is_monotone_in_n() {
        let input = BoundInput::uniform(7, 2, rat(1, 3), 1).unwrap();
        let mut last = BigUint::zero();
        for n in 0..8 {
            let rep = selmer_bound(&input, n).unwrap();
            assert!(rep.sum >= last, "not monotone at n = {n}");
            last = rep.sum;
        }
    }

    #[test]
    fn preset_coefficient_is_genus_times_degree() {
        let input = jacobian_preset(5, CurveKind::Cn { n: 1 }, 4, rat(1, 2), 0).unwrap();
        assert_eq!(input.s, 7 * 4);
    }
}
