//! Dieudonne modules over `k = F_p`: free `Z_p`-modules of finite rank with
//! a Frobenius matrix `F` and Verschiebung `V = p F^{-1}`.
//!
//! The base field is totally ramified over `Q_p`, so `k = Z/pZ` and `F` is
//! honestly `Z_p`-linear. The module invariants (`F` injective, `V`
//! integral, eigenvalue slopes in `[0, 1]`) are enforced at construction;
//! [`check_fv`] produces the same facts as a report for arbitrary matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::padic::{newton_polygon, slope_split, PPoly, PadicScalar, PrimeCtx};
use crate::val::{rat, Rat, Val};

/// Coordinate vector of a module element.
pub type ModuleElement = Vec<PadicScalar>;

/// A free `Z_p`-module of finite rank with the matrix of `F`.
#[derive(Debug, Clone)]
pub struct DieudonneModule {
    rank: usize,
    f_mat: Mat,
}

impl DieudonneModule {
    /// Validate and wrap a Frobenius matrix.
    pub fn new(ctx: &PrimeCtx, f_mat: Mat) -> Result<Self> {
        if ctx.f() != 1 {
            return Err(Error::contract(
                "dieudonne modules live over k = F_p: use an f = 1 context",
            ));
        }
        if f_mat.rows() != f_mat.cols() || f_mat.rows() == 0 {
            return Err(Error::contract("F must be square of rank >= 1"));
        }
        let report = check_fv(ctx, &f_mat)?;
        if !report.pass() {
            return Err(Error::contract(alloc::format!(
                "F violates the module invariants: injective={} v_integral={} fv_commutes={} slopes_ok={}",
                report.f_injective, report.v_integral, report.fv_commutes, report.slopes_ok
            )));
        }
        Ok(DieudonneModule {
            rank: f_mat.rows(),
            f_mat,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn f_mat(&self) -> &Mat {
        &self.f_mat
    }

    pub fn apply_f(&self, ctx: &PrimeCtx, m: &[PadicScalar]) -> ModuleElement {
        self.f_mat.mul_vec(ctx, m)
    }
}

/// Monic characteristic polynomial of `F`.
pub fn char_poly(ctx: &PrimeCtx, module: &DieudonneModule) -> PPoly {
    linalg::charpoly(ctx, &module.f_mat)
}

/// The ordinary/non-ordinary splitting.
#[derive(Debug)]
pub struct OrdSplit {
    /// Basis (columns) of `f2(F) M`: the part where `F`-eigenvalues have
    /// valuation exactly 1.
    pub ordinary: Mat,
    /// Basis (columns) of `f1(F) M`: eigenvalue valuations below 1.
    pub non_ordinary: Mat,
    /// Slope-1 factor `f1` of the characteristic polynomial.
    pub f1: PPoly,
    /// Small-slope factor `f2`.
    pub f2: PPoly,
}

/// Split `M` into its ordinary and non-ordinary parts.
///
/// The characteristic polynomial factors as `f1 * f2` at slope 1, and the
/// two sublattices are the images `f2(F) M` and `f1(F) M`; their ranks sum
/// to the module rank.
pub fn split_ord_nonord(ctx: &PrimeCtx, module: &DieudonneModule) -> Result<OrdSplit> {
    let cp = char_poly(ctx, module);
    let ss = slope_split(ctx, &cp, rat(1, 1))?;
    if ss.pow_x != 0 {
        return Err(Error::contract(
            "characteristic polynomial vanishes at 0: F is not injective",
        ));
    }
    let f1 = ss.at_threshold;
    let f2 = ss.below;
    let ord_img = linalg::poly_at_mat(ctx, &f2, &module.f_mat);
    let nonord_img = linalg::poly_at_mat(ctx, &f1, &module.f_mat);
    // image entries are only determined to the working precision: divisors
    // reaching the user precision are numerical debris, not lattice data
    let cutoff = Some(rat(ctx.max_prec() as i64, 1));
    let ordinary = linalg::column_lattice_basis_with_cutoff(ctx, &ord_img, cutoff)?;
    let non_ordinary = linalg::column_lattice_basis_with_cutoff(ctx, &nonord_img, cutoff)?;
    if ordinary.cols() != f1.degree() || non_ordinary.cols() != f2.degree() {
        return Err(Error::precision(
            "split ranks do not match the slope factorization degrees",
        ));
    }
    Ok(OrdSplit {
        ordinary,
        non_ordinary,
        f1,
        f2,
    })
}

/// True if `op * basis` stays inside the `Z_p`-span of `basis`.
pub fn lattice_stable_under(ctx: &PrimeCtx, basis: &Mat, op: &Mat, tol: Rat) -> Result<bool> {
    if basis.cols() == 0 {
        return Ok(true);
    }
    for j in 0..basis.cols() {
        let image = op.mul_vec(ctx, &basis.col(j));
        if linalg::solve_in_lattice(ctx, basis, &image, tol)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Monic minimal polynomial of `m` under `F`, over `Q_p`.
///
/// Finds the first Krylov dependency; a dependency is accepted only when
/// the solve's residual is zero at its own tracked precision, so the rank
/// decision is certifiable. `m = 0` returns the constant 1 (unit ideal).
pub fn minimal_poly(ctx: &PrimeCtx, module: &DieudonneModule, m: &[PadicScalar]) -> Result<PPoly> {
    if m.len() != module.rank {
        return Err(Error::contract("element has wrong length"));
    }
    if m.iter().all(|c| ctx.is_zero(c)) {
        return Ok(PPoly::one(ctx));
    }
    let mut krylov: Vec<ModuleElement> = vec![m.to_vec()];
    for _ in 0..module.rank {
        let last = krylov.last().unwrap();
        krylov.push(module.apply_f(ctx, last));
    }
    for t in 1..=module.rank {
        let a = mat_from_cols(ctx, module.rank, &krylov[..t]);
        match solve_field(ctx, &a, &krylov[t])? {
            FieldSolve::Solution(x) => {
                let mut coeffs: Vec<PadicScalar> = x.into_iter().map(|c| ctx.neg(&c)).collect();
                coeffs.push(ctx.one());
                return Ok(PPoly::new(coeffs));
            }
            FieldSolve::Inconsistent => continue,
            FieldSolve::Ambiguous => {
                return Err(Error::precision(
                    "krylov rank is ambiguous at the working precision",
                ))
            }
        }
    }
    Err(Error::precision(
        "no Krylov relation found up to the module rank",
    ))
}

/// Exponent of the smallest `p`-power annihilating the quotient of the
/// saturation of `Z_p[F] m` by `Z_p[F] m` itself.
///
/// Requires `F` to be topologically nilpotent on the span (all minimal
/// polynomial slopes positive); the exponent comes out of the Smith form of
/// the Krylov lattice.
pub fn annihilator_index(
    ctx: &PrimeCtx,
    module: &DieudonneModule,
    m: &[PadicScalar],
) -> Result<u32> {
    let p = minimal_poly(ctx, module, m)?;
    let np = newton_polygon(ctx, &p)?;
    for (slope, _) in &np {
        if *slope <= rat(0, 1) {
            return Err(Error::contract(alloc::format!(
                "F is not topologically nilpotent on the span: slope {slope} <= 0"
            )));
        }
    }
    let t = p.degree();
    let mut krylov: Vec<ModuleElement> = vec![m.to_vec()];
    for _ in 1..t {
        let last = krylov.last().unwrap();
        krylov.push(module.apply_f(ctx, last));
    }
    let k = mat_from_cols(ctx, module.rank, &krylov);
    let s = linalg::smith(ctx, &k)?;
    let mut worst: i64 = 0;
    for d in &s.divisors {
        match d {
            Val::Exact(e) => worst = worst.max(*e.numer()),
            Val::AtLeast(_) => {
                return Err(Error::precision(
                    "krylov lattice has an elementary divisor indistinguishable from zero",
                ))
            }
        }
    }
    Ok(worst as u32)
}

/// Facts about a candidate Frobenius matrix.
#[derive(Debug, Clone)]
pub struct FvReport {
    /// `det F` has a certified (finite) valuation.
    pub f_injective: bool,
    /// `V = p F^{-1}` has integral entries.
    pub v_integral: bool,
    /// `F V = V F = p` holds to precision.
    pub fv_commutes: bool,
    /// All characteristic slopes lie in `[0, 1]`.
    pub slopes_ok: bool,
    /// Worst entry valuation of `V`.
    pub worst_v_entry: Val,
    /// Worst entry valuation of `F V - p` and `V F - p`.
    pub fv_residual: Val,
}

impl FvReport {
    pub fn pass(&self) -> bool {
        self.f_injective && self.v_integral && self.fv_commutes && self.slopes_ok
    }
}

/// Verify `p F^{-1}` is integral and commutes per `F V = V F = p`.
pub fn check_fv(ctx: &PrimeCtx, f_mat: &Mat) -> Result<FvReport> {
    let n = f_mat.rows();
    let cp = linalg::charpoly(ctx, f_mat);
    let c0 = &cp.coeffs()[0];
    let c0_val = ctx.valuation(c0);
    if !c0_val.is_exact() {
        return Ok(FvReport {
            f_injective: false,
            v_integral: false,
            fv_commutes: false,
            slopes_ok: false,
            worst_v_entry: Val::AtLeast(rat(0, 1)),
            fv_residual: Val::AtLeast(rat(0, 1)),
        });
    }

    // V = -p (F^{n-1} + c_{n-1} F^{n-2} + ... + c_1) / c_0
    let q = PPoly::new(cp.coeffs()[1..].to_vec());
    let qf = linalg::poly_at_mat(ctx, &q, f_mat);
    let scale = ctx.mul_p_pow(&ctx.neg(&ctx.inv(c0)?), 1);
    let v = qf.scale(ctx, &scale);

    let worst = v.min_val(ctx);
    let v_integral = worst.at_least(rat(0, 1));

    let fv = f_mat.mul(ctx, &v);
    let vf = v.mul(ctx, f_mat);
    let p_id = Mat::identity(ctx, n).scale(ctx, &ctx.from_i64(ctx.p() as i64));
    let r1 = fv.sub(ctx, &p_id).min_val(ctx);
    let r2 = vf.sub(ctx, &p_id).min_val(ctx);
    let fv_residual = r1.smallest(r2);
    // commutation must hold to roughly the precision left after the division
    let commute_tol = rat(
        (ctx.max_prec() as i64 - c0_val.bound().to_integer() - 1).max(1),
        1,
    );
    let fv_commutes = fv_residual.at_least(commute_tol);

    let np = newton_polygon(ctx, &cp)?;
    let slopes_ok = np.iter().all(|(s, _)| *s >= rat(0, 1) && *s <= rat(1, 1));

    Ok(FvReport {
        f_injective: true,
        v_integral,
        fv_commutes,
        slopes_ok,
        worst_v_entry: worst,
        fv_residual,
    })
}

pub(crate) fn mat_from_cols(ctx: &PrimeCtx, rows: usize, cols: &[ModuleElement]) -> Mat {
    let mut m = Mat::zeros(ctx, rows, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for (i, x) in col.iter().enumerate() {
            m.set(i, j, x.clone());
        }
    }
    m
}

enum FieldSolve {
    Solution(Vec<PadicScalar>),
    Inconsistent,
    Ambiguous,
}

/// Solve `A x = b` over `Q_p` for a full-column-rank `A` (n x t, t <= n).
fn solve_field(ctx: &PrimeCtx, a: &Mat, b: &[PadicScalar]) -> Result<FieldSolve> {
    let n = a.rows();
    let t = a.cols();
    let mut w = a.hcat(&Mat::new(n, 1, b.to_vec()));
    let mut pivots = Vec::with_capacity(t);
    let mut used = vec![false; n];
    for col in 0..t {
        let mut best: Option<(usize, Rat)> = None;
        for i in 0..n {
            if used[i] {
                continue;
            }
            if let Val::Exact(e) = ctx.valuation(w.at(i, col)) {
                if best.map_or(true, |(_, be)| e < be) {
                    best = Some((i, e));
                }
            }
        }
        let Some((pi, _)) = best else {
            return Ok(FieldSolve::Ambiguous);
        };
        used[pi] = true;
        pivots.push((pi, col));
        let pinv = ctx.inv(w.at(pi, col))?;
        for i in 0..n {
            if i == pi {
                continue;
            }
            let factor = ctx.mul(w.at(i, col), &pinv);
            if ctx.is_zero(&factor) {
                continue;
            }
            for j in col..=t {
                let x = ctx.sub(w.at(i, j), &ctx.mul(&factor, w.at(pi, j)));
                w.set(i, j, x);
            }
        }
    }
    for i in 0..n {
        if used[i] {
            continue;
        }
        match ctx.valuation(w.at(i, t)) {
            Val::Exact(_) => return Ok(FieldSolve::Inconsistent),
            Val::AtLeast(bound) => {
                // refuse to call "zero" when almost no precision is left
                if bound < rat((ctx.max_prec() / 2).max(2) as i64, 1) {
                    return Ok(FieldSolve::Ambiguous);
                }
            }
        }
    }
    let mut x = vec![ctx.zero(); t];
    for (pi, col) in pivots {
        x[col] = ctx.div(w.at(pi, t), w.at(pi, col))?;
    }
    Ok(FieldSolve::Solution(x))
}

/// Companion matrix of a monic polynomial.
pub fn companion(ctx: &PrimeCtx, p: &PPoly) -> Mat {
    let d = p.degree();
    assert!(d >= 1);
    let mut m = Mat::zeros(ctx, d, d);
    for i in 1..d {
        m.set(i, i - 1, ctx.one());
    }
    for i in 0..d {
        m.set(i, d - 1, ctx.neg(&p.coeffs()[i]));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrimeCtx {
        PrimeCtx::new(5, 1, 20).unwrap()
    }

    #[test]
    fn charpoly_of_scaled_uniformizer() {
        let c = ctx();
        let m = DieudonneModule::new(&c, Mat::from_i64(&c, 1, 1, &[10])).unwrap();
        let cp = char_poly(&c, &m);
        assert!(c.eq_to(&cp.coeffs()[0], &c.from_i64(-10), rat(20, 1)));
    }

    #[test]
    fn split_pure_modules() {
        let c = ctx();
        let m = DieudonneModule::new(&c, Mat::from_i64(&c, 1, 1, &[10])).unwrap();
        let s = split_ord_nonord(&c, &m).unwrap();
        assert_eq!(s.ordinary.cols(), 1);
        assert_eq!(s.non_ordinary.cols(), 0);
        let q = PPoly::from_i64(&c, &[5, 0, 1]);
        let m = DieudonneModule::new(&c, companion(&c, &q)).unwrap();
        let s = split_ord_nonord(&c, &m).unwrap();
        assert_eq!(s.ordinary.cols(), 0);
        assert_eq!(s.non_ordinary.cols(), 2);
    }

    #[test]
    fn split_mixed_module_is_stable() {
        let c = ctx();
        // block-diagonal: [10] + companion(x^2 + 5)
        let f = Mat::from_i64(&c, 3, 3, &[10, 0, 0, 0, 0, -5, 0, 1, 0]);
        let m = DieudonneModule::new(&c, f.clone()).unwrap();
        let s = split_ord_nonord(&c, &m).unwrap();
        assert_eq!(s.ordinary.cols(), 1);
        assert_eq!(s.non_ordinary.cols(), 2);
        assert!(lattice_stable_under(&c, &s.ordinary, &f, rat(12, 1)).unwrap());
        assert!(lattice_stable_under(&c, &s.non_ordinary, &f, rat(12, 1)).unwrap());
        let rep = check_fv(&c, &f).unwrap();
        assert!(rep.pass());
    }

    #[test]
    fn minimal_poly_of_eigen_and_cyclic_vectors() {
        let c = ctx();
        let f = Mat::from_i64(&c, 3, 3, &[10, 0, 0, 0, 0, -5, 0, 1, 0]);
        let m = DieudonneModule::new(&c, f).unwrap();
        // e1 sits in the eigenblock: min poly x - 10
        let e1 = vec![c.one(), c.zero(), c.zero()];
        let p = minimal_poly(&c, &m, &e1).unwrap();
        assert_eq!(p.degree(), 1);
        assert!(c.eq_to(&p.coeffs()[0], &c.from_i64(-10), rat(18, 1)));
        // e2 is cyclic for the companion block: min poly x^2 + 5
        let e2 = vec![c.zero(), c.one(), c.zero()];
        let p = minimal_poly(&c, &m, &e2).unwrap();
        assert_eq!(p.degree(), 2);
        assert!(c.eq_to(&p.coeffs()[0], &c.from_i64(5), rat(18, 1)));
        assert!(c.eq_to(&p.coeffs()[1], &c.zero(), rat(18, 1)));
        // zero element: unit ideal
        let z = vec![c.zero(), c.zero(), c.zero()];
        assert_eq!(minimal_poly(&c, &m, &z).unwrap().degree(), 0);
    }

    #[test]
    fn annihilator_exponents() {
        let c = ctx();
        let q = PPoly::from_i64(&c, &[5, 0, 1]);
        let m = DieudonneModule::new(&c, companion(&c, &q)).unwrap();
        let e1 = vec![c.one(), c.zero()];
        assert_eq!(annihilator_index(&c, &m, &e1).unwrap(), 0);
        // scaling by p raises the exponent by 1
        let pe1 = vec![c.from_i64(5), c.zero()];
        assert_eq!(annihilator_index(&c, &m, &pe1).unwrap(), 1);
    }

    #[test]
    fn annihilator_rejects_unit_slopes() {
        let c = ctx();
        // F = [1] is a valid module (V = [p]) but F is not topologically
        // nilpotent on any span
        let m = DieudonneModule::new(&c, Mat::from_i64(&c, 1, 1, &[1])).unwrap();
        let e = vec![c.one()];
        assert!(matches!(
            annihilator_index(&c, &m, &e),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn fv_detects_violations() {
        let c = ctx();
        // F = [p^2] has slope 2 > 1
        let rep = check_fv(&c, &Mat::from_i64(&c, 1, 1, &[25])).unwrap();
        assert!(!rep.slopes_ok);
        assert!(!rep.pass());
        // F = [1]: V = [p]
        let rep = check_fv(&c, &Mat::from_i64(&c, 1, 1, &[1])).unwrap();
        assert!(rep.pass());
        assert_eq!(rep.worst_v_entry, Val::Exact(rat(1, 1)));
        let q = PPoly::from_i64(&c, &[5, 0, 1]);
        let rep = check_fv(&c, &companion(&c, &q)).unwrap();
        assert!(rep.pass());
    }
}
