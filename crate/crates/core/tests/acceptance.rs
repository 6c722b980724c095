//! Acceptance suite: one test per headline criterion, each printing a
//! pass/fail line (run with `--nocapture` to see them).
//!
//! Criteria, tolerances and runtime budgets are pinned here; a failing
//! criterion fails its test with a message naming the offending cells.

use std::sync::Arc;
use std::time::Instant;

use dlab_core::bounds::{
    genus_cmn, genus_cn, jacobian_preset, rh_data_cmn, rh_data_cn, rh_oracle, selmer_bound,
    BoundInput, CurveKind,
};
use dlab_core::iwasawa::{
    assemble_l, check_recurrence, decompose, ExtLambda, LambdaElem, NormSequence, RootField,
};
use dlab_core::logpoints::{build_epsilon, can_check, koko_check};
use dlab_core::padic::{newton_polygon, slope_split, PPoly, PadicScalar, PrimeCtx};
use dlab_core::tower::{cyclotomic_f, family_f, TowerSpec};
use dlab_core::val::{rat, Rat, Val};
use dlab_core::{dieudonne, linalg};

struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn unit(&mut self, p: u64) -> i64 {
        (self.next() % (p - 1)) as i64 + 1
    }
}

fn report(name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {name}: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

/// Criterion 1: the constant-term identity on the polynomial/tower grid at
/// p = 5, precision 20; residual valuation >= 18 everywhere, and the
/// simplest rational case matches 5/6 on the nose. Budget: 5 s.
#[test]
fn criterion_1_koko_identity() {
    let t0 = Instant::now();
    let mut failures = Vec::new();

    let polys: [&[i64]; 3] = [&[5, 0, 1], &[5, 5, 1], &[5, 5, 0, 1]];
    // base field Q_p with the cyclotomic tower polynomial
    let ctx1 = PrimeCtx::new(5, 1, 20).unwrap();
    let f1 = cyclotomic_f(&ctx1);
    // quadratic unramified field with f = X^p + zeta p X^{p-1} + p X
    let ctx2 = PrimeCtx::new(5, 2, 20).unwrap();
    let f2 = family_f(&ctx2, 1);

    for (fi, (ctx, f)) in [(&ctx1, &f1), (&ctx2, &f2)].into_iter().enumerate() {
        for (pi, coeffs) in polys.iter().enumerate() {
            let p_poly = PPoly::from_i64(ctx, coeffs);
            let eps = build_epsilon(ctx, &p_poly, f).unwrap();
            for n in 0..(2 * ctx.f() as i64 + 1) {
                let r = koko_check(ctx, &eps, n).unwrap();
                if !r.at_least(rat(18, 1)) {
                    failures.push(format!("field {fi} poly {pi} n {n}: residual {r}"));
                }
            }
        }
    }

    // closed form for P = x^2 + p over Q_p: eps = 5/6 to full precision
    let p_poly = PPoly::from_i64(&ctx1, &[5, 0, 1]);
    let eps = build_epsilon(&ctx1, &p_poly, &f1).unwrap();
    let expect = ctx1.from_ratio(5, 6).unwrap();
    if !ctx1.eq_to(eps.value(0), &expect, rat(20, 1)) {
        failures.push("closed form 5/6 mismatch".into());
    }

    let dt = t0.elapsed();
    let pass = failures.is_empty() && dt.as_secs_f64() < 5.0;
    report(
        "1 (koko identity)",
        pass,
        &format!("({} cells checked in {dt:.2?})", 3 * 2 * 5),
    );
    assert!(pass, "failures: {failures:?}; runtime {dt:?}");
}

/// Criterion 2 (flagship): the trace relation for the cyclotomic tower,
/// P = x^2 + p, p = 5, precision 16, n in {2, 3}, i in {0, 1}; residual
/// valuation must reach the tail-certificate target (>= 10). Budget: 60 s.
///
/// Note: the identity provably fails when the trace window reaches the base
/// field (n = d = 2): the relative degree of the bottom step is p - 1, not
/// p, and the exact residual has valuation 2. Those cells are reported and
/// fail honestly; the n = 3 cells pass.
#[test]
fn criterion_2_trace_relation() {
    let t0 = Instant::now();
    let target: Rat = rat(16, 1);
    assert!(target >= rat(10, 1), "published target must be >= 10");

    let ctx = Arc::new(PrimeCtx::new(5, 1, 16).unwrap());
    let f = cyclotomic_f(&ctx);
    let tower = TowerSpec::new(ctx.clone(), f, 3).unwrap();
    let p_poly = PPoly::from_i64(&ctx, &[5, 0, 1]);

    let mut failures = Vec::new();
    for n in [2usize, 3] {
        for i in [0usize, 1] {
            let rep = can_check(&tower, &p_poly, n, i, target, None).unwrap();
            println!(
                "  can n={n} i={i}: residual {} target {} trunc {} cert_floor {} bottom={}",
                rep.residual, rep.target, rep.trunc, rep.cert_floor, rep.bottom_window
            );
            if !rep.pass {
                failures.push(format!(
                    "n={n} i={i}: residual {} below target {} (bottom_window={})",
                    rep.residual, rep.target, rep.bottom_window
                ));
            }
        }
    }

    let dt = t0.elapsed();
    let pass = failures.is_empty() && dt.as_secs_f64() < 60.0;
    report("2 (trace relation)", pass, &format!("({dt:.2?})"));
    assert!(
        pass,
        "failing cells: {failures:?}; runtime {dt:?} (the n = 2 cells sit on the \
         base-field boundary where the identity's bottom trace step has degree p-1, \
         not p; the measured residual valuation there is 2-3, see the check reports)"
    );
}

/// Criterion 3: slope factorization of 50 randomized monic polynomials over
/// Z_5 with planted slope structure; the product must match to valuation
/// >= 18 and the polygons must partition at slope 1 exactly. Budget: 5 s.
#[test]
fn criterion_3_slope_factorization() {
    let t0 = Instant::now();
    let ctx = PrimeCtx::new(5, 1, 20).unwrap();
    let mut rng = SplitMix(0x51_0b_e5);
    let mut failures = Vec::new();

    for case in 0..50 {
        // plant slope-1 linear factors and fractional-slope Eisenstein blocks
        let n_ones = (rng.next() % 3) as usize;
        let n_frac = 1 + (rng.next() % 2) as usize;
        let mut q = PPoly::one(&ctx);
        let mut d1_expect = 0usize;
        for _ in 0..n_ones {
            let u = rng.unit(5);
            q = q.mul(&ctx, &PPoly::from_i64(&ctx, &[-5 * u, 1]));
            d1_expect += 1;
        }
        let mut d_frac = 0usize;
        for _ in 0..n_frac {
            let k = 2 + (rng.next() % 3) as usize; // degree 2..4, slope 1/k
            let u = rng.unit(5);
            let mut coeffs = vec![0i64; k + 1];
            coeffs[0] = 5 * u;
            coeffs[k] = 1;
            q = q.mul(&ctx, &PPoly::from_i64(&ctx, &coeffs));
            d_frac += k;
        }
        let split = match slope_split(&ctx, &q, rat(1, 1)) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("case {case}: {e}"));
                continue;
            }
        };
        if !split.product_defect.at_least(rat(18, 1)) {
            failures.push(format!(
                "case {case}: product defect {}",
                split.product_defect
            ));
        }
        if split.at_threshold.degree() != d1_expect || split.below.degree() != d_frac {
            failures.push(format!("case {case}: degree split mismatch"));
        }
        if d1_expect > 0 {
            let np = newton_polygon(&ctx, &split.at_threshold).unwrap();
            if !(np.len() == 1 && np[0] == (rat(1, 1), d1_expect)) {
                failures.push(format!("case {case}: slope-1 polygon {np:?}"));
            }
        }
        if d_frac > 0 {
            let np = newton_polygon(&ctx, &split.below).unwrap();
            if np.iter().any(|(s, _)| *s >= rat(1, 1)) {
                failures.push(format!("case {case}: residual polygon reaches slope 1"));
            }
        }
    }

    let dt = t0.elapsed();
    let pass = failures.is_empty() && dt.as_secs_f64() < 5.0;
    report("3 (slope factorization)", pass, &format!("(50 cases in {dt:.2?})"));
    assert!(pass, "failures: {failures:?}; runtime {dt:?}");
}

/// Criterion 4: 20 random block-built modules of rank <= 4: the split
/// recovers F- and V-stable lattices of the planted ranks, and the minimal
/// polynomial agrees with brute-force divisor search on every basis vector.
/// Budget: 10 s.
#[test]
fn criterion_4_dieudonne_split() {
    let t0 = Instant::now();
    let ctx = PrimeCtx::new(5, 1, 20).unwrap();
    let mut rng = SplitMix(0xd1e0d0);
    let mut failures = Vec::new();

    for case in 0..20 {
        // planted blocks with distinct irreducible characteristic factors
        let mut factors: Vec<PPoly> = Vec::new();
        let mut rank = 0usize;
        let mut ord_rank = 0usize;
        let mut used_units = Vec::new();
        while rank < 2 + (rng.next() % 3) as usize {
            match rng.next() % 3 {
                0 => {
                    let mut u = rng.unit(5);
                    while used_units.contains(&u) {
                        u = rng.unit(5);
                    }
                    used_units.push(u);
                    factors.push(PPoly::from_i64(&ctx, &[-5 * u, 1]));
                    rank += 1;
                    ord_rank += 1;
                }
                1 => {
                    if factors.iter().any(|f| f.degree() == 2 && {
                        let c = f.coeffs();
                        ctx.eq_to(&c[1], &ctx.zero(), rat(20, 1))
                    }) {
                        continue;
                    }
                    factors.push(PPoly::from_i64(&ctx, &[5, 0, 1]));
                    rank += 2;
                }
                _ => {
                    if factors.iter().any(|f| f.degree() == 2 && {
                        let c = f.coeffs();
                        !ctx.eq_to(&c[1], &ctx.zero(), rat(20, 1))
                    }) {
                        continue;
                    }
                    factors.push(PPoly::from_i64(&ctx, &[10, 5, 1]));
                    rank += 2;
                }
            }
            if rank > 4 {
                // too big: retry from scratch
                factors.clear();
                rank = 0;
                ord_rank = 0;
                used_units.clear();
            }
        }

        // block companion matrix, conjugated by a random unimodular matrix
        let mut f_mat = linalg::Mat::zeros(&ctx, rank, rank);
        let mut off = 0usize;
        for fac in &factors {
            let c = dieudonne::companion(&ctx, fac);
            for i in 0..fac.degree() {
                for j in 0..fac.degree() {
                    f_mat.set(off + i, off + j, c.at(i, j).clone());
                }
            }
            off += fac.degree();
        }
        let g = random_unimodular(&ctx, rank, &mut rng);
        let g_inv = linalg::invert_unimodular(&ctx, &g).unwrap();
        let f_mat = g.mul(&ctx, &f_mat).mul(&ctx, &g_inv);

        let module = match dieudonne::DieudonneModule::new(&ctx, f_mat.clone()) {
            Ok(m) => m,
            Err(e) => {
                failures.push(format!("case {case}: module rejected: {e}"));
                continue;
            }
        };
        let split = match dieudonne::split_ord_nonord(&ctx, &module) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("case {case}: split failed: {e}"));
                continue;
            }
        };
        if split.ordinary.cols() != ord_rank || split.non_ordinary.cols() != rank - ord_rank {
            failures.push(format!(
                "case {case}: ranks ({}, {}) expected ({ord_rank}, {})",
                split.ordinary.cols(),
                split.non_ordinary.cols(),
                rank - ord_rank
            ));
        }
        let v_rep = dieudonne::check_fv(&ctx, &f_mat).unwrap();
        if !v_rep.pass() {
            failures.push(format!("case {case}: FV check failed"));
        }
        // F- and V-stability of both lattices
        let v_mat = {
            // reuse the charpoly route: V = p F^{-1}
            let cp = linalg::charpoly(&ctx, &f_mat);
            let q = PPoly::new(cp.coeffs()[1..].to_vec());
            let qf = linalg::poly_at_mat(&ctx, &q, &f_mat);
            let scale = ctx.mul_p_pow(&ctx.neg(&ctx.inv(&cp.coeffs()[0]).unwrap()), 1);
            qf.scale(&ctx, &scale)
        };
        for (name, basis) in [("ord", &split.ordinary), ("nonord", &split.non_ordinary)] {
            for (opname, op) in [("F", &f_mat), ("V", &v_mat)] {
                match dieudonne::lattice_stable_under(&ctx, basis, op, rat(12, 1)) {
                    Ok(true) => {}
                    _ => failures.push(format!("case {case}: {name} not {opname}-stable")),
                }
            }
        }

        // minimal polynomial vs brute-force divisor search on basis vectors
        for b in 0..rank {
            let mut e = vec![ctx.zero(); rank];
            e[b] = ctx.one();
            let got = match dieudonne::minimal_poly(&ctx, &module, &e) {
                Ok(p) => p,
                Err(err) => {
                    failures.push(format!("case {case}: minpoly e{b}: {err}"));
                    continue;
                }
            };
            let expect = brute_force_minpoly(&ctx, &f_mat, &factors, &e);
            if got.degree() != expect.degree() {
                failures.push(format!(
                    "case {case}: minpoly degree {} vs brute-force {}",
                    got.degree(),
                    expect.degree()
                ));
                continue;
            }
            for i in 0..=got.degree() {
                if !ctx.eq_to(&got.coeffs()[i], &expect.coeffs()[i], rat(10, 1)) {
                    failures.push(format!("case {case}: minpoly coeff {i} mismatch"));
                    break;
                }
            }
        }
    }

    let dt = t0.elapsed();
    let pass = failures.is_empty() && dt.as_secs_f64() < 10.0;
    report("4 (dieudonne split)", pass, &format!("(20 cases in {dt:.2?})"));
    assert!(pass, "failures: {failures:?}; runtime {dt:?}");
}

fn random_unimodular(ctx: &PrimeCtx, n: usize, rng: &mut SplitMix) -> linalg::Mat {
    let mut g = linalg::Mat::identity(ctx, n);
    for _ in 0..2 * n {
        let i = (rng.next() as usize) % n;
        let mut j = (rng.next() as usize) % n;
        if n > 1 {
            while j == i {
                j = (rng.next() as usize) % n;
            }
            let c = ctx.from_i64((rng.next() % 7) as i64 - 3);
            // row_i += c * row_j
            for k in 0..n {
                let x = ctx.add(g.at(i, k), &ctx.mul(&c, g.at(j, k)));
                g.set(i, k, x);
            }
        }
    }
    g
}

/// Minimal polynomial by searching over the planted factorization: the
/// lowest-degree product of distinct planted irreducible factors that
/// annihilates the vector.
fn brute_force_minpoly(
    ctx: &PrimeCtx,
    f_mat: &linalg::Mat,
    factors: &[PPoly],
    v: &[PadicScalar],
) -> PPoly {
    let k = factors.len();
    let mut best: Option<PPoly> = None;
    for mask in 1..(1u32 << k) {
        let mut prod = PPoly::one(ctx);
        for (idx, fac) in factors.iter().enumerate() {
            if mask & (1 << idx) != 0 {
                prod = prod.mul(ctx, fac);
            }
        }
        if let Some(b) = &best {
            if prod.degree() >= b.degree() {
                continue;
            }
        }
        let img = linalg::poly_at_mat(ctx, &prod, f_mat).mul_vec(ctx, v);
        let ok = img
            .iter()
            .all(|c| ctx.valuation(c).at_least(rat(12, 1)));
        if ok {
            best = Some(prod);
        }
    }
    best.unwrap_or_else(|| {
        let mut prod = PPoly::one(ctx);
        for fac in factors {
            prod = prod.mul(ctx, fac);
        }
        prod
    })
}

/// Criterion 5: genus formulas equal the Riemann-Hurwitz oracle on the full
/// grid (p, M, N) in {5,7,11} x {0,1,2} x {0,1,2}, exact integer equality,
/// including g = 7 for the first curve at p = 5. Budget: 1 s.
#[test]
fn criterion_5_genus_formulas() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    for p in [5u64, 7, 11] {
        for n in 0..3u32 {
            let g = genus_cn(p, n).unwrap();
            let (deg, ram) = rh_data_cn(p, n).unwrap();
            if g != rh_oracle(deg, &ram).unwrap() {
                failures.push(format!("C_N p={p} N={n}"));
            }
            for m in 0..3u32 {
                let g = genus_cmn(p, m, n).unwrap();
                let (deg, ram) = rh_data_cmn(p, m, n).unwrap();
                if g != rh_oracle(deg, &ram).unwrap() {
                    failures.push(format!("C_MN p={p} M={m} N={n}"));
                }
            }
        }
    }
    if genus_cn(5, 1).unwrap() != 7 {
        failures.push("g(C_1) != 7 at p=5".into());
    }
    let dt = t0.elapsed();
    let pass = failures.is_empty() && dt.as_secs_f64() < 1.0;
    report("5 (genus formulas)", pass, &format!("({dt:.2?})"));
    assert!(pass, "failures: {failures:?}; runtime {dt:?}");
}

/// Criterion 6: the worked two-sequence example. Decomposing against
/// q = (x-1)(x-2) must reproduce the component shapes
/// (-R_{n+1} + 2 R_n, 0) and (0, R'_{n+1} - R'_n) exactly, and the
/// matched-root determinant must vanish identically. Budget: 1 s.
#[test]
fn criterion_6_two_sequence_example() {
    let t0 = Instant::now();
    let ctx = PrimeCtx::new(5, 1, 20).unwrap();
    let mut rng = SplitMix(0xabcdef);
    let top = 3usize;
    let q = PPoly::from_i64(&ctx, &[2, -3, 1]); // (x-1)(x-2)

    // two vector-valued sequences in Lambda_n^2:
    //   R_n = proj(F) (norms multiply by 1), R'_n = proj(F') 2^{n+1}
    let rand_lambda = |rng: &mut SplitMix, level: usize| {
        let len = 5usize.pow(level as u32);
        let xs: Vec<PadicScalar> = (0..len)
            .map(|_| ctx.from_i64((rng.next() % 2000) as i64 - 1000))
            .collect();
        LambdaElem::from_x_coeffs(&ctx, level, &xs).unwrap()
    };
    let f1: Vec<LambdaElem> = (0..2).map(|_| rand_lambda(&mut rng, top)).collect();
    let f2: Vec<LambdaElem> = (0..2).map(|_| rand_lambda(&mut rng, top)).collect();

    let mut entries_r = Vec::new();
    let mut entries_rp = Vec::new();
    for n in 0..=top {
        entries_r.push(
            f1.iter()
                .map(|f| f.project(&ctx, n).unwrap())
                .collect::<Vec<_>>(),
        );
        let two_pow = ctx.pow_u64(&ctx.from_i64(2), n as u64 + 1);
        entries_rp.push(
            f2.iter()
                .map(|f| f.project(&ctx, n).unwrap().scale(&ctx, &two_pow))
                .collect::<Vec<_>>(),
        );
    }
    let seq_r = NormSequence::new(&ctx, 2, q.clone(), 0, entries_r).unwrap();
    let seq_rp = NormSequence::new(&ctx, 2, q.clone(), 0, entries_rp).unwrap();

    let mut failures = Vec::new();
    // both satisfy the order-2 recurrence
    for (name, seq) in [("R", &seq_r), ("R'", &seq_rp)] {
        for r in check_recurrence(&ctx, seq).unwrap() {
            if !r.residual.at_least(rat(20, 1)) {
                failures.push(format!("{name} recurrence at level {}", r.level));
            }
        }
    }

    let comps_r = decompose(&ctx, &seq_r).unwrap();
    let comps_rp = decompose(&ctx, &seq_rp).unwrap();
    // identify which component belongs to which root by its valuation data
    let root1_r = &comps_r[0];
    let root2_r = &comps_r[1];

    // literal expected shapes, computed straight from the sequences
    for (n, vecs) in &root1_r.levels {
        for coord in 0..2 {
            let rn = &seq_r.at_level(*n).unwrap()[coord];
            let rn1 = seq_r.at_level(*n + 1).unwrap()[coord]
                .project(&ctx, *n)
                .unwrap();
            let expect = rn.scale(&ctx, &ctx.from_i64(2)).sub(&ctx, &rn1);
            let diff = vecs[coord].parts[0].sub(&ctx, &expect);
            if !diff.is_zero_at(&ctx, rat(20, 1)) {
                failures.push(format!("R root-1 shape at level {n}"));
            }
        }
    }
    for (n, vecs) in &root2_r.levels {
        for coord in 0..2 {
            if !vecs[coord].is_zero_at(&ctx, rat(20, 1)) {
                failures.push(format!("R root-2 component not zero at level {n}"));
            }
        }
    }
    let root1_rp = &comps_rp[0];
    let root2_rp = &comps_rp[1];
    for (n, vecs) in &root1_rp.levels {
        for coord in 0..2 {
            if !vecs[coord].is_zero_at(&ctx, rat(20, 1)) {
                failures.push(format!("R' root-1 component not zero at level {n}"));
            }
        }
    }
    for (n, vecs) in &root2_rp.levels {
        for coord in 0..2 {
            let rn = &seq_rp.at_level(*n).unwrap()[coord];
            let rn1 = seq_rp.at_level(*n + 1).unwrap()[coord]
                .project(&ctx, *n)
                .unwrap();
            let expect = rn1.sub(&ctx, rn);
            let diff = vecs[coord].parts[0].sub(&ctx, &expect);
            if !diff.is_zero_at(&ctx, rat(20, 1)) {
                failures.push(format!("R' root-2 shape at level {n}"));
            }
        }
    }

    // matched-root determinant vanishes identically
    let g_tor = LambdaElem::one(&ctx, 1);
    let out = assemble_l(&ctx, &[root1_r, root1_rp], &g_tor, 1).unwrap();
    if !out.det.is_zero_at(&ctx, rat(20, 1)) {
        failures.push("matched-root determinant is not zero".into());
    }
    if out.lowest.is_some() {
        failures.push("zero determinant reported a nonvanishing coefficient".into());
    }

    let dt = t0.elapsed();
    let pass = failures.is_empty() && dt.as_secs_f64() < 1.0;
    report("6 (two-sequence example)", pass, &format!("({dt:.2?})"));
    assert!(pass, "failures: {failures:?}; runtime {dt:?}");
}

/// Criterion 7: synthesize-then-decompose round trip for
/// q in {x-1, x-2, (x-1)(x-2), x^2+p}, 20 random cases; components are
/// recovered modulo the level ideal up to a p-power scaling c <= p^2.
/// Budget: 5 s.
#[test]
fn criterion_7_decompose_round_trip() {
    let t0 = Instant::now();
    let ctx = PrimeCtx::new(5, 1, 20).unwrap();
    let mut rng = SplitMix(0x707e57);
    let mut failures = Vec::new();
    let top = 3usize;

    let qs: [&[i64]; 4] = [&[-1, 1], &[-2, 1], &[2, -3, 1], &[5, 0, 1]];
    for case in 0..20 {
        let q = PPoly::from_i64(&ctx, qs[case % 4]);
        let e = q.degree();
        let (field, roots) = dlab_core::iwasawa::roots_of(&ctx, &q).unwrap();

        // random f_alpha per root (conjugate pair for the quadratic case, so
        // the synthesized sequence is rational)
        let s_dim = 1usize;
        let rand_lambda = |rng: &mut SplitMix, level: usize| {
            let len = 5usize.pow(level as u32);
            let xs: Vec<PadicScalar> = (0..len)
                .map(|_| ctx.from_i64((rng.next() % 1000) as i64 - 500))
                .collect();
            LambdaElem::from_x_coeffs(&ctx, level, &xs).unwrap()
        };
        let f_parts: Vec<ExtLambda> = if field.degree() == 1 {
            roots
                .iter()
                .map(|_| ExtLambda {
                    parts: vec![rand_lambda(&mut rng, top)],
                })
                .collect()
        } else {
            // f and its conjugate (t -> -b1 - t; here b1 = 0 so (a0, -a1))
            let a0 = rand_lambda(&mut rng, top);
            let a1 = rand_lambda(&mut rng, top);
            vec![
                ExtLambda {
                    parts: vec![a0.clone(), a1.clone()],
                },
                ExtLambda {
                    parts: vec![a0, a1.neg(&ctx)],
                },
            ]
        };

        // synthesize R_n = sum_alpha f_alpha alpha^{n+1} (rational part)
        let mut entries = Vec::new();
        for n in 0..=top {
            let mut acc = ExtLambda::zero(&ctx, &field, n);
            for (root, f) in roots.iter().zip(&f_parts) {
                let a_pow = field.pow(&ctx, root, n as u64 + 1);
                let term = f.project(&ctx, n).unwrap().scale_rf(&ctx, &field, &a_pow);
                acc = acc.add(&ctx, &term);
            }
            // higher field coordinates must cancel for conjugate data
            for part in &acc.parts[1..] {
                if !part.is_zero_at(&ctx, rat(14, 1)) {
                    failures.push(format!("case {case}: synthesis not rational"));
                }
            }
            entries.push(vec![acc.parts[0].clone()]);
        }
        let seq = NormSequence::new(&ctx, s_dim, q.clone(), 0, entries).unwrap();
        let comps = decompose(&ctx, &seq).unwrap();
        if comps.len() != e {
            failures.push(format!("case {case}: {} components", comps.len()));
            continue;
        }

        // recovered = f_alpha * alpha^{n+1} up to p-power c <= p^2
        let c_budget = rat(2, 1);
        for (ci, comp) in comps.iter().enumerate() {
            for (n, vecs) in &comp.levels {
                let a_pow = field.pow(&ctx, &roots[ci], *n as u64 + 1);
                let expect = f_parts[ci]
                    .project(&ctx, *n)
                    .unwrap()
                    .scale_rf(&ctx, &field, &a_pow);
                let diff = vecs[0].sub(&ctx, &expect);
                // tolerate the reported scaling: p^2 * diff must vanish at
                // the remaining precision
                let ok = diff.min_val(&ctx).at_least(rat(12, 1) - c_budget);
                if !ok {
                    failures.push(format!(
                        "case {case} root {ci} level {n}: diff valuation {}",
                        diff.min_val(&ctx)
                    ));
                }
            }
        }
    }

    let dt = t0.elapsed();
    let pass = failures.is_empty() && dt.as_secs_f64() < 5.0;
    report("7 (decompose round trip)", pass, &format!("(20 cases in {dt:.2?})"));
    assert!(pass, "failures: {failures:?}; runtime {dt:?}");
}

/// Criterion 8: the bound evaluator reproduces the geometric sums against a
/// direct loop, and the curve preset coefficient equals genus times field
/// degree on the criterion-5 grid. Budget: 1 s.
#[test]
fn criterion_8_bound_evaluator() {
    let t0 = Instant::now();
    let mut failures = Vec::new();

    // direct-loop oracle over the default grid
    for p in [5u64, 7] {
        for s in 1..=3u64 {
            for (ln, ld) in [(0i64, 1i64), (1, 2), (1, 3), (1, 1)] {
                for c0 in [0i64, 1] {
                    let input = BoundInput::uniform(p, s, rat(ln, ld), c0).unwrap();
                    for n in 0..6u32 {
                        let rep = selmer_bound(&input, n).unwrap();
                        // oracle
                        let mut expect = num_bigint::BigUint::from(0u32);
                        for _ in 0..s {
                            let lam = rat(ln, ld) * rat(n as i64, 1);
                            let m = (n as i64 - lam.floor().to_integer() - c0).clamp(0, n as i64)
                                as u32;
                            for k in m..n {
                                let mut pk = num_bigint::BigUint::from(1u32);
                                for _ in 0..k {
                                    pk *= p;
                                }
                                expect += pk * (p - 1);
                            }
                        }
                        if rep.sum != expect {
                            failures.push(format!("p={p} s={s} lam={ln}/{ld} c0={c0} n={n}"));
                        }
                    }
                }
            }
        }
    }

    // preset coefficient = genus * field degree on the criterion-5 grid
    for p in [5u64, 7, 11] {
        for n in 0..3u32 {
            let deg = 4u64;
            let input = jacobian_preset(p, CurveKind::Cn { n }, deg, rat(1, 2), 0).unwrap();
            if input.s as u128 != genus_cn(p, n).unwrap() * deg as u128 {
                failures.push(format!("preset p={p} N={n}"));
            }
        }
    }

    let dt = t0.elapsed();
    let pass = failures.is_empty() && dt.as_secs_f64() < 1.0;
    report("8 (bound evaluator)", pass, &format!("({dt:.2?})"));
    assert!(pass, "failures: {failures:?}; runtime {dt:?}");
}

/// The root-field helper used by criterion 7 needs to be publicly reachable;
/// compile-time assertion that the re-exports stay intact.
#[allow(dead_code)]
fn _api_surface(ctx: &PrimeCtx) {
    let _ = RootField::rational(ctx);
    let _: Option<Val> = None;
}
