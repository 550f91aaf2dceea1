//! Pseudo core inverse of the block operator `M = [[A, B], [C, D]]`.
//!
//! Each corollary is checked on its own hypotheses. The dual theorem is also
//! run on `M* = [[A*, C*], [B*, D*]]` and its verdict recorded, and the
//! conclusion certifies both `M` and `M*`.

use crate::error::Result;
use crate::geninv::index;
use crate::matrix::{is_nilpotent_against, product, ComplexMatrix, TolerancePolicy};

use super::lemmas::{record_search, sum_check, triangular_search};
use super::{
    block_matrix, cert_check, eq_check, flag, idem_norm, powers, product_eq_check, product_zero_check,
    pseudo,
    require_block_shapes, zero_check, Builder, TheoremId, TheoremReport, Verdict,
};
use crate::geninv::spectral_idempotent;

struct Blocks<'a> {
    a: &'a ComplexMatrix,
    b: &'a ComplexMatrix,
    c: &'a ComplexMatrix,
    d: &'a ComplexMatrix,
    a_star: ComplexMatrix,
    b_star: ComplexMatrix,
    c_star: ComplexMatrix,
    d_star: ComplexMatrix,
}

impl<'a> Blocks<'a> {
    fn new(
        op: &'static str,
        a: &'a ComplexMatrix,
        b: &'a ComplexMatrix,
        c: &'a ComplexMatrix,
        d: &'a ComplexMatrix,
    ) -> Result<Self> {
        require_block_shapes(op, a, b, c, d)?;
        Ok(Blocks {
            a,
            b,
            c,
            d,
            a_star: a.conjugate_transpose(),
            b_star: b.conjugate_transpose(),
            c_star: c.conjugate_transpose(),
            d_star: d.conjugate_transpose(),
        })
    }

    fn m(&self) -> Result<ComplexMatrix> {
        block_matrix(self.a, self.b, self.c, self.d)
    }
}

/// Nilpotency of a product chain, judged against the product of the factor
/// norms.
fn nilpotent_check(r: &mut Builder, label: &str, factors: &[&ComplexMatrix], tol: &TolerancePolicy) -> bool {
    let p = product(factors);
    let scale: f64 = factors.iter().map(|f| f.frobenius_norm()).product();
    let nil = is_nilpotent_against(&p, scale, tol);
    r.witness("nilpotent_product", &p);
    r.hyp(flag(label, nil))
}

fn certify_m(r: &mut Builder, m: &ComplexMatrix, label: &str, name: &str, tol: &TolerancePolicy) -> Result<()> {
    let pm = pseudo(m, tol)?;
    r.concl(cert_check(label, &pm, tol));
    r.witness(name, &pm.inverse);
    for (k, v) in &pm.residuals {
        r.witness(&format!("{name} residual {k}"), *v);
    }
    Ok(())
}

fn record_dual(r: &mut Builder, name: &str, dual: &TheoremReport) {
    r.witness(&format!("{name}_hypotheses_met"), dual.verdict != Verdict::HypothesesNotMet);
    r.witness(&format!("{name}_pass"), dual.verdict == Verdict::Pass);
}

/// `AB = BD`, `DC = CA`, `A*B = BD*`, `D*C = CA*`.
fn four_intertwinings(r: &mut Builder, k: &Blocks, tol: &TolerancePolicy) -> Result<()> {
    r.hyp(product_eq_check("AB=BD", (k.a, k.b), (k.b, k.d), tol)?);
    r.hyp(product_eq_check("DC=CA", (k.d, k.c), (k.c, k.a), tol)?);
    r.hyp(product_eq_check("A*B=BD*", (&k.a_star, k.b), (k.b, &k.d_star), tol)?);
    r.hyp(product_eq_check("D*C=CA*", (&k.d_star, k.c), (k.c, &k.a_star), tol)?);
    Ok(())
}

pub fn check_theorem_4_1(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    tol: &TolerancePolicy,
) -> Result<TheoremReport> {
    let k = Blocks::new("check_theorem_4_1", a, b, c, d)?;
    let mut r = Builder::new(TheoremId::T4_1, tol);
    four_intertwinings(&mut r, &k, tol)?;
    let ad = pseudo(a, tol)?.inverse;
    let dd = pseudo(d, tol)?.inverse;
    nilpotent_check(&mut r, "A^D B D^D C nilpotent", &[&ad, b, &dd, c], tol);
    certify_m(&mut r, &k.m()?, "M^D certified", "M_pcore", tol)?;
    Ok(r.finish())
}

pub fn check_corollary_4_2(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    tol: &TolerancePolicy,
) -> Result<TheoremReport> {
    let k = Blocks::new("check_corollary_4_2", a, b, c, d)?;
    let mut r = Builder::new(TheoremId::C4_2, tol);
    four_intertwinings(&mut r, &k, tol)?;
    let ad = pseudo(a, tol)?.inverse;
    let dd = pseudo(d, tol)?.inverse;
    nilpotent_check(&mut r, "B D^D C A^D nilpotent", &[b, &dd, c, &ad], tol);

    let dual = check_theorem_4_1(&k.a_star, &k.c_star, &k.b_star, &k.d_star, tol)?;
    record_dual(&mut r, "dual_theorem_4_1", &dual);
    let m = k.m()?;
    certify_m(&mut r, &m, "M^D certified", "M_pcore", tol)?;
    certify_m(&mut r, &m.conjugate_transpose(), "(M*)^D certified", "M_star_pcore", tol)?;
    Ok(r.finish())
}

/// `Q^D = Q (Q^2)^D` for the anti-diagonal part `Q = [[0, B], [C, 0]]`.
fn anti_diagonal_identity(r: &mut Builder, k: &Blocks, tol: &TolerancePolicy) -> Result<()> {
    let (na, nd) = (k.a.rows(), k.d.rows());
    let q = block_matrix(&ComplexMatrix::zeros(na, na), k.b, k.c, &ComplexMatrix::zeros(nd, nd))?;
    let pq = pseudo(&q, tol)?;
    let pq2 = pseudo(&(&q * &q), tol)?;
    let rhs = &q * &pq2.inverse;
    r.concl(eq_check("Q^D = Q (Q^2)^D", &pq.inverse, &rhs, tol)?);
    r.witness("Q_pcore", &pq.inverse);
    Ok(())
}

pub fn check_theorem_4_3(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    tol: &TolerancePolicy,
) -> Result<TheoremReport> {
    let k = Blocks::new("check_theorem_4_3", a, b, c, d)?;
    let mut r = Builder::new(TheoremId::T4_3, tol);
    r.hyp(product_eq_check("AB=BD", (a, b), (b, d), tol)?);
    r.hyp(product_eq_check("DC=CA", (d, c), (c, a), tol)?);
    r.hyp(product_eq_check("B*A=DB*", (&k.b_star, a), (d, &k.b_star), tol)?);
    let cb = pseudo(&(c * b), tol)?.inverse;
    let bc = pseudo(&(b * c), tol)?.inverse;
    nilpotent_check(&mut r, "B (CB)^D D C (BC)^D A nilpotent", &[b, &cb, d, c, &bc, a], tol);
    certify_m(&mut r, &k.m()?, "M^D certified", "M_pcore", tol)?;
    anti_diagonal_identity(&mut r, &k, tol)?;
    Ok(r.finish())
}

/// Read conformably: `AC* = C*D` and `A (BC)^D B D (CB)^D C` nilpotent, the
/// hypotheses that the dual of the 4.3 check produces on `M*`.
pub fn check_corollary_4_4(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    tol: &TolerancePolicy,
) -> Result<TheoremReport> {
    let k = Blocks::new("check_corollary_4_4", a, b, c, d)?;
    let mut r = Builder::new(TheoremId::C4_4, tol);
    r.hyp(product_eq_check("AB=BD", (a, b), (b, d), tol)?);
    r.hyp(product_eq_check("DC=CA", (d, c), (c, a), tol)?);
    r.hyp(product_eq_check("AC*=C*D", (a, &k.c_star), (&k.c_star, d), tol)?);
    let bc = pseudo(&(b * c), tol)?.inverse;
    let cb = pseudo(&(c * b), tol)?.inverse;
    nilpotent_check(&mut r, "A (BC)^D B D (CB)^D C nilpotent", &[a, &bc, b, d, &cb, c], tol);

    let dual = check_theorem_4_3(&k.a_star, &k.c_star, &k.b_star, &k.d_star, tol)?;
    record_dual(&mut r, "dual_theorem_4_3", &dual);
    let m = k.m()?;
    certify_m(&mut r, &m, "M^D certified", "M_pcore", tol)?;
    certify_m(&mut r, &m.conjugate_transpose(), "(M*)^D certified", "M_star_pcore", tol)?;
    Ok(r.finish())
}

/// The sum hypothesis is the triangular sum `sum_{i=1}^{m} A^{i-1} A^pi B
/// D^{m-i}` vanishing for some `m` in the triangular-lemma window; whether it
/// vanishes at `m = i(A)` is recorded alongside.
pub fn check_theorem_4_5(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    tol: &TolerancePolicy,
) -> Result<TheoremReport> {
    let k = Blocks::new("check_theorem_4_5", a, b, c, d)?;
    let mut r = Builder::new(TheoremId::T4_5, tol);
    r.hyp(product_zero_check("BC=0", b, c, tol)?);
    r.hyp(product_zero_check("CB=0", c, b, tol)?);
    r.hyp(product_eq_check("CA=DC", (c, a), (d, c), tol)?);
    r.hyp(product_eq_check("AC*=C*D", (a, &k.c_star), (&k.c_star, d), tol)?);
    let ts = triangular_search(a, b, d, tol)?;
    r.hyp(sum_check("sum A^(i-1) A^pi B D^(m-i) = 0 for some m", &ts.search));
    record_search(&mut r, &ts.search);
    // With i(A) = 0 the sum up to i(A) is empty.
    r.witness("sum_vanishes_at_m_eq_index", ts.at_index.unwrap_or(true));
    certify_m(&mut r, &k.m()?, "M^D certified", "M_pcore", tol)?;
    Ok(r.finish())
}

pub fn check_corollary_4_6(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    tol: &TolerancePolicy,
) -> Result<TheoremReport> {
    let k = Blocks::new("check_corollary_4_6", a, b, c, d)?;
    let mut r = Builder::new(TheoremId::C4_6, tol);
    r.hyp(product_zero_check("BC=0", b, c, tol)?);
    r.hyp(product_zero_check("CB=0", c, b, tol)?);
    r.hyp(product_eq_check("AB=BD", (a, b), (b, d), tol)?);
    r.hyp(product_eq_check("A*B=BD*", (&k.a_star, b), (b, &k.d_star), tol)?);

    let ia = index(a, tol)?;
    let a_pi = spectral_idempotent(a, tol)?;
    let ap = powers(a, ia, tol)?;
    let mut sum = ComplexMatrix::zeros(c.rows(), a.cols());
    let mut scale = 0.0;
    for i in 1..=ia {
        sum = &sum + &(&(c * &ap[i - 1]) * &a_pi);
        scale += c.frobenius_norm() * ap[i - 1].frobenius_norm() * idem_norm(&a_pi);
    }
    r.hyp(zero_check("sum C A^(i-1) A^pi = 0", &sum, scale, tol));

    let dual = check_theorem_4_5(&k.a_star, &k.c_star, &k.b_star, &k.d_star, tol)?;
    record_dual(&mut r, "dual_theorem_4_5", &dual);
    let m = k.m()?;
    certify_m(&mut r, &m, "M^D certified", "M_pcore", tol)?;
    certify_m(&mut r, &m.conjugate_transpose(), "(M*)^D certified", "M_star_pcore", tol)?;
    Ok(r.finish())
}
