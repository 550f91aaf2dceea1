use crate::error::{Error, Result};
use crate::geninv::{self, core_inverse, drazin, index, one_three, spectral_idempotent, verify_defining_triple};
use crate::matrix::{same_column_space_against, ComplexMatrix, TolerancePolicy};

use super::{
    block_matrix, cert_check, eq_check, flag, idem_norm, powers, product_eq_check, product_zero_check, pseudo,
    require_same_square, search_window, triangular_sum, zero_check, Builder, Check, CheckValue, SumSearch,
    TheoremId, TheoremReport,
};

/// `ab = ba` and `a*b = ba*`.
pub(super) fn commuting_hyps(b: &mut Builder, a: &ComplexMatrix, x: &ComplexMatrix, tol: &TolerancePolicy) -> Result<()> {
    let a_star = a.conjugate_transpose();
    b.hyp(product_eq_check("ab=ba", (a, x), (x, a), tol)?);
    b.hyp(product_eq_check("a*b=ba*", (&a_star, x), (x, &a_star), tol)?);
    Ok(())
}

pub fn check_lemma_2_1(a: &ComplexMatrix, b: &ComplexMatrix, tol: &TolerancePolicy) -> Result<TheoremReport> {
    require_same_square("check_lemma_2_1", a, b)?;
    let mut r = Builder::new(TheoremId::L2_1, tol);
    commuting_hyps(&mut r, a, b, tol)?;
    let pa = pseudo(a, tol)?;
    r.concl(cert_check("a^D certified", &pa, tol));
    r.concl(product_eq_check("a^D b = b a^D", (&pa.inverse, b), (b, &pa.inverse), tol)?);
    r.witness("a_pcore", &pa.inverse);
    Ok(r.finish())
}

pub fn check_lemma_2_2(a: &ComplexMatrix, b: &ComplexMatrix, tol: &TolerancePolicy) -> Result<TheoremReport> {
    require_same_square("check_lemma_2_2", a, b)?;
    let mut r = Builder::new(TheoremId::L2_2, tol);
    commuting_hyps(&mut r, a, b, tol)?;
    let pa = pseudo(a, tol)?;
    let pb = pseudo(b, tol)?;
    let pab = pseudo(&(a * b), tol)?;
    r.concl(cert_check("a^D certified", &pa, tol));
    r.concl(cert_check("b^D certified", &pb, tol));
    r.concl(cert_check("(ab)^D certified", &pab, tol));
    let prod = &pa.inverse * &pb.inverse;
    r.concl(eq_check("(ab)^D = a^D b^D", &pab.inverse, &prod, tol)?);
    r.witness("ab_pcore", &pab.inverse);
    r.witness("a_pcore_b_pcore", prod);
    Ok(r.finish())
}

pub fn check_lemma_2_3(a: &ComplexMatrix, b: &ComplexMatrix, tol: &TolerancePolicy) -> Result<TheoremReport> {
    require_same_square("check_lemma_2_3", a, b)?;
    let mut r = Builder::new(TheoremId::L2_3, tol);
    r.hyp(product_zero_check("ab=0", a, b, tol)?);
    r.hyp(product_zero_check("ba=0", b, a, tol)?);
    r.hyp(product_zero_check("a*b=0", &a.conjugate_transpose(), b, tol)?);

    let sum = a + b;
    let ps = pseudo(&sum, tol)?;
    r.concl(cert_check("(a+b)^D certified", &ps, tol));
    r.witness("sum_pcore", &ps.inverse);

    // Informational: how well a^D + b^D solves the triple of a + b.
    let candidate = &pseudo(a, tol)?.inverse + &pseudo(b, tol)?.inverse;
    let k = index(&sum, tol)?.max(1);
    let res = verify_defining_triple(&sum, &candidate, k, tol)?;
    for (label, v) in res {
        r.witness(&format!("a^D+b^D residual {label}"), v);
    }
    Ok(r.finish())
}

pub fn check_lemma_2_4(a: &ComplexMatrix, b: &ComplexMatrix, tol: &TolerancePolicy) -> Result<TheoremReport> {
    require_same_square("check_lemma_2_4", a, b)?;
    let n = a.rows();
    let mut r = Builder::new(TheoremId::L2_4, tol);
    let pa = pseudo(a, tol)?;
    let x = &pa.inverse;
    let id = ComplexMatrix::identity(n);
    let left = &id - &(x * a);
    let right = &id - &(a * x);
    let c1 = zero_check("(1-a^D a)b=0", &(&left * b), idem_norm(&left) * b.frobenius_norm(), tol);
    let c2 = zero_check("(1-a a^D)b=0", &(&right * b), idem_norm(&right) * b.frobenius_norm(), tol);
    let (t1, t2) = (c1.pass, c2.pass);
    r.concl(cert_check("a^D certified", &pa, tol));
    r.concl(flag("conditions agree", t1 == t2));
    r.witness("left_condition", t1);
    r.witness("right_condition", t2);
    r.witness("left_residual", residual_of(&c1));
    r.witness("right_residual", residual_of(&c2));
    Ok(r.finish())
}

fn residual_of(c: &Check) -> f64 {
    match c.value {
        CheckValue::Residual(v) => v,
        CheckValue::Flag(b) => f64::from(u8::from(!b)),
    }
}

/// Search window `[max(i(a), 1), i(a) + i(d) + max(na, nd)]` for the
/// triangular sum condition.
pub fn lemma_2_5_window(ia: usize, id: usize, na: usize, nd: usize) -> (usize, usize) {
    (ia.max(1), ia + id + na.max(nd))
}

/// Past `m0 >= i(a)` the sum only picks up right factors of `d`, so it
/// vanishes somewhere iff it vanishes at `m0 + i(d)`. Searching beyond that
/// only lets the term scale outgrow a nonzero sum.
pub(super) fn settled_top(m0: usize, id: usize, hi: usize) -> usize {
    (m0 + id).min(hi)
}

pub(super) struct TriangularSum {
    pub search: SumSearch,
    pub at_index: Option<bool>,
}

/// Searches the triangular sum `sum a^{i-1} a^pi b d^{m-i}` over the Lemma
/// window; also reports whether it vanishes at `m = i(a)` when `i(a) >= 1`.
pub(super) fn triangular_search(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    d: &ComplexMatrix,
    tol: &TolerancePolicy,
) -> Result<TriangularSum> {
    let ia = index(a, tol)?;
    let id = index(d, tol)?;
    let (lo, hi) = lemma_2_5_window(ia, id, a.rows(), d.rows());
    let hi = settled_top(lo, id, hi);
    let a_pi = spectral_idempotent(a, tol)?;
    let ap = powers(a, hi, tol)?;
    let dp = powers(d, hi, tol)?;
    let search = search_window(lo, hi, tol, |m| triangular_sum(&ap, &a_pi, b, &dp, m));
    let at_index = (ia >= 1).then(|| {
        let (s, scale) = triangular_sum(&ap, &a_pi, b, &dp, ia);
        crate::matrix::vanishes(&s, scale, tol)
    });
    Ok(TriangularSum { search, at_index })
}

pub(super) fn sum_check(label: &str, s: &SumSearch) -> Check {
    Check {
        label: label.to_string(),
        value: CheckValue::Residual(if s.best.is_finite() { s.best } else { 0.0 }),
        pass: s.found.is_some(),
    }
}

pub(super) fn record_search(r: &mut Builder, s: &SumSearch) {
    if let Some(m) = s.found {
        r.witness("m", m);
    }
    r.witness("m_window_lo", s.window.0);
    r.witness("m_window_hi", s.window.1);
}

pub(crate) fn require_triangular_shapes(
    op: &'static str,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    d: &ComplexMatrix,
) -> Result<()> {
    let na = a.require_square(op)?;
    let nd = d.require_square(op)?;
    if b.shape() != (na, nd) {
        return Err(Error::Dimension {
            op,
            left: (na, nd),
            right: b.shape(),
        });
    }
    Ok(())
}

/// Forward direction: the triangular sum condition makes the pseudo core
/// inverse of `[[a, b], [0, d]]` block upper-triangular.
pub fn check_lemma_2_5(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    d: &ComplexMatrix,
    tol: &TolerancePolicy,
) -> Result<TheoremReport> {
    require_triangular_shapes("check_lemma_2_5", a, b, d)?;
    let (na, nd) = (a.rows(), d.rows());
    let mut r = Builder::new(TheoremId::L2_5a, tol);
    r.hyp(cert_check("a^D certified", &pseudo(a, tol)?, tol));
    r.hyp(cert_check("d^D certified", &pseudo(d, tol)?, tol));
    let ts = triangular_search(a, b, d, tol)?;
    r.hyp(sum_check("sum a^(i-1) a^pi b d^(m-i) = 0 for some m", &ts.search));
    record_search(&mut r, &ts.search);

    let x = block_matrix(a, b, &ComplexMatrix::zeros(nd, na), d)?;
    let px = pseudo(&x, tol)?;
    r.concl(cert_check("x^D certified", &px, tol));
    let lower_left = px.inverse.block(na, 0, nd, na);
    r.concl(inverse_block_zero("lower-left of x^D = 0", &lower_left, &px.inverse, tol));
    r.witness("x_pcore", &px.inverse);
    Ok(r.finish())
}

/// A block of a computed inverse carries its conditioning, so it is compared
/// to zero like any computed equality.
fn inverse_block_zero(label: &str, block: &ComplexMatrix, whole: &ComplexMatrix, tol: &TolerancePolicy) -> Check {
    let norm = whole.frobenius_norm();
    let value = if norm > 0.0 { block.frobenius_norm() / norm } else { 0.0 };
    Check {
        label: label.to_string(),
        value: CheckValue::Residual(value),
        pass: value <= tol.eq_rel_tol,
    }
}

/// Converse direction on a block upper-triangular `x` split after `split`
/// rows and columns.
pub fn check_lemma_2_5_converse(x: &ComplexMatrix, split: usize, tol: &TolerancePolicy) -> Result<TheoremReport> {
    let n = x.require_square("check_lemma_2_5_converse")?;
    if split == 0 || split >= n {
        return Err(Error::Parameter(format!("split must lie in 1..{n}, got {split}")));
    }
    let (na, nd) = (split, n - split);
    let lower = x.block(na, 0, nd, na);
    if !crate::matrix::vanishes(&lower, x.frobenius_norm(), tol) {
        return Err(Error::Precondition("lower-left block of x is nonzero".into()));
    }
    let a = x.block(0, 0, na, na);
    let b = x.block(0, na, na, nd);
    let d = x.block(na, na, nd, nd);

    let mut r = Builder::new(TheoremId::L2_5b, tol);
    let px = pseudo(x, tol)?;
    r.hyp(cert_check("x^D certified", &px, tol));
    let lower_pc = px.inverse.block(na, 0, nd, na);
    r.hyp(inverse_block_zero("lower-left of x^D = 0", &lower_pc, &px.inverse, tol));
    r.witness("x_pcore", &px.inverse);

    r.concl(cert_check("a^D certified", &pseudo(&a, tol)?, tol));
    r.concl(cert_check("d^D certified", &pseudo(&d, tol)?, tol));
    let ts = triangular_search(&a, &b, &d, tol)?;
    r.concl(sum_check("sum a^(i-1) a^pi b d^(m-i) = 0 for some m", &ts.search));
    record_search(&mut r, &ts.search);
    if let Some(v) = ts.at_index {
        r.witness("sum_vanishes_at_m_eq_index", v);
    }
    Ok(r.finish())
}

/// The existence chain for one matrix: pseudo core certificate, Drazin plus
/// (1,3) of the power, range equalities, core inverse of a power.
pub fn check_theorem_1_1(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<TheoremReport> {
    a.require_square("check_theorem_1_1")?;
    let mut r = Builder::new(TheoremId::T1_1, tol);
    let k = index(a, tol)?;
    let kk = k.max(1);
    r.witness("index", k);

    let pc = pseudo(a, tol)?;
    r.concl(cert_check("(1) a^D certified", &pc, tol));

    let dz = drazin(a, tol)?;
    r.concl(cert_check("(2) Drazin inverse certified", &dz, tol));
    let ak = geninv::settled_pow(a, k, tol)?;
    r.concl(cert_check("(2) (a^k)^(1,3) certified", &one_three(&ak, tol)?, tol));

    let akk = geninv::settled_pow(a, kk, tol)?;
    let x = &pc.inverse;
    let ak_scale = a.spectral_norm().powi(kk as i32);
    let x_scale = x.spectral_norm();
    r.concl(flag("(3) R(a^k) = R(x)", same_column_space_against(&akk, ak_scale, x, x_scale, tol)?));
    r.concl(flag(
        "(3) R(a^k) = R(x*)",
        same_column_space_against(&akk, ak_scale, &x.conjugate_transpose(), x_scale, tol)?,
    ));

    let km = geninv::index(&akk, tol)?;
    r.witness("index_of_power", km);
    match core_inverse(&akk, tol) {
        Ok(ci) => {
            r.concl(cert_check("(4) core inverse of a^m certified", &ci, tol));
        }
        Err(_) => {
            r.concl(flag("(4) core inverse of a^m exists", false));
        }
    }
    r.witness("pcore", &pc.inverse);
    Ok(r.finish())
}
