use crate::error::Result;
use crate::geninv::{index, is_star_dmp, spectral_idempotent};
use crate::matrix::{c64, rank_against, vanishes, ComplexMatrix, TolerancePolicy};

use super::lemmas::{commuting_hyps, settled_top};
use super::{
    cert_check, eq_check, flag, idem_norm, pierce_decompose, powers, pseudo, require_same_square, search_window,
    zero_check, Builder, Check, CheckValue, TheoremId, TheoremReport,
};

/// Additive formula for commuting `a`, `b` (with `a*b = ba*`): clause (1)
/// `a + b` has a pseudo core inverse with `a^pi (a+b)^D a a^D = 0`, clause (2)
/// `1 + a^D b` has one and the bracketed sum vanishes for some `m`.
/// Both clauses are evaluated independently; the conclusion is that they agree.
pub fn check_theorem_3_1(a: &ComplexMatrix, b: &ComplexMatrix, tol: &TolerancePolicy) -> Result<TheoremReport> {
    let n = require_same_square("check_theorem_3_1", a, b)?;
    let mut r = Builder::new(TheoremId::T3_1, tol);
    commuting_hyps(&mut r, a, b, tol)?;

    let id = ComplexMatrix::identity(n);
    let pa = pseudo(a, tol)?;
    let ad = &pa.inverse;
    let a_pi = spectral_idempotent(a, tol)?;
    let p = a * ad;
    let q = ad * a;

    // Clause (1).
    let s = a + b;
    let ps = pseudo(&s, tol)?;
    let ann = &(&(&a_pi * &ps.inverse) * a) * ad;
    let ann_scale = idem_norm(&a_pi) * ps.inverse.frobenius_norm() * idem_norm(&p);
    let ann_zero = vanishes(&ann, ann_scale, tol);
    let lhs = ps.is_certified(tol) && ann_zero;

    // Clause (2).
    let y = &id + &(ad * b);
    let py = pseudo(&y, tol)?;
    let iy = index(&y, tol)?;
    let y_pi = spectral_idempotent(&y, tol)?;
    let bracket = &p - &q;
    let middle = &(&y_pi * a) * &bracket;
    let middle_ref = idem_norm(&y_pi) * a.frobenius_norm() * (idem_norm(&p) + idem_norm(&q));
    // Pierce corners of a + b against p; the terms die once i exceeds the
    // index of the upper corner.
    let p_perp = &id - &p;
    let upper = index(&(&(&p * &s) * &p), tol)?;
    let lower = index(&(&(&p_perp * &s) * &p_perp), tol)?;
    let lo = iy.max(1);
    let hi = settled_top(lo.max(upper), lower, iy + n);
    let yp = powers(&y, hi, tol)?;
    let ap = powers(a, hi, tol)?;
    let sp = powers(&s, hi, tol)?;
    let search = search_window(lo, hi, tol, |m| {
        let mut sum = ComplexMatrix::zeros(n, n);
        let mut scale = 0.0;
        for i in 1..=m {
            let left = &yp[i - 1] * &ap[i - 1];
            sum = &sum + &(&(&left * &middle) * &sp[m - i]);
            scale += yp[i - 1].frobenius_norm() * ap[i - 1].frobenius_norm() * middle_ref * sp[m - i].frobenius_norm();
        }
        (sum, scale)
    });
    let rhs = py.is_certified(tol) && search.found.is_some();

    r.concl(flag("clause (1) <=> clause (2)", lhs == rhs));

    // Corner form of the same annihilation: p^pi (a+b)^D p with p = a a^D.
    let consistent = match pierce_decompose(&ps.inverse, &p, tol) {
        Ok(pb) => {
            let corner_scale = idem_norm(&(&id - &p)) * ps.inverse.frobenius_norm() * idem_norm(&p);
            vanishes(&pb.blocks[2], corner_scale, tol) == ann_zero
        }
        Err(_) => false,
    };
    r.concl(flag("corner p^pi (a+b)^D p = 0 agrees with clause (1)", consistent));

    r.witness("lhs", lhs);
    r.witness("rhs", rhs);
    r.witness("lhs_annihilation_zero", ann_zero);
    r.witness("sum_pcore_certified", ps.is_certified(tol));
    r.witness("one_plus_certified", py.is_certified(tol));
    r.witness("rhs_sum_zero", search.found.is_some());
    r.witness("bracket_zero", vanishes(&bracket, idem_norm(&p) + idem_norm(&q), tol));
    if let Some(m) = search.found {
        r.witness("m", m);
    }
    r.witness("m_window_lo", lo);
    r.witness("m_window_hi", hi);
    r.witness("a_pcore", ad);
    r.witness("a_pi", &a_pi);
    r.witness("sum_pcore", &ps.inverse);
    r.witness("annihilation", &ann);
    r.witness("one_plus_a_pcore_b", &y);
    r.witness("one_plus_pcore", &py.inverse);
    r.witness("one_plus_pi", &y_pi);
    r.witness("bracket", &bracket);
    Ok(r.finish())
}

/// For `a` with some power having equal Moore-Penrose and group inverses:
/// `a a^D = a^D a`, and both `a + b` and `1 + a^D b` certify.
pub fn check_corollary_3_2(a: &ComplexMatrix, b: &ComplexMatrix, tol: &TolerancePolicy) -> Result<TheoremReport> {
    let n = require_same_square("check_corollary_3_2", a, b)?;
    let mut r = Builder::new(TheoremId::C3_2, tol);
    let (dmp, power) = is_star_dmp(a, tol)?;
    r.hyp(flag("a is *-DMP", dmp));
    if dmp {
        r.witness("dmp_power", power);
    }
    commuting_hyps(&mut r, a, b, tol)?;

    let pa = pseudo(a, tol)?;
    let ad = &pa.inverse;
    let p = a * ad;
    let q = ad * a;
    r.concl(zero_check("a a^D = a^D a", &(&p - &q), idem_norm(&p) + idem_norm(&q), tol));
    let ps = pseudo(&(a + b), tol)?;
    r.concl(cert_check("(a+b)^D certified", &ps, tol));
    let y = &ComplexMatrix::identity(n) + &(ad * b);
    let py = pseudo(&y, tol)?;
    r.concl(cert_check("(1+a^D b)^D certified", &py, tol));
    r.witness("a_pcore", ad);
    r.witness("sum_pcore", &ps.inverse);
    r.witness("one_plus_pcore", &py.inverse);
    Ok(r.finish())
}

pub fn example_3_3_pair() -> (ComplexMatrix, ComplexMatrix) {
    (
        ComplexMatrix::from_pairs(2, 2, &[(0.0, 1.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]),
        ComplexMatrix::real(2, 2, &[0.0, 0.0, 1.0, 0.0]),
    )
}

/// The fixed pair `a = [[i,0],[0,0]]`, `b = [[0,0],[1,0]]`.
pub fn reproduce_example_3_3(tol: &TolerancePolicy) -> Result<TheoremReport> {
    let (a, b) = example_3_3_pair();
    let id = ComplexMatrix::identity(2);
    let mut r = Builder::new(TheoremId::EX3_3, tol);

    let pa = pseudo(&a, tol)?;
    let expected_a = ComplexMatrix::from_pairs(2, 2, &[(0.0, -1.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
    r.concl(eq_check("(i) a^D = [[-i,0],[0,0]]", &pa.inverse, &expected_a, tol)?);

    let pb = pseudo(&b, tol)?;
    r.concl(eq_check("(ii) b^D = 0", &pb.inverse, &ComplexMatrix::zeros(2, 2), tol)?);

    let y = &id + &(&pa.inverse * &b);
    r.concl(eq_check("(iii) 1 + a^D b = 1", &y, &id, tol)?);
    let py = pseudo(&y, tol)?;
    r.concl(cert_check("(iii) (1 + a^D b)^D certified", &py, tol));

    let comm = &(&a * &b) - &(&b * &a);
    let comm_scale = 2.0 * a.frobenius_norm() * b.frobenius_norm();
    let comm_check = zero_check("ab = ba", &comm, comm_scale, tol);
    r.concl(Check {
        label: "(iv) ab != ba".into(),
        value: comm_check.value,
        pass: !comm_check.pass,
    });

    let s = &a + &b;
    let ps = pseudo(&s, tol)?;
    r.concl(cert_check("(a+b)^D certified", &ps, tol));
    let half = |re: f64, im: f64| c64(0.5 * re, 0.5 * im);
    let expected_s = ComplexMatrix::new(2, 2, vec![half(0.0, -1.0), half(1.0, 0.0), half(-1.0, 0.0), half(0.0, -1.0)])?;
    r.concl(eq_check("(a+b)^D = (1/2)[[-i,1],[-1,-i]]", &ps.inverse, &expected_s, tol)?);

    let a_pi = spectral_idempotent(&a, tol)?;
    let ann = &(&(&a_pi * &ps.inverse) * &a) * &pa.inverse;
    let ann_scale = idem_norm(&a_pi) * ps.inverse.frobenius_norm() * idem_norm(&(&a * &pa.inverse));
    let rank = rank_against(&ann, ann_scale, tol);
    r.concl(Check {
        label: "(v) a^pi (a+b)^D a a^D has rank 1".into(),
        value: CheckValue::Residual(rank as f64),
        pass: rank == 1,
    });
    let expected_ann = ComplexMatrix::real(2, 2, &[0.0, 0.0, -0.5, 0.0]);
    r.concl(eq_check("(v) a^pi (a+b)^D a a^D = (1/2)[[0,0],[-1,0]]", &ann, &expected_ann, tol)?);

    r.witness("a", &a);
    r.witness("b", &b);
    r.witness("a_pcore", &pa.inverse);
    r.witness("b_pcore", &pb.inverse);
    r.witness("one_plus_a_pcore_b", &y);
    r.witness("sum_pcore", &ps.inverse);
    r.witness("annihilation", &ann);
    r.note(
        "a+b is claimed to have no pseudo core inverse, but a certified one exists: \
         (a+b)^D = (1/2)[[-i,1],[-1,-i]]; what fails instead is the hypothesis ab = ba \
         and the clause (1) annihilation a^pi (a+b)^D a a^D = 0",
    );
    Ok(r.finish())
}
