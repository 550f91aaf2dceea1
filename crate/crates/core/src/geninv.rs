//! Index, spectral idempotent and the six generalized-inverse kinds, each
//! returned with the residuals of its defining equations.
//!
//! The Drazin and core-EP inverses are built from an orthonormal basis `U` of
//! `R(A^k)` (k the index) rather than from powers of `A`. On that subspace `A`
//! acts bijectively as `C = U* A U`, which gives
//!
//! * core-EP: `X = U C^{-1} U*`
//! * Drazin: `X = U C^{-1} (W* U)^{-1} W*`, with `W` an orthonormal basis of
//!   `R((A*)^k) = N(A^k)^⊥`
//!
//! Neither needs `A^k` itself, whose conditioning grows with `k`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    approx_equal, c64, orthonormal_range, range_chain, solve, svd, ComplexMatrix,
    TolerancePolicy,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseKind {
    MoorePenrose,
    OneThree,
    Group,
    Drazin,
    Core,
    PseudoCore,
}

impl InverseKind {
    pub const ALL: [InverseKind; 6] = [
        InverseKind::MoorePenrose,
        InverseKind::OneThree,
        InverseKind::Group,
        InverseKind::Drazin,
        InverseKind::Core,
        InverseKind::PseudoCore,
    ];
}

/// A generalized inverse together with its certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenInverseResult {
    pub kind: InverseKind,
    pub inverse: ComplexMatrix,
    /// Exponent of the defining equations; 0 for kinds without one.
    pub index_used: usize,
    pub residuals: BTreeMap<String, f64>,
}

impl GenInverseResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }

    pub fn is_certified(&self, tol: &TolerancePolicy) -> bool {
        self.residuals
            .values()
            .all(|r| r.is_finite() && *r <= tol.residual_tol)
    }
}

/// `||lhs - rhs||_F / max(1, ||scale||_F)`.
fn rel(lhs: &ComplexMatrix, rhs: &ComplexMatrix, scale: &ComplexMatrix) -> f64 {
    (lhs - rhs).frobenius_norm() / scale.frobenius_norm().max(1.0)
}

/// Orthonormal basis of `R(A^k)` at the index, plus the index itself.
struct CoreSubspace {
    index: usize,
    basis: ComplexMatrix,
}

fn core_subspace(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<CoreSubspace> {
    let n = a.require_square("index")?;
    let chain = range_chain(a, n + 1, tol)?;
    // The chain ends with the first repeated rank: [Q_0, ..., Q_k, Q_{k+1}].
    let index = chain.len() - 2;
    Ok(CoreSubspace {
        index,
        basis: chain[index].clone(),
    })
}

/// Smallest `k >= 0` with `rank(A^k) = rank(A^{k+1})`.
pub fn index(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<usize> {
    Ok(core_subspace(a, tol)?.index)
}

/// Moore-Penrose inverse from the SVD, cutting at `rank_rel_tol * sigma_max`.
pub fn moore_penrose(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<GenInverseResult> {
    let (m, n) = a.shape();
    let x = if m == 0 || n == 0 {
        ComplexMatrix::zeros(n, m)
    } else {
        let d = svd(a.inner());
        let smax = d.s.first().copied().unwrap_or(0.0);
        let mut x = nalgebra::DMatrix::zeros(n, m);
        for (i, &s) in d.s.iter().enumerate() {
            if smax > 0.0 && s > tol.rank_rel_tol * smax {
                x += (d.v.column(i) * d.u.column(i).adjoint()) * c64(1.0 / s, 0.0);
            }
        }
        ComplexMatrix::from_inner(x)
    };
    let ax = a * &x;
    let xa = &x * a;
    let mut residuals = BTreeMap::new();
    residuals.insert("p1".into(), rel(&(&ax * a), a, a));
    residuals.insert("p2".into(), rel(&(&xa * &x), &x, &x));
    residuals.insert("p3".into(), rel(&ax.conjugate_transpose(), &ax, &ax));
    residuals.insert("p4".into(), rel(&xa.conjugate_transpose(), &xa, &xa));
    Ok(GenInverseResult {
        kind: InverseKind::MoorePenrose,
        inverse: x,
        index_used: 0,
        residuals,
    })
}

/// Canonical (1,3)-inverse: the Moore-Penrose inverse, certified against
/// `AXA = A` and `(AX)* = AX` only.
pub fn one_three(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<GenInverseResult> {
    a.require_square("one_three")?;
    let mp = moore_penrose(a, tol)?;
    let x = mp.inverse;
    let ax = a * &x;
    let mut residuals = BTreeMap::new();
    residuals.insert("p1".into(), rel(&(&ax * a), a, a));
    residuals.insert("p3".into(), rel(&ax.conjugate_transpose(), &ax, &ax));
    Ok(GenInverseResult {
        kind: InverseKind::OneThree,
        inverse: x,
        index_used: 0,
        residuals,
    })
}

fn drazin_matrix(a: &ComplexMatrix, core: &CoreSubspace, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    let n = a.rows();
    let u = &core.basis;
    let r = u.cols();
    if r == 0 {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    if core.index == 0 {
        return solve(a, &ComplexMatrix::identity(n));
    }
    let a_star = a.conjugate_transpose();
    let chain = range_chain(&a_star, core.index, tol)?;
    let w = chain
        .get(core.index)
        .cloned()
        .unwrap_or_else(|| chain.last().cloned().expect("non-empty"));
    if w.cols() != r {
        return Err(Error::Numerical(format!(
            "rank of A^k ({r}) and (A*)^k ({}) disagree",
            w.cols()
        )));
    }
    let u_star = u.conjugate_transpose();
    let c = &(&u_star * a) * u;
    let w_star = w.conjugate_transpose();
    let wu = &w_star * u;
    // X = U C^{-1} (W*U)^{-1} W*
    let right = solve(&wu, &w_star)?;
    let mid = solve(&c, &right)?;
    Ok(u * &mid)
}

fn drazin_residuals(a: &ComplexMatrix, x: &ComplexMatrix, k: usize) -> BTreeMap<String, f64> {
    let ak = a.pow(k).expect("square");
    let ak1 = &ak * a;
    let ax = a * x;
    let xa = x * a;
    let mut residuals = BTreeMap::new();
    residuals.insert("xa^(k+1)=a^k".into(), rel(&(x * &ak1), &ak, &ak));
    residuals.insert("ax^2=x".into(), rel(&(&ax * x), x, x));
    residuals.insert("ax=xa".into(), rel(&ax, &xa, &ax));
    residuals
}

/// Drazin inverse; certified against the three Drazin equations with
/// `k = max(index, 1)`.
pub fn drazin(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<GenInverseResult> {
    let core = core_subspace(a, tol)?;
    let x = drazin_matrix(a, &core, tol)?;
    let k = core.index.max(1);
    let residuals = drazin_residuals(a, &x, k);
    Ok(GenInverseResult {
        kind: InverseKind::Drazin,
        inverse: x,
        index_used: k,
        residuals,
    })
}

pub fn group_inverse(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<GenInverseResult> {
    let core = core_subspace(a, tol)?;
    if core.index > 1 {
        return Err(Error::NoGroupInverse { index: core.index });
    }
    let x = drazin_matrix(a, &core, tol)?;
    let ax = a * &x;
    let xa = &x * a;
    let mut residuals = BTreeMap::new();
    residuals.insert("xax=x".into(), rel(&(&xa * &x), &x, &x));
    residuals.insert("axa=a".into(), rel(&(&ax * a), a, a));
    residuals.insert("ax=xa".into(), rel(&ax, &xa, &ax));
    Ok(GenInverseResult {
        kind: InverseKind::Group,
        inverse: x,
        index_used: 1,
        residuals,
    })
}

/// `I - A A^D`.
pub fn spectral_idempotent(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    let d = drazin(a, tol)?;
    Ok(&ComplexMatrix::identity(a.rows()) - &(a * &d.inverse))
}

/// Core inverse `A^# A A^(1,3)`, defined for index at most 1.
///
/// Certified by `AXA = A` and by the projections of `X` and `X*` onto
/// `R(A)`; with `AXA = A` forcing `rank X >= rank A`, containment is equality.
pub fn core_inverse(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<GenInverseResult> {
    let core = core_subspace(a, tol)?;
    if core.index > 1 {
        return Err(Error::NoCoreInverse { index: core.index });
    }
    let group = drazin_matrix(a, &core, tol)?;
    let ot = one_three(a, tol)?.inverse;
    let x = &(&group * a) * &ot;

    let range_a = orthonormal_range(a, tol.rank_rel_tol * a.spectral_norm());
    let proj = &range_a * &range_a.conjugate_transpose();
    let x_star = x.conjugate_transpose();
    let mut residuals = BTreeMap::new();
    residuals.insert("axa=a".into(), rel(&(&(a * &x) * a), a, a));
    residuals.insert("R(x)=R(a)".into(), rel(&(&proj * &x), &x, &x));
    residuals.insert("R(x*)=R(a)".into(), rel(&(&proj * &x_star), &x_star, &x));
    Ok(GenInverseResult {
        kind: InverseKind::Core,
        inverse: x,
        index_used: 1,
        residuals,
    })
}

/// Pseudo core (core-EP) inverse, defined for every square matrix.
///
/// `index_used` is `max(index, 1)`: for invertible input the `k = 1` triple
/// already pins down `A^{-1}`.
pub fn pseudo_core(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<GenInverseResult> {
    let core = core_subspace(a, tol)?;
    let n = a.rows();
    let u = &core.basis;
    let x = if u.cols() == 0 {
        ComplexMatrix::zeros(n, n)
    } else {
        let u_star = u.conjugate_transpose();
        let c = &(&u_star * a) * u;
        u * &solve(&c, &u_star)?
    };
    let k = core.index.max(1);
    let residuals = verify_defining_triple(a, &x, k, tol)?;
    Ok(GenInverseResult {
        kind: InverseKind::PseudoCore,
        inverse: x,
        index_used: k,
        residuals,
    })
}

/// Relative residuals of `XA^{k+1} = A^k`, `AX^2 = X`, `(AX)* = AX`.
pub fn verify_defining_triple(
    a: &ComplexMatrix,
    x: &ComplexMatrix,
    k: usize,
    _tol: &TolerancePolicy,
) -> Result<BTreeMap<String, f64>> {
    if k < 1 {
        return Err(Error::Domain("defining triple needs k >= 1".into()));
    }
    let n = a.require_square("verify_defining_triple")?;
    if x.shape() != (n, n) {
        return Err(Error::Dimension {
            op: "verify_defining_triple",
            left: a.shape(),
            right: x.shape(),
        });
    }
    let ak = a.pow(k)?;
    let ak1 = &ak * a;
    let ax = a * x;
    let mut residuals = BTreeMap::new();
    residuals.insert("xa^(k+1)=a^k".into(), rel(&(x * &ak1), &ak, &ak));
    residuals.insert("ax^2=x".into(), rel(&(&ax * x), x, x));
    residuals.insert("(ax)*=ax".into(), rel(&ax.conjugate_transpose(), &ax, &ax));
    Ok(residuals)
}

/// `a^k`, set to an exact zero when `a` is nilpotent and `k >= i(a)`.
pub fn settled_pow(a: &ComplexMatrix, k: usize, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    let n = a.require_square("settled_pow")?;
    if k >= 1 && crate::matrix::is_nilpotent(a, tol) && k >= index(a, tol)? {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    a.pow(k)
}

/// Whether some power `A^n` (scanning `n` from `max(index, 1)` up to the
/// dimension) has index at most 1 and `(A^n)^† = (A^n)^#`.
pub fn is_star_dmp(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<(bool, usize)> {
    let dim = a.require_square("is_star_dmp")?;
    let start = index(a, tol)?.max(1);
    for n in start..=dim.max(start) {
        let an = settled_pow(a, n, tol)?;
        if index(&an, tol)? > 1 {
            continue;
        }
        let mp = moore_penrose(&an, tol)?;
        let g = group_inverse(&an, tol)?;
        if approx_equal(&mp.inverse, &g.inverse, tol)? {
            return Ok((true, n));
        }
    }
    Ok((false, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::relative_distance;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix) -> bool {
        relative_distance(a, b).unwrap() < 1e-12
    }

    fn nil2() -> ComplexMatrix {
        ComplexMatrix::real(2, 2, &[0.0, 1.0, 0.0, 0.0])
    }

    fn a33() -> ComplexMatrix {
        ComplexMatrix::from_pairs(2, 2, &[(0.0, 1.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)])
    }

    fn apb33() -> ComplexMatrix {
        ComplexMatrix::from_pairs(2, 2, &[(0.0, 1.0), (0.0, 0.0), (1.0, 0.0), (0.0, 0.0)])
    }

    #[test]
    fn index_examples() {
        assert_eq!(index(&ComplexMatrix::identity(3), &tol()).unwrap(), 0);
        assert_eq!(index(&nil2(), &tol()).unwrap(), 2);
        assert_eq!(index(&apb33(), &tol()).unwrap(), 1);
        assert_eq!(index(&ComplexMatrix::zeros(2, 2), &tol()).unwrap(), 1);
        assert!(index(&ComplexMatrix::zeros(2, 3), &tol()).is_err());
    }

    #[test]
    fn moore_penrose_examples() {
        let i = ComplexMatrix::identity(3);
        assert!(close(&moore_penrose(&i, &tol()).unwrap().inverse, &i));

        let z = ComplexMatrix::zeros(2, 3);
        let mp = moore_penrose(&z, &tol()).unwrap();
        assert_eq!(mp.inverse, ComplexMatrix::zeros(3, 2));

        let a = ComplexMatrix::real(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        let mp = moore_penrose(&a, &tol()).unwrap();
        assert!(close(&mp.inverse, &ComplexMatrix::real(2, 2, &[0.5, 0.0, 0.5, 0.0])));
        assert!(mp.is_certified(&tol()));
        assert_eq!(mp.residuals.len(), 4);
    }

    #[test]
    fn one_three_examples() {
        let d = ComplexMatrix::real(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let r = one_three(&d, &tol()).unwrap();
        assert!(close(&r.inverse, &ComplexMatrix::real(2, 2, &[0.5, 0.0, 0.0, 0.0])));
        assert_eq!(r.kind, InverseKind::OneThree);

        let a2 = &a33() * &a33();
        let r = one_three(&a2, &tol()).unwrap();
        assert!(close(&r.inverse, &ComplexMatrix::real(2, 2, &[-1.0, 0.0, 0.0, 0.0])));
        assert!(r.is_certified(&tol()));
    }

    #[test]
    fn group_examples() {
        let g = group_inverse(&apb33(), &tol()).unwrap();
        let expected = ComplexMatrix::from_pairs(2, 2, &[(0.0, -1.0), (0.0, 0.0), (-1.0, 0.0), (0.0, 0.0)]);
        assert!(close(&g.inverse, &expected));
        assert!(g.is_certified(&tol()));
        assert_eq!(group_inverse(&nil2(), &tol()), Err(Error::NoGroupInverse { index: 2 }));
    }

    #[test]
    fn drazin_examples() {
        let d = drazin(&nil2(), &tol()).unwrap();
        assert_eq!(d.inverse, ComplexMatrix::zeros(2, 2));
        assert_eq!(d.index_used, 2);

        let b = ComplexMatrix::real(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(drazin(&b, &tol()).unwrap().inverse, ComplexMatrix::zeros(2, 2));

        let d2 = ComplexMatrix::real(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let r = drazin(&d2, &tol()).unwrap();
        assert!(close(&r.inverse, &ComplexMatrix::real(2, 2, &[0.5, 0.0, 0.0, 0.0])));
        assert!(r.is_certified(&tol()));
    }

    #[test]
    fn spectral_idempotent_examples() {
        let inv = ComplexMatrix::real(2, 2, &[2.0, 1.0, 0.0, 3.0]);
        assert!(spectral_idempotent(&inv, &tol()).unwrap().frobenius_norm() < 1e-14);
        assert!(close(&spectral_idempotent(&nil2(), &tol()).unwrap(), &ComplexMatrix::identity(2)));
        let p = spectral_idempotent(&a33(), &tol()).unwrap();
        assert!(close(&p, &ComplexMatrix::real(2, 2, &[0.0, 0.0, 0.0, 1.0])));
    }

    #[test]
    fn core_examples() {
        let i = ComplexMatrix::identity(2);
        assert!(close(&core_inverse(&i, &tol()).unwrap().inverse, &i));
        let a = ComplexMatrix::real(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        let c = core_inverse(&a, &tol()).unwrap();
        assert!(close(&c.inverse, &ComplexMatrix::real(2, 2, &[1.0, 0.0, 0.0, 0.0])));
        assert!(c.is_certified(&tol()));
        assert_eq!(core_inverse(&nil2(), &tol()), Err(Error::NoCoreInverse { index: 2 }));
    }

    #[test]
    fn pseudo_core_examples() {
        let p = pseudo_core(&a33(), &tol()).unwrap();
        let expected = ComplexMatrix::from_pairs(2, 2, &[(0.0, -1.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert!(close(&p.inverse, &expected));

        let p = pseudo_core(&nil2(), &tol()).unwrap();
        assert_eq!(p.inverse, ComplexMatrix::zeros(2, 2));
        assert_eq!(p.index_used, 2);
        assert!(p.is_certified(&tol()));

        let p = pseudo_core(&apb33(), &tol()).unwrap();
        let half = ComplexMatrix::from_pairs(2, 2, &[(0.0, -0.5), (0.5, 0.0), (-0.5, 0.0), (0.0, -0.5)]);
        assert!(close(&p.inverse, &half));
        assert!(p.is_certified(&tol()));
    }

    #[test]
    fn defining_triple_examples() {
        let i = ComplexMatrix::identity(2);
        let r = verify_defining_triple(&i, &i, 1, &tol()).unwrap();
        assert!(r.values().all(|&v| v == 0.0));

        let r = verify_defining_triple(&i, &ComplexMatrix::zeros(2, 2), 1, &tol()).unwrap();
        assert!((r["xa^(k+1)=a^k"] - 1.0).abs() < 1e-15);

        assert!(matches!(verify_defining_triple(&i, &i, 0, &tol()), Err(Error::Domain(_))));
        assert!(verify_defining_triple(&i, &ComplexMatrix::zeros(3, 3), 1, &tol()).is_err());
    }

    #[test]
    fn star_dmp_examples() {
        assert_eq!(is_star_dmp(&a33(), &tol()).unwrap(), (true, 1));
        let h = ComplexMatrix::from_pairs(2, 2, &[(2.0, 0.0), (1.0, 1.0), (1.0, -1.0), (0.0, 0.0)]);
        assert_eq!(is_star_dmp(&h, &tol()).unwrap(), (true, 1));
        let a = ComplexMatrix::real(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(is_star_dmp(&a, &tol()).unwrap(), (false, 0));
    }
}
