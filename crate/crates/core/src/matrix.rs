//! Dense complex matrices and the tolerance-controlled predicates everything
//! else is built on.
//!
//! Every approximate decision (rank, equality, nilpotency, "this product is
//! zero") routes through a [`TolerancePolicy`]. Ranks are always decided
//! against a reference scale: for a plain matrix that scale is its largest
//! singular value, for a product it is the size of the factors.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cli::format::MatrixFile;
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Shorthand for a complex scalar.
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Relative thresholds for every approximate decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Singular values at or below `rank_rel_tol * reference` count as zero.
    pub rank_rel_tol: f64,
    /// Relative Frobenius threshold for matrix equality.
    pub eq_rel_tol: f64,
    /// Acceptance threshold for certificate residuals.
    pub residual_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            rank_rel_tol: 1e-10,
            eq_rel_tol: 1e-8,
            residual_tol: 1e-8,
        }
    }
}

impl TolerancePolicy {
    pub fn new(rank_rel_tol: f64, eq_rel_tol: f64, residual_tol: f64) -> Result<Self> {
        for (name, v) in [
            ("rank_rel_tol", rank_rel_tol),
            ("eq_rel_tol", eq_rel_tol),
            ("residual_tol", residual_tol),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Parameter(format!("{name} = {v} outside [0, 1)")));
            }
        }
        Ok(Self {
            rank_rel_tol,
            eq_rel_tol,
            residual_tol,
        })
    }
}

/// Dense complex matrix with finite entries.
///
/// Zero-sized shapes are allowed internally (an empty kernel basis has zero
/// columns); file input rejects them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "MatrixFile", try_from = "MatrixFile")]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::EntryCount {
                rows,
                cols,
                got: entries.len(),
            });
        }
        if let Some(pos) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    /// Real matrix from row-major entries. Panics on a length mismatch.
    pub fn real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count");
        Self(DMatrix::from_row_iterator(
            rows,
            cols,
            entries.iter().map(|&x| c64(x, 0.0)),
        ))
    }

    /// Complex matrix from row-major `(re, im)` pairs. Panics on a length mismatch.
    pub fn from_pairs(rows: usize, cols: usize, entries: &[(f64, f64)]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count");
        Self(DMatrix::from_row_iterator(
            rows,
            cols,
            entries.iter().map(|&(re, im)| c64(re, im)),
        ))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        Self(m)
    }

    pub(crate) fn from_inner(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    /// Row-major copy of the entries.
    pub fn entries(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn conjugate_transpose(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, z: C64) -> Self {
        Self(&self.0 * z)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_shape("add", other)?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_shape("subtract", other)?;
        Ok(Self(&self.0 - &other.0))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::Dimension {
                op: "multiply",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self(&self.0 * &other.0))
    }

    /// Integer power; `A^0` is the identity.
    pub fn pow(&self, k: usize) -> Result<Self> {
        self.require_square("power")?;
        let mut acc = Self::identity(self.rows());
        for _ in 0..k {
            acc = Self(&acc.0 * &self.0);
        }
        Ok(acc)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value (0 for empty or zero matrices).
    pub fn spectral_norm(&self) -> f64 {
        singular_values(self).first().copied().unwrap_or(0.0)
    }

    /// Copy of the `nrows x ncols` block starting at `(row, col)`.
    pub fn block(&self, row: usize, col: usize, nrows: usize, ncols: usize) -> Self {
        Self(self.0.view((row, col), (nrows, ncols)).into_owned())
    }

    /// Assembles `[[a, b], [c, d]]`.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        if a.rows() != b.rows()
            || c.rows() != d.rows()
            || a.cols() != c.cols()
            || b.cols() != d.cols()
        {
            return Err(Error::Dimension {
                op: "block assembly",
                left: a.shape(),
                right: d.shape(),
            });
        }
        let (ra, ca) = a.shape();
        let mut m = DMatrix::zeros(ra + c.rows(), ca + b.cols());
        m.view_mut((0, 0), a.shape()).copy_from(&a.0);
        m.view_mut((0, ca), b.shape()).copy_from(&b.0);
        m.view_mut((ra, 0), c.shape()).copy_from(&c.0);
        m.view_mut((ra, ca), d.shape()).copy_from(&d.0);
        Ok(Self(m))
    }

    /// Block-diagonal `a ⊕ b`.
    pub fn direct_sum(a: &Self, b: &Self) -> Self {
        let mut m = DMatrix::zeros(a.rows() + b.rows(), a.cols() + b.cols());
        m.view_mut((0, 0), a.shape()).copy_from(&a.0);
        m.view_mut((a.rows(), a.cols()), b.shape()).copy_from(&b.0);
        Self(m)
    }

    /// Horizontal concatenation `[a | b]`.
    pub fn hcat(a: &Self, b: &Self) -> Result<Self> {
        if a.rows() != b.rows() {
            return Err(Error::Dimension {
                op: "hcat",
                left: a.shape(),
                right: b.shape(),
            });
        }
        let mut m = DMatrix::zeros(a.rows(), a.cols() + b.cols());
        m.view_mut((0, 0), a.shape()).copy_from(&a.0);
        m.view_mut((0, a.cols()), b.shape()).copy_from(&b.0);
        Ok(Self(m))
    }

    /// Columns `start..start + count`.
    pub fn columns(&self, start: usize, count: usize) -> Self {
        self.block(0, start, self.rows(), count)
    }

    pub(crate) fn require_square(&self, op: &'static str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::NotSquare {
                op,
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }

    pub(crate) fn same_shape(&self, op: &'static str, other: &Self) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(Error::Dimension {
                op,
                left: self.shape(),
                right: other.shape(),
            })
        }
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Product of a non-empty chain of matrices. Panics on shape mismatch.
pub fn product(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let (first, rest) = factors.split_first().expect("empty product");
    rest.iter().fold((*first).clone(), |acc, f| &acc * f)
}

/// Full singular value decomposition `m = U diag(s) V*` with `s` descending.
pub(crate) struct Svd<T: nalgebra::Scalar> {
    pub u: DMatrix<T>,
    pub s: Vec<f64>,
    pub v: DMatrix<T>,
}

/// Entry types the decomposition backend accepts.
pub(crate) trait DenseScalar: ComplexField<RealField = f64> + faer::traits::ComplexField + Copy {}
impl DenseScalar for f64 {}
impl DenseScalar for C64 {}

/// SVD through faer; nalgebra's complex SVD loses accuracy on rank-deficient
/// input.
pub(crate) fn svd<T: DenseScalar>(m: &DMatrix<T>) -> Svd<T> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Svd {
            u: DMatrix::identity(rows, rows),
            s: Vec::new(),
            v: DMatrix::identity(cols, cols),
        };
    }
    let f = faer::Mat::<T>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let d = f.svd().expect("svd converges");
    let (u, v, sd) = (d.U(), d.V(), d.S().column_vector());
    let mut order: Vec<usize> = (0..rows.min(cols)).collect();
    let s_raw: Vec<f64> = order.iter().map(|&i| ComplexField::real(sd[i])).collect();
    order.sort_by(|&i, &j| s_raw[j].total_cmp(&s_raw[i]));
    let mut perm: Vec<usize> = order.clone();
    perm.extend(rows.min(cols)..rows.max(cols));
    Svd {
        u: DMatrix::from_fn(rows, rows, |i, j| u[(i, perm[j])]),
        s: order.iter().map(|&i| s_raw[i]).collect(),
        v: DMatrix::from_fn(cols, cols, |i, j| v[(i, perm[j])]),
    }
}

/// Singular values in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    svd(&a.0).s
}

/// Number of singular values above `rank_rel_tol * scale`.
///
/// A zero scale means the matrix is exactly zero for our purposes.
pub fn rank_against(a: &ComplexMatrix, scale: f64, tol: &TolerancePolicy) -> usize {
    if scale <= 0.0 {
        return 0;
    }
    let cut = tol.rank_rel_tol * scale;
    singular_values(a).into_iter().filter(|&s| s > cut).count()
}

/// True when `a` has numerical rank 0 measured against `scale`.
pub fn vanishes(a: &ComplexMatrix, scale: f64, tol: &TolerancePolicy) -> bool {
    rank_against(a, scale, tol) == 0
}

pub fn numerical_rank(a: &ComplexMatrix, tol: &TolerancePolicy) -> usize {
    let sv = singular_values(a);
    match sv.first() {
        Some(&smax) if smax > 0.0 => sv.iter().filter(|&&s| s > tol.rank_rel_tol * smax).count(),
        _ => 0,
    }
}

/// `||a - b||_F <= eq_rel_tol * max(1, ||a||_F, ||b||_F)`.
pub fn approx_equal(a: &ComplexMatrix, b: &ComplexMatrix, tol: &TolerancePolicy) -> Result<bool> {
    Ok(relative_distance(a, b)? <= tol.eq_rel_tol)
}

/// `||a - b||_F / max(1, ||a||_F, ||b||_F)`; the quantity `approx_equal` thresholds.
pub fn relative_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let diff = a.try_sub(b)?;
    let denom = 1f64.max(a.frobenius_norm()).max(b.frobenius_norm());
    Ok(diff.frobenius_norm() / denom)
}

fn normalized(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.frobenius_norm();
    if n > 0.0 {
        a.scale(c64(1.0 / n, 0.0))
    } else {
        a.clone()
    }
}

/// Column-space equality via `rank(a) = rank(b) = rank([a | b])`.
///
/// Each side is normalized before concatenation so that a scale difference
/// between `a` and `b` cannot hide one of them below the rank threshold.
pub fn same_column_space(a: &ComplexMatrix, b: &ComplexMatrix, tol: &TolerancePolicy) -> Result<bool> {
    if a.rows() != b.rows() {
        return Err(Error::Dimension {
            op: "same_column_space",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let ra = numerical_rank(a, tol);
    let rb = numerical_rank(b, tol);
    if ra != rb {
        return Ok(false);
    }
    let joint = ComplexMatrix::hcat(&normalized(a), &normalized(b))?;
    Ok(numerical_rank(&joint, tol) == ra)
}

/// Column-space equality with each rank decided against the given scale, for
/// operands that may be exactly zero up to roundoff (powers of a nilpotent).
pub fn same_column_space_against(
    a: &ComplexMatrix,
    a_scale: f64,
    b: &ComplexMatrix,
    b_scale: f64,
    tol: &TolerancePolicy,
) -> Result<bool> {
    if a.rows() != b.rows() {
        return Err(Error::Dimension {
            op: "same_column_space_against",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let ra = rank_against(a, a_scale, tol);
    if ra != rank_against(b, b_scale, tol) {
        return Ok(false);
    }
    if ra == 0 {
        return Ok(true);
    }
    let joint = ComplexMatrix::hcat(&a.scale(c64(1.0 / a_scale, 0.0)), &b.scale(c64(1.0 / b_scale, 0.0)))?;
    Ok(rank_against(&joint, 1.0, tol) == ra)
}

pub fn is_projection(p: &ComplexMatrix, tol: &TolerancePolicy) -> bool {
    if !p.is_square() {
        return false;
    }
    let sq = p * p;
    approx_equal(&sq, p, tol).unwrap_or(false)
        && approx_equal(&p.conjugate_transpose(), p, tol).unwrap_or(false)
}

/// Orthonormal bases of `R(A^0), R(A^1), ...` computed without forming powers.
///
/// Each step multiplies the previous orthonormal basis by `A` and keeps the
/// left singular vectors whose singular values exceed `rank_rel_tol * ||A||_2`.
/// This is the renormalized power sequence: the rank of `A^k` is the column
/// count of the k-th basis. Iteration stops once two consecutive ranks agree
/// or `max_power` is reached.
pub fn range_chain(a: &ComplexMatrix, max_power: usize, tol: &TolerancePolicy) -> Result<Vec<ComplexMatrix>> {
    a.require_square("range chain")?;
    Ok(chain_with_cut(a, max_power, tol.rank_rel_tol * a.spectral_norm()))
}

fn chain_with_cut(a: &ComplexMatrix, max_power: usize, cut: f64) -> Vec<ComplexMatrix> {
    let n = a.rows();
    let mut chain = vec![ComplexMatrix::identity(n)];
    for _ in 0..max_power {
        let prev = chain.last().expect("non-empty chain");
        let next = if prev.cols() == 0 {
            ComplexMatrix::zeros(n, 0)
        } else {
            orthonormal_range(&(a * prev), cut)
        };
        let stable = next.cols() == prev.cols();
        chain.push(next);
        if stable {
            break;
        }
    }
    chain
}

/// Orthonormal basis of `R(m)` keeping singular values above `cut`.
pub(crate) fn orthonormal_range(m: &ComplexMatrix, cut: f64) -> ComplexMatrix {
    if m.rows() == 0 || m.cols() == 0 {
        return ComplexMatrix::zeros(m.rows(), 0);
    }
    let d = svd(&m.0);
    let r = d.s.iter().filter(|&&s| s > cut).count();
    ComplexMatrix(d.u.columns(0, r).into_owned())
}

/// Orthonormal basis of `R(A^k)`.
pub fn range_basis(a: &ComplexMatrix, k: usize, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    let chain = range_chain(a, k, tol)?;
    // The chain stops early once the range has stabilized.
    Ok(chain.get(k).cloned().unwrap_or_else(|| chain.last().cloned().expect("non-empty")))
}

/// `A^n = 0` for `n = dim(A)`, decided on the renormalized range chain.
pub fn is_nilpotent(a: &ComplexMatrix, tol: &TolerancePolicy) -> bool {
    is_nilpotent_against(a, 0.0, tol)
}

/// Nilpotency with singular values cut at `rank_rel_tol * max(scale, ||A||_2)`.
///
/// Use this for a product whose exact value may be zero: `scale` is then the
/// size of its factors, so roundoff left in the product does not count as a
/// nonzero matrix.
pub fn is_nilpotent_against(a: &ComplexMatrix, scale: f64, tol: &TolerancePolicy) -> bool {
    if !a.is_square() {
        return false;
    }
    let cut = tol.rank_rel_tol * scale.max(a.spectral_norm());
    let chain = chain_with_cut(a, a.rows(), cut);
    chain.last().map(|b| b.cols() == 0).unwrap_or(false)
}

/// Kernel basis with singular values cut at `rel_tol * max(sigma_max, scale)`.
fn null_space_generic<T: DenseScalar>(m: &DMatrix<T>, rel_tol: f64, scale: f64) -> DMatrix<T> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if rows == 0 {
        return DMatrix::identity(cols, cols);
    }
    let d = svd(m);
    let reference = d.s.first().copied().unwrap_or(0.0).max(scale);
    let rank = if reference > 0.0 {
        d.s.iter().filter(|&&s| s > rel_tol * reference).count()
    } else {
        0
    };
    d.v.columns(rank, cols - rank).into_owned()
}

/// Orthonormal basis (as columns) of the kernel of `a`.
pub fn null_space_basis(a: &ComplexMatrix, tol: &TolerancePolicy) -> ComplexMatrix {
    if a.cols() == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    ComplexMatrix(null_space_generic(&a.0, tol.rank_rel_tol, 0.0))
}

/// Real kernel basis for the realified constraint systems of the instance
/// generators. `scale` is the size of the operator's coefficients, so that a
/// map which vanishes up to roundoff has a full kernel.
pub(crate) fn real_null_space(m: &DMatrix<f64>, scale: f64, tol: &TolerancePolicy) -> DMatrix<f64> {
    null_space_generic(m, tol.rank_rel_tol, scale)
}

/// Solves `a x = b` for square invertible `a`.
pub(crate) fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let lu = a.0.clone().lu();
    lu.solve(&b.0)
        .map(ComplexMatrix)
        .ok_or_else(|| Error::Numerical("singular system".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn conjugate_transpose_examples() {
        let a = ComplexMatrix::real(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(a.conjugate_transpose(), ComplexMatrix::real(2, 2, &[0.0, 1.0, 0.0, 0.0]));

        let s = ComplexMatrix::from_pairs(1, 1, &[(0.0, 1.0)]);
        assert_eq!(s.conjugate_transpose(), ComplexMatrix::from_pairs(1, 1, &[(0.0, -1.0)]));

        let a33 = ComplexMatrix::from_pairs(2, 2, &[(0.0, 1.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let expected = ComplexMatrix::from_pairs(2, 2, &[(0.0, -1.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert_eq!(a33.conjugate_transpose(), expected);
        assert_eq!(a33.conjugate_transpose().conjugate_transpose(), a33);
    }

    #[test]
    fn arithmetic_examples() {
        let n = ComplexMatrix::real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(n.pow(2).unwrap(), ComplexMatrix::zeros(2, 2));
        assert_eq!(n.pow(0).unwrap(), ComplexMatrix::identity(2));

        let a = ComplexMatrix::from_pairs(2, 2, &[(0.0, 1.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let b = ComplexMatrix::real(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        let sum = a.try_add(&b).unwrap();
        assert_eq!(
            sum,
            ComplexMatrix::from_pairs(2, 2, &[(0.0, 1.0), (0.0, 0.0), (1.0, 0.0), (0.0, 0.0)])
        );
    }

    #[test]
    fn arithmetic_shape_errors() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::zeros(2, 2);
        assert!(matches!(a.try_add(&b), Err(Error::Dimension { .. })));
        assert!(matches!(a.try_mul(&b), Err(Error::Dimension { .. })));
        assert!(matches!(a.pow(2), Err(Error::NotSquare { .. })));
        assert!(b.try_mul(&a).is_ok());
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![c64(1.0, 0.0); 3]),
            Err(Error::EntryCount { .. })
        ));
        assert!(matches!(
            ComplexMatrix::new(1, 2, vec![c64(1.0, 0.0), c64(f64::NAN, 0.0)]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&ComplexMatrix::zeros(3, 3), &tol()), 0);
        for n in 1..6 {
            assert_eq!(numerical_rank(&ComplexMatrix::identity(n), &tol()), n);
        }
        let apb = ComplexMatrix::from_pairs(2, 2, &[(0.0, 1.0), (0.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        assert_eq!(numerical_rank(&apb, &tol()), 1);
    }

    #[test]
    fn approx_equal_examples() {
        let i = ComplexMatrix::identity(3);
        assert!(approx_equal(&i, &i, &tol()).unwrap());
        let bumped = &i + &ComplexMatrix::real(3, 3, &[1e-15; 9]);
        assert!(approx_equal(&i, &bumped, &tol()).unwrap());
        let one = ComplexMatrix::real(1, 1, &[1.0]);
        let other = ComplexMatrix::real(1, 1, &[1.1]);
        assert!(!approx_equal(&one, &other, &tol()).unwrap());
        assert!(approx_equal(&one, &i, &tol()).is_err());
    }

    #[test]
    fn column_space_examples() {
        let a = ComplexMatrix::from_pairs(2, 2, &[(0.0, 1.0), (0.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        assert!(same_column_space(&a, &a, &tol()).unwrap());
        let e11 = ComplexMatrix::real(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let e22 = ComplexMatrix::real(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        assert!(!same_column_space(&e11, &e22, &tol()).unwrap());
        assert!(same_column_space(&a, &(&a * &a), &tol()).unwrap());
        // scale mismatch does not matter
        assert!(same_column_space(&a, &a.scale(c64(1e-9, 0.0)), &tol()).unwrap());
        assert!(same_column_space(&a, &ComplexMatrix::zeros(3, 2), &tol()).is_err());
    }

    #[test]
    fn projection_examples() {
        assert!(is_projection(&ComplexMatrix::identity(3), &tol()));
        assert!(is_projection(&ComplexMatrix::real(2, 2, &[1.0, 0.0, 0.0, 0.0]), &tol()));
        assert!(!is_projection(&ComplexMatrix::real(2, 2, &[1.0, 1.0, 0.0, 0.0]), &tol()));
        assert!(!is_projection(&ComplexMatrix::zeros(2, 3), &tol()));
    }

    #[test]
    fn nilpotent_examples() {
        assert!(is_nilpotent(&ComplexMatrix::real(2, 2, &[0.0, 1.0, 0.0, 0.0]), &tol()));
        assert!(!is_nilpotent(&ComplexMatrix::identity(2), &tol()));
        assert!(!is_nilpotent(&ComplexMatrix::real(2, 2, &[1e-3, 0.0, 0.0, 0.0]), &tol()));
        assert!(is_nilpotent(&ComplexMatrix::zeros(3, 3), &tol()));
        let shift3 = ComplexMatrix::real(3, 3, &[0.0, 2.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0]);
        assert!(is_nilpotent(&shift3, &tol()));
    }

    #[test]
    fn null_space_examples() {
        assert_eq!(null_space_basis(&ComplexMatrix::identity(3), &tol()).cols(), 0);

        let z = null_space_basis(&ComplexMatrix::zeros(2, 2), &tol());
        assert_eq!(z.cols(), 2);
        let gram = &z.conjugate_transpose() * &z;
        assert!(approx_equal(&gram, &ComplexMatrix::identity(2), &tol()).unwrap());

        let row = ComplexMatrix::real(1, 2, &[1.0, 1.0]);
        let v = null_space_basis(&row, &tol());
        assert_eq!(v.shape(), (2, 1));
        assert!((&row * &v).frobenius_norm() < 1e-14);
        assert!((v.frobenius_norm() - 1.0).abs() < 1e-14);
        // proportional to (1, -1)/sqrt(2) up to a phase
        assert!((v.get(0, 0) + v.get(1, 0)).norm() < 1e-14);
        assert!((v.get(0, 0).norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn range_chain_ranks() {
        let n = ComplexMatrix::real(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let ranks: Vec<usize> = range_chain(&n, 3, &tol()).unwrap().iter().map(|b| b.cols()).collect();
        assert_eq!(ranks, vec![3, 2, 1, 0]);
        let i = ComplexMatrix::identity(2);
        let ranks: Vec<usize> = range_chain(&i, 2, &tol()).unwrap().iter().map(|b| b.cols()).collect();
        assert_eq!(ranks, vec![2, 2]);
    }

    #[test]
    fn policy_validation() {
        assert!(TolerancePolicy::new(1e-10, 1e-8, 1e-8).is_ok());
        assert!(TolerancePolicy::new(1.0, 1e-8, 1e-8).is_err());
        assert!(TolerancePolicy::new(1e-10, -1e-8, 1e-8).is_err());
    }
}
