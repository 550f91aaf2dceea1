//! Exact arithmetic over the Gaussian rationals, used as an oracle that
//! shares no code with the floating-point library.

#![allow(dead_code)]

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use pcore::matrix::c64;
use pcore::ComplexMatrix;
use rand::Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Q {
    pub re: BigRational,
    pub im: BigRational,
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl Q {
    pub fn new(re: i64, im: i64) -> Q {
        Q { re: int(re), im: int(im) }
    }

    pub fn ratio(re: (i64, i64), im: (i64, i64)) -> Q {
        Q {
            re: BigRational::new(re.0.into(), re.1.into()),
            im: BigRational::new(im.0.into(), im.1.into()),
        }
    }

    pub fn zero() -> Q {
        Q::new(0, 0)
    }

    pub fn one() -> Q {
        Q::new(1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Q {
        Q {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn inv(&self) -> Q {
        let d = &self.re * &self.re + &self.im * &self.im;
        assert!(!d.is_zero(), "inverse of zero");
        Q {
            re: &self.re / &d,
            im: -(&self.im / &d),
        }
    }
}

impl Add for &Q {
    type Output = Q;
    fn add(self, o: &Q) -> Q {
        Q {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
}

impl Sub for &Q {
    type Output = Q;
    fn sub(self, o: &Q) -> Q {
        Q {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
}

impl Mul for &Q {
    type Output = Q;
    fn mul(self, o: &Q) -> Q {
        Q {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for &Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

/// Row-major exact matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    pub e: Vec<Q>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> QMat {
        QMat {
            rows,
            cols,
            e: vec![Q::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> QMat {
        let mut m = QMat::zeros(n, n);
        for i in 0..n {
            m.e[i * n + i] = Q::one();
        }
        m
    }

    pub fn from_ints(rows: usize, cols: usize, v: &[(i64, i64)]) -> QMat {
        assert_eq!(v.len(), rows * cols);
        QMat {
            rows,
            cols,
            e: v.iter().map(|&(r, i)| Q::new(r, i)).collect(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &Q {
        &self.e[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.e[i * self.cols + j] = v;
    }

    pub fn mul(&self, o: &QMat) -> QMat {
        assert_eq!(self.cols, o.rows);
        let mut out = QMat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.at(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let v = &out.e[i * o.cols + j] + &(a * o.at(l, j));
                    out.e[i * o.cols + j] = v;
                }
            }
        }
        out
    }

    pub fn sub(&self, o: &QMat) -> QMat {
        QMat {
            rows: self.rows,
            cols: self.cols,
            e: self.e.iter().zip(&o.e).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn adjoint(&self) -> QMat {
        let mut out = QMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j).conj());
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> QMat {
        (0..k).fold(QMat::identity(self.rows), |acc, _| acc.mul(self))
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(Q::is_zero)
    }

    pub fn to_float(&self) -> ComplexMatrix {
        let v: Vec<_> = self
            .e
            .iter()
            .map(|q| c64(q.re.to_f64().unwrap(), q.im.to_f64().unwrap()))
            .collect();
        ComplexMatrix::new(self.rows, self.cols, v).unwrap()
    }
}

/// Reduced row echelon form and pivot columns.
pub fn rref(m: &QMat) -> (QMat, Vec<usize>) {
    let mut r = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..r.cols {
        if row == r.rows {
            break;
        }
        let Some(p) = (row..r.rows).find(|&i| !r.at(i, col).is_zero()) else {
            continue;
        };
        for j in 0..r.cols {
            r.e.swap(p * r.cols + j, row * r.cols + j);
        }
        let inv = r.at(row, col).inv();
        for j in 0..r.cols {
            let v = r.at(row, j) * &inv;
            r.set(row, j, v);
        }
        for i in 0..r.rows {
            if i == row || r.at(i, col).is_zero() {
                continue;
            }
            let f = r.at(i, col).clone();
            for j in 0..r.cols {
                let v = r.at(i, j) - &(&f * r.at(row, j));
                r.set(i, j, v);
            }
        }
        pivots.push(col);
        row += 1;
    }
    (r, pivots)
}

pub fn rank(m: &QMat) -> usize {
    rref(m).1.len()
}

/// Smallest `k` with `rank(a^k) = rank(a^(k+1))`.
pub fn index(a: &QMat) -> usize {
    let mut k = 0;
    let mut p = QMat::identity(a.rows);
    loop {
        let next = p.mul(a);
        if rank(&p) == rank(&next) {
            return k;
        }
        p = next;
        k += 1;
    }
}

pub fn inverse(a: &QMat) -> Option<QMat> {
    let n = a.rows;
    let mut aug = QMat::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug.set(i, j, a.at(i, j).clone());
        }
        aug.set(i, n + i, Q::one());
    }
    let (r, piv) = rref(&aug);
    if piv.len() < n || piv[n - 1] >= n {
        return None;
    }
    let mut out = QMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, r.at(i, n + j).clone());
        }
    }
    Some(out)
}

/// Orthogonal projector onto the column space of `m`.
pub fn range_projector(m: &QMat) -> QMat {
    let (_, piv) = rref(m);
    if piv.is_empty() {
        return QMat::zeros(m.rows, m.rows);
    }
    let mut f = QMat::zeros(m.rows, piv.len());
    for (c, &p) in piv.iter().enumerate() {
        for i in 0..m.rows {
            f.set(i, c, m.at(i, p).clone());
        }
    }
    let gram = f.adjoint().mul(&f);
    f.mul(&inverse(&gram).expect("gram of a basis is invertible")).mul(&f.adjoint())
}

/// The unique solution of `system * v = rhs`; `None` when the system is
/// inconsistent or underdetermined.
fn solve_unique(system: &QMat, rhs: &[Q]) -> Option<Vec<Q>> {
    let unknowns = system.cols;
    let mut aug = QMat::zeros(system.rows, unknowns + 1);
    for (i, b) in rhs.iter().enumerate() {
        for j in 0..unknowns {
            aug.set(i, j, system.at(i, j).clone());
        }
        aug.set(i, unknowns, b.clone());
    }
    let (r, piv) = rref(&aug);
    if piv.contains(&unknowns) || piv.len() < unknowns {
        return None;
    }
    Some((0..unknowns).map(|i| r.at(i, unknowns).clone()).collect())
}

/// Pseudo core inverse by brute force: the defining triple with the
/// Hermitian idempotent `ax` replaced by the projector onto `R(a^k)`, which
/// makes every equation linear in the entries of `x`:
/// `a x = P`, `(1 - P) x = 0`, `x a^(k+1) = a^k`.
pub fn pseudo_core_oracle(a: &QMat) -> QMat {
    let n = a.rows;
    let k = index(a);
    let ak = a.pow(k);
    let ak1 = ak.mul(a);
    let p = range_projector(&ak);
    let p_perp = QMat::identity(n).sub(&p);
    let unknown = |i: usize, j: usize| i * n + j;
    let mut system = QMat::zeros(3 * n * n, n * n);
    let mut rhs = Vec::with_capacity(3 * n * n);
    let mut row = 0;
    for (left, target) in [(a, &p), (&p_perp, &QMat::zeros(n, n))] {
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    system.set(row, unknown(l, j), left.at(i, l).clone());
                }
                rhs.push(target.at(i, j).clone());
                row += 1;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                system.set(row, unknown(i, l), ak1.at(l, j).clone());
            }
            rhs.push(ak.at(i, j).clone());
            row += 1;
        }
    }
    let x = solve_unique(&system, &rhs).expect("defining system has a unique solution");
    let out = QMat { rows: n, cols: n, e: x };
    // The original (nonlinear) triple, exactly.
    assert!(out.mul(&ak1).sub(&ak).is_zero());
    assert!(a.mul(&out).mul(&out).sub(&out).is_zero());
    let ax = a.mul(&out);
    assert!(ax.adjoint().sub(&ax).is_zero());
    out
}

fn small_gaussian_int<R: Rng>(rng: &mut R, bound: i64) -> Q {
    Q::new(rng.random_range(-bound..=bound), rng.random_range(-bound..=bound))
}

/// `S (K + N) S^-1` with exact integer entries: `S` is a product of
/// elementary shears (so `S^-1` is integral too), `K` an invertible `r x r`
/// block and `N` a single nilpotent Jordan block of order `k`.
pub fn exact_with_index<R: Rng>(rng: &mut R, n: usize, k: usize) -> QMat {
    assert!(k <= n);
    let r = n - k;
    let mut core = loop {
        let mut kb = QMat::zeros(r, r);
        for e in kb.e.iter_mut() {
            *e = small_gaussian_int(rng, 2);
        }
        if r == 0 || rank(&kb) == r {
            break kb;
        }
    };
    let mut b = QMat::zeros(n, n);
    for i in 0..r {
        for j in 0..r {
            b.set(i, j, std::mem::replace(&mut core.e[i * r + j], Q::zero()));
        }
    }
    for i in r..n.saturating_sub(1) {
        b.set(i, i + 1, Q::one());
    }
    let mut s = QMat::identity(n);
    let mut s_inv = QMat::identity(n);
    for _ in 0..2 * n {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        if i == j {
            continue;
        }
        let c = small_gaussian_int(rng, 1);
        let mut e = QMat::identity(n);
        e.set(i, j, c.clone());
        let mut e_inv = QMat::identity(n);
        e_inv.set(i, j, -&c);
        s = s.mul(&e);
        s_inv = e_inv.mul(&s_inv);
    }
    s.mul(&b).mul(&s_inv)
}
