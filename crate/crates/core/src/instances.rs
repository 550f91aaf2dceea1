//! Seeded generators for theorem instances.
//!
//! Hypotheses are met by construction: linear constraints on an unknown block
//! are turned into a real linear system (conjugate-linear ones included, by
//! evaluating on `E_jk` and `i E_jk`), and the unknown is drawn from its
//! kernel. To make those kernels large, the fixed matrices carry planted
//! reducing blocks shared across the constraint. Nilpotency, the one
//! non-linear hypothesis, is handled by rejection with a `C = 0` fallback that
//! marks the instance degenerate.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cli::format::Instance;
use crate::error::{Error, Result};
use crate::geninv::{index, pseudo_core, spectral_idempotent};
use crate::matrix::{
    c64, is_nilpotent_against, product, real_null_space, svd, ComplexMatrix, TolerancePolicy, C64,
};
use crate::theorems::TheoremId;

/// Largest matrix a generator will build.
pub const MAX_DIM: usize = 16;
/// Largest diagonal block of a block instance.
pub const MAX_BLOCK_DIM: usize = 8;
/// Rejection attempts before falling back to `C = 0`.
pub const RETRY_CAP: usize = 64;
/// Largest accepted `||M||_2 ||M^D||_2` for a generated block matrix.
pub const BLOCK_COND_CAP: f64 = 1e4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Plain,
    WithIndex,
    CommutantPair,
    StarDmp,
    AnnihilatingPair,
    #[serde(rename = "lemma_2_5")]
    Lemma25,
    #[serde(rename = "intertwined_4_1")]
    Intertwined41,
    #[serde(rename = "intertwined_4_3")]
    Intertwined43,
    #[serde(rename = "zero_product_4_5")]
    ZeroProduct45,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub dims: Vec<usize>,
    pub target_index: Option<usize>,
    pub seed: u64,
    pub scale: f64,
}

/// Named matrices plus the degenerate-fallback flag.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedInstance {
    pub instance: Instance,
    pub degenerate: bool,
}

impl GeneratedInstance {
    fn new(pairs: Vec<(&str, ComplexMatrix)>, degenerate: bool) -> Self {
        let matrices: BTreeMap<String, ComplexMatrix> =
            pairs.into_iter().map(|(k, m)| (k.to_string(), m)).collect();
        GeneratedInstance {
            instance: Instance { matrices, split: None },
            degenerate,
        }
    }

    pub fn get(&self, key: &str) -> &ComplexMatrix {
        self.instance.matrices.get(key).expect("generated key present")
    }
}

/// A 2x2 block instance `(A, B, C, D)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockInstance {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
    pub d: ComplexMatrix,
    pub degenerate: bool,
}

impl BlockInstance {
    /// `(A*, C*, B*, D*)`, the blocks of `M*`.
    pub fn dual(&self) -> BlockInstance {
        BlockInstance {
            a: self.a.conjugate_transpose(),
            b: self.c.conjugate_transpose(),
            c: self.b.conjugate_transpose(),
            d: self.d.conjugate_transpose(),
            degenerate: self.degenerate,
        }
    }

    fn into_generated(self) -> GeneratedInstance {
        GeneratedInstance::new(
            vec![("A", self.a), ("B", self.b), ("C", self.c), ("D", self.d)],
            self.degenerate,
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma25Instance {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub d: ComplexMatrix,
    /// Exponent the sum constraint was imposed at.
    pub m: usize,
    pub degenerate: bool,
}

/// Per-trial seed: the master-seeded stream number `trial`, first word.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng.next_u64()
}

fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Tolerance for kernels of constraint systems. Stricter than the check
/// tolerance so that sampled blocks satisfy the constraints with margin.
fn kernel_tol() -> TolerancePolicy {
    TolerancePolicy {
        rank_rel_tol: 1e-12,
        ..TolerancePolicy::default()
    }
}

fn check_tol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    c64(normal(rng) * s, normal(rng) * s)
}

fn unit_phase(rng: &mut ChaCha8Rng) -> C64 {
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    c64(t.cos(), t.sin())
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_normal(rng) * scale)
}

fn wrap(m: DMatrix<C64>) -> ComplexMatrix {
    ComplexMatrix::from_inner(m)
}

/// Haar unitary: the polar factor of a complex Gaussian matrix.
fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
    let d = svd(&gaussian(rng, n, n, 1.0));
    d.u * d.v.adjoint()
}

/// `U diag(sigma) V*` with `sigma` uniform in `[lo, hi]`, and its inverse.
fn conditioned_pair(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> (DMatrix<C64>, DMatrix<C64>) {
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let sig: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, sig.iter().map(|&s| c64(s, 0.0))));
    let dinv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, sig.iter().map(|&s| c64(1.0 / s, 0.0))));
    (&u * d * v.adjoint(), v * dinv * u.adjoint())
}

/// Invertible `r x r` block with singular values clamped into `[0.1, 10]`.
fn invertible_block(rng: &mut ChaCha8Rng, r: usize) -> DMatrix<C64> {
    if r == 0 {
        return DMatrix::zeros(0, 0);
    }
    let d = svd(&gaussian(rng, r, r, 1.0));
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        r,
        d.s.iter().map(|x| c64(x.clamp(0.1, 10.0), 0.0)),
    ));
    d.u * s * d.v.adjoint()
}

/// Invertible block with prescribed spectrum: `V T V*`, `T` upper triangular
/// with `eigs` on the diagonal.
fn schur_block(rng: &mut ChaCha8Rng, eigs: &[C64]) -> DMatrix<C64> {
    let r = eigs.len();
    let v = random_unitary(rng, r);
    let mut t = DMatrix::zeros(r, r);
    for i in 0..r {
        t[(i, i)] = eigs[i];
        for j in i + 1..r {
            t[(i, j)] = complex_normal(rng) * 0.5;
        }
    }
    &v * t * v.adjoint()
}

fn random_eigenvalue(rng: &mut ChaCha8Rng) -> C64 {
    unit_phase(rng) * rng.random_range(0.5..=2.0)
}

/// Nilpotent `size x size` matrix of Jordan-like blocks, each at most `k`
/// long, the first exactly `k`; superdiagonal magnitudes in `[0.5, 2]`.
fn nilpotent_block(rng: &mut ChaCha8Rng, size: usize, k: usize) -> DMatrix<C64> {
    let mut n = DMatrix::zeros(size, size);
    if size == 0 || k <= 1 {
        return n;
    }
    let mut start = 0;
    let mut len = k.min(size);
    while start < size {
        for i in start..start + len - 1 {
            n[(i, i + 1)] = unit_phase(rng) * rng.random_range(0.5..=2.0);
        }
        start += len;
        if start < size {
            len = rng.random_range(1..=k.min(size - start));
        }
    }
    n
}

fn block_diag(parts: &[&DMatrix<C64>]) -> DMatrix<C64> {
    let n: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut m = DMatrix::zeros(n, n);
    let mut o = 0;
    for p in parts {
        m.view_mut((o, o), p.shape()).copy_from(p);
        o += p.nrows();
    }
    m
}

fn check_with_index_params(n: usize, k: usize, r: usize) -> Result<()> {
    let ok = (1..=MAX_DIM).contains(&n) && if k == 0 { r == n } else { r + k <= n };
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "no matrix of size {n} with index {k} and invertible part of rank {r}"
        )))
    }
}

fn with_index_from(rng: &mut ChaCha8Rng, n: usize, k: usize, r: usize, core: DMatrix<C64>) -> DMatrix<C64> {
    let nil = nilpotent_block(rng, n - r, k);
    let (s, s_inv) = conditioned_pair(rng, n, 0.5, 2.0);
    s * block_diag(&[&core, &nil]) * s_inv
}

/// `S (K ⊕ N) S^{-1}` with index exactly `k` and `rank K = r`.
pub fn gen_with_index(n: usize, k: usize, r: usize, seed: u64) -> Result<ComplexMatrix> {
    check_with_index_params(n, k, r)?;
    let mut rng = rng_from(seed);
    Ok(wrap(with_index_inner(&mut rng, n, k, r)))
}

fn with_index_inner(rng: &mut ChaCha8Rng, n: usize, k: usize, r: usize) -> DMatrix<C64> {
    let core = invertible_block(rng, r);
    with_index_from(rng, n, k, r, core)
}

/// Random feasible `(k, r)` for size `n` with `k <= max_k`.
fn random_index_rank(rng: &mut ChaCha8Rng, n: usize, max_k: usize) -> (usize, usize) {
    let k = rng.random_range(0..=max_k.min(n));
    let r = if k == 0 { n } else { rng.random_range(0..=n - k) };
    (k, r)
}

/// Like [`random_index_rank`], but in four draws out of five keeps an
/// invertible part (`r >= 1`); triangular sum constraints on `b` are only
/// guaranteed nontrivial kernels when `a` has one.
fn index_rank_with_core(rng: &mut ChaCha8Rng, n: usize, max_k: usize) -> (usize, usize) {
    if rng.random_bool(0.8) {
        let k = rng.random_range(0..=max_k.min(n - 1));
        let r = if k == 0 { n } else { rng.random_range(1..=n - k) };
        (k, r)
    } else {
        random_index_rank(rng, n, max_k)
    }
}

/// `(k, r)` that does not give the zero matrix.
fn nonzero_index_rank(rng: &mut ChaCha8Rng, n: usize, max_k: usize) -> (usize, usize) {
    loop {
        let (k, r) = random_index_rank(rng, n, max_k);
        if r > 0 || k >= 2 {
            return (k, r);
        }
    }
}

/// Complex Gaussian matrix.
pub fn gen_plain(n: usize, seed: u64, scale: f64) -> Result<ComplexMatrix> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::Parameter(format!("dimension {n} outside 1..={MAX_DIM}")));
    }
    let mut rng = rng_from(seed);
    Ok(wrap(gaussian(&mut rng, n, n, scale)))
}

/// Real matrix of a real-linear map from `rows x cols` complex matrices,
/// evaluated on the basis `E_jk`, `i E_jk`.
fn realify(rows: usize, cols: usize, map: &dyn Fn(&ComplexMatrix) -> Vec<ComplexMatrix>) -> DMatrix<f64> {
    let unknowns = 2 * rows * cols;
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(unknowns);
    for j in 0..rows {
        for k in 0..cols {
            for unit in [c64(1.0, 0.0), c64(0.0, 1.0)] {
                let mut e = DMatrix::zeros(rows, cols);
                e[(j, k)] = unit;
                let mut col = Vec::new();
                for out in map(&wrap(e)) {
                    for z in out.inner().iter() {
                        col.push(z.re);
                        col.push(z.im);
                    }
                }
                columns.push(col);
            }
        }
    }
    let height = columns.first().map(|c| c.len()).unwrap_or(0);
    DMatrix::from_fn(height, unknowns, |i, j| columns[j][i])
}

/// Kernel basis (real coordinates) of a real-linear constraint map.
fn constraint_kernel(
    rows: usize,
    cols: usize,
    scale: f64,
    map: &dyn Fn(&ComplexMatrix) -> Vec<ComplexMatrix>,
) -> DMatrix<f64> {
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    real_null_space(&realify(rows, cols, map), scale, &kernel_tol())
}

/// Random combination of kernel vectors, normalized to Frobenius norm
/// `scale * U[0.5, 2]`; `None` when the kernel is trivial.
fn sample_kernel(
    rng: &mut ChaCha8Rng,
    basis: &DMatrix<f64>,
    rows: usize,
    cols: usize,
    scale: f64,
) -> Option<ComplexMatrix> {
    if basis.ncols() == 0 {
        return None;
    }
    let coeffs = nalgebra::DVector::from_fn(basis.ncols(), |_, _| normal(rng));
    let v = basis * coeffs;
    let m = DMatrix::from_fn(rows, cols, |j, k| {
        let idx = 2 * (j * cols + k);
        c64(v[idx], v[idx + 1])
    });
    let norm = m.norm();
    if norm == 0.0 {
        return None;
    }
    let target = scale * rng.random_range(0.5..=2.0);
    Some(wrap(m * c64(target / norm, 0.0)))
}

fn commutant_map(a: &ComplexMatrix) -> impl Fn(&ComplexMatrix) -> Vec<ComplexMatrix> + '_ {
    let a_star = a.conjugate_transpose();
    move |b: &ComplexMatrix| vec![&(a * b) - &(b * a), &(&a_star * b) - &(b * &a_star)]
}

/// `b` from the kernel of `b -> (ab - ba, a*b - ba*)`.
pub fn commutant_sample(a: &ComplexMatrix, seed: u64, scale: f64) -> Result<(ComplexMatrix, bool)> {
    let n = a.require_square("commutant_sample")?;
    let mut rng = rng_from(seed);
    Ok(commutant_inner(&mut rng, a, n, scale))
}

fn commutant_inner(rng: &mut ChaCha8Rng, a: &ComplexMatrix, n: usize, scale: f64) -> (ComplexMatrix, bool) {
    let map = commutant_map(a);
    let basis = constraint_kernel(n, n, a.frobenius_norm(), &map);
    match sample_kernel(rng, &basis, n, n, scale) {
        Some(b) => (b, false),
        None => (ComplexMatrix::zeros(n, n), true),
    }
}

/// Pair with `ab = ba`, `a*b = ba*`, `index(a) = target_index`.
///
/// `a = W (a1 ⊕ a2) W*` with `W` unitary, which makes the block identities
/// (and anything on a scalar block) part of the kernel. In about a third of
/// the draws `b` is shifted by a multiple of the first block identity so that
/// `a + b` loses an eigenvalue of `a1`'s invertible part; these are the pairs
/// on which the additive clauses can come out false.
pub fn gen_commutant_pair(n: usize, seed: u64, target_index: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if n == 0 || n > MAX_DIM || target_index > n {
        return Err(Error::Parameter(format!("infeasible commutant pair: n = {n}, index {target_index}")));
    }
    let mut rng = rng_from(seed);
    Ok(commutant_pair_inner(&mut rng, n, target_index))
}

fn commutant_pair_inner(rng: &mut ChaCha8Rng, n: usize, k: usize) -> (ComplexMatrix, ComplexMatrix) {
    // Block 1 holds the nilpotent part of length k plus (when room) a core
    // with known spectrum.
    let split = n >= 2 && rng.random_bool(0.75);
    let n1 = if split {
        let lo = (k + 1).min(n - 1).max(1);
        if lo < n {
            rng.random_range(lo..=n - 1)
        } else {
            n
        }
    } else {
        n
    };
    let n1 = n1.max(k);
    let r1 = if k == 0 {
        n1
    } else if n1 > k {
        rng.random_range(1..=n1 - k)
    } else {
        0
    };
    let eigs: Vec<C64> = (0..r1).map(|_| random_eigenvalue(rng)).collect();
    let core = schur_block(rng, &eigs);
    let a1 = with_index_from(rng, n1, k, r1, core);

    let n2 = n - n1;
    let a2 = if n2 == 0 {
        DMatrix::zeros(0, 0)
    } else if rng.random_bool(0.5) {
        // Scalar block; zero only when the index allows a null part.
        let lam = if k >= 1 && rng.random_bool(0.25) { c64(0.0, 0.0) } else { random_eigenvalue(rng) };
        DMatrix::identity(n2, n2) * lam
    } else {
        let (k2, r2) = random_index_rank(rng, n2, k);
        with_index_inner(rng, n2, k2, r2)
    };
    let w = random_unitary(rng, n);
    let a = wrap(&w * block_diag(&[&a1, &a2]) * w.adjoint());
    let (mut b, _) = commutant_inner(rng, &a, n, 1.0);

    if r1 > 0 && rng.random_bool(1.0 / 3.0) {
        let mut e1 = DMatrix::zeros(n, n);
        for i in 0..n1 {
            e1[(i, i)] = c64(1.0, 0.0);
        }
        let p1 = wrap(&w * e1 * w.adjoint());
        let beta = (&p1 * &b).inner().trace() / c64(n1 as f64, 0.0);
        let shift = -eigs[0] - beta;
        b = &b + &p1.scale(shift);
    }
    (a, b)
}

/// `U (K ⊕ N) U*` with `U` unitary, `K` normal invertible, `N` nilpotent of
/// index `k`.
pub fn gen_star_dmp(n: usize, r: usize, k: usize, seed: u64) -> Result<ComplexMatrix> {
    check_with_index_params(n, k, r)?;
    let mut rng = rng_from(seed);
    Ok(star_dmp_inner(&mut rng, n, r, k))
}

fn star_dmp_inner(rng: &mut ChaCha8Rng, n: usize, r: usize, k: usize) -> ComplexMatrix {
    let v = random_unitary(rng, r);
    let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(r, |_, _| random_eigenvalue(rng)));
    let core = &v * lam * v.adjoint();
    let nil = nilpotent_block(rng, n - r, k);
    let u = random_unitary(rng, n);
    wrap(&u * block_diag(&[&core, &nil]) * u.adjoint())
}

/// `a = W (X ⊕ 0) W*`, `b = W (0 ⊕ Y) W*`: orthogonal supports.
pub fn gen_annihilating_pair(n: usize, seed: u64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !(2..=MAX_DIM).contains(&n) {
        return Err(Error::Parameter(format!("annihilating pair needs 2 <= n <= {MAX_DIM}, got {n}")));
    }
    let mut rng = rng_from(seed);
    let n1 = rng.random_range(1..n);
    let n2 = n - n1;
    let (k1, r1) = nonzero_index_rank(&mut rng, n1, 3);
    let (k2, r2) = nonzero_index_rank(&mut rng, n2, 3);
    let x = with_index_inner(&mut rng, n1, k1, r1);
    let y = with_index_inner(&mut rng, n2, k2, r2);
    let w = random_unitary(&mut rng, n);
    let z1 = DMatrix::zeros(n1, n1);
    let z2 = DMatrix::zeros(n2, n2);
    let a = wrap(&w * block_diag(&[&x, &z2]) * w.adjoint());
    let b = wrap(&w * block_diag(&[&z1, &y]) * w.adjoint());
    Ok((a, b))
}

/// Factors `a^{i-1} a^pi` for `i = 1..=m`, set exactly to zero once
/// `i - 1 >= i(a)` so that vanishing terms carry no roundoff into a kernel.
fn sum_left_factors(a: &ComplexMatrix, m: usize) -> Result<Vec<ComplexMatrix>> {
    let tol = check_tol();
    let ia = index(a, &tol)?;
    let a_pi = spectral_idempotent(a, &tol)?;
    let n = a.rows();
    Ok((1..=m)
        .map(|i| {
            if i > ia {
                ComplexMatrix::zeros(n, n)
            } else {
                &a.pow(i - 1).expect("square") * &a_pi
            }
        })
        .collect())
}

/// `b -> sum_{i=1}^{m} a^{i-1} a^pi b d^{m-i}` and the operator scale
/// `sum ||a^{i-1} a^pi|| ||d^{m-i}||`.
fn triangular_map(
    a: &ComplexMatrix,
    d: &ComplexMatrix,
    m: usize,
) -> Result<(f64, impl Fn(&ComplexMatrix) -> Vec<ComplexMatrix>)> {
    let tol = check_tol();
    let left = sum_left_factors(a, m)?;
    let nilpotent_d = is_nilpotent_against(d, 0.0, &tol);
    let id = index(d, &tol)?;
    let right: Vec<ComplexMatrix> = (1..=m)
        .map(|i| {
            if nilpotent_d && m - i >= id {
                ComplexMatrix::zeros(d.rows(), d.rows())
            } else {
                d.pow(m - i).expect("square")
            }
        })
        .collect();
    let scale = left
        .iter()
        .zip(&right)
        .map(|(l, r)| l.frobenius_norm() * r.frobenius_norm())
        .sum();
    Ok((scale, move |b: &ComplexMatrix| {
        let mut s = ComplexMatrix::zeros(b.rows(), b.cols());
        for (l, r) in left.iter().zip(&right) {
            s = &s + &(&(l * b) * r);
        }
        vec![s]
    }))
}

/// `(a, b, d)` with the triangular sum vanishing at `m = i(a) + i(d) + 1`.
pub fn gen_lemma_2_5_instance(na: usize, nd: usize, seed: u64) -> Result<Lemma25Instance> {
    check_block_dims(na, nd)?;
    let mut rng = rng_from(seed);
    let (ka, ra) = index_rank_with_core(&mut rng, na, 3);
    let (kd, rd) = random_index_rank(&mut rng, nd, 3);
    let a = wrap(with_index_inner(&mut rng, na, ka, ra));
    let d = wrap(with_index_inner(&mut rng, nd, kd, rd));
    let m = ka + kd + 1;
    let (scale, map) = triangular_map(&a, &d, m)?;
    let basis = constraint_kernel(na, nd, scale, &map);
    let (b, degenerate) = match sample_kernel(&mut rng, &basis, na, nd, 1.0) {
        Some(b) => (b, false),
        None => (ComplexMatrix::zeros(na, nd), true),
    };
    Ok(Lemma25Instance { a, b, d, m, degenerate })
}

fn check_block_dims(na: usize, nd: usize) -> Result<()> {
    if na == 0 || nd == 0 || na > MAX_BLOCK_DIM || nd > MAX_BLOCK_DIM {
        return Err(Error::Parameter(format!(
            "block dimensions must lie in 1..={MAX_BLOCK_DIM}, got {na} and {nd}"
        )));
    }
    Ok(())
}

/// Fixed diagonal blocks `A = W_A (G ⊕ A_r) W_A*`, `D = W_D (G ⊕ D_r) W_D*`
/// sharing the `g x g` block `G`.
struct SharedBlocks {
    a: ComplexMatrix,
    d: ComplexMatrix,
    wa: DMatrix<C64>,
    wd: DMatrix<C64>,
    g: usize,
}

impl SharedBlocks {
    fn scale(&self) -> f64 {
        self.a.frobenius_norm().max(self.d.frobenius_norm())
    }
}

fn shared_blocks(rng: &mut ChaCha8Rng, na: usize, nd: usize, g: usize, nilpotent_g: bool) -> SharedBlocks {
    let gm = if nilpotent_g {
        let kg = rng.random_range(1..=g);
        with_index_inner(rng, g, kg, 0)
    } else {
        let (kg, rg) = random_index_rank(rng, g, 2);
        with_index_inner(rng, g, kg, rg)
    };
    let rest = |rng: &mut ChaCha8Rng, n: usize, with_core: bool| {
        if n == 0 {
            DMatrix::zeros(0, 0)
        } else {
            let (k, r) = if with_core {
                index_rank_with_core(rng, n, 3)
            } else {
                random_index_rank(rng, n, 3)
            };
            with_index_inner(rng, n, k, r)
        }
    };
    // The zero-product layout puts B on the A_r rows, where only an
    // invertible part of A_r leaves the sum constraint room.
    let ar = rest(rng, na - g, !nilpotent_g);
    let dr = rest(rng, nd - g, false);
    let wa = random_unitary(rng, na);
    let wd = random_unitary(rng, nd);
    SharedBlocks {
        a: wrap(&wa * block_diag(&[&gm, &ar]) * wa.adjoint()),
        d: wrap(&wd * block_diag(&[&gm, &dr]) * wd.adjoint()),
        wa,
        wd,
        g,
    }
}

/// Draws `B`, `C` from their kernels until `accept` holds for the assembled
/// quadruple; after [`RETRY_CAP`] failures `C` is set to zero.
fn rejection_sample(
    rng: &mut ChaCha8Rng,
    a: &ComplexMatrix,
    d: &ComplexMatrix,
    b_basis: &DMatrix<f64>,
    c_basis: &DMatrix<f64>,
    arrange: &dyn Fn(BlockInstance) -> BlockInstance,
    accept: &dyn Fn(&BlockInstance) -> Result<bool>,
) -> Result<BlockInstance> {
    let (na, nd) = (a.rows(), d.rows());
    let b = sample_kernel(rng, b_basis, na, nd, 1.0).unwrap_or_else(|| ComplexMatrix::zeros(na, nd));
    for _ in 0..RETRY_CAP {
        let c = match sample_kernel(rng, c_basis, nd, na, 1.0) {
            Some(c) => c,
            None => break,
        };
        let cand = arrange(BlockInstance {
            a: a.clone(),
            b: b.clone(),
            c,
            d: d.clone(),
            degenerate: false,
        });
        if accept(&cand)? && conditioned(&cand)? {
            return Ok(cand);
        }
    }
    let mut fallback = arrange(BlockInstance {
        a: a.clone(),
        b,
        c: ComplexMatrix::zeros(nd, na),
        d: d.clone(),
        degenerate: true,
    });
    // The fallback zeroes the C of the final arrangement.
    fallback.c = ComplexMatrix::zeros(fallback.d.rows(), fallback.a.rows());
    fallback.degenerate = true;
    Ok(fallback)
}

fn conditioned(k: &BlockInstance) -> Result<bool> {
    let m = crate::theorems::block_matrix(&k.a, &k.b, &k.c, &k.d)?;
    Ok(m.spectral_norm() * pc(&m)?.spectral_norm() <= BLOCK_COND_CAP)
}

/// Nilpotency of a product, judged as the checks judge it.
fn nilpotent_product(factors: &[&ComplexMatrix]) -> bool {
    let p = product(factors);
    let scale: f64 = factors.iter().map(|f| f.frobenius_norm()).product();
    is_nilpotent_against(&p, scale, &check_tol())
}

fn pc(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(pseudo_core(m, &check_tol())?.inverse)
}

fn pick_shared(rng: &mut ChaCha8Rng, na: usize, nd: usize) -> usize {
    rng.random_range(1..=na.min(nd))
}

fn kernels_4_1(s: &SharedBlocks) -> (DMatrix<f64>, DMatrix<f64>) {
    let (a, d) = (&s.a, &s.d);
    let (a_star, d_star) = (a.conjugate_transpose(), d.conjugate_transpose());
    let b_map = |b: &ComplexMatrix| vec![&(a * b) - &(b * d), &(&a_star * b) - &(b * &d_star)];
    let c_map = |c: &ComplexMatrix| vec![&(d * c) - &(c * a), &(&d_star * c) - &(c * &a_star)];
    (
        constraint_kernel(a.rows(), d.rows(), s.scale(), &b_map),
        constraint_kernel(d.rows(), a.rows(), s.scale(), &c_map),
    )
}

fn identity_arrangement(q: BlockInstance) -> BlockInstance {
    q
}

fn dual_arrangement(q: BlockInstance) -> BlockInstance {
    q.dual()
}

/// Quadruple with `AB = BD`, `DC = CA`, `A*B = BD*`, `D*C = CA*` and
/// `A^D B D^D C` nilpotent.
pub fn gen_intertwined_4_1(na: usize, nd: usize, seed: u64) -> Result<BlockInstance> {
    check_block_dims(na, nd)?;
    let mut rng = rng_from(seed);
    let g = pick_shared(&mut rng, na, nd);
    let s = shared_blocks(&mut rng, na, nd, g, true);
    let (bk, ck) = kernels_4_1(&s);
    rejection_sample(&mut rng, &s.a, &s.d, &bk, &ck, &identity_arrangement, &|q| {
        Ok(nilpotent_product(&[&pc(&q.a)?, &q.b, &pc(&q.d)?, &q.c]))
    })
}

/// The same intertwinings with `B D^D C A^D` nilpotent, drawn on the dual
/// arrangement of a 4.1-style sample.
pub fn gen_corollary_4_2(na: usize, nd: usize, seed: u64) -> Result<BlockInstance> {
    check_block_dims(na, nd)?;
    let mut rng = rng_from(seed);
    let g = pick_shared(&mut rng, na, nd);
    // The dual swaps the roles of B and C, so build with swapped block sizes.
    let s = shared_blocks(&mut rng, na, nd, g, true);
    let (bk, ck) = kernels_4_1(&s);
    rejection_sample(&mut rng, &s.a, &s.d, &bk, &ck, &dual_arrangement, &|q| {
        Ok(nilpotent_product(&[&q.b, &pc(&q.d)?, &q.c, &pc(&q.a)?]))
    })
}

fn kernels_4_3(s: &SharedBlocks) -> (DMatrix<f64>, DMatrix<f64>) {
    let (a, d) = (&s.a, &s.d);
    let b_map = |b: &ComplexMatrix| {
        let b_star = b.conjugate_transpose();
        vec![&(a * b) - &(b * d), &(&b_star * a) - &(d * &b_star)]
    };
    let c_map = |c: &ComplexMatrix| vec![&(d * c) - &(c * a)];
    (
        constraint_kernel(a.rows(), d.rows(), s.scale(), &b_map),
        constraint_kernel(d.rows(), a.rows(), s.scale(), &c_map),
    )
}

/// Quadruple with `AB = BD`, `DC = CA`, `B*A = DB*` and
/// `B (CB)^D D C (BC)^D A` nilpotent.
pub fn gen_intertwined_4_3(na: usize, nd: usize, seed: u64) -> Result<BlockInstance> {
    check_block_dims(na, nd)?;
    let mut rng = rng_from(seed);
    let g = pick_shared(&mut rng, na, nd);
    let s = shared_blocks(&mut rng, na, nd, g, true);
    let (bk, ck) = kernels_4_3(&s);
    rejection_sample(&mut rng, &s.a, &s.d, &bk, &ck, &identity_arrangement, &|q| {
        let cb = pc(&(&q.c * &q.b))?;
        let bc = pc(&(&q.b * &q.c))?;
        Ok(nilpotent_product(&[&q.b, &cb, &q.d, &q.c, &bc, &q.a]))
    })
}

/// Dual arrangement of a 4.3-style sample: `AB = BD`, `DC = CA`,
/// `AC* = C*D`, with `A (BC)^D B D (CB)^D C` nilpotent.
pub fn gen_corollary_4_4(na: usize, nd: usize, seed: u64) -> Result<BlockInstance> {
    check_block_dims(na, nd)?;
    let mut rng = rng_from(seed);
    let g = pick_shared(&mut rng, na, nd);
    let s = shared_blocks(&mut rng, na, nd, g, true);
    let (bk, ck) = kernels_4_3(&s);
    rejection_sample(&mut rng, &s.a, &s.d, &bk, &ck, &dual_arrangement, &|q| {
        let bc = pc(&(&q.b * &q.c))?;
        let cb = pc(&(&q.c * &q.b))?;
        Ok(nilpotent_product(&[&q.a, &bc, &q.b, &q.d, &cb, &q.c]))
    })
}

#[derive(Clone, Copy)]
enum SumForm {
    /// `sum_{i=1}^{m} A^{i-1} A^pi B D^{m-i}` at `m = i(A) + i(D) + 1`.
    Triangular,
    /// `sum_{i=1}^{i(A)} A^{i-1} A^pi B`.
    Truncated,
}

fn zero_product_inner(rng: &mut ChaCha8Rng, na: usize, nd: usize, form: SumForm) -> Result<BlockInstance> {
    // Keep a complement on both sides whenever the sizes allow it.
    let cap = na.min(nd);
    let g = if cap >= 2 { rng.random_range(1..cap) } else { 1 };
    let s = shared_blocks(rng, na, nd, g, false);
    let (a, d) = (&s.a, &s.d);
    let tol = check_tol();

    // C = W_D [[X, 0], [0, 0]] W_A*.
    let (wa, wd) = (wrap(s.wa.clone()), wrap(s.wd.clone()));
    let (wa_star, wd_star) = (wa.conjugate_transpose(), wd.conjugate_transpose());
    let embed_c = |x: &ComplexMatrix| {
        let mut m = DMatrix::zeros(nd, na);
        m.view_mut((0, 0), (s.g, s.g)).copy_from(x.inner());
        &(&wd * &wrap(m)) * &wa_star
    };
    let c_map = |x: &ComplexMatrix| {
        let c = embed_c(x);
        let c_star = c.conjugate_transpose();
        vec![&(&c * a) - &(d * &c), &(a * &c_star) - &(&c_star * d)]
    };
    let c_basis = constraint_kernel(s.g, s.g, s.scale(), &c_map);

    // B = W_A [[0, 0], [0, Y]] W_D*.
    let (ya, yd) = (na - s.g, nd - s.g);
    let embed_b = |y: &ComplexMatrix| {
        let mut m = DMatrix::zeros(na, nd);
        if ya > 0 && yd > 0 {
            m.view_mut((s.g, s.g), (ya, yd)).copy_from(y.inner());
        }
        &(&wa * &wrap(m)) * &wd_star
    };
    let ia = index(a, &tol)?;
    let id = index(d, &tol)?;
    let b_basis = match form {
        SumForm::Triangular => {
            let (scale, map) = triangular_map(a, d, ia + id + 1)?;
            constraint_kernel(ya, yd, scale, &|y: &ComplexMatrix| map(&embed_b(y)))
        }
        SumForm::Truncated => {
            let left = sum_left_factors(a, ia)?;
            let scale = left.iter().map(|l| l.frobenius_norm()).sum();
            constraint_kernel(ya, yd, scale, &|y: &ComplexMatrix| {
                let b = embed_b(y);
                let mut sum = ComplexMatrix::zeros(na, nd);
                for l in &left {
                    sum = &sum + &(l * &b);
                }
                vec![sum]
            })
        }
    };

    let b = if ya > 0 && yd > 0 {
        sample_kernel(rng, &b_basis, ya, yd, 1.0).map(|y| embed_b(&y))
    } else {
        None
    };
    let c = sample_kernel(rng, &c_basis, s.g, s.g, 1.0).map(|x| embed_c(&x));
    let degenerate = b.is_none() || c.is_none();
    let b = b.unwrap_or_else(|| ComplexMatrix::zeros(na, nd));
    let c = c.unwrap_or_else(|| ComplexMatrix::zeros(nd, na));
    Ok(BlockInstance {
        a: s.a.clone(),
        b,
        c,
        d: s.d.clone(),
        degenerate,
    })
}

/// Quadruple with `BC = 0`, `CB = 0`, `CA = DC`, `AC* = C*D` and the
/// triangular sum on `(A, B, D)` vanishing.
pub fn gen_zero_product_4_5(na: usize, nd: usize, seed: u64) -> Result<BlockInstance> {
    check_block_dims(na, nd)?;
    let mut rng = rng_from(seed);
    zero_product_inner(&mut rng, na, nd, SumForm::Triangular)
}

/// Dual arrangement of a 4.5-style sample built with the truncated sum, so
/// that `BC = 0`, `CB = 0`, `AB = BD`, `A*B = BD*` and
/// `sum_{i=1}^{i(A)} C A^{i-1} A^pi = 0`.
pub fn gen_corollary_4_6(na: usize, nd: usize, seed: u64) -> Result<BlockInstance> {
    check_block_dims(na, nd)?;
    let mut rng = rng_from(seed);
    Ok(zero_product_inner(&mut rng, na, nd, SumForm::Truncated)?.dual())
}

/// Generator dispatch for an [`InstanceSpec`].
pub fn generate(spec: &InstanceSpec) -> Result<GeneratedInstance> {
    if !(spec.scale.is_finite() && spec.scale > 0.0) {
        return Err(Error::Parameter("scale must be positive".into()));
    }
    let n = *spec
        .dims
        .first()
        .ok_or_else(|| Error::Parameter("at least one dimension required".into()))?;
    if spec.dims.len() > 2 || spec.dims.iter().any(|&d| d == 0 || d > MAX_DIM) {
        return Err(Error::Parameter(format!("dims must be one or two values in 1..={MAX_DIM}")));
    }
    let second = spec.dims.get(1).copied().unwrap_or(n);
    let mut rng = rng_from(spec.seed);
    let seed = rng.next_u64();
    let scaled = |m: ComplexMatrix| m.scale(c64(spec.scale, 0.0));
    Ok(match spec.kind {
        InstanceKind::Plain => GeneratedInstance::new(vec![("a", gen_plain(n, seed, spec.scale)?)], false),
        InstanceKind::WithIndex => {
            let k = spec.target_index.unwrap_or(1).min(n);
            let r = if k == 0 { n } else { rng.random_range(0..=n - k) };
            GeneratedInstance::new(vec![("a", scaled(gen_with_index(n, k, r, seed)?))], false)
        }
        InstanceKind::CommutantPair => {
            let k = spec.target_index.unwrap_or(1).min(n);
            let (a, b) = gen_commutant_pair(n, seed, k)?;
            GeneratedInstance::new(vec![("a", scaled(a)), ("b", scaled(b))], false)
        }
        InstanceKind::StarDmp => {
            let k = spec.target_index.unwrap_or(1).min(n);
            let r = if k == 0 { n } else { rng.random_range(0..=n - k) };
            let a = gen_star_dmp(n, r, k, seed)?;
            let (b, degenerate) = commutant_sample(&a, rng.next_u64(), 1.0)?;
            GeneratedInstance::new(vec![("a", scaled(a)), ("b", scaled(b))], degenerate)
        }
        InstanceKind::AnnihilatingPair => {
            let (a, b) = gen_annihilating_pair(n, seed)?;
            GeneratedInstance::new(vec![("a", scaled(a)), ("b", scaled(b))], false)
        }
        InstanceKind::Lemma25 => {
            let l = gen_lemma_2_5_instance(n, second, seed)?;
            GeneratedInstance::new(vec![("a", scaled(l.a)), ("b", scaled(l.b)), ("d", scaled(l.d))], l.degenerate)
        }
        InstanceKind::Intertwined41 => gen_intertwined_4_1(n, second, seed)?.into_generated(),
        InstanceKind::Intertwined43 => gen_intertwined_4_3(n, second, seed)?.into_generated(),
        InstanceKind::ZeroProduct45 => gen_zero_product_4_5(n, second, seed)?.into_generated(),
    })
}

/// A random instance meeting the hypotheses of `theorem` (or, for the
/// unconditional checks, a representative input). `dims` holds one size, or
/// two block sizes for the block theorems.
pub fn instance_for(theorem: TheoremId, dims: &[usize], seed: u64) -> Result<GeneratedInstance> {
    let n = *dims
        .first()
        .ok_or_else(|| Error::Parameter("at least one dimension required".into()))?;
    let second = dims.get(1).copied().unwrap_or(n);
    if dims.len() > 2 {
        return Err(Error::Parameter("at most two dimensions".into()));
    }
    if n == 0 || n > MAX_DIM {
        return Err(Error::Parameter(format!("dimension {n} outside 1..={MAX_DIM}")));
    }
    let mut rng = rng_from(seed);
    let sub = rng.next_u64();
    let single = |ok: bool| {
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("{theorem} takes a single dimension")))
        }
    };
    let pair = |a: ComplexMatrix, b: ComplexMatrix| GeneratedInstance::new(vec![("a", a), ("b", b)], false);
    Ok(match theorem {
        TheoremId::T1_1 => {
            single(dims.len() == 1)?;
            let (k, r) = random_index_rank(&mut rng, n, 3);
            GeneratedInstance::new(vec![("a", gen_with_index(n, k, r, sub)?)], false)
        }
        TheoremId::L2_1 | TheoremId::L2_2 | TheoremId::T3_1 => {
            single(dims.len() == 1)?;
            let k = if n == 1 { rng.random_range(0..=1) } else { rng.random_range(0..=3.min(n - 1)) };
            let k = if theorem == TheoremId::T3_1 && n >= 2 && k == 0 && rng.random_bool(0.5) { 1 } else { k };
            let (a, b) = gen_commutant_pair(n, sub, k)?;
            pair(a, b)
        }
        TheoremId::C3_2 => {
            single(dims.len() == 1)?;
            let (k, r) = random_index_rank(&mut rng, n, 3);
            let a = gen_star_dmp(n, r, k, sub)?;
            let (b, degenerate) = commutant_sample(&a, rng.next_u64(), 1.0)?;
            GeneratedInstance::new(vec![("a", a), ("b", b)], degenerate)
        }
        TheoremId::L2_3 => {
            single(dims.len() == 1)?;
            let (a, b) = gen_annihilating_pair(n, sub)?;
            pair(a, b)
        }
        TheoremId::L2_4 => {
            single(dims.len() == 1)?;
            let (k, r) = random_index_rank(&mut rng, n, 3);
            let a = gen_with_index(n, k, r, sub)?;
            let c = wrap(gaussian(&mut rng, n, n, 1.0));
            let b = if rng.random_bool(0.5) {
                let x = pc(&a)?;
                &(&x * &a) * &c
            } else {
                c
            };
            pair(a, b)
        }
        TheoremId::L2_5a | TheoremId::L2_5b => {
            let l = gen_lemma_2_5_instance(n, second, sub)?;
            if theorem == TheoremId::L2_5a {
                GeneratedInstance::new(vec![("a", l.a), ("b", l.b), ("d", l.d)], l.degenerate)
            } else {
                let x = ComplexMatrix::from_blocks(&l.a, &l.b, &ComplexMatrix::zeros(second, n), &l.d)?;
                let mut g = GeneratedInstance::new(vec![("x", x)], l.degenerate);
                g.instance.split = Some(n);
                g
            }
        }
        TheoremId::EX3_3 => {
            let (a, b) = crate::theorems::example_3_3_pair();
            pair(a, b)
        }
        TheoremId::T4_1 => gen_intertwined_4_1(n, second, sub)?.into_generated(),
        TheoremId::C4_2 => gen_corollary_4_2(n, second, sub)?.into_generated(),
        TheoremId::T4_3 => gen_intertwined_4_3(n, second, sub)?.into_generated(),
        TheoremId::C4_4 => gen_corollary_4_4(n, second, sub)?.into_generated(),
        TheoremId::T4_5 => gen_zero_product_4_5(n, second, sub)?.into_generated(),
        TheoremId::C4_6 => gen_corollary_4_6(n, second, sub)?.into_generated(),
    })
}
