//! One predicate per identity: each check evaluates the hypotheses on an
//! instance, evaluates the conclusion, and returns a [`TheoremReport`].
//!
//! "Equals zero" is always a rank-0 decision against the size of the factors
//! that produced the matrix (see [`zero_check`]), so a product that cancels
//! exactly in exact arithmetic is not mistaken for a small nonzero one.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cli::format::Instance;
use crate::error::{Error, Result};
use crate::geninv::{self, GenInverseResult};
use crate::matrix::{
    is_projection, rank_against, relative_distance, singular_values, vanishes, ComplexMatrix,
    TolerancePolicy,
};

mod additive;
mod blocks;
mod lemmas;

pub use additive::{check_corollary_3_2, check_theorem_3_1, example_3_3_pair, reproduce_example_3_3};
pub use blocks::{
    check_corollary_4_2, check_corollary_4_4, check_corollary_4_6, check_theorem_4_1,
    check_theorem_4_3, check_theorem_4_5,
};
pub use lemmas::{
    check_lemma_2_1, check_lemma_2_2, check_lemma_2_3, check_lemma_2_4, check_lemma_2_5,
    check_lemma_2_5_converse, check_theorem_1_1, lemma_2_5_window,
};

#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    T1_1,
    L2_1,
    L2_2,
    L2_3,
    L2_4,
    L2_5a,
    L2_5b,
    T3_1,
    C3_2,
    EX3_3,
    T4_1,
    C4_2,
    T4_3,
    C4_4,
    T4_5,
    C4_6,
}

impl TheoremId {
    pub const ALL: [TheoremId; 16] = [
        TheoremId::T1_1,
        TheoremId::L2_1,
        TheoremId::L2_2,
        TheoremId::L2_3,
        TheoremId::L2_4,
        TheoremId::L2_5a,
        TheoremId::L2_5b,
        TheoremId::T3_1,
        TheoremId::C3_2,
        TheoremId::EX3_3,
        TheoremId::T4_1,
        TheoremId::C4_2,
        TheoremId::T4_3,
        TheoremId::C4_4,
        TheoremId::T4_5,
        TheoremId::C4_6,
    ];

    /// Matrix symbols the check reads from an instance, in positional order.
    pub fn symbols(self) -> &'static [&'static str] {
        match self {
            TheoremId::T1_1 => &["a"],
            TheoremId::L2_5a => &["a", "b", "d"],
            TheoremId::L2_5b => &["x"],
            TheoremId::EX3_3 => &[],
            TheoremId::L2_1 | TheoremId::L2_2 | TheoremId::L2_3 | TheoremId::L2_4 | TheoremId::T3_1 | TheoremId::C3_2 => {
                &["a", "b"]
            }
            _ => &["A", "B", "C", "D"],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::T1_1 => "T1_1",
            TheoremId::L2_1 => "L2_1",
            TheoremId::L2_2 => "L2_2",
            TheoremId::L2_3 => "L2_3",
            TheoremId::L2_4 => "L2_4",
            TheoremId::L2_5a => "L2_5a",
            TheoremId::L2_5b => "L2_5b",
            TheoremId::T3_1 => "T3_1",
            TheoremId::C3_2 => "C3_2",
            TheoremId::EX3_3 => "EX3_3",
            TheoremId::T4_1 => "T4_1",
            TheoremId::C4_2 => "C4_2",
            TheoremId::T4_3 => "T4_3",
            TheoremId::C4_4 => "C4_4",
            TheoremId::T4_5 => "T4_5",
            TheoremId::C4_6 => "C4_6",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parameter(format!("unknown theorem id {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckValue {
    Flag(bool),
    Residual(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub value: CheckValue,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    HypothesesNotMet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    Flag(bool),
    Integer(u64),
    Real(f64),
    Matrix(ComplexMatrix),
}

impl From<bool> for Witness {
    fn from(b: bool) -> Self {
        Witness::Flag(b)
    }
}

impl From<usize> for Witness {
    fn from(n: usize) -> Self {
        Witness::Integer(n as u64)
    }
}

impl From<f64> for Witness {
    fn from(x: f64) -> Self {
        Witness::Real(x)
    }
}

impl From<ComplexMatrix> for Witness {
    fn from(m: ComplexMatrix) -> Self {
        Witness::Matrix(m)
    }
}

impl From<&ComplexMatrix> for Witness {
    fn from(m: &ComplexMatrix) -> Self {
        Witness::Matrix(m.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem_id: TheoremId,
    pub verdict: Verdict,
    pub hypothesis_checks: Vec<Check>,
    pub conclusion_checks: Vec<Check>,
    pub witnesses: BTreeMap<String, Witness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub policy: TolerancePolicy,
}

impl TheoremReport {
    pub fn witness(&self, name: &str) -> Option<&Witness> {
        self.witnesses.get(name)
    }

    pub fn witness_flag(&self, name: &str) -> Option<bool> {
        match self.witnesses.get(name) {
            Some(Witness::Flag(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn witness_int(&self, name: &str) -> Option<u64> {
        match self.witnesses.get(name) {
            Some(Witness::Integer(n)) => Some(*n),
            _ => None,
        }
    }

    pub fn witness_matrix(&self, name: &str) -> Option<&ComplexMatrix> {
        match self.witnesses.get(name) {
            Some(Witness::Matrix(m)) => Some(m),
            _ => None,
        }
    }

    pub fn conclusion(&self, label: &str) -> Option<&Check> {
        self.conclusion_checks.iter().find(|c| c.label == label)
    }

    pub fn hypothesis(&self, label: &str) -> Option<&Check> {
        self.hypothesis_checks.iter().find(|c| c.label == label)
    }
}

pub(crate) struct Builder {
    report: TheoremReport,
}

impl Builder {
    pub(crate) fn new(id: TheoremId, tol: &TolerancePolicy) -> Self {
        Builder {
            report: TheoremReport {
                theorem_id: id,
                verdict: Verdict::Pass,
                hypothesis_checks: Vec::new(),
                conclusion_checks: Vec::new(),
                witnesses: BTreeMap::new(),
                notes: Vec::new(),
                policy: *tol,
            },
        }
    }

    pub(crate) fn hyp(&mut self, c: Check) -> bool {
        let pass = c.pass;
        self.report.hypothesis_checks.push(c);
        pass
    }

    pub(crate) fn concl(&mut self, c: Check) -> bool {
        let pass = c.pass;
        self.report.conclusion_checks.push(c);
        pass
    }

    pub(crate) fn witness(&mut self, name: &str, w: impl Into<Witness>) {
        self.report.witnesses.insert(name.to_string(), w.into());
    }

    pub(crate) fn note(&mut self, text: impl Into<String>) {
        self.report.notes.push(text.into());
    }

    pub(crate) fn finish(mut self) -> TheoremReport {
        let r = &mut self.report;
        r.verdict = if r.hypothesis_checks.iter().any(|c| !c.pass) {
            Verdict::HypothesesNotMet
        } else if r.conclusion_checks.iter().all(|c| c.pass) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self.report
    }
}

pub(crate) fn flag(label: &str, value: bool) -> Check {
    Check {
        label: label.to_string(),
        value: CheckValue::Flag(value),
        pass: value,
    }
}

/// Rank-0 test of `m` against `scale`; the reported value is
/// `sigma_max(m) / scale`.
pub(crate) fn zero_check(label: &str, m: &ComplexMatrix, scale: f64, tol: &TolerancePolicy) -> Check {
    let smax = singular_values(m).first().copied().unwrap_or(0.0);
    let value = if scale > 0.0 { smax / scale } else { 0.0 };
    Check {
        label: label.to_string(),
        value: CheckValue::Residual(value),
        pass: vanishes(m, scale, tol),
    }
}

/// `x y = z w`, tested as the difference vanishing against the factor sizes.
pub(crate) fn product_eq_check(
    label: &str,
    (x, y): (&ComplexMatrix, &ComplexMatrix),
    (z, w): (&ComplexMatrix, &ComplexMatrix),
    tol: &TolerancePolicy,
) -> Result<Check> {
    let diff = x.try_mul(y)?.try_sub(&z.try_mul(w)?)?;
    let scale = x.frobenius_norm() * y.frobenius_norm() + z.frobenius_norm() * w.frobenius_norm();
    Ok(zero_check(label, &diff, scale, tol))
}

/// `x y = 0` against `||x|| ||y||`.
pub(crate) fn product_zero_check(
    label: &str,
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    tol: &TolerancePolicy,
) -> Result<Check> {
    let p = x.try_mul(y)?;
    Ok(zero_check(label, &p, x.frobenius_norm() * y.frobenius_norm(), tol))
}

pub(crate) fn eq_check(label: &str, lhs: &ComplexMatrix, rhs: &ComplexMatrix, tol: &TolerancePolicy) -> Result<Check> {
    let d = relative_distance(lhs, rhs)?;
    Ok(Check {
        label: label.to_string(),
        value: CheckValue::Residual(d),
        pass: d <= tol.eq_rel_tol,
    })
}

pub(crate) fn cert_check(label: &str, r: &GenInverseResult, tol: &TolerancePolicy) -> Check {
    Check {
        label: label.to_string(),
        value: CheckValue::Residual(r.max_residual()),
        pass: r.is_certified(tol),
    }
}

/// Reference size of an idempotent factor: at least 1, so a computed
/// idempotent that should be 0 does not shrink the reference to roundoff.
pub(crate) fn idem_norm(p: &ComplexMatrix) -> f64 {
    p.frobenius_norm().max(1.0)
}

/// `[a^0, a^1, ..., a^max]`, with the powers of a nilpotent `a` from its
/// index on set to exact zeros. Their computed values are pure roundoff, and
/// a zero test scaled by their computed norms would weigh roundoff against
/// roundoff.
pub(crate) fn powers(a: &ComplexMatrix, max: usize, tol: &TolerancePolicy) -> Result<Vec<ComplexMatrix>> {
    let n = a.rows();
    let vanish_from = if crate::matrix::is_nilpotent(a, tol) {
        geninv::index(a, tol)?
    } else {
        usize::MAX
    };
    let mut out = Vec::with_capacity(max + 1);
    out.push(ComplexMatrix::identity(n));
    for i in 1..=max {
        let next = if i >= vanish_from {
            ComplexMatrix::zeros(n, n)
        } else {
            &out[i - 1] * a
        };
        out.push(next);
    }
    Ok(out)
}

/// Outcome of a "for some m" search over an inclusive window.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SumSearch {
    pub found: Option<usize>,
    pub window: (usize, usize),
    /// Smallest `sigma_max / scale` seen in the window.
    pub best: f64,
}

pub(crate) fn search_window(
    lo: usize,
    hi: usize,
    tol: &TolerancePolicy,
    mut sum_at: impl FnMut(usize) -> (ComplexMatrix, f64),
) -> SumSearch {
    let mut best = f64::INFINITY;
    for m in lo..=hi {
        let (s, scale) = sum_at(m);
        let smax = singular_values(&s).first().copied().unwrap_or(0.0);
        let r = if scale > 0.0 { smax / scale } else { 0.0 };
        best = best.min(r);
        if rank_against(&s, scale, tol) == 0 {
            return SumSearch {
                found: Some(m),
                window: (lo, hi),
                best: r,
            };
        }
    }
    SumSearch {
        found: None,
        window: (lo, hi),
        best,
    }
}

/// `sum_{i=1}^{m} a^{i-1} a_pi b d^{m-i}` and its reference size, from
/// precomputed powers of `a` and `d` (at least `m` of each).
pub(crate) fn triangular_sum(
    a_pows: &[ComplexMatrix],
    a_pi: &ComplexMatrix,
    b: &ComplexMatrix,
    d_pows: &[ComplexMatrix],
    m: usize,
) -> (ComplexMatrix, f64) {
    let mut sum = ComplexMatrix::zeros(b.rows(), b.cols());
    let mut scale = 0.0;
    let pi_b = a_pi * b;
    let pi_ref = idem_norm(a_pi) * b.frobenius_norm();
    for i in 1..=m {
        let term = &(&a_pows[i - 1] * &pi_b) * &d_pows[m - i];
        sum = &sum + &term;
        scale += a_pows[i - 1].frobenius_norm() * pi_ref * d_pows[m - i].frobenius_norm();
    }
    (sum, scale)
}

pub(crate) fn pseudo(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<GenInverseResult> {
    geninv::pseudo_core(a, tol)
}

pub fn block_matrix(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    ComplexMatrix::from_blocks(a, b, c, d)
}

pub(crate) fn require_same_square(op: &'static str, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<usize> {
    let n = a.require_square(op)?;
    b.require_square(op)?;
    if b.rows() != n {
        return Err(Error::Dimension {
            op,
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(n)
}

/// Shapes of a 2x2 block operator: `A` nA x nA, `B` nA x nD, `C` nD x nA,
/// `D` nD x nD.
pub(crate) fn require_block_shapes(
    op: &'static str,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
) -> Result<(usize, usize)> {
    let na = a.require_square(op)?;
    let nd = d.require_square(op)?;
    if b.shape() != (na, nd) {
        return Err(Error::Dimension {
            op,
            left: (na, nd),
            right: b.shape(),
        });
    }
    if c.shape() != (nd, na) {
        return Err(Error::Dimension {
            op,
            left: (nd, na),
            right: c.shape(),
        });
    }
    Ok((na, nd))
}

/// The four corners `pap, pap^pi, p^pi a p, p^pi a p^pi` of `a` relative to
/// an orthogonal projection `p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PierceBlocks {
    pub p: ComplexMatrix,
    pub blocks: [ComplexMatrix; 4],
}

impl PierceBlocks {
    pub fn sum(&self) -> ComplexMatrix {
        let [b0, b1, b2, b3] = &self.blocks;
        &(&(b0 + b1) + b2) + b3
    }
}

pub fn pierce_decompose(a: &ComplexMatrix, p: &ComplexMatrix, tol: &TolerancePolicy) -> Result<PierceBlocks> {
    require_same_square("pierce_decompose", a, p)?;
    if !is_projection(p, tol) {
        return Err(Error::InvalidProjection);
    }
    let q = &ComplexMatrix::identity(a.rows()) - p;
    let pa = p * a;
    let qa = &q * a;
    Ok(PierceBlocks {
        p: p.clone(),
        blocks: [&pa * p, &pa * &q, &qa * p, &qa * &q],
    })
}

/// Runs the check for `id` on the named matrices of `inst` (`a`, `b`, `d`,
/// `x` with `split`, or the blocks `A`, `B`, `C`, `D`). EX3_3 ignores
/// the instance.
pub fn run_check(id: TheoremId, inst: &Instance, tol: &TolerancePolicy) -> Result<TheoremReport> {
    let m = |k: &str| inst.get(k);
    match id {
        TheoremId::T1_1 => check_theorem_1_1(m("a")?, tol),
        TheoremId::L2_1 => check_lemma_2_1(m("a")?, m("b")?, tol),
        TheoremId::L2_2 => check_lemma_2_2(m("a")?, m("b")?, tol),
        TheoremId::L2_3 => check_lemma_2_3(m("a")?, m("b")?, tol),
        TheoremId::L2_4 => check_lemma_2_4(m("a")?, m("b")?, tol),
        TheoremId::L2_5a => check_lemma_2_5(m("a")?, m("b")?, m("d")?, tol),
        TheoremId::L2_5b => {
            let split = inst
                .split
                .ok_or_else(|| Error::Parameter("instance is missing split".into()))?;
            check_lemma_2_5_converse(m("x")?, split, tol)
        }
        TheoremId::T3_1 => check_theorem_3_1(m("a")?, m("b")?, tol),
        TheoremId::C3_2 => check_corollary_3_2(m("a")?, m("b")?, tol),
        TheoremId::EX3_3 => reproduce_example_3_3(tol),
        _ => {
            let (a, b, c, d) = (m("A")?, m("B")?, m("C")?, m("D")?);
            match id {
                TheoremId::T4_1 => check_theorem_4_1(a, b, c, d, tol),
                TheoremId::C4_2 => check_corollary_4_2(a, b, c, d, tol),
                TheoremId::T4_3 => check_theorem_4_3(a, b, c, d, tol),
                TheoremId::C4_4 => check_corollary_4_4(a, b, c, d, tol),
                TheoremId::T4_5 => check_theorem_4_5(a, b, c, d, tol),
                _ => check_corollary_4_6(a, b, c, d, tol),
            }
        }
    }
}
