//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs as a plain binary so the lines always show.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use pcore::error::Error;
use pcore::geninv::{self, GenInverseResult};
use pcore::instances::{gen_with_index, instance_for, trial_seed};
use pcore::matrix::{c64, relative_distance};
use pcore::theorems::{reproduce_example_3_3, run_check, TheoremId, TheoremReport, Verdict};
use pcore::{ComplexMatrix, TolerancePolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn tol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn within(limit: Duration, start: Instant, detail: String) -> Outcome {
    let t = start.elapsed();
    if t > limit {
        Err(format!("{detail}; took {t:.2?}, limit {limit:?}"))
    } else {
        Ok(format!("{detail}; {t:.2?}"))
    }
}

/// Runs `trials` generated instances of `id`, cycling through `dims`.
fn campaign(id: TheoremId, dims: &[Vec<usize>], trials: u64, seed: u64) -> Vec<(bool, Result<TheoremReport, Error>)> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let d = &dims[t as usize % dims.len()];
            match instance_for(id, d, trial_seed(seed, t)) {
                Ok(g) => (g.degenerate, run_check(id, &g.instance, &tol())),
                Err(e) => (false, Err(e)),
            }
        })
        .collect()
}

fn all_pass(id: TheoremId, runs: &[(bool, Result<TheoremReport, Error>)]) -> Result<(), String> {
    for (i, (_, r)) in runs.iter().enumerate() {
        match r {
            Ok(rep) if rep.verdict == Verdict::Pass => {}
            Ok(rep) => return Err(format!("{id} trial {i}: verdict {:?}", rep.verdict)),
            Err(e) => return Err(format!("{id} trial {i}: {e}")),
        }
    }
    Ok(())
}

fn single_dims(range: std::ops::RangeInclusive<usize>) -> Vec<Vec<usize>> {
    range.map(|n| vec![n]).collect()
}

fn example_3_3() -> Outcome {
    let start = Instant::now();
    let t = tol();
    let r = reproduce_example_3_3(&t).map_err(|e| e.to_string())?;
    if r.verdict != Verdict::Pass {
        return Err("report verdict is not pass".into());
    }
    let expect = |name: &str, want: &ComplexMatrix| -> Result<(), String> {
        let got = r.witness_matrix(name).ok_or(format!("missing witness {name}"))?;
        let d = relative_distance(got, want).map_err(|e| e.to_string())?;
        if d <= t.eq_rel_tol {
            Ok(())
        } else {
            Err(format!("{name} off by {d:e}"))
        }
    };
    let z = c64(0.0, 0.0);
    let m = |v: [num_complex::Complex64; 4]| ComplexMatrix::new(2, 2, v.to_vec()).unwrap();
    expect("a_pcore", &m([c64(0.0, -1.0), z, z, z]))?;
    expect("b_pcore", &m([z; 4]))?;
    expect("one_plus_a_pcore_b", &ComplexMatrix::identity(2))?;
    expect("annihilation", &m([z, z, c64(-0.5, 0.0), z]))?;
    expect(
        "sum_pcore",
        &m([c64(0.0, -0.5), c64(0.5, 0.0), c64(-0.5, 0.0), c64(0.0, -0.5)]),
    )?;
    let comm = r
        .conclusion("(iv) ab != ba")
        .ok_or("missing commutator check")?;
    if !comm.pass {
        return Err("ab = ba reported".into());
    }
    within(Duration::from_secs(1), start, "all displayed values matched".into())
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(2101);
    let mut worst: f64 = 0.0;
    let mut by_index = [0usize; 4];
    for trial in 0..200 {
        let n = rng.random_range(2..=4);
        let k = rng.random_range(0..=n.min(3));
        let a = common::exact_with_index(&mut rng, n, k);
        by_index[k] += 1;
        let exact = common::pseudo_core_oracle(&a).to_float();
        let got = geninv::pseudo_core(&a.to_float(), &t).map_err(|e| format!("trial {trial}: {e}"))?;
        let d = relative_distance(&got.inverse, &exact).unwrap();
        worst = worst.max(d);
        if d > 1e-8 {
            return Err(format!("trial {trial} (n={n}, k={k}): distance {d:e}"));
        }
    }
    within(
        Duration::from_secs(30),
        start,
        format!("200 matrices, indices {by_index:?}, worst distance {worst:.1e}"),
    )
}

fn certificate_suite() -> Outcome {
    let start = Instant::now();
    let t = tol();
    let results: Vec<Result<(usize, f64), String>> = (0..500u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(3303, trial));
            let n = rng.random_range(2..=10);
            let k = rng.random_range(0..=n.min(3));
            let r = if k == 0 { n } else { rng.random_range(0..=n - k) };
            let a = gen_with_index(n, k, r, rng.random()).map_err(|e| e.to_string())?;
            let fail = |what: &str| format!("trial {trial} (n={n}, k={k}, r={r}): {what}");
            let mut worst: f64 = 0.0;
            let mut certify = |res: GenInverseResult| {
                worst = worst.max(res.max_residual());
                if res.is_certified(&t) {
                    Ok(())
                } else {
                    Err(fail(&format!("{:?} residual {:e}", res.kind, res.max_residual())))
                }
            };
            let always = [
                geninv::moore_penrose(&a, &t),
                geninv::one_three(&a, &t),
                geninv::drazin(&a, &t),
                geninv::pseudo_core(&a, &t),
            ];
            for res in always {
                certify(res.map_err(|e| fail(&e.to_string()))?)?;
            }
            for res in [geninv::group_inverse(&a, &t), geninv::core_inverse(&a, &t)] {
                match (k <= 1, res) {
                    (true, Ok(x)) => certify(x)?,
                    (false, Err(Error::NoGroupInverse { .. } | Error::NoCoreInverse { .. })) => {}
                    (true, Err(e)) => return Err(fail(&format!("refused with index {k}: {e}"))),
                    (false, Ok(_)) => return Err(fail("returned an inverse for index >= 2")),
                    (false, Err(e)) => return Err(fail(&format!("wrong error {e}"))),
                }
            }
            Ok((k, worst))
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut refused = 0;
    for r in results {
        let (k, w) = r?;
        worst = worst.max(w);
        refused += usize::from(k >= 2);
    }
    within(
        Duration::from_secs(60),
        start,
        format!("500 matrices, {refused} correctly refused group/core, worst residual {worst:.1e}"),
    )
}

fn lemma_fuzz() -> Outcome {
    let start = Instant::now();
    let dims = single_dims(3..=8);
    for (i, id) in [TheoremId::L2_1, TheoremId::L2_2, TheoremId::L2_3, TheoremId::L2_4]
        .into_iter()
        .enumerate()
    {
        all_pass(id, &campaign(id, &dims, 500, 4400 + i as u64))?;
    }
    within(Duration::from_secs(180), start, "4 x 500 instances, zero failures".into())
}

fn lemma_2_5() -> Outcome {
    let start = Instant::now();
    let dims: Vec<Vec<usize>> = (1..=5).flat_map(|a| (1..=5).map(move |d| vec![a, d])).collect();
    let forward = campaign(TheoremId::L2_5a, &dims, 300, 5501);
    all_pass(TheoremId::L2_5a, &forward)?;
    let converse = campaign(TheoremId::L2_5b, &dims, 300, 5502);
    all_pass(TheoremId::L2_5b, &converse)?;
    for (i, (_, r)) in converse.iter().enumerate() {
        let r = r.as_ref().unwrap();
        let (lo, hi) = (r.witness_int("m_window_lo"), r.witness_int("m_window_hi"));
        match (r.witness_int("m"), lo, hi) {
            (Some(m), Some(lo), Some(hi)) if lo <= m && m <= hi => {}
            _ => return Err(format!("converse trial {i}: no m inside the window")),
        }
    }
    let degenerate = forward.iter().filter(|(d, _)| *d).count();
    within(
        Duration::from_secs(120),
        start,
        format!("300 forward + 300 converse, {degenerate} degenerate forward instances"),
    )
}

fn theorem_3_1() -> Outcome {
    let start = Instant::now();
    let runs = campaign(TheoremId::T3_1, &single_dims(2..=8), 300, 6601);
    all_pass(TheoremId::T3_1, &runs)?;
    let mut non_ep = 0;
    let mut lhs_true = 0;
    for (_, r) in &runs {
        let r = r.as_ref().unwrap();
        if r.witness_flag("lhs") != r.witness_flag("rhs") {
            return Err("LHS and RHS differ".into());
        }
        non_ep += usize::from(r.witness_flag("bracket_zero") == Some(false));
        lhs_true += usize::from(r.witness_flag("lhs") == Some(true));
    }
    if non_ep < 100 {
        return Err(format!("only {non_ep} pairs with a nonzero bracket"));
    }
    let cor = campaign(TheoremId::C3_2, &single_dims(2..=8), 200, 6602);
    all_pass(TheoremId::C3_2, &cor)?;
    within(
        Duration::from_secs(120),
        start,
        format!("300 pairs ({non_ep} non-EP, {lhs_true} with both sides true) + 200 corollary samples"),
    )
}

fn block_theorems() -> Outcome {
    let start = Instant::now();
    let dims: Vec<Vec<usize>> = (2..=5).flat_map(|a| (2..=5).map(move |d| vec![a, d])).collect();
    let mut notes = Vec::new();
    for (i, id) in [
        TheoremId::T4_1,
        TheoremId::C4_2,
        TheoremId::T4_3,
        TheoremId::C4_4,
        TheoremId::T4_5,
        TheoremId::C4_6,
    ]
    .into_iter()
    .enumerate()
    {
        let runs = campaign(id, &dims, 200, 7700 + i as u64);
        all_pass(id, &runs)?;
        let degenerate = runs.iter().filter(|(d, _)| *d).count();
        if degenerate * 2 >= runs.len() {
            return Err(format!("{id}: degenerate fraction {degenerate}/200"));
        }
        let mut worst: f64 = 0.0;
        for (_, r) in &runs {
            let r = r.as_ref().unwrap();
            let c = r.conclusion("M^D certified").ok_or("missing certificate")?;
            if let pcore::theorems::CheckValue::Residual(v) = c.value {
                worst = worst.max(v);
            }
            if id == TheoremId::T4_3 && !r.conclusion("Q^D = Q (Q^2)^D").is_some_and(|c| c.pass) {
                return Err("Q^D = Q (Q^2)^D failed".into());
            }
        }
        notes.push(format!("{id} deg {degenerate}/200 res {worst:.0e}"));
    }
    within(Duration::from_secs(300), start, notes.join(", "))
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let exe = env!("CARGO_BIN_EXE_pcore");
    let commands: [&[&str]; 3] = [
        &["fuzz", "--theorem", "T4_3", "--dims", "3,2", "--trials", "12", "--seed", "9"],
        &["fuzz", "--theorem", "T3_1", "--dim", "5", "--trials", "20", "--seed", "11"],
        &["fuzz", "--theorem", "L2_5b", "--dims", "2,3", "--trials", "15", "--seed", "4"],
    ];
    for args in commands {
        let run = || {
            Command::new(exe)
                .args(args)
                .output()
                .map_err(|e| format!("cannot run {exe}: {e}"))
        };
        let (first, second) = (run()?, run()?);
        if !first.status.success() {
            return Err(format!("{args:?} exited with {:?}", first.status.code()));
        }
        if first.stdout != second.stdout {
            return Err(format!("{args:?} produced different reports"));
        }
    }
    for id in [TheoremId::T4_5, TheoremId::L2_1] {
        let dims = if id == TheoremId::T4_5 { vec![vec![3, 3]] } else { vec![vec![6]] };
        let a = campaign(id, &dims, 10, 12);
        let b = campaign(id, &dims, 10, 12);
        let same = a.iter().zip(&b).all(|(x, y)| x.1.as_ref().ok() == y.1.as_ref().ok());
        if !same {
            return Err(format!("{id} reports differ between runs"));
        }
    }
    within(Duration::from_secs(60), start, "3 CLI campaigns byte-identical across runs".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("EX3_3 reproduction", example_3_3),
        ("oracle equivalence", oracle_equivalence),
        ("certificate suite", certificate_suite),
        ("lemma fuzz", lemma_fuzz),
        ("L2_5a and L2_5b", lemma_2_5),
        ("T3_1 equivalence and C3_2", theorem_3_1),
        ("block theorems", block_theorems),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
