//! Command-line front end. Every command builds a [`RunReport`] and an exit
//! code; `main` only prints them.

pub mod format;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geninv::{self, GenInverseResult};
use crate::instances::{instance_for, trial_seed};
use crate::matrix::{ComplexMatrix, TolerancePolicy};
use crate::theorems::{run_check, TheoremId, TheoremReport, Verdict};
use format::{parse_matrix, Instance, MatrixFile};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_INVERSE: i32 = 3;
pub const EXIT_HYPOTHESES: i32 = 4;
pub const EXIT_GENERATOR: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "pcore", version, about = "Generalized inverses of complex matrices and seeded checks of identities about them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct TolArgs {
    /// Relative cut for numerical rank.
    #[arg(long = "rank-tol", global = true)]
    pub rank_tol: Option<f64>,
    /// Relative tolerance for matrix equality.
    #[arg(long = "eq-tol", global = true)]
    pub eq_tol: Option<f64>,
    /// Bound on certificate residuals.
    #[arg(long = "res-tol", global = true)]
    pub res_tol: Option<f64>,
}

impl TolArgs {
    pub fn policy(&self) -> Result<TolerancePolicy> {
        let d = TolerancePolicy::default();
        TolerancePolicy::new(
            self.rank_tol.unwrap_or(d.rank_rel_tol),
            self.eq_tol.unwrap_or(d.eq_rel_tol),
            self.res_tol.unwrap_or(d.residual_tol),
        )
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one inverse (or the index, spectral idempotent, *-DMP test) of a matrix file.
    Compute {
        #[arg(long, value_enum)]
        kind: ComputeKind,
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Check a theorem on matrices read from disk.
    ///
    /// Either one instance file (a JSON object keyed by symbol) or one matrix
    /// file per symbol, in the theorem's symbol order.
    Verify {
        #[arg(long)]
        theorem: TheoremId,
        #[arg(long)]
        input: Vec<PathBuf>,
        /// Block split for L2_5b when matrices are given positionally.
        #[arg(long)]
        split: Option<usize>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Run a seeded campaign of generated instances through a theorem check.
    Fuzz {
        #[arg(long)]
        theorem: TheoremId,
        #[command(flatten)]
        dims: DimArgs,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Omit per-trial reports.
        #[arg(long)]
        brief: bool,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Print one generated instance as an instance file.
    Generate {
        #[arg(long)]
        theorem: TheoremId,
        #[command(flatten)]
        dims: DimArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Reproduce the fixed two-by-two example.
    #[command(name = "example-3-3")]
    Example33 {
        #[command(flatten)]
        tol: TolArgs,
    },
}

#[derive(Debug, Args, Clone)]
#[group(required = true, multiple = false)]
pub struct DimArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    /// Comma separated, e.g. `3,2` for block sizes.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
}

impl DimArgs {
    pub fn list(&self) -> Vec<usize> {
        match (&self.dims, self.dim) {
            (Some(d), _) => d.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ComputeKind {
    #[value(name = "mp", alias = "moore_penrose")]
    MoorePenrose,
    #[value(name = "one_three")]
    OneThree,
    #[value(name = "group")]
    Group,
    #[value(name = "drazin")]
    Drazin,
    #[value(name = "core")]
    Core,
    #[value(name = "pcore", alias = "pseudo_core")]
    PseudoCore,
    #[value(name = "index")]
    Index,
    #[value(name = "spectral_idempotent")]
    SpectralIdempotent,
    #[value(name = "star_dmp")]
    StarDmp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Entry {
    Inverse(GenInverseResult),
    Index { index: usize },
    Matrix { matrix: MatrixFile },
    StarDmp { star_dmp: bool, power: usize },
    Theorem(TheoremReport),
    Trial(Box<TrialRecord>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub degenerate: bool,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<TheoremReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    HypothesesNotMet,
    Error,
}

impl From<Verdict> for Outcome {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => Outcome::Pass,
            Verdict::Fail => Outcome::Fail,
            Verdict::HypothesesNotMet => Outcome::HypothesesNotMet,
        }
    }
}

/// `pass + fail + hypotheses_not_met + error == instances`; `degenerate`
/// counts generator fallbacks among them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub instances: usize,
    pub pass: usize,
    pub fail: usize,
    pub hypotheses_not_met: usize,
    pub error: usize,
    pub degenerate: usize,
}

impl Summary {
    fn add(&mut self, o: Outcome) {
        self.instances += 1;
        match o {
            Outcome::Pass => self.pass += 1,
            Outcome::Fail => self.fail += 1,
            Outcome::HypothesesNotMet => self.hypotheses_not_met += 1,
            Outcome::Error => self.error += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub policy: TolerancePolicy,
    pub results: Vec<Entry>,
    pub summary: Summary,
}

impl RunReport {
    fn new(command: &[String], seed: Option<u64>, policy: TolerancePolicy) -> Self {
        RunReport {
            command: command.to_vec(),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            policy,
            results: Vec::new(),
            summary: Summary::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// What a command hands back to `main`.
#[derive(Debug)]
pub enum Output {
    Report(RunReport, i32),
    Text(String, i32),
}

impl Output {
    pub fn code(&self) -> i32 {
        match self {
            Output::Report(_, c) | Output::Text(_, c) => *c,
        }
    }
}

/// Exit code for an error that escapes a command.
pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::NoGroupInverse { .. } | Error::NoCoreInverse { .. } => EXIT_NO_INVERSE,
        Error::Numerical(_) => EXIT_FAIL,
        _ => EXIT_INPUT,
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parameter(format!("cannot read {}: {e}", path.display())))
}

/// Runs a parsed command line; `argv` (without the program name) is echoed
/// into the report.
pub fn run(cli: &Cli, argv: &[String]) -> Result<Output> {
    match &cli.command {
        Command::Compute { kind, input, tol } => compute(*kind, input, &tol.policy()?, argv),
        Command::Verify {
            theorem,
            input,
            split,
            tol,
        } => verify(*theorem, input, *split, &tol.policy()?, argv),
        Command::Fuzz {
            theorem,
            dims,
            trials,
            seed,
            brief,
            tol,
        } => fuzz(*theorem, &dims.list(), *trials, *seed, *brief, &tol.policy()?, argv),
        Command::Generate { theorem, dims, seed } => {
            let g = instance_for(*theorem, &dims.list(), *seed)?;
            Ok(Output::Text(g.instance.to_json(), EXIT_PASS))
        }
        Command::Example33 { tol } => verify(TheoremId::EX3_3, &[], None, &tol.policy()?, argv),
    }
}

pub fn compute(kind: ComputeKind, input: &PathBuf, tol: &TolerancePolicy, argv: &[String]) -> Result<Output> {
    let a = parse_matrix(&read(input)?)?;
    let mut report = RunReport::new(argv, None, *tol);
    let (entry, ok) = match kind {
        ComputeKind::Index => (
            Entry::Index {
                index: geninv::index(&a, tol)?,
            },
            true,
        ),
        ComputeKind::SpectralIdempotent => (
            Entry::Matrix {
                matrix: geninv::spectral_idempotent(&a, tol)?.into(),
            },
            true,
        ),
        ComputeKind::StarDmp => {
            let (star_dmp, power) = geninv::is_star_dmp(&a, tol)?;
            (Entry::StarDmp { star_dmp, power }, true)
        }
        _ => {
            let r = inverse(kind, &a, tol)?;
            let ok = r.is_certified(tol);
            (Entry::Inverse(r), ok)
        }
    };
    report.summary.add(if ok { Outcome::Pass } else { Outcome::Fail });
    report.results.push(entry);
    Ok(Output::Report(report, if ok { EXIT_PASS } else { EXIT_FAIL }))
}

fn inverse(kind: ComputeKind, a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<GenInverseResult> {
    match kind {
        ComputeKind::MoorePenrose => geninv::moore_penrose(a, tol),
        ComputeKind::OneThree => geninv::one_three(a, tol),
        ComputeKind::Group => geninv::group_inverse(a, tol),
        ComputeKind::Drazin => geninv::drazin(a, tol),
        ComputeKind::Core => geninv::core_inverse(a, tol),
        _ => geninv::pseudo_core(a, tol),
    }
}

/// One instance file, or one matrix file per symbol of `theorem`.
pub fn load_instance(theorem: TheoremId, inputs: &[PathBuf], split: Option<usize>) -> Result<Instance> {
    let symbols = theorem.symbols();
    let texts = inputs.iter().map(read).collect::<Result<Vec<_>>>()?;
    let mut inst = if texts.len() == 1 && MatrixFile::parse(&texts[0]).is_err() {
        Instance::parse(&texts[0])?
    } else {
        if texts.len() != symbols.len() {
            return Err(Error::Parameter(format!(
                "{theorem} takes {} matrices ({}), got {}",
                symbols.len(),
                symbols.join(", "),
                texts.len()
            )));
        }
        let mut inst = Instance::default();
        for (s, t) in symbols.iter().zip(&texts) {
            inst.matrices.insert(s.to_string(), parse_matrix(t)?);
        }
        inst
    };
    if split.is_some() {
        inst.split = split;
    }
    Ok(inst)
}

pub fn verify(
    theorem: TheoremId,
    inputs: &[PathBuf],
    split: Option<usize>,
    tol: &TolerancePolicy,
    argv: &[String],
) -> Result<Output> {
    let inst = load_instance(theorem, inputs, split)?;
    let r = run_check(theorem, &inst, tol)?;
    let code = match r.verdict {
        Verdict::Pass => EXIT_PASS,
        Verdict::Fail => EXIT_FAIL,
        Verdict::HypothesesNotMet => EXIT_HYPOTHESES,
    };
    let mut report = RunReport::new(argv, None, *tol);
    report.summary.add(r.verdict.into());
    report.results.push(Entry::Theorem(r));
    Ok(Output::Report(report, code))
}

fn run_trial(theorem: TheoremId, dims: &[usize], seed: u64, trial: u64, tol: &TolerancePolicy) -> TrialRecord {
    let s = trial_seed(seed, trial);
    let mut rec = TrialRecord {
        trial,
        seed: s,
        degenerate: false,
        outcome: Outcome::Error,
        error: None,
        report: None,
    };
    let g = match instance_for(theorem, dims, s) {
        Ok(g) => g,
        Err(e) => {
            rec.error = Some(format!("generator: {e}"));
            return rec;
        }
    };
    rec.degenerate = g.degenerate;
    match run_check(theorem, &g.instance, tol) {
        Ok(r) => {
            rec.outcome = r.verdict.into();
            rec.report = Some(r);
        }
        Err(e) => rec.error = Some(format!("check: {e}")),
    }
    rec
}

pub fn fuzz(
    theorem: TheoremId,
    dims: &[usize],
    trials: u64,
    seed: u64,
    brief: bool,
    tol: &TolerancePolicy,
    argv: &[String],
) -> Result<Output> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    // Fail on bad dimensions before spending any trials.
    instance_for(theorem, dims, trial_seed(seed, 0))?;
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(theorem, dims, seed, t, tol))
        .collect();
    let mut report = RunReport::new(argv, Some(seed), *tol);
    for mut rec in records {
        report.summary.add(rec.outcome);
        report.summary.degenerate += usize::from(rec.degenerate);
        if brief {
            rec.report = None;
        }
        report.results.push(Entry::Trial(Box::new(rec)));
    }
    let s = &report.summary;
    let code = if s.fail > 0 {
        EXIT_FAIL
    } else if s.hypotheses_not_met > 0 || s.error > 0 {
        EXIT_GENERATOR
    } else {
        EXIT_PASS
    };
    Ok(Output::Report(report, code))
}
