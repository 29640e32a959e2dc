//! Command implementations. Each command produces a report and an exit
//! code; nothing here writes to the terminal.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use prolong_core::coframe::{self, GroupParameters, LiftedCoframe, h_dimension};
use prolong_core::covering::closure_results;
use prolong_core::report::{CheckResult, Summary, emit_report};
use prolong_core::{Error, Result};

use crate::catalog;
use crate::problem::{DEFAULT_ORDER, ProblemFile};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    VerifyCovering { file: PathBuf, order: Option<usize> },
    VerifyBacklund { file: PathBuf },
    WeForms { file: PathBuf, max: usize },
    CheckCoframe { n: usize },
    Reduce { file: PathBuf, expr: String },
    PaperDemos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn report(prefix: String, results: &[CheckResult]) -> Outcome {
        Outcome {
            stdout: prefix + &emit_report(results),
            stderr: String::new(),
            code: Summary::of(results).exit_code(),
        }
    }

    fn error(e: impl std::fmt::Display) -> Outcome {
        Outcome {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: 2,
        }
    }
}

/// Reads a problem file from disk, falling back to the built-in catalog
/// when no such file exists.
pub fn load(path: &Path) -> std::result::Result<ProblemFile, String> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => match path.to_str().and_then(catalog::get) {
            Some(entry) if !path.exists() => entry.text.to_string(),
            _ => return Err(format!("{}: {e}", path.display())),
        },
    };
    ProblemFile::parse(&text).map_err(|e| format!("{}:{e}", path.display()))
}

pub fn run(cmd: &Command) -> Outcome {
    let result = match cmd {
        Command::VerifyCovering { file, order } => with_file(file, |p| verify_covering(p, *order)),
        Command::VerifyBacklund { file } => with_file(file, verify_backlund),
        Command::WeForms { file, max } => with_file(file, |p| we_forms(p, *max)),
        Command::CheckCoframe { n } => check_coframe(*n).map(|r| (String::new(), r)).map_err(|e| e.to_string()),
        Command::Reduce { file, expr } => {
            return match load(file) {
                Ok(p) => match reduce(&p, expr) {
                    Ok(text) => Outcome {
                        stdout: text + "\n",
                        stderr: String::new(),
                        code: 0,
                    },
                    Err(e) => Outcome::error(e),
                },
                Err(e) => Outcome::error(e),
            };
        }
        Command::PaperDemos => paper_demos().map(|r| (String::new(), r)).map_err(|e| e.to_string()),
    };
    match result {
        Ok((prefix, results)) => Outcome::report(prefix, &results),
        Err(e) => Outcome::error(e),
    }
}

type Report = (String, Vec<CheckResult>);

fn with_file(file: &Path, f: impl FnOnce(&ProblemFile) -> Result<Report>) -> std::result::Result<Report, String> {
    let p = load(file)?;
    f(&p).map_err(|e| e.to_string())
}

pub fn verify_covering(p: &ProblemFile, order: Option<usize>) -> Result<Report> {
    let order = order.or(p.order).unwrap_or(DEFAULT_ORDER);
    let cov = p.covering(Some(order))?;
    let mut results = cov.flatness_check(order)?.results(p.name());
    results.extend(closure_results(p.name(), &cov.we_closure_check(order.saturating_sub(1))?));
    Ok((String::new(), results))
}

pub fn verify_backlund(p: &ProblemFile) -> Result<Report> {
    let problems = p.backlund_problems()?;
    let mut results = Vec::new();
    for (name, problem) in problems {
        let cert = problem.verify()?;
        results.extend(cert.results(&format!("{}.{name}", p.name())));
    }
    Ok((String::new(), results))
}

/// `FORM` lines for the WE forms through level `max`, then their closure
/// checks.
pub fn we_forms(p: &ProblemFile, max: usize) -> Result<Report> {
    let order = p.order.unwrap_or(DEFAULT_ORDER).max(max + 1);
    let cov = p.covering(Some(order))?;
    let forms = cov.we_forms(max)?;
    let mut out = String::new();
    for (fiber, form) in cov.fibers_up_to(max).iter().zip(&forms) {
        writeln!(out, "FORM fiber={fiber} form={form}").expect("string write");
    }
    let results = closure_results(p.name(), &cov.we_closure_check(max)?);
    Ok((out, results))
}

pub fn check_coframe(n: usize) -> Result<Vec<CheckResult>> {
    if n == 0 {
        return Err(Error::Invalid("--n must be at least 1".into()));
    }
    let prefix = format!("coframe.n{n}");
    let params = GroupParameters::new(n)?;
    let dim = params.symbols().len();
    let mut results = vec![
        CheckResult::from_bool(format!("{prefix}.dimension"), dim == h_dimension(n), dim)
            .with_note(format!("dim H = {dim}")),
        CheckResult::from_bool(format!("{prefix}.inverse"), params.inverse_holds(), "?"),
    ];
    let cf = LiftedCoframe::standard(n)?;
    results.extend(coframe::congruence_results(&prefix, &cf.structure_congruences()));
    Ok(results)
}

pub fn reduce(p: &ProblemFile, text: &str) -> std::result::Result<String, String> {
    let e = p.parse_expr(text).map_err(|e| format!("--expr:{e}"))?;
    let system = p.system(2).map_err(|e| e.to_string())?;
    let value = e.to_rational().map_err(|e| e.to_string())?;
    system.reduce(&value).map(|r| r.to_string()).map_err(|e| e.to_string())
}

fn catalog_file(name: &str) -> Result<ProblemFile> {
    ProblemFile::parse(catalog::text(name))
}

fn linear_combination() -> Result<Vec<CheckResult>> {
    let lc = coframe::mkhz_linear_combination()?;
    let mut r = CheckResult::from_bool("mkhz.lincomb", lc.holds(), &lc.difference);
    if !lc.literal_difference.is_zero() {
        r = r.with_note(format!(
            "with xi^2 read as u_xx^2/2*(dx+u_x*dy+(u_x^2/2+u_y)*dt) the difference is {}",
            lc.literal_difference
        ));
    }
    let mut out = vec![r];
    let order = DEFAULT_ORDER;
    let cov = coframe::mkhz_emitted_covering(order)?;
    out.extend(cov.flatness_check(order)?.results("mkhz.emitted"));
    Ok(out)
}

/// Every worked example: both coverings, the linear-combination identity,
/// the Backlund transformations and the coframe congruences for n = 1, 2.
pub fn paper_demos() -> Result<Vec<CheckResult>> {
    let mut results = Vec::new();
    for name in ["khz", "mkhz"] {
        results.extend(verify_covering(&catalog_file(name)?, None)?.1);
    }
    results.extend(linear_combination()?);
    for name in ["khz-potential", "mkhz-backlund"] {
        results.extend(verify_backlund(&catalog_file(name)?)?.1);
    }
    for n in [1, 2] {
        results.extend(check_coframe(n)?);
    }
    Ok(results)
}

