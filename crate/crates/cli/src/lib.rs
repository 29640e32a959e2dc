//! Problem files, the built-in catalog and the `prolong` command line.

pub mod catalog;
pub mod commands;
pub mod expr;
pub mod problem;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{Command, Outcome, run};
pub use problem::ProblemFile;
pub use prolong_core::report::{CheckResult, Status};

#[derive(Debug, Parser)]
#[command(name = "prolong", version, about = "Exact verification of coverings, Backlund transformations and lifted coframes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Check flatness and WE-form closure of the covering in FILE.
    VerifyCovering {
        file: PathBuf,
        /// Truncation order of a fiber family.
        #[arg(long)]
        order: Option<usize>,
    },
    /// Check every backlund block in FILE.
    VerifyBacklund { file: PathBuf },
    /// Print the WE forms through level K and check their closure.
    WeForms {
        file: PathBuf,
        #[arg(long, value_name = "K")]
        max: usize,
    },
    /// Check the structure congruences of the lifted coframe in dimension N.
    CheckCoframe {
        #[arg(long, value_name = "N")]
        n: usize,
    },
    /// Reduce an expression modulo the equations in FILE.
    Reduce {
        file: PathBuf,
        #[arg(long, value_name = "E", allow_hyphen_values = true)]
        expr: String,
    },
    /// Run every built-in example.
    PaperDemos,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::VerifyCovering { file, order } => Command::VerifyCovering { file, order },
            Cmd::VerifyBacklund { file } => Command::VerifyBacklund { file },
            Cmd::WeForms { file, max } => Command::WeForms { file, max },
            Cmd::CheckCoframe { n } => Command::CheckCoframe { n },
            Cmd::Reduce { file, expr } => Command::Reduce { file, expr },
            Cmd::PaperDemos => Command::PaperDemos,
        }
    }
}

/// Parses `args` (including the program name) and runs the command. Usage
/// errors exit with code 2.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli.command.into()),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let (stdout, stderr) = if e.use_stderr() { (String::new(), text) } else { (text, String::new()) };
            Outcome { stdout, stderr, code }
        }
    }
}
