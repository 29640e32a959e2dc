//! Line-oriented verification reports.
//!
//! Each check prints as
//!
//! ```text
//! RESULT check=<id> status=<PASS|FAIL|INCONCLUSIVE> residual=<expr>
//! ```
//!
//! followed by optional `NOTE <id> <text>` lines and a closing summary.
//! Identifiers and residuals never contain spaces.

use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "PASS" => Ok(Status::Pass),
            "FAIL" => Ok(Status::Fail),
            "INCONCLUSIVE" => Ok(Status::Inconclusive),
            other => Err(format!("unknown status {other:?}")),
        }
    }
}

/// Residual text used when no residual could be computed.
pub const UNKNOWN_RESIDUAL: &str = "?";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub id: String,
    pub status: Status,
    pub residual: String,
    pub notes: Vec<String>,
}

impl CheckResult {
    pub fn new(id: impl Into<String>, status: Status, residual: impl Into<String>) -> Self {
        CheckResult {
            id: id.into(),
            status,
            residual: residual.into(),
            notes: Vec::new(),
        }
    }

    pub fn pass(id: impl Into<String>) -> Self {
        Self::new(id, Status::Pass, "0")
    }

    pub fn inconclusive(id: impl Into<String>, reason: impl fmt::Display) -> Self {
        Self::new(id, Status::Inconclusive, UNKNOWN_RESIDUAL).with_note(reason.to_string())
    }

    pub fn from_bool(id: impl Into<String>, holds: bool, residual: impl fmt::Display) -> Self {
        if holds {
            Self::pass(id)
        } else {
            Self::new(id, Status::Fail, residual.to_string())
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn result_line(&self) -> String {
        format!(
            "RESULT check={} status={} residual={}",
            self.id, self.status, self.residual
        )
    }
}

/// Parses one `RESULT` line back into `(id, status, residual)`.
pub fn parse_result_line(line: &str) -> Result<(String, Status, String), String> {
    let rest = line
        .strip_prefix("RESULT ")
        .ok_or_else(|| format!("not a RESULT line: {line:?}"))?;
    let mut fields = rest.splitn(3, ' ');
    let mut field = |key: &str| -> Result<String, String> {
        let f = fields.next().ok_or_else(|| format!("missing {key}"))?;
        f.strip_prefix(key)
            .and_then(|v| v.strip_prefix('='))
            .map(str::to_string)
            .ok_or_else(|| format!("expected {key}=..., got {f:?}"))
    };
    let id = field("check")?;
    let status = field("status")?.parse()?;
    let residual = field("residual")?;
    if residual.is_empty() || residual.contains(' ') {
        return Err(format!("malformed residual {residual:?}"));
    }
    Ok((id, status, residual))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
}

impl Summary {
    pub fn of(results: &[CheckResult]) -> Self {
        let count = |s| results.iter().filter(|r| r.status == s).count();
        Summary {
            total: results.len(),
            passed: count(Status::Pass),
            failed: count(Status::Fail),
            inconclusive: count(Status::Inconclusive),
        }
    }

    /// 0 when every check passed, 1 on any failure or inconclusive check,
    /// 2 when there was nothing to check.
    pub fn exit_code(&self) -> i32 {
        if self.total == 0 {
            2
        } else if self.failed + self.inconclusive > 0 {
            1
        } else {
            0
        }
    }
}

/// Renders results in order, then the summary line.
pub fn emit_report(results: &[CheckResult]) -> String {
    let mut out = String::new();
    for r in results {
        out.push_str(&r.result_line());
        out.push('\n');
        for n in &r.notes {
            out.push_str(&format!("NOTE {} {}\n", r.id, n));
        }
    }
    let s = Summary::of(results);
    if s.total == 0 {
        out.push_str("0 checks\n");
    } else {
        out.push_str(&format!(
            "{} checks: {} passed, {} failed, {} inconclusive\n",
            s.total, s.passed, s.failed, s.inconclusive
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn result_line_round_trips() {
        let r = CheckResult::new("khz.flat.t-y.v[0]", Status::Fail, "-2*u_xx*u_y*v[1]");
        let (id, st, res) = parse_result_line(&r.result_line()).unwrap();
        assert_eq!((id.as_str(), st, res.as_str()), ("khz.flat.t-y.v[0]", Status::Fail, "-2*u_xx*u_y*v[1]"));
        let p = CheckResult::pass("x");
        assert_eq!(p.result_line(), "RESULT check=x status=PASS residual=0");
        assert!(parse_result_line("RESULT check=x status=MAYBE residual=0").is_err());
        assert!(parse_result_line("NOTE x").is_err());
    }

    #[test]
    fn empty_report() {
        assert_eq!(emit_report(&[]), "0 checks\n");
        assert_eq!(Summary::of(&[]).exit_code(), 2);
    }

    #[test]
    fn exit_codes() {
        let pass = CheckResult::pass("a");
        let fail = CheckResult::new("b", Status::Fail, "x");
        let inc = CheckResult::inconclusive("c", "budget");
        assert_eq!(Summary::of(std::slice::from_ref(&pass)).exit_code(), 0);
        assert_eq!(Summary::of(&[pass.clone(), fail]).exit_code(), 1);
        assert_eq!(Summary::of(&[pass, inc.clone()]).exit_code(), 1);
        let text = emit_report(&[inc]);
        assert!(text.contains("status=INCONCLUSIVE residual=?"));
        assert!(text.contains("NOTE c budget"));
        assert!(text.ends_with("1 checks: 0 passed, 0 failed, 1 inconclusive\n"));
    }
}
