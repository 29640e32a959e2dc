//! Problem files.
//!
//! A problem file is a sequence of lines; `#` starts a comment.
//!
//! ```text
//! name khz
//! independent t x y
//! dependent u
//! fiber v family x
//! order 3
//! equation u_yy = u_tx + u*u_xx + u_x^2
//! cover t: (v[0]^2 - u)*v[1] - u_y - v[0]*u_x
//! cover y: v[0]*v[1] - u_x
//! backlund potential
//!   eliminate w
//!   relation w_x = v
//!   source u_yy = ...
//!   target w_yy = ...
//! end
//! ```
//!
//! Declarations must precede their use. An equation line names one
//! principal derivative: either `u_yy = rhs`, or `u_yy: lhs = rhs` when the
//! equation should be solved for `u_yy`. `cover <dir>: expr` is accepted
//! when a single fiber is declared; otherwise write `cover <fiber> <dir>:`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use prolong_core::backlund::{BacklundProblem, solved};
use prolong_core::covering::{Covering, family_symbol};
use prolong_core::equation::{EquationIdeal, SolvedEquation, SolvedSystem};
use prolong_core::jet::JetContext;
use prolong_core::{Error, RationalExpr, Result, Symbol};

use crate::expr::{self, Expr, Ident, Scope};

/// Truncation order used when a file sets none.
pub const DEFAULT_ORDER: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberDecl {
    pub name: String,
    /// The generating direction of a family `name[0], name[1], ...`.
    pub family: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationDecl {
    pub principal: String,
    pub lhs: Expr,
    pub rhs: Expr,
}

impl EquationDecl {
    fn is_solved(&self) -> bool {
        self.lhs == Expr::Var(self.principal.clone())
    }
}

impl fmt::Display for EquationDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_solved() {
            write!(f, "{} = {}", self.principal, self.rhs)
        } else {
            write!(f, "{}: {} = {}", self.principal, self.lhs, self.rhs)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverDecl {
    pub fiber: Option<String>,
    pub direction: String,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BacklundDecl {
    pub name: String,
    pub eliminate: String,
    pub relations: Vec<(Expr, Expr)>,
    pub source: Vec<EquationDecl>,
    pub target: Option<EquationDecl>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProblemFile {
    pub name: Option<String>,
    pub independent: Vec<String>,
    pub dependent: Vec<String>,
    pub fibers: Vec<FiberDecl>,
    pub order: Option<usize>,
    pub equations: Vec<EquationDecl>,
    pub covers: Vec<CoverDecl>,
    pub backlund: Vec<BacklundDecl>,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Names visible at a given point of the file.
struct FileScope<'a> {
    file: &'a ProblemFile,
}

impl FileScope<'_> {
    fn declared(&self, name: &str) -> bool {
        self.file.independent.iter().any(|n| n == name)
            || self.file.dependent.iter().any(|n| n == name)
            || self.file.fibers.iter().any(|f| f.name == name)
    }

    fn fiber(&self, name: &str) -> Option<&FiberDecl> {
        self.file.fibers.iter().find(|f| f.name == name)
    }

    fn canonical_subscript(&self, letters: &str) -> std::result::Result<String, String> {
        let mut positions = Vec::new();
        for c in letters.chars() {
            let p = self
                .file
                .independent
                .iter()
                .position(|n| n.chars().eq([c]))
                .ok_or_else(|| format!("undeclared independent variable {c:?} in subscript"))?;
            positions.push(p);
        }
        positions.sort_unstable();
        Ok(positions.iter().map(|&p| self.file.independent[p].as_str()).collect())
    }
}

impl Scope for FileScope<'_> {
    fn resolve(&self, id: &Ident) -> std::result::Result<String, String> {
        let name = id.name.as_str();
        if let Some(k) = id.index {
            return match self.fiber(name) {
                Some(FiberDecl { family: Some(_), .. }) => Ok(family_symbol(name, k).name().to_string()),
                Some(_) => Err(format!("{name} is not a fiber family")),
                None => Err(format!("undeclared identifier {name}")),
            };
        }
        if let Some(sub) = &id.subscript {
            if !self.file.dependent.iter().any(|n| n == name) {
                return Err(if self.declared(name) {
                    format!("{name} is not a dependent variable")
                } else {
                    format!("undeclared identifier {name}")
                });
            }
            return Ok(format!("{name}_{}", self.canonical_subscript(sub)?));
        }
        match self.fiber(name) {
            Some(FiberDecl { family: Some(_), .. }) => Err(format!("fiber family {name} needs an index, as in {name}[0]")),
            Some(_) => Ok(name.to_string()),
            None if self.declared(name) => Ok(name.to_string()),
            None => Err(format!("undeclared identifier {name}")),
        }
    }
}

/// Splits `text` at the first occurrence of `sep`, returning the byte
/// offset of the right part.
fn split_once_at(text: &str, sep: char) -> Option<(&str, &str, usize)> {
    let i = text.find(sep)?;
    Some((&text[..i], &text[i + 1..], i + 1))
}

/// One logical line: its number, the column of `text` and the text itself.
struct Line<'a> {
    number: usize,
    column: usize,
    text: &'a str,
}

impl<'a> Line<'a> {
    fn err(&self, offset: usize, message: impl Into<String>) -> Error {
        err(self.number, self.column + self.text[..offset].chars().count(), message)
    }

    /// The first word and the remainder.
    fn keyword(&self) -> (&'a str, Line<'a>) {
        let end = self.text.find(char::is_whitespace).unwrap_or(self.text.len());
        let rest = &self.text[end..];
        let trimmed = rest.trim_start();
        let skip = end + rest.len() - trimmed.len();
        (
            &self.text[..end],
            Line {
                number: self.number,
                column: self.column + self.text[..skip].chars().count(),
                text: trimmed,
            },
        )
    }

    fn sub(&self, offset: usize, text: &'a str) -> Line<'a> {
        let lead = text.len() - text.trim_start().len();
        Line {
            number: self.number,
            column: self.column + self.text[..offset + lead].chars().count(),
            text: text.trim(),
        }
    }

    fn words(&self) -> Vec<(usize, &'a str)> {
        let base = self.text.as_ptr() as usize;
        self.text
            .split_whitespace()
            .map(|w| (w.as_ptr() as usize - base, w))
            .collect()
    }
}

fn valid_name(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_ascii_alphabetic()) && cs.all(|c| c.is_ascii_alphanumeric())
}

fn valid_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
}

struct Builder {
    file: ProblemFile,
    seen: HashSet<String>,
    cover_keys: HashSet<(String, String)>,
}

impl Builder {
    fn parse_expr(&self, line: &Line) -> Result<Expr> {
        if line.text.is_empty() {
            return Err(line.err(0, "expected an expression"));
        }
        expr::parse_at(line.text, line.number, line.column, &FileScope { file: &self.file })
    }

    fn declare(&mut self, line: &Line, offset: usize, name: &str) -> Result<()> {
        if !valid_name(name) {
            return Err(line.err(offset, format!("invalid variable name {name:?}")));
        }
        if !self.seen.insert(name.to_string()) {
            return Err(line.err(offset, format!("duplicate declaration of {name}")));
        }
        Ok(())
    }

    fn direction(&self, line: &Line, offset: usize, name: &str) -> Result<String> {
        if self.file.independent.iter().any(|n| n == name) {
            Ok(name.to_string())
        } else {
            Err(line.err(offset, format!("{name} is not an independent variable")))
        }
    }

    /// `lhs = rhs`, split at the single `=`.
    fn relation(&self, line: &Line) -> Result<(Expr, Expr)> {
        let (l, r, at) = split_once_at(line.text, '=').ok_or_else(|| line.err(0, "expected '='"))?;
        if let Some(extra) = r.find('=') {
            return Err(line.err(at + extra, "more than one '='"));
        }
        let lhs = self.parse_expr(&line.sub(0, l))?;
        let rhs = self.parse_expr(&line.sub(at, r))?;
        Ok((lhs, rhs))
    }

    fn equation(&self, line: &Line) -> Result<EquationDecl> {
        let colon = line.text.find(':').filter(|&c| !line.text[..c].contains('='));
        let (principal, body) = match colon {
            Some(c) => {
                let head = line.sub(0, &line.text[..c]);
                let p = self.parse_expr(&head)?;
                (Some((p, head)), line.sub(c + 1, &line.text[c + 1..]))
            }
            None => (None, line.sub(0, line.text)),
        };
        let (lhs, rhs) = self.relation(&body)?;
        let (p, at) = match principal {
            Some((p, head)) => (p, head),
            None => (lhs.clone(), body.sub(0, body.text.split('=').next().unwrap_or(""))),
        };
        let Expr::Var(name) = p else {
            return Err(at.err(0, "the principal derivative must be a single jet variable"));
        };
        let is_jet = name
            .split_once('_')
            .is_some_and(|(d, _)| self.file.dependent.iter().any(|n| n == d))
            || self.file.dependent.contains(&name);
        if !is_jet {
            return Err(at.err(0, format!("{name} is not a derivative of a dependent variable")));
        }
        let mentions = |e: &Expr| e.variables().contains(&name.as_str());
        if !mentions(&lhs) && !mentions(&rhs) {
            return Err(at.err(0, format!("the equation does not involve {name}")));
        }
        Ok(EquationDecl {
            principal: name,
            lhs,
            rhs,
        })
    }

    fn cover(&mut self, line: &Line) -> Result<CoverDecl> {
        let (head, body, at) = split_once_at(line.text, ':').ok_or_else(|| line.err(0, "expected ':'"))?;
        let head_line = line.sub(0, head);
        let words = head_line.words();
        let (fiber, dir) = match words.as_slice() {
            [(o, d)] => {
                if self.file.fibers.len() != 1 {
                    return Err(head_line.err(*o, "name the fiber when more than one is declared"));
                }
                (None, (*o, *d))
            }
            [(fo, f), (o, d)] => {
                if !self.file.fibers.iter().any(|x| x.name == *f) {
                    return Err(head_line.err(*fo, format!("{f} is not a declared fiber")));
                }
                (Some(f.to_string()), (*o, *d))
            }
            _ => return Err(line.err(0, "expected `cover [fiber] <direction>: expr`")),
        };
        let direction = self.direction(&head_line, dir.0, dir.1)?;
        let fiber_name = fiber.clone().unwrap_or_else(|| self.file.fibers[0].name.clone());
        if !self.cover_keys.insert((fiber_name.clone(), direction.clone())) {
            return Err(head_line.err(dir.0, format!("duplicate cover entry for {fiber_name} in {direction}")));
        }
        let expr = self.parse_expr(&line.sub(at, body))?;
        Ok(CoverDecl { fiber, direction, expr })
    }
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<ProblemFile> {
        let mut b = Builder {
            file: ProblemFile::default(),
            seen: HashSet::new(),
            cover_keys: HashSet::new(),
        };
        let mut block: Option<(BacklundDecl, usize)> = None;
        let mut block_names = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("");
            let lead = content.len() - content.trim_start().len();
            let line = Line {
                number: i + 1,
                column: 1 + content[..lead].chars().count(),
                text: content.trim(),
            };
            if line.text.is_empty() {
                continue;
            }
            let (kw, rest) = line.keyword();
            if let Some((decl, _)) = block.as_mut() {
                match kw {
                    "eliminate" => {
                        let words = rest.words();
                        let [(o, name)] = words.as_slice() else {
                            return Err(rest.err(0, "expected one dependent variable"));
                        };
                        if !b.file.dependent.iter().any(|d| d == name) {
                            return Err(rest.err(*o, format!("{name} is not a dependent variable")));
                        }
                        if !decl.eliminate.is_empty() {
                            return Err(line.err(0, "duplicate eliminate line"));
                        }
                        decl.eliminate = name.to_string();
                    }
                    "relation" => decl.relations.push(b.relation(&rest)?),
                    "source" => decl.source.push(b.equation(&rest)?),
                    "target" => {
                        if decl.target.is_some() {
                            return Err(line.err(0, "duplicate target"));
                        }
                        decl.target = Some(b.equation(&rest)?);
                    }
                    "end" => {
                        if !rest.text.is_empty() {
                            return Err(rest.err(0, "unexpected text after end"));
                        }
                        let (decl, _) = block.take().expect("open block");
                        if decl.eliminate.is_empty() {
                            return Err(line.err(0, format!("backlund block {} has no eliminate line", decl.name)));
                        }
                        b.file.backlund.push(decl);
                    }
                    other => return Err(line.err(0, format!("unexpected {other:?} inside a backlund block"))),
                }
                continue;
            }
            match kw {
                "name" => {
                    if b.file.name.is_some() {
                        return Err(line.err(0, "duplicate name"));
                    }
                    if !valid_label(rest.text) {
                        return Err(rest.err(0, "expected a name of letters, digits, '-', '_' or '.'"));
                    }
                    b.file.name = Some(rest.text.to_string());
                }
                "independent" | "dependent" => {
                    let words = rest.words();
                    if words.is_empty() {
                        return Err(rest.err(0, "expected variable names"));
                    }
                    for (o, w) in words {
                        b.declare(&rest, o, w)?;
                        if kw == "independent" {
                            if w.chars().count() != 1 {
                                return Err(rest.err(o, "independent variable names must be single letters"));
                            }
                            b.file.independent.push(w.to_string());
                        } else {
                            b.file.dependent.push(w.to_string());
                        }
                    }
                }
                "fiber" => {
                    let words = rest.words();
                    let decl = match words.as_slice() {
                        [(o, name)] => {
                            b.declare(&rest, *o, name)?;
                            FiberDecl {
                                name: name.to_string(),
                                family: None,
                            }
                        }
                        [(o, name), (_, "family"), (d, dir)] => {
                            let direction = b.direction(&rest, *d, dir)?;
                            b.declare(&rest, *o, name)?;
                            FiberDecl {
                                name: name.to_string(),
                                family: Some(direction),
                            }
                        }
                        _ => return Err(rest.err(0, "expected `fiber <name>` or `fiber <name> family <direction>`")),
                    };
                    b.file.fibers.push(decl);
                }
                "order" => {
                    if b.file.order.is_some() {
                        return Err(line.err(0, "duplicate order"));
                    }
                    let k = rest
                        .text
                        .parse()
                        .map_err(|_| rest.err(0, "expected a nonnegative integer"))?;
                    b.file.order = Some(k);
                }
                "equation" => {
                    let eq = b.equation(&rest)?;
                    b.file.equations.push(eq);
                }
                "cover" => {
                    let c = b.cover(&rest)?;
                    b.file.covers.push(c);
                }
                "backlund" => {
                    if !valid_label(rest.text) {
                        return Err(rest.err(0, "expected a block name"));
                    }
                    if !block_names.insert(rest.text.to_string()) {
                        return Err(rest.err(0, format!("duplicate backlund block {}", rest.text)));
                    }
                    let decl = BacklundDecl {
                        name: rest.text.to_string(),
                        eliminate: String::new(),
                        relations: Vec::new(),
                        source: Vec::new(),
                        target: None,
                    };
                    block = Some((decl, line.number));
                }
                other => return Err(line.err(0, format!("unknown keyword {other:?}"))),
            }
        }
        if let Some((decl, start)) = block {
            return Err(err(start, 1, format!("backlund block {} is not closed by end", decl.name)));
        }
        Ok(b.file)
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("problem")
    }

    fn independent_position(&self, name: &str) -> usize {
        self.independent
            .iter()
            .position(|n| n == name)
            .expect("validated direction")
    }

    /// The highest derivative order mentioned anywhere in the file.
    fn jet_order(&self) -> usize {
        let mut exprs: Vec<&Expr> = Vec::new();
        for e in self.equations.iter().chain(self.backlund.iter().flat_map(|b| b.source.iter().chain(&b.target))) {
            exprs.push(&e.lhs);
            exprs.push(&e.rhs);
        }
        for c in &self.covers {
            exprs.push(&c.expr);
        }
        for b in &self.backlund {
            for (l, r) in &b.relations {
                exprs.push(l);
                exprs.push(r);
            }
        }
        exprs
            .iter()
            .flat_map(|e| e.variables())
            .filter_map(|v| {
                let (d, sub) = v.split_once('_')?;
                self.dependent.iter().any(|n| n == d).then(|| sub.chars().count())
            })
            .max()
            .unwrap_or(0)
    }

    fn context(&self, max_order: usize) -> Result<Arc<JetContext>> {
        let ind: Vec<&str> = self.independent.iter().map(String::as_str).collect();
        let dep: Vec<&str> = self.dependent.iter().map(String::as_str).collect();
        JetContext::new(&ind, &dep, max_order)
    }

    fn solved_equation(ctx: &JetContext, e: &EquationDecl) -> Result<SolvedEquation> {
        let principal = Symbol::new(&e.principal);
        let (lhs, rhs) = (e.lhs.to_rational()?, e.rhs.to_rational()?);
        if e.is_solved() {
            solved(ctx, principal, rhs)
        } else {
            SolvedEquation::solve(ctx, &lhs, &rhs, principal)
        }
    }

    /// The system of all top-level equations over a context of the given
    /// extra order.
    pub fn system(&self, extra_order: usize) -> Result<SolvedSystem> {
        let ctx = self.context(self.jet_order() + extra_order)?;
        let eqs = self
            .equations
            .iter()
            .map(|e| Self::solved_equation(&ctx, e))
            .collect::<Result<Vec<_>>>()?;
        SolvedSystem::new(ctx, eqs)
    }

    /// The covering declared by the file, truncated at `order` (the file's
    /// `order` line, or 3, when `None`).
    pub fn covering(&self, order: Option<usize>) -> Result<Covering> {
        let order = order.or(self.order).unwrap_or(DEFAULT_ORDER);
        let [eq] = self.equations.as_slice() else {
            return Err(Error::Invalid(format!(
                "a covering needs exactly one equation, found {}",
                self.equations.len()
            )));
        };
        if self.fibers.is_empty() {
            return Err(Error::Invalid("no fibers declared".into()));
        }
        let family = self.fibers.iter().find(|f| f.family.is_some());
        if family.is_some() && self.fibers.len() > 1 {
            return Err(Error::Unsupported("a fiber family cannot be combined with other fibers".into()));
        }
        let span = self
            .covers
            .iter()
            .flat_map(|c| c.expr.variables())
            .filter_map(|v| v.split_once('[').and_then(|(_, k)| k.trim_end_matches(']').parse::<usize>().ok()))
            .max()
            .unwrap_or(1)
            .max(1);
        let budget = if family.is_some() { order + 2 * span + 2 } else { order + 2 };
        let ctx = self.context(self.jet_order() + budget)?;
        let se = Self::solved_equation(&ctx, eq)?;
        let base = EquationIdeal::new(ctx.clone(), se.principal_symbol, se.rhs)?;
        let n = self.independent.len();
        let entry = |fiber: &str, dir: usize| -> Option<&CoverDecl> {
            self.covers.iter().find(|c| {
                c.fiber.as_deref().unwrap_or(&self.fibers[0].name) == fiber && c.direction == self.independent[dir]
            })
        };
        if let Some(FiberDecl { name, family: Some(dir) }) = family {
            let direction = self.independent_position(dir);
            let mut seed = Vec::with_capacity(n);
            for i in 0..n {
                seed.push(match entry(name, i) {
                    Some(c) => c.expr.to_rational()?,
                    None if i == direction => RationalExpr::symbol(family_symbol(name, 1)),
                    None => {
                        return Err(Error::Invalid(format!(
                            "missing cover entry for {name} in {}",
                            self.independent[i]
                        )));
                    }
                });
            }
            return Covering::family(base, name, direction, seed, order);
        }
        let mut entries = Vec::new();
        for f in &self.fibers {
            let mut row = Vec::with_capacity(n);
            for i in 0..n {
                let c = entry(&f.name, i).ok_or_else(|| {
                    Error::Invalid(format!("missing cover entry for {} in {}", f.name, self.independent[i]))
                })?;
                row.push(c.expr.to_rational()?);
            }
            entries.push((Symbol::new(&f.name), row));
        }
        Covering::finite(base, entries)
    }

    /// Every backlund block, each over its own context.
    pub fn backlund_problems(&self) -> Result<Vec<(String, BacklundProblem)>> {
        self.backlund
            .iter()
            .map(|b| {
                let ctx = self.context(self.jet_order() + 3)?;
                let eliminated = self.dependent.iter().position(|d| *d == b.eliminate).expect("validated");
                let relations = b
                    .relations
                    .iter()
                    .map(|(l, r)| Ok((l.to_rational()?, r.to_rational()?)))
                    .collect::<Result<Vec<_>>>()?;
                let source = b
                    .source
                    .iter()
                    .map(|e| Self::solved_equation(&ctx, e))
                    .collect::<Result<Vec<_>>>()?;
                let target = b.target.as_ref().map(|e| Self::solved_equation(&ctx, e)).transpose()?;
                let p = BacklundProblem::new(ctx, eliminated, &relations, source, target)?;
                Ok((b.name.clone(), p))
            })
            .collect()
    }

    /// Parses an expression in the scope of this file.
    pub fn parse_expr(&self, text: &str) -> Result<Expr> {
        expr::parse_at(text, 1, 1, &FileScope { file: self })
    }
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.name {
            writeln!(f, "name {n}")?;
        }
        if !self.independent.is_empty() {
            writeln!(f, "independent {}", self.independent.join(" "))?;
        }
        if !self.dependent.is_empty() {
            writeln!(f, "dependent {}", self.dependent.join(" "))?;
        }
        for fb in &self.fibers {
            match &fb.family {
                Some(d) => writeln!(f, "fiber {} family {d}", fb.name)?,
                None => writeln!(f, "fiber {}", fb.name)?,
            }
        }
        if let Some(k) = self.order {
            writeln!(f, "order {k}")?;
        }
        for e in &self.equations {
            writeln!(f, "equation {e}")?;
        }
        for c in &self.covers {
            match &c.fiber {
                Some(fb) => writeln!(f, "cover {fb} {}: {}", c.direction, c.expr)?,
                None => writeln!(f, "cover {}: {}", c.direction, c.expr)?,
            }
        }
        for b in &self.backlund {
            writeln!(f, "backlund {}", b.name)?;
            writeln!(f, "  eliminate {}", b.eliminate)?;
            for (l, r) in &b.relations {
                writeln!(f, "  relation {l} = {r}")?;
            }
            for s in &b.source {
                writeln!(f, "  source {s}")?;
            }
            if let Some(t) = &b.target {
                writeln!(f, "  target {t}")?;
            }
            writeln!(f, "end")?;
        }
        Ok(())
    }
}
