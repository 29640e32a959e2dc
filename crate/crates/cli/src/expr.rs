//! Expression syntax: lexer, recursive-descent parser and printer.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := unary (('*'|'/') unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' uint)?
//! base   := number | ident | '(' expr ')'
//! number := int ('/' uint)?
//! ident  := name ('_' letters)? | name '[' uint ']'
//! ```
//!
//! A literal `int / uint` is a single rational number, so `x*2/3` is `x`
//! times two thirds. The printer inserts the parentheses needed for
//! `parse(print(e)) == e` to hold structurally.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use prolong_core::{Error, RationalExpr, Result, Symbol};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// A nonnegative rational literal.
    Num(BigRational),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Neg(Box<Expr>),
}

impl Expr {
    pub fn int(n: u64) -> Expr {
        Expr::Num(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Var(_) => 5,
        }
    }

    /// Evaluates with every variable mapped to the symbol of the same name.
    pub fn to_rational(&self) -> Result<RationalExpr> {
        Ok(match self {
            Expr::Num(c) => RationalExpr::constant(c.clone()),
            Expr::Var(name) => RationalExpr::symbol(Symbol::new(name)),
            Expr::Add(a, b) => &a.to_rational()? + &b.to_rational()?,
            Expr::Sub(a, b) => &a.to_rational()? - &b.to_rational()?,
            Expr::Mul(a, b) => &a.to_rational()? * &b.to_rational()?,
            Expr::Div(a, b) => a.to_rational()?.checked_div(&b.to_rational()?)?,
            Expr::Pow(a, k) => a.to_rational()?.pow(*k),
            Expr::Neg(a) => -a.to_rational()?,
        })
    }

    /// Variable names in order of first occurrence.
    pub fn variables(&self) -> Vec<&str> {
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a str>) {
            match e {
                Expr::Num(_) => {}
                Expr::Var(v) => {
                    if !out.contains(&v.as_str()) {
                        out.push(v);
                    }
                }
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Expr::Pow(a, _) | Expr::Neg(a) => walk(a, out),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

fn wrap(s: String, parens: bool) -> String {
    if parens {
        format!("({s})")
    } else {
        s
    }
}

fn print(e: &Expr) -> String {
    match e {
        Expr::Num(c) => {
            if c.is_integer() {
                c.numer().to_string()
            } else {
                format!("{}/{}", c.numer(), c.denom())
            }
        }
        Expr::Var(v) => v.clone(),
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let op = if matches!(e, Expr::Add(..)) { '+' } else { '-' };
            let r = print(b);
            let rp = b.precedence() <= 1 || matches!(**b, Expr::Neg(_));
            format!("{}{op}{}", print(a), wrap(r, rp))
        }
        Expr::Mul(a, b) | Expr::Div(a, b) => {
            let div = matches!(e, Expr::Div(..));
            let l = wrap(print(a), a.precedence() < 2);
            let r = print(b);
            let mut rp = b.precedence() <= 2 || matches!(**b, Expr::Neg(_));
            // `2/3` after a slash would be read back as one literal.
            if div && l.ends_with(|c: char| c.is_ascii_digit()) && r.starts_with(|c: char| c.is_ascii_digit()) {
                rp = true;
            }
            format!("{l}{}{}", if div { '/' } else { '*' }, wrap(r, rp))
        }
        Expr::Pow(a, k) => {
            let atom = match &**a {
                Expr::Var(_) => true,
                Expr::Num(c) => c.is_integer(),
                _ => false,
            };
            format!("{}^{k}", wrap(print(a), !atom))
        }
        Expr::Neg(a) => format!("-{}", wrap(print(a), a.precedence() < 3)),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

/// Resolves identifiers while parsing. Returns the canonical variable name.
pub trait Scope {
    fn resolve(&self, ident: &Ident) -> std::result::Result<String, String>;
}

/// Accepts every identifier verbatim.
pub struct AnyScope;

impl Scope for AnyScope {
    fn resolve(&self, ident: &Ident) -> std::result::Result<String, String> {
        Ok(ident.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub subscript: Option<String>,
    pub index: Option<usize>,
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(s) = &self.subscript {
            write!(f, "_{s}")?;
        }
        if let Some(k) = self.index {
            write!(f, "[{k}]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(Ident),
    Sym(char),
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

impl Lexer {
    fn tokens(src: &str, line: usize, column: usize) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer {
            chars: src.chars().collect(),
            pos: 0,
            line,
            column,
        };
        let mut out = Vec::new();
        while let Some(t) = lx.next()? {
            out.push(t);
        }
        Ok(out)
    }

    fn col(&self, pos: usize) -> usize {
        self.column + pos
    }

    fn err(&self, pos: usize, message: impl Into<String>) -> Error {
        parse_error(self.line, self.col(pos), message)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let start = self.pos;
        while self.peek().is_some_and(&f) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn next(&mut self) -> Result<Option<(Tok, usize)>> {
        self.take_while(char::is_whitespace);
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let tok = if c.is_ascii_digit() {
            let digits = self.take_while(|c| c.is_ascii_digit());
            Tok::Int(digits.parse().expect("digits"))
        } else if c.is_ascii_alphabetic() {
            let name = self.take_while(|c| c.is_ascii_alphanumeric());
            let mut ident = Ident {
                name,
                subscript: None,
                index: None,
            };
            match self.peek() {
                Some('_') => {
                    self.pos += 1;
                    let sub = self.take_while(|c| c.is_ascii_alphabetic());
                    if sub.is_empty() {
                        return Err(self.err(self.pos, "expected derivative letters after '_'"));
                    }
                    ident.subscript = Some(sub);
                }
                Some('[') => {
                    self.pos += 1;
                    let at = self.pos;
                    let digits = self.take_while(|c| c.is_ascii_digit());
                    let k = digits
                        .parse()
                        .map_err(|_| self.err(at, "expected an index inside '[...]'"))?;
                    if self.peek() != Some(']') {
                        return Err(self.err(self.pos, "expected ']'"));
                    }
                    self.pos += 1;
                    ident.index = Some(k);
                }
                _ => {}
            }
            Tok::Ident(ident)
        } else if "+-*/^()".contains(c) {
            self.pos += 1;
            Tok::Sym(c)
        } else {
            return Err(self.err(start, format!("unexpected character {c:?}")));
        };
        Ok(Some((tok, self.col(start))))
    }
}

struct Parser<'s> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_column: usize,
    scope: &'s dyn Scope,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |(_, c)| *c)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        parse_error(self.line, self.column(), message)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat('-') {
                acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = Expr::Mul(Box::new(acc), Box::new(self.unary()?));
            } else if self.eat('/') {
                acc = Expr::Div(Box::new(acc), Box::new(self.unary()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.factor()
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if !self.eat('^') {
            return Ok(base);
        }
        match self.peek() {
            Some(Tok::Int(k)) => {
                let k = u32::try_from(k).map_err(|_| self.err("exponent too large"))?;
                self.pos += 1;
                Ok(Expr::Pow(Box::new(base), k))
            }
            _ => Err(self.err("expected a nonnegative integer exponent")),
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let column = self.column();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                if let (Some(Tok::Sym('/')), Some(Tok::Int(d))) =
                    (self.peek(), self.toks.get(self.pos + 1).map(|(t, _)| t))
                {
                    if d.is_zero() {
                        return Err(parse_error(self.line, column, "zero denominator"));
                    }
                    let c = BigRational::new(n, d.clone());
                    self.pos += 2;
                    return Ok(Expr::Num(c));
                }
                Ok(Expr::Num(BigRational::from_integer(n)))
            }
            Some(Tok::Ident(id)) => {
                self.pos += 1;
                let name = self
                    .scope
                    .resolve(&id)
                    .map_err(|m| parse_error(self.line, column, m))?;
                Ok(Expr::Var(name))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(t) => Err(self.err(format!("unexpected {}", describe(&t)))),
            None => Err(self.err("unexpected end of expression")),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("number {n}"),
        Tok::Ident(i) => format!("identifier {i}"),
        Tok::Sym(c) => format!("'{c}'"),
    }
}

/// Parses `src`, which starts at `line:column` of its file.
pub fn parse_at(src: &str, line: usize, column: usize, scope: &dyn Scope) -> Result<Expr> {
    let toks = Lexer::tokens(src, line, column)?;
    let mut p = Parser {
        toks,
        pos: 0,
        line,
        end_column: column + src.chars().count(),
        scope,
    };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        let t = p.toks[p.pos].0.clone();
        return Err(p.err(format!("unexpected {} after expression", describe(&t))));
    }
    Ok(e)
}

/// Parses a standalone expression, accepting any identifier.
pub fn parse_expr(src: &str) -> Result<Expr> {
    parse_at(src, 1, 1, &AnyScope)
}

/// Converts a canonical rational expression back into syntax. The result
/// prints as a string that parses to the same value.
pub fn from_rational(e: &RationalExpr) -> Expr {
    let num = poly_expr(e.numer());
    if e.denom().is_one() {
        return num;
    }
    Expr::Div(Box::new(num), Box::new(poly_expr(e.denom())))
}

fn poly_expr(p: &prolong_core::Polynomial) -> Expr {
    let mut acc: Option<Expr> = None;
    for (m, c) in p.terms().rev() {
        let mut factors: Vec<Expr> = m
            .factors()
            .iter()
            .map(|(s, k)| {
                let v = Expr::Var(s.name().to_string());
                if *k == 1 {
                    v
                } else {
                    Expr::Pow(Box::new(v), *k)
                }
            })
            .collect();
        let mag = c.abs();
        if !mag.is_one() || factors.is_empty() {
            factors.insert(0, Expr::Num(mag));
        }
        let term = factors
            .into_iter()
            .reduce(|a, b| Expr::Mul(Box::new(a), Box::new(b)))
            .expect("nonempty");
        acc = Some(match (acc, c.is_negative()) {
            (None, false) => term,
            (None, true) => Expr::Neg(Box::new(term)),
            (Some(a), false) => Expr::Add(Box::new(a), Box::new(term)),
            (Some(a), true) => Expr::Sub(Box::new(a), Box::new(term)),
        });
    }
    acc.unwrap_or_else(|| Expr::int(0))
}

/// Substitutes variables by name.
pub fn rename(e: &Expr, map: &HashMap<String, String>) -> Expr {
    let b = |x: &Expr| Box::new(rename(x, map));
    match e {
        Expr::Num(c) => Expr::Num(c.clone()),
        Expr::Var(v) => Expr::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
        Expr::Add(x, y) => Expr::Add(b(x), b(y)),
        Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
        Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
        Expr::Div(x, y) => Expr::Div(b(x), b(y)),
        Expr::Pow(x, k) => Expr::Pow(b(x), *k),
        Expr::Neg(x) => Expr::Neg(b(x)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(src: &str) -> String {
        let e = parse_expr(src).unwrap();
        let printed = e.to_string();
        assert_eq!(parse_expr(&printed).unwrap(), e, "{src} printed as {printed}");
        printed
    }

    #[test]
    fn precedence() {
        assert_eq!(round_trip("a + b*c"), "a+b*c");
        assert_eq!(round_trip("(a + b)*c"), "(a+b)*c");
        assert_eq!(round_trip("a - (b - c)"), "a-(b-c)");
        assert_eq!(round_trip("a/(b*c)"), "a/(b*c)");
        assert_eq!(round_trip("-x^2"), "-x^2");
        assert_eq!(round_trip("(-x)^2"), "(-x)^2");
        assert_eq!(round_trip("a*-b"), "a*(-b)");
        assert_eq!(round_trip("(1/2)^3"), "(1/2)^3");
    }

    #[test]
    fn rational_literals() {
        let e = parse_expr("1/2*u_x^2").unwrap();
        assert!(matches!(&e, Expr::Mul(a, _) if **a == Expr::Num(BigRational::new(1.into(), 2.into()))));
        // Division by a literal after another literal keeps its parentheses.
        assert_eq!(round_trip("x*2/(3)"), "x*2/(3)");
        assert_eq!(round_trip("x^2/(3)"), "x^2/(3)");
        assert_eq!(round_trip("(1)/2"), "1/(2)");
        assert!(parse_expr("1/0").is_err());
    }

    #[test]
    fn identifiers() {
        assert_eq!(round_trip("v[0]*v[12] + u_tx"), "v[0]*v[12]+u_tx");
        assert!(parse_expr("v[").is_err());
        assert!(parse_expr("u_").is_err());
    }

    #[test]
    fn errors_carry_positions() {
        match parse_expr("a + * b") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (1, 5)),
            other => panic!("{other:?}"),
        }
        match parse_at("(a", 7, 10, &AnyScope) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (7, 12)),
            other => panic!("{other:?}"),
        }
        assert!(parse_expr("a $ b").is_err());
        assert!(parse_expr("a b").is_err());
        assert!(parse_expr("x^y").is_err());
    }

    #[test]
    fn evaluation() {
        let e = parse_expr("(x^2 - 1)/(x - 1)").unwrap().to_rational().unwrap();
        assert_eq!(e, parse_expr("x + 1").unwrap().to_rational().unwrap());
        assert!(parse_expr("1/(x - x)").unwrap().to_rational().is_err());
    }

    #[test]
    fn canonical_output_reparses() {
        for src in ["-1/2*u_x^2*v[1] + 3*a/(b - 2*c)", "0", "-(a+b)/(2*c^3)", "7/3"] {
            let r = parse_expr(src).unwrap().to_rational().unwrap();
            let printed = r.to_string();
            let back = parse_expr(&printed).unwrap().to_rational().unwrap();
            assert_eq!(back, r, "{printed}");
            assert_eq!(from_rational(&r).to_rational().unwrap(), r);
        }
    }
}
