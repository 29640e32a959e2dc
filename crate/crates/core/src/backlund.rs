//! Backlund transformations as elimination problems.
//!
//! Relations express first derivatives of one unknown (the eliminated one)
//! through jets of the others. Eliminating it means imposing symmetry of
//! mixed partials on the relations: every pair of relation directions gives
//! a compatibility condition `D_j(rhs_i) - D_i(rhs_j)`, reduced modulo the
//! relations and the source equations.
//!
//! The problem passes when each condition vanishes or is an exact multiple
//! of the target equation, and, if the target is an equation for the
//! eliminated unknown itself, when the target reduces to zero.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::algebra::{RationalExpr, Symbol};
use crate::equation::{proportional_factor, SolvedEquation, SolvedSystem};
use crate::error::{Error, Result};
use crate::jet::JetContext;
use crate::report::{CheckResult, Status};

#[derive(Debug)]
pub struct BacklundProblem {
    ctx: Arc<JetContext>,
    eliminated: usize,
    relations: Vec<SolvedEquation>,
    source: Vec<SolvedEquation>,
    target: Option<SolvedEquation>,
    system: SolvedSystem,
}

impl BacklundProblem {
    /// `relations` are `(lhs, rhs)` pairs, each affine in exactly one first
    /// derivative of the eliminated unknown. `source` equations constrain the
    /// surviving unknowns; `target` is the equation the elimination should
    /// produce.
    pub fn new(
        ctx: Arc<JetContext>,
        eliminated: usize,
        relations: &[(RationalExpr, RationalExpr)],
        source: Vec<SolvedEquation>,
        target: Option<SolvedEquation>,
    ) -> Result<Self> {
        if eliminated >= ctx.dependent().len() {
            return Err(Error::Invalid(format!("no dependent variable at position {eliminated}")));
        }
        let mut solved: Vec<SolvedEquation> = Vec::new();
        for (lhs, rhs) in relations {
            let f = lhs - rhs;
            let usable = |s: &Symbol| {
                ctx.coordinate(*s)
                    .is_some_and(|c| c.dependent == eliminated && c.index.order() == 1)
                    && !solved.iter().any(|e| e.principal_symbol == *s)
            };
            // A bare derivative on the left is the intended unknown.
            let preferred = lhs.numer().is_bare_monomial().then(|| lhs.symbols());
            let candidates: Vec<Symbol> = preferred
                .into_iter()
                .flatten()
                .chain(f.symbols())
                .filter(usable)
                .collect();
            let solved_one = candidates
                .iter()
                .find_map(|&p| SolvedEquation::solve(&ctx, lhs, rhs, p).ok())
                .ok_or_else(|| {
                    Error::Unsupported(format!(
                        "relation {lhs} = {rhs} is not affine in a first derivative of {}",
                        ctx.dependent()[eliminated]
                    ))
                })?;
            solved.push(solved_one);
        }
        if solved.is_empty() {
            return Err(Error::Invalid("a Backlund problem needs at least one relation".into()));
        }
        if let Some(e) = source.iter().find(|e| e.dependent == eliminated) {
            return Err(Error::Invalid(format!(
                "source equation for {} constrains the eliminated unknown",
                e.principal_symbol
            )));
        }
        let mut all = solved.clone();
        all.extend(source.iter().cloned());
        let system = SolvedSystem::new(ctx.clone(), all)?;
        Ok(BacklundProblem {
            ctx,
            eliminated,
            relations: solved,
            source,
            target,
            system,
        })
    }

    pub fn ctx(&self) -> &Arc<JetContext> {
        &self.ctx
    }

    pub fn relations(&self) -> &[SolvedEquation] {
        &self.relations
    }

    pub fn source(&self) -> &[SolvedEquation] {
        &self.source
    }

    pub fn target(&self) -> Option<&SolvedEquation> {
        self.target.as_ref()
    }

    fn direction(&self, eq: &SolvedEquation) -> usize {
        eq.principal.indices()[0]
    }

    /// `D_j(rhs_i) - D_i(rhs_j)` for relation directions `i < j`, reduced.
    pub fn compatibility(&self, a: &SolvedEquation, b: &SolvedEquation) -> Result<RationalExpr> {
        let (i, j) = (self.direction(a), self.direction(b));
        let da = self.ctx.total_derivative(&a.rhs, j)?;
        let db = self.ctx.total_derivative(&b.rhs, i)?;
        self.system.reduce(&(da - db))
    }

    pub fn verify(&self) -> Result<BacklundCertificate> {
        let mut divisors = BTreeSet::new();
        for r in &self.relations {
            collect_divisors(&r.rhs, &mut divisors);
        }
        let mut order: Vec<&SolvedEquation> = self.relations.iter().collect();
        order.sort_by_key(|e| self.direction(e));
        let target_form = self
            .target
            .as_ref()
            .map(|t| RationalExpr::symbol(t.principal_symbol) - &t.rhs);
        let mut compat = Vec::new();
        for (k, a) in order.iter().enumerate() {
            for b in &order[k + 1..] {
                let pair = (self.direction(a), self.direction(b));
                let outcome = match self.compatibility(a, b) {
                    Ok(r) if r.is_zero() => Compat::Zero,
                    Ok(r) => {
                        let factor = match (&self.target, &target_form) {
                            (Some(t), Some(form)) if t.dependent != self.eliminated => {
                                proportional_factor(&r, t.principal_symbol, form)
                            }
                            _ => None,
                        };
                        match factor {
                            Some(m) => {
                                collect_divisors(&m, &mut divisors);
                                Compat::Multiple(m)
                            }
                            None => Compat::Residual(r),
                        }
                    }
                    Err(e) if e.is_truncation() => Compat::Truncated(e.to_string()),
                    Err(e) => return Err(e),
                };
                compat.push((pair, outcome));
            }
        }
        let implied = match (&self.target, &target_form) {
            (Some(t), Some(form)) if t.dependent == self.eliminated => {
                Some(match self.system.reduce(form) {
                    Ok(r) if r.is_zero() => Compat::Zero,
                    Ok(r) => Compat::Residual(r),
                    Err(e) if e.is_truncation() => Compat::Truncated(e.to_string()),
                    Err(e) => return Err(e),
                })
            }
            _ => None,
        };
        Ok(BacklundCertificate {
            independent: self.ctx.independent().to_vec(),
            target: self.target.as_ref().map(|t| t.principal_symbol),
            target_form,
            compat,
            implied,
            divisors: divisors.into_iter().collect(),
        })
    }
}

/// Factors of denominators that must not vanish: the variables of a
/// monomial denominator, or the whole denominator otherwise.
fn collect_divisors(e: &RationalExpr, out: &mut BTreeSet<String>) {
    let den = e.denom();
    if den.is_one() {
        return;
    }
    if den.len() == 1 {
        for s in den.symbols() {
            out.insert(s.to_string());
        }
    } else {
        out.insert(den.to_string());
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Compat {
    Zero,
    Multiple(RationalExpr),
    Residual(RationalExpr),
    Truncated(String),
}

#[derive(Clone, Debug)]
pub struct BacklundCertificate {
    pub independent: Vec<Symbol>,
    pub target: Option<Symbol>,
    pub target_form: Option<RationalExpr>,
    /// One entry per pair of relation directions `(i, j)`, `i < j`.
    pub compat: Vec<((usize, usize), Compat)>,
    /// Reduction of the target when it is an equation for the eliminated
    /// unknown.
    pub implied: Option<Compat>,
    /// Genericity assumptions: each listed expression is assumed nonzero.
    pub divisors: Vec<String>,
}

impl BacklundCertificate {
    pub fn passed(&self) -> bool {
        let ok = |c: &Compat| matches!(c, Compat::Zero | Compat::Multiple(_));
        self.compat.iter().all(|(_, c)| ok(c)) && self.implied.as_ref().is_none_or(ok)
    }

    pub fn results(&self, name: &str) -> Vec<CheckResult> {
        let mut out = Vec::new();
        let form = self.target_form.as_ref();
        let entry = |id: String, c: &Compat| match c {
            Compat::Zero => CheckResult::pass(id),
            Compat::Multiple(m) => {
                let form = form.expect("multiples are taken against the target");
                CheckResult::new(id, Status::Pass, format!("({m})*({form})"))
                    .with_note(format!("multiplier {m}"))
            }
            Compat::Residual(r) => CheckResult::new(id, Status::Fail, r.to_string()),
            Compat::Truncated(msg) => CheckResult::inconclusive(id, msg),
        };
        for ((i, j), c) in &self.compat {
            let id = format!("{name}.compat.{}{}", self.independent[*i], self.independent[*j]);
            out.push(entry(id, c));
        }
        if let (Some(c), Some(t)) = (&self.implied, self.target) {
            out.push(entry(format!("{name}.implies.{t}"), c));
        }
        if !self.divisors.is_empty() {
            if let Some(last) = out.last_mut() {
                last.notes.push(format!("assumes {} nonzero", self.divisors.join(", ")));
            }
        }
        out
    }
}

/// The solved equation `principal = rhs` over `ctx`.
pub fn solved(ctx: &JetContext, principal: Symbol, rhs: RationalExpr) -> Result<SolvedEquation> {
    SolvedEquation::solve(ctx, &RationalExpr::symbol(principal), &rhs, principal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(ctx: &JetContext, dep: &str, sub: &str) -> RationalExpr {
        RationalExpr::symbol(ctx.jet_by_name(dep, sub).unwrap())
    }

    fn half() -> RationalExpr {
        RationalExpr::ratio(1, 2)
    }

    fn mkhz_rhs(ctx: &JetContext, d: &str) -> RationalExpr {
        let j = |s| jet(ctx, d, s);
        j("tx") + (half() * j("x").pow(2) - j("y")) * j("xx")
    }

    #[test]
    fn forward_elimination_gives_multiple_of_target() {
        let ctx = JetContext::new(&["t", "x", "y"], &["u", "v"], 4).unwrap();
        let j = |d, s| jet(&ctx, d, s);
        let ux = j("v", "y").checked_div(&j("v", "x")).unwrap();
        let uy = j("v", "t").checked_div(&j("v", "x")).unwrap() - half() * ux.pow(2);
        let vyy_rhs = j("v", "tx")
            + (j("v", "y").pow(2) - j("v", "t") * j("v", "x"))
                .checked_div(&j("v", "x").pow(2))
                .unwrap()
                * j("v", "xx");
        let target = solved(&ctx, ctx.jet_by_name("v", "yy").unwrap(), vyy_rhs).unwrap();
        let p = BacklundProblem::new(
            ctx.clone(),
            0,
            &[(j("u", "x"), ux), (j("u", "y"), uy)],
            vec![],
            Some(target),
        )
        .unwrap();
        let cert = p.verify().unwrap();
        assert!(cert.passed());
        assert_eq!(cert.compat.len(), 1);
        let Compat::Multiple(m) = &cert.compat[0].1 else {
            panic!("expected a multiple, got {:?}", cert.compat[0].1)
        };
        // D_y(v_y/v_x) - D_x(v_t/v_x - v_y^2/(2 v_x^2)), expanded by hand.
        assert_eq!(*m, j("v", "x").recip().unwrap());
        assert_eq!(cert.divisors, vec!["v_x".to_string()]);
    }

    #[test]
    fn backward_elimination_reproduces_source_equation() {
        let ctx = JetContext::new(&["t", "x", "y"], &["u", "v"], 4).unwrap();
        let j = |d, s| jet(&ctx, d, s);
        let vt = (half() * j("u", "x").pow(2) + j("u", "y")) * j("v", "x");
        let vy = j("u", "x") * j("v", "x");
        let target = solved(&ctx, ctx.jet_by_name("u", "yy").unwrap(), mkhz_rhs(&ctx, "u")).unwrap();
        let p = BacklundProblem::new(
            ctx.clone(),
            1,
            &[(j("v", "t"), vt), (j("v", "y"), vy)],
            vec![],
            Some(target),
        )
        .unwrap();
        let cert = p.verify().unwrap();
        assert!(cert.passed());
        assert_eq!(cert.compat[0].1, Compat::Multiple(j("v", "x")));
    }

    #[test]
    fn potential_satisfies_implied_equation() {
        let ctx = JetContext::new(&["t", "x", "y"], &["u", "v", "w"], 4).unwrap();
        let j = |d, s| jet(&ctx, d, s);
        let khz = solved(
            &ctx,
            ctx.jet_by_name("u", "yy").unwrap(),
            j("u", "tx") + j("u", "") * j("u", "xx") + j("u", "x").pow(2),
        )
        .unwrap();
        let vt = solved(
            &ctx,
            ctx.jet_by_name("v", "t").unwrap(),
            (j("v", "").pow(2) - j("u", "")) * j("v", "x") - j("u", "y") - j("v", "") * j("u", "x"),
        )
        .unwrap();
        let vy = solved(
            &ctx,
            ctx.jet_by_name("v", "y").unwrap(),
            j("v", "") * j("v", "x") - j("u", "x"),
        )
        .unwrap();
        let target = solved(&ctx, ctx.jet_by_name("w", "yy").unwrap(), mkhz_rhs(&ctx, "w")).unwrap();
        let p = BacklundProblem::new(
            ctx.clone(),
            2,
            &[
                (j("w", "x"), j("v", "")),
                (j("w", "y"), half() * j("v", "").pow(2) - j("u", "")),
            ],
            vec![khz, vt, vy],
            Some(target),
        )
        .unwrap();
        let cert = p.verify().unwrap();
        assert_eq!(cert.compat, vec![((1, 2), Compat::Zero)]);
        assert_eq!(cert.implied, Some(Compat::Zero));
        assert!(cert.divisors.is_empty());
    }

    #[test]
    fn identity_relations() {
        let ctx = JetContext::new(&["t", "x", "y"], &["u", "v"], 4).unwrap();
        let j = |d, s| jet(&ctx, d, s);
        let source = solved(&ctx, ctx.jet_by_name("u", "yy").unwrap(), mkhz_rhs(&ctx, "u")).unwrap();
        let target = solved(&ctx, ctx.jet_by_name("v", "yy").unwrap(), mkhz_rhs(&ctx, "v")).unwrap();
        let rel: Vec<_> = ["t", "x", "y"].iter().map(|s| (j("v", s), j("u", s))).collect();
        let p = BacklundProblem::new(ctx.clone(), 1, &rel, vec![source], Some(target)).unwrap();
        let cert = p.verify().unwrap();
        assert!(cert.compat.iter().all(|(_, c)| *c == Compat::Zero));
        assert_eq!(cert.implied, Some(Compat::Zero));
    }

    #[test]
    fn wrong_relation_fails() {
        let ctx = JetContext::new(&["t", "x", "y"], &["u", "v"], 4).unwrap();
        let j = |d, s| jet(&ctx, d, s);
        let target = solved(&ctx, ctx.jet_by_name("u", "yy").unwrap(), mkhz_rhs(&ctx, "u")).unwrap();
        let vt = (half() * j("u", "x").pow(2) - j("u", "y")) * j("v", "x");
        let vy = j("u", "x") * j("v", "x");
        let p = BacklundProblem::new(
            ctx.clone(),
            1,
            &[(j("v", "t"), vt), (j("v", "y"), vy)],
            vec![],
            Some(target),
        )
        .unwrap();
        let cert = p.verify().unwrap();
        assert!(!cert.passed());
        let results = cert.results("bad");
        assert_eq!(results[0].status, Status::Fail);
    }

    #[test]
    fn non_affine_relation_is_unsupported() {
        let ctx = JetContext::new(&["t", "x", "y"], &["u", "v"], 3).unwrap();
        let j = |d, s| jet(&ctx, d, s);
        let err = BacklundProblem::new(ctx.clone(), 0, &[(j("u", "x").pow(2), j("v", ""))], vec![], None)
            .unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }
}
