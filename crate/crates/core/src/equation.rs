//! Equations in solved form and normal forms on their infinite prolongation.
//!
//! An equation `u_P = rhs` determines every derivative `u_{P+K}` through the
//! prolongation `D_K(rhs)`. [`SolvedSystem::reduce`] replaces every such
//! principal jet by its prolonged solved form, so the result lives on the
//! equation manifold and contains only parametric jets.
//!
//! A [`SolvedSystem`] may hold several solved equations over several
//! dependent variables (a covering written as a PDE system, or the relations
//! of a Backlund problem); [`EquationIdeal`] is the single-equation case.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use crate::algebra::{RationalExpr, Symbol};
use crate::error::{Error, Result};
use crate::jet::{JetContext, MultiIndex};

#[derive(Clone, Debug)]
pub struct SolvedEquation {
    pub dependent: usize,
    pub principal: MultiIndex,
    pub principal_symbol: Symbol,
    pub rhs: RationalExpr,
}

impl SolvedEquation {
    /// Solves `lhs = rhs` for the jet `principal`, which must occur affinely.
    pub fn solve(
        ctx: &JetContext,
        lhs: &RationalExpr,
        rhs: &RationalExpr,
        principal: Symbol,
    ) -> Result<SolvedEquation> {
        let coord = ctx
            .coordinate(principal)
            .ok_or_else(|| Error::Invalid(format!("{principal} is not a jet coordinate")))?
            .clone();
        let f = lhs - rhs;
        let not_affine = || Error::NotAffine {
            principal: principal.to_string(),
        };
        let slope = f.partial_derivative(principal);
        if slope.is_zero() || slope.contains(principal) {
            return Err(not_affine());
        }
        let offset = f.substitute(&HashMap::from([(principal, RationalExpr::zero())]))?;
        let solved = (-offset).checked_div(&slope)?;
        let eq = SolvedEquation {
            dependent: coord.dependent,
            principal: coord.index,
            principal_symbol: principal,
            rhs: solved,
        };
        for s in eq.rhs.symbols() {
            if eq.covers(ctx, s).is_some() {
                return Err(Error::Invalid(format!(
                    "right-hand side of {principal} contains the principal derivative {s}"
                )));
            }
        }
        Ok(eq)
    }

    /// `Some(K)` if `s = u_{P+K}`.
    fn covers(&self, ctx: &JetContext, s: Symbol) -> Option<MultiIndex> {
        let c = ctx.coordinate(s)?;
        if c.dependent != self.dependent {
            return None;
        }
        c.index.strip(&self.principal)
    }
}

#[derive(Debug)]
pub struct SolvedSystem {
    ctx: Arc<JetContext>,
    equations: Vec<SolvedEquation>,
    cache: Mutex<HashMap<(usize, MultiIndex), RationalExpr>>,
}

impl SolvedSystem {
    pub fn new(ctx: Arc<JetContext>, equations: Vec<SolvedEquation>) -> Result<Self> {
        let mut principals = BTreeSet::new();
        for eq in &equations {
            if !principals.insert(eq.principal_symbol) {
                return Err(Error::Invalid(format!(
                    "{} is solved for twice",
                    eq.principal_symbol
                )));
            }
            for s in eq.rhs.symbols() {
                if eq.covers(&ctx, s).is_some() {
                    return Err(Error::Invalid(format!(
                        "right-hand side of {} contains {s}",
                        eq.principal_symbol
                    )));
                }
            }
        }
        Ok(SolvedSystem {
            ctx,
            equations,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// A system with no equations: reduction is the identity.
    pub fn free(ctx: Arc<JetContext>) -> Self {
        SolvedSystem {
            ctx,
            equations: Vec::new(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn ctx(&self) -> &Arc<JetContext> {
        &self.ctx
    }

    pub fn equations(&self) -> &[SolvedEquation] {
        &self.equations
    }

    /// The first equation (in declaration order) whose principal derivative
    /// divides the jet `s`, with the remaining multi-index.
    pub fn principal_match(&self, s: Symbol) -> Option<(usize, MultiIndex)> {
        self.equations
            .iter()
            .enumerate()
            .find_map(|(k, eq)| eq.covers(&self.ctx, s).map(|rest| (k, rest)))
    }

    pub fn is_principal(&self, s: Symbol) -> bool {
        self.principal_match(s).is_some()
    }

    /// Normal form of a single symbol, or `None` if it is parametric.
    pub fn normal_form_of(&self, s: Symbol) -> Result<Option<RationalExpr>> {
        match self.principal_match(s) {
            Some((k, rest)) => self.prolong_inner(k, &rest, &mut Vec::new()).map(Some),
            None => Ok(None),
        }
    }

    /// Replaces every principal jet by its prolonged solved form.
    pub fn reduce(&self, a: &RationalExpr) -> Result<RationalExpr> {
        self.reduce_inner(a, &mut Vec::new())
    }

    /// The reduced solved form of `D_K(u_P)` for equation `eq`.
    pub fn prolong(&self, eq: usize, index: &MultiIndex) -> Result<RationalExpr> {
        self.prolong_inner(eq, index, &mut Vec::new())
    }

    /// `reduce(D_i(reduce(a)))`.
    pub fn restricted_total_derivative(&self, a: &RationalExpr, i: usize) -> Result<RationalExpr> {
        let r = self.reduce(a)?;
        let d = self.ctx.total_derivative(&r, i)?;
        self.reduce(&d)
    }

    fn reduce_inner(
        &self,
        a: &RationalExpr,
        stack: &mut Vec<(usize, MultiIndex)>,
    ) -> Result<RationalExpr> {
        let mut rules = HashMap::new();
        for s in a.symbols() {
            if let Some((k, rest)) = self.principal_match(s) {
                rules.insert(s, self.prolong_inner(k, &rest, stack)?);
            }
        }
        if rules.is_empty() {
            return Ok(a.clone());
        }
        a.substitute_unchecked(&rules)
    }

    fn prolong_inner(
        &self,
        eq: usize,
        index: &MultiIndex,
        stack: &mut Vec<(usize, MultiIndex)>,
    ) -> Result<RationalExpr> {
        let key = (eq, index.clone());
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        if stack.contains(&key) {
            return Err(Error::NonTerminating(format!(
                "prolongation of {} along {:?} depends on itself",
                self.equations[eq].principal_symbol, index
            )));
        }
        stack.push(key.clone());
        let value = match index.split_last() {
            None => self.reduce_inner(&self.equations[eq].rhs, stack),
            Some((rest, i)) => self
                .prolong_inner(eq, &rest, stack)
                .and_then(|lower| self.ctx.total_derivative(&lower, i))
                .and_then(|d| self.reduce_inner(&d, stack)),
        };
        stack.pop();
        let value = value?;
        self.cache.lock().unwrap().insert(key, value.clone());
        Ok(value)
    }
}

/// A single scalar equation `u_P = rhs` and its prolongations.
#[derive(Debug, Clone)]
pub struct EquationIdeal {
    system: Arc<SolvedSystem>,
}

impl EquationIdeal {
    /// `principal = rhs`, where `rhs` must be free of the principal jet and
    /// all of its derivatives.
    pub fn new(ctx: Arc<JetContext>, principal: Symbol, rhs: RationalExpr) -> Result<Self> {
        let eq = SolvedEquation::solve(&ctx, &RationalExpr::symbol(principal), &rhs, principal)?;
        Self::from_solved(ctx, eq)
    }

    /// `lhs = rhs`, re-solved for `principal` when it occurs affinely.
    pub fn from_relation(
        ctx: Arc<JetContext>,
        lhs: &RationalExpr,
        rhs: &RationalExpr,
        principal: Symbol,
    ) -> Result<Self> {
        let eq = SolvedEquation::solve(&ctx, lhs, rhs, principal)?;
        Self::from_solved(ctx, eq)
    }

    fn from_solved(ctx: Arc<JetContext>, eq: SolvedEquation) -> Result<Self> {
        Ok(EquationIdeal {
            system: Arc::new(SolvedSystem::new(ctx, vec![eq])?),
        })
    }

    pub fn system(&self) -> &Arc<SolvedSystem> {
        &self.system
    }

    pub fn ctx(&self) -> &Arc<JetContext> {
        self.system.ctx()
    }

    pub fn principal(&self) -> Symbol {
        self.system.equations()[0].principal_symbol
    }

    pub fn dependent(&self) -> usize {
        self.system.equations()[0].dependent
    }

    pub fn rhs(&self) -> &RationalExpr {
        &self.system.equations()[0].rhs
    }

    /// `principal - rhs`, which vanishes on the equation.
    pub fn solved_form(&self) -> RationalExpr {
        RationalExpr::symbol(self.principal()) - self.rhs()
    }

    pub fn reduce(&self, a: &RationalExpr) -> Result<RationalExpr> {
        self.system.reduce(a)
    }

    pub fn prolong(&self, index: &MultiIndex) -> Result<RationalExpr> {
        self.system.prolong(0, index)
    }

    pub fn restricted_total_derivative(&self, a: &RationalExpr, i: usize) -> Result<RationalExpr> {
        self.system.restricted_total_derivative(a, i)
    }

    /// If `a` is affine in the principal jet and equals `m * (principal - rhs)`
    /// exactly, returns the multiplier `m`.
    pub fn factor_over(&self, a: &RationalExpr) -> Option<RationalExpr> {
        proportional_factor(a, self.principal(), &self.solved_form())
    }
}

/// Multiplier `m` with `a == m * form`, where `form` is affine with unit
/// slope in `principal`.
pub(crate) fn proportional_factor(
    a: &RationalExpr,
    principal: Symbol,
    form: &RationalExpr,
) -> Option<RationalExpr> {
    if a.is_zero() {
        return None;
    }
    let m = a.partial_derivative(principal);
    if m.is_zero() || m.contains(principal) {
        return None;
    }
    (a - &(&m * form)).is_zero().then_some(m)
}
