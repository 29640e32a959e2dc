//! Coverings of an equation manifold.
//!
//! A covering adds fiber variables `v^k` and extends each total derivative to
//! `D~_i = D^_i + sum_k T^k_i d/dv^k`. The extension is a covering when the
//! `D~_i` still commute on the equation.
//!
//! Fibers are either a finite list with an explicit `T` table, or a family
//! `v[0], v[1], ...` generated in one direction `x`: `D~_x v[k] = v[k+1]`,
//! and the other coefficients follow from `T^{v[k]}_i = D~_x^k T^{v[0]}_i`.
//! A family is truncated at an order `K`; symbols up to `v[K + 2s]` exist,
//! where `s` is the highest level used by the seed coefficients.

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use crate::algebra::{RationalExpr, Symbol};
use crate::equation::{proportional_factor, EquationIdeal};
use crate::error::{Error, Result};
use crate::exterior::{annihilation_check, Annihilation, DifferentialForm};
use crate::report::{CheckResult, Status};

#[derive(Debug, Clone)]
pub enum Fibers {
    Finite {
        symbols: Vec<Symbol>,
        table: Vec<Vec<RationalExpr>>,
    },
    Family {
        name: String,
        direction: usize,
        seed: Vec<RationalExpr>,
        order: usize,
        levels: Vec<Symbol>,
    },
}

#[derive(Debug)]
pub struct Covering {
    base: EquationIdeal,
    fibers: Fibers,
    slots: HashMap<Symbol, usize>,
    cache: Mutex<HashMap<(usize, usize, bool), RationalExpr>>,
}

/// Symbol for level `k` of the family `name`, printed `name[k]`.
pub fn family_symbol(name: &str, k: usize) -> Symbol {
    Symbol::new(&format!("{name}[{k}]"))
}

fn family_level(name: &str, s: Symbol) -> Option<usize> {
    s.name()
        .strip_prefix(name)?
        .strip_prefix('[')?
        .strip_suffix(']')?
        .parse()
        .ok()
}

impl Covering {
    /// Finite fibers: `entries[k] = (v^k, [T^k_1, ..., T^k_n])`.
    pub fn finite(base: EquationIdeal, entries: Vec<(Symbol, Vec<RationalExpr>)>) -> Result<Self> {
        let n = base.ctx().dimension();
        let mut symbols = Vec::new();
        let mut table = Vec::new();
        let mut slots = HashMap::new();
        for (k, (s, row)) in entries.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Invalid(format!("fiber {s} needs {n} coefficients")));
            }
            if base.ctx().coordinate(s).is_some()
                || base.ctx().independent_position(s).is_some()
                || slots.insert(s, k).is_some()
            {
                return Err(Error::Invalid(format!("fiber name {s} is already in use")));
            }
            symbols.push(s);
            table.push(row);
        }
        let cov = Covering {
            base,
            fibers: Fibers::Finite { symbols, table },
            slots,
            cache: Mutex::new(HashMap::new()),
        };
        if let Fibers::Finite { table, .. } = &cov.fibers {
            for e in table.iter().flatten() {
                cov.check_symbols(e)?;
            }
        }
        Ok(cov)
    }

    /// A family `name[0], name[1], ...` generated in `direction`.
    ///
    /// `seed[i]` is `T^{name[0]}_i`; `seed[direction]` must be `name[1]`.
    pub fn family(
        base: EquationIdeal,
        name: &str,
        direction: usize,
        seed: Vec<RationalExpr>,
        order: usize,
    ) -> Result<Self> {
        let n = base.ctx().dimension();
        if seed.len() != n || direction >= n {
            return Err(Error::Invalid(format!("family {name} needs {n} seed coefficients")));
        }
        if seed[direction] != RationalExpr::symbol(family_symbol(name, 1)) {
            return Err(Error::Invalid(format!(
                "the {} coefficient of {name}[0] must be {name}[1]",
                base.ctx().independent()[direction]
            )));
        }
        let mut span = 1;
        for e in &seed {
            for s in e.symbols() {
                if let Some(k) = family_level(name, s) {
                    span = span.max(k);
                }
            }
        }
        let limit = order + 2 * span;
        let levels: Vec<Symbol> = (0..=limit).map(|k| family_symbol(name, k)).collect();
        let slots = levels.iter().enumerate().map(|(k, s)| (*s, k)).collect();
        let cov = Covering {
            base,
            fibers: Fibers::Family {
                name: name.to_string(),
                direction,
                seed,
                order,
                levels,
            },
            slots,
            cache: Mutex::new(HashMap::new()),
        };
        if let Fibers::Family { seed, .. } = &cov.fibers {
            for e in seed {
                cov.check_symbols(e)?;
            }
        }
        Ok(cov)
    }

    fn check_symbols(&self, e: &RationalExpr) -> Result<()> {
        let ctx = self.base.ctx();
        for s in e.symbols() {
            let known = ctx.independent_position(s).is_some()
                || ctx.coordinate(s).is_some()
                || self.slots.contains_key(&s);
            if !known {
                return Err(Error::Invalid(format!("undeclared symbol {s} in covering")));
            }
        }
        Ok(())
    }

    pub fn base(&self) -> &EquationIdeal {
        &self.base
    }

    pub fn fibers(&self) -> &Fibers {
        &self.fibers
    }

    /// The truncation order of a family, `None` for finite fibers.
    pub fn order(&self) -> Option<usize> {
        match &self.fibers {
            Fibers::Family { order, .. } => Some(*order),
            Fibers::Finite { .. } => None,
        }
    }

    /// Fiber symbols checked at `order`: `v[0..=order]` for a family, all
    /// fibers otherwise.
    pub fn fibers_up_to(&self, order: usize) -> Vec<Symbol> {
        match &self.fibers {
            Fibers::Finite { symbols, .. } => symbols.clone(),
            Fibers::Family { levels, .. } => levels[..=order.min(levels.len() - 1)].to_vec(),
        }
    }

    fn slot_of(&self, fiber: Symbol) -> Result<usize> {
        self.slots
            .get(&fiber)
            .copied()
            .ok_or_else(|| Error::Invalid(format!("{fiber} is not a fiber variable")))
    }

    /// `T^fiber_i`, reduced on the equation.
    pub fn coefficient(&self, fiber: Symbol, i: usize) -> Result<RationalExpr> {
        self.t(self.slot_of(fiber)?, i, true)
    }

    fn t(&self, slot: usize, i: usize, reduced: bool) -> Result<RationalExpr> {
        let key = (slot, i, reduced);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let value = match &self.fibers {
            Fibers::Finite { table, .. } => {
                let e = &table[slot][i];
                if reduced {
                    self.base.reduce(e)?
                } else {
                    e.clone()
                }
            }
            Fibers::Family {
                name,
                direction,
                seed,
                levels,
                ..
            } => {
                if i == *direction {
                    match levels.get(slot + 1) {
                        Some(s) => RationalExpr::symbol(*s),
                        None => {
                            return Err(Error::Truncation {
                                coordinate: format!("{name}[{}]", slot + 1),
                                max_order: levels.len() - 1,
                            })
                        }
                    }
                } else if slot == 0 {
                    if reduced {
                        self.base.reduce(&seed[i])?
                    } else {
                        seed[i].clone()
                    }
                } else {
                    let lower = self.t(slot - 1, i, reduced)?;
                    self.derive(&lower, *direction, reduced)?
                }
            }
        };
        self.cache.lock().unwrap().insert(key, value.clone());
        Ok(value)
    }

    fn derive(&self, a: &RationalExpr, i: usize, reduced: bool) -> Result<RationalExpr> {
        let ctx = self.base.ctx();
        let xi = ctx.independent()[i];
        let system = self.base.system();
        a.derivation(|s| {
            if s == xi {
                return Ok(Some(RationalExpr::one()));
            }
            if let Some(&slot) = self.slots.get(&s) {
                return self.t(slot, i, reduced).map(Some);
            }
            match ctx.raise(s, i) {
                Some(next) => {
                    let next = next?;
                    if reduced {
                        Ok(Some(
                            system
                                .normal_form_of(next)?
                                .unwrap_or_else(|| RationalExpr::symbol(next)),
                        ))
                    } else {
                        Ok(Some(RationalExpr::symbol(next)))
                    }
                }
                None => Ok(None),
            }
        })
    }

    /// `D~_i a = D^_i a + sum_k T^k_i da/dv^k`, reduced on the equation.
    pub fn extended_total_derivative(&self, a: &RationalExpr, i: usize) -> Result<RationalExpr> {
        let a = self.base.reduce(a)?;
        self.derive(&a, i, true)
    }

    /// `D_i a + sum_k T^k_i da/dv^k` on the full jet space, with the
    /// unreduced coefficients.
    pub fn unreduced_total_derivative(&self, a: &RationalExpr, i: usize) -> Result<RationalExpr> {
        self.derive(a, i, false)
    }

    /// `[D~_i, D~_j] fiber` computed off the equation.
    pub fn unreduced_commutator(&self, i: usize, j: usize, fiber: Symbol) -> Result<RationalExpr> {
        let slot = self.slot_of(fiber)?;
        let dij = self.derive(&self.t(slot, j, false)?, i, false)?;
        let dji = self.derive(&self.t(slot, i, false)?, j, false)?;
        Ok(dij - dji)
    }

    /// `D~_i T^fiber_j - D~_j T^fiber_i`, reduced on the equation.
    pub fn commutator(&self, i: usize, j: usize, fiber: Symbol) -> Result<RationalExpr> {
        let slot = self.slot_of(fiber)?;
        let dij = self.derive(&self.t(slot, j, true)?, i, true)?;
        let dji = self.derive(&self.t(slot, i, true)?, j, true)?;
        Ok(dij - dji)
    }

    fn check_order(&self, order: usize) -> Result<()> {
        match &self.fibers {
            Fibers::Family { order: k, .. } if order > *k => Err(Error::Invalid(format!(
                "order {order} exceeds the family truncation order {k}"
            ))),
            _ => Ok(()),
        }
    }

    /// Commutators `[D~_i, D~_j]` on every checked fiber, for all `i < j`.
    pub fn flatness_check(&self, order: usize) -> Result<FlatnessReport> {
        self.check_order(order)?;
        let n = self.base.ctx().dimension();
        let fibers = self.fibers_up_to(order);
        let form = self.base.solved_form();
        let principal = self.base.principal();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for (level, &fiber) in fibers.iter().enumerate() {
                    let outcome = match self.commutator(i, j, fiber) {
                        Ok(r) if r.is_zero() => Outcome::Zero,
                        Ok(r) => Outcome::Residual(r),
                        Err(e) if e.is_truncation() => Outcome::Truncated(e.to_string()),
                        Err(e) => return Err(e),
                    };
                    let multiplier = if level == 0 {
                        match self.unreduced_commutator(i, j, fiber) {
                            Ok(c) => proportional_factor(&c, principal, &form),
                            Err(e) if e.is_truncation() => None,
                            Err(e) => return Err(e),
                        }
                    } else {
                        None
                    };
                    entries.push(FlatnessEntry {
                        pair: (i, j),
                        fiber,
                        outcome,
                        multiplier,
                    });
                }
            }
        }
        Ok(FlatnessReport {
            order,
            independent: self.base.ctx().independent().to_vec(),
            solved_form: form,
            entries,
        })
    }

    /// The Wahlquist-Estabrook form `dv - sum_i T^v_i dx^i` of one fiber.
    pub fn we_form(&self, fiber: Symbol) -> Result<DifferentialForm> {
        let slot = self.slot_of(fiber)?;
        let ctx = self.base.ctx();
        let mut terms = vec![(fiber, RationalExpr::one())];
        for (i, &x) in ctx.independent().iter().enumerate() {
            terms.push((x, -self.t(slot, i, true)?));
        }
        Ok(DifferentialForm::one_form(terms))
    }

    /// WE forms of the fibers checked at `k` (`v[0]` through `v[k]` for a
    /// family).
    pub fn we_forms(&self, k: usize) -> Result<Vec<DifferentialForm>> {
        if let Fibers::Family { order, .. } = &self.fibers {
            if k >= *order {
                return Err(Error::Invalid(format!(
                    "WE forms up to {k} need a family of order above {k}, have {order}"
                )));
            }
        }
        self.fibers_up_to(k).into_iter().map(|f| self.we_form(f)).collect()
    }

    /// The restricted contact form `du_I - sum_i reduce(u_{Ii}) dx^i`.
    pub fn contact_form(&self, jet: Symbol) -> Result<DifferentialForm> {
        let ctx = self.base.ctx();
        let mut terms = vec![(jet, RationalExpr::one())];
        for (i, &x) in ctx.independent().iter().enumerate() {
            let raised = ctx
                .raise(jet, i)
                .ok_or_else(|| Error::Invalid(format!("{jet} is not a jet coordinate")))??;
            terms.push((x, -self.base.reduce(&RationalExpr::symbol(raised))?));
        }
        Ok(DifferentialForm::one_form(terms))
    }

    /// Tests `d(WE form of fiber) == 0` modulo the WE forms and the
    /// restricted contact forms, after restriction to the equation.
    ///
    /// Only generators whose leading covector occurs in the differential
    /// are needed; they are pointwise independent, so the annihilation test
    /// decides ideal membership exactly.
    pub fn we_closure(&self, fiber: Symbol) -> Result<Annihilation> {
        let ctx = self.base.ctx();
        let omega = self
            .we_form(fiber)?
            .exterior_derivative()
            .pullback_on_equation(self.base.system())?;
        let mut generators = Vec::new();
        let mut seen = BTreeSet::new();
        for s in omega.covectors() {
            if ctx.independent_position(s).is_some() || !seen.insert(s) {
                continue;
            }
            if self.slots.contains_key(&s) {
                generators.push(self.we_form(s)?);
            } else if ctx.coordinate(s).is_some() {
                if self.base.system().is_principal(s) {
                    return Err(Error::Invalid(format!("principal jet {s} survived restriction")));
                }
                generators.push(self.contact_form(s)?);
            } else {
                return Err(Error::Invalid(format!("unexpected covector d{s}")));
            }
        }
        Ok(annihilation_check(&omega, &generators))
    }

    /// Closure of every WE form checked at `k`.
    pub fn we_closure_check(&self, k: usize) -> Result<Vec<(Symbol, ClosureOutcome)>> {
        self.check_order(k)?;
        let mut out = Vec::new();
        for fiber in self.fibers_up_to(k) {
            let outcome = match self.we_closure(fiber) {
                Ok(a) if a.holds => ClosureOutcome::Closed,
                Ok(a) => ClosureOutcome::Open(a.residual),
                Err(e) if e.is_truncation() => ClosureOutcome::Truncated(e.to_string()),
                Err(e) => return Err(e),
            };
            out.push((fiber, outcome));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Zero,
    Residual(RationalExpr),
    Truncated(String),
}

#[derive(Clone, Debug)]
pub struct FlatnessEntry {
    pub pair: (usize, usize),
    pub fiber: Symbol,
    pub outcome: Outcome,
    /// `m` with `[D~_i, D~_j] fiber == m * (principal - rhs)` off the
    /// equation, when such an exact multiple exists.
    pub multiplier: Option<RationalExpr>,
}

#[derive(Clone, Debug)]
pub struct FlatnessReport {
    pub order: usize,
    pub independent: Vec<Symbol>,
    pub solved_form: RationalExpr,
    pub entries: Vec<FlatnessEntry>,
}

impl FlatnessReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.outcome == Outcome::Zero)
    }

    pub fn results(&self, name: &str) -> Vec<CheckResult> {
        let count = self.entries.len();
        self.entries
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let (i, j) = e.pair;
                let id = format!(
                    "{name}.flat.{}{}.{}",
                    self.independent[i], self.independent[j], e.fiber
                );
                let mut r = match &e.outcome {
                    Outcome::Zero => CheckResult::pass(id),
                    Outcome::Residual(res) => CheckResult::new(id, Status::Fail, res.to_string()),
                    Outcome::Truncated(msg) => CheckResult::inconclusive(id, msg),
                };
                if let Some(m) = &e.multiplier {
                    r = r.with_note(format!(
                        "unreduced commutator = ({m})*({})",
                        self.solved_form
                    ));
                }
                if k + 1 == count {
                    r = r.with_note(format!("checked through order {}", self.order));
                }
                r
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosureOutcome {
    Closed,
    Open(DifferentialForm),
    Truncated(String),
}

pub fn closure_results(name: &str, outcomes: &[(Symbol, ClosureOutcome)]) -> Vec<CheckResult> {
    outcomes
        .iter()
        .map(|(fiber, o)| {
            let id = format!("{name}.closure.{fiber}");
            match o {
                ClosureOutcome::Closed => CheckResult::pass(id),
                ClosureOutcome::Open(res) => CheckResult::new(id, Status::Fail, res.to_string()),
                ClosureOutcome::Truncated(msg) => CheckResult::inconclusive(id, msg),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetContext;
    use std::sync::Arc;

    fn ctx() -> Arc<JetContext> {
        JetContext::new(&["t", "x", "y"], &["u"], 8).unwrap()
    }

    fn j(c: &JetContext, s: &str) -> RationalExpr {
        RationalExpr::symbol(c.jet_by_name("u", s).unwrap())
    }

    fn v(k: usize) -> RationalExpr {
        RationalExpr::symbol(family_symbol("v", k))
    }

    fn mkhz(sign: i64) -> Covering {
        let c = ctx();
        let half = RationalExpr::ratio(1, 2);
        let rhs = j(&c, "tx") + (&half * &j(&c, "x").pow(2) - j(&c, "y")) * j(&c, "xx");
        let eq = EquationIdeal::new(c.clone(), c.jet_by_name("u", "yy").unwrap(), rhs).unwrap();
        let tt = (&half * &j(&c, "x").pow(2) + RationalExpr::integer(sign) * j(&c, "y")) * v(1);
        let ty = j(&c, "x") * v(1);
        Covering::family(eq, "v", 1, vec![tt, v(1), ty], 3).unwrap()
    }

    fn khz() -> Covering {
        let c = ctx();
        let rhs = j(&c, "tx") + j(&c, "") * j(&c, "xx") + j(&c, "x").pow(2);
        let eq = EquationIdeal::new(c.clone(), c.jet_by_name("u", "yy").unwrap(), rhs).unwrap();
        let tt = (v(0).pow(2) - j(&c, "")) * v(1) - j(&c, "y") - v(0) * j(&c, "x");
        let ty = v(0) * v(1) - j(&c, "x");
        Covering::family(eq, "v", 1, vec![tt, v(1), ty], 3).unwrap()
    }

    #[test]
    fn extended_derivatives_of_seed() {
        let k = khz();
        let c = k.base().ctx().clone();
        assert_eq!(k.extended_total_derivative(&v(0), 1).unwrap(), v(1));
        let expect = (v(0).pow(2) - j(&c, "")) * v(1) - j(&c, "y") - v(0) * j(&c, "x");
        assert_eq!(k.extended_total_derivative(&v(0), 0).unwrap(), expect);
        let m = mkhz(1);
        assert_eq!(m.extended_total_derivative(&v(0), 2).unwrap(), j(&c, "x") * v(1));
        for level in 0..4 {
            assert_eq!(m.extended_total_derivative(&v(level), 1).unwrap(), v(level + 1));
        }
    }

    #[test]
    fn fiber_free_matches_restricted_derivative() {
        let m = mkhz(1);
        let c = m.base().ctx().clone();
        let a = j(&c, "y") * j(&c, "x") + j(&c, "ty");
        for i in 0..3 {
            assert_eq!(
                m.extended_total_derivative(&a, i).unwrap(),
                m.base().restricted_total_derivative(&a, i).unwrap()
            );
        }
    }

    #[test]
    fn catalog_coverings_are_flat() {
        assert!(khz().flatness_check(3).unwrap().passed());
        assert!(mkhz(1).flatness_check(3).unwrap().passed());
    }

    #[test]
    fn unreduced_commutator_is_multiple_of_equation() {
        let m = mkhz(1);
        let c = m.base().ctx().clone();
        let half = RationalExpr::ratio(1, 2);
        let eq = j(&c, "yy") - j(&c, "tx") - (&half * &j(&c, "x").pow(2) - j(&c, "y")) * j(&c, "xx");
        let comm = m.unreduced_commutator(2, 0, family_symbol("v", 0)).unwrap();
        assert_eq!(comm, eq * v(1));
        let report = m.flatness_check(0).unwrap();
        let ty = report.entries.iter().find(|e| e.pair == (0, 2)).unwrap();
        assert_eq!(ty.multiplier, Some(-v(1)));
    }

    #[test]
    fn broken_covering_fails() {
        let m = mkhz(-1);
        let c = m.base().ctx().clone();
        let report = m.flatness_check(1).unwrap();
        assert!(!report.passed());
        let r = m.commutator(0, 2, family_symbol("v", 0)).unwrap();
        // D~_t(u_x v1) - D~_y((u_x^2/2 - u_y) v1), reduced by hand.
        let expect = (RationalExpr::integer(2) * j(&c, "tx") + j(&c, "x").pow(2) * j(&c, "xx")
            - RationalExpr::integer(2) * j(&c, "x") * j(&c, "xy"))
            * v(1);
        assert_eq!(r, expect);
        let closure = m.we_closure_check(0).unwrap();
        assert!(matches!(closure[0].1, ClosureOutcome::Open(_)));
    }

    #[test]
    fn we_forms_and_closure() {
        let m = mkhz(1);
        let c = m.base().ctx().clone();
        let half = RationalExpr::ratio(1, 2);
        let t = c.independent()[0];
        let x = c.independent()[1];
        let y = c.independent()[2];
        let expect = DifferentialForm::one_form([
            (family_symbol("v", 0), RationalExpr::one()),
            (t, -((&half * &j(&c, "x").pow(2) + j(&c, "y")) * v(1))),
            (x, -v(1)),
            (y, -(j(&c, "x") * v(1))),
        ]);
        let forms = m.we_forms(1).unwrap();
        assert_eq!(forms[0], expect);
        for (i, &xi) in [t, x, y].iter().enumerate() {
            let c0 = -forms[0].coefficient(&[xi]);
            let c1 = -forms[1].coefficient(&[xi]);
            assert_eq!(c1, m.extended_total_derivative(&c0, 1).unwrap(), "direction {i}");
        }
        for k in [khz(), mkhz(1)] {
            for (_, o) in k.we_closure_check(2).unwrap() {
                assert_eq!(o, ClosureOutcome::Closed);
            }
        }
    }

    #[test]
    fn family_overflow_is_truncation() {
        let m = mkhz(1);
        let top = family_symbol("v", 5);
        let err = m.extended_total_derivative(&RationalExpr::symbol(top), 1).unwrap_err();
        assert!(err.is_truncation());
        assert!(m.flatness_check(4).is_err());
    }

    #[test]
    fn finite_fibers() {
        // u_yy = u_tx + u u_xx + u_x^2 with v_x, v_t, v_y as a one-fiber
        // covering whose fiber coefficient involves no fibers.
        let c = ctx();
        let rhs = j(&c, "tx") + j(&c, "") * j(&c, "xx") + j(&c, "x").pow(2);
        let eq = EquationIdeal::new(c.clone(), c.jet_by_name("u", "yy").unwrap(), rhs).unwrap();
        let w = Symbol::new("w");
        // w_x = u_y, w_y = u_t + u u_x: a conservation law of the equation.
        let cov = Covering::finite(
            eq,
            vec![(w, vec![RationalExpr::zero(), j(&c, "y"), j(&c, "t") + j(&c, "") * j(&c, "x")])],
        );
        let cov = cov.unwrap();
        let report = cov.flatness_check(0).unwrap();
        let xy = report.entries.iter().find(|e| e.pair == (1, 2)).unwrap();
        assert_eq!(xy.outcome, Outcome::Zero);
        assert!(!report.passed());
    }
}
