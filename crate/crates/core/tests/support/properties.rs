//! Randomized invariant suites. Each suite runs a fixed number of cases
//! from a deterministic generator and returns the first counterexample.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use prolong_core::equation::EquationIdeal;
use prolong_core::exterior::DifferentialForm;
use prolong_core::jet::{JetContext, MultiIndex};
use prolong_core::{RationalExpr, Symbol};

pub const RING_CASES: u32 = 500;
pub const D_SQUARED_CASES: u32 = 200;
pub const REDUCE_CASES: u32 = 200;
pub const COMMUTATOR_CASES: u32 = 200;

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

/// A polynomial with up to `terms` terms over `vars`, small integer
/// coefficients and degrees below `bound` in each variable.
fn polynomial(vars: Vec<Symbol>, terms: usize, bound: u32) -> impl Strategy<Value = RationalExpr> + Clone {
    let n = vars.len();
    prop::collection::vec((-5i64..=5, prop::collection::vec(0u32..bound, n)), 0..=terms).prop_map(move |ts| {
        let mut acc = RationalExpr::zero();
        for (c, exps) in ts {
            let mut t = RationalExpr::integer(c);
            for (v, e) in vars.iter().zip(exps) {
                t = &t * &RationalExpr::symbol(*v).pow(e);
            }
            acc = &acc + &t;
        }
        acc
    })
}

fn nonzero(p: impl Strategy<Value = RationalExpr> + Clone) -> impl Strategy<Value = RationalExpr> + Clone {
    p.prop_filter("nonzero", |e| !e.is_zero())
}

fn rational(vars: Vec<Symbol>, bound: u32) -> impl Strategy<Value = RationalExpr> + Clone {
    (polynomial(vars.clone(), 3, 3), nonzero(polynomial(vars, 2, bound)))
        .prop_map(|(n, d)| n.checked_div(&d).expect("nonzero denominator"))
}

fn ring_vars() -> Vec<Symbol> {
    ["a", "b", "c"].iter().map(|n| Symbol::new(n)).collect()
}

fn check(cond: bool, what: &str) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(what.to_string()))
    }
}

/// Field axioms for rational expressions, with an independent oracle:
/// evaluation at a rational point is a ring homomorphism wherever the
/// denominators are nonzero.
pub fn ring_axioms() -> Result<(), String> {
    let vars = ring_vars();
    let point = prop::collection::vec((-7i64..=7, 1i64..=4), 3);
    let strategy = (
        rational(vars.clone(), 3),
        rational(vars.clone(), 3),
        rational(vars.clone(), 3),
        point,
    );
    run(RING_CASES, strategy, move |(a, b, c, pt)| {
        check(&a + &b == &b + &a, "addition commutes")?;
        check(&a * &b == &b * &a, "multiplication commutes")?;
        check(&(&a + &b) + &c == &a + &(&b + &c), "addition associates")?;
        check(&(&a * &b) * &c == &a * &(&b * &c), "multiplication associates")?;
        check(&a * &(&b + &c) == &(&a * &b) + &(&a * &c), "distributivity")?;
        check(&a + &RationalExpr::zero() == a, "additive identity")?;
        check(&a * &RationalExpr::one() == a, "multiplicative identity")?;
        check((&a + &-a.clone()).is_zero(), "additive inverse")?;
        if !a.is_zero() {
            check(&a * &a.recip().expect("nonzero") == RationalExpr::one(), "multiplicative inverse")?;
        }
        let at: HashMap<Symbol, BigRational> = vars
            .iter()
            .zip(&pt)
            .map(|(v, (n, d))| (*v, BigRational::new(BigInt::from(*n), BigInt::from(*d))))
            .collect();
        if let (Ok(ea), Ok(eb)) = (a.evaluate(&at), b.evaluate(&at)) {
            check((&a + &b).evaluate(&at) == Ok(&ea + &eb), "evaluation of a sum")?;
            check((&a * &b).evaluate(&at) == Ok(&ea * &eb), "evaluation of a product")?;
        }
        Ok(())
    })
}

fn form_vars() -> Vec<Symbol> {
    ["x", "y", "z", "w"].iter().map(|n| Symbol::new(n)).collect()
}

/// A random form of degree 0 to 2 over `x, y, z, w`, with coefficients
/// drawn from `coeff`.
fn form(coeff: impl Strategy<Value = RationalExpr> + Clone) -> impl Strategy<Value = DifferentialForm> {
    let vars = form_vars();
    let n = vars.len();
    (0usize..=2)
        .prop_flat_map(move |degree| {
            prop::collection::vec((coeff.clone(), prop::sample::subsequence((0..n).collect::<Vec<_>>(), degree)), 1..=3)
                .prop_map(move |terms| (degree, terms))
        })
        .prop_map(move |(degree, terms)| {
            let mut acc = DifferentialForm::zero(degree);
            for (c, idx) in terms {
                let covs: Vec<Symbol> = idx.iter().map(|&i| vars[i]).collect();
                acc = &acc + &DifferentialForm::monomial(c, &covs);
            }
            acc
        })
}

/// `d(d(omega)) = 0`, together with the graded Leibniz rule against a
/// form with polynomial coefficients.
pub fn d_squared() -> Result<(), String> {
    let vars = form_vars();
    let strategy = (form(rational(vars.clone(), 2)), form(polynomial(vars, 3, 3)));
    run(D_SQUARED_CASES, strategy, |(a, b)| {
        check(a.exterior_derivative().exterior_derivative().is_zero(), "d^2 = 0")?;
        let lhs = a.wedge(&b).exterior_derivative();
        let da_b = a.exterior_derivative().wedge(&b);
        let a_db = a.wedge(&b.exterior_derivative());
        let rhs = if a.degree() % 2 == 0 { &da_b + &a_db } else { &da_b - &a_db };
        check(lhs == rhs, "graded Leibniz rule")
    })
}

fn jet_ctx() -> Arc<JetContext> {
    JetContext::new(&["t", "x", "y"], &["u"], 6).expect("context")
}

/// Jet symbols of `u` up to `order`.
fn jets(ctx: &JetContext, order: usize) -> Vec<Symbol> {
    (0..=order)
        .flat_map(|k| MultiIndex::all_of_order(3, k))
        .map(|i| ctx.jet_symbol(0, &i).expect("within budget"))
        .collect()
}

/// A sparse polynomial in the given variables with at most three factors
/// per term.
fn sparse(vars: Vec<Symbol>) -> impl Strategy<Value = RationalExpr> + Clone {
    let n = vars.len();
    prop::collection::vec((-4i64..=4, prop::collection::vec((0..n, 1u32..=2), 1..=3)), 1..=4).prop_map(
        move |ts| {
            let mut acc = RationalExpr::zero();
            for (c, fs) in ts {
                let mut t = RationalExpr::integer(c);
                for (i, e) in fs {
                    t = &t * &RationalExpr::symbol(vars[i]).pow(e);
                }
                acc = &acc + &t;
            }
            acc
        },
    )
}

fn mkhz(ctx: &Arc<JetContext>) -> EquationIdeal {
    let j = |s: &str| RationalExpr::symbol(ctx.jet_by_name("u", s).expect("jet"));
    let rhs = &j("tx") + &(&(&(&RationalExpr::ratio(1, 2) * &j("x").pow(2)) - &j("y")) * &j("xx"));
    EquationIdeal::new(ctx.clone(), ctx.jet_by_name("u", "yy").expect("jet"), rhs).expect("equation")
}

/// Reduction modulo the mKhZ equation is idempotent and leaves no
/// principal derivative behind.
pub fn reduce_idempotent() -> Result<(), String> {
    let ctx = jet_ctx();
    let eq = mkhz(&ctx);
    let vars = jets(&ctx, 4);
    run(REDUCE_CASES, sparse(vars), move |e| {
        let once = eq.reduce(&e).map_err(|err| TestCaseError::fail(err.to_string()))?;
        let twice = eq.reduce(&once).map_err(|err| TestCaseError::fail(err.to_string()))?;
        check(once == twice, "reduce is idempotent")?;
        check(
            once.symbols().iter().all(|s| !eq.system().is_principal(*s)),
            "no principal derivative survives",
        )
    })
}

/// Total derivatives commute, on the free jet space and after
/// restriction to the mKhZ equation.
pub fn total_derivatives_commute() -> Result<(), String> {
    let ctx = jet_ctx();
    let eq = mkhz(&ctx);
    let mut free = jets(&ctx, 3);
    free.extend(ctx.independent().iter().copied());
    let restricted = jets(&ctx, 2);
    let strategy = (sparse(free), sparse(restricted), 0usize..3, 0usize..3);
    run(COMMUTATOR_CASES, strategy, move |(e, r, i, j)| {
        let fail = |err: prolong_core::Error| TestCaseError::fail(err.to_string());
        let dij = ctx.total_derivative(&ctx.total_derivative(&e, j).map_err(fail)?, i).map_err(fail)?;
        let dji = ctx.total_derivative(&ctx.total_derivative(&e, i).map_err(fail)?, j).map_err(fail)?;
        check(dij == dji, "[D_i, D_j] = 0")?;
        let rij = eq
            .restricted_total_derivative(&eq.restricted_total_derivative(&r, j).map_err(fail)?, i)
            .map_err(fail)?;
        let rji = eq
            .restricted_total_derivative(&eq.restricted_total_derivative(&r, i).map_err(fail)?, j)
            .map_err(fail)?;
        check(rij == rji, "restricted derivatives commute")
    })
}
