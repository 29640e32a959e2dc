//! Parser round-trip suites over the shipped corpus and random syntax
//! trees.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use prolong_cli::ProblemFile;
use prolong_cli::catalog;
use prolong_cli::expr::{Expr, parse_expr};

pub const EXPR_CASES: u32 = 500;

fn leaf() -> impl Strategy<Value = Expr> {
    let num = (0u32..40, 1u32..6).prop_map(|(n, d)| Expr::Num(BigRational::new(BigInt::from(n), BigInt::from(d))));
    let var = prop::sample::select(vec!["u", "u_x", "u_txy", "v[0]", "v[12]", "t", "q2"]).prop_map(Expr::var);
    prop_oneof![num, var]
}

pub fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        let b = |e: Expr| Box::new(e);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Add(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Sub(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Mul(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Div(b(x), b(y))),
            (inner.clone(), 0u32..5).prop_map(move |(x, k)| Expr::Pow(b(x), k)),
            inner.prop_map(move |x| Expr::Neg(b(x))),
        ]
    })
}

/// `parse(print(e)) == e` for random well-formed syntax trees.
pub fn random_expressions() -> Result<(), String> {
    let config = Config {
        cases: EXPR_CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner
        .run(&expr(), |e| {
            let printed = e.to_string();
            let back = parse_expr(&printed).map_err(|err| TestCaseError::fail(format!("{printed}: {err}")))?;
            if back != e {
                return Err(TestCaseError::fail(format!("{printed} parsed as {back:?}")));
            }
            if back.to_string() != printed {
                return Err(TestCaseError::fail(format!("{printed} is not a fixed point")));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Every shipped problem file parses, and printing then parsing gives the
/// same syntax tree and the same text.
pub fn corpus() -> Result<usize, String> {
    for entry in catalog::ENTRIES {
        let p = ProblemFile::parse(entry.text).map_err(|e| format!("{}: {e}", entry.file))?;
        let printed = p.to_string();
        let back = ProblemFile::parse(&printed).map_err(|e| format!("{} reprinted: {e}", entry.file))?;
        if back != p {
            return Err(format!("{} does not round-trip", entry.file));
        }
        if back.to_string() != printed {
            return Err(format!("{} printing is not a fixed point", entry.file));
        }
    }
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/problems");
    let mut on_disk = 0;
    for f in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = f.map_err(|e| e.to_string())?.path();
        if path.extension().is_some_and(|e| e == "prob") {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
            if catalog::get(name).map(|e| e.text) != Some(text.as_str()) {
                return Err(format!("{name} is not in the built-in catalog"));
            }
            on_disk += 1;
        }
    }
    Ok(on_disk)
}
