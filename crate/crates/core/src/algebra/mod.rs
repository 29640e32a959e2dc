//! Exact sparse polynomial and rational-function arithmetic.

mod poly;
mod rational;
mod symbol;

pub use poly::{Monomial, Polynomial};
pub use rational::RationalExpr;
pub use symbol::Symbol;
