#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod error;

pub use algebra::{Monomial, Polynomial, RationalExpr, Symbol};
pub use error::{Error, Result};
pub mod equation;
pub mod jet;
pub mod exterior;
pub mod covering;
pub mod report;
pub mod backlund;
pub mod coframe;
pub mod linalg;
