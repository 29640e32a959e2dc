mod support {
    pub mod properties;
}

use support::properties as suite;

#[test]
fn ring_axioms_hold() {
    suite::ring_axioms().unwrap();
}

#[test]
fn d_squared_vanishes() {
    suite::d_squared().unwrap();
}

#[test]
fn reduction_is_idempotent() {
    suite::reduce_idempotent().unwrap();
}

#[test]
fn total_derivatives_commute() {
    suite::total_derivatives_commute().unwrap();
}
