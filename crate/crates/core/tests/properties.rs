//! Randomized invariants, 1000 cases each.

mod common;

#[test]
fn basic_inequality() {
    common::basic_inequality().unwrap();
}

#[test]
fn h_norm_is_monotone() {
    common::h_norm_is_monotone().unwrap();
}

#[test]
fn birkhoff_sums_are_additive() {
    common::birkhoff_sums_are_additive().unwrap();
}

#[test]
fn cohomology_reduction_is_exact() {
    common::cohomology_reduction_is_exact().unwrap();
}

#[test]
fn measure_is_consistent_and_invariant() {
    common::measure_is_consistent_and_invariant().unwrap();
}

#[test]
fn tolerance_propositions() {
    common::tolerance_propositions().unwrap();
}

#[test]
fn spectral_bands_account_for_the_total() {
    common::spectral_bands_account_for_the_total().unwrap();
}
