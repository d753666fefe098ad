//! Module invariants under a property-testing runner (256 cases each).

mod common;

#[test]
fn graph_connected() {
    common::graph_connected().unwrap();
}

#[test]
fn metropolis_structure() {
    common::metropolis_structure().unwrap();
}

#[test]
fn weight_spectrum() {
    common::weight_spectrum().unwrap();
}

#[test]
fn mass_conservation() {
    common::mass_conservation().unwrap();
}

#[test]
fn monotone_contraction() {
    common::monotone_contraction().unwrap();
}

#[test]
fn chebyshev_bound() {
    common::chebyshev_bound().unwrap();
}

#[test]
fn consensus_determinism() {
    common::consensus_determinism().unwrap();
}

#[test]
fn interlacing() {
    common::interlacing().unwrap();
}

#[test]
fn ritz_containment() {
    common::ritz_containment().unwrap();
}

#[test]
fn pm_angle_decay() {
    common::pm_angle_decay().unwrap();
}

#[test]
fn bisection_oracle() {
    common::bisection_oracle().unwrap();
}

#[test]
fn ideal_equivalence() {
    common::ideal_equivalence().unwrap();
}

#[test]
fn beta_nonnegative() {
    common::beta_nonnegative().unwrap();
}

#[test]
fn decentralized_determinism() {
    common::decentralized_determinism().unwrap();
}

#[test]
fn error_trace_exact() {
    common::error_trace_exact().unwrap();
}

#[test]
fn signal_determinism() {
    common::signal_determinism().unwrap();
}

#[test]
fn scale_invariance() {
    common::scale_invariance().unwrap();
}

#[test]
fn dla_statistics_defined() {
    common::dla_statistics_defined().unwrap();
}

#[test]
fn unanimous_decisions() {
    common::unanimous_decisions().unwrap();
}

#[test]
fn roc_order_invariance() {
    common::roc_order_invariance().unwrap();
}
