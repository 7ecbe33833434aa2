mod common;

use common::Check;

fn assert_check(c: Check) {
    println!("{c}");
    assert!(c.pass, "{c}");
}

#[test]
fn norm_conservation() {
    assert_check(common::norm_conservation());
}

#[test]
fn hermiticity() {
    assert_check(common::hermiticity());
}

#[test]
fn exchange_symmetry() {
    assert_check(common::exchange_symmetry());
}

#[test]
fn ground_invariance() {
    assert_check(common::ground_invariance());
}

#[test]
fn blockade_frequency() {
    assert_check(common::blockade_frequency());
}

#[test]
fn coherent_overlap() {
    assert_check(common::coherent_overlap());
}

#[test]
fn ground_occupation() {
    for c in common::ground_occupation() {
        assert_check(c);
    }
}

#[test]
fn idle_gate() {
    assert_check(common::idle_gate_is_identity());
}

#[test]
fn decay_linear_law() {
    assert_check(common::decay_linear_law());
}

#[test]
fn zero_wavenumber_recoil() {
    assert_check(common::zero_wavenumber_recoil());
}

#[test]
fn tolerance_halving() {
    assert_check(common::tolerance_halving());
}

#[test]
fn grid_doubling() {
    assert_check(common::grid_doubling());
}
