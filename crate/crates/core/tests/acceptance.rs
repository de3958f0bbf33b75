//! Acceptance criteria 1–7. Each test prints one pass/fail line.

use qclab::acceptance::{self, CriterionReport};

fn check(id: u8) {
    let r: CriterionReport = acceptance::run(id);
    println!("{r} ({:.2}s)", r.elapsed.as_secs_f64());
    assert!(r.passed, "{r}");
}

#[test]
fn criterion_1_certificate_reproduction() {
    check(1);
}

#[test]
fn criterion_2_quantified_infeasibility() {
    check(2);
}

#[test]
fn criterion_3_ghost_force_scaling() {
    check(3);
}

#[test]
fn criterion_4_consistency_exponents() {
    check(4);
}

#[test]
fn criterion_5_convergence_rates() {
    check(5);
}

#[test]
fn criterion_6_structural_properties() {
    check(6);
}

#[test]
fn criterion_7_oracle_equivalence() {
    check(7);
}
