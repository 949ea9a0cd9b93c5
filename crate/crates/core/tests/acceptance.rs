//! One line per criterion: `[PASS]` or `[FAIL]` followed by the measurements.
//! `DILUTE_SUITE=fast` shortens every orbit tenfold.

use dilute_core::verify::{Suite, Verifier, DEFAULT_SEED};

fn verifier() -> Verifier {
    let suite = match std::env::var("DILUTE_SUITE").as_deref() {
        Ok("fast") => Suite::Fast,
        _ => Suite::Full,
    };
    Verifier::new(suite, DEFAULT_SEED)
}

fn check(id: u8) {
    let r = verifier().run(id);
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn c01_closed_form_anchor() {
    check(1);
}

#[test]
fn c02_fourier_consistency() {
    check(2);
}

#[test]
fn c03_uniform_phase_law() {
    check(3);
}

#[test]
fn c04_diophantine_branch() {
    check(4);
}

#[test]
fn c05_rational_branch() {
    check(5);
}

#[test]
fn c06_anomaly_decay() {
    check(6);
}

#[test]
fn c07_harmonic_structure() {
    check(7);
}

#[test]
fn c08_hat_identity() {
    check(8);
}

#[test]
fn c09_dos_anchors() {
    check(9);
}

#[test]
fn c10_estimator_equivalence() {
    check(10);
}

#[test]
fn c11_band_center_linearity() {
    check(11);
}

#[test]
fn c12_determinism() {
    check(12);
}
