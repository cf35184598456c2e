//! Multiplier tables: determinism, persistence and spot values.

use std::f64::consts::PI;

use salem_patterns::oscillatory::{multiplier_quadrature, tabulate_multiplier, MultiplierTable};
use salem_patterns::Polynomial;

#[test]
fn tabulation_is_deterministic_and_round_trips() {
    let p = Polynomial::t_plus_t2();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    let a = tabulate_multiplier(&p, 3, 24, &path).unwrap();
    let b = MultiplierTable::tabulate(&p, 3, 24);
    assert_eq!(a.to_bytes(), b.to_bytes());
    assert_eq!(MultiplierTable::read(&path).unwrap().to_bytes(), a.to_bytes());
    assert!(MultiplierTable::from_bytes(&a.to_bytes()[..10]).is_err());
}

#[test]
fn entries_match_fresh_quadrature() {
    for (p, l) in [(Polynomial::t_plus_t2(), 2), (Polynomial::parse("1:1, 1:3").unwrap(), 5)] {
        let t = MultiplierTable::tabulate(&p, l, 32);
        for a in (-32..=32).step_by(7) {
            for b in (-32..=32).step_by(5) {
                let fresh = multiplier_quadrature(2.0 * PI * a as f64, 2.0 * PI * b as f64, l, &p).value;
                assert!((t.get(a, b) - fresh).norm() <= 1e-12, "{p} l={l} ({a},{b})");
            }
        }
        assert!((t.get(0, 0) - 1.0).norm() < 1e-13);
    }
}
