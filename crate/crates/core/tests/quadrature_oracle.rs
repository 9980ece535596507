mod common;

use std::f64::consts::PI;

use fracpow::quadrature::{gauss_custom, gauss_jacobi, WeightKind};
use proptest::prelude::*;

const DELTA: f64 = 4.75020542941;

#[test]
fn legendre_small_rules() {
    let r = gauss_jacobi(1, 0.0, 0.0).unwrap();
    assert!(r.nodes()[0].abs() < 1e-15);
    assert!((r.weights()[0] - 2.0).abs() < 1e-14);
    let r = gauss_jacobi(2, 0.0, 0.0).unwrap();
    let x = 1.0 / 3f64.sqrt();
    assert!((r.nodes()[0] + x).abs() < 1e-14 && (r.nodes()[1] - x).abs() < 1e-14);
    assert!(r.weights().iter().all(|w| (w - 1.0).abs() < 1e-14));
}

#[test]
fn chebyshev_closed_form() {
    let r = gauss_jacobi(5, -0.5, -0.5).unwrap();
    let mut expect: Vec<f64> = (1..=5).map(|m| ((2 * m - 1) as f64 * PI / 10.0).cos()).collect();
    expect.sort_by(f64::total_cmp);
    for (x, e) in r.nodes().iter().zip(&expect) {
        assert!((x - e).abs() < 1e-14);
    }
    assert!(r.weights().iter().all(|w| (w - PI / 5.0).abs() < 1e-13));
}

#[test]
fn chebyshev_eight_points_against_oracle() {
    let r = gauss_jacobi(8, -0.5, -0.5).unwrap();
    let d = common::exactness_defect(r.nodes(), r.weights(), &common::jacobi_weight(-0.5, -0.5));
    assert!(d < 1e-10, "defect {d}");
}

#[test]
fn oracle_reproduces_known_masses() {
    let m = common::moments(&common::jacobi_weight(-0.5, -0.5), 1);
    assert!((m[0] - PI).abs() < 1e-13, "{}", m[0] - PI);
    // mass of (1−η)^(−β)(1+η)^(β−1) is π/sin(πβ)
    let m = common::moments(&common::jacobi_weight(-0.75, -0.25), 1);
    assert!((m[0] - PI / (0.75 * PI).sin()).abs() < 1e-12);
}

#[test]
fn resolvent_rule_without_shift_is_jacobi() {
    let a = gauss_custom(5, 0.0, 0.5, DELTA).unwrap();
    let b = gauss_jacobi(5, -0.5, -0.5).unwrap();
    for i in 0..5 {
        assert!((a.nodes()[i] - b.nodes()[i]).abs() < 1e-9);
        assert!((a.weights()[i] - b.weights()[i]).abs() < 1e-9);
    }
    assert!(matches!(a.weight_kind(), WeightKind::Resolvent { .. }));
}

#[test]
fn resolvent_rule_mass_matches_oracle() {
    let r = gauss_custom(10, 200.0, 0.5, DELTA).unwrap();
    let m = common::moments(&common::resolvent_weight(200.0, 0.5, DELTA), 1)[0];
    assert!((r.total_mass() / m - 1.0).abs() < 1e-8);
}

#[test]
fn resolvent_rule_structure() {
    let r = gauss_custom(3, 400.0, 0.25, 1.0).unwrap();
    assert!(r.weights().iter().all(|&w| w > 0.0));
    assert!(r.nodes().iter().all(|&x| x > -1.0 && x < 1.0));
    assert!(r.nodes().windows(2).all(|p| p[0] < p[1]));
}

#[test]
fn domain_errors() {
    assert!(gauss_jacobi(0, 0.0, 0.0).is_err());
    assert!(gauss_jacobi(3, -1.0, 0.0).is_err());
    assert!(gauss_jacobi(3, 0.0, -1.5).is_err());
    assert!(gauss_custom(0, 1.0, 0.5, 1.0).is_err());
    assert!(gauss_custom(3, -1.0, 0.5, 1.0).is_err());
    assert!(gauss_custom(3, 1.0, 1.0, 1.0).is_err());
    assert!(gauss_custom(3, 1.0, 0.5, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jacobi_rules_are_exact(m in 1usize..=12, a in -0.95f64..2.0, b in -0.95f64..2.0) {
        let r = gauss_jacobi(m, a, b).unwrap();
        prop_assert_eq!(r.len(), m);
        prop_assert!(r.weights().iter().all(|&w| w > 0.0));
        prop_assert!(r.nodes().windows(2).all(|p| p[0] < p[1]));
        prop_assert!(r.nodes().iter().all(|&x| x > -1.0 && x < 1.0));
        let d = common::exactness_defect(r.nodes(), r.weights(), &common::jacobi_weight(a, b));
        prop_assert!(d < 1e-9, "defect {}", d);
    }

    #[test]
    fn resolvent_rules_are_exact(m in 1usize..=10, nu in 0.0f64..1000.0, alpha in 0.1f64..0.9, mu in 0.5f64..60.0) {
        let r = gauss_custom(m, nu, alpha, mu).unwrap();
        prop_assert!(r.weights().iter().all(|&w| w > 0.0));
        prop_assert!(r.nodes().windows(2).all(|p| p[0] < p[1]));
        let d = common::exactness_defect(r.nodes(), r.weights(), &common::resolvent_weight(nu, alpha, mu));
        prop_assert!(d < 1e-9, "defect {}", d);
    }
}
