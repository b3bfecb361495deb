use entanglement_core::coefficients::{f1, f2};
use entanglement_core::{compute_coefficients, compute_raw_coefficients, GeometryParams};
use proptest::prelude::*;

fn geometry() -> impl Strategy<Value = (f64, f64)> {
    // log-uniform over (1e-3, 1e2)
    (-3.0f64..2.0, -3.0f64..2.0).prop_map(|(a, b)| (10f64.powf(a), 10f64.powf(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn dissipator_block_is_positive((wy, wl) in geometry()) {
        let c = compute_raw_coefficients(wy, wl).unwrap();
        prop_assert!((0.0..=0.5).contains(&c.b1), "b1 = {}", c.b1);
        prop_assert!((0.0..=0.5).contains(&c.b2), "b2 = {}", c.b2);
        prop_assert!(c.dissipator_determinant() >= -1e-12, "det = {}", c.dissipator_determinant());
        prop_assert!(c.is_finite());
    }

    #[test]
    fn cross_terms_match_direct_evaluation((wy, wl) in geometry()) {
        let c = compute_raw_coefficients(wy, wl).unwrap();
        // atom 1 sees its partner at L and the partner's image at 2y + L;
        // atom 2 sees the same two distances, so both reduce to these forms
        let b3 = 0.25 * (f1(wl / 2.0) - f1(wy + wl / 2.0));
        let d = 0.25 * (f2(wl / 2.0).unwrap() - f2(wy + wl / 2.0).unwrap());
        prop_assert_eq!(c.b3, b3);
        prop_assert_eq!(c.d, d);
    }

    #[test]
    fn toggles_only_zero_coherent_terms((wy, wl) in geometry(), aa: bool, ap: bool) {
        let raw = compute_raw_coefficients(wy, wl).unwrap();
        let g = GeometryParams::with_toggles(wy, wl, aa, ap).unwrap();
        let c = compute_coefficients(&g).unwrap();
        prop_assert_eq!((c.b1, c.b2, c.b3), (raw.b1, raw.b2, raw.b3));
        prop_assert_eq!(c.d, if aa { raw.d } else { 0.0 });
        prop_assert_eq!(c.delta, if ap { raw.delta } else { 0.0 });
    }

    #[test]
    fn free_space_limit(log_y in 6.0f64..9.0, wl in 1e-3f64..1e2) {
        let c = compute_raw_coefficients(10f64.powf(log_y), wl).unwrap();
        prop_assert!((c.b1 - 0.25).abs() < 1e-6);
        prop_assert!((c.b2 - 0.25).abs() < 1e-6);
        prop_assert!(c.delta.abs() < 1e-6);
    }
}

#[test]
fn both_toggles_off_is_exactly_zero() {
    let g = GeometryParams::with_toggles(0.7, 2.3, false, false).unwrap();
    let c = compute_coefficients(&g).unwrap();
    assert_eq!(c.d.to_bits(), 0f64.to_bits());
    assert_eq!(c.delta.to_bits(), 0f64.to_bits());
}
