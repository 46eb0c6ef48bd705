use blinking::subsystem_optics::{
    dipole_coupling, g1_correlation, g2_pair_correlation, g2_pair_correlation_with, g2_zero, intensity_pair,
    intensity_single, DipoleCoupling, G2SineConstant, TwoLevelParams,
};
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_2;

fn params() -> impl Strategy<Value = TwoLevelParams<f64>> {
    (0.1f64..5.0, 0.01f64..5.0).prop_map(|(a, omega)| TwoLevelParams::new(a, omega).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn g1_bounded(p in params(), tau in 0.0f64..200.0) {
        let g = g1_correlation(&p, tau).unwrap();
        prop_assert!((0.0..=2.0).contains(&g), "g1({tau}) = {g}");
    }

    #[test]
    fn g1_vanishes_at_zero(p in params()) {
        prop_assert_eq!(g1_correlation(&p, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn g1_continuous_at_threshold(a in 0.1f64..5.0, tau in 0.0f64..30.0) {
        let lo = TwoLevelParams::new(a, (a * a * (1.0 - 1e-6) / 16.0).sqrt()).unwrap();
        let hi = TwoLevelParams::new(a, (a * a * (1.0 + 1e-6) / 16.0).sqrt()).unwrap();
        let d = g1_correlation(&lo, tau).unwrap() - g1_correlation(&hi, tau).unwrap();
        prop_assert!(d.abs() < 1e-5);
    }

    #[test]
    fn uncoupled_pair_identity(p in params(), tau in 0.0f64..100.0) {
        let g2 = g2_pair_correlation(&p, &DipoleCoupling::none(), tau).unwrap();
        let g1 = g1_correlation(&p, tau).unwrap();
        prop_assert!((g2 - (1.0 + g1) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn uncoupled_pair_doubles_intensity(p in params()) {
        let i1 = intensity_single(&p);
        let i2 = intensity_pair(&p, &DipoleCoupling::none());
        prop_assert!((i2 - 2.0 * i1).abs() <= 1e-15 * i2);
    }

    #[test]
    fn first_order_zero_value_is_consistent(p in params(), re in -0.3f64..0.3) {
        prop_assume!(re.abs() > 1e-3);
        let diff = |c: f64| {
            let k = DipoleCoupling::direct(c * p.a, 0.0);
            g2_zero(&p, &k).unwrap() - g2_pair_correlation(&p, &k, 0.0).unwrap()
        };
        let full = diff(re).abs();
        let half = diff(re / 2.0).abs();
        // Exact agreement is possible when the second-order term vanishes.
        prop_assume!(full > 1e-12);
        let ratio = full / half;
        prop_assert!((3.0..5.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn sine_constants_agree_at_zero_coupling(p in params(), tau in 0.0f64..50.0) {
        let none = DipoleCoupling::none();
        let a = g2_pair_correlation_with(&p, &none, tau, G2SineConstant::Published).unwrap();
        let b = g2_pair_correlation_with(&p, &none, tau, G2SineConstant::Corrected).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn coupling_magnitude_bounded(kr in 1e-2f64..1e4, theta in 0.0f64..std::f64::consts::PI) {
        let c = dipole_coupling(kr, theta, 1.0).unwrap().c.norm();
        prop_assert!(c <= 1.5 * (1.0 / kr + 2.0 / (kr * kr) + 2.0 / kr.powi(3)) * (1.0 + 1e-12));
    }
}

#[test]
fn perpendicular_geometry_factors() {
    // At ϑ = π/2 both angular factors equal one, so C is the bare radial sum.
    for &kr in &[0.5f64, 2.0, 17.0] {
        let c = dipole_coupling(kr, FRAC_PI_2, 1.0).unwrap().c;
        let i = num_complex::Complex64::i();
        let radial = 1.5 * (i * kr).exp() * (1.0 / (i * kr) + 1.0 / (kr * kr) - 1.0 / (i * kr.powi(3)));
        assert!((c - radial).norm() < 1e-14);
    }
}

#[test]
fn coupling_rejects_nonpositive_separation() {
    assert!(dipole_coupling(0.0, 0.0, 1.0).is_err());
    assert!(dipole_coupling(-1.0, 0.0, 1.0).is_err());
}

#[test]
fn saturation_limits() {
    let p = TwoLevelParams::new(1.0f64, 1e4).unwrap();
    assert!((intensity_single(&p) - 0.5).abs() < 1e-8);
    let k = DipoleCoupling::direct(0.3f64, 0.0);
    assert!((g2_zero(&p, &k).unwrap() - (1.0 + 0.09) / 2.0).abs() < 1e-6);
}
