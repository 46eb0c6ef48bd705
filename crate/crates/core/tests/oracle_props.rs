use blinking::curve::{make_grid, GridSpacing};
use blinking::lindblad_oracle::{build_model, correlation_numeric, steady_state, ModelKind};
use blinking::subsystem_optics::{g1_correlation, g2_zero, DipoleCoupling, TwoLevelParams};
use blinking::Error;
use proptest::prelude::*;

fn pair(omega: f64, re: f64, im: f64) -> ModelKind {
    ModelKind::AtomPair {
        params: TwoLevelParams::new(1.0, omega).unwrap(),
        coupling: DipoleCoupling::direct(re, im),
        phase: 0.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zero_delay_matches_all_orders(omega in 0.1f64..3.0, re in -0.5f64..0.5, im in -0.5f64..0.5) {
        let kind = pair(omega, re, im);
        let numeric = correlation_numeric(&build_model(&kind).unwrap(), &[0.0]).unwrap();
        let p = TwoLevelParams::new(1.0, omega).unwrap();
        let exact = g2_zero(&p, &DipoleCoupling::direct(re, im)).unwrap();
        prop_assert!((numeric.curve.g[0] - exact).abs() < 1e-6, "{} vs {exact}", numeric.curve.g[0]);
    }

    #[test]
    fn propagation_is_physical(omega in 0.1f64..3.0, re in -0.5f64..0.5, im in -0.5f64..0.5) {
        let taus = make_grid(1e-2, 50.0, 60, GridSpacing::Log).unwrap();
        let numeric = correlation_numeric(&build_model(&pair(omega, re, im)).unwrap(), &taus).unwrap();
        prop_assert!(numeric.diagnostics.max_trace_error < 1e-9);
        prop_assert!(numeric.diagnostics.min_eigenvalue > -1e-7);
    }

    #[test]
    fn uncoupled_pair_factorizes(omega in 0.1f64..3.0) {
        let taus = make_grid(0.0, 20.0, 41, GridSpacing::Linear).unwrap();
        let numeric = correlation_numeric(&build_model(&pair(omega, 0.0, 0.0)).unwrap(), &taus).unwrap();
        let p = TwoLevelParams::new(1.0, omega).unwrap();
        for (&t, &g) in taus.iter().zip(&numeric.curve.g) {
            let expected = (1.0 + g1_correlation(&p, t).unwrap()) / 2.0;
            prop_assert!((g - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn two_level_correlator(a in 0.2f64..3.0, omega in 0.05f64..3.0) {
        let p = TwoLevelParams::new(a, omega).unwrap();
        let taus = make_grid(0.0, 30.0 / a, 31, GridSpacing::Linear).unwrap();
        let numeric = correlation_numeric(&build_model(&ModelKind::TwoLevel(p)).unwrap(), &taus).unwrap();
        for (&t, &g) in taus.iter().zip(&numeric.curve.g) {
            prop_assert!((g - g1_correlation(&p, t).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn steady_state_is_a_density_matrix(omega in 0.1f64..3.0, re in -0.9f64..0.9, im in -1.0f64..1.0) {
        let ss = steady_state(&build_model(&pair(omega, re, im)).unwrap()).unwrap();
        prop_assert!((ss.state.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(ss.state.trace().im.abs() < 1e-10);
        prop_assert!(ss.state.min_eigenvalue() > -1e-9);
    }
}

#[test]
fn collective_decay_beyond_single_rate_is_rejected() {
    for re in [1.01, -1.5] {
        match build_model(&pair(0.5, re, 0.0)) {
            Err(Error::UnphysicalCoupling(_)) => {}
            other => panic!("expected unphysical coupling, got {other:?}"),
        }
    }
}
