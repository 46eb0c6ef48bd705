use blinking::blinking_model::{
    g0_two_vsystems, g_dark_light, BlinkingModel, Correlator, CouplingOrder, Period, PeriodSpec, VPairModel,
    VPairParams,
};
use blinking::period_markov::TransitionRates;
use blinking::subsystem_optics::{intensity_pair, intensity_single, DipoleCoupling, G2SineConstant, TwoLevelParams};
use proptest::prelude::*;

fn tl(a: f64, omega: f64) -> TwoLevelParams<f64> {
    TwoLevelParams::new(a, omega).unwrap()
}

/// Dark period 0 followed by `n - 1` light periods, all transitions allowed.
fn dark_chain(n: usize, rates: &[f64], intensities: &[f64], omega: f64) -> (PeriodSpec<f64>, TransitionRates<f64>) {
    let rows: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { rates[i * n + j] }).collect()).collect();
    let mut periods = vec![Period::dark()];
    for &i in &intensities[..n - 1] {
        periods.push(Period::new(i, Correlator::TwoLevel(tl(1.0, omega))));
    }
    (PeriodSpec::new(periods).unwrap(), TransitionRates::new(&rows).unwrap())
}

fn chain_inputs(scale: std::ops::Range<f64>) -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>, f64)> {
    (2usize..=4).prop_flat_map(move |n| {
        (
            Just(n),
            proptest::collection::vec(scale.clone(), n * n),
            proptest::collection::vec(0.05f64..2.0, n - 1),
            0.1f64..2.0,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dark_period_raises_plateau((n, r, i, omega) in chain_inputs(1e-4..1e-1)) {
        let rates: Vec<f64> = r.iter().map(|&x| x.max(1e-6)).collect();
        let (spec, tr) = dark_chain(n, &rates, &i, omega);
        let model = BlinkingModel::new(spec, &tr).unwrap();
        prop_assume!(model.steady().get(0) > 1e-9);
        prop_assert!(model.intermediate_plateau() > 1.0);
    }

    #[test]
    fn small_tau_factorizes((n, r, i, omega) in chain_inputs(1e-8..1e-7), tau in 0.0f64..5.0) {
        let (spec, tr) = dark_chain(n, &r, &i, omega);
        let model = BlinkingModel::new(spec, &tr).unwrap();
        let g = model.g(tau).unwrap();
        let s = model.small_tau(tau).unwrap();
        prop_assert!((g - s).abs() < 1e-6 * s.max(1.0), "{g} vs {s}");
    }

    #[test]
    fn normalized_at_long_times((n, r, i, omega) in chain_inputs(1e-3..1.0)) {
        let (spec, tr) = dark_chain(n, &r, &i, omega);
        let model = BlinkingModel::new(spec, &tr).unwrap();
        let t_max = (0..n).map(|k| 1.0 / tr.escape_rate(k)).fold(10.0, f64::max);
        let g = model.g(1e3 * t_max).unwrap();
        prop_assert!((g - 1.0).abs() < 1e-6);
    }

    #[test]
    fn plateau_tracks_composition((n, r, i, omega) in chain_inputs(1e-4..1e-2)) {
        let (spec, tr) = dark_chain(n, &r, &i, omega);
        let model = BlinkingModel::new(spec, &tr).unwrap();
        let g = model.g(20.0).unwrap();
        let p = model.plateau(20.0).unwrap();
        prop_assert!((g - p).abs() < 1e-3 * g);
    }

    #[test]
    fn dark_periods_enhance_oscillations(t1 in 10.0f64..1e4, t0 in 10.0f64..1e4, omega in 0.3f64..2.0) {
        let g1 = Correlator::TwoLevel(tl(1.0, omega));
        let tau = 1.5;
        prop_assume!(g1.eval(tau).unwrap() > 1e-6);
        let lo = g_dark_light(t0, t1, &g1, tau).unwrap();
        let hi = g_dark_light(t0 * 1.5, t1, &g1, tau).unwrap();
        prop_assert!(hi > lo);
    }

    #[test]
    fn uncoupled_double_intensity(a3 in 0.5f64..2.0, omega3 in 0.05f64..5.0) {
        let p = tl(a3, omega3);
        let i2 = intensity_pair(&p, &DipoleCoupling::none());
        prop_assert!((i2 - 2.0 * intensity_single(&p)).abs() <= 4.0 * f64::EPSILON * i2);
    }

    #[test]
    fn uncoupled_g0_is_half(omega2 in 1e-4f64..1e-2, omega3 in 0.05f64..10.0) {
        let p = VPairParams::new(1.0, omega2, omega3, DipoleCoupling::none()).unwrap();
        let g0 = g0_two_vsystems(&p, CouplingOrder::All).unwrap();
        prop_assert!((g0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn vpair_steady_state_ignores_weak_drive(omega3 in 0.1f64..5.0, re in -0.3f64..0.3) {
        let c = DipoleCoupling::direct(re, 0.0);
        let a = VPairModel::new(VPairParams::new(1.0, 1e-3, omega3, c).unwrap(), G2SineConstant::Published).unwrap();
        let b = VPairModel::new(VPairParams::new(1.0, 7e-3, omega3, c).unwrap(), G2SineConstant::Published).unwrap();
        for k in 0..3 {
            prop_assert!((a.steady.get(k) - b.steady.get(k)).abs() < 1e-12);
        }
    }
}
