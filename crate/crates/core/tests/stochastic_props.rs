use blinking::period_markov::{build_generator, occupancy_matrix, steady_probabilities, TransitionRates};
use blinking::stochastic_sim::{
    coincidence_g, default_burn_in, empirical_occupancy, gate_stream, photon_stream_two_level, poisson_stream,
    simulate_ensemble, simulate_periods, PhotonStream, SeedRecord,
};
use blinking::subsystem_optics::{intensity_single, TwoLevelParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn trajectories_reproduce(master in any::<u64>(), index in 0u64..1000) {
        let rates = TransitionRates::three_period(0.3, 0.2, 0.5, 1.0).unwrap();
        let a = simulate_periods(&rates, 500.0, SeedRecord::new(master, index)).unwrap();
        let b = simulate_periods(&rates, 500.0, SeedRecord::new(master, index)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn streams_reproduce(master in any::<u64>(), omega in 0.1f64..3.0) {
        let p = TwoLevelParams::new(1.0, omega).unwrap();
        let a = photon_stream_two_level(&p, 200.0, SeedRecord::new(master, 0)).unwrap();
        let b = photon_stream_two_level(&p, 200.0, SeedRecord::new(master, 0)).unwrap();
        prop_assert_eq!(a.times, b.times);
    }

    #[test]
    fn ensembles_reproduce(master in any::<u64>()) {
        let rates = TransitionRates::two_period(0.1, 0.4).unwrap();
        let a = simulate_ensemble(&rates, 100.0, master, 32).unwrap();
        let b = simulate_ensemble(&rates, 100.0, master, 32).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn segments_cover_duration(master in any::<u64>(), duration in 1.0f64..1e3) {
        let rates = TransitionRates::three_period(0.3, 0.2, 0.5, 1.0).unwrap();
        let t = simulate_periods(&rates, duration, SeedRecord::new(master, 0)).unwrap();
        prop_assert_eq!(t.segments[0].1, 0.0);
        let total: f64 = t.occupation_fractions(3).iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(t.segments.last().unwrap().1 <= duration);
        for w in t.segments.windows(2) {
            prop_assert!(w[0].0 != w[1].0);
            prop_assert!(w[1].1 > w[0].1);
        }
    }
}

#[test]
fn poisson_stream_is_flat() {
    let stream = poisson_stream(1.0, 2e5, SeedRecord::new(11, 0)).unwrap();
    let curve = coincidence_g(&stream, 0.5, 10.0).unwrap();
    let sigma = curve.sigma.as_ref().unwrap();
    for (g, s) in curve.g.iter().zip(sigma) {
        assert!((g - 1.0).abs() < 4.0 * s, "g = {g}, sigma = {s}");
    }
    let inv_var: f64 = sigma.iter().map(|s| 1.0 / (s * s)).sum();
    let mean = curve.g.iter().zip(sigma).map(|(g, s)| g / (s * s)).sum::<f64>() / inv_var;
    assert!((mean - 1.0).abs() < 3.0 / inv_var.sqrt());
}

#[test]
fn two_level_rate_and_antibunching() {
    let p = TwoLevelParams::new(1.0, 1.0).unwrap();
    let stream = photon_stream_two_level(&p, 2e5, SeedRecord::new(12, 0)).unwrap();
    let expected = intensity_single(&p);
    let n = stream.len() as f64;
    // Counts of antibunched light are sub-Poissonian, so √N is conservative.
    assert!((stream.mean_rate() - expected).abs() < 3.0 * n.sqrt() / stream.duration);
    let curve = coincidence_g(&stream, 0.05, 1.0).unwrap();
    assert!(curve.g[0] < 0.1, "g(0) = {}", curve.g[0]);
}

#[test]
fn undriven_atom_emits_nothing() {
    let p = TwoLevelParams::new(1.0, 0.0).unwrap();
    let stream = photon_stream_two_level(&p, 1e3, SeedRecord::new(1, 0)).unwrap();
    assert!(stream.is_empty());
    assert!(coincidence_g(&stream, 0.5, 10.0).is_err());
}

#[test]
fn dwell_means_match_rates() {
    let (t0, t1) = (4.0, 1.5);
    let rates = TransitionRates::two_period(1.0 / t0, 1.0 / t1).unwrap();
    let traj = simulate_periods(&rates, 2e5, SeedRecord::new(13, 0)).unwrap();
    let dwell = traj.dwell_times();
    // The first segment starts at t = 0 rather than at a switch.
    let inner = &dwell[1..];
    for (period, mean) in [(0usize, t0), (1, t1)] {
        let d: Vec<f64> = inner.iter().filter(|s| s.0 == period).map(|s| s.1).collect();
        let m = d.iter().sum::<f64>() / d.len() as f64;
        assert!((m - mean).abs() < 3.0 * mean / (d.len() as f64).sqrt(), "period {period}: {m}");
    }
}

#[test]
fn occupation_fractions_converge() {
    let rates = TransitionRates::three_period(0.3, 0.2, 0.5, 1.0).unwrap();
    let steady = steady_probabilities(&build_generator(&rates)).unwrap();
    let rms = |duration: f64| {
        let trajs = simulate_ensemble(&rates, duration, 14, 40).unwrap();
        let sq: f64 = trajs
            .iter()
            .map(|t| {
                let f = t.occupation_fractions(3);
                (0..3).map(|k| (f[k] - steady.get(k)).powi(2)).sum::<f64>()
            })
            .sum();
        (sq / trajs.len() as f64).sqrt()
    };
    let ratio = rms(1e3) / rms(1.6e4);
    assert!((2.0..8.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn empirical_occupancy_matches_closed_form() {
    let rates = TransitionRates::three_period(0.3, 0.2, 0.5, 1.0).unwrap();
    let gen = build_generator(&rates);
    let burn = default_burn_in(&rates);
    let taus = [0.5, 2.0, 8.0];
    let trajs = simulate_ensemble(&rates, burn + 10.0, 15, 20_000).unwrap();
    let est = empirical_occupancy(&trajs, 3, &taus, burn).unwrap();
    let steady = steady_probabilities(&gen).unwrap();
    for (k, &tau) in taus.iter().enumerate() {
        let p = occupancy_matrix(&gen, tau).unwrap();
        for i in 0..3 {
            let starts = est.starts[i] as f64;
            assert!((starts / 20_000.0 - steady.get(i)).abs() < 4.0 * (steady.get(i) / 20_000.0).sqrt());
            for j in 0..3 {
                let (hat, _) = est.get(k, i, j).unwrap();
                let exact = p.get(i, j);
                let se = (exact * (1.0 - exact) / starts).sqrt().max(1e-12);
                assert!((hat - exact).abs() < 4.0 * se, "P{i}{j}({tau}) = {hat} vs {exact}");
            }
        }
    }
}

#[test]
fn gated_poisson_stream_shows_blinking_plateau() {
    let (t0, t1) = (50.0, 50.0);
    let base = poisson_stream(5.0, 1e6, SeedRecord::new(16, 0)).unwrap();
    let gated = gate_stream(&base, t0, t1, SeedRecord::new(16, 1)).unwrap();
    let curve = coincidence_g(&gated, 0.5, 5.0).unwrap();
    let tc = t0 * t1 / (t0 + t1);
    for (&tau, &g) in curve.tau.iter().zip(&curve.g) {
        let expected = 1.0 + t0 / t1 * (-tau / tc).exp();
        assert!((g - expected).abs() < 0.05 * expected, "g({tau}) = {g} vs {expected}");
    }
}

#[test]
fn stream_rejects_unsorted_times() {
    assert!(PhotonStream::new(vec![2.0, 1.0], 3.0, "test", SeedRecord::new(0, 0)).is_err());
}
