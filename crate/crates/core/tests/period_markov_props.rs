use blinking::dense::SquareMatrix;
use blinking::period_markov::{
    build_generator, occupancy_matrix, steady_probabilities, three_period_occupancy, TransitionRates,
};
use proptest::prelude::*;

fn rate() -> impl Strategy<Value = f64> {
    (-3.0f64..1.0).prop_map(|e| 10f64.powf(e))
}

/// Irreducible rate sets of 2 to 4 periods: every off-diagonal rate positive.
fn dense_rates() -> impl Strategy<Value = TransitionRates<f64>> {
    (2usize..=4).prop_flat_map(|n| {
        proptest::collection::vec(rate(), n * n).prop_map(move |v| {
            let rows: Vec<Vec<f64>> =
                (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { v[i * n + j] }).collect()).collect();
            TransitionRates::new(&rows).unwrap()
        })
    })
}

/// Brute-force `exp(Bτ)` from a many-term Taylor series after heavy scaling.
fn series_exp(b: &SquareMatrix<f64>, tau: f64) -> SquareMatrix<f64> {
    let n = b.dim();
    let squarings = 20;
    let x = b.scale(tau / f64::from(1u32 << squarings));
    let mut sum = SquareMatrix::identity(n);
    let mut term = SquareMatrix::identity(n);
    for k in 1..30 {
        term = (&term * &x).scale(1.0 / k as f64);
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rows_are_probability_vectors(rates in dense_rates(), tau in 0.0f64..50.0) {
        let gen = build_generator(&rates);
        let p = occupancy_matrix(&gen, tau).unwrap();
        for row in p.p.rows() {
            let s: f64 = row.iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-10);
            for &v in row {
                prop_assert!((-1e-10..=1.0 + 1e-10).contains(&v));
            }
        }
    }

    #[test]
    fn semigroup(rates in dense_rates(), t1 in 0.0f64..5.0, t2 in 0.0f64..5.0) {
        let gen = build_generator(&rates);
        let a = occupancy_matrix(&gen, t1).unwrap().p;
        let b = occupancy_matrix(&gen, t2).unwrap().p;
        let ab = occupancy_matrix(&gen, t1 + t2).unwrap().p;
        let prod = &a * &b;
        prop_assert!((&prod - &ab).max_abs() < 1e-9);
    }

    #[test]
    fn matches_series_exponential(rates in dense_rates(), tau in 0.0f64..10.0) {
        let gen = build_generator(&rates);
        let p = occupancy_matrix(&gen, tau).unwrap().p;
        let reference = series_exp(gen.matrix(), tau);
        prop_assert!((&p - &reference).max_abs() < 1e-9);
    }

    #[test]
    fn single_zero_eigenvalue(rates in dense_rates()) {
        let gen = build_generator(&rates);
        let mut mu = gen.eigenvalues();
        mu.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());
        prop_assert!(mu[0].norm() < 1e-10);
        for m in &mu[1..] {
            prop_assert!(m.re < 0.0);
        }
    }

    #[test]
    fn steady_is_long_time_row(rates in dense_rates()) {
        let gen = build_generator(&rates);
        let steady = steady_probabilities(&gen).unwrap();
        let t_max = (0..rates.n()).map(|i| 1.0 / rates.escape_rate(i)).fold(0.0, f64::max);
        let p = occupancy_matrix(&gen, 100.0 * t_max).unwrap();
        for i in 0..rates.n() {
            for j in 0..rates.n() {
                prop_assert!((p.get(i, j) - steady.get(j)).abs() < 1e-8);
            }
        }
        let s: f64 = steady.p.iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn steady_is_stationary(rates in dense_rates(), tau in 0.0f64..20.0) {
        let gen = build_generator(&rates);
        let steady = steady_probabilities(&gen).unwrap();
        let p = occupancy_matrix(&gen, tau).unwrap();
        let n = rates.n();
        for j in 0..n {
            let v: f64 = (0..n).map(|i| steady.get(i) * p.get(i, j)).sum();
            prop_assert!((v - steady.get(j)).abs() < 1e-10);
        }
    }

    #[test]
    fn three_period_closed_form(
        p01 in rate(), p10 in rate(), p12 in rate(), p21 in rate(), tau in 0.0f64..100.0,
    ) {
        let rates = TransitionRates::three_period(p01, p10, p12, p21).unwrap();
        let p = occupancy_matrix(&build_generator(&rates), tau).unwrap();
        let c = three_period_occupancy(p01, p10, p12, p21, tau).unwrap();
        prop_assert!((c.p11 - p.get(1, 1)).abs() < 1e-9);
        prop_assert!((c.p12 - p.get(1, 2)).abs() < 1e-9);
        prop_assert!((c.p21 - p.get(2, 1)).abs() < 1e-9);
        prop_assert!((c.p22 - p.get(2, 2)).abs() < 1e-9);
    }
}

#[test]
fn identity_at_zero() {
    let rates = TransitionRates::three_period(0.1, 0.2, 0.3, 0.4).unwrap();
    let p = occupancy_matrix(&build_generator(&rates), 0.0).unwrap();
    assert!((&p.p - &SquareMatrix::identity(3)).max_abs() < 1e-15);
}

#[test]
fn reducible_chain_has_no_unique_steady_state() {
    let rates = TransitionRates::new(&[
        vec![0.0, 1.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
        vec![0.0, 0.0, 1.0, 0.0],
    ])
    .unwrap();
    assert!(steady_probabilities(&build_generator(&rates)).is_err());
}

#[test]
fn single_precision_rows_sum_to_one() {
    let rates = TransitionRates::three_period(0.5f32, 0.25, 1.0, 2.0).unwrap();
    let p = occupancy_matrix(&build_generator(&rates), 3.0f32).unwrap();
    for row in p.p.rows() {
        let s: f32 = row.iter().sum();
        assert!((s - 1.0).abs() < 1e-5);
    }
}
