mod common;

use common::{closed_form_skew, minmax, oracle_weights, pca_oracle, random_pool};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use puppet_audit::analysis::{
    chi_squared_test, expected_skew, linear_fit, logistic_fit, logistic_score, minmax_normalize, ols,
    pca_first_component_weights, pool_weights, recency_scale, rep_skews, t_test_independent, CounterfactualModelSpec,
    Metric, Recency, TTestVariant,
};
use puppet_audit::model::Alignment;
use puppet_audit::seed::rng_from;
use rand::Rng;

fn alignment(code: u8) -> Alignment {
    match code % 3 {
        0 => Alignment::DemAligned,
        1 => Alignment::RepAligned,
        _ => Alignment::Neutral,
    }
}

fn pool_case() -> impl Strategy<Value = (Vec<Alignment>, Vec<f64>)> {
    (2usize..40).prop_flat_map(|n| {
        (
            proptest::collection::vec((0u8..3).prop_map(alignment), n),
            proptest::collection::vec(0.0f64..10.0, n),
        )
    })
}

#[test]
fn pool_weights_match_oracle_for_every_model() {
    let recencies = [Recency::None, Recency::Linear, Recency::exponential()];
    for seed in 0..6 {
        let pool = random_pool(seed, 60);
        for metric in Metric::ALL {
            for recency in recencies {
                let spec = CounterfactualModelSpec {
                    verified_weight: 0.8,
                    ..CounterfactualModelSpec::new(metric, recency)
                };
                let got = pool_weights(&pool, &spec, 2).unwrap();
                let want = oracle_weights(&pool, metric, recency, 0.8, 2);
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - w).abs() < 1e-9, "{metric:?} {recency:?}: {g} vs {w}");
                }
            }
        }
    }
}

#[test]
fn t_and_chi_squared_reference_values() {
    // Tabulated 0.975 and 0.995 quantiles of Student's t.
    let q = |t: f64, df: usize| {
        // equal groups of (df + 2) / 2, the first shifted so the statistic is `t`
        let n = (df + 2) / 2;
        let b: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        let m = b.iter().sum::<f64>() / n as f64;
        let sp2 = b.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let shift = t * (sp2 * 2.0 / n as f64).sqrt();
        let a: Vec<f64> = b.iter().map(|x| x + shift).collect();
        t_test_independent(&a, &b, TTestVariant::Pooled).unwrap()
    };
    for (t, df, p) in [(2.228138851986274, 10, 0.05), (4.604094871415897, 4, 0.01), (2.008559112100761, 50, 0.05)] {
        let r = q(t, df);
        assert_eq!(r.df, df as f64);
        assert!((r.t - t).abs() < 1e-10);
        assert!((r.p - p).abs() < 1e-8, "t {t} df {df}: p {}", r.p);
    }
    // chi-squared(1) upper tail at 4 is erfc(sqrt(2))
    let two_by_two = chi_squared_test(&[vec![30.0, 20.0], vec![20.0, 30.0]]).unwrap();
    assert!((two_by_two.statistic - 4.0).abs() < 1e-12);
    assert!((two_by_two.p - 0.04550026389635842).abs() < 1e-8);
    let table = [vec![12.0, 5.0, 9.0], vec![7.0, 15.0, 8.0], vec![6.0, 10.0, 14.0]];
    let r = chi_squared_test(&table).unwrap();
    assert_eq!(r.df, 4.0);
    let want = hand_chi_squared(&table);
    assert!((r.statistic - want).abs() < 1e-10);
}

fn hand_chi_squared(t: &[Vec<f64>]) -> f64 {
    let total: f64 = t.iter().flatten().sum();
    let rows: Vec<f64> = t.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..t[0].len()).map(|j| t.iter().map(|r| r[j]).sum()).collect();
    let mut s = 0.0;
    for (i, r) in t.iter().enumerate() {
        for (j, o) in r.iter().enumerate() {
            let e = rows[i] * cols[j] / total;
            s += (o - e).powi(2) / e;
        }
    }
    s
}

#[test]
fn logistic_without_signal() {
    let mut rng = rng_from(5);
    let n = 4000;
    let x = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { rng.random::<f64>() * 2.0 - 1.0 });
    let y: Vec<f64> = (0..n).map(|_| f64::from(rng.random_bool(0.5))).collect();
    let names = vec!["intercept".to_string(), "x".to_string()];
    let fit = logistic_fit(&x, &names, &y, 0.0).unwrap();
    assert!(fit.converged);
    let t = fit.term("x").unwrap();
    assert!(t.coefficient.abs() < 3.0 * t.std_error, "{t:?}");
    assert!(t.p > 0.001);
    assert!(t.or_ci_low < 1.0 && t.or_ci_high > 1.0);
}

#[test]
fn ols_matches_svd_solve() {
    let mut rng = rng_from(8);
    let x = DMatrix::from_fn(50, 4, |_, j| if j == 0 { 1.0 } else { rng.random::<f64>() });
    let y = DVector::from_fn(50, |_, _| rng.random::<f64>());
    let fit = ols(&x, &y).unwrap();
    let want = x.clone().svd(true, true).solve(&y, 1e-14).unwrap();
    assert!((fit.coefficients - want).amax() < 1e-10);
    assert!((0.0..=1.0).contains(&fit.r_squared));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expected_skew_is_closed_form((a, w) in pool_case(), c in 1e-3f64..1e3) {
        prop_assume!(w.iter().sum::<f64>() > 0.0);
        let s = expected_skew(&a, &w).unwrap();
        prop_assert!((s - closed_form_skew(&a, &w)).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&s));
        let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
        prop_assert!((expected_skew(&a, &scaled).unwrap() - s).abs() < 1e-12);
    }

    #[test]
    fn power_of_two_scaling_leaves_draws_unchanged((a, w) in pool_case(), k in -20i32..20, seed in any::<u64>()) {
        prop_assume!(w.iter().sum::<f64>() > 0.0);
        let c = 2f64.powi(k);
        let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
        let x = rep_skews(&a, &w, 30, 5, &mut rng_from(seed)).unwrap();
        let y = rep_skews(&a, &scaled, 30, 5, &mut rng_from(seed)).unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn pca_weights_sum_to_one_and_ignore_row_order(seed in any::<u64>(), n in 5usize..40, p in 2usize..6) {
        let mut rng = rng_from(seed);
        let m = DMatrix::from_fn(n, p, |_, _| rng.random::<f64>());
        let w = pca_first_component_weights(&m).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut order: Vec<usize> = (0..n).collect();
        order.reverse();
        order.rotate_left(seed as usize % n);
        let permuted = m.select_rows(&order);
        let v = pca_first_component_weights(&permuted).unwrap();
        let oracle = pca_oracle(&m);
        for j in 0..p {
            prop_assert!((w[j] - v[j]).abs() < 1e-8, "{:?} vs {:?}", w, v);
            prop_assert!((w[j] - oracle[j]).abs() < 1e-8, "{:?} vs {:?}", w, oracle);
        }
    }

    #[test]
    fn minmax_maps_into_unit_interval(xs in proptest::collection::vec(-1e6f64..1e6, 1..50)) {
        let got = minmax_normalize(&xs);
        prop_assert_eq!(&got, &minmax(&xs));
        prop_assert!(got.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn recency_never_increases_with_age(w in 0.0f64..5.0, age in 0.0f64..50.0, extra in 0.0f64..10.0, lambda in 0.0f64..2.0) {
        for mode in [Recency::None, Recency::Linear, Recency::Exponential { lambda }] {
            prop_assert!(recency_scale(w, age + extra, mode) <= recency_scale(w, age, mode));
            prop_assert_eq!(recency_scale(w, 0.0, mode), w);
        }
    }

    #[test]
    fn t_test_is_antisymmetric(a in proptest::collection::vec(-10.0f64..10.0, 3..20), b in proptest::collection::vec(-10.0f64..10.0, 3..20)) {
        let x = t_test_independent(&a, &b, TTestVariant::Welch).unwrap();
        let y = t_test_independent(&b, &a, TTestVariant::Welch).unwrap();
        prop_assert!((x.t + y.t).abs() < 1e-12);
        prop_assert!((x.p - y.p).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&x.p));
    }

    #[test]
    fn pooled_t_with_two_df_matches_closed_form(shift in -20.0f64..20.0) {
        // df = 2: two-sided p = 1 - |t| / sqrt(2 + t^2)
        let r = t_test_independent(&[shift, shift + 1.0], &[0.0, 1.0], TTestVariant::Pooled).unwrap();
        let want = 1.0 - r.t.abs() / (2.0 + r.t * r.t).sqrt();
        prop_assert!((r.p - want).abs() < 1e-10, "{} vs {}", r.p, want);
    }

    #[test]
    fn chi_squared_with_two_df_matches_closed_form(cells in proptest::collection::vec(1.0f64..60.0, 6)) {
        // df = 2: p = exp(-x / 2)
        let t = vec![cells[0..3].to_vec(), cells[3..6].to_vec()];
        let r = chi_squared_test(&t).unwrap();
        prop_assert!((r.statistic - hand_chi_squared(&t)).abs() < 1e-9);
        prop_assert!((r.p - (-r.statistic / 2.0).exp()).abs() < 1e-10);
        let transposed: Vec<Vec<f64>> = (0..3).map(|j| vec![t[0][j], t[1][j]]).collect();
        prop_assert!((chi_squared_test(&transposed).unwrap().statistic - r.statistic).abs() < 1e-9);
    }

    #[test]
    fn line_fit_recovers_exact_line(slope in -5.0f64..5.0, intercept in -5.0f64..5.0, n in 3usize..30) {
        let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| intercept + slope * x).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        prop_assert!((f.slope - slope).abs() < 1e-9);
        prop_assert!((f.intercept - intercept).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn logistic_score_vanishes_at_fit(b0 in -1.0f64..1.0, b1 in -2.0f64..2.0, seed in any::<u64>()) {
        let (x, y) = common::logistic_data(&[b0, b1], 800, seed);
        prop_assume!(y.contains(&1.0) && y.contains(&0.0));
        let names = vec!["intercept".to_string(), "x".to_string()];
        let fit = logistic_fit(&x, &names, &y, 0.0).unwrap();
        let score = logistic_score(&x, &y, &fit.coefficients(), 0.0);
        prop_assert!(score.amax() < 1e-8, "score {}", score.amax());
    }
}
