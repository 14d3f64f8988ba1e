use num_complex::Complex64;
use proptest::prelude::*;
use sfsph_core::estimators::{blue_coefficients, estimator_variance, unbiasedness_vector, WeightedStatistic};
use sfsph_core::intweight::IntWeightedLaw;
use sfsph_core::inversion::{characteristic_function, weighted_pgf};
use sfsph_core::{build_model, state_count, SfsModel};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn generator_rows(n in 2usize..=14) {
        let model = build_model(n).unwrap();
        prop_assert_eq!(model.size(), state_count(n));
        let t = model.sub_intensity();
        let s = model.exit_vector();
        for i in 0..model.size() {
            let row: f64 = t.row(i).sum();
            prop_assert_eq!(row + s[i], 0.0);
            for j in 0..i {
                prop_assert_eq!(t[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn expected_sfs(n in 2usize..=10, theta in 0.01f64..20.0) {
        let sm = SfsModel::new(n, theta).unwrap();
        for (i, m) in sm.expected_sfs().iter().enumerate() {
            let want = theta / (i + 1) as f64;
            prop_assert!(((m - want) / want).abs() < 1e-10);
        }
    }

    #[test]
    fn joint_pgf_is_a_pgf(n in 2usize..=7, theta in 0.05f64..5.0, z in prop::collection::vec(0.0f64..1.0, 6)) {
        let sm = SfsModel::new(n, theta).unwrap();
        let args: Vec<Complex64> = z[..n - 1].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let g = sm.joint_pgf(&args).unwrap();
        prop_assert!(g.im.abs() < 1e-14);
        prop_assert!(g.re >= -1e-14 && g.re <= 1.0 + 1e-14);
        // raising any argument can only raise the PGF
        let mut higher = args.clone();
        higher[0] = Complex64::new((z[0] + 1.0) / 2.0, 0.0);
        prop_assert!(sm.joint_pgf(&higher).unwrap().re >= g.re - 1e-14);
    }

    #[test]
    fn integer_statistics(n in 3usize..=6, theta in 0.1f64..3.0, raw in prop::collection::vec(0i64..=4, 5)) {
        let c = &raw[..n - 1];
        prop_assume!(c.iter().any(|&x| x > 0));
        let sm = SfsModel::new(n, theta).unwrap();
        let law = IntWeightedLaw::new(&sm, c).unwrap();
        let want: f64 = c.iter().enumerate().map(|(j, &x)| x as f64 * theta / (j + 1) as f64).sum();
        prop_assert!((law.mean() - want).abs() < 1e-9 * want.max(1.0));
        let real: Vec<f64> = c.iter().map(|&x| x as f64).collect();
        for z in [0.2, 0.6, 0.95] {
            let g = weighted_pgf(&sm, &real, Complex64::new(z, 0.0)).unwrap();
            prop_assert!((g.re - law.pgf(z).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn characteristic_functions(n in 2usize..=7, theta in 0.1f64..5.0, c in prop::collection::vec(-3.0f64..3.0, 6), t in -20.0f64..20.0) {
        let sm = SfsModel::new(n, theta).unwrap();
        let c = &c[..n - 1];
        let phi = characteristic_function(&sm, c, t).unwrap();
        prop_assert!(phi.norm() <= 1.0 + 1e-12);
        let mirrored = characteristic_function(&sm, c, -t).unwrap();
        prop_assert!((mirrored - phi.conj()).norm() < 1e-12);
        prop_assert!((characteristic_function(&sm, c, 0.0).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn blue_beats_random_unbiased(n in 3usize..=9, theta in 0.05f64..10.0, c in prop::collection::vec(-2.0f64..2.0, 8)) {
        let sm = SfsModel::new(n, theta).unwrap();
        let v = unbiasedness_vector(n);
        let c: Vec<f64> = c[..n - 1].to_vec();
        let cv: f64 = c.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        prop_assume!(cv.abs() > 1e-3);
        let scaled: Vec<f64> = c.iter().map(|x| x / cv).collect();
        let other = estimator_variance(&sm, &WeightedStatistic::new(scaled, "random").unwrap()).unwrap();
        let best = estimator_variance(&sm, &blue_coefficients(&sm).unwrap()).unwrap();
        prop_assert!(best <= other * (1.0 + 1e-10));
    }
}
