//! Property checks over randomly drawn inputs.

use num_complex::Complex64;
use proptest::prelude::*;

use salem_patterns::experiment::ExperimentConfig;
use salem_patterns::fourier::{decompose, FourierSeries};
use salem_patterns::grid::GridDensity;
use salem_patterns::measures::MeasureConditions;
use salem_patterns::trilinear::trilinear_physical;
use salem_patterns::Polynomial;

fn series(values: &[(f64, f64)]) -> FourierSeries {
    let k = values.len() as i64 - 1;
    FourierSeries::from_fn(k as usize, |n| {
        let (re, im) = values[n.unsigned_abs() as usize];
        let c = Complex64::new(if n == 0 { 1.0 } else { re }, if n == 0 { 0.0 } else { im });
        if n < 0 {
            c.conj()
        } else {
            c
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_adds_back_exactly(
        values in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..80),
        alpha in 0.3f64..0.8,
    ) {
        let s = series(&values);
        let cond = MeasureConditions::new(alpha, 0.5, 2.0, 1.0, 1.0).unwrap();
        let d = decompose(&s, &cond, 1.0).unwrap();
        for (k, c) in s.iter() {
            prop_assert_eq!(d.mu1.get(k) + d.mu2.get(k), c);
        }
        prop_assert_eq!(d.mu2.get(0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn trilinear_form_is_additive_and_nonnegative(
        a in prop::collection::vec(0.0f64..2.0, 256),
        b in prop::collection::vec(0.0f64..2.0, 256),
        l in 0i32..4,
    ) {
        let p = Polynomial::t_plus_t2();
        let f = GridDensity::new(8, a).unwrap();
        let g = GridDensity::new(8, b).unwrap();
        let sum = GridDensity::new(8, f.values().iter().zip(g.values()).map(|(x, y)| x + y).collect()).unwrap();
        let u = GridDensity::uniform(8).unwrap();
        let lhs = trilinear_physical(&sum, &u, &u, l, &p).unwrap();
        let rhs = trilinear_physical(&f, &u, &u, l, &p).unwrap() + trilinear_physical(&g, &u, &u, l, &p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        prop_assert!(trilinear_physical(&f, &g, &f, l, &p).unwrap() >= 0.0);
    }

    #[test]
    fn config_round_trips(
        depth in 1u32..9,
        seed in 0u64..1000,
        alpha in 0.51f64..0.99,
        level in 10u32..16,
        k in 1u32..5,
    ) {
        let text = format!(
            "depth = {depth}\nseed = {seed}\nalpha = {alpha}\ngrid_level = {level}\ncutoff = {}\n",
            1 << (level - k - 2)
        );
        let c = ExperimentConfig::parse(&text).unwrap();
        let canonical = c.to_config_string();
        let back = ExperimentConfig::parse(&canonical).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_config_string(), canonical);
    }

    #[test]
    fn series_bytes_round_trip(values in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40)) {
        let s = series(&values);
        prop_assert_eq!(FourierSeries::from_bytes(&s.to_bytes()).unwrap(), s);
    }
}
