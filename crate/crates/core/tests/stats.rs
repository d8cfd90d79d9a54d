mod common;

use discspace_core::econometrics::{RegressionDataset, RegressionRow, Subsample, DENSITY};
use discspace_core::stats::{kde, summary_stats, GROWTH_RCA, RCA_VALUE};
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn kde_recovers_standard_normal() {
    let mut rng = common::rng(2024);
    let sample: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let curve = kde(&sample, None).unwrap();
    let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let sup = curve
        .grid
        .iter()
        .zip(&curve.values)
        .map(|(x, v)| (v - pdf(*x)).abs())
        .fold(0.0, f64::max);
    assert!(sup < 0.02, "sup-norm {sup}");
    assert!((curve.trapezoid_integral() - 1.0).abs() < 0.01);
}

fn dataset(rows: &[(f64, f64, f64)]) -> RegressionDataset {
    RegressionDataset {
        rows: rows
            .iter()
            .enumerate()
            .map(|(i, &(y, d, r))| RegressionRow {
                y,
                x_density: d,
                x_rca: r,
                period_id: 0,
                unit_id: i,
            })
            .collect(),
        subsample: Subsample::RcaLt1,
        with_interaction: false,
        density_name: DENSITY,
        units: (0..rows.len()).map(|i| (0, i)).collect(),
        periods: Vec::new(),
        countries: vec!["C".into()],
        disciplines: (0..rows.len()).map(|i| format!("D{i}")).collect(),
        n_dropped: 0,
    }
}

fn rows() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-1.0f64..4.0, 0.0f64..1.0, 0.0f64..1.0), 1..40)
}

proptest! {
    #[test]
    fn kde_integrates_to_one(values in prop::collection::vec(-5.0f64..5.0, 2..60)) {
        prop_assume!(values.iter().any(|v| *v != values[0]));
        let c = kde(&values, None).unwrap();
        prop_assert!(c.values.iter().all(|v| *v >= 0.0));
        prop_assert!((c.trapezoid_integral() - 1.0).abs() < 0.01);
    }

    #[test]
    fn pooled_counts_add(a in rows(), b in rows()) {
        let sa = summary_stats(&dataset(&a)).unwrap();
        let sb = summary_stats(&dataset(&b)).unwrap();
        let pooled = summary_stats(&dataset(&[a.clone(), b.clone()].concat())).unwrap();
        for name in [GROWTH_RCA, DENSITY, RCA_VALUE] {
            let (x, y, p) = (sa.get(name).unwrap(), sb.get(name).unwrap(), pooled.get(name).unwrap());
            prop_assert_eq!(p.count, x.count + y.count);
            prop_assert!(p.min <= p.mean && p.mean <= p.max);
            prop_assert_eq!(p.min, x.min.min(y.min));
            prop_assert_eq!(p.max, x.max.max(y.max));
            prop_assert!(p.sd >= 0.0);
        }
    }
}
