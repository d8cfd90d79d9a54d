use criterion::{criterion_group, criterion_main, Criterion};
use discspace_core::econometrics::{fit_fe, FitOptions};
use discspace_core::fixture::{synthetic_panel, SyntheticSpec};
use discspace_core::pipeline::{analyze_metric, column_dataset, table_column, RunConfig, Table};
use discspace_core::rca::{rca_flag, rca_for_year};
use discspace_core::{proximity_matrix, Metric};

fn large() -> discspace_core::Panel {
    synthetic_panel(SyntheticSpec { n_countries: 120, n_disciplines: 250, ..SyntheticSpec::default() })
}

fn benches(c: &mut Criterion) {
    let panel = large();
    let grid = RunConfig::new("unused.csv", "unused").grid;

    c.bench_function("rca_one_year", |b| b.iter(|| rca_for_year(&panel, 2019, Metric::Documents).unwrap()));

    let flags = rca_flag(&rca_for_year(&panel, 2019, Metric::Documents).unwrap());
    c.bench_function("proximity_matrix", |b| b.iter(|| proximity_matrix(&flags).unwrap()));

    let analysis = analyze_metric(&panel, Metric::Documents, &grid).unwrap();
    let ds = column_dataset(&analysis, &table_column(Table::T4a, 3).unwrap()).unwrap();
    c.bench_function("fit_fe_interaction", |b| b.iter(|| fit_fe(&ds, FitOptions::default()).unwrap()));

    let mut slow = c.benchmark_group("end_to_end");
    slow.sample_size(10);
    slow.bench_function("analyze_metric", |b| b.iter(|| analyze_metric(&panel, Metric::Documents, &grid).unwrap()));
    slow.finish();
}

criterion_group!(pipeline, benches);
criterion_main!(pipeline);
