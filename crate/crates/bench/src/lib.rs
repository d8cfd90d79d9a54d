//! Criterion benchmarks for the discipline-space pipeline; see `benches/`.
