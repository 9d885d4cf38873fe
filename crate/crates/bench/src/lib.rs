//! Criterion benchmarks for the `prevalence` estimators; see `benches/`.
