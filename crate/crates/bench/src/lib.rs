//! Criterion benchmarks for the filter engine, theory and harness; see `benches/`.
