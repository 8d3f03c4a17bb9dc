//! Criterion benchmarks for the `tropdeg` algorithms; see `benches/`.
