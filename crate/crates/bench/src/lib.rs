//! Criterion benchmarks for schedule construction and search; see `benches/`.
