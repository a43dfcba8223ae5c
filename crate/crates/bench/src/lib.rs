//! Criterion benchmarks for the `instanton-core` kernels live in `benches/`.
