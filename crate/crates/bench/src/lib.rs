//! Criterion benchmarks for the `hybridspin` kernels; see `benches/`.
