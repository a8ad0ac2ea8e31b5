//! Criterion benchmarks for the mgc kernels; see `benches/kernels.rs`.
