//! Criterion benchmarks for the thresholding solvers; see `benches/`.
