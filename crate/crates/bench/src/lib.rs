//! Criterion benchmarks for `spikenorm`; see `benches/`.
