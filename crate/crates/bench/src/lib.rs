//! Benchmarks for the verification engine live under `benches/`.
