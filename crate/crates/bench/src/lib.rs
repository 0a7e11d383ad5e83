//! Criterion benchmarks for the wavelocate pipeline live in `benches/`.
