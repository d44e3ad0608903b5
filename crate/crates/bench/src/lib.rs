//! Benchmarks for `dgt-core`; see `benches/`.
