//! Criterion benchmarks for the verification engine live in `benches/engine.rs`.
//!
//! Run them with `cargo bench -p exactgeom-bench`.
