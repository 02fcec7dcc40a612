//! Criterion benchmarks for `perpetuity-core`; see `benches/sampler.rs`.
//!
//! Run with `cargo bench -p perpetuity-bench`.
