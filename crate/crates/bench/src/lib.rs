//! Benchmarks live under benches/; see `cargo bench -p ela-predict-bench`.
