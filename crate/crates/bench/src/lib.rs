//! Benchmark-only crate; the measurements live in `benches/benches.rs`.
//! Run them with `cargo bench -p coreset-consensus-bench`.
