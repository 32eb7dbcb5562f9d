//! Empty library target; the crate exists to host the criterion benchmarks
//! in `benches/`.
