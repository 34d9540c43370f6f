//! Criterion benchmarks for the hot kernels of `cfree-core`: basis
//! enumeration, Λ embedding, closed-form word vectors, resolvent evaluation
//! and series inversion. Run with `cargo bench -p cfree-bench`.
