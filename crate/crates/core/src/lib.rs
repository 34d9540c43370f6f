//! Finite-depth realization of the conditionally free product of pairs of
//! pointed Hilbert spaces.
//!
//! The crate builds truncated tensor-word bases for the two product spaces,
//! embeds operator pairs into them, evaluates vector states and mixed moments,
//! and checks the resulting families against the free, Boolean, monotone,
//! orthogonal and conditionally free factorization rules. A formal-series and
//! a resolvent-based route compute the conditionally free R-transform so that
//! its additivity can be verified two independent ways.

pub mod analytic;
pub mod embeddings;
pub mod error;
pub mod freecopies;
pub mod independence;
pub mod numkernel;
pub mod random;
pub mod report;
pub mod series;
pub mod spaces;
pub mod states;
pub mod suites;

pub use error::{Error, Result};
pub use num_complex::Complex64;
