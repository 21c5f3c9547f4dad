//! Person re-identification re-ranking.
//!
//! Gallery embeddings are rebuilt from their nearest cross-camera neighbors
//! ([`fusion`]), and three similarity measures (single-view cosine, cosine to
//! the fused feature, and camera equality) are combined with weights learned
//! by least squares on sampled training triplets ([`amc`]). [`pipeline`]
//! ranks galleries with the combined score and reports CMC and mAP under the
//! cross-view matching rule.
//!
//! Batch operations fan out over rayon when the default `parallel` feature
//! is on; each has a `*_with` variant taking an explicit [`Parallelism`].

pub mod amc;
pub mod cli;
pub mod error;
pub mod exec;
pub mod fusion;
pub mod pipeline;
pub mod rng;
pub mod simkit;
pub mod store;
pub mod synth;

pub use error::{Error, Result};
pub use exec::Parallelism;
