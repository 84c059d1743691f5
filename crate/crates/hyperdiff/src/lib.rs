//! Nonlinear hypergraph diffusion embeddings for semi-supervised node
//! classification.
//!
//! The crate embeds the nodes of a weighted hypergraph by running a
//! degree-normalized, nonlinearly mixed label/feature spreading process to
//! its fixed point, then classifies nodes with a softmax model trained on
//! the embedding rows of the labeled nodes.
//!
//! Pipeline overview:
//!
//! 1. [`hypergraph`] — incidence structure, degrees, clique expansion.
//! 2. [`operators`] — hyperedge mixing, the diffusion map, its normalizer,
//!    and the hyperedge-variance regularizer.
//! 3. [`diffusion`] — normalized fixed-point iteration, a linear spreading
//!    baseline, and a demonstration of why unnormalized iteration fails.
//! 4. [`classifier`] — multinomial softmax trained by full-batch gradient
//!    descent.
//! 5. [`pipeline`] — input assembly, balanced splits, grid search with a
//!    content-addressed diffusion cache, and evaluation protocols.
//! 6. [`dataset`] — manifest-driven loading, text formats, and the binary
//!    embedding format.

pub mod classifier;
pub mod dataset;
pub mod diffusion;
pub mod error;
pub mod hypergraph;
pub mod matrix;
pub mod operators;
pub mod pipeline;

pub use error::{Error, Result};
pub use matrix::EmbeddingMatrix;
