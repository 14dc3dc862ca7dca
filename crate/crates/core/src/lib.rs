//! Online nonnegative matrix factorization for Markovian data.
//!
//! The crate is organized around one engine and the samplers that feed it:
//!
//! - [`omf`]: sparse coding, aggregate statistics and the constrained
//!   dictionary update, driven one data matrix at a time.
//! - [`sources`]: the Ising Gibbs sampler and image-patch samplers (i.i.d.
//!   and random walk), plus patch-averaging reconstruction and PGM I/O.
//! - [`motif`]: weighted networks, motif homomorphisms and the Markov chains
//!   that sample them (rejection, Glauber, Pivot), with a brute-force
//!   distribution oracle.
//! - [`ndl`]: network dictionary learning, network reconstruction,
//!   corruption and denoising with ROC/AUC evaluation.
//! - [`pipeline`]: file-producing end-to-end runs used by the `momf` binary.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod error;
pub mod motif;
pub mod ndl;
pub mod omf;
pub mod pipeline;
pub mod sources;

pub use error::{Error, Result};
