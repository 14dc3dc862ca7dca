//! Markov-dependent data streams: Ising spin configurations from a Gibbs
//! sampler and image patches drawn i.i.d. or along a random walk.

pub mod ising;
pub mod patches;
pub mod pgm;

pub use ising::{prob_spin_up, spin_patch_minibatch, IsingConfig};
pub use patches::{
    image_patch_minibatch, psnr, reconstruct_grid, ImageGrid, PatchBatch, PatchMode, PatchWalker,
};
