//! Network dictionary learning, reconstruction and denoising.

pub mod denoise;
pub mod learn;
pub mod reconstruct;

pub use denoise::{
    candidate_scores, corrupt_network, denoise_classify, mann_whitney, roc_auc, CorruptionResult,
    Direction, NoiseMode, Roc, RocPoint,
};
pub use learn::{dominance_scores, ndl_learn, NdlParams, NetworkDictionary};
pub use reconstruct::{nr_reconstruct, NrParams, ReconstructionState};
