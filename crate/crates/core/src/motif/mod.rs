//! Weighted networks and Markov chain Monte Carlo sampling of motif
//! homomorphisms.

pub mod chains;
pub mod network;
pub mod oracle;

pub use chains::{
    glauber_update, initial_homomorphism, mesoscale_patch, motif_weight, pivot_update, rejection_sample_hom, ChainKind,
    Homomorphism, Motif, MotifChain, PivotMode, PowerRowSums,
};
pub use network::{format_edge_list, parse_edge_list, read_edge_list, write_edge_list, Network};
pub use oracle::{hom_distribution_bruteforce, map_index, tv_distance, Histogram};
