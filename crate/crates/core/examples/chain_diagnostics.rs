//! Compares Glauber and Pivot chain histograms for 3-chain homomorphisms
//! into a small weighted network against the exact law.
//!
//!     cargo run --release --example chain_diagnostics

use markov_omf::motif::{
    hom_distribution_bruteforce, map_index, tv_distance, ChainKind, Histogram, Motif, MotifChain, Network,
    PivotMode,
};
use markov_omf::pipeline::rng_stream;

fn main() -> markov_omf::Result<()> {
    // a weighted 5-node network with both directions of every edge
    let pairs = [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (3, 4, 1.5), (4, 0, 1.0), (1, 3, 3.0)];
    let g = Network::from_entries(5, pairs.iter().flat_map(|&(a, b, w)| [(a, b, w), (b, a, w)]))?;
    let motif = Motif::k_chain(3)?;
    let exact = hom_distribution_bruteforce(&g, &motif)?;

    for (i, kind) in [
        ChainKind::Glauber,
        ChainKind::Pivot(PivotMode::Exact),
        ChainKind::Pivot(PivotMode::Approximate),
    ]
    .into_iter()
    .enumerate()
    {
        let mut rng = rng_stream(5, i as u64);
        let mut chain = MotifChain::new(&g, motif.clone(), kind, 1000, &mut rng)?;
        let mut hist = Histogram::new(exact.len());
        for _ in 0..200_000 {
            chain.step(&g, &mut rng);
            hist.record(map_index(chain.state(), g.node_count()));
        }
        let tv = tv_distance(&hist.frequencies(), &exact)?;
        println!("{:<13} TV to exact law {tv:.4}  (accepted {}, rejected {})", kind.to_string(), chain.accepted, chain.rejected);
    }
    Ok(())
}
