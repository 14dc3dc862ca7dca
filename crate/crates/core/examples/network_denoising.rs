//! Removes half of the edges of a small-world network (keeping it
//! connected), reconstructs it from a dictionary learned on the damaged
//! network and scores every candidate pair. Prints the AUC of the
//! resulting ROC curve and writes the full run to `out/denoise/`.
//!
//!     cargo run --release --example network_denoising

use std::path::PathBuf;

use markov_omf::motif::{write_edge_list, ChainKind, Network, PivotMode};
use markov_omf::ndl::{Direction, NdlParams, NoiseMode, NrParams};
use markov_omf::pipeline::{denoise, rng_stream, DenoiseConfig};

fn main() -> markov_omf::Result<()> {
    std::fs::create_dir_all("out").map_err(markov_omf::Error::Io)?;
    let edges = PathBuf::from("out/small_world.txt");
    let g = Network::small_world(200, 6, 0.1, &mut rng_stream(0, 9))?;
    write_edge_list(&edges, &g)?;

    let learn = NdlParams {
        k: 10,
        iterations: 100,
        batch: 100,
        atoms: 25,
        ..NdlParams::default()
    };
    let cfg = DenoiseConfig {
        edges,
        undirected: false,
        corruption: Some((NoiseMode::Subtractive, 0.5)),
        labels: None,
        dictionary: None,
        learn,
        nr: NrParams {
            iterations: 50_000,
            chain: ChainKind::Pivot(PivotMode::Exact),
            coding: learn.coding(),
            max_tries: learn.max_tries,
        },
        threshold: Some(0.5),
        direction: Direction::LowerIsPositive,
        seed: 0,
        out_dir: PathBuf::from("out/denoise"),
    };
    let s = denoise(&cfg)?;
    println!("{} candidate pairs, AUC {:.4}", s.candidates, s.roc.auc);
    Ok(())
}
