//! Network dictionary learning on a 10-cycle with 3-chain motifs.
//!
//! Every patch of the cycle is the same path pattern, so a single atom
//! carries the whole network and reconstruction recovers it exactly.
//!
//!     cargo run --release --example cycle_dictionary

use markov_omf::motif::{ChainKind, Network, PivotMode};
use markov_omf::ndl::{ndl_learn, nr_reconstruct, NdlParams, NrParams};
use markov_omf::pipeline::rng_stream;

fn main() -> markov_omf::Result<()> {
    let g = Network::cycle(10)?;
    let params = NdlParams {
        k: 3,
        iterations: 50,
        batch: 20,
        atoms: 4,
        ..NdlParams::default()
    };
    let dict = ndl_learn(&g, &params, &mut rng_stream(7, 0), &mut rng_stream(7, 1))?;

    let top = (0..params.atoms)
        .max_by(|&a, &b| dict.dominance[a].total_cmp(&dict.dominance[b]))
        .unwrap();
    println!("most dominant atom ({:.3}):", dict.dominance[top]);
    let atom = dict.w.column(top);
    let peak = atom.iter().cloned().fold(0.0, f64::max);
    for a in 0..3 {
        let row: Vec<String> = (0..3).map(|b| format!("{:.2}", atom[a * 3 + b] / peak)).collect();
        println!("  [{}]", row.join(", "));
    }

    let nr = NrParams {
        iterations: 2000,
        chain: ChainKind::Pivot(PivotMode::Exact),
        coding: params.coding(),
        max_tries: params.max_tries,
    };
    let state = nr_reconstruct(&g, dict.w.view(), &nr, &mut rng_stream(7, 3))?;
    let worst = state
        .entries()
        .iter()
        .map(|&(a, b, v, _)| (v - g.weight(a, b)).abs())
        .fold(0.0, f64::max);
    println!("{} visited pairs, largest reconstruction error {worst:.4}", state.visited_pairs());
    Ok(())
}
