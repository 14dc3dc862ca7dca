//! Network reconstruction: code each sampled patch against a fixed network
//! dictionary and average the local reconstructions over every visit.

use std::collections::HashMap;

use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::motif::chains::{ChainKind, Motif, MotifChain};
use crate::motif::network::Network;
use crate::ndl::learn::patch_minibatch;
use crate::omf::sparse_code::{CodingParams, SparseCoder};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NrParams {
    pub iterations: usize,
    pub chain: ChainKind,
    pub coding: CodingParams,
    pub max_tries: usize,
}

/// Running means of all local reconstructions proposed at each node pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReconstructionState {
    cells: HashMap<(usize, usize), (f64, u64)>,
}

impl ReconstructionState {
    pub fn new() -> Self {
        Self::default()
    }

    /// `value ← (1 − 1/j) value + (1/j) proposal` with `j` the new count.
    pub fn record(&mut self, a: usize, b: usize, proposal: f64) {
        let cell = self.cells.entry((a, b)).or_insert((0.0, 0));
        cell.1 += 1;
        let j = cell.1 as f64;
        cell.0 = (1.0 - 1.0 / j) * cell.0 + proposal / j;
    }

    pub fn value(&self, a: usize, b: usize) -> Option<f64> {
        self.cells.get(&(a, b)).map(|c| c.0)
    }

    pub fn count(&self, a: usize, b: usize) -> u64 {
        self.cells.get(&(a, b)).map_or(0, |c| c.1)
    }

    /// Count-weighted mean over both directions of an unordered pair;
    /// 0 when neither direction was visited.
    pub fn pair_score(&self, a: usize, b: usize) -> f64 {
        let (mut sum, mut n) = (0.0, 0u64);
        let dirs: &[(usize, usize)] = if a == b { &[(a, b)] } else { &[(a, b), (b, a)] };
        for key in dirs {
            if let Some(&(v, c)) = self.cells.get(key) {
                sum += v * c as f64;
                n += c;
            }
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    /// `(a, b, mean, count)` sorted by pair.
    pub fn entries(&self) -> Vec<(usize, usize, f64, u64)> {
        let mut v: Vec<_> = self.cells.iter().map(|(&(a, b), &(m, c))| (a, b, m, c)).collect();
        v.sort_by_key(|e| (e.0, e.1));
        v
    }

    pub fn visited_pairs(&self) -> usize {
        self.cells.len()
    }

    /// The reconstructed weighted network on the labels of `g`.
    pub fn to_network(&self, g: &Network) -> Result<Network> {
        Network::with_labels(
            g.labels().to_vec(),
            self.entries().into_iter().map(|(a, b, m, _)| (a, b, m.max(0.0))),
        )
    }
}

/// Runs the chain for `T` steps on `g`; each step codes the current patch
/// against `w` and folds `vec⁻¹(W h)` into the running means at the pairs
/// `(x(a), x(b))`.
pub fn nr_reconstruct<R: Rng + ?Sized>(
    g: &Network,
    w: ArrayView2<f64>,
    params: &NrParams,
    rng: &mut R,
) -> Result<ReconstructionState> {
    let d = w.nrows();
    let k = (d as f64).sqrt().round() as usize;
    if k * k != d || k == 0 {
        return Err(Error::Dimension(format!("dictionary has {d} rows, not a square k²")));
    }
    let coder = SparseCoder::new(w, params.coding)?;
    let mut chain = MotifChain::new(g, Motif::k_chain(k)?, params.chain, params.max_tries, rng)?;
    let mut state = ReconstructionState::new();
    for _ in 0..params.iterations {
        let x = patch_minibatch(g, &mut chain, 1, rng);
        let h = coder.code(x.view())?.h;
        let local: Array2<f64> = w.dot(&h);
        let nodes = chain.state();
        for a in 0..k {
            for b in 0..k {
                state.record(nodes[a], nodes[b], local[[a * k + b, 0]]);
            }
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motif::chains::PivotMode;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_visit_stores_the_proposal() {
        let mut s = ReconstructionState::new();
        s.record(2, 5, 0.37);
        assert_eq!(s.value(2, 5), Some(0.37));
        assert_eq!(s.count(2, 5), 1);
        assert_eq!(s.pair_score(5, 2), 0.37);
        assert_eq!(s.pair_score(0, 1), 0.0);
    }

    proptest! {
        #[test]
        fn running_mean_is_the_arithmetic_mean(vals in proptest::collection::vec(-10.0f64..10.0, 1..200)) {
            let mut s = ReconstructionState::new();
            for &v in &vals {
                s.record(0, 1, v);
            }
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            prop_assert!((s.value(0, 1).unwrap() - mean).abs() < 1e-10);
            prop_assert_eq!(s.count(0, 1), vals.len() as u64);
        }
    }

    #[test]
    fn exact_atom_recovers_a_cycle() {
        let g = Network::cycle(10).unwrap();
        let atom = Array2::from_shape_vec((9, 1), vec![0., 1., 0., 1., 0., 1., 0., 1., 0.]).unwrap();
        let params = NrParams {
            iterations: 2000,
            chain: ChainKind::Pivot(PivotMode::Exact),
            coding: CodingParams {
                lambda: 0.0,
                kappa2: 0.0,
                tol: 1e-12,
                max_iter: 10_000,
            },
            max_tries: 100_000,
        };
        let state = nr_reconstruct(&g, atom.view(), &params, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        for (a, b, m, _) in state.entries() {
            assert!((m - g.weight(a, b)).abs() < 0.05, "({a},{b}) = {m}");
        }
        assert!(state.visited_pairs() >= 20);
    }

    #[test]
    fn dictionary_shape_must_be_square() {
        let g = Network::cycle(5).unwrap();
        let w = Array2::from_elem((8, 1), 1.0);
        let params = NrParams {
            iterations: 1,
            chain: ChainKind::Glauber,
            coding: CodingParams::default(),
            max_tries: 100,
        };
        assert!(nr_reconstruct(&g, w.view(), &params, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
