//! Motifs, homomorphisms and the Markov chains that sample them.
//!
//! All three samplers target `π_{F→G}(x) ∝ Π_{i,j} A(x(i), x(j))^{A_F(i,j)}`.
//! Every random choice among nodes is made by inverse CDF over an explicitly
//! built list of candidates, so a seeded generator reproduces a run exactly.

use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};
use crate::motif::network::Network;

/// Template network `F = ([k], A_F)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Motif {
    adjacency: Array2<f64>,
    chain: bool,
}

impl Motif {
    pub fn new(adjacency: Array2<f64>) -> Result<Self> {
        let k = adjacency.nrows();
        if k == 0 || adjacency.ncols() != k {
            return Err(Error::Dimension("motif adjacency must be square and nonempty".into()));
        }
        if adjacency.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter("motif weights must be nonnegative".into()));
        }
        let chain = Array2::from_shape_fn((k, k), |(i, j)| if j == i + 1 { 1.0 } else { 0.0 });
        Ok(Motif {
            chain: adjacency == chain,
            adjacency,
        })
    }

    /// The directed path `1 → 2 → ⋯ → k`.
    pub fn k_chain(k: usize) -> Result<Self> {
        Self::new(Array2::from_shape_fn((k, k), |(i, j)| if j == i + 1 { 1.0 } else { 0.0 }))
    }

    pub fn size(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &Array2<f64> {
        &self.adjacency
    }

    pub fn is_chain(&self) -> bool {
        self.chain
    }
}

/// A vertex map `x: [k] → V`, stored 0-based.
pub type Homomorphism = Vec<usize>;

/// `Π_{i,j} A(x(i), x(j))^{A_F(i,j)}`.
pub fn motif_weight(g: &Network, f: &Motif, x: &[usize]) -> f64 {
    let mut prod = 1.0;
    for ((i, j), &e) in f.adjacency().indexed_iter() {
        if e > 0.0 {
            let a = g.weight(x[i], x[j]);
            if a == 0.0 {
                return 0.0;
            }
            prod *= if e == 1.0 { a } else { a.powf(e) };
        }
    }
    prod
}

/// `A_x(a, b) = A(x(a), x(b))`.
pub fn mesoscale_patch(g: &Network, x: &[usize]) -> Array2<f64> {
    let k = x.len();
    Array2::from_shape_fn((k, k), |(a, b)| g.weight(x[a], x[b]))
}

/// Row sums of `A^j` for `j = 0, …, k−1`, i.e. `A^j 1`, computed by repeated
/// sparse matrix-vector products.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerRowSums {
    levels: Vec<Vec<f64>>,
}

impl PowerRowSums {
    pub fn new(g: &Network, k: usize) -> Self {
        let n = g.node_count();
        let mut levels = vec![vec![1.0; n]];
        for _ in 1..k.max(1) {
            let prev = levels.last().unwrap();
            let next = (0..n)
                .map(|v| g.out_neighbors(v).iter().map(|&(c, w)| w * prev[c]).sum())
                .collect();
            levels.push(next);
        }
        PowerRowSums { levels }
    }

    /// `Σ_c A^j(v, c)` for every `v`.
    pub fn level(&self, j: usize) -> &[f64] {
        &self.levels[j]
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }
}

fn sample_index<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    // rounding left u at the very top
    last
}

/// Proposes `x(i)` i.i.d. uniform over `V` until the motif weight is positive.
pub fn rejection_sample_hom<R: Rng + ?Sized>(
    g: &Network,
    f: &Motif,
    rng: &mut R,
    max_tries: usize,
) -> Result<Homomorphism> {
    let n = g.node_count();
    let mut x = vec![0; f.size()];
    for _ in 0..max_tries {
        for xi in x.iter_mut() {
            *xi = rng.gen_range(0..n);
        }
        if motif_weight(g, f, &x) > 0.0 {
            return Ok(x);
        }
    }
    Err(Error::NoHomomorphism(max_tries))
}

/// Starting state for a chain. A `k`-chain motif is seeded by a random walk
/// from a uniform node, retried on dead ends; other motifs fall back to
/// rejection sampling, whose acceptance rate collapses for long motifs on
/// sparse networks.
pub fn initial_homomorphism<R: Rng + ?Sized>(
    g: &Network,
    f: &Motif,
    rng: &mut R,
    max_tries: usize,
) -> Result<Homomorphism> {
    if !f.is_chain() {
        return rejection_sample_hom(g, f, rng, max_tries);
    }
    let n = g.node_count();
    let k = f.size();
    'outer: for _ in 0..max_tries {
        let mut x = vec![rng.gen_range(0..n); k];
        for i in 1..k {
            let out = g.out_weight(x[i - 1]);
            if out == 0.0 {
                continue 'outer;
            }
            let nbrs = g.out_neighbors(x[i - 1]);
            let w: Vec<f64> = nbrs.iter().map(|&(_, a)| a).collect();
            x[i] = nbrs[sample_index(&w, out, rng)].0;
        }
        return Ok(x);
    }
    Err(Error::NoHomomorphism(max_tries))
}

/// Resamples the image of one uniformly chosen motif node from its exact
/// conditional law given the others.
pub fn glauber_update<R: Rng + ?Sized>(g: &Network, f: &Motif, x: &mut [usize], rng: &mut R) {
    let k = f.size();
    let v = rng.gen_range(0..k);
    let af = f.adjacency();
    let n = g.node_count();

    // Candidates: only nodes adjacent to the image of some motif neighbour
    // can carry positive weight.
    let into_v = (0..k).find(|&u| u != v && af[[u, v]] > 0.0);
    let from_v = (0..k).find(|&u| u != v && af[[v, u]] > 0.0);
    let candidates: Vec<usize> = match (into_v, from_v) {
        (Some(u), _) => g.out_neighbors(x[u]).iter().map(|&(c, _)| c).collect(),
        (None, Some(u)) => g.in_neighbors(x[u]).iter().map(|&(c, _)| c).collect(),
        (None, None) => (0..n).collect(),
    };

    let mut weights = Vec::with_capacity(candidates.len());
    let mut total = 0.0;
    for &w in &candidates {
        let mut p = 1.0;
        for u in 0..k {
            let (a_in, a_out) = (af[[u, v]], af[[v, u]]);
            if u == v {
                if a_in > 0.0 {
                    p *= g.weight(w, w).powf(a_in);
                }
                continue;
            }
            if a_in > 0.0 {
                p *= g.weight(x[u], w).powf(a_in);
            }
            if a_out > 0.0 {
                p *= g.weight(w, x[u]).powf(a_out);
            }
            if p == 0.0 {
                break;
            }
        }
        weights.push(p);
        total += p;
    }
    debug_assert!(total > 0.0, "glauber update from an invalid homomorphism");
    if total > 0.0 {
        x[v] = candidates[sample_index(&weights, total, rng)];
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotMode {
    /// Metropolis–Hastings correction with the `A^{k−1}` row-sum ratio, tail
    /// drawn from the exact conditionals of `π_{F→G}`.
    Exact,
    /// Acceptance `in(x(1)) / out(x(1)) ∧ 1`, tail by plain random walk.
    Approximate,
}

/// One Pivot step for a `k`-chain. Returns whether the move was accepted;
/// on rejection `x` is unchanged. `powers` must have depth at least `k`
/// in exact mode and is ignored otherwise.
pub fn pivot_update<R: Rng + ?Sized>(
    g: &Network,
    x: &mut [usize],
    mode: PivotMode,
    powers: Option<&PowerRowSums>,
    rng: &mut R,
) -> bool {
    let k = x.len();
    let x1 = x[0];
    let out1 = g.out_weight(x1);
    if out1 == 0.0 {
        // dead-end pivot, counted as a rejection
        return false;
    }
    let nbrs = g.out_neighbors(x1);
    let wts: Vec<f64> = nbrs.iter().map(|&(_, w)| w).collect();
    let (cand, a_fwd) = nbrs[sample_index(&wts, out1, rng)];

    let accept = match mode {
        PivotMode::Exact => {
            let rs = powers.expect("exact pivot needs power row sums").level(k - 1);
            let a_back = g.weight(cand, x1);
            let out_c = g.out_weight(cand);
            if a_back == 0.0 || out_c == 0.0 || rs[cand] == 0.0 {
                0.0
            } else {
                ((rs[cand] * a_back * out1) / (rs[x1] * a_fwd * out_c)).min(1.0)
            }
        }
        PivotMode::Approximate => (g.in_weight(x1) / out1).min(1.0),
    };
    if rng.gen::<f64>() >= accept {
        return false;
    }

    let mut next = vec![cand; k];
    for i in 1..k {
        let prev = g.out_neighbors(next[i - 1]);
        let w: Vec<f64> = match mode {
            PivotMode::Exact => {
                let rs = powers.unwrap().level(k - 1 - i);
                prev.iter().map(|&(c, a)| a * rs[c]).collect()
            }
            PivotMode::Approximate => prev.iter().map(|&(_, a)| a).collect(),
        };
        let total: f64 = w.iter().sum();
        if total == 0.0 {
            return false;
        }
        next[i] = prev[sample_index(&w, total, rng)].0;
    }
    x.copy_from_slice(&next);
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    Glauber,
    Pivot(PivotMode),
}

impl std::str::FromStr for ChainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "glauber" => Ok(ChainKind::Glauber),
            "pivot" => Ok(ChainKind::Pivot(PivotMode::Exact)),
            "pivot-approx" | "pivot_approx" => Ok(ChainKind::Pivot(PivotMode::Approximate)),
            _ => Err(Error::InvalidParameter(format!("unknown chain `{s}`"))),
        }
    }
}

impl std::fmt::Display for ChainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChainKind::Glauber => "glauber",
            ChainKind::Pivot(PivotMode::Exact) => "pivot",
            ChainKind::Pivot(PivotMode::Approximate) => "pivot-approx",
        })
    }
}

/// A running chain: current homomorphism plus whatever the kernel caches.
#[derive(Debug, Clone)]
pub struct MotifChain {
    motif: Motif,
    kind: ChainKind,
    x: Homomorphism,
    powers: Option<PowerRowSums>,
    pub accepted: u64,
    pub rejected: u64,
}

impl MotifChain {
    /// Starts from [`initial_homomorphism`].
    pub fn new<R: Rng + ?Sized>(
        g: &Network,
        motif: Motif,
        kind: ChainKind,
        max_tries: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let x = initial_homomorphism(g, &motif, rng, max_tries)?;
        Self::from_state(g, motif, kind, x)
    }

    pub fn from_state(g: &Network, motif: Motif, kind: ChainKind, x: Homomorphism) -> Result<Self> {
        if x.len() != motif.size() || x.iter().any(|&v| v >= g.node_count()) {
            return Err(Error::Dimension("initial map does not fit motif and network".into()));
        }
        if motif_weight(g, &motif, &x) == 0.0 {
            return Err(Error::InvalidParameter("initial map is not a homomorphism".into()));
        }
        let powers = match kind {
            ChainKind::Pivot(mode) => {
                if !motif.is_chain() {
                    return Err(Error::InvalidParameter("the pivot chain needs a k-chain motif".into()));
                }
                (mode == PivotMode::Exact).then(|| PowerRowSums::new(g, motif.size()))
            }
            ChainKind::Glauber => None,
        };
        Ok(MotifChain {
            motif,
            kind,
            x,
            powers,
            accepted: 0,
            rejected: 0,
        })
    }

    pub fn step<R: Rng + ?Sized>(&mut self, g: &Network, rng: &mut R) {
        match self.kind {
            ChainKind::Glauber => {
                glauber_update(g, &self.motif, &mut self.x, rng);
                self.accepted += 1;
            }
            ChainKind::Pivot(mode) => {
                if pivot_update(g, &mut self.x, mode, self.powers.as_ref(), rng) {
                    self.accepted += 1;
                } else {
                    self.rejected += 1;
                }
            }
        }
    }

    pub fn state(&self) -> &[usize] {
        &self.x
    }

    pub fn motif(&self) -> &Motif {
        &self.motif
    }

    pub fn kind(&self) -> ChainKind {
        self.kind
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn single_node_motif_accepts_anything() {
        let g = Network::from_entries(4, [(0, 1, 1.0)]).unwrap();
        let f = Motif::new(array![[0.0]]).unwrap();
        assert!(f.is_chain());
        let x = rejection_sample_hom(&g, &f, &mut rng(0), 1).unwrap();
        assert_eq!(x.len(), 1);
    }

    #[test]
    fn single_edge_forces_the_pair() {
        let g = Network::from_entries(5, [(3, 1, 1.0)]).unwrap();
        let f = Motif::k_chain(2).unwrap();
        let mut r = rng(1);
        for _ in 0..10 {
            assert_eq!(rejection_sample_hom(&g, &f, &mut r, 100_000).unwrap(), vec![3, 1]);
        }
        assert!(matches!(
            rejection_sample_hom(&Network::from_entries(3, []).unwrap(), &f, &mut r, 50),
            Err(Error::NoHomomorphism(50))
        ));
    }

    #[test]
    fn triangle_acceptance_rate() {
        let g = Network::complete(3).unwrap();
        let f = Motif::k_chain(2).unwrap();
        let mut r = rng(2);
        let trials = 90_000;
        let hits = (0..trials)
            .filter(|_| rejection_sample_hom(&g, &f, &mut r, 1).is_ok())
            .count();
        assert!((hits as f64 / trials as f64 - 6.0 / 9.0).abs() < 0.01);
    }

    #[test]
    fn walk_initialization_handles_long_chains() {
        let g = Network::cycle(200).unwrap();
        let f = Motif::k_chain(12).unwrap();
        let x = initial_homomorphism(&g, &f, &mut rng(8), 10).unwrap();
        assert!(motif_weight(&g, &f, &x) > 0.0);
        let dead = Network::from_entries(3, []).unwrap();
        assert!(initial_homomorphism(&dead, &f, &mut rng(8), 10).is_err());
    }

    #[test]
    fn power_row_sums_match_dense_powers() {
        let g = Network::from_entries(4, [(0, 1, 2.0), (1, 2, 0.5), (2, 0, 1.0), (2, 3, 3.0), (3, 3, 1.0)])
            .unwrap();
        let dense = Array2::from_shape_fn((4, 4), |(a, b)| g.weight(a, b));
        let p = PowerRowSums::new(&g, 4);
        let mut m = Array2::<f64>::eye(4);
        for j in 0..4 {
            for v in 0..4 {
                assert!((p.level(j)[v] - m.row(v).sum()).abs() < 1e-12);
            }
            m = m.dot(&dense);
        }
    }

    #[test]
    fn glauber_on_a_star_stays_adjacent_to_the_centre() {
        let g = Network::undirected(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let f = Motif::k_chain(2).unwrap();
        let mut x = vec![1, 0];
        let mut r = rng(3);
        for _ in 0..500 {
            glauber_update(&g, &f, &mut x, &mut r);
            assert!(motif_weight(&g, &f, &x) > 0.0);
        }
    }

    #[test]
    fn pivot_on_regular_graph_always_accepts() {
        let g = Network::cycle(7).unwrap();
        let p = PowerRowSums::new(&g, 4);
        let mut x = vec![0, 1, 2, 3];
        let mut r = rng(4);
        for _ in 0..1000 {
            assert!(pivot_update(&g, &mut x, PivotMode::Exact, Some(&p), &mut r));
            assert!(motif_weight(&g, &Motif::k_chain(4).unwrap(), &x) > 0.0);
        }
    }

    #[test]
    fn pivot_dead_end_is_a_rejection() {
        let g = Network::from_entries(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let mut x = vec![2, 0];
        let before = x.clone();
        for mode in [PivotMode::Exact, PivotMode::Approximate] {
            let p = PowerRowSums::new(&g, 2);
            assert!(!pivot_update(&g, &mut x, mode, Some(&p), &mut rng(5)));
            assert_eq!(x, before);
        }
    }

    #[test]
    fn approximate_pivot_on_symmetric_network_always_accepts() {
        let g = Network::undirected(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]).unwrap();
        let mut x = vec![3, 4, 3];
        let mut r = rng(6);
        for _ in 0..1000 {
            assert!(pivot_update(&g, &mut x, PivotMode::Approximate, None, &mut r));
        }
    }

    #[test]
    fn chain_patches_on_a_cycle_have_the_path_pattern() {
        let g = Network::cycle(6).unwrap();
        let f = Motif::k_chain(3).unwrap();
        let mut r = rng(7);
        let expected = array![[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]];
        for kind in [ChainKind::Glauber, ChainKind::Pivot(PivotMode::Exact)] {
            let mut chain = MotifChain::new(&g, f.clone(), kind, 10_000, &mut r).unwrap();
            for _ in 0..300 {
                chain.step(&g, &mut r);
                assert_eq!(mesoscale_patch(&g, chain.state()), expected);
            }
        }
    }

    #[test]
    fn pivot_rejects_general_motifs() {
        let g = Network::complete(4).unwrap();
        let tri = Motif::new(array![[0.0, 1.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]]).unwrap();
        assert!(!tri.is_chain());
        let res = MotifChain::from_state(&g, tri, ChainKind::Pivot(PivotMode::Exact), vec![0, 1, 2]);
        assert!(res.is_err());
    }

    #[test]
    fn chain_names_round_trip() {
        for kind in [
            ChainKind::Glauber,
            ChainKind::Pivot(PivotMode::Exact),
            ChainKind::Pivot(PivotMode::Approximate),
        ] {
            assert_eq!(kind.to_string().parse::<ChainKind>().unwrap(), kind);
        }
    }
}
