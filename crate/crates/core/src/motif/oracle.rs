//! Exact `π_{F→G}` by enumeration, empirical chain histograms and total
//! variation distance.

use crate::error::{Error, Result};
use crate::motif::chains::{motif_weight, Motif};
use crate::motif::network::Network;

/// Largest `n^k` the brute-force oracle will enumerate.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Index of `x` in base `n`, `x(1)` most significant.
pub fn map_index(x: &[usize], n: usize) -> usize {
    x.iter().fold(0, |acc, &v| acc * n + v)
}

pub fn index_map(mut idx: usize, n: usize, k: usize) -> Vec<usize> {
    let mut x = vec![0; k];
    for slot in x.iter_mut().rev() {
        *slot = idx % n;
        idx /= n;
    }
    x
}

/// Probability of every vertex map in `V^[k]`, indexed by [`map_index`].
pub fn hom_distribution_bruteforce(g: &Network, f: &Motif) -> Result<Vec<f64>> {
    let n = g.node_count();
    let k = f.size();
    let total = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if total > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge(total, ENUMERATION_LIMIT));
    }
    let mut probs: Vec<f64> = (0..total as usize)
        .map(|i| motif_weight(g, f, &index_map(i, n, k)))
        .collect();
    let z: f64 = probs.iter().sum();
    if z == 0.0 {
        return Err(Error::NoHomomorphism(total as usize));
    }
    probs.iter_mut().for_each(|p| *p /= z);
    Ok(probs)
}

/// `½ Σ |p − q|`, for two tables over the same index set.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension(format!("tables of length {} and {}", p.len(), q.len())));
    }
    for t in [p, q] {
        let s: f64 = t.iter().sum();
        if (s - 1.0).abs() > 1e-9 || t.iter().any(|&v| v < 0.0) {
            return Err(Error::NotNormalized(s));
        }
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Visit counts over a finite state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn new(states: usize) -> Self {
        Histogram {
            counts: vec![0; states],
            total: 0,
        }
    }

    pub fn record(&mut self, state: usize) {
        self.counts[state] += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let t = self.total.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }
}
