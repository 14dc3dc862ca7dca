//! Network corruption, threshold classification of candidate pairs and ROC
//! evaluation.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::motif::network::Network;
use crate::ndl::reconstruct::ReconstructionState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// Delete true edges; the candidates are the non-edges of the result.
    Subtractive,
    /// Insert false edges; the candidates are the edges of the result.
    Additive,
}

impl std::str::FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subtractive" => Ok(NoiseMode::Subtractive),
            "additive" => Ok(NoiseMode::Additive),
            _ => Err(Error::InvalidParameter(format!("unknown noise mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorruptionResult {
    pub corrupted: Network,
    /// Candidate pairs `a < b`, sorted, with `true` for genuine pairs
    /// (original non-edges, or original edges) and `false` for the ones the
    /// corruption created (removed edges, or added edges).
    pub labels: Vec<((usize, usize), bool)>,
}

/// Whether `a` and `b` stay connected in `adj` once the edge `{a, b}` is gone.
fn connected_without(adj: &[BTreeSet<usize>], a: usize, b: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![a];
    seen[a] = true;
    while let Some(v) = stack.pop() {
        for &u in &adj[v] {
            if v == a && u == b {
                continue;
            }
            if u == b {
                return true;
            }
            if !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    false
}

/// Removes or adds `⌈fraction·|E|⌉` edges of the simple graph `g`.
///
/// Subtractive noise visits the edges in random order and removes each one
/// that is not a bridge of the current graph, so the result stays connected.
/// Additive noise picks uniformly among the non-adjacent pairs.
pub fn corrupt_network<R: Rng + ?Sized>(
    g: &Network,
    mode: NoiseMode,
    fraction: f64,
    rng: &mut R,
) -> Result<CorruptionResult> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!("noise fraction {fraction} not in (0, 1)")));
    }
    if !g.is_simple() {
        return Err(Error::InvalidParameter("corruption needs a simple graph".into()));
    }
    let n = g.node_count();
    let edges = g.undirected_edges();
    let quota = (fraction * edges.len() as f64).ceil() as usize;
    let mut adj = vec![BTreeSet::new(); n];
    for &(a, b) in &edges {
        adj[a].insert(b);
        adj[b].insert(a);
    }

    let changed: BTreeSet<(usize, usize)> = match mode {
        NoiseMode::Subtractive => {
            if !g.is_connected() {
                return Err(Error::CorruptionInfeasible("input graph is not connected".into()));
            }
            let mut order = edges.clone();
            order.shuffle(rng);
            let mut removed = BTreeSet::new();
            for (a, b) in order {
                if removed.len() == quota {
                    break;
                }
                if connected_without(&adj, a, b) {
                    adj[a].remove(&b);
                    adj[b].remove(&a);
                    removed.insert((a, b));
                }
            }
            if removed.len() < quota {
                return Err(Error::CorruptionInfeasible(format!(
                    "only {} of {quota} edges can be removed without disconnecting the graph",
                    removed.len()
                )));
            }
            removed
        }
        NoiseMode::Additive => {
            let mut free: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .filter(|&(a, b)| !adj[a].contains(&b))
                .collect();
            if free.len() < quota {
                return Err(Error::CorruptionInfeasible(format!(
                    "{quota} edges requested but only {} non-adjacent pairs exist",
                    free.len()
                )));
            }
            free.shuffle(rng);
            let added: BTreeSet<_> = free.into_iter().take(quota).collect();
            for &(a, b) in &added {
                adj[a].insert(b);
                adj[b].insert(a);
            }
            added
        }
    };

    let pairs: Vec<(usize, usize)> = adj
        .iter()
        .enumerate()
        .flat_map(|(a, s)| s.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
        .collect();
    let corrupted = Network::with_labels(
        g.labels().to_vec(),
        pairs.iter().flat_map(|&(a, b)| [(a, b, 1.0), (b, a, 1.0)]),
    )?;
    let labels = match mode {
        NoiseMode::Subtractive => (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| !adj[a].contains(&b))
            .map(|p| (p, !changed.contains(&p)))
            .collect(),
        NoiseMode::Additive => pairs.iter().map(|&p| (p, !changed.contains(&p))).collect(),
    };
    Ok(CorruptionResult { corrupted, labels })
}

/// Reconstruction weight of every candidate pair (0 if never visited).
pub fn candidate_scores(state: &ReconstructionState, pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs.iter().map(|&(a, b)| state.pair_score(a, b)).collect()
}

/// `true` (predicted genuine) iff the reconstruction weight is strictly below `theta`.
pub fn denoise_classify(
    state: &ReconstructionState,
    pairs: &[(usize, usize)],
    theta: f64,
) -> Vec<((usize, usize), bool)> {
    pairs
        .iter()
        .map(|&(a, b)| ((a, b), state.pair_score(a, b) < theta))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Predict positive iff `score < θ`.
    LowerIsPositive,
    /// Predict positive iff `score > θ`.
    HigherIsPositive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Roc {
    /// From `(0, 0)` to `(1, 1)`, one point per distinct score plus the end.
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl Roc {
    /// CSV `threshold,fpr,tpr` with a trailing `auc,<value>` line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,fpr,tpr\n");
        for p in &self.points {
            out.push_str(&format!("{:?},{:?},{:?}\n", p.threshold, p.fpr, p.tpr));
        }
        out.push_str(&format!("auc,{:?}\n", self.auc));
        out
    }
}

fn class_counts(labels: &[bool]) -> Result<(usize, usize)> {
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok((pos, neg))
}

/// Threshold sweep over every distinct score, AUC by the trapezoid rule.
pub fn roc_auc(scores: &[f64], labels: &[bool], direction: Direction) -> Result<Roc> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension("scores and labels differ in length".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("scores"));
    }
    let (pos, neg) = class_counts(labels)?;
    let sign = match direction {
        Direction::LowerIsPositive => 1.0,
        Direction::HigherIsPositive => -1.0,
    };
    // ascending in the key, so the prediction set grows one tie-group at a time
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| (sign * scores[i]).total_cmp(&(sign * scores[j])));

    let end = sign * f64::INFINITY;
    let mut points = vec![RocPoint {
        threshold: scores[order[0]],
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let threshold = order.get(i).map_or(end, |&j| scores[j]);
        let (fpr, tpr) = (fp as f64 / neg as f64, tp as f64 / pos as f64);
        let prev = points.last().unwrap();
        auc += (fpr - prev.fpr) * (tpr + prev.tpr) / 2.0;
        points.push(RocPoint { threshold, fpr, tpr });
    }
    Ok(Roc { points, auc })
}

/// `P(positive ranks ahead of negative) + ½ P(tie)` over all
/// positive/negative pairs.
pub fn mann_whitney(scores: &[f64], labels: &[bool], direction: Direction) -> Result<f64> {
    let (pos, neg) = class_counts(labels)?;
    let mut wins = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            let (p, q) = (scores[i], scores[j]);
            let ahead = match direction {
                Direction::LowerIsPositive => p < q,
                Direction::HigherIsPositive => p > q,
            };
            if ahead {
                wins += 1.0;
            } else if p == q {
                wins += 0.5;
            }
        }
    }
    Ok(wins / (pos * neg) as f64)
}
