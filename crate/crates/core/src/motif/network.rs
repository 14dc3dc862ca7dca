//! Sparse weighted directed networks and edge-list files.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{read_text, write_file, Error, Result};

/// `G = (V, A)` with `V = {0, …, n−1}` and a nonnegative sparse weight
/// matrix. Out- and in-neighbour lists are sorted by node index.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    labels: Vec<String>,
    out: Vec<Vec<(usize, f64)>>,
    inn: Vec<Vec<(usize, f64)>>,
    out_weight: Vec<f64>,
    in_weight: Vec<f64>,
}

impl Network {
    /// Builds a network from directed weighted entries. Zero weights are
    /// dropped; for repeated pairs the last weight wins.
    pub fn from_entries<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        Self::with_labels((0..n).map(|i| i.to_string()).collect(), entries)
    }

    pub fn with_labels<I>(labels: Vec<String>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidParameter("network has no nodes".into()));
        }
        let mut map: HashMap<(usize, usize), f64> = HashMap::new();
        for (a, b, w) in entries {
            if a >= n || b >= n {
                return Err(Error::InvalidParameter(format!("edge ({a}, {b}) outside {n} nodes")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("edge ({a}, {b}) has weight {w}")));
            }
            map.insert((a, b), w);
        }
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        for (&(a, b), &w) in &map {
            if w > 0.0 {
                out[a].push((b, w));
                inn[b].push((a, w));
            }
        }
        for list in out.iter_mut().chain(inn.iter_mut()) {
            list.sort_by_key(|&(v, _)| v);
        }
        let total = |lists: &[Vec<(usize, f64)>]| -> Vec<f64> {
            lists.iter().map(|l| l.iter().map(|&(_, w)| w).sum()).collect()
        };
        Ok(Network {
            out_weight: total(&out),
            in_weight: total(&inn),
            labels,
            out,
            inn,
        })
    }

    /// Simple graph from undirected pairs, each inserted in both directions
    /// with weight 1.
    pub fn undirected(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if let Some(&(a, _)) = pairs.iter().find(|(a, b)| a == b) {
            return Err(Error::InvalidParameter(format!("self-loop at node {a}")));
        }
        Self::from_entries(n, pairs.iter().flat_map(|&(a, b)| [(a, b, 1.0), (b, a, 1.0)]))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter("a cycle needs at least 3 nodes".into()));
        }
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::undirected(n, &pairs)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Self::undirected(n, &pairs)
    }

    /// Watts–Strogatz small world: a ring where each node links to its
    /// `degree / 2` nearest neighbours on each side, then every ring edge has
    /// its far end rewired with probability `p` to a uniformly chosen node
    /// that is not already adjacent.
    pub fn small_world<R: Rng + ?Sized>(n: usize, degree: usize, p: f64, rng: &mut R) -> Result<Self> {
        let half = degree / 2;
        if half == 0 || 2 * half >= n {
            return Err(Error::InvalidParameter(format!("ring degree {degree} for {n} nodes")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("rewiring probability {p}")));
        }
        let mut adj = vec![std::collections::BTreeSet::new(); n];
        for a in 0..n {
            for s in 1..=half {
                let b = (a + s) % n;
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        for s in 1..=half {
            for a in 0..n {
                let b = (a + s) % n;
                if !adj[a].contains(&b) || rng.gen::<f64>() >= p {
                    continue;
                }
                if adj[a].len() >= n - 1 {
                    continue;
                }
                let c = loop {
                    let c = rng.gen_range(0..n);
                    if c != a && !adj[a].contains(&c) {
                        break c;
                    }
                };
                adj[a].remove(&b);
                adj[b].remove(&a);
                adj[a].insert(c);
                adj[c].insert(a);
            }
        }
        let pairs: Vec<_> = adj
            .iter()
            .enumerate()
            .flat_map(|(a, s)| s.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect();
        Self::undirected(n, &pairs)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    /// Number of stored directed entries with positive weight.
    pub fn entry_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn weight(&self, a: usize, b: usize) -> f64 {
        let list = &self.out[a];
        match list.binary_search_by_key(&b, |&(v, _)| v) {
            Ok(i) => list[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn out_neighbors(&self, a: usize) -> &[(usize, f64)] {
        &self.out[a]
    }

    pub fn in_neighbors(&self, a: usize) -> &[(usize, f64)] {
        &self.inn[a]
    }

    /// `Σ_c A(a, c)`.
    pub fn out_weight(&self, a: usize) -> f64 {
        self.out_weight[a]
    }

    /// `Σ_c A(c, a)`.
    pub fn in_weight(&self, a: usize) -> f64 {
        self.in_weight[a]
    }

    /// Directed entries `(a, b, A(a, b))` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(a, l)| l.iter().map(move |&(b, w)| (a, b, w)))
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries().all(|(a, b, w)| self.weight(b, a) == w)
    }

    pub fn is_bidirectional(&self) -> bool {
        self.entries().all(|(a, b, _)| self.weight(b, a) > 0.0)
    }

    /// Symmetric, binary, no self-loops.
    pub fn is_simple(&self) -> bool {
        self.is_symmetric() && self.entries().all(|(a, b, w)| a != b && w == 1.0)
    }

    /// Pairs `a < b` with `A(a, b) > 0`, in row-major order.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        self.entries().filter(|&(a, b, _)| a < b).map(|(a, b, _)| (a, b)).collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(u, _) in self.out[v].iter().chain(self.inn[v].iter()) {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == n
    }
}

/// Parses `u v [w]` lines. Labels are arbitrary tokens, numbered in order of
/// first appearance; `#` starts a comment line; a missing weight is 1.
pub fn parse_edge_list(path: &Path, text: &str, undirected: bool) -> Result<Network> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut entries = Vec::new();
    let mut intern = |tok: &str| -> usize {
        *index.entry(tok.to_string()).or_insert_with(|| {
            labels.push(tok.to_string());
            labels.len() - 1
        })
    };
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 2 || toks.len() > 3 {
            return Err(Error::parse(path, i + 1, format!("expected `u v [w]`, got `{line}`")));
        }
        let w = match toks.get(2) {
            Some(t) => t
                .parse::<f64>()
                .ok()
                .filter(|w| *w >= 0.0 && w.is_finite())
                .ok_or_else(|| Error::parse(path, i + 1, format!("bad weight `{t}`")))?,
            None => 1.0,
        };
        let (a, b) = (intern(toks[0]), intern(toks[1]));
        entries.push((a, b, w));
        if undirected {
            entries.push((b, a, w));
        }
    }
    if labels.is_empty() {
        return Err(Error::parse(path, 0, "edge list has no edges"));
    }
    Network::with_labels(labels, entries)
}

pub fn read_edge_list(path: &Path, undirected: bool) -> Result<Network> {
    let text = read_text(path)?;
    parse_edge_list(path, &text, undirected)
}

/// `%g`-style formatting with six significant digits.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.5e}")
    }
}

/// One `u v w` line per directed entry, weights to six significant digits.
pub fn format_edge_list(net: &Network) -> String {
    let mut out = String::new();
    for (a, b, w) in net.entries() {
        let _ = writeln!(out, "{} {} {}", net.label(a), net.label(b), format_sig6(w));
    }
    out
}

pub fn write_edge_list(path: &Path, net: &Network) -> Result<()> {
    write_file(path, format_edge_list(net))?;
    Ok(())
}
