use std::collections::HashMap;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{read_text, write_file, Error, Result};
use crate::motif::network::{read_edge_list, write_edge_list, Network};
use crate::ndl::denoise::{candidate_scores, corrupt_network, roc_auc, Direction, NoiseMode, Roc};
use crate::ndl::learn::{ndl_learn, NdlParams, NetworkDictionary};
use crate::ndl::reconstruct::{nr_reconstruct, NrParams, ReconstructionState};
use crate::omf::io::{format_matrix, read_matrix_file, write_matrix_file};
use crate::pipeline::{prepare_dir, rng_stream, write_atoms, write_trace, Metadata};

const CHAIN_STREAM: u64 = 0;
const INIT_STREAM: u64 = 1;
const CORRUPT_STREAM: u64 = 2;
const RECON_STREAM: u64 = 3;

#[derive(Debug, Clone)]
pub struct NdlLearnConfig {
    pub edges: PathBuf,
    pub undirected: bool,
    pub params: NdlParams,
    pub seed: u64,
    pub out_dir: PathBuf,
}

fn record_params(meta: &mut Metadata, p: &NdlParams) {
    meta.set("motif_k", p.k)
        .set("iters", p.iterations)
        .set("batch", p.batch)
        .set("atoms", p.atoms)
        .set("lambda", p.lambda)
        .set("kappa1", p.kappa1)
        .set("kappa2", p.kappa2)
        .set("beta", p.beta)
        .set("dict_radius", p.dict_radius)
        .set("mcmc", p.chain);
}

fn learn_and_write(g: &Network, params: &NdlParams, seed: u64, out: &Path) -> Result<NetworkDictionary> {
    let dict = ndl_learn(
        g,
        params,
        &mut rng_stream(seed, CHAIN_STREAM),
        &mut rng_stream(seed, INIT_STREAM),
    )?;
    write_matrix_file(&out.join("dictionary.txt"), dict.w.view())?;
    write_file(&
        out.join("aggregates.txt"),
        format_matrix(dict.p.view()) + &format_matrix(dict.q.view()),
    )?;
    write_trace(&out.join("loss_trace.csv"), &dict.surrogate_trace)?;
    write_atoms(out, dict.w.view(), params.k, &dict.dominance)?;
    Ok(dict)
}

/// Learns a network dictionary from an edge list.
pub fn ndl_learn_run(cfg: &NdlLearnConfig) -> Result<NetworkDictionary> {
    let out = prepare_dir(&cfg.out_dir)?;
    let g = read_edge_list(&cfg.edges, cfg.undirected)?;
    let mut meta = Metadata::new("ndl-learn", cfg.seed);
    meta.set("edges", cfg.edges.display()).set("undirected", cfg.undirected);
    record_params(&mut meta, &cfg.params);
    meta.write(&out)?;
    learn_and_write(&g, &cfg.params, cfg.seed, &out)
}

#[derive(Debug, Clone)]
pub struct ReconstructConfig {
    pub edges: PathBuf,
    pub undirected: bool,
    pub dictionary: PathBuf,
    /// Checked against the dictionary when given.
    pub k: Option<usize>,
    pub nr: NrParams,
    pub seed: u64,
    pub out_dir: PathBuf,
}

fn load_dictionary(path: &Path, k: Option<usize>) -> Result<Array2<f64>> {
    let w = read_matrix_file(path)?;
    let d = w.nrows();
    let side = (d as f64).sqrt().round() as usize;
    if side * side != d {
        return Err(Error::Dimension(format!("dictionary has {d} rows, not k² for any k")));
    }
    if let Some(k) = k {
        if side != k {
            return Err(Error::Dimension(format!(
                "dictionary is for k = {side} but motif size {k} was requested"
            )));
        }
    }
    if w.iter().any(|&v| v < 0.0) {
        return Err(Error::Dimension("network dictionaries must be nonnegative".into()));
    }
    Ok(w)
}

fn record_nr(meta: &mut Metadata, nr: &NrParams) {
    meta.set("nr_iters", nr.iterations)
        .set("nr_lambda", nr.coding.lambda)
        .set("nr_mcmc", nr.chain);
}

/// Reconstructs a network from a dictionary; writes `reconstruction.txt`.
pub fn reconstruct(cfg: &ReconstructConfig) -> Result<ReconstructionState> {
    let out = prepare_dir(&cfg.out_dir)?;
    let g = read_edge_list(&cfg.edges, cfg.undirected)?;
    let w = load_dictionary(&cfg.dictionary, cfg.k)?;
    let mut meta = Metadata::new("reconstruct", cfg.seed);
    meta.set("edges", cfg.edges.display())
        .set("undirected", cfg.undirected)
        .set("dictionary", cfg.dictionary.display());
    record_nr(&mut meta, &cfg.nr);
    meta.write(&out)?;
    let state = nr_reconstruct(&g, w.view(), &cfg.nr, &mut rng_stream(cfg.seed, RECON_STREAM))?;
    write_edge_list(&out.join("reconstruction.txt"), &state.to_network(&g)?)?;
    Ok(state)
}

#[derive(Debug, Clone)]
pub struct DenoiseConfig {
    pub edges: PathBuf,
    pub undirected: bool,
    /// Corrupt the input first; otherwise `labels` must name a `u,v,label`
    /// file for the already corrupted input.
    pub corruption: Option<(NoiseMode, f64)>,
    pub labels: Option<PathBuf>,
    /// Use this dictionary instead of learning one on the corrupted network.
    pub dictionary: Option<PathBuf>,
    pub learn: NdlParams,
    pub nr: NrParams,
    pub threshold: Option<f64>,
    pub direction: Direction,
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct DenoiseSummary {
    pub roc: Roc,
    pub candidates: usize,
    /// Score of each candidate pair, in label order.
    pub scores: Vec<f64>,
    pub labels: Vec<bool>,
}

fn parse_bool(tok: &str) -> Option<bool> {
    match tok {
        "true" | "1" => Some(true),
        "false" | "0" => Some(false),
        _ => None,
    }
}

fn read_labels(path: &Path, g: &Network) -> Result<Vec<((usize, usize), bool)>> {
    let text = read_text(path)?;
    let index: HashMap<&str, usize> = g.labels().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line == "u,v,label") {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = |msg: String| Error::parse(path, i + 1, msg);
        if f.len() != 3 {
            return Err(bad(format!("expected `u,v,label`, got `{line}`")));
        }
        let node = |t: &str| index.get(t).copied().ok_or_else(|| bad(format!("unknown node `{t}`")));
        let (a, b) = (node(f[0])?, node(f[1])?);
        let label = parse_bool(f[2]).ok_or_else(|| bad(format!("bad label `{}`", f[2])))?;
        out.push(((a.min(b), a.max(b)), label));
    }
    Ok(out)
}

fn format_labels(g: &Network, labels: &[((usize, usize), bool)]) -> String {
    let mut out = String::from("u,v,label\n");
    for &((a, b), l) in labels {
        out.push_str(&format!("{},{},{}\n", g.label(a), g.label(b), l));
    }
    out
}

/// Corrupts (or loads a corrupted network), reconstructs it, scores every
/// candidate pair and writes the ROC curve.
pub fn denoise(cfg: &DenoiseConfig) -> Result<DenoiseSummary> {
    let out = prepare_dir(&cfg.out_dir)?;
    let g = read_edge_list(&cfg.edges, cfg.undirected)?;
    let mut meta = Metadata::new("denoise", cfg.seed);
    meta.set("edges", cfg.edges.display()).set("undirected", cfg.undirected);

    let (corrupted, labels) = match (cfg.corruption, &cfg.labels) {
        (Some((mode, fraction)), _) => {
            meta.set("mode", format!("{mode:?}").to_lowercase()).set("fraction", fraction);
            let res = corrupt_network(&g, mode, fraction, &mut rng_stream(cfg.seed, CORRUPT_STREAM))?;
            write_edge_list(&out.join("corrupted.txt"), &res.corrupted)?;
            (res.corrupted, res.labels)
        }
        (None, Some(path)) => {
            meta.set("labels", path.display());
            let labels = read_labels(path, &g)?;
            (g.clone(), labels)
        }
        (None, None) => {
            return Err(Error::InvalidParameter(
                "denoise needs either a corruption mode or a labels file".into(),
            ))
        }
    };
    write_file(&out.join("labels.csv"), format_labels(&corrupted, &labels))?;

    let w = match &cfg.dictionary {
        Some(path) => {
            meta.set("dictionary", path.display());
            load_dictionary(path, Some(cfg.learn.k))?
        }
        None => {
            record_params(&mut meta, &cfg.learn);
            learn_and_write(&corrupted, &cfg.learn, cfg.seed, &out)?.w
        }
    };
    record_nr(&mut meta, &cfg.nr);
    meta.set("direction", format!("{:?}", cfg.direction));
    if let Some(t) = cfg.threshold {
        meta.set("threshold", t);
    }
    meta.write(&out)?;

    let state = nr_reconstruct(&corrupted, w.view(), &cfg.nr, &mut rng_stream(cfg.seed, RECON_STREAM))?;
    write_edge_list(&out.join("reconstruction.txt"), &state.to_network(&corrupted)?)?;

    let pairs: Vec<(usize, usize)> = labels.iter().map(|&(p, _)| p).collect();
    let truth: Vec<bool> = labels.iter().map(|&(_, l)| l).collect();
    let scores = candidate_scores(&state, &pairs);
    let roc = roc_auc(&scores, &truth, cfg.direction)?;
    write_file(&out.join("roc.csv"), roc.to_csv())?;

    if let Some(theta) = cfg.threshold {
        let mut csv = String::from("u,v,predicted\n");
        for (&(a, b), &s) in pairs.iter().zip(&scores) {
            let positive = match cfg.direction {
                Direction::LowerIsPositive => s < theta,
                Direction::HigherIsPositive => s > theta,
            };
            csv.push_str(&format!("{},{},{}\n", corrupted.label(a), corrupted.label(b), positive));
        }
        write_file(&out.join("classification.csv"), csv)?;
    }
    Ok(DenoiseSummary {
        candidates: pairs.len(),
        roc,
        scores,
        labels: truth,
    })
}
