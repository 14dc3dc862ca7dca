use std::path::PathBuf;
use std::thread;

use crate::error::{write_file, Error, Result};
use crate::motif::chains::{ChainKind, Motif, MotifChain};
use crate::motif::network::{read_edge_list, Network};
use crate::motif::oracle::{hom_distribution_bruteforce, index_map, map_index, tv_distance, Histogram};
use crate::pipeline::{prepare_dir, rng_stream, Metadata};

#[derive(Debug, Clone)]
pub struct HomDiagConfig {
    pub edges: PathBuf,
    pub undirected: bool,
    pub k: usize,
    pub chain: ChainKind,
    pub steps: usize,
    /// Independent chains, each on its own derived stream and in its own thread.
    pub chains: usize,
    pub log_every: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct HomDiagSummary {
    /// Final total variation distance of each chain to the exact law.
    pub final_tv: Vec<f64>,
    /// Distance of the histogram pooled over all chains.
    pub pooled_tv: f64,
}

struct ChainRun {
    histogram: Histogram,
    trace: Vec<(usize, f64)>,
}

fn run_chain(g: &Network, cfg: &HomDiagConfig, oracle: &[f64], index: u64) -> Result<ChainRun> {
    let mut rng = rng_stream(cfg.seed, 16 + index);
    let mut chain = MotifChain::new(g, Motif::k_chain(cfg.k)?, cfg.chain, 10_000_000, &mut rng)?;
    let n = g.node_count();
    let mut histogram = Histogram::new(oracle.len());
    let mut trace = Vec::new();
    for step in 1..=cfg.steps {
        chain.step(g, &mut rng);
        histogram.record(map_index(chain.state(), n));
        if step % cfg.log_every == 0 || step == cfg.steps {
            trace.push((step, tv_distance(&histogram.frequencies(), oracle)?));
        }
    }
    Ok(ChainRun { histogram, trace })
}

/// Runs the configured chains and compares their empirical homomorphism
/// frequencies against the brute-force law.
pub fn hom_diagnostics(cfg: &HomDiagConfig) -> Result<HomDiagSummary> {
    if cfg.steps == 0 || cfg.chains == 0 || cfg.log_every == 0 {
        return Err(Error::InvalidParameter("steps, chains and log interval must be positive".into()));
    }
    let g = read_edge_list(&cfg.edges, cfg.undirected)?;
    let oracle = hom_distribution_bruteforce(&g, &Motif::k_chain(cfg.k)?)?;
    let out = prepare_dir(&cfg.out_dir)?;
    let mut meta = Metadata::new("hom-diag", cfg.seed);
    meta.set("edges", cfg.edges.display())
        .set("undirected", cfg.undirected)
        .set("motif_k", cfg.k)
        .set("mcmc", cfg.chain)
        .set("iters", cfg.steps)
        .set("chains", cfg.chains)
        .set("log_every", cfg.log_every);
    meta.write(&out)?;

    let runs: Vec<Result<ChainRun>> = thread::scope(|s| {
        let handles: Vec<_> = (0..cfg.chains)
            .map(|i| {
                let (g, oracle) = (&g, &oracle);
                s.spawn(move || run_chain(g, cfg, oracle, i as u64))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect()
    });

    let n = g.node_count();
    let write_dist = |name: String, freq: &[f64]| -> Result<()> {
        let mut dist = String::from("map,oracle,empirical\n");
        for (idx, (&p, &f)) in oracle.iter().zip(freq).enumerate() {
            if p > 0.0 || f > 0.0 {
                let labels: Vec<&str> = index_map(idx, n, cfg.k).iter().map(|&v| g.label(v)).collect();
                dist.push_str(&format!("{},{p:?},{f:?}\n", labels.join("-")));
            }
        }
        write_file(&out.join(name), dist)
    };
    let mut pooled = vec![0.0; oracle.len()];
    let mut final_tv = Vec::with_capacity(cfg.chains);
    for (i, run) in runs.into_iter().enumerate() {
        let run = run?;
        let prefix = if cfg.chains > 1 { format!("chain{i}_") } else { String::new() };
        let freq = run.histogram.frequencies();
        for (acc, f) in pooled.iter_mut().zip(&freq) {
            *acc += f / cfg.chains as f64;
        }
        write_dist(format!("{prefix}empirical_dist.csv"), &freq)?;
        let mut tv = String::from("step,tv\n");
        for (step, d) in &run.trace {
            tv.push_str(&format!("{step},{d:?}\n"));
        }
        write_file(&out.join(format!("{prefix}tv_trace.csv")), tv)?;
        final_tv.push(run.trace.last().map_or(1.0, |t| t.1));
    }
    let pooled_tv = if cfg.chains > 1 {
        write_dist("pooled_empirical_dist.csv".into(), &pooled)?;
        tv_distance(&pooled, &oracle)?
    } else {
        final_tv[0]
    };
    Ok(HomDiagSummary { final_tv, pooled_tv })
}
