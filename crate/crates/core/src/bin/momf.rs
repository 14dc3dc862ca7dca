//! `momf`: command-line front end for the learning, reconstruction and
//! diagnostics pipelines.
//!
//! Every subcommand also accepts `--config <file>` with `key = value` (or
//! `key: value`) lines using the long flag names; flags given on the command
//! line override the file.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use markov_omf::motif::{ChainKind, PivotMode};
use markov_omf::ndl::{Direction, NdlParams, NoiseMode, NrParams};
use markov_omf::omf::CodingParams;
use markov_omf::pipeline::{self, IsingInit, LearnSettings};
use markov_omf::sources::PatchMode;
use markov_omf::Error;

#[derive(Parser)]
#[command(name = "momf", version, about = "Online matrix factorization for Markovian data")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a network dictionary from motif samples.
    NdlLearn(NdlLearnArgs),
    /// Reconstruct a network from a learned dictionary.
    Reconstruct(ReconstructArgs),
    /// Corrupt, reconstruct and score a network (ROC/AUC).
    Denoise(DenoiseArgs),
    /// Learn a dictionary from Ising spin configurations.
    IsingLearn(IsingLearnArgs),
    /// Learn a dictionary from image patches and reconstruct the image.
    ImageLearn(ImageLearnArgs),
    /// Compare chain histograms against the exact homomorphism law.
    HomDiag(HomDiagArgs),
}

#[derive(Args)]
struct Common {
    /// Options file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GraphInput {
    #[arg(long)]
    edges: PathBuf,
    /// Insert every line in both directions.
    #[arg(long)]
    undirected: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mcmc {
    Glauber,
    Pivot,
    PivotApprox,
}

impl From<Mcmc> for ChainKind {
    fn from(m: Mcmc) -> Self {
        match m {
            Mcmc::Glauber => ChainKind::Glauber,
            Mcmc::Pivot => ChainKind::Pivot(PivotMode::Exact),
            Mcmc::PivotApprox => ChainKind::Pivot(PivotMode::Approximate),
        }
    }
}

#[derive(Args)]
struct Factorization {
    #[arg(long = "atoms", default_value_t = 25)]
    atoms: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    kappa1: f64,
    #[arg(long, default_value_t = 0.0)]
    kappa2: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long = "iters", default_value_t = 100)]
    iters: usize,
    #[arg(long = "batch", default_value_t = 100)]
    batch: usize,
}

impl Factorization {
    fn coding(&self) -> CodingParams {
        CodingParams {
            lambda: self.lambda,
            kappa2: self.kappa2,
            ..CodingParams::default()
        }
    }
}

#[derive(Args)]
struct MotifArgs {
    #[arg(long, default_value_t = 21)]
    motif_k: usize,
    #[arg(long, value_enum, default_value_t = Mcmc::Pivot)]
    mcmc: Mcmc,
}

#[derive(Args)]
struct NdlLearnArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    graph: GraphInput,
    #[command(flatten)]
    motif: MotifArgs,
    #[command(flatten)]
    fact: Factorization,
    /// Frobenius bound on the dictionary.
    #[arg(long, default_value_t = 1000.0)]
    dict_radius: f64,
}

fn ndl_params(motif: &MotifArgs, fact: &Factorization, dict_radius: f64) -> NdlParams {
    NdlParams {
        k: motif.motif_k,
        iterations: fact.iters,
        batch: fact.batch,
        atoms: fact.atoms,
        lambda: fact.lambda,
        kappa1: fact.kappa1,
        kappa2: fact.kappa2,
        dict_radius,
        chain: motif.mcmc.into(),
        beta: fact.beta,
        ..NdlParams::default()
    }
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    graph: GraphInput,
    #[arg(long)]
    dictionary: PathBuf,
    /// Expected motif size; must match the dictionary.
    #[arg(long)]
    motif_k: Option<usize>,
    #[arg(long, value_enum, default_value_t = Mcmc::Pivot)]
    mcmc: Mcmc,
    /// Chain steps.
    #[arg(long = "iters", default_value_t = 100_000)]
    iters: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Noise {
    Additive,
    Subtractive,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Lower,
    Higher,
}

#[derive(Args)]
struct DenoiseArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    graph: GraphInput,
    #[command(flatten)]
    motif: MotifArgs,
    #[command(flatten)]
    fact: Factorization,
    #[arg(long, default_value_t = 1000.0)]
    dict_radius: f64,
    /// Corruption applied before reconstruction.
    #[arg(long, value_enum)]
    mode: Option<Noise>,
    #[arg(long, default_value_t = 0.5)]
    fraction: f64,
    /// `u,v,label` file for an input that is already corrupted.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Reuse a dictionary instead of learning one.
    #[arg(long)]
    dictionary: Option<PathBuf>,
    /// Reconstruction chain steps.
    #[arg(long, default_value_t = 100_000)]
    recon_iters: usize,
    /// Also write `classification.csv` at this threshold.
    #[arg(long)]
    threshold: Option<f64>,
    /// Which side of the threshold counts as a genuine pair.
    #[arg(long, value_enum, default_value_t = Order::Lower)]
    direction: Order,
}

#[derive(Args)]
struct IsingLearnArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    fact: Factorization,
    #[arg(long, default_value_t = 50)]
    lattice: usize,
    #[arg(long, default_value_t = 10)]
    patch: usize,
    #[arg(long, default_value_t = 2.26)]
    temperature: f64,
    /// Gibbs updates between minibatches.
    #[arg(long = "epoch", default_value_t = 1000)]
    epoch: usize,
    #[arg(long, value_enum, default_value_t = SpinInit::Random)]
    init: SpinInit,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpinInit {
    Random,
    Up,
    Down,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampling {
    Iid,
    Walk,
}

#[derive(Args)]
struct ImageLearnArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    fact: Factorization,
    /// Binary PGM input.
    #[arg(long)]
    image: PathBuf,
    #[arg(long, default_value_t = 10)]
    patch: usize,
    #[arg(long, value_enum, default_value_t = Sampling::Iid)]
    mode: Sampling,
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Args)]
struct HomDiagArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    graph: GraphInput,
    #[command(flatten)]
    motif: MotifArgs,
    #[arg(long = "iters", default_value_t = 100_000)]
    iters: usize,
    #[arg(long, default_value_t = 1)]
    chains: usize,
    #[arg(long, default_value_t = 1000)]
    log_every: usize,
}

fn learn_settings(fact: &Factorization, patch: usize) -> LearnSettings {
    LearnSettings {
        patch,
        iterations: fact.iters,
        batch: fact.batch,
        atoms: fact.atoms,
        coding: fact.coding(),
        kappa1: fact.kappa1,
        beta: fact.beta,
    }
}

fn run(cli: Cli) -> markov_omf::Result<()> {
    match cli.command {
        Command::NdlLearn(a) => {
            let cfg = pipeline::NdlLearnConfig {
                edges: a.graph.edges,
                undirected: a.graph.undirected,
                params: ndl_params(&a.motif, &a.fact, a.dict_radius),
                seed: a.common.seed,
                out_dir: a.common.out_dir,
            };
            let d = pipeline::ndl_learn_run(&cfg)?;
            println!("final surrogate {:?}", d.surrogate_trace.last().copied().unwrap_or(f64::NAN));
        }
        Command::Reconstruct(a) => {
            let cfg = pipeline::ReconstructConfig {
                edges: a.graph.edges,
                undirected: a.graph.undirected,
                dictionary: a.dictionary,
                k: a.motif_k,
                nr: NrParams {
                    iterations: a.iters,
                    chain: a.mcmc.into(),
                    coding: CodingParams::with_lambda(a.lambda),
                    max_tries: 10_000_000,
                },
                seed: a.common.seed,
                out_dir: a.common.out_dir,
            };
            let s = pipeline::reconstruct(&cfg)?;
            println!("visited pairs {}", s.visited_pairs());
        }
        Command::Denoise(a) => {
            let learn = ndl_params(&a.motif, &a.fact, a.dict_radius);
            let cfg = pipeline::DenoiseConfig {
                edges: a.graph.edges,
                undirected: a.graph.undirected,
                corruption: a.mode.map(|m| {
                    let mode = match m {
                        Noise::Additive => NoiseMode::Additive,
                        Noise::Subtractive => NoiseMode::Subtractive,
                    };
                    (mode, a.fraction)
                }),
                labels: a.labels,
                dictionary: a.dictionary,
                nr: NrParams {
                    iterations: a.recon_iters,
                    chain: learn.chain,
                    coding: learn.coding(),
                    max_tries: learn.max_tries,
                },
                learn,
                threshold: a.threshold,
                direction: match a.direction {
                    Order::Lower => Direction::LowerIsPositive,
                    Order::Higher => Direction::HigherIsPositive,
                },
                seed: a.common.seed,
                out_dir: a.common.out_dir,
            };
            let s = pipeline::denoise(&cfg)?;
            println!("auc {:?} over {} candidate pairs", s.roc.auc, s.candidates);
        }
        Command::IsingLearn(a) => {
            let cfg = pipeline::IsingLearnConfig {
                side: a.lattice,
                temperature: a.temperature,
                epoch: a.epoch,
                init: match a.init {
                    SpinInit::Random => IsingInit::Random,
                    SpinInit::Up => IsingInit::Up,
                    SpinInit::Down => IsingInit::Down,
                },
                learn: learn_settings(&a.fact, a.patch),
                seed: a.common.seed,
                out_dir: a.common.out_dir,
            };
            let s = pipeline::ising_learn(&cfg)?;
            println!("final surrogate {:?}, residual {:?}", s.surrogate_trace.last().unwrap(), s.residual);
        }
        Command::ImageLearn(a) => {
            let cfg = pipeline::ImageLearnConfig {
                image: a.image,
                mode: match a.mode {
                    Sampling::Iid => PatchMode::Iid,
                    Sampling::Walk => PatchMode::Walk,
                },
                stride: a.stride.unwrap_or(a.patch),
                learn: learn_settings(&a.fact, a.patch),
                seed: a.common.seed,
                out_dir: a.common.out_dir,
            };
            let s = pipeline::image_learn(&cfg)?;
            println!("reconstruction psnr {:.2} dB", s.psnr);
        }
        Command::HomDiag(a) => {
            let cfg = pipeline::HomDiagConfig {
                edges: a.graph.edges,
                undirected: a.graph.undirected,
                k: a.motif.motif_k,
                chain: a.motif.mcmc.into(),
                steps: a.iters,
                chains: a.chains,
                log_every: a.log_every,
                seed: a.common.seed,
                out_dir: a.common.out_dir,
            };
            let s = pipeline::hom_diagnostics(&cfg)?;
            for (i, tv) in s.final_tv.iter().enumerate() {
                println!("chain {i}: final tv {tv:.4}");
            }
            if s.final_tv.len() > 1 {
                println!("pooled: final tv {:.4}", s.pooled_tv);
            }
        }
    }
    Ok(())
}

/// Splices the options of a `--config` file in front of the explicit flags.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let path = args
        .get(pos + 1)
        .ok_or("--config needs a file")?
        .to_string_lossy()
        .into_owned();
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{path}: {e}"))?;
    let mut injected = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .or_else(|| line.split_once(':'))
            .ok_or(format!("{path}:{}: expected `key = value`", i + 1))?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        if value == "true" {
            injected.push(OsString::from(format!("--{key}")));
        } else if value != "false" {
            injected.push(OsString::from(format!("--{key}")));
            injected.push(OsString::from(value));
        }
    }
    // the subcommand name is the first argument after the program name
    let mut out: Vec<OsString> = args[..2.min(args.len())].to_vec();
    out.extend(injected);
    out.extend(args[2.min(args.len())..].iter().cloned());
    Ok(out)
}

fn main() -> ExitCode {
    let args = match expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
