use std::path::PathBuf;

use ndarray::Array2;

use crate::error::{write_file, Error, Result};
use crate::ndl::learn::dominance_scores;
use crate::omf::aggregates::WeightSchedule;
use crate::omf::constraint::ConstraintSpec;
use crate::omf::dictionary::{Dictionary, UpdateParams};
use crate::omf::engine::{OmfConfig, OnlineMf};
use crate::omf::io::write_matrix_file;
use crate::omf::sparse_code::{coding_objective, CodingParams, SparseCoder};
use crate::pipeline::{prepare_dir, rng_stream, write_atoms, write_trace, Metadata};
use crate::sources::ising::{spin_patch_minibatch, IsingConfig};
use crate::sources::patches::{image_patch_minibatch, psnr, reconstruct_grid, PatchMode, PatchWalker};
use crate::sources::pgm::{read_image, write_image, write_spins};

const DATA_STREAM: u64 = 0;
const INIT_STREAM: u64 = 1;

/// Factorization settings shared by the image-like pipelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnSettings {
    pub patch: usize,
    pub iterations: usize,
    pub batch: usize,
    pub atoms: usize,
    pub coding: CodingParams,
    pub kappa1: f64,
    pub beta: f64,
}

impl LearnSettings {
    fn engine(&self, rng: &mut rand_chacha::ChaCha8Rng) -> Result<OnlineMf> {
        if self.patch == 0 || self.iterations == 0 || self.batch == 0 || self.atoms == 0 {
            return Err(Error::InvalidParameter("patch size, T, N and r must be positive".into()));
        }
        let init = Dictionary::random(self.patch * self.patch, self.atoms, ConstraintSpec::default(), rng)?;
        OnlineMf::new(
            init,
            OmfConfig {
                coding: self.coding,
                kappa1: self.kappa1,
                schedule: WeightSchedule::new(self.beta)?,
                update: UpdateParams::default(),
                track_history: false,
            },
        )
    }

    fn record(&self, meta: &mut Metadata) {
        meta.set("patch", self.patch)
            .set("iters", self.iterations)
            .set("batch", self.batch)
            .set("atoms", self.atoms)
            .set("lambda", self.coding.lambda)
            .set("kappa1", self.kappa1)
            .set("kappa2", self.coding.kappa2)
            .set("beta", self.beta);
    }
}

/// Mean per-column `‖X − W H‖²` with `H` coded against `w`.
fn batch_residual(x: &Array2<f64>, w: &Array2<f64>, coding: CodingParams) -> Result<f64> {
    let h = SparseCoder::new(w.view(), coding)?.code(x.view())?.h;
    Ok(coding_objective(x.view(), w.view(), h.view(), 0.0, 0.0) / x.ncols() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsingInit {
    Random,
    Up,
    Down,
}

#[derive(Debug, Clone)]
pub struct IsingLearnConfig {
    pub side: usize,
    pub temperature: f64,
    /// Single-site Gibbs updates between consecutive minibatches.
    pub epoch: usize,
    pub init: IsingInit,
    pub learn: LearnSettings,
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct IsingLearnSummary {
    pub w: Array2<f64>,
    pub surrogate_trace: Vec<f64>,
    /// Residual of the final minibatch against the final dictionary.
    pub residual: f64,
    pub final_config: IsingConfig,
}

/// Learns a dictionary from spin patches of a Gibbs chain, reading one
/// minibatch every `epoch` updates.
pub fn ising_learn(cfg: &IsingLearnConfig) -> Result<IsingLearnSummary> {
    let k = cfg.learn.patch;
    if k > cfg.side {
        return Err(Error::InvalidParameter(format!(
            "patch size {k} exceeds the lattice side {}",
            cfg.side
        )));
    }
    let out = prepare_dir(&cfg.out_dir)?;
    let mut meta = Metadata::new("ising-learn", cfg.seed);
    meta.set("lattice", cfg.side)
        .set("temperature", cfg.temperature)
        .set("epoch", cfg.epoch)
        .set("init", format!("{:?}", cfg.init).to_lowercase());
    cfg.learn.record(&mut meta);
    meta.write(&out)?;

    let mut data_rng = rng_stream(cfg.seed, DATA_STREAM);
    let mut spins = match cfg.init {
        IsingInit::Random => IsingConfig::random(cfg.side, cfg.temperature, &mut data_rng)?,
        IsingInit::Up => IsingConfig::uniform(cfg.side, cfg.temperature, 1)?,
        IsingInit::Down => IsingConfig::uniform(cfg.side, cfg.temperature, -1)?,
    };
    let mut mf = cfg.learn.engine(&mut rng_stream(cfg.seed, INIT_STREAM))?;
    let mut trace = Vec::with_capacity(cfg.learn.iterations);
    let mut last = Array2::zeros((0, 0));
    for _ in 0..cfg.learn.iterations {
        for _ in 0..cfg.epoch {
            spins.gibbs_step(&mut data_rng);
        }
        let x = spin_patch_minibatch(&spins, k, cfg.learn.batch, &mut data_rng)?;
        trace.push(mf.step(x.view())?.surrogate);
        last = x;
    }
    let w = mf.dictionary().w().to_owned();
    let residual = batch_residual(&last, &w, cfg.learn.coding)?;

    write_matrix_file(&out.join("dictionary.txt"), w.view())?;
    write_trace(&out.join("loss_trace.csv"), &trace)?;
    write_atoms(&out, w.view(), k, &dominance_scores(mf.stats().a.view())?)?;
    write_spins(&out.join("final_config.pgm"), &spins)?;
    Ok(IsingLearnSummary {
        w,
        surrogate_trace: trace,
        residual,
        final_config: spins,
    })
}

#[derive(Debug, Clone)]
pub struct ImageLearnConfig {
    pub image: PathBuf,
    pub mode: PatchMode,
    /// Corner spacing of the patches used by the reconstruction.
    pub stride: usize,
    pub learn: LearnSettings,
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ImageLearnSummary {
    pub w: Array2<f64>,
    pub surrogate_trace: Vec<f64>,
    pub psnr: f64,
}

/// Learns a dictionary from image patches and reconstructs the image with it.
pub fn image_learn(cfg: &ImageLearnConfig) -> Result<ImageLearnSummary> {
    let image = read_image(&cfg.image)?;
    let out = prepare_dir(&cfg.out_dir)?;
    let k = cfg.learn.patch;
    let mut meta = Metadata::new("image-learn", cfg.seed);
    meta.set("image", cfg.image.display())
        .set("mode", format!("{:?}", cfg.mode).to_lowercase())
        .set("stride", cfg.stride);
    cfg.learn.record(&mut meta);
    meta.write(&out)?;

    let mut data_rng = rng_stream(cfg.seed, DATA_STREAM);
    let mut walker = PatchWalker::for_image(&image);
    let mut mf = cfg.learn.engine(&mut rng_stream(cfg.seed, INIT_STREAM))?;
    let mut trace = Vec::with_capacity(cfg.learn.iterations);
    let mut positions = String::from("t,j,row,col\n");
    for t in 1..=cfg.learn.iterations {
        let batch = image_patch_minibatch(&image, k, cfg.learn.batch, cfg.mode, &mut walker, &mut data_rng)?;
        for (j, (r, c)) in batch.corners.iter().enumerate() {
            positions.push_str(&format!("{t},{j},{r},{c}\n"));
        }
        trace.push(mf.step(batch.data.view())?.surrogate);
    }
    let w = mf.dictionary().w().to_owned();
    let recon = reconstruct_grid(&image, w.view(), k, cfg.stride, cfg.learn.coding)?;

    write_matrix_file(&out.join("dictionary.txt"), w.view())?;
    write_trace(&out.join("loss_trace.csv"), &trace)?;
    write_atoms(&out, w.view(), k, &dominance_scores(mf.stats().a.view())?)?;
    write_image(&out.join("reconstruction.pgm"), &recon)?;
    write_file(&out.join("positions.csv"), positions)?;
    Ok(ImageLearnSummary {
        psnr: psnr(&image, &recon),
        w,
        surrogate_trace: trace,
    })
}
