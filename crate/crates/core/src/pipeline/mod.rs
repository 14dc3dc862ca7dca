//! End-to-end runs that read inputs from disk and write every artifact into
//! an output directory. Each run writes `metadata.txt` with its full
//! configuration; equal metadata means byte-identical numeric outputs.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use ndarray::ArrayView2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{write_file, Result};
use crate::sources::pgm::{atom_mosaic, encode_pgm};

mod diag;
mod images;
mod network;

pub use diag::{hom_diagnostics, HomDiagConfig, HomDiagSummary};
pub use images::{
    image_learn, ising_learn, ImageLearnConfig, ImageLearnSummary, IsingInit, LearnSettings, IsingLearnConfig,
    IsingLearnSummary,
};
pub use network::{
    denoise, ndl_learn_run, reconstruct, DenoiseConfig, DenoiseSummary, NdlLearnConfig,
    ReconstructConfig,
};

/// Independent generator number `stream` for a run seeded with `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `key: value` lines, in insertion order.
#[derive(Debug, Clone, Default)]
pub struct Metadata {
    lines: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str, seed: u64) -> Self {
        let mut m = Metadata::default();
        m.set("command", command);
        m.set("version", env!("CARGO_PKG_VERSION"));
        m.set("seed", seed);
        m
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.lines.push((key.to_string(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        write_file(&out_dir.join("metadata.txt"), self.render())?;
        Ok(())
    }
}

pub(crate) fn prepare_dir(out_dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir).map_err(|source| crate::error::Error::File {
        path: out_dir.to_path_buf(),
        source,
    })?;
    Ok(out_dir.to_path_buf())
}

pub(crate) fn write_trace(path: &Path, trace: &[f64]) -> Result<()> {
    let mut out = String::from("t,surrogate\n");
    for (t, v) in trace.iter().enumerate() {
        out.push_str(&format!("{},{v:?}\n", t + 1));
    }
    write_file(path, out)?;
    Ok(())
}

/// `atoms.pgm` plus `atoms_dominance.csv` (`atom,dominance`).
pub(crate) fn write_atoms(out_dir: &Path, w: ArrayView2<f64>, k: usize, dominance: &[f64]) -> Result<()> {
    let per_row = (w.ncols() as f64).sqrt().ceil() as usize;
    write_file(&out_dir.join("atoms.pgm"), encode_pgm(atom_mosaic(w, k, per_row).view()))?;
    let mut csv = String::from("atom,dominance\n");
    for (i, d) in dominance.iter().enumerate() {
        csv.push_str(&format!("{i},{d:?}\n"));
    }
    write_file(&out_dir.join("atoms_dominance.csv"), csv)?;
    Ok(())
}
