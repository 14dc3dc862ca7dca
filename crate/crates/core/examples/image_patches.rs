//! Draws a synthetic stripe image, learns a patch dictionary from it with
//! both i.i.d. and random-walk patch sampling, and prints the PSNR of each
//! reconstruction. Outputs land in `out/image_<mode>/`.
//!
//!     cargo run --release --example image_patches

use std::path::PathBuf;

use markov_omf::omf::CodingParams;
use markov_omf::pipeline::{image_learn, ImageLearnConfig, LearnSettings};
use markov_omf::sources::pgm::write_image;
use markov_omf::sources::{ImageGrid, PatchMode};
use ndarray::Array2;

fn main() -> markov_omf::Result<()> {
    std::fs::create_dir_all("out").map_err(markov_omf::Error::Io)?;
    let input = PathBuf::from("out/stripes.pgm");
    let pixels = Array2::from_shape_fn((48, 48), |(_, c)| if (c / 4) % 2 == 0 { 0.9 } else { 0.1 });
    write_image(&input, &ImageGrid::new(pixels)?)?;

    for (name, mode) in [("iid", PatchMode::Iid), ("walk", PatchMode::Walk)] {
        let cfg = ImageLearnConfig {
            image: input.clone(),
            mode,
            stride: 2,
            learn: LearnSettings {
                patch: 8,
                iterations: 40,
                batch: 50,
                atoms: 10,
                coding: CodingParams::with_lambda(0.01),
                kappa1: 0.0,
                beta: 1.0,
            },
            seed: 0,
            out_dir: PathBuf::from(format!("out/image_{name}")),
        };
        let s = image_learn(&cfg)?;
        println!("{name:>4}: PSNR {:.2} dB after {} steps", s.psnr, s.surrogate_trace.len());
    }
    Ok(())
}
