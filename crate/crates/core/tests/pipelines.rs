use std::fs;
use std::path::Path;

use markov_omf::motif::{write_edge_list, ChainKind, Network, PivotMode};
use markov_omf::ndl::{Direction, NdlParams, NoiseMode, NrParams};
use markov_omf::omf::CodingParams;
use markov_omf::pipeline::{
    denoise, hom_diagnostics, image_learn, ising_learn, ndl_learn_run, reconstruct, DenoiseConfig, HomDiagConfig,
    ImageLearnConfig, IsingInit, IsingLearnConfig, LearnSettings, NdlLearnConfig, ReconstructConfig,
};
use markov_omf::sources::pgm::{decode_pgm, read_image, write_image};
use markov_omf::sources::{ImageGrid, PatchMode};
use markov_omf::Error;
use ndarray::Array2;
use tempfile::tempdir;

fn settings(patch: usize, atoms: usize, iterations: usize, batch: usize) -> LearnSettings {
    LearnSettings {
        patch,
        iterations,
        batch,
        atoms,
        coding: CodingParams::default(),
        kappa1: 0.0,
        beta: 1.0,
    }
}

fn ising(dir: &Path, temperature: f64, epoch: usize, iterations: usize, seed: u64) -> IsingLearnConfig {
    IsingLearnConfig {
        side: 50,
        temperature,
        epoch,
        init: IsingInit::Random,
        learn: settings(10, 25, iterations, 50),
        seed,
        out_dir: dir.to_path_buf(),
    }
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn cycle_atoms_render_the_path_pattern() {
    let dir = tempdir().unwrap();
    let edges = dir.path().join("c10.txt");
    write_edge_list(&edges, &Network::cycle(10).unwrap()).unwrap();
    let out = dir.path().join("out");
    let params = NdlParams {
        k: 3,
        iterations: 50,
        batch: 20,
        atoms: 4,
        ..NdlParams::default()
    };
    ndl_learn_run(&NdlLearnConfig {
        edges,
        undirected: false,
        params,
        seed: 7,
        out_dir: out.clone(),
    })
    .unwrap();
    for name in ["dictionary.txt", "aggregates.txt", "loss_trace.csv", "atoms.pgm", "atoms_dominance.csv", "metadata.txt"] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let img = decode_pgm(&out.join("atoms.pgm"), &fs::read(out.join("atoms.pgm")).unwrap()).unwrap();
    // 4 atoms in a 2×2 grid of 3×3 tiles; dark pixels mark large entries
    let pattern = [[0, 1, 0], [1, 0, 1], [0, 1, 0]];
    let matches = (0..4).any(|j| {
        let (r0, c0) = (1 + (j / 2) * 4, 1 + (j % 2) * 4);
        (0..3).all(|a| (0..3).all(|b| ((img[[r0 + a, c0 + b]] < 128) as i32) == pattern[a][b]))
    });
    assert!(matches);
    let trace = csv_rows(&out.join("loss_trace.csv"));
    assert_eq!(trace.len(), 50);
    assert!(fs::read_to_string(out.join("metadata.txt")).unwrap().contains("seed: 7"));
}

#[test]
fn cold_lattices_compress_better_than_hot_ones() {
    let dir = tempdir().unwrap();
    let cold = ising_learn(&ising(&dir.path().join("cold"), 0.5, 500, 40, 4)).unwrap();
    let hot = ising_learn(&ising(&dir.path().join("hot"), 5.0, 500, 40, 4)).unwrap();
    assert!(cold.surrogate_trace.last() < hot.surrogate_trace.last());
    assert!(dir.path().join("cold/final_config.pgm").exists());
}

#[test]
fn surrogate_trends_down_for_each_subsampling_epoch() {
    let dir = tempdir().unwrap();
    // equal total Gibbs updates: 10 × 1000 and 100 × 100
    for (epoch, iterations) in [(10, 1000), (100, 100)] {
        let s = ising_learn(&ising(&dir.path().join(format!("tau{epoch}")), 0.5, epoch, iterations, 2)).unwrap();
        let m = iterations / 10;
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (first, last) = (mean(&s.surrogate_trace[..m]), mean(&s.surrogate_trace[iterations - m..]));
        assert!(last < first, "epoch {epoch}: {first} -> {last}");
    }
}

#[test]
fn frozen_lattice_is_one_atom() {
    let dir = tempdir().unwrap();
    let mut learn = settings(4, 1, 30, 10);
    learn.coding = CodingParams {
        lambda: 0.0,
        tol: 1e-12,
        max_iter: 5000,
        ..CodingParams::default()
    };
    let s = ising_learn(&IsingLearnConfig {
        side: 10,
        temperature: 0.01,
        epoch: 10,
        init: IsingInit::Up,
        learn,
        seed: 0,
        out_dir: dir.path().to_path_buf(),
    })
    .unwrap();
    assert!(s.residual < 1e-6, "residual {}", s.residual);
}

#[test]
fn patch_larger_than_lattice_is_rejected() {
    let dir = tempdir().unwrap();
    let mut cfg = ising(dir.path(), 2.0, 1, 1, 0);
    cfg.side = 8;
    assert!(matches!(ising_learn(&cfg), Err(Error::InvalidParameter(_))));
}

fn stripes(path: &Path) {
    let px = Array2::from_shape_fn((40, 40), |(_, c)| if (c / 5) % 2 == 0 { 0.8 } else { 0.2 });
    write_image(path, &ImageGrid::new(px).unwrap()).unwrap();
}

#[test]
fn stripe_image_is_reconstructed_sharply() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("stripes.pgm");
    stripes(&input);
    let mut learn = settings(10, 10, 30, 50);
    learn.coding = CodingParams::with_lambda(0.01);
    let s = image_learn(&ImageLearnConfig {
        image: input,
        mode: PatchMode::Iid,
        stride: 5,
        learn,
        seed: 1,
        out_dir: dir.path().join("out"),
    })
    .unwrap();
    assert!(s.psnr > 30.0, "psnr {}", s.psnr);
    let recon = read_image(&dir.path().join("out/reconstruction.pgm")).unwrap();
    assert_eq!((recon.height(), recon.width()), (40, 40));
}

#[test]
fn walk_mode_moves_one_step_between_patches() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("stripes.pgm");
    stripes(&input);
    image_learn(&ImageLearnConfig {
        image: input,
        mode: PatchMode::Walk,
        stride: 4,
        learn: settings(6, 4, 5, 20),
        seed: 2,
        out_dir: dir.path().join("out"),
    })
    .unwrap();
    let rows = csv_rows(&dir.path().join("out/positions.csv"));
    assert_eq!(rows.len(), 100);
    let pos: Vec<(i64, i64)> = rows.iter().map(|r| (r[2].parse().unwrap(), r[3].parse().unwrap())).collect();
    for p in pos.windows(2) {
        // torus of side 40
        let dr = (p[1].0 - p[0].0).rem_euclid(40);
        let dc = (p[1].1 - p[0].1).rem_euclid(40);
        let steps = dr.min(40 - dr) + dc.min(40 - dc);
        assert_eq!(steps, 1, "{:?} -> {:?}", p[0], p[1]);
    }
}

#[test]
fn constant_image_is_reconstructed_exactly() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("flat.pgm");
    write_image(&input, &ImageGrid::constant(20, 20, 0.6).unwrap()).unwrap();
    let mut learn = settings(5, 1, 20, 10);
    learn.coding = CodingParams {
        lambda: 0.0,
        tol: 1e-12,
        max_iter: 5000,
        ..CodingParams::default()
    };
    let s = image_learn(&ImageLearnConfig {
        image: input,
        mode: PatchMode::Iid,
        stride: 5,
        learn,
        seed: 0,
        out_dir: dir.path().join("out"),
    })
    .unwrap();
    assert!(s.psnr.is_infinite() || s.psnr > 60.0, "psnr {}", s.psnr);
}

#[test]
fn non_pgm_input_is_a_data_error() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("not.pgm");
    fs::write(&input, "P2\n2 2\n255\n0 0 0 0\n").unwrap();
    let err = image_learn(&ImageLearnConfig {
        image: input,
        mode: PatchMode::Iid,
        stride: 1,
        learn: settings(2, 1, 1, 1),
        seed: 0,
        out_dir: dir.path().join("out"),
    })
    .unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

fn small_ndl() -> NdlParams {
    NdlParams {
        k: 4,
        iterations: 10,
        batch: 20,
        atoms: 5,
        ..NdlParams::default()
    }
}

fn nr(iterations: usize) -> NrParams {
    NrParams {
        iterations,
        chain: ChainKind::Pivot(PivotMode::Exact),
        coding: CodingParams::with_lambda(1.0),
        max_tries: 1_000_000,
    }
}

fn denoise_cfg(edges: &Path, out: &Path) -> DenoiseConfig {
    DenoiseConfig {
        edges: edges.to_path_buf(),
        undirected: false,
        corruption: Some((NoiseMode::Subtractive, 0.3)),
        labels: None,
        dictionary: None,
        learn: small_ndl(),
        nr: nr(3000),
        threshold: Some(0.5),
        direction: Direction::LowerIsPositive,
        seed: 5,
        out_dir: out.to_path_buf(),
    }
}

#[test]
fn denoise_writes_a_complete_roc_curve() {
    let dir = tempdir().unwrap();
    let edges = dir.path().join("sw.txt");
    write_edge_list(&edges, &Network::small_world(40, 4, 0.1, &mut rand_seeded(1)).unwrap()).unwrap();
    let out = dir.path().join("out");
    let s = denoise(&denoise_cfg(&edges, &out)).unwrap();

    let text = fs::read_to_string(out.join("roc.csv")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.remove(0), "threshold,fpr,tpr");
    let trailer = lines.pop().unwrap();
    assert_eq!(trailer.split(',').nth(1).unwrap().parse::<f64>().unwrap(), s.roc.auc);
    let pts: Vec<(f64, f64)> = lines
        .iter()
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
            (f[1], f[2])
        })
        .collect();
    assert_eq!(pts.first(), Some(&(0.0, 0.0)));
    assert_eq!(pts.last(), Some(&(1.0, 1.0)));
    assert_eq!(csv_rows(&out.join("labels.csv")).len(), s.candidates);
    assert_eq!(csv_rows(&out.join("classification.csv")).len(), s.candidates);

    // rerun from the written corrupted network and labels with the learned dictionary
    let mut again = denoise_cfg(&out.join("corrupted.txt"), &dir.path().join("again"));
    again.corruption = None;
    again.labels = Some(out.join("labels.csv"));
    again.dictionary = Some(out.join("dictionary.txt"));
    let s2 = denoise(&again).unwrap();
    assert_eq!(s2.candidates, s.candidates);
    assert_eq!(s2.labels, s.labels);
}

fn rand_seeded(seed: u64) -> rand_chacha::ChaCha8Rng {
    markov_omf::pipeline::rng_stream(seed, 9)
}

#[test]
fn additive_noise_on_k5_is_reported() {
    let dir = tempdir().unwrap();
    let edges = dir.path().join("k5.txt");
    write_edge_list(&edges, &Network::complete(5).unwrap()).unwrap();
    let mut cfg = denoise_cfg(&edges, &dir.path().join("out"));
    cfg.corruption = Some((NoiseMode::Additive, 0.5));
    assert!(matches!(denoise(&cfg), Err(Error::CorruptionInfeasible(_))));
}

#[test]
fn reconstruct_checks_the_motif_size() {
    let dir = tempdir().unwrap();
    let edges = dir.path().join("c8.txt");
    write_edge_list(&edges, &Network::cycle(8).unwrap()).unwrap();
    let learned = dir.path().join("learned");
    ndl_learn_run(&NdlLearnConfig {
        edges: edges.clone(),
        undirected: false,
        params: small_ndl(),
        seed: 0,
        out_dir: learned.clone(),
    })
    .unwrap();
    let mut cfg = ReconstructConfig {
        edges,
        undirected: false,
        dictionary: learned.join("dictionary.txt"),
        k: Some(3),
        nr: nr(500),
        seed: 0,
        out_dir: dir.path().join("out"),
    };
    assert!(matches!(reconstruct(&cfg), Err(Error::Dimension(_))));
    cfg.k = Some(4);
    let state = reconstruct(&cfg).unwrap();
    assert!(state.visited_pairs() > 0);
    assert!(dir.path().join("out/reconstruction.txt").exists());
}

#[test]
fn hom_diag_writes_traces_and_guards_the_oracle() {
    let dir = tempdir().unwrap();
    let edges = dir.path().join("c6.txt");
    write_edge_list(&edges, &Network::cycle(6).unwrap()).unwrap();
    let mut cfg = HomDiagConfig {
        edges,
        undirected: false,
        k: 3,
        chain: ChainKind::Pivot(PivotMode::Exact),
        steps: 20_000,
        chains: 1,
        log_every: 1000,
        seed: 0,
        out_dir: dir.path().join("out"),
    };
    let s = hom_diagnostics(&cfg).unwrap();
    assert!(s.final_tv[0] < 0.05);
    assert_eq!(csv_rows(&dir.path().join("out/tv_trace.csv")).len(), 20);
    assert_eq!(csv_rows(&dir.path().join("out/empirical_dist.csv")).len(), 24);

    let big = dir.path().join("big.txt");
    write_edge_list(&big, &Network::cycle(400).unwrap()).unwrap();
    cfg.edges = big;
    cfg.k = 3;
    assert!(matches!(hom_diagnostics(&cfg), Err(Error::EnumerationTooLarge(..))));
}
