//! Streams noisy mixtures of three planted nonnegative atoms through the
//! online factorization engine and reports how closely the learned atoms
//! match the planted ones.
//!
//!     cargo run --example online_factorization

use markov_omf::omf::{ConstraintSpec, Dictionary, OmfConfig, OnlineMf, Piece, WeightSchedule};
use markov_omf::omf::CodingParams;
use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> markov_omf::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (d, r, n) = (12, 3, 40);

    // three disjoint bumps
    let mut planted = Array2::<f64>::zeros((d, r));
    for j in 0..r {
        for i in 0..4 {
            planted[[4 * j + i, j]] = 1.0;
        }
    }

    let init = Dictionary::random(d, r, ConstraintSpec::single(Piece::nonnegative_ball(10.0)), &mut rng)?;
    let config = OmfConfig {
        coding: CodingParams::with_lambda(0.05),
        schedule: WeightSchedule::new(0.9)?,
        ..OmfConfig::default()
    };
    let mut mf = OnlineMf::new(init, config)?;

    for t in 1..=300 {
        let codes = Array2::from_shape_fn((r, n), |_| if rng.gen_bool(0.4) { rng.gen::<f64>() } else { 0.0 });
        let noise = Array2::from_shape_fn((d, n), |_| 0.01 * rng.gen::<f64>());
        let x = planted.dot(&codes) + noise;
        let report = mf.step(x.view())?;
        if t % 50 == 0 {
            println!("t={t:4}  surrogate={:.5}  residual={:.5}", report.surrogate, report.residual / n as f64);
        }
    }

    // each planted atom against its best-aligned learned atom
    let w = mf.dictionary().w();
    let norms = w.map_axis(Axis(0), |c| c.dot(&c).sqrt().max(1e-12));
    for j in 0..r {
        let p = planted.column(j);
        let pn = p.dot(&p).sqrt();
        let best = (0..r)
            .map(|i| w.column(i).dot(&p) / (norms[i] * pn))
            .fold(0.0, f64::max);
        println!("planted atom {j}: best cosine similarity {best:.4}");
    }
    Ok(())
}
