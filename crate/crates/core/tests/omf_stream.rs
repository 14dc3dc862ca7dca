use markov_omf::omf::io::{format_checkpoint, parse_checkpoint};
use markov_omf::omf::{
    dictionary_update, growth_check, surrogate_loss, AggregateStats, CodingParams, ConstraintSpec, Dictionary,
    OmfConfig, OnlineMf, Piece, UpdateParams, WeightSchedule,
};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.gen::<f64>())
}

fn engine(d: usize, r: usize, config: OmfConfig, seed: u64) -> OnlineMf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = Dictionary::random(d, r, ConstraintSpec::single(Piece::nonnegative_ball(50.0)), &mut rng).unwrap();
    OnlineMf::new(init, config).unwrap()
}

#[test]
fn constant_stream_is_fit_within_fifty_steps() {
    let x = Array2::from_shape_fn((6, 4), |(i, _)| 0.2 + 0.1 * i as f64);
    let mut mf = engine(
        6,
        1,
        OmfConfig {
            coding: CodingParams {
                lambda: 0.0,
                tol: 1e-12,
                max_iter: 5000,
                ..CodingParams::default()
            },
            update: UpdateParams {
                tol: 1e-12,
                max_sweeps: 1000,
            },
            ..OmfConfig::default()
        },
        1,
    );
    let mut last = f64::INFINITY;
    for _ in 0..50 {
        last = mf.step(x.view()).unwrap().residual;
    }
    assert!(last < 1e-6, "residual {last}");
}

#[test]
fn surrogate_dominates_the_empirical_loss() {
    let coding = CodingParams {
        lambda: 0.2,
        tol: 1e-12,
        max_iter: 20_000,
        ..CodingParams::default()
    };
    let mut mf = engine(
        5,
        2,
        OmfConfig {
            coding,
            schedule: WeightSchedule::new(0.8).unwrap(),
            track_history: true,
            ..OmfConfig::default()
        },
        2,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..60 {
        let x = random_matrix(&mut rng, 5, 3);
        let report = mf.step(x.view()).unwrap();
        let f = mf.empirical_loss(mf.dictionary().w()).unwrap().unwrap();
        assert!(report.surrogate >= f - 1e-8, "surrogate {} below loss {f}", report.surrogate);
    }
}

#[test]
fn checkpoint_resume_matches_an_uninterrupted_run() {
    let config = OmfConfig {
        coding: CodingParams::with_lambda(0.1),
        kappa1: 0.05,
        schedule: WeightSchedule::new(0.9).unwrap(),
        ..OmfConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let stream: Vec<Array2<f64>> = (0..20).map(|_| random_matrix(&mut rng, 4, 3)).collect();

    let mut full = engine(4, 2, config, 3);
    for x in &stream {
        full.step(x.view()).unwrap();
    }

    let mut first = engine(4, 2, config, 3);
    for x in &stream[..10] {
        first.step(x.view()).unwrap();
    }
    let text = format_checkpoint(first.stats(), &config.schedule);
    let (stats, schedule) = parse_checkpoint(Path::new("ckpt"), &text).unwrap();
    let mut resumed = OnlineMf::resume(first.dictionary().clone(), stats, OmfConfig { schedule, ..config }).unwrap();
    for x in &stream[10..] {
        resumed.step(x.view()).unwrap();
    }
    assert_eq!(resumed.dictionary().w(), full.dictionary().w());
    assert_eq!(resumed.stats(), full.stats());
}

#[test]
fn engine_is_deterministic() {
    let run = || {
        let mut mf = engine(5, 3, OmfConfig::default(), 9);
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        let trace: Vec<f64> = (0..30)
            .map(|_| mf.step(random_matrix(&mut rng, 5, 4).view()).unwrap().surrogate)
            .collect();
        (mf.dictionary().w().to_owned(), trace)
    };
    assert_eq!(run(), run());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn aggregates_stay_bounded_symmetric_and_psd(
        seed in 0u64..1000,
        lambda in 0.05f64..3.0,
        d in 2usize..6,
        r in 1usize..4,
    ) {
        let mut mf = engine(d, r, OmfConfig { coding: CodingParams::with_lambda(lambda), ..OmfConfig::default() }, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
        let mut radius = 0.0f64;
        for _ in 0..25 {
            let x = random_matrix(&mut rng, d, 3);
            radius = radius.max(x.iter().map(|v| v * v).sum::<f64>().sqrt());
            mf.step(x.view()).unwrap();
            let s = mf.stats();
            prop_assert!(s.within_bounds(lambda, radius));
            prop_assert_eq!(&s.a, &s.a.t());
            for _ in 0..5 {
                let v = Array1::from_shape_fn(r, |_| rng.gen::<f64>() - 0.5);
                prop_assert!(v.dot(&s.a.dot(&v)) >= -1e-12);
            }
            prop_assert!(mf.dictionary().constraint().pieces()[0].contains(mf.dictionary().w(), 1e-9));
        }
    }

    #[test]
    fn zero_dictionary_surrogate_is_the_remainder(seed in 0u64..1000) {
        let mut mf = engine(3, 2, OmfConfig::default(), seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..5 {
            mf.step(random_matrix(&mut rng, 3, 2).view()).unwrap();
        }
        let s = mf.stats();
        prop_assert_eq!(surrogate_loss(Array2::zeros((3, 2)).view(), s).unwrap(), s.remainder);
    }

    #[test]
    fn two_box_updates_grow_quadratically(seed in 0u64..10_000, kappa1 in 0.0f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = ConstraintSpec::new(vec![Piece::boxed(0.0, 1.0), Piece::boxed(2.0, 3.0)]).unwrap();
        let (d, r) = (rng.gen_range(1..5), rng.gen_range(1..4));
        let prev = Dictionary::random(d, r, spec, &mut rng).unwrap();
        let mut stats = AggregateStats::new(r, d, kappa1).unwrap();
        let h = random_matrix(&mut rng, r, 3).mapv(|v| 3.0 * v);
        let x = random_matrix(&mut rng, d, 3).mapv(|v| 5.0 * v);
        stats.update(h.view(), x.view(), &WeightSchedule::balanced(), &CodingParams::default()).unwrap();
        let out = dictionary_update(&prev, &stats, UpdateParams::default()).unwrap();
        prop_assert!(growth_check(prev.w(), out.dictionary.w(), &stats).unwrap() >= -1e-8);
        prop_assert!(out.dictionary.constraint().pieces()[out.dictionary.active_piece()].contains(out.dictionary.w(), 1e-9));
    }
}
