//! Network dictionary learning: factorize the stream of mesoscale patches
//! produced by a motif-sampling chain.

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::motif::chains::{mesoscale_patch, ChainKind, Motif, MotifChain, PivotMode};
use crate::motif::network::Network;
use crate::omf::aggregates::WeightSchedule;
use crate::omf::constraint::{ConstraintSpec, Piece};
use crate::omf::dictionary::{Dictionary, UpdateParams};
use crate::omf::engine::{OmfConfig, OnlineMf};
use crate::omf::sparse_code::{coding_objective, CodingParams, SparseCoder};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NdlParams {
    /// Motif size; the motif is the `k`-chain.
    pub k: usize,
    pub iterations: usize,
    /// Homomorphisms (patches) per minibatch.
    pub batch: usize,
    pub atoms: usize,
    pub lambda: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Frobenius bound of the nonnegative dictionary constraint.
    pub dict_radius: f64,
    pub chain: ChainKind,
    pub beta: f64,
    pub coding_tol: f64,
    pub coding_max_iter: usize,
    pub max_tries: usize,
}

impl Default for NdlParams {
    fn default() -> Self {
        NdlParams {
            k: 21,
            iterations: 100,
            batch: 100,
            atoms: 25,
            lambda: 1.0,
            kappa1: 0.0,
            kappa2: 0.0,
            dict_radius: 1000.0,
            chain: ChainKind::Pivot(PivotMode::Exact),
            beta: 1.0,
            coding_tol: 1e-6,
            coding_max_iter: 500,
            max_tries: 10_000_000,
        }
    }
}

impl NdlParams {
    pub fn coding(&self) -> CodingParams {
        CodingParams {
            lambda: self.lambda,
            kappa2: self.kappa2,
            tol: self.coding_tol,
            max_iter: self.coding_max_iter,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.iterations == 0 || self.batch == 0 || self.atoms == 0 {
            return Err(Error::InvalidParameter("k, T, N and r must be positive".into()));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda = {}", self.lambda)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NetworkDictionary {
    /// `k²×r`, one vectorized `k×k` atom per column (row-major).
    pub w: Array2<f64>,
    /// `r×r` code aggregate.
    pub p: Array2<f64>,
    /// `r×k²` code-data aggregate.
    pub q: Array2<f64>,
    pub dominance: Vec<f64>,
    /// Surrogate loss after every iteration.
    pub surrogate_trace: Vec<f64>,
    /// Mean `‖X − W_T H‖²` per patch over the final minibatch, with `H`
    /// coded against the returned dictionary.
    pub residual: f64,
}

/// `s_i = √P[i,i] / Σ_j √P[j,j]`.
pub fn dominance_scores(p: ArrayView2<f64>) -> Result<Vec<f64>> {
    let roots: Vec<f64> = p.diag().iter().map(|&v| v.max(0.0).sqrt()).collect();
    let total: f64 = roots.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::DegenerateAggregates);
    }
    Ok(roots.into_iter().map(|v| v / total).collect())
}

/// Column `j` of `x` set to `vec(A_x)` for each of `batch` chain steps.
pub(crate) fn patch_minibatch<R: Rng + ?Sized>(
    g: &Network,
    chain: &mut MotifChain,
    batch: usize,
    rng: &mut R,
) -> Array2<f64> {
    let k = chain.state().len();
    let mut x = Array2::zeros((k * k, batch));
    for j in 0..batch {
        chain.step(g, rng);
        let patch = mesoscale_patch(g, chain.state());
        x.column_mut(j).assign(&Array1::from_iter(patch.iter().cloned()));
    }
    x
}

/// Runs `T` iterations of dictionary learning on the patch stream of `g`.
///
/// The chain draws from `chain_rng` and the initial dictionary from
/// `init_rng`, so runs with different `r` see the same data stream.
pub fn ndl_learn<R1: Rng + ?Sized, R2: Rng + ?Sized>(
    g: &Network,
    params: &NdlParams,
    chain_rng: &mut R1,
    init_rng: &mut R2,
) -> Result<NetworkDictionary> {
    params.validate()?;
    let motif = Motif::k_chain(params.k)?;
    let mut chain = MotifChain::new(g, motif, params.chain, params.max_tries, chain_rng)?;
    let constraint = ConstraintSpec::single(Piece::nonnegative_ball(params.dict_radius));
    let init = Dictionary::random(params.k * params.k, params.atoms, constraint, init_rng)?;
    let config = OmfConfig {
        coding: params.coding(),
        kappa1: params.kappa1,
        schedule: WeightSchedule::new(params.beta)?,
        update: UpdateParams::default(),
        track_history: false,
    };
    let mut mf = OnlineMf::new(init, config)?;
    let mut trace = Vec::with_capacity(params.iterations);
    let mut last = Array2::zeros((0, 0));
    for t in 1..=params.iterations {
        let x = patch_minibatch(g, &mut chain, params.batch, chain_rng);
        let report = mf.step(x.view())?;
        log::debug!("ndl t={t} surrogate={:.6}", report.surrogate);
        trace.push(report.surrogate);
        last = x;
    }
    let w = mf.dictionary().w().to_owned();
    let coder = SparseCoder::new(w.view(), params.coding())?;
    let h = coder.code(last.view())?.h;
    let residual = coding_objective(last.view(), w.view(), h.view(), 0.0, 0.0) / params.batch as f64;
    let stats = mf.stats();
    Ok(NetworkDictionary {
        dominance: dominance_scores(stats.a.view())?,
        p: stats.a.clone(),
        q: stats.b.clone(),
        w,
        surrogate_trace: trace,
        residual,
    })
}
