//! The streaming factorization loop: code, fold into aggregates, update the
//! dictionary.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::omf::aggregates::{AggregateStats, WeightSchedule};
use crate::omf::dictionary::{dictionary_update, surrogate_loss, Dictionary, UpdateParams};
use crate::omf::sparse_code::{coding_objective, sparse_code, Code, CodingParams, SparseCoder};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmfConfig {
    pub coding: CodingParams,
    pub kappa1: f64,
    pub schedule: WeightSchedule,
    pub update: UpdateParams,
    /// Keep every data matrix so the exact empirical loss can be evaluated.
    pub track_history: bool,
}

impl Default for OmfConfig {
    fn default() -> Self {
        OmfConfig {
            coding: CodingParams::default(),
            kappa1: 0.0,
            schedule: WeightSchedule::balanced(),
            update: UpdateParams::default(),
            track_history: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepReport {
    pub t: u64,
    pub weight: f64,
    pub code: Code,
    /// `f̂_t(W_t)`.
    pub surrogate: f64,
    /// `‖X_t − W_{t−1} H_t‖²_F`.
    pub residual: f64,
    pub ellipsoid_active: bool,
}

/// Online matrix factorization state: the dictionary and its aggregates.
#[derive(Debug, Clone)]
pub struct OnlineMf {
    dictionary: Dictionary,
    stats: AggregateStats,
    config: OmfConfig,
    history: Option<Vec<Array2<f64>>>,
}

impl OnlineMf {
    pub fn new(initial: Dictionary, config: OmfConfig) -> Result<Self> {
        let stats = AggregateStats::new(initial.atoms(), initial.data_dim(), config.kappa1)?;
        Ok(OnlineMf {
            dictionary: initial,
            stats,
            history: config.track_history.then(Vec::new),
            config,
        })
    }

    /// Resumes from a dictionary and checkpointed aggregates.
    pub fn resume(dictionary: Dictionary, stats: AggregateStats, config: OmfConfig) -> Result<Self> {
        if stats.atoms() != dictionary.atoms() || stats.data_dim() != dictionary.data_dim() {
            return Err(Error::Dimension("checkpoint does not match dictionary".into()));
        }
        Ok(OnlineMf {
            dictionary,
            stats,
            history: config.track_history.then(Vec::new),
            config,
        })
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    pub fn stats(&self) -> &AggregateStats {
        &self.stats
    }

    pub fn config(&self) -> &OmfConfig {
        &self.config
    }

    pub fn history(&self) -> Option<&[Array2<f64>]> {
        self.history.as_deref()
    }

    /// Processes one data matrix `X_t`.
    pub fn step(&mut self, x: ArrayView2<f64>) -> Result<StepReport> {
        if x.nrows() != self.dictionary.data_dim() {
            return Err(Error::Dimension(format!(
                "data has {} rows, dictionary expects {}",
                x.nrows(),
                self.dictionary.data_dim()
            )));
        }
        let coder = SparseCoder::new(self.dictionary.w(), self.config.coding)?;
        let code = coder.code(x)?;
        let residual = coding_objective(x, self.dictionary.w(), code.h.view(), 0.0, 0.0);

        self.stats
            .update(code.h.view(), x, &self.config.schedule, &self.config.coding)?;
        let outcome = dictionary_update(&self.dictionary, &self.stats, self.config.update)?;
        if outcome.dictionary.w().iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("dictionary update produced non-finite entries".into()));
        }
        self.dictionary = outcome.dictionary;
        if let Some(h) = self.history.as_mut() {
            h.push(x.to_owned());
        }
        Ok(StepReport {
            t: self.stats.t,
            weight: self.config.schedule.weight(self.stats.t),
            surrogate: surrogate_loss(self.dictionary.w(), &self.stats)?,
            residual,
            ellipsoid_active: outcome.ellipsoid_active,
            code,
        })
    }

    /// `f_t(W)` over the stored history; `None` unless history tracking is on.
    pub fn empirical_loss(&self, w: ArrayView2<f64>) -> Option<Result<f64>> {
        self.history.as_ref().map(|hist| {
            empirical_loss(w, hist, &self.config.schedule, &self.config.coding)
        })
    }
}

/// `ℓ(X, W) = min_{H ≥ 0} ‖X − WH‖²_F + λ‖H‖₁ + (κ₂/2)‖H‖²_F`, via the sparse coder.
pub fn sample_loss(x: ArrayView2<f64>, w: ArrayView2<f64>, coding: &CodingParams) -> Result<f64> {
    let code = sparse_code(x, w, *coding)?;
    Ok(coding_objective(x, w, code.h.view(), coding.lambda, coding.kappa2))
}

/// Weighted empirical loss `f_t(W) = Σ_s ℓ(X_s, W) w_s^t`.
///
/// Re-solves one coding problem per stored matrix; meant for diagnostics on
/// small problems.
pub fn empirical_loss(
    w: ArrayView2<f64>,
    history: &[Array2<f64>],
    schedule: &WeightSchedule,
    coding: &CodingParams,
) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::InvalidParameter("empty history".into()));
    }
    let coder = SparseCoder::new(w, *coding)?;
    let weights = schedule.history_weights(history.len() as u64);
    let mut total = 0.0;
    for (x, ws) in history.iter().zip(weights) {
        let code = coder.code(x.view())?;
        total += ws * coding_objective(x.view(), w, code.h.view(), coding.lambda, coding.kappa2);
    }
    Ok(total)
}
