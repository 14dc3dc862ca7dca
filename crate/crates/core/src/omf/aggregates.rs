use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::omf::sparse_code::CodingParams;

/// Weights `w_t = t^{-β}` with `β ∈ (3/4, 1]`; `β = 1` gives balanced averaging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSchedule {
    beta: f64,
}

impl WeightSchedule {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.75 && beta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "weight exponent must lie in (3/4, 1], got {beta}"
            )));
        }
        Ok(WeightSchedule { beta })
    }

    pub fn balanced() -> Self {
        WeightSchedule { beta: 1.0 }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `w_t` for `t ≥ 1`.
    pub fn weight(&self, t: u64) -> f64 {
        assert!(t >= 1, "weights are indexed from t = 1");
        if self.beta == 1.0 {
            1.0 / t as f64
        } else {
            (t as f64).powf(-self.beta)
        }
    }

    /// Effective weights `w_s^t = w_s ∏_{j=s+1}^{t} (1 − w_j)` of the
    /// individual losses after `t` steps, for `s = 1..=t`.
    pub fn history_weights(&self, t: u64) -> Vec<f64> {
        let mut out = vec![0.0; t as usize];
        let mut tail = 1.0;
        for s in (1..=t).rev() {
            let w = self.weight(s);
            out[(s - 1) as usize] = w * tail;
            tail *= 1.0 - w;
        }
        out
    }
}

impl Default for WeightSchedule {
    fn default() -> Self {
        WeightSchedule::balanced()
    }
}

/// Running sufficient statistics `(A_t, B_t, r_t)` of the surrogate loss
/// `f̂_t(W) = tr(W (A_t + κ₁I) Wᵀ) − 2 tr(W B_t) + r_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStats {
    /// r×r code Gram average.
    pub a: Array2<f64>,
    /// r×d code–data cross moment.
    pub b: Array2<f64>,
    /// Part of the surrogate that does not depend on `W`.
    pub remainder: f64,
    pub t: u64,
    pub kappa1: f64,
}

impl AggregateStats {
    pub fn new(r: usize, d: usize, kappa1: f64) -> Result<Self> {
        if !(kappa1 >= 0.0 && kappa1.is_finite()) {
            return Err(Error::InvalidParameter(format!("kappa1 = {kappa1}")));
        }
        Ok(AggregateStats {
            a: Array2::zeros((r, r)),
            b: Array2::zeros((r, d)),
            remainder: 0.0,
            t: 0,
            kappa1,
        })
    }

    pub fn atoms(&self) -> usize {
        self.a.nrows()
    }

    pub fn data_dim(&self) -> usize {
        self.b.ncols()
    }

    /// `A_t + κ₁I`, the Gram matrix actually minimized against.
    pub fn ridged_gram(&self) -> Array2<f64> {
        let mut g = self.a.clone();
        for i in 0..g.nrows() {
            g[[i, i]] += self.kappa1;
        }
        g
    }

    /// Folds in one code/data pair with weight `w_{t+1}`.
    pub fn update(
        &mut self,
        h: ArrayView2<f64>,
        x: ArrayView2<f64>,
        schedule: &WeightSchedule,
        coding: &CodingParams,
    ) -> Result<()> {
        let r = self.atoms();
        if h.nrows() != r || x.nrows() != self.data_dim() || h.ncols() != x.ncols() {
            return Err(Error::Dimension(format!(
                "code {}x{} and data {}x{} do not match aggregates with r={} d={}",
                h.nrows(),
                h.ncols(),
                x.nrows(),
                x.ncols(),
                r,
                self.data_dim()
            )));
        }
        let w = schedule.weight(self.t + 1);
        let hht = h.dot(&h.t());
        let hxt = h.dot(&x.t());
        self.a *= 1.0 - w;
        self.a.scaled_add(w, &hht);
        // keep A exactly symmetric
        for i in 0..r {
            for j in (i + 1)..r {
                let s = 0.5 * (self.a[[i, j]] + self.a[[j, i]]);
                self.a[[i, j]] = s;
                self.a[[j, i]] = s;
            }
        }
        self.b *= 1.0 - w;
        self.b.scaled_add(w, &hxt);

        let data_sq: f64 = x.iter().map(|v| v * v).sum();
        let l1: f64 = h.iter().map(|v| v.abs()).sum();
        let l2: f64 = h.iter().map(|v| v * v).sum();
        let fresh = data_sq + coding.lambda * l1 + 0.5 * coding.kappa2 * l2;
        self.remainder = (1.0 - w) * self.remainder + w * fresh;
        self.t += 1;
        Ok(())
    }

    /// Checks `‖A‖_F ≤ λ⁻²R⁴` and `‖B‖_F ≤ λ⁻¹R³` for a stream of radius `R`.
    pub fn within_bounds(&self, lambda: f64, radius: f64) -> bool {
        if lambda <= 0.0 {
            return true;
        }
        let slack = 1.0 + 1e-9;
        frobenius(self.a.view()) <= radius.powi(4) / (lambda * lambda) * slack
            && frobenius(self.b.view()) <= radius.powi(3) / lambda * slack
    }
}

pub(crate) fn frobenius(m: ArrayView2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn coding(lambda: f64) -> CodingParams {
        CodingParams::with_lambda(lambda)
    }

    #[test]
    fn first_step_overwrites() {
        let mut s = AggregateStats::new(2, 3, 0.0).unwrap();
        let h = array![[1.0, 2.0], [0.0, 1.0]];
        let x = array![[1.0, 0.0], [0.5, 0.5], [0.0, 2.0]];
        s.update(h.view(), x.view(), &WeightSchedule::balanced(), &coding(0.0))
            .unwrap();
        assert_eq!(s.a, h.dot(&h.t()));
        assert_eq!(s.b, h.dot(&x.t()));
        assert_eq!(s.t, 1);
    }

    #[test]
    fn zero_code_decays() {
        let mut s = AggregateStats::new(2, 2, 0.0).unwrap();
        let sched = WeightSchedule::new(0.9).unwrap();
        let h = array![[1.0], [1.0]];
        let x = array![[1.0], [2.0]];
        s.update(h.view(), x.view(), &sched, &coding(0.0)).unwrap();
        let (a0, b0) = (s.a.clone(), s.b.clone());
        s.update(Array2::zeros((2, 1)).view(), x.view(), &sched, &coding(0.0))
            .unwrap();
        let w = sched.weight(2);
        assert_eq!(s.a, &a0 * (1.0 - w));
        assert_eq!(s.b, &b0 * (1.0 - w));
    }

    #[test]
    fn balanced_weights_average_identical_terms() {
        let mut s = AggregateStats::new(2, 2, 0.0).unwrap();
        let h = array![[0.3, 1.0], [2.0, 0.5]];
        let x = array![[1.0, 0.25], [0.5, 0.75]];
        for _ in 0..37 {
            s.update(h.view(), x.view(), &WeightSchedule::balanced(), &coding(0.5))
                .unwrap();
        }
        let hht = h.dot(&h.t());
        for (a, e) in s.a.iter().zip(hht.iter()) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut s = AggregateStats::new(2, 3, 0.0).unwrap();
        let h = Array2::zeros((3, 1));
        let x = Array2::zeros((3, 1));
        assert!(s
            .update(h.view(), x.view(), &WeightSchedule::balanced(), &coding(1.0))
            .is_err());
    }

    #[test]
    fn history_weights_sum_to_one() {
        for beta in [0.8, 0.9, 1.0] {
            let sched = WeightSchedule::new(beta).unwrap();
            for t in 1..60 {
                let w = sched.history_weights(t);
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(w.iter().all(|&v| v >= 0.0));
            }
        }
        let w = WeightSchedule::balanced().history_weights(5);
        assert!(w.iter().all(|&v| (v - 0.2).abs() < 1e-15));
    }

    #[test]
    fn schedule_rejects_out_of_range_beta() {
        assert!(WeightSchedule::new(0.75).is_err());
        assert!(WeightSchedule::new(1.01).is_err());
        let s = WeightSchedule::new(0.8).unwrap();
        assert_eq!(s.weight(1), 1.0);
        assert!(s.weight(10) > s.weight(11));
    }
}
