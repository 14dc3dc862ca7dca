//! Nonnegative elastic-net sparse coding by projected gradient descent.
//!
//! Solves `min_{H ≥ 0} ‖X − WH‖²_F + λ‖H‖₁ + (κ₂/2)‖H‖²_F`. Columns of `H`
//! are independent subproblems and are solved one at a time, each starting
//! from zero, so the result for a column never depends on the rest of the
//! batch.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodingParams {
    pub lambda: f64,
    pub kappa2: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CodingParams {
    fn default() -> Self {
        CodingParams {
            lambda: 1.0,
            kappa2: 0.0,
            tol: 1e-6,
            max_iter: 200,
        }
    }
}

impl CodingParams {
    pub fn with_lambda(lambda: f64) -> Self {
        CodingParams {
            lambda,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda = {}", self.lambda)));
        }
        if !(self.kappa2 >= 0.0 && self.kappa2.is_finite()) {
            return Err(Error::InvalidParameter(format!("kappa2 = {}", self.kappa2)));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidParameter(
                "coding tolerance and iteration cap must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A code matrix `H` (r×n, entrywise nonnegative).
#[derive(Debug, Clone, PartialEq)]
pub struct Code {
    pub h: Array2<f64>,
    /// Largest number of gradient steps taken by any column.
    pub iterations: usize,
}

/// Sparse coder bound to a fixed dictionary; caches `WᵀW` and the step size.
#[derive(Debug, Clone)]
pub struct SparseCoder {
    w: Array2<f64>,
    gram: Array2<f64>,
    step: f64,
    params: CodingParams,
}

impl SparseCoder {
    pub fn new(w: ArrayView2<f64>, params: CodingParams) -> Result<Self> {
        params.validate()?;
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dictionary"));
        }
        let gram = w.t().dot(&w);
        let trace = gram.diag().sum();
        if trace <= 0.0 {
            return Err(Error::ZeroDictionary);
        }
        // Lipschitz constant of the smooth part is 2λ_max(WᵀW) + κ₂; tr(WᵀW)
        // bounds λ_max from above and the power estimate tightens it.
        let lmax = largest_eigenvalue(gram.view()).map_or(trace, |e| (1.05 * e).min(trace));
        let step = 1.0 / (2.0 * lmax + params.kappa2);
        Ok(SparseCoder {
            w: w.to_owned(),
            gram,
            step,
            params,
        })
    }

    pub fn params(&self) -> &CodingParams {
        &self.params
    }

    pub fn dictionary(&self) -> ArrayView2<'_, f64> {
        self.w.view()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn code(&self, x: ArrayView2<f64>) -> Result<Code> {
        if x.nrows() != self.w.nrows() {
            return Err(Error::Dimension(format!(
                "data has {} rows, dictionary has {}",
                x.nrows(),
                self.w.nrows()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("data matrix"));
        }
        let r = self.w.ncols();
        let mut h = Array2::zeros((r, x.ncols()));
        let mut iterations = 0;
        for (j, col) in x.axis_iter(Axis(1)).enumerate() {
            let (hc, it) = self.code_column(col);
            h.column_mut(j).assign(&hc);
            iterations = iterations.max(it);
        }
        Ok(Code { h, iterations })
    }

    fn code_column(&self, x: ArrayView1<f64>) -> (Array1<f64>, usize) {
        let CodingParams {
            lambda,
            kappa2,
            tol,
            max_iter,
        } = self.params;
        let b = self.w.t().dot(&x);
        let r = b.len();
        let mut h = Array1::<f64>::zeros(r);
        let mut next = Array1::<f64>::zeros(r);
        let mut it = 0;
        while it < max_iter {
            it += 1;
            let gh = self.gram.dot(&h);
            let mut diff = 0.0;
            for i in 0..r {
                let grad = 2.0 * (gh[i] - b[i]) + lambda + kappa2 * h[i];
                let v = (h[i] - self.step * grad).max(0.0);
                diff += (v - h[i]) * (v - h[i]);
                next[i] = v;
            }
            std::mem::swap(&mut h, &mut next);
            if diff.sqrt() < tol {
                break;
            }
        }
        (h, it)
    }
}

/// One-shot convenience wrapper around [`SparseCoder`].
pub fn sparse_code(x: ArrayView2<f64>, w: ArrayView2<f64>, params: CodingParams) -> Result<Code> {
    SparseCoder::new(w, params)?.code(x)
}

/// `‖X − WH‖²_F + λ‖H‖₁ + (κ₂/2)‖H‖²_F`.
pub fn coding_objective(
    x: ArrayView2<f64>,
    w: ArrayView2<f64>,
    h: ArrayView2<f64>,
    lambda: f64,
    kappa2: f64,
) -> f64 {
    let resid = &x - &w.dot(&h);
    let fit: f64 = resid.iter().map(|v| v * v).sum();
    let l1: f64 = h.iter().map(|v| v.abs()).sum();
    let l2: f64 = h.iter().map(|v| v * v).sum();
    fit + lambda * l1 + 0.5 * kappa2 * l2
}

/// Norm of the projected gradient of the coding objective at `H`; zero
/// exactly at the constrained minimizer.
pub fn kkt_residual(
    x: ArrayView2<f64>,
    w: ArrayView2<f64>,
    h: ArrayView2<f64>,
    lambda: f64,
    kappa2: f64,
) -> f64 {
    let grad = (w.t().dot(&w).dot(&h) - w.t().dot(&x)) * 2.0 + &h * kappa2 + lambda;
    grad.iter()
        .zip(h.iter())
        .map(|(&g, &hv)| if hv > 0.0 { g } else { g.min(0.0) })
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt()
}

/// Rayleigh quotient after power iteration on a symmetric PSD matrix.
fn largest_eigenvalue(m: ArrayView2<f64>) -> Option<f64> {
    let n = m.nrows();
    let mut v = Array1::from_elem(n, 1.0 / (n as f64).sqrt());
    let mut rq = 0.0;
    for _ in 0..100 {
        let mv = m.dot(&v);
        let norm = mv.dot(&mv).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        rq = v.dot(&mv);
        v = mv / norm;
    }
    let mv = m.dot(&v);
    rq = rq.max(v.dot(&mv));
    (rq > 0.0).then_some(rq)
}
