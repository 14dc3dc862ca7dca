//! Two-dimensional Ising model on an `N×N` torus with a single-site Gibbs
//! sampler.

use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IsingConfig {
    n: usize,
    temperature: f64,
    spins: Vec<i8>,
}

impl IsingConfig {
    /// Each site +1 or −1 independently with probability 1/2.
    pub fn random<R: Rng + ?Sized>(n: usize, temperature: f64, rng: &mut R) -> Result<Self> {
        Self::check(n, temperature)?;
        let spins = (0..n * n)
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect();
        Ok(IsingConfig {
            n,
            temperature,
            spins,
        })
    }

    pub fn uniform(n: usize, temperature: f64, spin: i8) -> Result<Self> {
        Self::check(n, temperature)?;
        if spin != 1 && spin != -1 {
            return Err(Error::InvalidParameter(format!("spin {spin} not in {{-1, +1}}")));
        }
        Ok(IsingConfig {
            n,
            temperature,
            spins: vec![spin; n * n],
        })
    }

    pub fn from_spins(n: usize, temperature: f64, spins: Vec<i8>) -> Result<Self> {
        Self::check(n, temperature)?;
        if spins.len() != n * n || spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("spins must be n*n values in {-1, +1}".into()));
        }
        Ok(IsingConfig {
            n,
            temperature,
            spins,
        })
    }

    fn check(n: usize, temperature: f64) -> Result<()> {
        // n = 1 would make a site its own neighbour
        if n < 2 {
            return Err(Error::InvalidParameter("lattice side must be at least 2".into()));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!("temperature {temperature}")));
        }
        Ok(())
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn spin(&self, row: usize, col: usize) -> i8 {
        self.spins[(row % self.n) * self.n + col % self.n]
    }

    /// Sum of the four periodic neighbours of `(row, col)`.
    pub fn neighbor_sum(&self, row: usize, col: usize) -> i32 {
        let n = self.n;
        let up = (row + n - 1) % n;
        let down = (row + 1) % n;
        let left = (col + n - 1) % n;
        let right = (col + 1) % n;
        self.spin(up, col) as i32
            + self.spin(down, col) as i32
            + self.spin(row, left) as i32
            + self.spin(row, right) as i32
    }

    /// `Σ_v x(v) (x(right v) + x(down v))`, the negative interaction energy.
    pub fn alignment(&self) -> i64 {
        let n = self.n;
        let mut acc = 0i64;
        for r in 0..n {
            for c in 0..n {
                let s = self.spin(r, c) as i64;
                acc += s * (self.spin(r, (c + 1) % n) as i64 + self.spin((r + 1) % n, c) as i64);
            }
        }
        acc
    }

    /// Resamples one uniformly chosen site from its conditional law.
    /// Returns the site index.
    pub fn gibbs_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let site = rng.gen_range(0..self.n * self.n);
        let (row, col) = (site / self.n, site % self.n);
        let p = prob_spin_up(self.neighbor_sum(row, col), self.temperature);
        self.spins[site] = if rng.gen::<f64>() < p { 1 } else { -1 };
        site
    }

    /// Spins as a row-major `N×N` matrix.
    pub fn to_matrix(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.n, self.n), |(r, c)| self.spin(r, c) as f64)
    }

    /// Small lattices only: the configuration as an integer with bit `i` set
    /// when site `i` is +1.
    pub fn state_index(&self) -> usize {
        assert!(self.spins.len() < usize::BITS as usize);
        self.spins
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }
}

/// `π(x⁺) / (π(x⁺) + π(x⁻)) = 1 / (1 + e^{−2S/T})` for neighbour sum `S`.
pub fn prob_spin_up(neighbor_sum: i32, temperature: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * neighbor_sum as f64 / temperature).exp())
}

/// Spin to data value, `s ↦ (s + 1) / 2`.
pub fn spin_to_unit(s: i8) -> f64 {
    (s as f64 + 1.0) / 2.0
}

/// Inverse of [`spin_to_unit`] on `{0, 1}`.
pub fn unit_to_spin(v: f64) -> i8 {
    if v >= 0.5 {
        1
    } else {
        -1
    }
}

/// `k²×count` matrix of flattened `k×k` spin patches at uniformly random
/// corners (periodic wrap), mapped to `{0, 1}`.
pub fn spin_patch_minibatch<R: Rng + ?Sized>(
    config: &IsingConfig,
    k: usize,
    count: usize,
    rng: &mut R,
) -> Result<Array2<f64>> {
    let n = config.side();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "patch size {k} must lie in 1..={n}"
        )));
    }
    let mut out = Array2::zeros((k * k, count));
    for j in 0..count {
        let r0 = rng.gen_range(0..n);
        let c0 = rng.gen_range(0..n);
        for a in 0..k {
            for b in 0..k {
                out[[a * k + b, j]] = spin_to_unit(config.spin(r0 + a, c0 + b));
            }
        }
    }
    Ok(out)
}
