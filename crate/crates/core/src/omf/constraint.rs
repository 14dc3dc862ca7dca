//! Dictionary constraint sets.
//!
//! The feasible set is a disjoint union of convex pieces. Each piece is an
//! entrywise box intersected with a Frobenius ball centred at the origin,
//! which covers the nonnegative ball `{W ≥ 0, ‖W‖_F ≤ R}` used for network
//! dictionaries as well as families of disjoint boxes.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Bisection steps for the box ∩ ball projection multiplier.
const PROJECTION_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lower: f64,
    pub upper: f64,
    pub radius: f64,
}

impl Piece {
    pub fn new(lower: f64, upper: f64, radius: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || radius.is_nan() || lower > upper || radius < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "piece needs lower <= upper and radius >= 0 (got {lower}, {upper}, {radius})"
            )));
        }
        Ok(Piece { lower, upper, radius })
    }

    /// `{W ≥ 0, ‖W‖_F ≤ radius}`.
    pub fn nonnegative_ball(radius: f64) -> Self {
        Piece {
            lower: 0.0,
            upper: f64::INFINITY,
            radius,
        }
    }

    /// Plain entrywise box with no norm bound.
    pub fn boxed(lower: f64, upper: f64) -> Self {
        Piece {
            lower,
            upper,
            radius: f64::INFINITY,
        }
    }

    /// Entry of the piece closest to zero.
    fn min_norm_entry(&self) -> f64 {
        0.0f64.clamp(self.lower, self.upper)
    }

    /// Whether a matrix with `len` entries can lie in this piece.
    pub fn is_nonempty(&self, len: usize) -> bool {
        let e = self.min_norm_entry();
        (e * e * len as f64).sqrt() <= self.radius
    }

    pub fn contains(&self, w: ArrayView2<f64>, tol: f64) -> bool {
        let mut sq = 0.0;
        for &v in w.iter() {
            if !v.is_finite() || v < self.lower - tol || v > self.upper + tol {
                return false;
            }
            sq += v * v;
        }
        sq.sqrt() <= self.radius * (1.0 + tol) + tol
    }

    /// Euclidean projection of `values` onto `{lower ≤ x ≤ upper, ‖x‖ ≤ radius}`.
    ///
    /// The minimizer has the form `clamp(y / (1 + μ))` for a multiplier
    /// `μ ≥ 0`; the norm of that point is nonincreasing in `μ`, so `μ` is
    /// found by bisection whenever the plain clamp leaves the ball.
    pub fn project_slice(&self, values: &mut [f64], radius: f64) {
        let clamp = |v: f64, scale: f64| (v / scale).clamp(self.lower, self.upper);
        let norm_at = |ys: &[f64], scale: f64| -> f64 {
            ys.iter().map(|&v| clamp(v, scale).powi(2)).sum::<f64>().sqrt()
        };

        if norm_at(values, 1.0) <= radius {
            for v in values.iter_mut() {
                *v = clamp(*v, 1.0);
            }
            return;
        }
        if norm_at(values, f64::INFINITY) > radius {
            // Empty intersection: fall back to the point of the box nearest zero.
            let e = self.min_norm_entry();
            values.iter_mut().for_each(|v| *v = e);
            return;
        }

        let mut lo = 1.0f64;
        let mut hi = 2.0f64;
        while norm_at(values, hi) > radius {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                break;
            }
        }
        for _ in 0..PROJECTION_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if norm_at(values, mid) > radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        for v in values.iter_mut() {
            *v = clamp(*v, hi);
        }
    }

    pub fn project(&self, w: &mut Array2<f64>) {
        match w.as_slice_mut() {
            Some(s) => self.project_slice(s, self.radius),
            None => {
                let mut buf: Vec<f64> = w.iter().copied().collect();
                self.project_slice(&mut buf, self.radius);
                for (dst, src) in w.iter_mut().zip(buf) {
                    *dst = src;
                }
            }
        }
    }
}

/// Disjoint union of convex pieces `C = C_1 ⊔ … ⊔ C_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec {
    pieces: Vec<Piece>,
}

impl ConstraintSpec {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidParameter(
                "constraint needs at least one piece".into(),
            ));
        }
        Ok(ConstraintSpec { pieces })
    }

    pub fn single(piece: Piece) -> Self {
        ConstraintSpec {
            pieces: vec![piece],
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn is_convex(&self) -> bool {
        self.pieces.len() == 1
    }

    /// Index of the first piece containing `w`.
    pub fn locate(&self, w: ArrayView2<f64>, tol: f64) -> Option<usize> {
        self.pieces.iter().position(|p| p.contains(w, tol))
    }
}

impl Default for ConstraintSpec {
    fn default() -> Self {
        ConstraintSpec::single(Piece::nonnegative_ball(f64::INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn nonnegative_ball_projection_is_clamp_then_rescale() {
        let p = Piece::nonnegative_ball(1.0);
        let mut v = vec![3.0, -1.0, 4.0];
        p.project_slice(&mut v, 1.0);
        assert!((v[0] - 0.6).abs() < 1e-12);
        assert_eq!(v[1], 0.0);
        assert!((v[2] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn interior_points_are_fixed() {
        let p = Piece::new(-1.0, 1.0, 10.0).unwrap();
        let mut v = vec![0.5, -0.25];
        p.project_slice(&mut v, 10.0);
        assert_eq!(v, vec![0.5, -0.25]);
    }

    #[test]
    fn box_projection_with_positive_lower_bound() {
        let p = Piece::boxed(2.0, 3.0);
        let mut w = array![[0.0, 5.0], [2.5, -1.0]];
        p.project(&mut w);
        assert_eq!(w, array![[2.0, 3.0], [2.5, 2.0]]);
        assert!(p.contains(w.view(), 0.0));
    }

    #[test]
    fn box_and_ball_projection_satisfies_kkt() {
        // Projection onto box ∩ ball: result is feasible and no feasible
        // point on a grid is closer to y.
        let p = Piece::new(0.0, 0.9, 1.0).unwrap();
        let y = [1.5, 0.7];
        let mut x = y.to_vec();
        p.project_slice(&mut x, 1.0);
        let dist = |a: f64, b: f64| (a - y[0]).powi(2) + (b - y[1]).powi(2);
        let best = dist(x[0], x[1]);
        assert!(x[0] * x[0] + x[1] * x[1] <= 1.0 + 1e-12);
        let n = 400;
        for i in 0..=n {
            for j in 0..=n {
                let a = 0.9 * i as f64 / n as f64;
                let b = 0.9 * j as f64 / n as f64;
                if a * a + b * b <= 1.0 {
                    assert!(dist(a, b) >= best - 1e-9);
                }
            }
        }
    }

    #[test]
    fn locate_finds_first_piece() {
        let c = ConstraintSpec::new(vec![Piece::boxed(0.0, 1.0), Piece::boxed(2.0, 3.0)]).unwrap();
        assert_eq!(c.locate(array![[0.5]].view(), 1e-12), Some(0));
        assert_eq!(c.locate(array![[2.5]].view(), 1e-12), Some(1));
        assert_eq!(c.locate(array![[1.5]].view(), 1e-12), None);
        assert!(!c.is_convex());
    }

    #[test]
    fn empty_constraint_rejected() {
        assert!(ConstraintSpec::new(vec![]).is_err());
        assert!(Piece::new(1.0, 0.0, 1.0).is_err());
    }
}
