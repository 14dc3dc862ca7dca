//! Dictionaries and the constrained quadratic dictionary update.
//!
//! The update minimizes `g̃(W) = tr(W (A + κ₁I) Wᵀ) − 2 tr(W B)` over each
//! convex piece `C_i` intersected with the ellipsoid
//! `E = {W : φ(W) ≤ 0}`, `φ(W) = tr((WA − Bᵀ)(W − W_prev)ᵀ)`, and keeps the
//! best piece. `E` is the `A`-ellipsoid whose diameter joins `W_prev` and the
//! unconstrained minimizer, so `W_prev` always lies on its boundary.

use log::debug;
use ndarray::{Array2, ArrayView2, Zip};
use rand::Rng;

use crate::error::{Error, Result};
use crate::omf::aggregates::AggregateStats;
use crate::omf::constraint::ConstraintSpec;

/// Membership tolerance when locating a dictionary inside a piece.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    w: Array2<f64>,
    constraint: ConstraintSpec,
    active_piece: usize,
}

impl Dictionary {
    pub fn new(w: Array2<f64>, constraint: ConstraintSpec) -> Result<Self> {
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dictionary"));
        }
        let active_piece = constraint.locate(w.view(), MEMBERSHIP_TOL).ok_or_else(|| {
            Error::InvalidParameter("dictionary lies outside every constraint piece".into())
        })?;
        Ok(Dictionary {
            w,
            constraint,
            active_piece,
        })
    }

    /// Entries i.i.d. uniform on `[0, 1]`, then projected onto the nearest piece.
    pub fn random<R: Rng + ?Sized>(
        d: usize,
        r: usize,
        constraint: ConstraintSpec,
        rng: &mut R,
    ) -> Result<Self> {
        if d == 0 || r == 0 {
            return Err(Error::InvalidParameter("dictionary dimensions must be positive".into()));
        }
        let raw = Array2::from_shape_fn((d, r), |_| rng.gen::<f64>());
        let mut best: Option<(f64, Array2<f64>, usize)> = None;
        for (i, piece) in constraint.pieces().iter().enumerate() {
            if !piece.is_nonempty(d * r) {
                continue;
            }
            let mut p = raw.clone();
            piece.project(&mut p);
            let dist: f64 = (&p - &raw).iter().map(|v| v * v).sum();
            if best.as_ref().is_none_or(|(bd, _, _)| dist < *bd) {
                best = Some((dist, p, i));
            }
        }
        let (_, w, active_piece) = best.ok_or_else(|| {
            Error::InvalidParameter(format!("no constraint piece admits a {d}x{r} matrix"))
        })?;
        Ok(Dictionary {
            w,
            constraint,
            active_piece,
        })
    }

    pub fn w(&self) -> ArrayView2<'_, f64> {
        self.w.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.w
    }

    pub fn constraint(&self) -> &ConstraintSpec {
        &self.constraint
    }

    pub fn active_piece(&self) -> usize {
        self.active_piece
    }

    pub fn data_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn atoms(&self) -> usize {
        self.w.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateParams {
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for UpdateParams {
    fn default() -> Self {
        UpdateParams {
            tol: 1e-6,
            max_sweeps: 100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct UpdateOutcome {
    pub dictionary: Dictionary,
    /// `g̃` at the returned dictionary.
    pub objective: f64,
    /// Whether the ellipsoid constraint cut the block-coordinate solution short.
    pub ellipsoid_active: bool,
    /// Pieces skipped because no feasible point of `C_i ∩ E` was found.
    pub skipped_pieces: Vec<usize>,
}

/// `tr(W G Wᵀ) − 2 tr(W B)`.
pub fn quadratic_objective(w: ArrayView2<f64>, gram: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    let wg = w.dot(&gram);
    let quad: f64 = Zip::from(&wg).and(&w).fold(0.0, |acc, &p, &q| acc + p * q);
    let cross: f64 = Zip::from(&w).and(&b.t()).fold(0.0, |acc, &p, &q| acc + p * q);
    quad - 2.0 * cross
}

/// `f̂_t(W) = tr(W (A_t + κ₁I) Wᵀ) − 2 tr(W B_t) + r_t`.
pub fn surrogate_loss(w: ArrayView2<f64>, stats: &AggregateStats) -> Result<f64> {
    check_dims(w, stats)?;
    Ok(quadratic_objective(w, stats.ridged_gram().view(), stats.b.view()) + stats.remainder)
}

/// `φ(W) = tr((W Ã − Bᵀ)(W − W_prev)ᵀ)` with `Ã = A + κ₁I`; the ellipsoid
/// is `φ ≤ 0`.
pub fn ellipsoid_gap(w: ArrayView2<f64>, w_prev: ArrayView2<f64>, stats: &AggregateStats) -> f64 {
    let grad = w.dot(&stats.ridged_gram()) - stats.b.t();
    Zip::from(&grad)
        .and(&w)
        .and(&w_prev)
        .fold(0.0, |acc, &g, &a, &p| acc + g * (a - p))
}

/// `g̃(W1) − g̃(W2) − tr((W1 − W2) Ã (W1 − W2)ᵀ)` with
/// `g̃(W) = tr(W Ã Wᵀ) − 2 tr(W B)` and `Ã = A + κ₁I`.
///
/// Equals `−2 φ(W2)` for `W_prev = W1`, so it is nonnegative whenever `W2`
/// satisfies the ellipsoid constraint built from `W1`.
pub fn growth_check(w1: ArrayView2<f64>, w2: ArrayView2<f64>, stats: &AggregateStats) -> Result<f64> {
    check_dims(w1, stats)?;
    check_dims(w2, stats)?;
    let gram = stats.ridged_gram();
    let a = gram.view();
    let b = stats.b.view();
    let delta = &w1 - &w2;
    let quad: f64 = Zip::from(&delta.dot(&a)).and(&delta).fold(0.0, |acc, &p, &q| acc + p * q);
    Ok(quadratic_objective(w1, a, b) - quadratic_objective(w2, a, b) - quad)
}

fn check_dims(w: ArrayView2<f64>, stats: &AggregateStats) -> Result<()> {
    if w.ncols() != stats.atoms() || w.nrows() != stats.data_dim() {
        return Err(Error::Dimension(format!(
            "dictionary is {}x{}, aggregates expect {}x{}",
            w.nrows(),
            w.ncols(),
            stats.data_dim(),
            stats.atoms()
        )));
    }
    Ok(())
}

/// Minimizes `g̃` over `C ∩ E` starting from `prev`.
///
/// Each piece is handled in two stages: projected block coordinate descent on
/// the columns (step `1/(Ã_jj + 1)`) inside the piece, then, if the result
/// violates the ellipsoid, a pull-back along the segment from a feasible
/// anchor (`W_prev` for its own piece) to the largest feasible point. `g̃` is
/// convex, so the pulled-back point is never worse than the anchor.
pub fn dictionary_update(
    prev: &Dictionary,
    stats: &AggregateStats,
    params: UpdateParams,
) -> Result<UpdateOutcome> {
    check_dims(prev.w(), stats)?;
    let gram = stats.ridged_gram();
    let bt = stats.b.t().to_owned();
    let w_prev = prev.w.view();

    let mut best: Option<(f64, Array2<f64>, usize, bool)> = None;
    let mut skipped = Vec::new();

    for (i, piece) in prev.constraint.pieces().iter().enumerate() {
        let mut start = prev.w.clone();
        let own_piece = i == prev.active_piece;
        if !own_piece {
            if !piece.is_nonempty(start.len()) {
                skipped.push(i);
                continue;
            }
            piece.project(&mut start);
        }

        let solved = block_coordinate_descent(&start, &gram, &bt, piece, params);
        let (candidate, truncated) = if ellipsoid_gap(solved.view(), w_prev, stats) <= 0.0 {
            (solved, false)
        } else {
            let anchor = if own_piece {
                Some(prev.w.clone())
            } else if ellipsoid_gap(start.view(), w_prev, stats) <= 0.0 {
                Some(start)
            } else {
                None
            };
            match anchor {
                Some(anchor) => (pull_back(&anchor, &solved, w_prev, stats), true),
                None => {
                    debug!("piece {i}: no feasible anchor in C_i ∩ E, skipped");
                    skipped.push(i);
                    continue;
                }
            }
        };

        let value = quadratic_objective(candidate.view(), gram.view(), stats.b.view());
        // strict comparison: lowest index wins ties
        if best.as_ref().is_none_or(|(v, ..)| value < *v) {
            best = Some((value, candidate, i, truncated));
        }
    }

    match best {
        Some((objective, w, active_piece, ellipsoid_active)) => Ok(UpdateOutcome {
            dictionary: Dictionary {
                w,
                constraint: prev.constraint.clone(),
                active_piece,
            },
            objective,
            ellipsoid_active,
            skipped_pieces: skipped,
        }),
        None => {
            log::warn!("dictionary update: every piece misses the ellipsoid; keeping W_prev");
            Ok(UpdateOutcome {
                dictionary: prev.clone(),
                objective: quadratic_objective(w_prev, gram.view(), stats.b.view()),
                ellipsoid_active: false,
                skipped_pieces: skipped,
            })
        }
    }
}

fn block_coordinate_descent(
    start: &Array2<f64>,
    gram: &Array2<f64>,
    bt: &Array2<f64>,
    piece: &crate::omf::constraint::Piece,
    params: UpdateParams,
) -> Array2<f64> {
    let (d, r) = start.dim();
    let mut w = start.clone();
    let mut sq_norm: f64 = w.iter().map(|v| v * v).sum();
    let mut cand = vec![0.0; d];
    for _ in 0..params.max_sweeps {
        let mut change = 0.0;
        for j in 0..r {
            let denom = gram[[j, j]] + 1.0;
            let gcol = gram.column(j);
            let mut col_sq = 0.0;
            for (row, c) in cand.iter_mut().enumerate() {
                let wrow = w.row(row);
                let grad = wrow.dot(&gcol) - bt[[row, j]];
                let cur = w[[row, j]];
                col_sq += cur * cur;
                *c = cur - grad / denom;
            }
            let budget = if piece.radius.is_finite() {
                (piece.radius * piece.radius - (sq_norm - col_sq)).max(0.0).sqrt()
            } else {
                f64::INFINITY
            };
            piece.project_slice(&mut cand, budget);
            let mut new_sq = 0.0;
            for (row, &c) in cand.iter().enumerate() {
                let cur = w[[row, j]];
                change += (c - cur) * (c - cur);
                new_sq += c * c;
                w[[row, j]] = c;
            }
            sq_norm += new_sq - col_sq;
        }
        if change.sqrt() < params.tol {
            break;
        }
    }
    w
}

/// Largest `α ∈ [0, 1]` with `φ(anchor + α (target − anchor)) ≤ 0`, assuming
/// `φ(anchor) ≤ 0`. `φ` is a convex quadratic along the segment.
fn pull_back(
    anchor: &Array2<f64>,
    target: &Array2<f64>,
    w_prev: ArrayView2<f64>,
    stats: &AggregateStats,
) -> Array2<f64> {
    let gram = stats.ridged_gram();
    let dir = target - anchor;
    let da = dir.dot(&gram);
    let qa: f64 = Zip::from(&da).and(&dir).fold(0.0, |acc, &p, &q| acc + p * q);
    let fa = anchor.dot(&gram) - stats.b.t();
    let offset = anchor - &w_prev;
    let qb: f64 = Zip::from(&fa).and(&dir).fold(0.0, |acc, &p, &q| acc + p * q)
        + Zip::from(&da).and(&offset).fold(0.0, |acc, &p, &q| acc + p * q);
    let qc = ellipsoid_gap(anchor.view(), w_prev, stats).min(0.0);

    let mut alpha = if qa > 0.0 {
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
        ((-qb + disc.sqrt()) / (2.0 * qa)).clamp(0.0, 1.0)
    } else if qb > 0.0 {
        (-qc / qb).clamp(0.0, 1.0)
    } else {
        1.0
    };

    let at = |a: f64| anchor + &(&dir * a);
    let mut point = at(alpha);
    if ellipsoid_gap(point.view(), w_prev, stats) > 0.0 {
        // rounding pushed the root outside; bisect on [0, alpha]
        let (mut lo, mut hi) = (0.0, alpha);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if ellipsoid_gap(at(mid).view(), w_prev, stats) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        alpha = lo;
        point = at(alpha);
    }
    point
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::omf::constraint::Piece;
    use ndarray::array;

    fn stats_from(a: Array2<f64>, b: Array2<f64>, kappa1: f64) -> AggregateStats {
        let mut s = AggregateStats::new(a.nrows(), b.ncols(), kappa1).unwrap();
        s.a = a;
        s.b = b;
        s
    }

    #[test]
    fn scalar_boundary_clamp() {
        let c = ConstraintSpec::single(Piece::boxed(0.0, 2.0));
        let prev = Dictionary::new(array![[0.0]], c).unwrap();
        let stats = stats_from(array![[1.0]], array![[3.0]], 0.0);
        let out = dictionary_update(&prev, &stats, UpdateParams::default()).unwrap();
        assert!((out.dictionary.w()[[0, 0]] - 2.0).abs() < 1e-12);
        // g(0) − g(2) − (0 − 2)² = 0 − (4 − 12) − 4 = 4
        let margin = growth_check(prev.w(), out.dictionary.w(), &stats).unwrap();
        assert!((margin - 4.0).abs() < 1e-12);
    }

    #[test]
    fn interior_minimum_is_reached() {
        let target = array![[0.3, 0.6], [0.2, 0.1], [0.5, 0.4]];
        let c = ConstraintSpec::single(Piece::nonnegative_ball(10.0));
        let prev = Dictionary::new(Array2::from_elem((3, 2), 0.5), c).unwrap();
        let stats = stats_from(Array2::eye(2), target.t().to_owned(), 0.0);
        let params = UpdateParams {
            tol: 1e-12,
            max_sweeps: 1000,
        };
        let out = dictionary_update(&prev, &stats, params).unwrap();
        for (a, b) in out.dictionary.w().iter().zip(target.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn ridge_does_not_trigger_the_ellipsoid_on_a_convex_piece() {
        // Ridged minimum is B/(A + κ₁) = 2/1.5; the unridged ellipsoid would
        // forbid moving from 2 towards it.
        let c = ConstraintSpec::single(Piece::nonnegative_ball(10.0));
        let prev = Dictionary::new(array![[2.0]], c).unwrap();
        let stats = stats_from(array![[1.0]], array![[2.0]], 0.5);
        let params = UpdateParams {
            tol: 1e-12,
            max_sweeps: 1000,
        };
        let out = dictionary_update(&prev, &stats, params).unwrap();
        assert!(!out.ellipsoid_active);
        assert!((out.dictionary.w()[[0, 0]] - 2.0 / 1.5).abs() < 1e-9);
        assert!(growth_check(prev.w(), out.dictionary.w(), &stats).unwrap() >= -1e-12);
    }

    #[test]
    fn surrogate_trivial_cases() {
        let mut stats = stats_from(Array2::eye(2), Array2::zeros((2, 3)), 0.0);
        let w = array![[1.0, 2.0], [0.5, 0.0], [0.0, 1.0]];
        assert!((surrogate_loss(w.view(), &stats).unwrap() - 6.25).abs() < 1e-12);
        stats.remainder = 1.5;
        assert_eq!(surrogate_loss(Array2::zeros((3, 2)).view(), &stats).unwrap(), 1.5);
        assert!(surrogate_loss(Array2::zeros((2, 2)).view(), &stats).is_err());
    }

    #[test]
    fn growth_of_identical_dictionaries_is_zero() {
        let stats = stats_from(array![[2.0, 0.5], [0.5, 1.0]], array![[1.0, 0.0], [0.3, 2.0]], 0.0);
        let w = array![[0.4, 0.1], [0.2, 0.9]];
        assert_eq!(growth_check(w.view(), w.view(), &stats).unwrap(), 0.0);
    }

    #[test]
    fn foreign_piece_wins_when_it_is_better() {
        // Minimum of (w − 3)² lies in the second box.
        let c = ConstraintSpec::new(vec![Piece::boxed(0.0, 1.0), Piece::boxed(2.0, 4.0)]).unwrap();
        let prev = Dictionary::new(array![[0.5]], c).unwrap();
        let stats = stats_from(array![[1.0]], array![[3.0]], 0.0);
        let out = dictionary_update(&prev, &stats, UpdateParams::default()).unwrap();
        assert_eq!(out.dictionary.active_piece(), 1);
        assert!(ellipsoid_gap(out.dictionary.w(), prev.w(), &stats) <= 0.0);
        assert!((out.dictionary.w()[[0, 0]] - 3.0).abs() < 1e-5);
    }

    #[test]
    fn unreachable_piece_is_skipped() {
        // E = segment [0.5, 1.5]; the box [5, 6] misses it.
        let c = ConstraintSpec::new(vec![Piece::boxed(0.0, 2.0), Piece::boxed(5.0, 6.0)]).unwrap();
        let prev = Dictionary::new(array![[0.5]], c).unwrap();
        let stats = stats_from(array![[1.0]], array![[1.5]], 0.0);
        let out = dictionary_update(&prev, &stats, UpdateParams::default()).unwrap();
        assert_eq!(out.skipped_pieces, vec![1]);
        assert_eq!(out.dictionary.active_piece(), 0);
    }

    #[test]
    fn piece_missing_the_ellipsoid_loses() {
        // g(w) = w² with pieces at ±[1, 2]; E = [0, 1.5] only meets the positive box.
        let c = ConstraintSpec::new(vec![Piece::boxed(-2.0, -1.0), Piece::boxed(1.0, 2.0)]).unwrap();
        let prev = Dictionary::new(array![[1.5]], c).unwrap();
        let stats = stats_from(array![[1.0]], array![[0.0]], 0.0);
        let out = dictionary_update(&prev, &stats, UpdateParams::default()).unwrap();
        // Piece 0 starts at −1 whose φ = (−1)(−1 − 1.5) > 0, so it has no anchor;
        // piece 1 then wins at w = 1.
        assert_eq!(out.dictionary.active_piece(), 1);
        assert!((out.dictionary.w()[[0, 0]] - 1.0).abs() < 1e-9);
    }
}
