//! Full conformal prediction intervals.
//!
//! For a covariate point of interest and a candidate outcome y', the model
//! is refit on the data augmented with (x, y') and the candidate's absolute
//! fitted residual is ranked against the n observed ones:
//!
//! ```text
//! pi(y') = ( 1 + #{ i : r_i <= |y' - phi(x)' w| } ) / (n + 1)
//! ```
//!
//! Low scores mean high conformity. Sweeping y' over a grid produces a
//! score curve; the beta-level prediction set keeps the grid points with
//! rank at most ceil(beta * (n+1)). The point prediction is the score
//! minimizer.
//!
//! The refits reuse the base fit: the Gram update for (x, y') is the same
//! for every y' and is applied once, each grid point only shifts the cross
//! moments and outcome energy (O(p)), and coordinate descent is
//! warm-started from the base weights. Grid points are independent given
//! the base fit, so the loop is data-parallel.

use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::features::FeatureVector;
use crate::solver::{self, FitOptions, PenaltyWeights, SuffStats};

/// Strictly increasing candidate outcomes spanning beyond the observed
/// range.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeGrid {
    points: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl OutcomeGrid {
    /// Uniform grid of `size` points over the observed outcome range
    /// widened by `margin` times the range on each side. A degenerate range
    /// falls back to one unit on each side.
    pub fn from_outcomes(outcomes: &[f64], size: usize, margin: f64) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if size < 2 {
            return Err(Error::InvalidArgument("grid size must be >= 2".into()));
        }
        let y_min = outcomes.iter().cloned().fold(f64::INFINITY, f64::min);
        let y_max = outcomes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !y_min.is_finite() || !y_max.is_finite() {
            return Err(Error::InvalidArgument("non-finite outcome".into()));
        }
        let range = y_max - y_min;
        let (lo, hi) = if range == 0.0 {
            (y_min - 1.0, y_max + 1.0)
        } else {
            (y_min - margin * range, y_max + margin * range)
        };
        let step = (hi - lo) / (size - 1) as f64;
        let points = (0..size).map(|i| lo + step * i as f64).collect();
        Ok(Self { points, lo, hi })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points.len() - 1) as f64
    }
}

/// One exposure's encoded dataset: regressor vectors and outcomes.
#[derive(Debug, Clone, Default)]
pub struct EncodedData {
    pub features: Vec<FeatureVector>,
    pub outcomes: Vec<f64>,
}

impl EncodedData {
    pub fn push(&mut self, phi: FeatureVector, y: f64) {
        self.features.push(phi);
        self.outcomes.push(y);
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

/// A converged square-root-lasso fit of one exposure dataset, bundled with
/// the statistics and penalties it was fit against.
#[derive(Debug, Clone)]
pub struct BaseFit {
    pub stats: SuffStats,
    pub penalties: PenaltyWeights,
    pub weights: Vec<f64>,
    pub cost: f64,
    pub converged: bool,
}

impl BaseFit {
    /// Fits from all-zero initial weights.
    pub fn from_stats(stats: SuffStats, opts: &FitOptions) -> Result<Self> {
        let penalties = PenaltyWeights::from_stats(&stats);
        let init = vec![0.0; stats.dim()];
        let res = solver::fit(&stats, &penalties, &init, opts)?;
        Ok(Self {
            stats,
            penalties,
            weights: res.weights,
            cost: res.cost,
            converged: res.converged,
        })
    }

    pub fn from_data(data: &EncodedData, p: usize, opts: &FitOptions) -> Result<Self> {
        let stats =
            SuffStats::from_samples(p, data.features.iter().zip(data.outcomes.iter().copied()))?;
        Self::from_stats(stats, opts)
    }
}

/// Conformity rank of a trial residual among fitted residuals: 1 plus the
/// number of fitted residuals at or below it (ties count, which is the
/// conservative direction).
pub(crate) fn rank_count(fitted: &[f64], trial: f64) -> u32 {
    1 + fitted.iter().filter(|r| **r <= trial).count() as u32
}

/// Score curve of one exposure at one covariate point.
#[derive(Debug, Clone)]
pub struct ConformalScores {
    grid: OutcomeGrid,
    /// Integer rank (n+1)*pi per grid point, each in 1..=n+1.
    ranks: Vec<u32>,
    /// Model prediction phi(x)' w(y') per grid point (diagnostic).
    prediction_at: Vec<f64>,
    /// Size of the exposure dataset the curve was computed from.
    n: usize,
}

impl ConformalScores {
    pub(crate) fn from_ranks(
        grid: OutcomeGrid,
        ranks: Vec<u32>,
        prediction_at: Vec<f64>,
        n: usize,
    ) -> Self {
        debug_assert_eq!(grid.len(), ranks.len());
        Self {
            grid,
            ranks,
            prediction_at,
            n,
        }
    }

    pub fn grid(&self) -> &OutcomeGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Integer ranks (n+1)*pi(y').
    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    /// The score curve pi(y'), each value in [1/(n+1), 1].
    pub fn pi(&self) -> Vec<f64> {
        let denom = (self.n + 1) as f64;
        self.ranks.iter().map(|&k| k as f64 / denom).collect()
    }

    pub fn prediction_at(&self) -> &[f64] {
        &self.prediction_at
    }

    /// The smallest coverage level at which each grid point enters the
    /// prediction set: b(y') = pi(y') - 1/(n+1), clipped to [0, 1]. A point
    /// is in the beta-level set exactly when beta > b(y').
    pub fn min_beta_curve(&self) -> Vec<f64> {
        let denom = (self.n + 1) as f64;
        self.ranks
            .iter()
            .map(|&k| ((k as f64 - 1.0) / denom).clamp(0.0, 1.0))
            .collect()
    }

    /// Midpoint of the most-conforming plateau: the contiguous run of
    /// global rank minimizers containing the earliest one.
    pub fn point_prediction(&self) -> f64 {
        let k_min = *self.ranks.iter().min().expect("nonempty grid");
        let start = self
            .ranks
            .iter()
            .position(|&k| k == k_min)
            .expect("minimum exists");
        let mut end = start;
        while end + 1 < self.ranks.len() && self.ranks[end + 1] == k_min {
            end += 1;
        }
        0.5 * (self.grid.points[start] + self.grid.points[end])
    }
}

/// Computes the score curve for one exposure at covariate encoding `x_phi`.
///
/// `base` must be the converged fit of `data`'s statistics. Each refit is
/// warm-started from the base weights under `warm` options.
pub fn conformal_scores(
    base: &BaseFit,
    data: &EncodedData,
    x_phi: &FeatureVector,
    grid: &OutcomeGrid,
    warm: &FitOptions,
    mode: Parallelism,
) -> Result<ConformalScores> {
    if x_phi.p() != base.stats.p() {
        return Err(Error::DimensionMismatch {
            expected: base.stats.p(),
            got: x_phi.p(),
        });
    }
    if data.len() != base.stats.n() {
        return Err(Error::DimensionMismatch {
            expected: base.stats.n(),
            got: data.len(),
        });
    }

    // The Gram contribution of (x, y') does not depend on y': augment once.
    // Adding with outcome 0 leaves the cross moments and energy untouched.
    let mut augmented = base.stats.clone();
    augmented.add(x_phi, 0.0)?;
    let penalties = PenaltyWeights::from_stats(&augmented);

    let n = base.stats.n();
    let p = base.stats.p();
    let x_full = x_phi.with_intercept();

    let per_point = |idx: usize| -> (u32, f64) {
        let y_trial = grid.points[idx];
        // Only the cross moments and outcome energy vary with y'.
        let mut cross = augmented.cross().to_vec();
        for (c, v) in cross.iter_mut().zip(x_full) {
            *c += y_trial * v;
        }
        let energy = augmented.energy() + y_trial * y_trial;
        let res = solver::fit_parts(
            augmented.gram(),
            p,
            &cross,
            energy,
            n + 1,
            penalties.values(),
            &base.weights,
            warm,
        );
        let w = &res.weights;
        let pred_x: f64 = x_full.iter().zip(w).map(|(a, b)| a * b).sum();
        let trial_residual = (y_trial - pred_x).abs();
        let fitted: Vec<f64> = data
            .features
            .iter()
            .zip(&data.outcomes)
            .map(|(phi, y)| {
                let pred: f64 = phi.with_intercept().iter().zip(w).map(|(a, b)| a * b).sum();
                (y - pred).abs()
            })
            .collect();
        (rank_count(&fitted, trial_residual), pred_x)
    };

    let results = mode.map_indexed(grid.len(), per_point);
    let mut ranks = Vec::with_capacity(results.len());
    let mut preds = Vec::with_capacity(results.len());
    for (rank, pred) in results {
        ranks.push(rank);
        preds.push(pred);
    }
    Ok(ConformalScores::from_ranks(grid.clone(), ranks, preds, n))
}

/// A beta-level prediction set extracted from a score curve.
#[derive(Debug, Clone)]
pub struct PredictionSet {
    pub beta: f64,
    /// Per-grid-point membership.
    pub included: Vec<bool>,
    /// Maximal runs of included grid points, as inclusive [lo, hi] pairs.
    pub intervals: Vec<(f64, f64)>,
    /// Score-minimizing point prediction.
    pub point: f64,
}

impl PredictionSet {
    pub fn contains(&self, y: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= y && y <= hi)
    }

    /// Total length of the intervals.
    pub fn width(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn is_empty_set(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Keeps the grid points with (n+1) pi(y') <= ceil(beta (n+1)).
pub fn prediction_set(scores: &ConformalScores, beta: f64) -> Result<PredictionSet> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "coverage level must be in (0,1), got {beta}"
        )));
    }
    let threshold = (beta * (scores.n + 1) as f64).ceil() as u32;
    let included: Vec<bool> = scores.ranks.iter().map(|&k| k <= threshold).collect();
    let points = scores.grid.points();
    let mut intervals = Vec::new();
    let mut run_start: Option<usize> = None;
    for (i, &inc) in included.iter().enumerate() {
        match (inc, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                intervals.push((points[s], points[i - 1]));
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        intervals.push((points[s], points[points.len() - 1]));
    }
    Ok(PredictionSet {
        beta,
        included,
        intervals,
        point: scores.point_prediction(),
    })
}
