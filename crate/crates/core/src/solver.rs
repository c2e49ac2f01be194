//! Tuning-free square-root lasso fitted by coordinate descent.
//!
//! The objective is
//!
//! ```text
//! V(w) = sqrt( (1/n) * sum_i (y_i - phi_i' w)^2 ) + sum_j lambda_j |w_j|
//! ```
//!
//! with per-coefficient penalties `lambda_j = sqrt(gram[j,j]) / n` and a
//! free intercept (`lambda_0 = 0`). The penalty level adapts to regressor
//! energy and sample size, so no regularization parameter needs tuning.
//!
//! The solver never touches raw samples: everything it needs is in
//! [`SuffStats`] (Gram matrix, cross-moment vector, outcome energy, count),
//! which supports O(p^2) single-sample augmentation. That makes the full
//! conformal loop affordable, because each candidate outcome only shifts
//! the cross moments.
//!
//! Coordinate subproblem: minimizing
//! `f(w) = sqrt((c - 2 b w + a w^2)/n) + lambda |w|` over one coordinate,
//! where `a` is the regressor energy, `b` the partial residual correlation
//! and `c` the residual energy with the coordinate zeroed. Squaring the
//! stationarity condition `b - a w = sign(w) lambda n sqrt(g(w))` gives a
//! quadratic whose feasible root is
//!
//! ```text
//! w* = sign(b)/a * ( |b| - lambda * sqrt( n (a c - b^2) / (a - n lambda^2) ) )
//! ```
//!
//! valid when `|b| > lambda sqrt(n c)`, and `w* = 0` otherwise (the
//! subgradient condition at zero). Cauchy-Schwarz guarantees
//! `a c >= b^2`, and the same inequality shows the denominator
//! `a - n lambda^2` is positive whenever the threshold is exceeded. The
//! closed form is cross-checked against a golden-section oracle in the
//! test suites.

use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Sufficient statistics of a regression sample set: Gram matrix over the
/// intercept-augmented regressors, cross moments with the outcome, outcome
/// energy and sample count. Order-free sums, so permuting the data leaves
/// them unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct SuffStats {
    p: usize,
    gram: Vec<f64>,
    cross: Vec<f64>,
    energy: f64,
    n: usize,
}

impl SuffStats {
    /// Empty statistics for `p` regressors (plus intercept).
    pub fn new(p: usize) -> Self {
        let dim = p + 1;
        Self {
            p,
            gram: vec![0.0; dim * dim],
            cross: vec![0.0; dim],
            energy: 0.0,
            n: 0,
        }
    }

    pub fn from_samples<'a, I>(p: usize, samples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a FeatureVector, f64)>,
    {
        let mut stats = Self::new(p);
        for (phi, y) in samples {
            stats.add(phi, y)?;
        }
        Ok(stats)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.p + 1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn gram_at(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.dim() + j]
    }

    pub fn cross(&self) -> &[f64] {
        &self.cross
    }

    /// Row-major (p+1) x (p+1) Gram matrix.
    pub(crate) fn gram(&self) -> &[f64] {
        &self.gram
    }

    fn check_dim(&self, phi: &FeatureVector) -> Result<()> {
        if phi.p() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                got: phi.p(),
            });
        }
        Ok(())
    }

    /// Rank-one update with one sample; O(p^2).
    pub fn add(&mut self, phi: &FeatureVector, y: f64) -> Result<()> {
        self.check_dim(phi)?;
        let dim = self.dim();
        let v = phi.with_intercept();
        for i in 0..dim {
            let vi = v[i];
            let row = &mut self.gram[i * dim..(i + 1) * dim];
            for (j, r) in row.iter_mut().enumerate() {
                *r += vi * v[j];
            }
            self.cross[i] += vi * y;
        }
        self.energy += y * y;
        self.n += 1;
        Ok(())
    }

    /// Exact algebraic inverse of [`SuffStats::add`].
    pub fn remove(&mut self, phi: &FeatureVector, y: f64) -> Result<()> {
        if self.n == 0 {
            return Err(Error::EmptyStats);
        }
        self.check_dim(phi)?;
        let dim = self.dim();
        let v = phi.with_intercept();
        for i in 0..dim {
            let vi = v[i];
            let row = &mut self.gram[i * dim..(i + 1) * dim];
            for (j, r) in row.iter_mut().enumerate() {
                *r -= vi * v[j];
            }
            self.cross[i] -= vi * y;
        }
        self.energy -= y * y;
        self.n -= 1;
        Ok(())
    }
}

/// Per-coefficient penalty levels `lambda_j = sqrt(gram[j,j]) / n`, zero for
/// the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyWeights {
    values: Vec<f64>,
}

impl PenaltyWeights {
    pub fn from_stats(stats: &SuffStats) -> Self {
        let n = stats.n().max(1) as f64;
        let mut values = vec![0.0; stats.dim()];
        for (j, v) in values.iter_mut().enumerate().skip(1) {
            *v = stats.gram_at(j, j).max(0.0).sqrt() / n;
        }
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Exact minimizer of the one-dimensional subproblem
/// `f(w) = sqrt((c - 2 beta w + alpha w^2)/n) + lambda |w|`.
pub fn coordinate_update(alpha: f64, beta: f64, c: f64, lambda: f64, n: usize) -> f64 {
    if alpha <= 0.0 {
        return 0.0;
    }
    if lambda <= 0.0 {
        return beta / alpha;
    }
    let nf = n as f64;
    if beta.abs() <= lambda * (nf * c).sqrt() {
        return 0.0;
    }
    let denom = alpha - nf * lambda * lambda;
    let disc = (alpha * c - beta * beta).max(0.0);
    let shrink = if denom > 0.0 {
        lambda * (nf * disc / denom).sqrt()
    } else {
        // Only reachable when the inputs violate Cauchy-Schwarz; fall back
        // to the unpenalized minimizer.
        0.0
    };
    beta.signum() * (beta.abs() - shrink).max(0.0) / alpha
}

/// The square-root-lasso objective at `w`.
pub fn cost(stats: &SuffStats, penalties: &PenaltyWeights, w: &[f64]) -> f64 {
    let dim = stats.dim();
    assert_eq!(w.len(), dim, "weight dimension mismatch");
    let mut quad = 0.0;
    for i in 0..dim {
        let row = &stats.gram[i * dim..(i + 1) * dim];
        let mut acc = 0.0;
        for (wk, g) in w.iter().zip(row) {
            acc += wk * g;
        }
        quad += w[i] * acc;
    }
    let mut lin = 0.0;
    for (wk, ck) in w.iter().zip(&stats.cross) {
        lin += wk * ck;
    }
    let rss = (stats.energy - 2.0 * lin + quad).max(0.0);
    let mut pen = 0.0;
    for (wk, lk) in w.iter().zip(penalties.values()) {
        pen += lk * wk.abs();
    }
    (rss / stats.n.max(1) as f64).sqrt() + pen
}

/// Model prediction `phi(x)' w`.
pub fn predict_mean(w: &[f64], phi: &FeatureVector) -> Result<f64> {
    let v = phi.with_intercept();
    if v.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            got: v.len(),
        });
    }
    Ok(v.iter().zip(w).map(|(a, b)| a * b).sum())
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Stop when the relative cost decrease over a full sweep falls below
    /// this.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Record the cost after every sweep (for descent diagnostics).
    pub trace: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_sweeps: 10_000,
            trace: false,
        }
    }
}

impl FitOptions {
    /// Budget for warm-started refits inside the conformal loop.
    pub fn warm() -> Self {
        Self {
            max_sweeps: 50,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub weights: Vec<f64>,
    pub cost: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// Cost after each sweep when tracing was requested.
    pub cost_trace: Vec<f64>,
}

/// Cyclic coordinate descent on the square-root-lasso objective, intercept
/// first. Each sweep costs O(p^2) against the Gram matrix.
pub fn fit(
    stats: &SuffStats,
    penalties: &PenaltyWeights,
    w_init: &[f64],
    opts: &FitOptions,
) -> Result<FitResult> {
    if stats.n() == 0 {
        return Err(Error::InvalidArgument(
            "cannot fit on empty statistics".into(),
        ));
    }
    Ok(fit_parts(
        &stats.gram,
        stats.p,
        &stats.cross,
        stats.energy,
        stats.n,
        penalties.values(),
        w_init,
        opts,
    ))
}

/// Residual energy floor below which the square root's subgradient is no
/// longer meaningful; the cost is at its floor, stop sweeping.
const INTERPOLATION_FLOOR: f64 = 1e-300;

/// How often the maintained `gram * w` product is rebuilt from scratch to
/// bound floating drift.
const RESYNC_SWEEPS: usize = 64;

#[allow(clippy::too_many_arguments)]
pub(crate) fn fit_parts(
    gram: &[f64],
    p: usize,
    cross: &[f64],
    energy: f64,
    n: usize,
    lambda: &[f64],
    w_init: &[f64],
    opts: &FitOptions,
) -> FitResult {
    let dim = p + 1;
    debug_assert_eq!(gram.len(), dim * dim);
    debug_assert_eq!(cross.len(), dim);
    debug_assert_eq!(lambda.len(), dim);
    debug_assert_eq!(w_init.len(), dim);
    let nf = n as f64;

    let mut w = w_init.to_vec();
    for j in 0..dim {
        if gram[j * dim + j] <= 0.0 {
            w[j] = 0.0;
        }
    }

    let gram_times = |w: &[f64], out: &mut Vec<f64>| {
        out.clear();
        out.resize(dim, 0.0);
        for (j, &wj) in w.iter().enumerate() {
            if wj != 0.0 {
                let row = &gram[j * dim..(j + 1) * dim];
                for (o, g) in out.iter_mut().zip(row) {
                    *o += wj * g;
                }
            }
        }
    };

    let mut gw = Vec::new();
    gram_times(&w, &mut gw);
    let rss_of = |w: &[f64], gw: &[f64]| {
        let lin: f64 = w.iter().zip(cross).map(|(a, b)| a * b).sum();
        let quad: f64 = w.iter().zip(gw).map(|(a, b)| a * b).sum();
        (energy - 2.0 * lin + quad).max(0.0)
    };
    let mut rss = rss_of(&w, &gw);

    let penalty = |w: &[f64]| -> f64 { w.iter().zip(lambda).map(|(a, l)| l * a.abs()).sum() };
    let mut cost_prev = (rss / nf).sqrt() + penalty(&w);
    let mut trace = Vec::new();
    if opts.trace {
        trace.push(cost_prev);
    }

    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        if rss / nf < INTERPOLATION_FLOOR {
            converged = true;
            break;
        }
        for j in 0..dim {
            let alpha = gram[j * dim + j];
            if alpha <= 0.0 {
                continue;
            }
            let old = w[j];
            let beta = cross[j] - gw[j] + alpha * old;
            let c = (rss + 2.0 * old * beta - alpha * old * old).max(0.0);
            let next = coordinate_update(alpha, beta, c, lambda[j], n);
            if next != old {
                let delta = next - old;
                let row = &gram[j * dim..(j + 1) * dim];
                for (g, r) in gw.iter_mut().zip(row) {
                    *g += delta * r;
                }
                rss = (c - 2.0 * beta * next + alpha * next * next).max(0.0);
                w[j] = next;
            }
        }
        if sweeps % RESYNC_SWEEPS == 0 {
            gram_times(&w, &mut gw);
        }
        rss = rss_of(&w, &gw);
        let cost = (rss / nf).sqrt() + penalty(&w);
        if opts.trace {
            trace.push(cost);
        }
        let drop = cost_prev - cost;
        cost_prev = cost;
        if drop <= opts.tol * cost.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    FitResult {
        weights: w,
        cost: cost_prev,
        sweeps,
        converged,
        cost_trace: trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn fv(regressors: &[f64]) -> FeatureVector {
        FeatureVector::from_regressors(regressors)
    }

    /// Numeric oracle for the 1-D subproblem: golden-section search
    /// followed by a bisection polish on the derivative sign. The polish is
    /// needed because comparison-based search cannot localize a flat
    /// minimum beyond ~sqrt(machine epsilon). No closed form involved.
    fn golden_min(alpha: f64, beta: f64, c: f64, lambda: f64, n: usize) -> f64 {
        let nf = n as f64;
        let f =
            |w: f64| ((c - 2.0 * beta * w + alpha * w * w).max(0.0) / nf).sqrt() + lambda * w.abs();
        if alpha <= 0.0 {
            return 0.0;
        }
        let unpen = beta / alpha;
        let (mut lo, mut hi) = if unpen >= 0.0 {
            (0.0, unpen)
        } else {
            (unpen, 0.0)
        };
        if (hi - lo).abs() < 1e-30 {
            return 0.0;
        }
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..120 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = f(x2);
            }
        }
        let mut best = 0.5 * (lo + hi);

        // Derivative of f away from the kink at zero; the sign stays
        // informative even where function-value comparisons drown in
        // rounding noise.
        let deriv = |w: f64| -> f64 {
            let g = (c - 2.0 * beta * w + alpha * w * w).max(0.0) / nf;
            (alpha * w - beta) / (nf * g.sqrt()) + lambda * w.signum()
        };
        let span = (unpen.abs() * 1e-5).max(1e-12);
        let (mut a, mut b) = (best - span, best + span);
        if unpen > 0.0 {
            a = a.max(f64::MIN_POSITIVE);
        } else {
            b = b.min(-f64::MIN_POSITIVE);
        }
        if deriv(a) < 0.0 && deriv(b) > 0.0 {
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if deriv(mid) < 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            best = 0.5 * (a + b);
        }
        if f(0.0) <= f(best) {
            0.0
        } else {
            best
        }
    }

    #[test]
    fn single_sample_stats() {
        let mut stats = SuffStats::new(0);
        stats.add(&fv(&[]), 3.0).unwrap();
        assert_eq!(stats.gram_at(0, 0), 1.0);
        assert_eq!(stats.cross(), &[3.0]);
        assert_eq!(stats.energy(), 9.0);
        assert_eq!(stats.n(), 1);
    }

    #[test]
    fn add_remove_round_trip() {
        let mut rng = StdRng::seed_from_u64(7);
        let p = 4;
        let mut stats = SuffStats::new(p);
        let base: Vec<(FeatureVector, f64)> = (0..12)
            .map(|_| {
                let phi: Vec<f64> = (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect();
                (fv(&phi), rng.gen_range(-5.0..5.0))
            })
            .collect();
        for (phi, y) in &base {
            stats.add(phi, *y).unwrap();
        }
        let snapshot = stats.clone();
        let extra = fv(&[0.3, -1.2, 0.8, 2.2]);
        stats.add(&extra, 1.7).unwrap();
        stats.remove(&extra, 1.7).unwrap();
        assert_eq!(stats.n(), snapshot.n());
        for i in 0..stats.dim() {
            for j in 0..stats.dim() {
                let a = stats.gram_at(i, j);
                let b = snapshot.gram_at(i, j);
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
        assert!((stats.energy() - snapshot.energy()).abs() <= 1e-12 * snapshot.energy().max(1.0));
    }

    #[test]
    fn removing_only_sample_empties_stats() {
        let mut stats = SuffStats::new(1);
        let phi = fv(&[2.0]);
        stats.add(&phi, -1.0).unwrap();
        stats.remove(&phi, -1.0).unwrap();
        assert_eq!(stats.n(), 0);
        assert_eq!(stats.energy(), 0.0);
        assert!(stats.remove(&phi, -1.0).is_err());
    }

    #[test]
    fn batch_build_is_permutation_invariant() {
        let mut rng = StdRng::seed_from_u64(11);
        let p = 3;
        let samples: Vec<(FeatureVector, f64)> = (0..20)
            .map(|_| {
                let phi: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
                (fv(&phi), rng.gen_range(-3.0..3.0))
            })
            .collect();
        let fwd = SuffStats::from_samples(p, samples.iter().map(|(f, y)| (f, *y))).unwrap();
        let rev = SuffStats::from_samples(p, samples.iter().rev().map(|(f, y)| (f, *y))).unwrap();
        for i in 0..fwd.dim() {
            for j in 0..fwd.dim() {
                let a = fwd.gram_at(i, j);
                let b = rev.gram_at(i, j);
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn cost_examples() {
        // All outcomes zero, w = 0.
        let mut stats = SuffStats::new(0);
        stats.add(&fv(&[]), 0.0).unwrap();
        stats.add(&fv(&[]), 0.0).unwrap();
        let pen = PenaltyWeights::from_stats(&stats);
        assert_eq!(cost(&stats, &pen, &[0.0]), 0.0);

        // Intercept-only, y = {1, 3}, w = 2: residuals are -1 and 1, so the
        // root-mean-square term is exactly 1 and there is no penalty.
        let mut stats = SuffStats::new(0);
        stats.add(&fv(&[]), 1.0).unwrap();
        stats.add(&fv(&[]), 3.0).unwrap();
        let pen = PenaltyWeights::from_stats(&stats);
        assert!((cost(&stats, &pen, &[2.0]) - 1.0).abs() < 1e-15);

        // Any stats at w = 0: penalty vanishes, sqrt(energy/n) remains.
        let mut stats = SuffStats::new(1);
        stats.add(&fv(&[0.5]), 2.0).unwrap();
        stats.add(&fv(&[-1.0]), -1.0).unwrap();
        let pen = PenaltyWeights::from_stats(&stats);
        let expect = (stats.energy() / 2.0).sqrt();
        assert!((cost(&stats, &pen, &[0.0, 0.0]) - expect).abs() < 1e-15);
    }

    #[test]
    fn coordinate_update_examples() {
        assert_eq!(coordinate_update(1.0, 0.0, 1.0, 0.3, 5), 0.0);
        assert!((coordinate_update(2.0, 6.0, 10.0, 0.0, 5) - 3.0).abs() < 1e-15);
        let got = coordinate_update(1.0, 0.9, 1.0, 0.2, 4);
        let oracle = golden_min(1.0, 0.9, 1.0, 0.2, 4);
        assert!(
            (got - oracle).abs() <= 1e-8,
            "closed form {got} vs golden section {oracle}"
        );
    }

    #[test]
    fn coordinate_update_matches_golden_section() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..500 {
            let alpha: f64 = rng.gen_range(0.05..5.0);
            let c: f64 = rng.gen_range(0.0..10.0);
            let rho: f64 = rng.gen_range(-1.0..1.0);
            let beta = rho * (alpha * c).sqrt();
            let lambda = rng.gen_range(0.0..1.0);
            let n = rng.gen_range(1..200);
            let got = coordinate_update(alpha, beta, c, lambda, n);
            let oracle = golden_min(alpha, beta, c, lambda, n);
            assert!(
                (got - oracle).abs() <= 1e-8,
                "alpha={alpha} beta={beta} c={c} lambda={lambda} n={n}: {got} vs {oracle}"
            );
        }
    }

    #[test]
    fn fit_zero_outcomes_stays_at_zero() {
        let mut stats = SuffStats::new(2);
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..10 {
            let phi = fv(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            stats.add(&phi, 0.0).unwrap();
        }
        let pen = PenaltyWeights::from_stats(&stats);
        let fit = fit(&stats, &pen, &[0.0; 3], &FitOptions::default()).unwrap();
        assert_eq!(fit.weights, vec![0.0; 3]);
        assert_eq!(fit.cost, 0.0);
        assert!(fit.converged);
    }

    #[test]
    fn fit_constant_outcomes_intercept_only() {
        let mut stats = SuffStats::new(2);
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..15 {
            let phi = fv(&[rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0)]);
            stats.add(&phi, 5.0).unwrap();
        }
        let pen = PenaltyWeights::from_stats(&stats);
        let res = fit(&stats, &pen, &[0.0; 3], &FitOptions::default()).unwrap();
        assert!((res.weights[0] - 5.0).abs() < 1e-9, "{:?}", res.weights);
        assert!(res.weights[1].abs() < 1e-12);
        assert!(res.weights[2].abs() < 1e-12);
    }

    #[test]
    fn descent_is_monotone_per_sweep() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..20 {
            let p = rng.gen_range(1..6);
            let n = rng.gen_range(3..30);
            let mut stats = SuffStats::new(p);
            for _ in 0..n {
                let phi: Vec<f64> = (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect();
                stats.add(&fv(&phi), rng.gen_range(-4.0..4.0)).unwrap();
            }
            let pen = PenaltyWeights::from_stats(&stats);
            let opts = FitOptions {
                trace: true,
                ..FitOptions::default()
            };
            let res = fit(&stats, &pen, &vec![0.0; p + 1], &opts).unwrap();
            for w in res.cost_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "cost increased: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn degenerate_column_weight_forced_to_zero() {
        let mut stats = SuffStats::new(2);
        for y in [1.0, 2.0, 3.0] {
            stats.add(&fv(&[0.0, 1.0]), y).unwrap();
        }
        let pen = PenaltyWeights::from_stats(&stats);
        let res = fit(&stats, &pen, &[0.0, 9.0, 0.0], &FitOptions::default()).unwrap();
        assert_eq!(res.weights[1], 0.0);
    }

    #[test]
    fn predict_mean_examples() {
        let phi = fv(&[1.5, -2.0]);
        assert_eq!(predict_mean(&[0.0, 0.0, 0.0], &phi).unwrap(), 0.0);
        assert_eq!(predict_mean(&[4.0, 0.0, 0.0], &phi).unwrap(), 4.0);
        let w = [0.5, 2.0, -1.0];
        let expect = 0.5 + 2.0 * 1.5 - 1.0 * (-2.0);
        assert_eq!(predict_mean(&w, &phi).unwrap(), expect);
        assert!(predict_mean(&[1.0], &phi).is_err());
    }

    proptest! {
        #[test]
        fn soft_threshold_zero_condition(
            alpha in 0.01f64..10.0,
            rho in -1.0f64..1.0,
            c in 0.0f64..20.0,
            lambda in 0.0f64..2.0,
            n in 1usize..500,
        ) {
            let beta = rho * (alpha * c).sqrt();
            let w = coordinate_update(alpha, beta, c, lambda, n);
            let at_zero = beta.abs() <= lambda * (n as f64 * c).sqrt();
            if lambda > 0.0 {
                prop_assert_eq!(w == 0.0, at_zero);
            }
            prop_assert!(w.is_finite());
        }

        #[test]
        fn add_remove_is_inverse(
            phi in proptest::collection::vec(-3.0f64..3.0, 3),
            y in -5.0f64..5.0,
        ) {
            let mut stats = SuffStats::new(3);
            stats.add(&fv(&[1.0, 0.5, -0.25]), 2.0).unwrap();
            let before = stats.clone();
            let sample = fv(&phi);
            stats.add(&sample, y).unwrap();
            stats.remove(&sample, y).unwrap();
            for i in 0..stats.dim() {
                for j in 0..stats.dim() {
                    let a = stats.gram_at(i, j);
                    let b = before.gram_at(i, j);
                    prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
                }
            }
            prop_assert!((stats.energy() - before.energy()).abs() <= 1e-12 * before.energy().max(1.0));
        }
    }
}
