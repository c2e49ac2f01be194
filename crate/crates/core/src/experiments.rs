//! Synthetic data generators and the Monte Carlo coverage harness.
//!
//! Two generating processes are built in: a one-dimensional nonlinear
//! benchmark (exposure-dependent covariate shift with square-root and
//! exponential mean responses) and a high-dimensional one with correlated
//! low-rank Gaussian covariates where only four coordinates matter.
//!
//! Each synthetic unit carries both potential outcomes for evaluation, but
//! fitting only ever sees a [`Dataset`], which excludes them by
//! construction.
//!
//! Replicates draw from per-index ChaCha streams of one named seed, so the
//! harness is deterministic no matter how the work is scheduled.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::conformal::{conformal_scores, prediction_set, BaseFit, EncodedData, OutcomeGrid};
use crate::counterfactual::split_by_exposure;
use crate::dataset::{DataRow, Dataset};
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::features::FeatureMapSpec;
use crate::schema::Schema;
use crate::solver::FitOptions;

/// One simulated unit: realized data plus both potential outcomes, which
/// are held out for evaluation only.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticUnit {
    pub covariates: Vec<f64>,
    pub exposure: usize,
    /// Realized outcome, equal to the potential outcome of the assigned
    /// exposure.
    pub outcome: f64,
    pub y0: f64,
    pub y1: f64,
}

impl SyntheticUnit {
    pub fn potential(&self, exposure: usize) -> f64 {
        if exposure == 0 {
            self.y0
        } else {
            self.y1
        }
    }
}

fn units_to_dataset(schema: Schema, units: &[SyntheticUnit]) -> Result<Dataset> {
    let rows = units
        .iter()
        .map(|u| DataRow {
            exposure: u.exposure,
            outcome: u.outcome,
            covariates: u.covariates.clone(),
        })
        .collect();
    Dataset::from_parts(schema, rows)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

// ---------------------------------------------------------------------
// Nonlinear benchmark: scalar covariate, shifted by exposure.
// ---------------------------------------------------------------------

/// Mean response under exposure 0: 72 + 3 sqrt(|x|).
pub fn nonlinear_mean0(x: f64) -> f64 {
    72.0 + 3.0 * x.abs().sqrt()
}

/// Mean response under exposure 1: 90 + exp(0.06 x).
pub fn nonlinear_mean1(x: f64) -> f64 {
    90.0 + (0.06 * x).exp()
}

fn draw_nonlinear_unit(rng: &mut ChaCha8Rng, forced: Option<usize>) -> SyntheticUnit {
    let exposure = forced.unwrap_or_else(|| usize::from(rng.gen::<f64>() >= 0.5));
    let x_mean = if exposure == 0 { 40.0 } else { 20.0 };
    let x = Normal::new(x_mean, 10.0).unwrap().sample(rng);
    let unit_noise = Normal::new(0.0, 1.0).unwrap();
    let y0 = nonlinear_mean0(x) + unit_noise.sample(rng);
    let y1 = nonlinear_mean1(x) + unit_noise.sample(rng);
    let outcome = if exposure == 0 { y0 } else { y1 };
    SyntheticUnit {
        covariates: vec![x],
        exposure,
        outcome,
        y0,
        y1,
    }
}

/// Draws `n` units of the nonlinear benchmark: exposure is a fair coin,
/// x | z=0 ~ N(40, 10^2), x | z=1 ~ N(20, 10^2), unit outcome noise.
pub fn gen_nonlinear(n: usize, seed: u64) -> Result<(Dataset, Vec<SyntheticUnit>)> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two units".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let units: Vec<SyntheticUnit> = (0..n)
        .map(|_| draw_nonlinear_unit(&mut rng, None))
        .collect();
    let data = units_to_dataset(Schema::continuous(1), &units)?;
    Ok((data, units))
}

// ---------------------------------------------------------------------
// High-dimensional benchmark: low-rank correlated covariates.
// ---------------------------------------------------------------------

/// A unit-trace covariance built from the outer product of a d x rank
/// Gaussian factor: Sigma = A A' / tr(A A'). Sampling x ~ N(0, Sigma) only
/// needs the factor: x = A g / sqrt(tr), g standard normal.
#[derive(Debug, Clone)]
pub struct CovarianceFactor {
    d: usize,
    rank: usize,
    /// Row-major d x rank factor.
    a: Vec<f64>,
    trace: f64,
}

impl CovarianceFactor {
    pub fn draw(d: usize, rank: usize, rng: &mut ChaCha8Rng) -> Self {
        let std_normal = Normal::new(0.0, 1.0).unwrap();
        let a: Vec<f64> = (0..d * rank).map(|_| std_normal.sample(rng)).collect();
        let trace: f64 = a.iter().map(|v| v * v).sum();
        Self { d, rank, a, trace }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let std_normal = Normal::new(0.0, 1.0).unwrap();
        let g: Vec<f64> = (0..self.rank).map(|_| std_normal.sample(rng)).collect();
        let scale = 1.0 / self.trace.sqrt();
        (0..self.d)
            .map(|i| {
                let row = &self.a[i * self.rank..(i + 1) * self.rank];
                let dot: f64 = row.iter().zip(&g).map(|(a, b)| a * b).sum();
                dot * scale
            })
            .collect()
    }

    /// Dense d x d covariance matrix, row-major. Intended for diagnostics
    /// and tests at small d.
    pub fn matrix(&self) -> Vec<f64> {
        let mut sigma = vec![0.0; self.d * self.d];
        for i in 0..self.d {
            for j in 0..self.d {
                let ri = &self.a[i * self.rank..(i + 1) * self.rank];
                let rj = &self.a[j * self.rank..(j + 1) * self.rank];
                let dot: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
                sigma[i * self.d + j] = dot / self.trace;
            }
        }
        sigma
    }
}

/// Mean response under exposure 0: x1 + 5 x10 + 5 x20 + 0.5 (1-based
/// coordinates).
pub fn highdim_mean0(x: &[f64]) -> f64 {
    x[0] + 5.0 * x[9] + 5.0 * x[19] + 0.5
}

/// Mean response under exposure 1: x1 + x10 - x30.
pub fn highdim_mean1(x: &[f64]) -> f64 {
    x[0] + x[9] - x[29]
}

const HIGHDIM_NOISE_SD: f64 = 0.5;
const HIGHDIM_P_EXPOSURE0: f64 = 0.6;

fn draw_highdim_unit(
    rng: &mut ChaCha8Rng,
    factors: &(CovarianceFactor, CovarianceFactor),
    forced: Option<usize>,
) -> SyntheticUnit {
    let exposure = forced.unwrap_or_else(|| usize::from(rng.gen::<f64>() >= HIGHDIM_P_EXPOSURE0));
    let factor = if exposure == 0 {
        &factors.0
    } else {
        &factors.1
    };
    let x = factor.sample(rng);
    let noise = Normal::new(0.0, HIGHDIM_NOISE_SD).unwrap();
    let y0 = highdim_mean0(&x) + noise.sample(rng);
    let y1 = highdim_mean1(&x) + noise.sample(rng);
    let outcome = if exposure == 0 { y0 } else { y1 };
    SyntheticUnit {
        covariates: x,
        exposure,
        outcome,
        y0,
        y1,
    }
}

fn draw_highdim_factors(
    d: usize,
    rank: usize,
    rng: &mut ChaCha8Rng,
) -> (CovarianceFactor, CovarianceFactor) {
    let f0 = CovarianceFactor::draw(d, rank, rng);
    let f1 = CovarianceFactor::draw(d, rank, rng);
    (f0, f1)
}

/// Draws `n` units of the high-dimensional benchmark: exposures with
/// probabilities 0.6/0.4, covariates from per-exposure unit-trace rank-
/// deficient covariances redrawn for each call.
pub fn gen_highdim(
    n: usize,
    d: usize,
    rank: usize,
    seed: u64,
) -> Result<(Dataset, Vec<SyntheticUnit>)> {
    if d < 30 {
        return Err(Error::InvalidArgument(format!(
            "high-dimensional benchmark needs d >= 30, got {d}"
        )));
    }
    if rank > d {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} exceeds dimension {d}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two units".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let factors = draw_highdim_factors(d, rank, &mut rng);
    let units: Vec<SyntheticUnit> = (0..n)
        .map(|_| draw_highdim_unit(&mut rng, &factors, None))
        .collect();
    let data = units_to_dataset(Schema::continuous(d), &units)?;
    Ok((data, units))
}

// ---------------------------------------------------------------------
// Coverage harness.
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Nonlinear,
    HighDim,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Nonlinear => "nonlinear",
            Experiment::HighDim => "highdim",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoverageConfig {
    pub experiment: Experiment,
    pub runs: usize,
    pub beta: f64,
    pub seed: u64,
    /// Units per replicate dataset.
    pub n: usize,
    /// Covariate dimension (high-dimensional benchmark only).
    pub d: usize,
    /// Covariance rank (high-dimensional benchmark only).
    pub rank: usize,
    /// Knots per continuous covariate.
    pub knots: usize,
    pub grid_size: usize,
    pub grid_margin: f64,
    /// Keep one covariance pair for all replicates instead of redrawing.
    pub fixed_covariance: bool,
}

impl CoverageConfig {
    pub fn nonlinear(runs: usize, beta: f64, seed: u64) -> Self {
        Self {
            experiment: Experiment::Nonlinear,
            runs,
            beta,
            seed,
            n: 120,
            d: 1,
            rank: 1,
            knots: 10,
            grid_size: 200,
            grid_margin: 0.25,
            fixed_covariance: false,
        }
    }

    pub fn highdim(runs: usize, beta: f64, seed: u64) -> Self {
        Self {
            experiment: Experiment::HighDim,
            runs,
            beta,
            seed,
            n: 100,
            d: 200,
            rank: 150,
            knots: 1,
            grid_size: 200,
            grid_margin: 0.25,
            fixed_covariance: false,
        }
    }
}

/// Empirical coverage of the conformal intervals over fresh units, per
/// exposure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub experiment: String,
    pub beta: f64,
    pub runs: usize,
    pub seed: u64,
    /// Fraction of replicates whose fresh unit outcome fell inside the
    /// interval, per exposure.
    pub coverage: Vec<f64>,
    /// Mean total interval length, per exposure.
    pub mean_width: Vec<f64>,
}

struct ReplicateOutcome {
    covered: [bool; 2],
    width: [f64; 2],
}

/// Runs the Monte Carlo protocol: per replicate, generate a fresh dataset,
/// fit both exposures, draw one fresh unit from each exposure group, and
/// test whether its potential outcome lands in the conformal set at level
/// beta.
pub fn coverage_run(config: &CoverageConfig, mode: Parallelism) -> Result<CoverageReport> {
    if config.runs == 0 {
        return Err(Error::InvalidArgument("need at least one run".into()));
    }
    let fixed_factors = match (config.experiment, config.fixed_covariance) {
        (Experiment::HighDim, true) => {
            let mut rng = stream_rng(config.seed, u64::MAX);
            Some(draw_highdim_factors(config.d, config.rank, &mut rng))
        }
        _ => None,
    };

    let replicate = |r: usize| -> Result<ReplicateOutcome> {
        let mut rng = stream_rng(config.seed, r as u64 + 1);
        let (schema, units, fresh) = match config.experiment {
            Experiment::Nonlinear => {
                let units: Vec<SyntheticUnit> = (0..config.n)
                    .map(|_| draw_nonlinear_unit(&mut rng, None))
                    .collect();
                let fresh = [
                    draw_nonlinear_unit(&mut rng, Some(0)),
                    draw_nonlinear_unit(&mut rng, Some(1)),
                ];
                (Schema::continuous(1), units, fresh)
            }
            Experiment::HighDim => {
                let factors = match &fixed_factors {
                    Some(f) => f.clone(),
                    None => draw_highdim_factors(config.d, config.rank, &mut rng),
                };
                let units: Vec<SyntheticUnit> = (0..config.n)
                    .map(|_| draw_highdim_unit(&mut rng, &factors, None))
                    .collect();
                let fresh = [
                    draw_highdim_unit(&mut rng, &factors, Some(0)),
                    draw_highdim_unit(&mut rng, &factors, Some(1)),
                ];
                (Schema::continuous(config.d), units, fresh)
            }
        };

        let data = units_to_dataset(schema, &units)?;
        let spec = FeatureMapSpec::build(data.schema(), &data.covariate_rows(), config.knots)?;
        let grid =
            OutcomeGrid::from_outcomes(&data.outcomes(), config.grid_size, config.grid_margin)?;
        let groups = split_by_exposure(&data)?;
        if groups.len() != 2 {
            return Err(Error::InvalidArgument(
                "coverage harness expects two exposures".into(),
            ));
        }

        let mut covered = [false; 2];
        let mut width = [0.0; 2];
        for z in 0..2 {
            let mut encoded = EncodedData::default();
            for &i in &groups[z] {
                let row = &data.rows()[i];
                encoded.push(spec.encode(&row.covariates)?, row.outcome);
            }
            let base = BaseFit::from_data(&encoded, spec.p, &FitOptions::default())?;
            let x_phi = spec.encode(&fresh[z].covariates)?;
            // Grid points of one replicate stay sequential; parallelism is
            // spent across replicates.
            let scores = conformal_scores(
                &base,
                &encoded,
                &x_phi,
                &grid,
                &FitOptions::warm(),
                Parallelism::Sequential,
            )?;
            let set = prediction_set(&scores, config.beta)?;
            covered[z] = set.contains(fresh[z].potential(z));
            width[z] = set.width();
        }
        Ok(ReplicateOutcome { covered, width })
    };

    let outcomes = mode.map_indexed(config.runs, replicate);

    let mut hits = [0usize; 2];
    let mut width_sum = [0.0f64; 2];
    for outcome in outcomes {
        let rep = outcome?;
        for z in 0..2 {
            hits[z] += rep.covered[z] as usize;
            width_sum[z] += rep.width[z];
        }
    }
    let runs_f = config.runs as f64;
    Ok(CoverageReport {
        experiment: config.experiment.name().to_string(),
        beta: config.beta,
        runs: config.runs,
        seed: config.seed,
        coverage: hits.iter().map(|&h| h as f64 / runs_f).collect(),
        mean_width: width_sum.iter().map(|&w| w / runs_f).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonlinear_mean_values() {
        assert!((nonlinear_mean0(40.0) - 90.97366596101028).abs() < 1e-12);
        assert_eq!(nonlinear_mean1(0.0), 91.0);
    }

    #[test]
    fn nonlinear_group_means_match_design() {
        let n = 10_000;
        let (_, units) = gen_nonlinear(n, 123).unwrap();
        let mut sums = [0.0f64; 2];
        let mut counts = [0usize; 2];
        for u in &units {
            sums[u.exposure] += u.covariates[0];
            counts[u.exposure] += 1;
        }
        // 3-sigma bands around the design means.
        for z in 0..2 {
            let mean = sums[z] / counts[z] as f64;
            let expect = if z == 0 { 40.0 } else { 20.0 };
            let band = 3.0 * 10.0 / (counts[z] as f64).sqrt();
            assert!(
                (mean - expect).abs() < band,
                "group {z}: mean {mean} vs {expect} +- {band}"
            );
        }
    }

    #[test]
    fn generators_are_seed_deterministic() {
        let (a_data, a_units) = gen_nonlinear(50, 7).unwrap();
        let (b_data, b_units) = gen_nonlinear(50, 7).unwrap();
        assert_eq!(a_units, b_units);
        assert_eq!(a_data, b_data);
        let (c_data, _) = gen_nonlinear(50, 8).unwrap();
        assert_ne!(a_data, c_data);

        let (hd_a, _) = gen_highdim(20, 40, 10, 3).unwrap();
        let (hd_b, _) = gen_highdim(20, 40, 10, 3).unwrap();
        assert_eq!(hd_a, hd_b);
    }

    #[test]
    fn realized_outcome_matches_assigned_exposure() {
        let (_, units) = gen_nonlinear(200, 5).unwrap();
        for u in &units {
            assert_eq!(u.outcome, u.potential(u.exposure));
        }
    }

    #[test]
    fn covariance_has_unit_trace() {
        let mut rng = stream_rng(11, 0);
        let factor = CovarianceFactor::draw(40, 15, &mut rng);
        let sigma = factor.matrix();
        let trace: f64 = (0..40).map(|i| sigma[i * 40 + i]).sum();
        assert!((trace - 1.0).abs() < 1e-12);
    }

    /// Jacobi eigenvalue iteration for small symmetric matrices, used as a
    /// rank oracle.
    fn symmetric_eigenvalues(mut m: Vec<f64>, d: usize) -> Vec<f64> {
        for _ in 0..100 {
            let mut off = 0.0;
            for i in 0..d {
                for j in (i + 1)..d {
                    off += m[i * d + j] * m[i * d + j];
                }
            }
            if off < 1e-24 {
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    let apq = m[p * d + q];
                    if apq.abs() < 1e-18 {
                        continue;
                    }
                    let app = m[p * d + p];
                    let aqq = m[q * d + q];
                    let tau = (aqq - app) / (2.0 * apq);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..d {
                        let akp = m[k * d + p];
                        let akq = m[k * d + q];
                        m[k * d + p] = c * akp - s * akq;
                        m[k * d + q] = s * akp + c * akq;
                    }
                    for k in 0..d {
                        let apk = m[p * d + k];
                        let aqk = m[q * d + k];
                        m[p * d + k] = c * apk - s * aqk;
                        m[q * d + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..d).map(|i| m[i * d + i]).collect()
    }

    #[test]
    fn jacobi_sanity_two_by_two() {
        let mut eigs = symmetric_eigenvalues(vec![2.0, 1.0, 1.0, 2.0], 2);
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        assert!((eigs[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn covariance_rank_matches_factor_rank() {
        let d = 24;
        let rank = 10;
        let mut rng = stream_rng(21, 0);
        let factor = CovarianceFactor::draw(d, rank, &mut rng);
        let eigs = symmetric_eigenvalues(factor.matrix(), d);
        let max = eigs.iter().cloned().fold(0.0f64, f64::max);
        let nonzero = eigs.iter().filter(|&&e| e > 1e-12 * max).count();
        assert_eq!(nonzero, rank);
    }

    #[test]
    fn highdim_effect_at_all_ones() {
        let x = vec![1.0; 30];
        assert_eq!(highdim_mean0(&x) - highdim_mean1(&x), 10.5);
    }

    #[test]
    fn highdim_rejects_small_dimension() {
        assert!(gen_highdim(50, 20, 10, 1).is_err());
        assert!(gen_highdim(50, 40, 50, 1).is_err());
    }

    #[test]
    fn coverage_deterministic_across_modes() {
        let mut config = CoverageConfig::nonlinear(8, 0.9, 42);
        config.n = 40;
        config.grid_size = 60;
        let seq = coverage_run(&config, Parallelism::Sequential).unwrap();
        let par = coverage_run(&config, Parallelism::Rayon).unwrap();
        assert_eq!(seq, par);
        for z in 0..2 {
            assert!((0.0..=1.0).contains(&seq.coverage[z]));
            assert!(seq.mean_width[z] > 0.0);
        }
    }

    #[test]
    fn fixed_covariance_mode_is_deterministic_too() {
        let mut config = CoverageConfig::highdim(3, 0.9, 9);
        config.n = 50;
        config.d = 40;
        config.rank = 20;
        config.grid_size = 50;
        config.fixed_covariance = true;
        let a = coverage_run(&config, Parallelism::Rayon).unwrap();
        let b = coverage_run(&config, Parallelism::Sequential).unwrap();
        assert_eq!(a, b);
    }
}
