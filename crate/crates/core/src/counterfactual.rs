//! Per-exposure counterfactual analysis and the confidence measure.
//!
//! For a unit with covariates x, each exposure group's data yields a point
//! prediction and a conformal score curve on one shared outcome grid. Two
//! exposures are compared by the largest coverage level at which their
//! prediction sets are still disjoint: high values mean the counterfactual
//! outcomes are well separated, beyond what the difference of point
//! predictions alone says. Disjointness is evaluated on the shared grid
//! (the sets need not be contiguous), which makes the comparison exact
//! there.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::conformal::{
    conformal_scores, prediction_set, BaseFit, ConformalScores, EncodedData, OutcomeGrid,
};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::features::{CapStyle, FeatureMapSpec};
use crate::solver::FitOptions;

/// Partition of row indices by exposure, order preserved within groups.
pub fn split_by_exposure(data: &Dataset) -> Result<Vec<Vec<usize>>> {
    let k = data.exposures();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, row) in data.rows().iter().enumerate() {
        groups[row.exposure].push(i);
    }
    if let Some(z) = groups.iter().position(|g| g.is_empty()) {
        return Err(Error::EmptyExposure(z));
    }
    Ok(groups)
}

/// Everything the analysis produced for one exposure.
#[derive(Debug, Clone)]
pub struct ExposureAnalysis {
    pub exposure: usize,
    pub n: usize,
    pub weights: Vec<f64>,
    pub scores: ConformalScores,
    pub point: f64,
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub beta: f64,
    /// Knot count m per continuous covariate.
    pub knots: usize,
    pub grid_size: usize,
    pub grid_margin: f64,
    pub cap_style: CapStyle,
    pub base_fit: FitOptions,
    pub warm_fit: FitOptions,
}

impl AnalysisOptions {
    pub fn new(beta: f64, knots: usize) -> Self {
        Self {
            beta,
            knots,
            grid_size: 200,
            grid_margin: 0.25,
            cap_style: CapStyle::Continuous,
            base_fit: FitOptions::default(),
            warm_fit: FitOptions::warm(),
        }
    }
}

/// Runs the full per-exposure pipeline at covariate row `x_raw`: one
/// feature map built from the pooled data, one shared outcome grid, one
/// fit and score curve per exposure.
pub fn analyze_unit(
    data: &Dataset,
    x_raw: &[f64],
    opts: &AnalysisOptions,
    mode: Parallelism,
) -> Result<Vec<ExposureAnalysis>> {
    let spec = FeatureMapSpec::build_with(
        data.schema(),
        &data.covariate_rows(),
        opts.knots,
        opts.cap_style,
    )?;
    analyze_unit_with_spec(data, &spec, x_raw, opts, mode)
}

pub fn analyze_unit_with_spec(
    data: &Dataset,
    spec: &FeatureMapSpec,
    x_raw: &[f64],
    opts: &AnalysisOptions,
    mode: Parallelism,
) -> Result<Vec<ExposureAnalysis>> {
    if !(0.0 < opts.beta && opts.beta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "coverage level must be in (0,1), got {}",
            opts.beta
        )));
    }
    let grid = OutcomeGrid::from_outcomes(&data.outcomes(), opts.grid_size, opts.grid_margin)?;
    let groups = split_by_exposure(data)?;
    let x_phi = spec.encode(x_raw)?;

    let mut analyses = Vec::with_capacity(groups.len());
    for (z, indices) in groups.iter().enumerate() {
        let mut encoded = EncodedData::default();
        for &i in indices {
            let row = &data.rows()[i];
            encoded.push(spec.encode(&row.covariates)?, row.outcome);
        }
        let base = BaseFit::from_data(&encoded, spec.p, &opts.base_fit)?;
        let scores = conformal_scores(&base, &encoded, &x_phi, &grid, &opts.warm_fit, mode)?;
        let point = scores.point_prediction();
        analyses.push(ExposureAnalysis {
            exposure: z,
            n: indices.len(),
            weights: base.weights,
            scores,
            point,
        });
    }
    Ok(analyses)
}

/// The largest coverage level at which the two exposures' prediction sets
/// are disjoint, exact on the shared grid: the minimum over grid points of
/// the larger entry-level beta. A grid point is in both sets only when
/// beta exceeds both min-beta curves there.
pub fn confidence(a: &ConformalScores, b: &ConformalScores) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let beta_a = a.min_beta_curve();
    let beta_b = b.min_beta_curve();
    let value = beta_a
        .iter()
        .zip(&beta_b)
        .map(|(&x, &y)| x.max(y))
        .fold(f64::INFINITY, f64::min);
    Ok(value.clamp(0.0, 1.0))
}

/// Pairwise counterfactual confidences and effect estimates over K
/// exposures. Both matrices are K x K with unused diagonals; confidence is
/// symmetric, effects antisymmetric.
#[derive(Debug, Clone, Serialize)]
pub struct ConfidenceTable {
    pub exposures: Vec<usize>,
    pub confidence: Vec<Vec<f64>>,
    pub effects: Vec<Vec<f64>>,
}

pub fn pairwise_table(analyses: &[ExposureAnalysis]) -> Result<ConfidenceTable> {
    let k = analyses.len();
    if k < 2 {
        return Err(Error::InvalidArgument(
            "pairwise table needs at least two exposures".into(),
        ));
    }
    let mut conf = vec![vec![0.0; k]; k];
    let mut effects = vec![vec![0.0; k]; k];
    for g in 0..k {
        for h in 0..g {
            let c = confidence(&analyses[g].scores, &analyses[h].scores)?;
            conf[g][h] = c;
            conf[h][g] = c;
        }
    }
    for g in 0..k {
        for h in 0..k {
            effects[g][h] = analyses[g].point - analyses[h].point;
        }
    }
    Ok(ConfidenceTable {
        exposures: analyses.iter().map(|a| a.exposure).collect(),
        confidence: conf,
        effects,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub lo: f64,
    pub hi: f64,
    pub size: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExposureReport {
    pub z: usize,
    pub label: i64,
    pub n: usize,
    pub point: f64,
    pub beta: f64,
    pub intervals: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
}

/// Full analysis result, the JSON artifact of the `analyze` command.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub grid: GridSummary,
    pub exposures: Vec<ExposureReport>,
    pub confidence_table: Vec<Vec<f64>>,
    pub effects: Vec<Vec<f64>>,
    pub knots: BTreeMap<String, Vec<f64>>,
}

pub fn build_report(
    data: &Dataset,
    spec: &FeatureMapSpec,
    analyses: &[ExposureAnalysis],
    beta: f64,
) -> Result<AnalysisReport> {
    let grid = analyses
        .first()
        .map(|a| a.scores.grid())
        .ok_or(Error::EmptyDataset)?;
    let mut exposures = Vec::with_capacity(analyses.len());
    for a in analyses {
        let set = prediction_set(&a.scores, beta)?;
        exposures.push(ExposureReport {
            z: a.exposure,
            label: data.labels()[a.exposure],
            n: a.n,
            point: a.point,
            beta,
            intervals: set.intervals,
            weights: a.weights.clone(),
        });
    }
    let (confidence_table, effects) = if analyses.len() >= 2 {
        let table = pairwise_table(analyses)?;
        (table.confidence, table.effects)
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(AnalysisReport {
        grid: GridSummary {
            lo: grid.lo(),
            hi: grid.hi(),
            size: grid.len(),
        },
        exposures,
        confidence_table,
        effects,
        knots: spec.knots_by_column().into_iter().collect(),
    })
}
