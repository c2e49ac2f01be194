//! Additive regressor construction.
//!
//! Raw covariate rows are mapped to a regressor vector: binary columns keep
//! their 0/1 value, categorical columns become one-hot indicators against a
//! reference category, and continuous columns expand into piecewise-linear
//! hinge terms with knots placed at empirical quantiles of the pooled data.
//! Quantile placement gives finer segments where data density is high.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::schema::{ColumnKind, Schema};

/// How the last hinge of a continuous column behaves beyond the largest
/// observed value.
///
/// `Continuous` freezes the component at the value it reaches at the data
/// maximum, keeping the regressor continuous there. `Literal` jumps to the
/// raw cap value instead; it reproduces the uncorrected formula and exists
/// as a compatibility switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CapStyle {
    #[default]
    Continuous,
    Literal,
}

/// Returns the ceil(q*n)-th order statistic for `q > 0`, the minimum for
/// `q = 0`.
pub fn empirical_quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "quantile fraction must be in [0,1], got {q}"
        )));
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite sample value"));
    if q == 0.0 {
        return Ok(sorted[0]);
    }
    let n = sorted.len();
    // Small backoff so q*n that is an integer up to float noise (e.g.
    // 0.4 * 10) does not spill into the next order statistic.
    let k = ((q * n as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(sorted[k.min(n) - 1])
}

/// Natural upper limit on the knot count so the regressor dimension stays
/// at or below the smallest per-exposure sample size:
/// max(round((n - d') / d''), 1), or `None` (unbounded) when there are no
/// continuous columns.
pub fn knot_cap(n: usize, binary_count: usize, continuous_count: usize) -> Option<usize> {
    if continuous_count == 0 {
        return None;
    }
    let ratio = (n as f64 - binary_count as f64) / continuous_count as f64;
    Some(ratio.round().max(1.0) as usize)
}

/// Encoding plan for one column.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnPlan {
    /// Single 0/1 regressor.
    Binary,
    /// K-1 indicator regressors, category 0 is the reference.
    Categorical { categories: usize },
    /// Hinge terms at `knots` (deduplicated, nondecreasing), with the last
    /// hinge frozen at `cap` = the column maximum over the pooled data.
    /// `components` is the regressor count after dropping identically-zero
    /// hinges.
    Continuous {
        knots: Vec<f64>,
        cap: f64,
        components: usize,
    },
}

impl ColumnPlan {
    fn width(&self) -> usize {
        match self {
            ColumnPlan::Binary => 1,
            ColumnPlan::Categorical { categories } => categories - 1,
            ColumnPlan::Continuous { components, .. } => *components,
        }
    }
}

/// Per-column encoding plan plus the total regressor dimension `p`
/// (excluding the intercept).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureMapSpec {
    pub schema: Schema,
    pub plans: Vec<ColumnPlan>,
    pub p: usize,
    #[serde(skip)]
    pub cap_style: CapStyle,
}

impl FeatureMapSpec {
    /// Builds the encoding plan from pooled covariate rows: `m` quantile
    /// knots per continuous column plus the column maximum as cap.
    pub fn build(schema: &Schema, rows: &[Vec<f64>], m: usize) -> Result<Self> {
        Self::build_with(schema, rows, m, CapStyle::Continuous)
    }

    pub fn build_with(
        schema: &Schema,
        rows: &[Vec<f64>],
        m: usize,
        cap_style: CapStyle,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if m < 1 {
            return Err(Error::InvalidArgument("knot count must be >= 1".into()));
        }
        let mut plans = Vec::with_capacity(schema.len());
        for (idx, col) in schema.columns.iter().enumerate() {
            let plan = match col.kind {
                ColumnKind::Binary => ColumnPlan::Binary,
                ColumnKind::Categorical { categories } => ColumnPlan::Categorical { categories },
                ColumnKind::Continuous => {
                    let column: Vec<f64> = rows.iter().map(|r| r[idx]).collect();
                    let mut knots = Vec::with_capacity(m);
                    for k in 1..=m {
                        knots.push(empirical_quantile(&column, (k - 1) as f64 / m as f64)?);
                    }
                    let cap = column.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    // Ties in the data give duplicate knots; the duplicated
                    // hinge columns are identical, so keep one of each.
                    knots.dedup();
                    // A last knot equal to the cap makes the capped hinge
                    // identically zero; drop that component.
                    let components = if *knots.last().unwrap() < cap {
                        knots.len()
                    } else {
                        knots.len() - 1
                    };
                    ColumnPlan::Continuous {
                        knots,
                        cap,
                        components,
                    }
                }
            };
            plans.push(plan);
        }
        let p = plans.iter().map(ColumnPlan::width).sum();
        Ok(Self {
            schema: schema.clone(),
            plans,
            p,
            cap_style,
        })
    }

    /// Encodes a raw covariate row into the regressor vector with leading
    /// intercept.
    pub fn encode(&self, row: &[f64]) -> Result<FeatureVector> {
        self.schema.check_row(row)?;
        let mut values = Vec::with_capacity(self.p + 1);
        values.push(1.0);
        for (plan, &x) in self.plans.iter().zip(row) {
            match plan {
                ColumnPlan::Binary => values.push(x),
                ColumnPlan::Categorical { categories } => {
                    let code = x as usize;
                    for k in 1..*categories {
                        values.push(if code == k { 1.0 } else { 0.0 });
                    }
                }
                ColumnPlan::Continuous {
                    knots,
                    cap,
                    components,
                } => {
                    for (k, &knot) in knots.iter().take(*components).enumerate() {
                        let hinge = (x - knot).max(0.0);
                        let is_last = k + 1 == knots.len();
                        let value = if is_last && x > *cap {
                            match self.cap_style {
                                CapStyle::Continuous => cap - knot,
                                CapStyle::Literal => *cap,
                            }
                        } else {
                            hinge
                        };
                        values.push(value);
                    }
                }
            }
        }
        debug_assert_eq!(values.len(), self.p + 1);
        Ok(FeatureVector { values })
    }

    /// Knot sequences per continuous column name, cap included as the last
    /// entry. Serialized into analysis output for reproducibility.
    pub fn knots_by_column(&self) -> Vec<(String, Vec<f64>)> {
        self.schema
            .columns
            .iter()
            .zip(&self.plans)
            .filter_map(|(col, plan)| match plan {
                ColumnPlan::Continuous { knots, cap, .. } => {
                    let mut ks = knots.clone();
                    ks.push(*cap);
                    Some((col.name.clone(), ks))
                }
                _ => None,
            })
            .collect()
    }
}

/// Regressor vector with the intercept slot baked in: `values[0]` is
/// always 1, the remaining `p` entries are the column encodings.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    /// Wraps raw regressor values (without intercept).
    pub fn from_regressors(regressors: &[f64]) -> Self {
        let mut values = Vec::with_capacity(regressors.len() + 1);
        values.push(1.0);
        values.extend_from_slice(regressors);
        Self { values }
    }

    /// Full vector including the leading intercept 1.
    pub fn with_intercept(&self) -> &[f64] {
        &self.values
    }

    /// The p regressor values, intercept excluded.
    pub fn regressors(&self) -> &[f64] {
        &self.values[1..]
    }

    pub fn p(&self) -> usize {
        self.values.len() - 1
    }
}
