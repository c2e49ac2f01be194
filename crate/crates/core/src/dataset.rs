//! Exposure-labeled observational datasets and their CSV representation.
//!
//! The canonical file format is a headered CSV with mandatory `exposure`
//! and `outcome` columns; covariate columns are matched to the schema by
//! name, in any order. Exposure labels are re-indexed to a contiguous
//! 0..K-1 range on load, with the original labels retained.

use std::path::Path;

use crate::error::{Error, Result};
use crate::schema::Schema;

#[derive(Debug, Clone, PartialEq)]
pub struct DataRow {
    /// Re-indexed exposure in 0..K-1.
    pub exposure: usize,
    pub outcome: f64,
    pub covariates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    rows: Vec<DataRow>,
    exposures: usize,
    /// Original exposure label for each re-indexed value.
    labels: Vec<i64>,
}

impl Dataset {
    /// Builds a dataset from rows whose exposure labels are already
    /// 0..K-1. Every exposure in the range must occur at least once.
    pub fn from_parts(schema: Schema, rows: Vec<DataRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let exposures = rows.iter().map(|r| r.exposure).max().unwrap() + 1;
        let mut seen = vec![false; exposures];
        for row in &rows {
            schema.check_row(&row.covariates)?;
            if !row.outcome.is_finite() {
                return Err(Error::NonFinite {
                    column: "outcome".into(),
                });
            }
            seen[row.exposure] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::EmptyExposure(missing));
        }
        let labels = (0..exposures as i64).collect();
        Ok(Self {
            schema,
            rows,
            exposures,
            labels,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[DataRow] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Number of exposure types K.
    pub fn exposures(&self) -> usize {
        self.exposures
    }

    /// Original exposure label for each re-indexed value 0..K-1.
    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn outcomes(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.outcome).collect()
    }

    pub fn covariate_rows(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.covariates.clone()).collect()
    }

    /// Loads and validates a dataset from `path` against the schema JSON at
    /// `schema_path`.
    pub fn load_csv(path: impl AsRef<Path>, schema_path: impl AsRef<Path>) -> Result<Self> {
        let schema_text = std::fs::read_to_string(schema_path)?;
        let schema = Schema::from_json(&schema_text)?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)?;

        let headers = reader.headers()?.clone();
        let position = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        let exposure_idx = position("exposure")?;
        let outcome_idx = position("outcome")?;
        let covariate_idx: Vec<usize> = schema
            .columns
            .iter()
            .map(|c| position(&c.name))
            .collect::<Result<_>>()?;

        let parse_f64 = |field: &str, row: usize, column: &str| -> Result<f64> {
            field.parse::<f64>().map_err(|_| Error::Row {
                row,
                column: column.to_string(),
                message: format!("cannot parse '{field}' as a number"),
            })
        };

        let mut raw_rows: Vec<(i64, f64, Vec<f64>)> = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let row_no = i + 1;
            let exposure: i64 = record[exposure_idx].parse().map_err(|_| Error::Row {
                row: row_no,
                column: "exposure".into(),
                message: format!(
                    "cannot parse '{}' as an integer label",
                    &record[exposure_idx]
                ),
            })?;
            let outcome = parse_f64(&record[outcome_idx], row_no, "outcome")?;
            if !outcome.is_finite() {
                return Err(Error::Row {
                    row: row_no,
                    column: "outcome".into(),
                    message: "non-finite outcome".into(),
                });
            }
            let mut covariates = Vec::with_capacity(schema.len());
            for (col, &idx) in schema.columns.iter().zip(&covariate_idx) {
                let value = parse_f64(&record[idx], row_no, &col.name)?;
                covariates.push(value);
            }
            schema.check_row(&covariates).map_err(|e| Error::Row {
                row: row_no,
                column: "covariates".into(),
                message: e.to_string(),
            })?;
            raw_rows.push((exposure, outcome, covariates));
        }
        if raw_rows.is_empty() {
            return Err(Error::EmptyDataset);
        }

        let mut labels: Vec<i64> = raw_rows.iter().map(|(z, _, _)| *z).collect();
        labels.sort_unstable();
        labels.dedup();
        let rows = raw_rows
            .into_iter()
            .map(|(z, outcome, covariates)| DataRow {
                exposure: labels.binary_search(&z).unwrap(),
                outcome,
                covariates,
            })
            .collect();
        Ok(Self {
            exposures: labels.len(),
            schema,
            rows,
            labels,
        })
    }

    /// Writes the canonical CSV: `exposure,outcome,<covariates...>` with
    /// shortest round-trip number formatting and the original exposure
    /// labels.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header = vec!["exposure".to_string(), "outcome".to_string()];
        header.extend(self.schema.columns.iter().map(|c| c.name.clone()));
        writer.write_record(&header)?;
        for row in &self.rows {
            let mut record = Vec::with_capacity(2 + row.covariates.len());
            record.push(self.labels[row.exposure].to_string());
            record.push(row.outcome.to_string());
            record.extend(row.covariates.iter().map(|v| v.to_string()));
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }
}
