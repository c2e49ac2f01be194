//! Column schemas for covariate tables.
//!
//! A schema is an ordered list of named columns, each binary, categorical
//! with a known category count, or continuous. Binary columns are
//! categorical with two categories encoded as a single 0/1 regressor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The kind of a covariate column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ColumnKind {
    Binary,
    Categorical { categories: usize },
    Continuous,
}

/// One named covariate column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

/// Ordered covariate schema shared by a dataset and its feature map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSchema>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSchema>) -> Result<Self> {
        for col in &columns {
            if let ColumnKind::Categorical { categories } = col.kind {
                if categories < 2 {
                    return Err(Error::Schema(format!(
                        "column '{}': categorical needs at least 2 categories, got {}",
                        col.name, categories
                    )));
                }
            }
            if col.name.is_empty() {
                return Err(Error::Schema("empty column name".into()));
            }
        }
        let mut names: Vec<&str> = columns.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != columns.len() {
            return Err(Error::Schema("duplicate column names".into()));
        }
        Ok(Self { columns })
    }

    /// Schema of `d` continuous columns named `x1..xd`.
    pub fn continuous(d: usize) -> Self {
        let columns = (1..=d)
            .map(|i| ColumnSchema {
                name: format!("x{i}"),
                kind: ColumnKind::Continuous,
            })
            .collect();
        Self { columns }
    }

    /// Schema of `d` binary columns named `b1..bd`.
    pub fn binary(d: usize) -> Self {
        let columns = (1..=d)
            .map(|i| ColumnSchema {
                name: format!("b{i}"),
                kind: ColumnKind::Binary,
            })
            .collect();
        Self { columns }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Counts of (binary, continuous) columns, the `d'`/`d''` of the knot cap.
    pub fn binary_continuous_counts(&self) -> (usize, usize) {
        let mut binary = 0;
        let mut continuous = 0;
        for col in &self.columns {
            match col.kind {
                ColumnKind::Binary => binary += 1,
                ColumnKind::Continuous => continuous += 1,
                ColumnKind::Categorical { .. } => {}
            }
        }
        (binary, continuous)
    }

    /// Validates one raw covariate value against column `idx`.
    pub fn check_value(&self, idx: usize, value: f64) -> Result<()> {
        let col = &self.columns[idx];
        match col.kind {
            ColumnKind::Binary => {
                if value != 0.0 && value != 1.0 {
                    return Err(Error::NotBinary {
                        column: col.name.clone(),
                        value,
                    });
                }
            }
            ColumnKind::Categorical { categories } => {
                if !value.is_finite() || value.fract() != 0.0 || value < 0.0 {
                    return Err(Error::CategoryOutOfRange {
                        column: col.name.clone(),
                        code: value,
                        categories,
                    });
                }
                if (value as usize) >= categories {
                    return Err(Error::CategoryOutOfRange {
                        column: col.name.clone(),
                        code: value,
                        categories,
                    });
                }
            }
            ColumnKind::Continuous => {
                if !value.is_finite() {
                    return Err(Error::NonFinite {
                        column: col.name.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Validates a whole covariate row.
    pub fn check_row(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        for (idx, &v) in row.iter().enumerate() {
            self.check_value(idx, v)?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let schema: Schema = serde_json::from_str(text)?;
        Schema::new(schema.columns)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serialization cannot fail")
    }
}
