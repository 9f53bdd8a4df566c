//! Tabular data model and target/source splitting.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::linalg::Matrix;
use crate::{Error, Result};

/// A per-row metadata value: time, coordinates, hospital id and the like.
#[derive(Debug, Clone, PartialEq)]
pub enum MetaValue {
    Number(f64),
    Text(String),
}

impl MetaValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            MetaValue::Number(x) => Some(*x),
            MetaValue::Text(_) => None,
        }
    }

    /// Total order used for categorical grouping: numbers (by value) sort before text.
    pub fn total_cmp(&self, other: &MetaValue) -> Ordering {
        match (self, other) {
            (MetaValue::Number(a), MetaValue::Number(b)) => a.total_cmp(b),
            (MetaValue::Number(_), MetaValue::Text(_)) => Ordering::Less,
            (MetaValue::Text(_), MetaValue::Number(_)) => Ordering::Greater,
            (MetaValue::Text(a), MetaValue::Text(b)) => a.cmp(b),
        }
    }
}

impl core::fmt::Display for MetaValue {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MetaValue::Number(x) => write!(f, "{x}"),
            MetaValue::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaColumn {
    pub name: String,
    pub values: Vec<MetaValue>,
}

impl MetaColumn {
    pub fn numeric(name: impl Into<String>, values: Vec<f64>) -> Self {
        MetaColumn {
            name: name.into(),
            values: values.into_iter().map(MetaValue::Number).collect(),
        }
    }
}

/// Features, response and optional per-row metadata.
///
/// Row counts always agree and features/response are finite. Metadata is kept
/// out of the feature matrix unless explicitly moved there with
/// [`Dataset::with_meta_as_features`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    response: Vec<f64>,
    feature_names: Vec<String>,
    response_name: String,
    meta: Vec<MetaColumn>,
}

impl Dataset {
    pub fn new(features: Matrix, response: Vec<f64>) -> Result<Self> {
        if features.nrows() != response.len() {
            return Err(Error::DimensionMismatch {
                context: "response length",
                expected: features.nrows(),
                found: response.len(),
            });
        }
        for (i, row) in features.rows_iter().enumerate() {
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { row: i, column: j });
            }
        }
        if let Some(i) = response.iter().position(|y| !y.is_finite()) {
            return Err(Error::NonFinite {
                row: i,
                column: features.ncols(),
            });
        }
        let feature_names = (0..features.ncols()).map(|j| format!("x{}", j + 1)).collect();
        Ok(Dataset {
            features,
            response,
            feature_names,
            response_name: String::from("y"),
            meta: Vec::new(),
        })
    }

    pub fn with_names(mut self, feature_names: Vec<String>, response_name: impl Into<String>) -> Result<Self> {
        if feature_names.len() != self.features.ncols() {
            return Err(Error::DimensionMismatch {
                context: "feature name count",
                expected: self.features.ncols(),
                found: feature_names.len(),
            });
        }
        self.feature_names = feature_names;
        self.response_name = response_name.into();
        Ok(self)
    }

    pub fn with_meta(mut self, column: MetaColumn) -> Result<Self> {
        if column.values.len() != self.n_rows() {
            return Err(Error::DimensionMismatch {
                context: "metadata column length",
                expected: self.n_rows(),
                found: column.values.len(),
            });
        }
        if let Some(i) = column
            .values
            .iter()
            .position(|v| matches!(v, MetaValue::Number(x) if !x.is_finite()))
        {
            return Err(Error::NonFinite {
                row: i,
                column: self.features.ncols() + 1 + self.meta.len(),
            });
        }
        self.meta.push(column);
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn meta(&self) -> &[MetaColumn] {
        &self.meta
    }

    pub fn meta_column(&self, name: &str) -> Result<&MetaColumn> {
        self.meta
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(String::from(name)))
    }

    /// A metadata column as numbers, failing on the first text cell.
    pub fn numeric_meta(&self, name: &str) -> Result<Vec<f64>> {
        let column = self.meta_column(name)?;
        column
            .values
            .iter()
            .enumerate()
            .map(|(row, v)| {
                v.as_number().ok_or_else(|| Error::NonNumericMeta {
                    column: String::from(name),
                    row,
                })
            })
            .collect()
    }

    /// Rows in the given order; repeated indices repeat rows.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(rows),
            response: rows.iter().map(|&i| self.response[i]).collect(),
            feature_names: self.feature_names.clone(),
            response_name: self.response_name.clone(),
            meta: self
                .meta
                .iter()
                .map(|c| MetaColumn {
                    name: c.name.clone(),
                    values: rows.iter().map(|&i| c.values[i].clone()).collect(),
                })
                .collect(),
        }
    }

    /// Moves the named numeric metadata columns into the feature matrix
    /// (appended after the existing features).
    pub fn with_meta_as_features(&self, names: &[String]) -> Result<Dataset> {
        let mut extra = Matrix::zeros(self.n_rows(), names.len());
        for (j, name) in names.iter().enumerate() {
            for (i, x) in self.numeric_meta(name)?.into_iter().enumerate() {
                extra.set(i, j, x);
            }
        }
        let mut out = self.clone();
        out.features = self.features.hstack(&extra)?;
        out.feature_names.extend(names.iter().cloned());
        out.meta.retain(|c| !names.contains(&c.name));
        Ok(out)
    }
}

/// Half-open interval `lower < value <= upper` on one metadata column; a
/// missing bound is unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeBound {
    pub column: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl RangeBound {
    pub fn contains(&self, x: f64) -> bool {
        self.lower.is_none_or(|lo| x > lo) && self.upper.is_none_or(|hi| x <= hi)
    }
}

/// Which rows form the target.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitSpec {
    /// Rows inside every bound (a box when several columns are given).
    MetadataRange(Vec<RangeBound>),
    MetadataEquality { column: String, value: MetaValue },
    RowIndices(Vec<usize>),
}

impl SplitSpec {
    pub fn target_mask(&self, data: &Dataset) -> Result<Vec<bool>> {
        let n = data.n_rows();
        match self {
            SplitSpec::MetadataRange(bounds) => {
                let mut mask = vec![true; n];
                for bound in bounds {
                    let values = data.numeric_meta(&bound.column)?;
                    for (m, x) in mask.iter_mut().zip(values) {
                        *m &= bound.contains(x);
                    }
                }
                Ok(mask)
            }
            SplitSpec::MetadataEquality { column, value } => Ok(data
                .meta_column(column)?
                .values
                .iter()
                .map(|v| v.total_cmp(value) == Ordering::Equal)
                .collect()),
            SplitSpec::RowIndices(rows) => {
                let mut mask = vec![false; n];
                for &i in rows {
                    if i >= n {
                        return Err(Error::InvalidParameter {
                            name: "target row index",
                            reason: "index past the last row",
                        });
                    }
                    mask[i] = true;
                }
                Ok(mask)
            }
        }
    }
}

/// Target and source datasets with the original row indices of each.
#[derive(Debug, Clone)]
pub struct Split {
    pub target: Dataset,
    pub source: Dataset,
    pub target_rows: Vec<usize>,
    pub source_rows: Vec<usize>,
}

pub fn split_target_source(data: &Dataset, spec: &SplitSpec) -> Result<Split> {
    let mask = spec.target_mask(data)?;
    let (target_rows, source_rows): (Vec<usize>, Vec<usize>) =
        (0..data.n_rows()).partition(|&i| mask[i]);
    if target_rows.is_empty() {
        return Err(Error::EmptyTarget);
    }
    if source_rows.is_empty() {
        return Err(Error::EmptySource);
    }
    Ok(Split {
        target: data.subset(&target_rows),
        source: data.subset(&source_rows),
        target_rows,
        source_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn timed(n: usize) -> Dataset {
        let x = Matrix::from_vec(n, 1, (0..n).map(|i| i as f64).collect()).unwrap();
        let y = (0..n).map(|i| 2.0 * i as f64).collect();
        Dataset::new(x, y)
            .unwrap()
            .with_meta(MetaColumn::numeric("z", (1..=n).map(|z| z as f64).collect()))
            .unwrap()
    }

    #[test]
    fn range_split_takes_latest_rows() {
        let data = timed(10);
        let spec = SplitSpec::MetadataRange(vec![RangeBound {
            column: "z".into(),
            lower: Some(8.0),
            upper: None,
        }]);
        let split = split_target_source(&data, &spec).unwrap();
        assert_eq!(split.target_rows, vec![8, 9]);
        assert_eq!(split.source_rows, (0..8).collect::<Vec<_>>());
        assert_eq!(split.target.numeric_meta("z").unwrap(), vec![9.0, 10.0]);
    }

    #[test]
    fn box_split_requires_all_bounds() {
        let data = timed(6)
            .with_meta(MetaColumn::numeric("lon", vec![0.0, 5.0, 5.0, 0.0, 5.0, 5.0]))
            .unwrap();
        let spec = SplitSpec::MetadataRange(vec![
            RangeBound {
                column: "z".into(),
                lower: Some(1.0),
                upper: Some(4.0),
            },
            RangeBound {
                column: "lon".into(),
                lower: Some(4.0),
                upper: Some(6.0),
            },
        ]);
        let split = split_target_source(&data, &spec).unwrap();
        assert_eq!(split.target_rows, vec![1, 2]);
    }

    #[test]
    fn split_errors() {
        let data = timed(4);
        let all = SplitSpec::MetadataRange(vec![RangeBound {
            column: "z".into(),
            lower: None,
            upper: None,
        }]);
        assert_eq!(split_target_source(&data, &all).unwrap_err(), Error::EmptySource);
        let none = SplitSpec::RowIndices(vec![]);
        assert_eq!(split_target_source(&data, &none).unwrap_err(), Error::EmptyTarget);
        let unknown = SplitSpec::MetadataEquality {
            column: "hospital".into(),
            value: MetaValue::Number(1.0),
        };
        assert!(matches!(
            split_target_source(&data, &unknown),
            Err(Error::UnknownColumn(_))
        ));
    }

    #[test]
    fn equality_split_on_text() {
        let data = timed(3)
            .with_meta(MetaColumn {
                name: "site".into(),
                values: vec![
                    MetaValue::Text("a".into()),
                    MetaValue::Text("b".into()),
                    MetaValue::Text("a".into()),
                ],
            })
            .unwrap();
        let spec = SplitSpec::MetadataEquality {
            column: "site".into(),
            value: MetaValue::Text("b".into()),
        };
        let split = split_target_source(&data, &spec).unwrap();
        assert_eq!(split.target_rows, vec![1]);
    }

    #[test]
    fn rejects_non_finite() {
        let x = Matrix::from_vec(2, 1, vec![1.0, f64::NAN]).unwrap();
        assert_eq!(
            Dataset::new(x, vec![0.0, 1.0]).unwrap_err(),
            Error::NonFinite { row: 1, column: 0 }
        );
    }

    #[test]
    fn meta_as_features() {
        let data = timed(3);
        let moved = data.with_meta_as_features(&["z".into()]).unwrap();
        assert_eq!(moved.n_features(), 2);
        assert_eq!(moved.features().row(2), &[2.0, 3.0]);
        assert!(moved.meta().is_empty());
    }
}
