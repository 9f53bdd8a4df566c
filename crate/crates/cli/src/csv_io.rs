//! CSV ingestion and export.
//!
//! Files need a header row. Every column other than the response and the
//! metadata columns is a feature and must parse as a finite number. Metadata
//! cells that parse as numbers become numeric values, anything else is kept as
//! text. Empty cells are rejected everywhere.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use subsel_core::dataset::{Dataset, MetaColumn, MetaValue};
use subsel_core::linalg::Matrix;

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}: malformed CSV: {source}")]
    Malformed { origin: String, source: csv::Error },
    #[error("{origin}: no column named `{column}` in the header")]
    MissingColumn { origin: String, column: String },
    #[error("{origin}: column `{column}` appears more than once")]
    DuplicateColumn { origin: String, column: String },
    #[error("{origin}: row {row}, column `{column}`: missing value")]
    MissingValue { origin: String, row: usize, column: String },
    #[error("{origin}: row {row}, column `{column}`: cannot parse `{value}` as a number")]
    Unparseable {
        origin: String,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{origin}: row {row}, column `{column}`: value is not finite")]
    NonFinite { origin: String, row: usize, column: String },
    #[error("{origin}: the file has no data rows")]
    NoRows { origin: String },
    #[error("{origin}: {source}")]
    Invalid {
        origin: String,
        source: subsel_core::Error,
    },
}

/// Loads a dataset. `response` names the response column, `meta` the
/// metadata columns; the rest are features, in file order.
pub fn load_csv(path: &Path, response: &str, meta: &[String]) -> Result<Dataset, CsvError> {
    let file = File::open(path).map_err(|source| CsvError::Open {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, &path.display().to_string(), response, meta)
}

/// Like [`load_csv`] but from any reader; `origin` labels error messages.
/// Reported row numbers count data rows from 1, not counting the header.
pub fn read_csv<R: Read>(reader: R, origin: &str, response: &str, meta: &[String]) -> Result<Dataset, CsvError> {
    let malformed = |source| CsvError::Malformed {
        origin: origin.to_string(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(malformed)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    for (i, name) in header.iter().enumerate() {
        if header[..i].contains(name) {
            return Err(CsvError::DuplicateColumn {
                origin: origin.to_string(),
                column: name.clone(),
            });
        }
    }
    let position = |column: &str| {
        header
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| CsvError::MissingColumn {
                origin: origin.to_string(),
                column: column.to_string(),
            })
    };
    let response_at = position(response)?;
    let meta_at = meta.iter().map(|m| position(m)).collect::<Result<Vec<_>, _>>()?;
    let feature_at: Vec<usize> = (0..header.len())
        .filter(|j| *j != response_at && !meta_at.contains(j))
        .collect();

    let mut features = Vec::new();
    let mut y = Vec::new();
    let mut meta_values: Vec<Vec<MetaValue>> = vec![Vec::new(); meta.len()];
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(malformed)?;
        let row = i + 1;
        let cell = |j: usize| -> Result<&str, CsvError> {
            let value = record.get(j).unwrap_or("").trim();
            if value.is_empty() {
                return Err(CsvError::MissingValue {
                    origin: origin.to_string(),
                    row,
                    column: header[j].clone(),
                });
            }
            Ok(value)
        };
        let number = |j: usize| -> Result<f64, CsvError> {
            let text = cell(j)?;
            let x: f64 = text.parse().map_err(|_| CsvError::Unparseable {
                origin: origin.to_string(),
                row,
                column: header[j].clone(),
                value: text.to_string(),
            })?;
            if !x.is_finite() {
                return Err(CsvError::NonFinite {
                    origin: origin.to_string(),
                    row,
                    column: header[j].clone(),
                });
            }
            Ok(x)
        };
        for &j in &feature_at {
            features.push(number(j)?);
        }
        y.push(number(response_at)?);
        for (values, &j) in meta_values.iter_mut().zip(&meta_at) {
            let text = cell(j)?;
            values.push(match text.parse::<f64>() {
                Ok(x) if x.is_finite() => MetaValue::Number(x),
                _ => MetaValue::Text(text.to_string()),
            });
        }
    }
    if y.is_empty() {
        return Err(CsvError::NoRows {
            origin: origin.to_string(),
        });
    }

    let invalid = |source| CsvError::Invalid {
        origin: origin.to_string(),
        source,
    };
    let x = Matrix::from_vec(y.len(), feature_at.len(), features).map_err(invalid)?;
    let names = feature_at.iter().map(|&j| header[j].clone()).collect();
    let mut data = Dataset::new(x, y)
        .and_then(|d| d.with_names(names, response))
        .map_err(invalid)?;
    for (name, values) in meta.iter().zip(meta_values) {
        data = data
            .with_meta(MetaColumn {
                name: name.clone(),
                values,
            })
            .map_err(invalid)?;
    }
    Ok(data)
}

/// Serializes a dataset as CSV: features, response, then metadata columns.
pub fn dataset_to_csv(data: &Dataset) -> Vec<u8> {
    let mut header: Vec<String> = data.feature_names().to_vec();
    header.push(data.response_name().to_string());
    header.extend(data.meta().iter().map(|c| c.name.clone()));
    let rows = (0..data.n_rows()).map(|i| {
        let mut row: Vec<String> = data.features().row(i).iter().map(|x| x.to_string()).collect();
        row.push(data.response()[i].to_string());
        row.extend(data.meta().iter().map(|c| c.values[i].to_string()));
        row
    });
    table_to_csv(&header, rows)
}

/// Renders a header and rows of preformatted cells.
pub fn table_to_csv<H, R, C>(header: &[H], rows: R) -> Vec<u8>
where
    H: AsRef<str>,
    R: IntoIterator<Item = Vec<C>>,
    C: AsRef<str>,
{
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    // writing to a Vec cannot fail
    wtr.write_record(header.iter().map(AsRef::as_ref)).expect("in-memory write");
    for row in rows {
        wtr.write_record(row.iter().map(AsRef::as_ref)).expect("in-memory write");
    }
    wtr.flush().expect("in-memory flush");
    wtr.into_inner().expect("in-memory writer")
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    File::create(path)?.write_all(bytes)
}
