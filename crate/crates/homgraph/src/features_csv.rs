//! Feature records as CSV: `app_id,label,presence[0],…,ratio[i][TYPE],…`.
//!
//! Values are written with Rust's shortest round-trip formatting, so reading
//! a file back reproduces the vectors bit for bit.

use homgraph_core::features::feature_names;
use homgraph_core::{Label, LabeledSample};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub app_id: String,
    pub label: Option<Label>,
    pub vector: Vec<f64>,
}

impl FeatureRecord {
    /// `None` for unlabelled records.
    pub fn to_sample(&self) -> Option<LabeledSample> {
        Some(LabeledSample {
            app_id: self.app_id.clone(),
            label: self.label?,
            vector: self.vector.clone(),
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("header: {0}")]
    Header(String),
    #[error("record {record}: {message}")]
    Record { record: usize, message: String },
}

pub fn write_features(records: &[FeatureRecord], catalog_len: usize) -> Result<Vec<u8>, CsvError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["app_id".to_string(), "label".to_string()];
    header.extend(feature_names(catalog_len));
    w.write_record(&header)?;
    for r in records {
        let mut row = Vec::with_capacity(header.len());
        row.push(r.app_id.clone());
        row.push(r.label.map(|l| l.as_str().to_string()).unwrap_or_default());
        row.extend(r.vector.iter().map(|v| format!("{v}")));
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| CsvError::Csv(csv::Error::from(e.into_error())))
}

pub fn read_features(bytes: &[u8]) -> Result<Vec<FeatureRecord>, CsvError> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers()?.clone();
    let columns: Vec<&str> = header.iter().collect();
    if columns.len() < 2 || columns[0] != "app_id" || columns[1] != "label" {
        return Err(CsvError::Header("expected app_id,label first".into()));
    }
    let dims = columns.len() - 2;
    if dims % 7 != 0 {
        return Err(CsvError::Header(format!(
            "{dims} feature columns is not a multiple of 7"
        )));
    }
    let expected = feature_names(dims / 7);
    if let Some(i) = (0..dims).find(|&i| columns[i + 2] != expected[i]) {
        return Err(CsvError::Header(format!(
            "column {} is `{}`, expected `{}`",
            i + 3,
            columns[i + 2],
            expected[i]
        )));
    }
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let record = i + 1;
        let bad = |message: String| CsvError::Record { record, message };
        let label = match &row[1] {
            "" => None,
            s => Some(
                s.parse::<Label>()
                    .map_err(|_| bad(format!("unknown label `{s}`")))?,
            ),
        };
        let vector = row
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>().map_err(|_| bad(format!("`{v}` is not a number"))))
            .collect::<Result<Vec<f64>, CsvError>>()?;
        out.push(FeatureRecord {
            app_id: row[0].to_string(),
            label,
            vector,
        });
    }
    Ok(out)
}
