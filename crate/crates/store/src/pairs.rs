//! Calibration pair CSV input and result JSON output.
//!
//! The CSV carries a `distance,label` header with `label` in {same, diff}.

use std::path::Path;

use ngf_core::calibration::{CalibrationPair, CalibrationResult};

use crate::{Result, StoreIoError};

/// Reads labeled calibration pairs from a CSV file.
pub fn read_calibration_csv(path: impl AsRef<Path>) -> Result<Vec<CalibrationPair>> {
    let mut reader = csv::Reader::from_path(path)?;
    {
        let headers = reader.headers()?;
        if headers.len() != 2 || &headers[0] != "distance" || &headers[1] != "label" {
            return Err(StoreIoError::Manifest(format!(
                "calibration csv must have header `distance,label`, got {headers:?}"
            )));
        }
    }
    let mut pairs = Vec::new();
    for record in reader.records() {
        let record = record?;
        let distance: f64 = record[0]
            .trim()
            .parse()
            .map_err(|_| StoreIoError::Manifest(format!("bad distance `{}`", &record[0])))?;
        let same = match record[1].trim() {
            "same" => true,
            "diff" => false,
            other => {
                return Err(StoreIoError::Manifest(format!(
                    "label must be `same` or `diff`, got `{other}`"
                )))
            }
        };
        pairs.push(CalibrationPair { distance, same });
    }
    Ok(pairs)
}

/// Serializes a calibration result as a JSON document with all fields.
pub fn write_calibration_json(result: &CalibrationResult) -> Result<String> {
    Ok(serde_json::to_string_pretty(result)?)
}
