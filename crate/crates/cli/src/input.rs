//! CSV data ingestion for the `estimate` command.
//!
//! Expected layout: one row per observation, first column the response,
//! remaining columns the covariates (without an intercept column; it is
//! added here). Rows with an empty response field are auxiliary
//! covariate-only observations. An optional header row is skipped.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use regconv::{AuxiliarySample, CompleteSample};

use crate::CliError;

pub fn read_data_csv(path: &Path) -> Result<(CompleteSample, AuxiliarySample), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;

    let mut complete: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut auxiliary: Vec<Vec<f64>> = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(csv_error_message(path, &e)))?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.len() < 2 {
            return Err(CliError::Input(format!(
                "{} line {line}: expected a response column plus covariates, got {} fields",
                path.display(),
                record.len()
            )));
        }
        let mut fields = record.iter();
        let response_field = fields.next().unwrap();
        let covariates: Vec<f64> = fields
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().map_err(|_| {
                    CliError::Input(format!(
                        "{} line {line}: covariate column {} is not a number: `{field}`",
                        path.display(),
                        col + 2
                    ))
                })
            })
            .collect::<Result<_, _>>()
            .or_else(|e| {
                // A single non-numeric leading row is a header.
                if line == 1 {
                    Ok(Vec::new())
                } else {
                    Err(e)
                }
            })?;
        if covariates.is_empty() {
            continue;
        }
        if response_field.is_empty() {
            auxiliary.push(covariates);
        } else {
            let response = response_field.parse::<f64>().map_err(|_| {
                CliError::Input(format!(
                    "{} line {line}: response is not a number: `{response_field}`",
                    path.display()
                ))
            })?;
            complete.push((response, covariates));
        }
    }

    if complete.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no complete rows (response plus covariates) found",
            path.display()
        )));
    }
    let j = complete[0].1.len();
    let design = DMatrix::from_fn(complete.len(), j + 1, |r, c| {
        if c == 0 {
            1.0
        } else {
            complete[r].1[c - 1]
        }
    });
    let responses = DVector::from_fn(complete.len(), |r, _| complete[r].0);
    let complete_sample = CompleteSample::new(responses, design)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let aux_design = DMatrix::from_fn(auxiliary.len(), j + 1, |r, c| {
        if c == 0 {
            1.0
        } else {
            auxiliary[r][c - 1]
        }
    });
    let aux_sample = AuxiliarySample::new(aux_design)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((complete_sample, aux_sample))
}

fn csv_error_message(path: &Path, error: &csv::Error) -> String {
    if let csv::ErrorKind::UnequalLengths { pos, expected_len, len } = error.kind() {
        let line = pos.as_ref().map_or(0, |p| p.line());
        format!(
            "{} line {line}: expected {expected_len} columns, found {len}",
            path.display()
        )
    } else {
        format!("{}: {error}", path.display())
    }
}
