//! CSV event-log loading and writing.
//!
//! Files carry a header row; the mapping from columns to roles (entity id,
//! observation label, duration, predictors) is configurable. Rows are
//! grouped by entity in order of first appearance, preserving file order
//! within each entity.

use std::path::Path;

use anyhow::{bail, Context, Result};
use cthsmm_core::{DatasetBuilder, TemporalDataset};

use crate::io::write_atomic;

/// Column-role mapping for event-log CSV files.
#[derive(Debug, Clone)]
pub struct ColumnRoles {
    pub entity: String,
    pub observation: String,
    pub duration: String,
    /// Empty means: every column not claimed by another role is a
    /// predictor, in header order.
    pub predictors: Vec<String>,
}

impl ColumnRoles {
    pub fn new(entity: &str, observation: &str, duration: &str, predictors: Vec<String>) -> Self {
        ColumnRoles {
            entity: entity.to_string(),
            observation: observation.to_string(),
            duration: duration.to_string(),
            predictors,
        }
    }
}

impl Default for ColumnRoles {
    fn default() -> Self {
        ColumnRoles::new("entity", "observation", "duration", Vec::new())
    }
}

/// Load a temporal dataset from a CSV file. Row diagnostics count data
/// rows from 1 (the header is row 0).
pub fn load_csv(path: &Path, roles: &ColumnRoles) -> Result<TemporalDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers = reader
        .headers()
        .with_context(|| format!("reading the header of {}", path.display()))?
        .clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("column {name:?} not found in the header of {}", path.display()))
    };
    let entity_col = find(&roles.entity)?;
    let obs_col = find(&roles.observation)?;
    let duration_col = find(&roles.duration)?;
    let predictor_names: Vec<String> = if roles.predictors.is_empty() {
        headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != entity_col && i != obs_col && i != duration_col)
            .map(|(_, h)| h.to_string())
            .collect()
    } else {
        roles.predictors.clone()
    };
    if predictor_names.is_empty() {
        bail!(
            "no predictor columns remain in {} after assigning the entity, observation, and duration roles",
            path.display()
        );
    }
    let predictor_cols: Vec<usize> = predictor_names
        .iter()
        .map(|n| find(n))
        .collect::<Result<_>>()?;

    let mut builder = DatasetBuilder::new(predictor_names.clone());
    let mut n_rows = 0usize;
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 1;
        let row = row.with_context(|| format!("row {line}: malformed CSV"))?;
        let field = |col: usize| -> Result<&str> {
            row.get(col)
                .with_context(|| format!("row {line}: missing field {col}"))
        };
        let entity = field(entity_col)?;
        let observation = field(obs_col)?;
        let raw_duration = field(duration_col)?;
        let duration: u32 = raw_duration.parse().with_context(|| {
            format!("row {line}: duration {raw_duration:?} is not a non-negative integer")
        })?;
        if duration < 1 {
            bail!("row {line}: duration must be at least 1");
        }
        let mut predictors = Vec::with_capacity(predictor_cols.len());
        for (&col, name) in predictor_cols.iter().zip(&predictor_names) {
            let raw = field(col)?;
            let value: f64 = raw
                .parse()
                .with_context(|| format!("row {line}: predictor {name} value {raw:?} is not numeric"))?;
            if !value.is_finite() {
                bail!("row {line}: predictor {name} value {raw:?} is not finite");
            }
            predictors.push(value);
        }
        builder
            .add_record(entity, observation, predictors, duration)
            .with_context(|| format!("row {line}"))?;
        n_rows += 1;
    }
    if n_rows == 0 {
        bail!("{} has no data rows", path.display());
    }
    Ok(builder.finish())
}

/// Write a dataset as CSV with columns entity, observation, predictors,
/// duration, using the role names for the non-predictor headers.
pub fn write_csv(path: &Path, data: &TemporalDataset, roles: &ColumnRoles) -> Result<()> {
    let schema = data.schema();
    let mut buffer = Vec::new();
    {
        let mut writer = csv::Writer::from_writer(&mut buffer);
        let mut header = vec![roles.entity.clone(), roles.observation.clone()];
        header.extend(schema.feature_names().iter().cloned());
        header.push(roles.duration.clone());
        writer.write_record(&header)?;
        for entity in data.entities() {
            for record in &entity.records {
                let mut row = vec![
                    entity.id.clone(),
                    schema.alphabet()[record.observation].clone(),
                ];
                row.extend(record.predictors.iter().map(|v| format!("{v}")));
                row.push(record.duration.to_string());
                writer.write_record(&row)?;
            }
        }
        writer.flush()?;
    }
    write_atomic(path, &buffer)
}
