use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use ala_core::data_model::DesignMatrix;
use ala_core::search::PosteriorSummary;

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the JSON form of a configuration.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("configuration serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn csv_writer(path: &Path) -> CliResult<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_io(path, e))
}

pub fn csv_io(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        kind => CliError::Config(format!("{}: {kind:?}", path.display())),
    }
}

/// Writes rows of already-formatted fields.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_io(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// `models.csv`: one row per model, most probable first. Failed models keep
/// a `-inf` score and zero probability.
pub fn write_models(path: &Path, post: &PosteriorSummary) -> CliResult<()> {
    let gibbs = post.models.iter().any(|e| e.visits.is_some());
    let mut header = vec!["model", "size", "log_score", "log_prior", "prob"];
    if gibbs {
        header.push("visits");
    }
    let rows: Vec<Vec<String>> = post
        .models
        .iter()
        .map(|e| {
            let mut r = vec![
                e.model.bit_string(),
                e.model.size().to_string(),
                e.log_ml.to_string(),
                e.log_prior.to_string(),
                e.prob.to_string(),
            ];
            if gibbs {
                r.push(e.visits.unwrap_or(0).to_string());
            }
            r
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// `inclusion.csv`: group id, its columns, and the inclusion probability
/// (plus the Rao–Blackwellized estimate after Gibbs sampling).
pub fn write_inclusion(path: &Path, post: &PosteriorSummary, design: &DesignMatrix, labels: &[String]) -> CliResult<()> {
    let mut header = vec!["group", "columns", "probability"];
    if post.inclusion_rb.is_some() {
        header.push("probability_rb");
    }
    let rows: Vec<Vec<String>> = (0..post.n_groups())
        .map(|j| {
            let cols: Vec<&str> = design.group(j).map(|c| design.column_names()[c].as_str()).collect();
            let mut r = vec![labels[j].clone(), cols.join(";"), post.inclusion[j].to_string()];
            if let Some(rb) = &post.inclusion_rb {
                r.push(rb[j].to_string());
            }
            r
        })
        .collect();
    write_csv(path, &header, &rows)
}
