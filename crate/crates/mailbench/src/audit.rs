use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use mailbench_core::analysis::{concentrability, AnalysisError, ConcentrabilityReport};
use mailbench_core::{GameError, MarkovGame, PolicyPair, StageDistribution, StagePolicy};

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed json in {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Expert file layout: `{"mu": [h][s][a], "nu": [h][s][b]}`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpertsFile {
    pub mu: Vec<Vec<Vec<f64>>>,
    pub nu: Vec<Vec<Vec<f64>>>,
}

fn read(path: &Path) -> Result<String, AuditError> {
    std::fs::read_to_string(path).map_err(|source| AuditError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, AuditError> {
    serde_json::from_str(&read(path)?).map_err(|source| AuditError::Json {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_experts(path: &Path) -> Result<PolicyPair, AuditError> {
    let file: ExpertsFile = parse(path)?;
    Ok(PolicyPair::new(StagePolicy::from_nested(&file.mu)?, StagePolicy::from_nested(&file.nu)?)?)
}

/// Data distribution file layout: `[h][s]`.
pub fn load_rho(path: &Path) -> Result<StageDistribution, AuditError> {
    let rows: Vec<Vec<f64>> = parse(path)?;
    Ok(StageDistribution::from_rows(&rows)?)
}

pub fn audit_files(game: &Path, experts: &Path, rho: &Path) -> Result<ConcentrabilityReport, AuditError> {
    let game = MarkovGame::from_json(&read(game)?)?;
    Ok(concentrability(&game, &load_experts(experts)?, &load_rho(rho)?)?)
}
