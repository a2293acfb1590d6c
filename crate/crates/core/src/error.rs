use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("duplicate channel frequency {0} Hz")]
    DuplicateFrequency(u64),
    #[error("duplicate transmit power level {0} dBm")]
    DuplicatePowerLevel(i32),
    #[error("transmit power level {0} dBm has no entry in the energy table (energy.p_toa_mw)")]
    MissingPowerDraw(i32),
    #[error("receivable channel {0} Hz is not among the selectable channels")]
    UnknownReceivableChannel(u64),
    #[error("{0}")]
    Invalid(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("arm {0} has never been pulled; run the initialization pass first")]
    UnpulledArm(usize),
    #[error("negative reward {0} fed to arm statistics")]
    NegativeReward(f64),
    #[error("arm index {index} out of range for {len} arms")]
    ArmOutOfRange { index: usize, len: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no records in scope")]
    EmptyScope,
    #[error("total active energy is zero")]
    ZeroEnergy,
    #[error("cannot aggregate summaries from different configurations")]
    MixedConfigs,
}

/// Errors surfaced by the sweep driver and table emitter.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON in {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("run panicked (policy {policy}, {devices} devices, seed {seed}): {message}")]
    RunPanicked { policy: String, devices: usize, seed: u64, message: String },
    #[error("missing artifact for run {run}: {path}")]
    MissingArtifact { run: String, path: PathBuf },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
