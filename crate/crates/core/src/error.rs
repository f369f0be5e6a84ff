use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input shape mismatch: expected {expected:?}, got {actual:?}")]
    InputShape { expected: Vec<usize>, actual: Vec<usize> },

    #[error("label {label} out of range for {num_outputs} outputs")]
    Label { label: usize, num_outputs: usize },

    #[error("invalid layer {index} ({layer}): {reason}")]
    Layer {
        index: usize,
        layer: String,
        reason: String,
    },

    #[error("configuration error at layer {index} ({layer}): {reason}")]
    Config {
        index: usize,
        layer: String,
        reason: String,
    },

    #[error("network structure error: {0}")]
    Structure(String),

    #[error("gradient shape mismatch: {0}")]
    GradientShape(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("manifest {path}: {reason}")]
    Ingestion { path: PathBuf, reason: String },

    #[error("duplicate sample_id `{0}`")]
    DuplicateSample(String),

    #[error("pair `{pair_id}` has conflicting {field} across modalities")]
    PairConflict { pair_id: String, field: &'static str },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("fusion error: {0}")]
    Fusion(String),

    #[error("invalid statistics input: {0}")]
    Stats(String),

    #[error("weight file: {0}")]
    WeightFile(String),

    #[error("invalid config: {0}")]
    ConfigFile(String),

    #[error("incomplete experiment directory, missing: {}", .0.join(", "))]
    MissingArtifacts(Vec<String>),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage {
            stage,
            source: Box::new(e),
        }
    }

    /// Process exit code: 2 for configuration and I/O problems, 1 for
    /// failures inside the pipeline.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Image { .. }
            | Error::ConfigFile(_)
            | Error::Ingestion { .. }
            | Error::MissingArtifacts(_) => 2,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}
