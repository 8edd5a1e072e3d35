use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] remnant_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("invalid experiment configuration: {0}")]
    Config(String),

    #[error("sample {sample}: no feasible target after {attempts} draws (admissible range [{low}, {high}])")]
    ResampleCap {
        sample: usize,
        attempts: usize,
        low: f64,
        high: f64,
    },

    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

pub(crate) fn io_at(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}

pub(crate) fn csv_at(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Csv { path, source }
}
