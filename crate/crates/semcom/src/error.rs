use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus: {0}")]
    Corpus(String),

    #[error("knowledge: {0}")]
    Knowledge(String),

    #[error("metrics: {0}")]
    Metrics(String),

    #[error("channel: {0}")]
    Channel(String),

    #[error("pipeline: {0}")]
    Pipeline(String),

    #[error("dap: {0}")]
    Dap(String),

    #[error("io: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
