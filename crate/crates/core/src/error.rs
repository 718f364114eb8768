use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: String,
        message: String,
    },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate fit: {0}")]
    Degenerate(String),

    #[error("dataset is not in canonical temporal order")]
    Unsorted,

    #[error("match {0} has no betting odds")]
    MissingOdds(String),

    #[error("match {key} is missing statistic `{stat}`")]
    MissingStat { key: String, stat: String },

    #[error("config: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
