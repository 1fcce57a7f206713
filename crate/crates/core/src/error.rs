use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("attitude singularity: theta = {theta:.6} rad is within the guard band of 90 deg")]
    Singularity { theta: f64 },

    #[error("matrix is singular or ill-conditioned: {0}")]
    SingularMatrix(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("unsupported hull shape: {0}")]
    UnsupportedShape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid override `{0}`: {1}")]
    Override(String, String),

    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
