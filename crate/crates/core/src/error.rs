use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("mode error in {0}")]
    Mode(String),
    #[error("policy error: {0}")]
    Policy(String),
    #[error("completeness error: {0}")]
    Completeness(String),
    #[error("analysis error: {0}")]
    Analysis(String),
    #[error("meta-interpreter error: {0}")]
    Meta(String),
    #[error("specialization error: {0}")]
    Specialize(String),
    #[error("synthesis error: {0}")]
    Synthesis(String),
    #[error("{stage}: {source}")]
    Stage { stage: &'static str, source: Box<Error> },
    #[error("{0}")]
    Usage(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
