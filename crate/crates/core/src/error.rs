use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid resolution {0}: must be at least 2")]
    InvalidResolution(usize),
    #[error("invalid sample count: {0}")]
    InvalidCount(String),
    #[error("invalid pose: {0}")]
    InvalidPose(String),
    #[error("degenerate 6D rotation: {0}")]
    DegenerateRotation(String),
    #[error("matrix is not a proper rotation: {0}")]
    InvalidRotation(String),
    #[error("point lies behind the camera (depth {0})")]
    BehindCamera(f64),
    #[error("correspondence mismatch: {0} vs {1} points")]
    CorrespondenceMismatch(usize, usize),
    #[error("degenerate point cloud: {0}")]
    DegenerateCloud(String),
    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("{n} points exceed the exact EMD cap of {cap}; raise the cap or request approximate mode")]
    TooLarge { n: usize, cap: usize },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    /// Whether the error originates from reading or parsing input, as opposed
    /// to a violated precondition.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Parse { .. } | Error::Format(_))
    }

    /// Whether a computation broke down on otherwise valid input.
    pub fn is_numeric_error(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_) | Error::DegenerateRotation(_) | Error::InvalidRotation(_) | Error::DegenerateCloud(_)
        )
    }
}
