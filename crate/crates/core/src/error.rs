use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mask has no foreground pixel")]
    EmptyMask,
    #[error("largest component has only {boundary} boundary pixels (need at least 4)")]
    DegenerateComponent { boundary: usize },
    #[error("contour has fewer than 3 distinct points")]
    TooFewPoints,
    #[error("invalid sample count {0} (need at least 8)")]
    InvalidSampleCount(usize),
    #[error("zero-length segment at sample {index}")]
    DegenerateSegment { index: usize },
    #[error("sample count mismatch: {left} vs {right}")]
    SampleCountMismatch { left: usize, right: usize },
    #[error("invalid length {0}")]
    InvalidLength(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("shape path is empty")]
    EmptyPath,
    #[error("need at least 2 strictly positive weights, got {0}")]
    TooFewPositiveWeights(usize),
    #[error("times must be strictly increasing (violated at index {0})")]
    NonIncreasingTimes(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("evaluation point {t} outside [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("need at least {need} frames, got {got}")]
    InsufficientFrames { need: usize, got: usize },
    #[error("every frame weight is zero")]
    AllWeightsZero,
    #[error("piecewise weighting requires outlier flags")]
    MissingOutlierFlags,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("neighbour graph is disconnected into {} components", components.len())]
    DisconnectedGraph { components: Vec<Vec<usize>> },
    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyMask => "EmptyMask",
            Error::DegenerateComponent { .. } => "DegenerateComponent",
            Error::TooFewPoints => "TooFewPoints",
            Error::InvalidSampleCount(_) => "InvalidSampleCount",
            Error::DegenerateSegment { .. } => "DegenerateSegment",
            Error::SampleCountMismatch { .. } => "SampleCountMismatch",
            Error::InvalidLength(_) => "InvalidLength",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::EmptyPath => "EmptyPath",
            Error::TooFewPositiveWeights(_) => "TooFewPositiveWeights",
            Error::NonIncreasingTimes(_) => "NonIncreasingTimes",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::InsufficientFrames { .. } => "InsufficientFrames",
            Error::AllWeightsZero => "AllWeightsZero",
            Error::MissingOutlierFlags => "MissingOutlierFlags",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::DisconnectedGraph { .. } => "DisconnectedGraph",
            Error::Format { .. } => "Format",
            Error::Io(_) => "Io",
        }
    }

    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            what,
            detail: detail.into(),
        }
    }
}
