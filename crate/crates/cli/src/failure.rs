use serde_json::{json, Value};
use shapefilter::Error;

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_DIMENSION: u8 = 4;
pub const EXIT_DISCONNECTED: u8 = 5;
pub const EXIT_NUMERIC: u8 = 6;

/// A terminal error: exit code plus the JSON object printed on stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub body: Value,
}

impl Failure {
    pub fn new(code: u8, kind: &str, message: impl Into<String>) -> Self {
        Failure {
            code,
            body: json!({ "error": kind, "message": message.into() }),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Failure::new(EXIT_CONFIG, "Config", message)
    }

    pub fn empty_input(message: impl Into<String>) -> Self {
        Failure::new(EXIT_INPUT, "EmptyInput", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Failure::new(EXIT_FAILURE, "Internal", message)
    }

    pub fn report(&self) {
        eprintln!("{}", self.body);
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::EmptyMask
            | Error::DegenerateComponent { .. }
            | Error::TooFewPoints
            | Error::InsufficientFrames { .. }
            | Error::EmptyPath
            | Error::Format { .. }
            | Error::Io(_) => EXIT_INPUT,
            Error::InvalidParameter(_)
            | Error::InvalidSampleCount(_)
            | Error::MissingOutlierFlags => EXIT_CONFIG,
            Error::DimensionMismatch(_)
            | Error::LengthMismatch { .. }
            | Error::SampleCountMismatch { .. } => EXIT_DIMENSION,
            Error::DisconnectedGraph { .. } => EXIT_DISCONNECTED,
            Error::DegenerateSegment { .. }
            | Error::InvalidLength(_)
            | Error::TooFewPositiveWeights(_)
            | Error::NonIncreasingTimes(_)
            | Error::OutOfRange { .. }
            | Error::AllWeightsZero => EXIT_NUMERIC,
        };
        let mut f = Failure::new(code, e.kind(), e.to_string());
        if let Error::DisconnectedGraph { components } = &e {
            f.body["components"] = json!(components);
        }
        f
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::from(Error::Io(e))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::new(EXIT_INPUT, "Format", e.to_string())
    }
}
