use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("frame {index} is {found_width}x{found_height}, expected {width}x{height}")]
    FrameSizeMismatch {
        index: usize,
        width: usize,
        height: usize,
        found_width: usize,
        found_height: usize,
    },

    #[error("no hand detected in any frame")]
    NoHandDetected,

    #[error("seed ({x}, {y}) is outside the frame")]
    SeedOutOfBounds { x: usize, y: usize },

    #[error("seed ({x}, {y}) has intensity {intensity}, below the glove floor {floor}")]
    SeedMismatch {
        x: usize,
        y: usize,
        intensity: u8,
        floor: u8,
    },

    #[error("region is empty")]
    EmptyRegion,

    #[error("hand tracking lost at frame {frame} after {gap} consecutive misses")]
    TrackingLost { frame: usize, gap: usize },

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("sequence of length {len} is too short to interpolate")]
    TooShort { len: usize },

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("mixture component {component} has no responsibility mass")]
    DegenerateComponent { component: usize },

    #[error("observation sequence is empty")]
    EmptySequence,

    #[error("training diverged at iteration {iteration}: non-finite log-likelihood")]
    TrainingDiverged { iteration: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("insufficient subjects: {available} available, {requested} requested for training")]
    InsufficientSubjects { available: usize, requested: usize },

    #[error("sign code {0} is not present in the model bank")]
    UnknownClass(u32),

    #[error("training sign {sign_code}: {source}")]
    Training {
        sign_code: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("curve point ({x:.2}, {y:.2}) with margin {margin} leaves the {width}x{height} frame")]
    CurveOutOfBounds {
        x: f64,
        y: f64,
        margin: f64,
        width: usize,
        height: usize,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("image {path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error stems from bad input (files, arguments, dataset
    /// shape) rather than from a numerical computation.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Training { source, .. } => source.is_input_error(),
            Error::NotPositiveDefinite
            | Error::DegenerateComponent { .. }
            | Error::TrainingDiverged { .. }
            | Error::TrackingLost { .. }
            | Error::NoHandDetected
            | Error::EmptyRegion
            | Error::SeedMismatch { .. } => false,
            _ => true,
        }
    }

    /// Attaches `path` to an I/O error.
    pub fn at(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Error::File { path, source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
