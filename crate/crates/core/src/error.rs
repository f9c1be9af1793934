use thiserror::Error;

use crate::labelmap::ClassId;

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("pixel value {value} at (row {row}, col {col}) has no class mapping")]
    UnknownPixelValue { value: u32, row: usize, col: usize },
    #[error("malformed mask image: {0}")]
    MalformedImage(String),
    #[error("invalid label map: {0}")]
    InvalidLabelMap(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("region is empty and has no contour")]
    DegenerateRegion,
    #[error("window {window} is larger than the sequence length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("smoothing window must be odd and >= 1, got {0}")]
    EvenWindow(usize),
    #[error("polynomial order {order} must be smaller than window {window}")]
    OrderTooHigh { order: usize, window: usize },
    #[error("sequence of length {0} is too short to smooth (need at least 3 points)")]
    TooShort(usize),
    #[error("distance transform needs at least one reference pixel")]
    EmptyReferenceSet,
    #[error("neither distance gradient nor centroid offset defines a normal at ({x}, {y})")]
    DegenerateNormal { x: f64, y: f64 },
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("transformed region leaves the {width}x{height} canvas")]
    OutOfCanvas { width: usize, height: usize },
    #[error("outputs {first} and {second} are pixel-identical")]
    DuplicateOutput { first: usize, second: usize },
    #[error("empty mask list")]
    NoMasks,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("missing edit parameters for class {0:?}")]
    MissingClassParams(ClassId),
}

impl ConfigError {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("all class counts are zero")]
    AllEmpty,
    #[error("invalid probability map: {0}")]
    InvalidProbMap(String),
}

#[derive(Debug, Error)]
pub enum PatchError {
    #[error("scene intensity is constant or its percentile range collapses")]
    DegenerateScene,
    #[error("grid {0}x{1} is too small for a 3x3 filter")]
    TooSmall(usize, usize),
    #[error("scene {height}x{width} is smaller than window {window}")]
    SceneTooSmall {
        height: usize,
        width: usize,
        window: usize,
    },
    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("manifest parse error at row {row}: {reason}")]
    ManifestParse { row: usize, reason: String },
    #[error("split leakage: scene {0} appears in both train and test splits")]
    SplitLeakage(String),
}
