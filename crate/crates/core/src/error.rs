use alloc::string::String;

/// Errors raised by the reconstruction operators, classifiers and the fold pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty segment for subject `{0}`")]
    EmptySegment(String),
    #[error("statistics requested over zero rows")]
    NoRows,
    #[error("dimension mismatch: expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid cluster count {q} for {rows} rows")]
    InvalidClusterCount { q: usize, rows: usize },
    #[error("cluster count {q} exceeds the {rows} rows available at layer {layer}")]
    LayerTooSmall { q: usize, rows: usize, layer: usize },
    #[error("invalid clustering depth {0}")]
    InvalidDepth(usize),
    #[error("convolution operand has no rows")]
    EmptyOperand,
    #[error("cluster/envelope mismatch for subject `{subject}`: {detail}")]
    ClusterEnvelopeMismatch { subject: String, detail: String },
    #[error("training set contains a single class")]
    SingleClass,
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("invalid classifier parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("grid step {0} does not divide 1")]
    InvalidGridStep(f64),
    #[error("invalid fusion weights ({0}, {1}, {2})")]
    InvalidWeights(f64, f64, f64),
    #[error("confusion counts are all zero")]
    EmptyConfusion,
    #[error("need at least two subjects, got {0}")]
    TooFewSubjects(usize),
    #[error("training subjects for held-out `{0}` lack one class")]
    FoldLostClass(String),
    #[error("label {0} is not binary")]
    InvalidLabel(u8),
    #[error("subject `{0}` carries more than one label")]
    InconsistentLabel(String),
}

pub type Result<T> = core::result::Result<T, Error>;
