use thiserror::Error;

/// Errors raised while building or parsing trees.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("tree text contains no edges")]
    Empty,
    #[error("line {line}: expected two vertex labels, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("vertex label {label} out of range 1..={max}")]
    LabelOutOfRange { label: usize, max: usize },
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("edge {0}-{1} closes a cycle")]
    Cycle(usize, usize),
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("vertex {vertex} out of range for a tree on {size} vertices")]
    VertexOutOfRange { vertex: usize, size: usize },
}

/// Errors from the growth engine and the samplers built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GrowthError {
    #[error("target size {target} is below the current size {current}")]
    TargetBelowCurrent { target: usize, current: usize },
    #[error("seed must have at least 2 vertices, got {0}")]
    SeedTooSmall(usize),
    #[error("seed carries self loops; grow it as a forest")]
    LoopedSeed,
    #[error("forest has no vertices")]
    EmptyForest,
    #[error("vertex {0} has degree zero and can never receive an edge")]
    IsolatedVertex(usize),
    #[error("seeds have no common degree-profile prefix")]
    NoCommonPrefix,
    #[error("coupled seeds must have equal size ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("checkpoint {checkpoint} is below the current size {current}")]
    CheckpointBelowCurrent { checkpoint: usize, current: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Errors from the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {evaluations} evaluations")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },
    #[error("gamma function pole at {0}")]
    GammaPole(f64),
}

/// Top-level error for the experiment layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("Polya-point ball exceeded {limit} vertices before reaching radius {radius}")]
    TruncationExceeded { limit: usize, radius: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
