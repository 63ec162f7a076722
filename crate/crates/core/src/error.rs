use thiserror::Error;

#[derive(Debug, Error)]
pub enum DomError {
    #[error("document contains no element nodes")]
    EmptyDocument,
    #[error("cannot decode document: {0}")]
    Encoding(String),
    #[error("layout record {index} does not match the parsed tree (expected {expected:?}, found {found:?})")]
    IndexMismatch {
        index: usize,
        expected: Option<String>,
        found: String,
    },
    #[error("invalid bounding box x={x} y={y} w={width} h={height}")]
    InvalidBox {
        x: f64,
        y: f64,
        width: f64,
        height: f64,
    },
    #[error("layout stream line {line}: {source}")]
    LayoutParse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq)]
pub enum CoordinateError {
    #[error("nodes without layout: {0:?}")]
    MissingLayout(Vec<usize>),
    #[error("no clusterable nodes to vectorize")]
    EmptyInput,
    #[error("invalid vector spec {0:?}")]
    InvalidSpec(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("invalid clustering parameter: {0}")]
    InvalidParams(String),
    #[error("points must be non-empty, rectangular and finite: {0}")]
    InvalidPoints(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("rand score needs at least two nodes, got {0}")]
    TooFewNodes(usize),
    #[error("ground truth has no annotated clusters")]
    NoTruthClusters,
    #[error("cluster size difference undefined: {0} side has no clusters")]
    NoClusters(&'static str),
    #[error("annotated node {0} is not clusterable")]
    NotClusterable(usize),
    #[error("prediction and ground truth cover different node sets")]
    NodeSetMismatch,
    #[error("invalid ground truth: {0}")]
    InvalidTruth(String),
    #[error("incomplete report matrix, missing cells: {0:?}")]
    IncompleteMatrix(Vec<(String, String, String)>),
    #[error("no reports to aggregate")]
    NoReports,
}

/// Failures while loading corpus pages or writing run outputs.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dom(#[from] DomError),
    #[error(transparent)]
    Coordinate(#[from] CoordinateError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("page {0} has no annotations.json")]
    MissingAnnotations(String),
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
}

impl PipelineError {
    pub(crate) fn io(path: impl Into<std::path::PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}
