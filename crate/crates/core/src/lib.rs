//! Web page segmentation from DOM-derived coordinates.
//!
//! Pages are parsed into a pre-order indexed element list ([`dom`]), mapped
//! to structural and visual coordinates ([`coordinates`]), clustered with
//! OPTICS or HDBSCAN ([`clustering`]) and scored against annotations
//! ([`evaluation`]). [`pipeline`] runs the full page x vector x algorithm
//! matrix over a corpus on disk.

pub mod clustering;
pub mod coordinates;
pub mod corpus;
pub mod dom;
pub mod error;
pub mod evaluation;
pub mod pipeline;
pub mod stats;
pub mod synth;

pub use clustering::{cluster, Algorithm, ClusterAssignment, ClusterParams, NOISE};
pub use coordinates::{compose_vectors, Component, FeatureMatrix, Normalization, VectorSpec};
pub use dom::{attach_layout, parse_html, select_clusterable, BoundingBox, LayoutRecord, PageDocument};
pub use error::{ClusterError, CoordinateError, DomError, EvalError, PipelineError};
pub use evaluation::{best_selection, evaluate, rand_score, EvaluationReport, GroundTruth};
