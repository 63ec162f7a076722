//! Scoring predicted clusterings against annotated ground truth.
//!
//! Before pair counting, every noise point and every unannotated
//! (background) node becomes its own singleton cluster. The count and size
//! differences are relative to the ground truth and exclude noise and
//! background:
//!
//! ```text
//! count_diff = |k_pred - k_true| / k_true * 100
//! size_diff  = |mean_pred_size - mean_true_size| / mean_true_size * 100
//! ```

mod report;
mod selection;

use std::collections::BTreeMap;
use std::io::{Read, Write};

pub use report::{
    write_aggregate_csv, write_algorithm_diff_csv, write_best_pairing_csv,
    write_best_selection_csv, write_reports_csv, write_summary_csv, write_top_performers_csv,
};
pub use selection::{
    best_selection, AggregateReport, AlgorithmDiff, AlgorithmSummary, MetricSummary, PageBest,
    PageChoice, TopPerformer, VectorAggregate,
};

use crate::clustering::{Algorithm, ClusterAssignment};
use crate::coordinates::VectorSpec;
use crate::error::EvalError;

/// Annotated cluster id per clusterable node. Nodes without an entry are
/// background.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruth {
    clusters: BTreeMap<usize, String>,
}

impl GroundTruth {
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (usize, S)>,
        S: Into<String>,
    {
        Self {
            clusters: pairs.into_iter().map(|(k, v)| (k, v.into())).collect(),
        }
    }

    /// Parses `{"<preorder_index>": <cluster id>, ...}`. Cluster ids may be
    /// integers or strings.
    pub fn from_json<R: Read>(reader: R) -> Result<Self, EvalError> {
        let value: serde_json::Value =
            serde_json::from_reader(reader).map_err(|e| EvalError::InvalidTruth(e.to_string()))?;
        let object = value
            .as_object()
            .ok_or_else(|| EvalError::InvalidTruth("expected a JSON object".into()))?;
        let mut clusters = BTreeMap::new();
        for (key, id) in object {
            let index: usize = key
                .trim()
                .parse()
                .map_err(|_| EvalError::InvalidTruth(format!("key {key:?} is not an index")))?;
            let id = match id {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
                other => {
                    return Err(EvalError::InvalidTruth(format!(
                        "cluster id for {key} must be an integer or string, got {other}"
                    )))
                }
            };
            clusters.insert(index, id);
        }
        Ok(Self { clusters })
    }

    /// Writes the JSON map with keys in ascending index order.
    pub fn write_json<W: Write>(&self, writer: W) -> serde_json::Result<()> {
        let map: serde_json::Map<String, serde_json::Value> = self
            .clusters
            .iter()
            .map(|(k, v)| {
                let value = v
                    .parse::<i64>()
                    .map(serde_json::Value::from)
                    .unwrap_or_else(|_| serde_json::Value::from(v.clone()));
                (k.to_string(), value)
            })
            .collect();
        serde_json::to_writer_pretty(writer, &map)
    }

    pub fn get(&self, index: usize) -> Option<&str> {
        self.clusters.get(&index).map(String::as_str)
    }

    pub fn annotated(&self) -> impl Iterator<Item = usize> + '_ {
        self.clusters.keys().copied()
    }

    pub fn annotated_count(&self) -> usize {
        self.clusters.len()
    }

    /// Every annotated index must be one of `nodes`.
    pub fn validate(&self, nodes: &[usize]) -> Result<(), EvalError> {
        match self.clusters.keys().find(|k| !nodes.contains(k)) {
            Some(&k) => Err(EvalError::NotClusterable(k)),
            None => Ok(()),
        }
    }

    /// Number of distinct annotated clusters.
    pub fn cluster_count(&self) -> usize {
        self.cluster_sizes().len()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes: BTreeMap<&str, usize> = BTreeMap::new();
        for id in self.clusters.values() {
            *sizes.entry(id).or_default() += 1;
        }
        sizes.into_values().collect()
    }
}

/// Block ids for `nodes`, with background nodes as singletons.
fn truth_blocks(truth: &GroundTruth, nodes: &[usize]) -> Vec<usize> {
    let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
    let mut next = 0;
    nodes
        .iter()
        .map(|&node| {
            let block = match truth.get(node) {
                Some(id) => *ids.entry(id).or_insert_with(|| {
                    next += 1;
                    next - 1
                }),
                None => {
                    next += 1;
                    next - 1
                }
            };
            block
        })
        .collect()
}

/// Block ids for a prediction, with noise as singletons.
fn predicted_blocks(pred: &ClusterAssignment) -> Vec<usize> {
    let k = pred.cluster_count();
    let mut next = k;
    pred.labels()
        .iter()
        .map(|&l| {
            if l >= 0 {
                l as usize
            } else {
                next += 1;
                next - 1
            }
        })
        .collect()
}

fn pairs(n: u64) -> i128 {
    i128::from(n) * i128::from(n.saturating_sub(1)) / 2
}

/// Fraction of node pairs on which two partitions agree. Inputs are block
/// ids per node.
pub fn rand_index(a: &[usize], b: &[usize]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::NodeSetMismatch);
    }
    let n = a.len();
    if n < 2 {
        return Err(EvalError::TooFewNodes(n));
    }
    let mut joint: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, u64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, u64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let total = pairs(n as u64);
    let same_both: i128 = joint.values().map(|&c| pairs(c)).sum();
    let same_a: i128 = rows.values().map(|&c| pairs(c)).sum();
    let same_b: i128 = cols.values().map(|&c| pairs(c)).sum();
    let agreements = total + 2 * same_both - same_a - same_b;
    Ok(agreements as f64 / total as f64)
}

/// Rand score of a prediction over `nodes` (parallel to its labels).
pub fn rand_score(
    pred: &ClusterAssignment,
    nodes: &[usize],
    truth: &GroundTruth,
) -> Result<f64, EvalError> {
    if pred.len() != nodes.len() {
        return Err(EvalError::NodeSetMismatch);
    }
    truth.validate(nodes)?;
    rand_index(&predicted_blocks(pred), &truth_blocks(truth, nodes))
}

pub fn cluster_count_diff(pred: &ClusterAssignment, truth: &GroundTruth) -> Result<f64, EvalError> {
    let k_true = truth.cluster_count();
    if k_true == 0 {
        return Err(EvalError::NoTruthClusters);
    }
    let k_pred = pred.cluster_count();
    Ok(k_pred.abs_diff(k_true) as f64 / k_true as f64 * 100.0)
}

fn mean_size(sizes: &[usize]) -> f64 {
    sizes.iter().sum::<usize>() as f64 / sizes.len() as f64
}

pub fn cluster_size_diff(pred: &ClusterAssignment, truth: &GroundTruth) -> Result<f64, EvalError> {
    let true_sizes = truth.cluster_sizes();
    if true_sizes.is_empty() {
        return Err(EvalError::NoClusters("ground truth"));
    }
    let pred_sizes = pred.cluster_sizes();
    if pred_sizes.is_empty() {
        return Err(EvalError::NoClusters("prediction"));
    }
    let true_mean = mean_size(&true_sizes);
    Ok((mean_size(&pred_sizes) - true_mean).abs() / true_mean * 100.0)
}

/// Scores of one (page, vector, algorithm) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub page: String,
    pub vector: VectorSpec,
    pub algorithm: Algorithm,
    pub rand: f64,
    pub count_diff_pct: f64,
    /// `None` when the prediction has no clusters.
    pub size_diff_pct: Option<f64>,
}

pub fn evaluate(
    page: &str,
    vector: &VectorSpec,
    algorithm: Algorithm,
    pred: &ClusterAssignment,
    nodes: &[usize],
    truth: &GroundTruth,
) -> Result<EvaluationReport, EvalError> {
    let rand = rand_score(pred, nodes, truth)?;
    let count_diff_pct = cluster_count_diff(pred, truth)?;
    let size_diff_pct = match cluster_size_diff(pred, truth) {
        Ok(v) => Some(v),
        Err(EvalError::NoClusters("prediction")) => None,
        Err(e) => return Err(e),
    };
    Ok(EvaluationReport {
        page: page.to_string(),
        vector: vector.clone(),
        algorithm,
        rand,
        count_diff_pct,
        size_diff_pct,
    })
}
