//! Experiment matrix over a corpus: every page x vector x algorithm cell is
//! composed, clustered and scored, then aggregated and written as CSV.
//!
//! Pages are processed in parallel but results are collected in corpus order,
//! so output files are byte-identical across runs and thread counts.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::clustering::{cluster, Algorithm, ClusterAssignment, ClusterParams};
use crate::coordinates::{
    compose_vectors, ComposeOptions, CoordinateOptions, Normalization, VectorSpec,
};
use crate::corpus::{Corpus, PageBundle};
use crate::dom::select_clusterable;
use crate::error::{CoordinateError, PipelineError};
use crate::evaluation::{self, best_selection, AggregateReport, EvaluationReport, MetricSummary};

/// A run fails overall when more than this share of cells fail.
pub const FAILURE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub vectors: Vec<VectorSpec>,
    pub algorithms: Vec<Algorithm>,
    pub params: ClusterParams,
    pub normalization: Normalization,
    pub td_divs_only: bool,
    pub out_dir: PathBuf,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            vectors: VectorSpec::presets(),
            algorithms: Algorithm::ALL.to_vec(),
            params: ClusterParams::default(),
            normalization: Normalization::Auto,
            td_divs_only: false,
            out_dir: PathBuf::from("out"),
            jobs: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.vectors.is_empty() {
            return Err(PipelineError::InvalidConfig("no vectors selected".into()));
        }
        if self.algorithms.is_empty() {
            return Err(PipelineError::InvalidConfig("no algorithms selected".into()));
        }
        self.params
            .validate()
            .map_err(|e| PipelineError::InvalidConfig(e.to_string()))
    }

    pub fn compose_options(&self) -> ComposeOptions {
        ComposeOptions {
            normalization: self.normalization,
            coordinates: CoordinateOptions {
                td_divs_only: self.td_divs_only,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    /// Visual vector requested for a page without layout.
    Skipped,
    Failed,
}

impl CellStatus {
    pub fn name(self) -> &'static str {
        match self {
            CellStatus::Skipped => "skipped",
            CellStatus::Failed => "failed",
        }
    }
}

/// A cell that produced no report.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub page: String,
    pub vector: VectorSpec,
    pub algorithm: Algorithm,
    pub status: CellStatus,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixResult {
    pub reports: Vec<EvaluationReport>,
    pub failures: Vec<CellFailure>,
    pub total_cells: usize,
    /// Built from the pages whose cells all succeeded; `None` if there are none.
    pub aggregate: Option<AggregateReport>,
}

impl MatrixResult {
    /// Share of cells without a report. Skipped cells count as failed.
    pub fn failure_ratio(&self) -> f64 {
        if self.total_cells == 0 {
            return 0.0;
        }
        self.failures.len() as f64 / self.total_cells as f64
    }

    pub fn exceeds_failure_threshold(&self) -> bool {
        self.failure_ratio() > FAILURE_THRESHOLD
    }
}

enum CellOutcome {
    Report(EvaluationReport),
    Failure(CellFailure),
}

fn evaluate_page(page: &PageBundle, config: &RunConfig) -> Vec<CellOutcome> {
    let cells = || {
        config
            .vectors
            .iter()
            .flat_map(|v| config.algorithms.iter().map(move |&a| (v, a)))
    };
    let fail_all = |reason: String| {
        log::warn!("{}: {reason}", page.id);
        cells()
            .map(|(vector, algorithm)| {
                CellOutcome::Failure(CellFailure {
                    page: page.id.clone(),
                    vector: vector.clone(),
                    algorithm,
                    status: CellStatus::Failed,
                    reason: reason.clone(),
                })
            })
            .collect()
    };
    let doc = match page.load_document() {
        Ok(doc) => doc,
        Err(e) => return fail_all(e.to_string()),
    };
    let truth = match page.load_truth() {
        Ok(truth) => truth,
        Err(e) => return fail_all(e.to_string()),
    };
    let clusterable = select_clusterable(&doc);
    let options = config.compose_options();

    let mut out = Vec::new();
    for vector in &config.vectors {
        let failure = |algorithm, status, reason: &str| {
            CellOutcome::Failure(CellFailure {
                page: page.id.clone(),
                vector: vector.clone(),
                algorithm,
                status,
                reason: reason.to_string(),
            })
        };
        let matrix = match compose_vectors(&doc, &clusterable, vector, &options) {
            Ok(m) => m,
            Err(e) => {
                let status = match e {
                    CoordinateError::MissingLayout(_) => CellStatus::Skipped,
                    _ => CellStatus::Failed,
                };
                let reason = match &e {
                    CoordinateError::MissingLayout(nodes) => {
                        format!("missing layout for {} clusterable nodes", nodes.len())
                    }
                    other => other.to_string(),
                };
                log::warn!("{} {}: {} ({reason})", page.id, vector, status.name());
                out.extend(config.algorithms.iter().map(|&a| failure(a, status, &reason)));
                continue;
            }
        };
        for &algorithm in &config.algorithms {
            let result = cluster(&matrix.rows, algorithm, &config.params)
                .map_err(PipelineError::from)
                .and_then(|pred| {
                    evaluation::evaluate(&page.id, vector, algorithm, &pred, &matrix.node_ids, &truth)
                        .map_err(PipelineError::from)
                });
            out.push(match result {
                Ok(report) => CellOutcome::Report(report),
                Err(e) => {
                    log::warn!("{} {} {}: {e}", page.id, vector, algorithm);
                    failure(algorithm, CellStatus::Failed, &e.to_string())
                }
            });
        }
    }
    out
}

/// Aggregates over the pages whose every cell produced a report.
fn aggregate_complete(
    reports: &[EvaluationReport],
    failures: &[CellFailure],
) -> Option<AggregateReport> {
    let complete: Vec<EvaluationReport> = reports
        .iter()
        .filter(|r| !failures.iter().any(|f| f.page == r.page))
        .cloned()
        .collect();
    let mut excluded: Vec<&str> = failures.iter().map(|f| f.page.as_str()).collect();
    excluded.dedup();
    if !excluded.is_empty() {
        log::warn!("aggregates exclude pages with skipped or failed cells: {excluded:?}");
    }
    best_selection(&complete).ok()
}

/// Evaluates every cell without writing anything.
pub fn evaluate_matrix(corpus: &Corpus, config: &RunConfig) -> Result<MatrixResult, PipelineError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
    let per_page: Vec<Vec<CellOutcome>> =
        pool.install(|| corpus.pages.par_iter().map(|p| evaluate_page(p, config)).collect());

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for outcome in per_page.into_iter().flatten() {
        match outcome {
            CellOutcome::Report(r) => reports.push(r),
            CellOutcome::Failure(f) => failures.push(f),
        }
    }
    let total_cells = corpus.len() * config.vectors.len() * config.algorithms.len();
    let aggregate = aggregate_complete(&reports, &failures);
    Ok(MatrixResult {
        reports,
        failures,
        total_cells,
        aggregate,
    })
}

fn empty_aggregate() -> AggregateReport {
    AggregateReport {
        pages: Vec::new(),
        vectors: Vec::new(),
        algorithms: Vec::new(),
        per_vector: Vec::new(),
        page_best: Vec::new(),
        summaries: Vec::new(),
        pairing: Vec::new(),
        pairing_summary: MetricSummary {
            mean: 0.0,
            std: 0.0,
            count: 0,
        },
        top_performers: Vec::new(),
        algorithm_diffs: Vec::new(),
    }
}

fn write_file<F>(dir: &Path, name: &str, write: F) -> Result<PathBuf, PipelineError>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> Result<(), PipelineError>,
{
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| PipelineError::io(&path, e))?;
    let mut writer = BufWriter::new(file);
    write(&mut writer)?;
    writer.flush().map_err(|e| PipelineError::io(&path, e))?;
    Ok(path)
}

pub fn write_failures_csv<W: Write>(failures: &[CellFailure], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["page", "vector", "algorithm", "status", "reason"])?;
    for f in failures {
        w.write_record([
            f.page.as_str(),
            &f.vector.label(),
            f.algorithm.name(),
            f.status.name(),
            &f.reason,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every report file of a finished matrix into `dir` and returns
/// their paths.
pub fn write_matrix_outputs(
    result: &MatrixResult,
    config: &RunConfig,
    dir: &Path,
) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    let empty = empty_aggregate();
    let agg = result.aggregate.as_ref().unwrap_or(&empty);
    let mut paths = vec![write_file(dir, "reports.csv", |w| {
        Ok(evaluation::write_reports_csv(&result.reports, w)?)
    })?];
    for &algorithm in &config.algorithms {
        let name = format!("aggregate_{}.csv", algorithm.name().to_lowercase());
        paths.push(write_file(dir, &name, |w| {
            Ok(evaluation::write_aggregate_csv(agg, algorithm, w)?)
        })?);
    }
    paths.push(write_file(dir, "best_selection.csv", |w| {
        Ok(evaluation::write_best_selection_csv(agg, w)?)
    })?);
    paths.push(write_file(dir, "best_pairing.csv", |w| {
        Ok(evaluation::write_best_pairing_csv(agg, w)?)
    })?);
    paths.push(write_file(dir, "top_performers.csv", |w| {
        Ok(evaluation::write_top_performers_csv(agg, w)?)
    })?);
    paths.push(write_file(dir, "algorithm_diff.csv", |w| {
        Ok(evaluation::write_algorithm_diff_csv(agg, w)?)
    })?);
    paths.push(write_file(dir, "summary.csv", |w| {
        Ok(evaluation::write_summary_csv(agg, w)?)
    })?);
    paths.push(write_file(dir, "failures.csv", |w| {
        Ok(write_failures_csv(&result.failures, w)?)
    })?);
    Ok(paths)
}

/// Evaluates the matrix and writes its outputs into `config.out_dir`.
pub fn run_matrix(corpus: &Corpus, config: &RunConfig) -> Result<MatrixResult, PipelineError> {
    let result = evaluate_matrix(corpus, config)?;
    write_matrix_outputs(&result, config, &config.out_dir)?;
    Ok(result)
}

/// Writes `node,label` rows, noise as -1.
pub fn write_labels_csv<W: Write>(
    node_ids: &[usize],
    assignment: &ClusterAssignment,
    writer: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["node", "label"])?;
    for (node, label) in node_ids.iter().zip(assignment.labels()) {
        w.write_record([node.to_string(), label.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `node,label` file back into node ids and an assignment.
pub fn read_labels_csv<R: Read>(reader: R) -> Result<(Vec<usize>, ClusterAssignment), PipelineError> {
    let mut r = csv::Reader::from_reader(reader);
    let mut nodes = Vec::new();
    let mut labels = Vec::new();
    for row in r.deserialize() {
        let (node, label): (usize, i64) = row?;
        nodes.push(node);
        labels.push(label);
    }
    Ok((nodes, ClusterAssignment::from_labels(&labels)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(RunConfig::default().validate().is_ok());
        let mut c = RunConfig::default();
        c.vectors.clear();
        assert!(matches!(c.validate(), Err(PipelineError::InvalidConfig(_))));
        let mut c = RunConfig::default();
        c.params.min_samples = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn labels_round_trip() {
        let a = ClusterAssignment::from_labels(&[0, 0, -1, 1]);
        let mut buf = Vec::new();
        write_labels_csv(&[3, 4, 7, 9], &a, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "node,label\n3,0\n4,0\n7,-1\n9,1\n");
        let (nodes, back) = read_labels_csv(buf.as_slice()).unwrap();
        assert_eq!(nodes, [3, 4, 7, 9]);
        assert_eq!(back, a);
    }

    #[test]
    fn failure_ratio() {
        let r = MatrixResult {
            reports: Vec::new(),
            failures: Vec::new(),
            total_cells: 0,
            aggregate: None,
        };
        assert_eq!(r.failure_ratio(), 0.0);
        assert!(!r.exceeds_failure_threshold());
    }
}
