use std::collections::HashMap;

use super::EvaluationReport;
use crate::clustering::Algorithm;
use crate::coordinates::VectorSpec;
use crate::error::EvalError;

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self {
            mean,
            std: var.sqrt(),
            count: values.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorAggregate {
    pub algorithm: Algorithm,
    pub vector: VectorSpec,
    pub rand: MetricSummary,
    pub count_diff: MetricSummary,
    /// Over pages where the prediction had at least one cluster.
    pub size_diff: Option<MetricSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageChoice {
    pub vector: VectorSpec,
    pub algorithm: Algorithm,
    pub rand: f64,
}

/// Best vectors for one page under one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct PageBest {
    pub page: String,
    pub algorithm: Algorithm,
    pub best_single: Option<PageChoice>,
    pub best_combined: Option<PageChoice>,
    pub best_any: PageChoice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub best_single: Option<MetricSummary>,
    pub best_combined: Option<MetricSummary>,
    pub best_any: MetricSummary,
    /// Fixed vector with the highest mean Rand.
    pub best_fixed_vector: VectorSpec,
    pub best_fixed: MetricSummary,
}

/// Share of pages on which a vector was the best-any choice.
#[derive(Debug, Clone, PartialEq)]
pub struct TopPerformer {
    pub algorithm: Algorithm,
    pub vector: VectorSpec,
    pub wins: usize,
    pub share: f64,
}

/// Per-page HDBSCAN minus OPTICS best-any Rand.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmDiff {
    pub page: String,
    pub optics: f64,
    pub hdbscan: f64,
    pub diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub pages: Vec<String>,
    pub vectors: Vec<VectorSpec>,
    pub algorithms: Vec<Algorithm>,
    pub per_vector: Vec<VectorAggregate>,
    pub page_best: Vec<PageBest>,
    pub summaries: Vec<AlgorithmSummary>,
    /// Best (vector, algorithm) pair per page, parallel to `pages`.
    pub pairing: Vec<PageChoice>,
    pub pairing_summary: MetricSummary,
    pub top_performers: Vec<TopPerformer>,
    /// Empty unless both algorithms were run.
    pub algorithm_diffs: Vec<AlgorithmDiff>,
}

impl AggregateReport {
    pub fn vector_aggregate(&self, algorithm: Algorithm, vector: &VectorSpec) -> Option<&VectorAggregate> {
        self.per_vector
            .iter()
            .find(|a| a.algorithm == algorithm && &a.vector == vector)
    }

    pub fn summary(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.summaries.iter().find(|s| s.algorithm == algorithm)
    }
}

fn first_seen<T: Clone + PartialEq>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

/// Keeps the first maximum so ties go to the earlier candidate.
fn best_of<'a>(candidates: impl Iterator<Item = &'a EvaluationReport>) -> Option<PageChoice> {
    let mut best: Option<&EvaluationReport> = None;
    for r in candidates {
        if best.is_none_or(|b| r.rand > b.rand) {
            best = Some(r);
        }
    }
    best.map(|r| PageChoice {
        vector: r.vector.clone(),
        algorithm: r.algorithm,
        rand: r.rand,
    })
}

/// Aggregates a full page x vector x algorithm matrix of reports.
///
/// Pages, vectors and algorithms keep their order of first appearance, and
/// every tie is resolved in favour of the earlier entry.
pub fn best_selection(reports: &[EvaluationReport]) -> Result<AggregateReport, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::NoReports);
    }
    let pages = first_seen(reports.iter().map(|r| r.page.clone()));
    let vectors = first_seen(reports.iter().map(|r| r.vector.clone()));
    let algorithms = first_seen(reports.iter().map(|r| r.algorithm));

    let mut cells: HashMap<(&str, &VectorSpec, Algorithm), &EvaluationReport> = HashMap::new();
    for r in reports {
        cells.entry((r.page.as_str(), &r.vector, r.algorithm)).or_insert(r);
    }
    let mut missing = Vec::new();
    for page in &pages {
        for vector in &vectors {
            for &algorithm in &algorithms {
                if !cells.contains_key(&(page.as_str(), vector, algorithm)) {
                    missing.push((page.clone(), vector.label(), algorithm.name().to_string()));
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(EvalError::IncompleteMatrix(missing));
    }
    let cell = |page: &str, vector: &VectorSpec, algorithm: Algorithm| {
        cells[&(page, vector, algorithm)]
    };

    let mut per_vector = Vec::new();
    for &algorithm in &algorithms {
        for vector in &vectors {
            let rows: Vec<&EvaluationReport> =
                pages.iter().map(|p| cell(p, vector, algorithm)).collect();
            let rand: Vec<f64> = rows.iter().map(|r| r.rand).collect();
            let count: Vec<f64> = rows.iter().map(|r| r.count_diff_pct).collect();
            let size: Vec<f64> = rows.iter().filter_map(|r| r.size_diff_pct).collect();
            per_vector.push(VectorAggregate {
                algorithm,
                vector: vector.clone(),
                rand: MetricSummary::of(&rand).expect("at least one page"),
                count_diff: MetricSummary::of(&count).expect("at least one page"),
                size_diff: MetricSummary::of(&size),
            });
        }
    }

    let mut page_best = Vec::new();
    for &algorithm in &algorithms {
        for page in &pages {
            let row = || vectors.iter().map(|v| cell(page, v, algorithm));
            page_best.push(PageBest {
                page: page.clone(),
                algorithm,
                best_single: best_of(row().filter(|r| r.vector.is_single())),
                best_combined: best_of(row().filter(|r| !r.vector.is_single())),
                best_any: best_of(row()).expect("at least one vector"),
            });
        }
    }

    let mut summaries = Vec::new();
    let mut top_performers = Vec::new();
    for &algorithm in &algorithms {
        let bests: Vec<&PageBest> = page_best.iter().filter(|b| b.algorithm == algorithm).collect();
        let collect = |f: &dyn Fn(&PageBest) -> Option<f64>| -> Option<MetricSummary> {
            let values: Vec<f64> = bests.iter().filter_map(|b| f(b)).collect();
            MetricSummary::of(&values)
        };
        let mut fixed: Option<&VectorAggregate> = None;
        for agg in per_vector.iter().filter(|a| a.algorithm == algorithm) {
            if fixed.is_none_or(|f| agg.rand.mean > f.rand.mean) {
                fixed = Some(agg);
            }
        }
        let fixed = fixed.expect("at least one vector");
        summaries.push(AlgorithmSummary {
            algorithm,
            best_single: collect(&|b| b.best_single.as_ref().map(|c| c.rand)),
            best_combined: collect(&|b| b.best_combined.as_ref().map(|c| c.rand)),
            best_any: collect(&|b| Some(b.best_any.rand)).expect("at least one page"),
            best_fixed_vector: fixed.vector.clone(),
            best_fixed: fixed.rand,
        });
        for vector in &vectors {
            let wins = bests.iter().filter(|b| &b.best_any.vector == vector).count();
            top_performers.push(TopPerformer {
                algorithm,
                vector: vector.clone(),
                wins,
                share: wins as f64 / pages.len() as f64,
            });
        }
    }

    let pairing: Vec<PageChoice> = pages
        .iter()
        .map(|page| {
            best_of(
                algorithms
                    .iter()
                    .flat_map(|&a| vectors.iter().map(move |v| (a, v)))
                    .map(|(a, v)| cell(page, v, a)),
            )
            .expect("non-empty matrix")
        })
        .collect();
    let pairing_rand: Vec<f64> = pairing.iter().map(|c| c.rand).collect();
    let pairing_summary = MetricSummary::of(&pairing_rand).expect("at least one page");

    let mut algorithm_diffs = Vec::new();
    if algorithms.contains(&Algorithm::Optics) && algorithms.contains(&Algorithm::Hdbscan) {
        let best_any = |page: &str, algorithm: Algorithm| {
            page_best
                .iter()
                .find(|b| b.page == page && b.algorithm == algorithm)
                .map(|b| b.best_any.rand)
                .expect("page present")
        };
        for page in &pages {
            let optics = best_any(page, Algorithm::Optics);
            let hdbscan = best_any(page, Algorithm::Hdbscan);
            algorithm_diffs.push(AlgorithmDiff {
                page: page.clone(),
                optics,
                hdbscan,
                diff: hdbscan - optics,
            });
        }
    }

    Ok(AggregateReport {
        pages,
        vectors,
        algorithms,
        per_vector,
        page_best,
        summaries,
        pairing,
        pairing_summary,
        top_performers,
        algorithm_diffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(page: &str, vector: u8, algorithm: Algorithm, rand: f64) -> EvaluationReport {
        EvaluationReport {
            page: page.into(),
            vector: VectorSpec::preset(vector).unwrap(),
            algorithm,
            rand,
            count_diff_pct: 10.0,
            size_diff_pct: Some(5.0),
        }
    }

    #[test]
    fn singleton_matrix() {
        let r = report("p", 7, Algorithm::Optics, 0.6);
        let agg = best_selection(std::slice::from_ref(&r)).unwrap();
        assert_eq!(agg.page_best[0].best_any.rand, 0.6);
        assert_eq!(agg.page_best[0].best_single, None);
        assert_eq!(agg.pairing_summary.mean, 0.6);
        assert_eq!(agg.summaries[0].best_fixed.mean, 0.6);
    }

    #[test]
    fn two_page_table() {
        // vectors A = 1 (TD), B = 2 (DI)
        let reports = vec![
            report("p1", 1, Algorithm::Optics, 0.4),
            report("p1", 2, Algorithm::Optics, 0.8),
            report("p2", 1, Algorithm::Optics, 0.9),
            report("p2", 2, Algorithm::Optics, 0.2),
        ];
        let agg = best_selection(&reports).unwrap();
        let s = agg.summary(Algorithm::Optics).unwrap();
        assert!((s.best_any.mean - 0.85).abs() < 1e-12);
        assert!((s.best_fixed.mean - 0.65).abs() < 1e-12);
        assert_eq!(s.best_fixed_vector, VectorSpec::preset(1).unwrap());
        let wins: Vec<usize> = agg.top_performers.iter().map(|t| t.wins).collect();
        assert_eq!(wins, vec![1, 1]);
    }

    #[test]
    fn population_stddev() {
        let s = MetricSummary::of(&[0.4, 0.9]).unwrap();
        assert!((s.std - 0.25).abs() < 1e-12);
        assert_eq!(MetricSummary::of(&[]), None);
    }

    #[test]
    fn incomplete_matrix_lists_cells() {
        let reports = vec![
            report("p1", 1, Algorithm::Optics, 0.4),
            report("p2", 2, Algorithm::Hdbscan, 0.8),
        ];
        match best_selection(&reports) {
            Err(EvalError::IncompleteMatrix(missing)) => assert_eq!(missing.len(), 6),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(best_selection(&[]), Err(EvalError::NoReports));
    }

    #[test]
    fn pairing_and_diffs() {
        let reports = vec![
            report("p1", 1, Algorithm::Optics, 0.5),
            report("p1", 8, Algorithm::Optics, 0.7),
            report("p1", 1, Algorithm::Hdbscan, 0.9),
            report("p1", 8, Algorithm::Hdbscan, 0.1),
        ];
        let agg = best_selection(&reports).unwrap();
        assert_eq!(agg.pairing[0].algorithm, Algorithm::Hdbscan);
        assert_eq!(agg.pairing[0].rand, 0.9);
        let optics = agg.page_best.iter().find(|b| b.algorithm == Algorithm::Optics).unwrap();
        assert_eq!(optics.best_single.as_ref().unwrap().rand, 0.5);
        assert_eq!(optics.best_combined.as_ref().unwrap().rand, 0.7);
        assert!((agg.algorithm_diffs[0].diff - 0.2).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_first_vector() {
        let reports = vec![
            report("p1", 3, Algorithm::Optics, 0.5),
            report("p1", 1, Algorithm::Optics, 0.5),
        ];
        let agg = best_selection(&reports).unwrap();
        assert_eq!(agg.pairing[0].vector, VectorSpec::preset(3).unwrap());
        assert_eq!(agg.summaries[0].best_fixed_vector, VectorSpec::preset(3).unwrap());
    }
}
