use std::io::Write;

use super::{AggregateReport, EvaluationReport, MetricSummary};
use crate::clustering::Algorithm;

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_reports_csv<W: Write>(reports: &[EvaluationReport], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["page", "vector", "algorithm", "rand", "count_diff_pct", "size_diff_pct"])?;
    for r in reports {
        w.write_record([
            r.page.clone(),
            r.vector.label(),
            r.algorithm.name().to_string(),
            num(r.rand),
            num(r.count_diff_pct),
            opt(r.size_diff_pct),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per vector for a single algorithm.
pub fn write_aggregate_csv<W: Write>(
    agg: &AggregateReport,
    algorithm: Algorithm,
    writer: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "vector",
        "avg_rand",
        "std_rand",
        "avg_count_diff",
        "std_count_diff",
        "avg_size_diff",
        "std_size_diff",
    ])?;
    for a in agg.per_vector.iter().filter(|a| a.algorithm == algorithm) {
        w.write_record([
            a.vector.label(),
            num(a.rand.mean),
            num(a.rand.std),
            num(a.count_diff.mean),
            num(a.count_diff.std),
            opt(a.size_diff.map(|s| s.mean)),
            opt(a.size_diff.map(|s| s.std)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_best_selection_csv<W: Write>(agg: &AggregateReport, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "page",
        "algorithm",
        "best_single_vector",
        "best_single_rand",
        "best_combined_vector",
        "best_combined_rand",
        "best_any_vector",
        "best_any_rand",
    ])?;
    for b in &agg.page_best {
        let split = |c: &Option<super::PageChoice>| match c {
            Some(c) => (c.vector.label(), num(c.rand)),
            None => (String::new(), String::new()),
        };
        let (sv, sr) = split(&b.best_single);
        let (cv, cr) = split(&b.best_combined);
        w.write_record([
            b.page.clone(),
            b.algorithm.name().to_string(),
            sv,
            sr,
            cv,
            cr,
            b.best_any.vector.label(),
            num(b.best_any.rand),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_best_pairing_csv<W: Write>(agg: &AggregateReport, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["page", "vector", "algorithm", "rand"])?;
    for (page, c) in agg.pages.iter().zip(&agg.pairing) {
        w.write_record([
            page.clone(),
            c.vector.label(),
            c.algorithm.name().to_string(),
            num(c.rand),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_top_performers_csv<W: Write>(agg: &AggregateReport, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["algorithm", "vector", "wins", "share"])?;
    for t in &agg.top_performers {
        w.write_record([
            t.algorithm.name().to_string(),
            t.vector.label(),
            t.wins.to_string(),
            num(t.share),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_algorithm_diff_csv<W: Write>(agg: &AggregateReport, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["page", "optics_rand", "hdbscan_rand", "diff"])?;
    for d in &agg.algorithm_diffs {
        w.write_record([d.page.clone(), num(d.optics), num(d.hdbscan), num(d.diff)])?;
    }
    w.flush()?;
    Ok(())
}

/// Headline means: best single, best combined, best any and best fixed
/// vector per algorithm, then the best pairing over all algorithms.
pub fn write_summary_csv<W: Write>(agg: &AggregateReport, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["scope", "selection", "vector", "mean", "std"])?;
    let mut row = |scope: &str, selection: &str, vector: String, s: Option<MetricSummary>| {
        let (mean, std) = match s {
            Some(s) => (num(s.mean), num(s.std)),
            None => (String::new(), String::new()),
        };
        w.write_record([scope.to_string(), selection.to_string(), vector, mean, std])
    };
    for s in &agg.summaries {
        let scope = s.algorithm.name();
        row(scope, "best_single", String::new(), s.best_single)?;
        row(scope, "best_combined", String::new(), s.best_combined)?;
        row(scope, "best_any", String::new(), Some(s.best_any))?;
        row(scope, "best_fixed", s.best_fixed_vector.label(), Some(s.best_fixed))?;
    }
    if !agg.pages.is_empty() {
        row("ALL", "best_pairing", String::new(), Some(agg.pairing_summary))?;
    }
    w.flush()?;
    Ok(())
}
