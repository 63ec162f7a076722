//! Per-page DOM and text statistics.

use std::io::Write;

use crate::corpus::Corpus;
use crate::dom::PageDocument;

/// Text lengths in this inclusive range form the "short text" band.
pub const SHORT_TEXT_BAND: (usize, usize) = (1, 30);

#[derive(Debug, Clone, PartialEq)]
pub struct PageStats {
    pub page: String,
    pub elements: usize,
    pub text_nodes: usize,
    pub text_chars: usize,
    /// min, q1, median, q3, max of per-node text length; `None` without text.
    pub length_quartiles: Option<[f64; 5]>,
    pub in_short_band: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusStats {
    pub pages: Vec<PageStats>,
    /// Pages that failed to load, with the reason.
    pub failures: Vec<(String, String)>,
}

impl CorpusStats {
    /// Share of all text-bearing nodes whose length is inside the short band.
    pub fn short_band_share(&self) -> Option<f64> {
        let total: usize = self.pages.iter().map(|p| p.text_nodes).sum();
        let short: usize = self.pages.iter().map(|p| p.in_short_band).sum();
        (total > 0).then(|| short as f64 / total as f64)
    }
}

/// Quantile of sorted data by linear interpolation between closest ranks.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn page_stats(doc: &PageDocument) -> PageStats {
    let mut lengths: Vec<usize> = doc
        .nodes
        .iter()
        .filter(|n| n.has_text())
        .map(|n| n.direct_text.chars().count())
        .collect();
    lengths.sort_unstable();
    let sorted: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
    let length_quartiles = (!sorted.is_empty())
        .then(|| [0.0, 0.25, 0.5, 0.75, 1.0].map(|q| quantile(&sorted, q)));
    let (lo, hi) = SHORT_TEXT_BAND;
    PageStats {
        page: doc.source_id.clone(),
        elements: doc.len(),
        text_nodes: lengths.len(),
        text_chars: lengths.iter().sum(),
        length_quartiles,
        in_short_band: lengths.iter().filter(|&&l| (lo..=hi).contains(&l)).count(),
    }
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut stats = CorpusStats::default();
    for page in &corpus.pages {
        match page.load_document() {
            Ok(doc) => stats.pages.push(page_stats(&doc)),
            Err(e) => {
                log::warn!("{}: {e}", page.id);
                stats.failures.push((page.id.clone(), e.to_string()));
            }
        }
    }
    stats
}

pub fn write_stats_csv<W: Write>(pages: &[PageStats], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "page",
        "elements",
        "text_nodes",
        "text_chars",
        "len_min",
        "len_q1",
        "len_median",
        "len_q3",
        "len_max",
        "short_text_nodes",
    ])?;
    for p in pages {
        let mut row = vec![
            p.page.clone(),
            p.elements.to_string(),
            p.text_nodes.to_string(),
            p.text_chars.to_string(),
        ];
        match p.length_quartiles {
            Some(q) => row.extend(q.iter().map(|v| format!("{v:.2}"))),
            None => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        row.push(p.in_short_band.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_html_with_id;

    const FIXTURE: &str =
        "<html><body><div><p>Hello</p><p>World</p></div><span>Bye</span></body></html>";

    #[test]
    fn fixture_row() {
        let doc = parse_html_with_id(FIXTURE.as_bytes(), "fixture").unwrap();
        let s = page_stats(&doc);
        assert_eq!((s.elements, s.text_nodes, s.text_chars), (6, 3, 13));
        assert_eq!(s.length_quartiles, Some([3.0, 4.0, 5.0, 5.0, 5.0]));
        assert_eq!(s.in_short_band, 3);
    }

    #[test]
    fn quantiles_interpolate() {
        let data = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&data, 0.25), 1.75);
        assert_eq!(quantile(&data, 0.5), 2.5);
        assert_eq!(quantile(&[7.0], 0.75), 7.0);
    }

    #[test]
    fn empty_corpus_is_header_only() {
        let mut buf = Vec::new();
        write_stats_csv(&[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("page,elements,text_nodes,text_chars,"));
    }

    #[test]
    fn page_without_text() {
        let doc = parse_html_with_id(b"<div></div>", "blank").unwrap();
        let s = page_stats(&doc);
        assert_eq!(s.length_quartiles, None);
        let mut buf = Vec::new();
        write_stats_csv(&[s], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("blank,3,0,0,,,,,,0"));
    }
}
