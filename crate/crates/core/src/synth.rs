//! Synthetic "label datum" grid pages where pixel distance misleads.
//!
//! Each cell of a `rows x cols` grid holds a label span followed by its datum
//! span. Rows are stacked tightly while the datum sits a label-width to the
//! right, so a label is always closer in pixels to the label below it than to
//! its own datum. In pre-order the two spans are adjacent siblings.

use std::fs;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dom::{write_layout_records, LayoutRecord};
use crate::evaluation::GroundTruth;

const LABELS: [&str; 12] = [
    "Price", "Weight", "Height", "Color", "Stock", "Rating", "Model", "Origin", "Width", "Depth",
    "Power", "Warranty",
];

/// Pre-order indices of the label and datum spans of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellNodes {
    pub row: usize,
    pub col: usize,
    pub label: usize,
    pub datum: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPage {
    pub html: String,
    pub layout: Vec<LayoutRecord>,
    pub truth: GroundTruth,
    pub cells: Vec<CellNodes>,
}

impl SyntheticPage {
    /// Writes `page.html`, `layout.ndjson` and `annotations.json` into `dir`.
    pub fn write_bundle(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("page.html"), &self.html)?;
        let mut layout = Vec::new();
        write_layout_records(&mut layout, &self.layout)?;
        fs::write(dir.join("layout.ndjson"), layout)?;
        let mut truth = Vec::new();
        self.truth.write_json(&mut truth).map_err(io::Error::other)?;
        truth.push(b'\n');
        fs::write(dir.join("annotations.json"), truth)
    }

    pub fn record(&self, index: usize) -> &LayoutRecord {
        &self.layout[index]
    }
}

struct Layout {
    records: Vec<LayoutRecord>,
}

impl Layout {
    fn push(&mut self, tag: &str, x: f64, y: f64, w: f64, h: f64) -> usize {
        let i = self.records.len();
        self.records.push(LayoutRecord {
            i,
            t: tag.to_string(),
            x,
            y,
            w,
            h,
        });
        i
    }
}

/// Builds one ambiguity page. Panics if `rows` or `cols` is below 2.
pub fn generate_ambiguity_page(rows: usize, cols: usize, seed: u64) -> SyntheticPage {
    assert!(rows >= 2 && cols >= 2, "grid must be at least 2x2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let margin = 8.0;
    let line_height: f64 = rng.random_range(16..=22) as f64;
    let row_gap: f64 = rng.random_range(0..=4) as f64;
    let pitch = line_height + row_gap;
    let label_gap: f64 = rng.random_range(24..=48) as f64;
    let cell_gap: f64 = rng.random_range(16..=40) as f64;
    let label_widths: Vec<f64> = (0..cols).map(|_| rng.random_range(60..=120) as f64).collect();
    let datum_widths: Vec<f64> = (0..cols).map(|_| rng.random_range(40..=90) as f64).collect();

    let mut col_x = Vec::with_capacity(cols);
    let mut x = margin;
    for c in 0..cols {
        col_x.push(x);
        x += label_widths[c] + label_gap + datum_widths[c] + cell_gap;
    }
    let grid_w = x - cell_gap - margin;
    let grid_h = rows as f64 * pitch - row_gap;

    let mut layout = Layout {
        records: Vec::new(),
    };
    let viewport_w = 1280.0_f64.max(grid_w + 2.0 * margin);
    let page_h = grid_h + 2.0 * margin;
    layout.push("html", 0.0, 0.0, viewport_w, page_h);
    layout.push("body", margin, margin, viewport_w - 2.0 * margin, grid_h);
    layout.push("div", margin, margin, grid_w, grid_h);

    let mut html = String::from(
        "<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"><title>Specifications</title></head>\n<body>\n<div class=\"grid\">\n",
    );
    let mut cells = Vec::with_capacity(rows * cols);
    let mut truth = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        let y = margin + r as f64 * pitch;
        layout.push("div", margin, y, grid_w, line_height);
        html.push_str("  <div class=\"row\">");
        for c in 0..cols {
            let cell_w = label_widths[c] + label_gap + datum_widths[c];
            layout.push("div", col_x[c], y, cell_w, line_height);
            let label = layout.push("span", col_x[c], y, label_widths[c], line_height);
            let datum_x = col_x[c] + label_widths[c] + label_gap;
            let datum = layout.push("span", datum_x, y, datum_widths[c], line_height);

            let name = LABELS[rng.random_range(0..LABELS.len())];
            let value: u32 = rng.random_range(1..1000);
            html.push_str(&format!(
                "<div class=\"cell\"><span class=\"label\">{name}</span><span class=\"datum\">{value}</span></div>"
            ));
            let id = (r * cols + c).to_string();
            truth.push((label, id.clone()));
            truth.push((datum, id));
            cells.push(CellNodes {
                row: r,
                col: c,
                label,
                datum,
            });
        }
        html.push_str("</div>\n");
    }
    html.push_str("</div>\n</body>\n</html>\n");

    SyntheticPage {
        html,
        layout: layout.records,
        truth: GroundTruth::from_pairs(truth),
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::{attach_layout, parse_html, select_clusterable};

    fn distance(a: &LayoutRecord, b: &LayoutRecord) -> f64 {
        ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
    }

    #[test]
    fn two_by_two_counts() {
        let page = generate_ambiguity_page(2, 2, 1);
        let doc = parse_html(page.html.as_bytes()).unwrap();
        assert_eq!(select_clusterable(&doc).len(), 8);
        assert_eq!(page.truth.cluster_count(), 4);
        assert_eq!(page.truth.cluster_sizes(), vec![2; 4]);
    }

    #[test]
    fn layout_aligns_with_parser() {
        let page = generate_ambiguity_page(3, 4, 9);
        let doc = parse_html(page.html.as_bytes()).unwrap();
        assert_eq!(doc.len(), page.layout.len());
        let doc = attach_layout(doc, page.layout.clone()).unwrap();
        assert_eq!(doc.layout.len(), doc.len());
    }

    #[test]
    fn pixel_ambiguity_contract() {
        for seed in 0..10 {
            let page = generate_ambiguity_page(4, 3, seed);
            for cell in &page.cells {
                if cell.row + 1 == 4 {
                    continue;
                }
                let below = page
                    .cells
                    .iter()
                    .find(|o| o.row == cell.row + 1 && o.col == cell.col)
                    .unwrap();
                let label = page.record(cell.label);
                let to_label = distance(label, page.record(below.label));
                let to_datum = distance(label, page.record(cell.datum));
                assert!(to_label < to_datum, "seed {seed}: {to_label} >= {to_datum}");
            }
        }
    }

    #[test]
    fn label_and_datum_are_adjacent() {
        let page = generate_ambiguity_page(2, 3, 4);
        for cell in &page.cells {
            assert_eq!(cell.datum - cell.label, 1);
        }
    }

    #[test]
    fn seeded_output_is_reproducible() {
        assert_eq!(generate_ambiguity_page(3, 3, 42), generate_ambiguity_page(3, 3, 42));
        assert_ne!(
            generate_ambiguity_page(3, 3, 42).html,
            generate_ambiguity_page(3, 3, 43).html
        );
    }
}
