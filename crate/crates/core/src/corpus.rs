//! Page bundles on disk.
//!
//! A corpus is a directory with one subdirectory per page. Each page holds
//! `page.html`, an optional `layout.ndjson` and `annotations.json`. Pages are
//! ordered by directory name.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use crate::dom::{attach_layout, parse_html_with_id, read_layout_records, PageDocument};
use crate::error::PipelineError;
use crate::evaluation::GroundTruth;

pub const HTML_FILE: &str = "page.html";
pub const LAYOUT_FILE: &str = "layout.ndjson";
pub const ANNOTATIONS_FILE: &str = "annotations.json";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageBundle {
    pub id: String,
    pub html: PathBuf,
    pub layout: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
}

impl PageBundle {
    /// Returns `None` when `dir` has no `page.html`.
    pub fn from_dir(dir: &Path) -> Option<Self> {
        let html = dir.join(HTML_FILE);
        if !html.is_file() {
            return None;
        }
        let existing = |name: &str| Some(dir.join(name)).filter(|p| p.is_file());
        let id = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        Some(Self {
            id,
            html,
            layout: existing(LAYOUT_FILE),
            annotations: existing(ANNOTATIONS_FILE),
        })
    }

    /// Parses the page and attaches its layout when one is present.
    pub fn load_document(&self) -> Result<PageDocument, PipelineError> {
        let bytes = fs::read(&self.html).map_err(|e| PipelineError::io(&self.html, e))?;
        let doc = parse_html_with_id(&bytes, &self.id)?;
        match &self.layout {
            Some(path) => {
                let file = fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
                let records = read_layout_records(BufReader::new(file))?;
                Ok(attach_layout(doc, records)?)
            }
            None => Ok(doc),
        }
    }

    pub fn load_truth(&self) -> Result<GroundTruth, PipelineError> {
        let path = self
            .annotations
            .as_ref()
            .ok_or_else(|| PipelineError::MissingAnnotations(self.id.clone()))?;
        let file = fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
        Ok(GroundTruth::from_json(BufReader::new(file))?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub id: String,
    pub pages: Vec<PageBundle>,
}

impl Corpus {
    /// Opens a corpus directory. A directory that is itself a page bundle
    /// yields a one-page corpus.
    pub fn open(root: &Path) -> Result<Self, PipelineError> {
        let id = root
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        if let Some(page) = PageBundle::from_dir(root) {
            return Ok(Self {
                id,
                pages: vec![page],
            });
        }
        let entries = fs::read_dir(root).map_err(|e| PipelineError::io(root, e))?;
        let mut dirs = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| PipelineError::io(root, e))?;
            if entry.path().is_dir() {
                dirs.push(entry.path());
            }
        }
        dirs.sort();
        let pages = dirs.iter().filter_map(|d| PageBundle::from_dir(d)).collect();
        Ok(Self { id, pages })
    }

    pub fn len(&self) -> usize {
        self.pages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pages.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pages_sorted_and_optional_files_detected() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["b", "a", "c"] {
            let page = dir.path().join(name);
            fs::create_dir(&page).unwrap();
            if name != "c" {
                fs::write(page.join(HTML_FILE), "<p>x</p>").unwrap();
            }
        }
        fs::write(dir.path().join("a").join(LAYOUT_FILE), "").unwrap();
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();

        let corpus = Corpus::open(dir.path()).unwrap();
        let ids: Vec<&str> = corpus.pages.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        assert!(corpus.pages[0].layout.is_some());
        assert!(corpus.pages[1].layout.is_none());
        assert!(matches!(
            corpus.pages[0].load_truth(),
            Err(PipelineError::MissingAnnotations(_))
        ));
    }

    #[test]
    fn single_page_directory() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(HTML_FILE), "<p>x</p>").unwrap();
        fs::write(dir.path().join(ANNOTATIONS_FILE), r#"{"2": 0}"#).unwrap();
        let corpus = Corpus::open(dir.path()).unwrap();
        assert_eq!(corpus.len(), 1);
        let doc = corpus.pages[0].load_document().unwrap();
        assert_eq!(doc.len(), 3);
        assert_eq!(corpus.pages[0].load_truth().unwrap().get(2), Some("0"));
    }

    #[test]
    fn missing_root_is_an_error() {
        assert!(Corpus::open(Path::new("/nonexistent/corpus")).is_err());
    }
}
