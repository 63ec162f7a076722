//! Element tree with stable pre-order identity.
//!
//! HTML is parsed with html5ever (through `scraper`), which applies the standard
//! error-recovery rules, and then flattened into a vector of [`DomNode`]s indexed
//! by depth-first pre-order position. Only element nodes are indexed. The
//! `head` subtree is never indexed and template contents are never visited,
//! which matches what a live-DOM walker that starts at `documentElement` and
//! skips `head` sees. The layout extractor follows the same rule list, so
//! indices produced here join 1:1 with its records.

use std::collections::BTreeMap;
use std::io::BufRead;

use scraper::{Html, Node};
use serde::{Deserialize, Serialize};

use crate::error::DomError;

/// Elements whose subtree text never counts as direct text.
pub const HIDDEN_TEXT_TAGS: [&str; 4] = ["script", "style", "template", "noscript"];

/// Elements whose whole subtree is excluded from indexing.
pub const UNINDEXED_TAGS: [&str; 1] = ["head"];

const VOID_TAGS: [&str; 14] = [
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source", "track",
    "wbr", "param",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomNode {
    pub preorder_index: usize,
    pub tag_name: String,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Immediate child text nodes, concatenated and whitespace-collapsed.
    pub direct_text: String,
    pub depth: usize,
}

impl DomNode {
    pub fn has_text(&self) -> bool {
        !self.direct_text.is_empty()
    }
}

/// Border box of a rendered element in document coordinates (CSS pixels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, width: f64, height: f64) -> Result<Self, DomError> {
        let finite = [x, y, width, height].iter().all(|v| v.is_finite());
        if !finite || width < 0.0 || height < 0.0 {
            return Err(DomError::InvalidBox {
                x,
                y,
                width,
                height,
            });
        }
        Ok(Self {
            x,
            y,
            width,
            height,
        })
    }
}

/// One line of the layout stream. Field names are shared with the browser-side
/// extractor and must not change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutRecord {
    pub i: usize,
    pub t: String,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl LayoutRecord {
    pub fn bounding_box(&self) -> Result<BoundingBox, DomError> {
        BoundingBox::new(self.x, self.y, self.w, self.h)
    }
}

/// Reads newline-delimited layout records, skipping blank lines.
pub fn read_layout_records<R: BufRead>(reader: R) -> Result<Vec<LayoutRecord>, DomError> {
    let mut records = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| DomError::LayoutParse {
            line: lineno + 1,
            source,
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Writes records as newline-delimited JSON.
pub fn write_layout_records<W: std::io::Write>(
    mut writer: W,
    records: &[LayoutRecord],
) -> std::io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageDocument {
    pub source_id: String,
    pub nodes: Vec<DomNode>,
    pub layout: BTreeMap<usize, BoundingBox>,
}

impl PageDocument {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, index: usize) -> Option<&DomNode> {
        self.nodes.get(index)
    }

    pub fn bounding_box(&self, index: usize) -> Option<&BoundingBox> {
        self.layout.get(&index)
    }

    /// Serializes the indexed tree back to HTML. Each element's direct text is
    /// written before its children, so the output preserves structure and the
    /// text-bearing test but not the original interleaving of text and
    /// elements.
    pub fn to_html(&self) -> String {
        let mut out = String::new();
        if let Some(root) = self.nodes.first() {
            self.write_node(root, &mut out);
        }
        out
    }

    fn write_node(&self, node: &DomNode, out: &mut String) {
        out.push('<');
        out.push_str(&node.tag_name);
        out.push('>');
        if VOID_TAGS.contains(&node.tag_name.as_str()) {
            return;
        }
        escape_text(&node.direct_text, out);
        for &child in &node.children {
            self.write_node(&self.nodes[child], out);
        }
        out.push_str("</");
        out.push_str(&node.tag_name);
        out.push('>');
    }
}

fn escape_text(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            c => out.push(c),
        }
    }
}

/// Text-bearing elements in document order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClusterableSet {
    indices: Vec<usize>,
}

impl ClusterableSet {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }
}

/// Collapses runs of Unicode whitespace to one space and trims both ends.
pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Decodes `bytes` and parses them into a [`PageDocument`].
pub fn parse_html(bytes: &[u8]) -> Result<PageDocument, DomError> {
    parse_html_with_id(bytes, "")
}

pub fn parse_html_with_id(bytes: &[u8], source_id: &str) -> Result<PageDocument, DomError> {
    let text = decode(bytes)?;
    if text.trim().is_empty() {
        return Err(DomError::EmptyDocument);
    }
    let html = Html::parse_document(&text);
    let nodes = flatten(&html);
    if nodes.is_empty() {
        return Err(DomError::EmptyDocument);
    }
    Ok(PageDocument {
        source_id: source_id.to_string(),
        nodes,
        layout: BTreeMap::new(),
    })
}

fn decode(bytes: &[u8]) -> Result<String, DomError> {
    if let Some((encoding, bom_len)) = encoding_rs::Encoding::for_bom(bytes) {
        return decode_with(encoding, &bytes[bom_len..]);
    }
    match sniff_charset(bytes) {
        Some(encoding) if encoding != encoding_rs::UTF_8 => decode_with(encoding, bytes),
        _ => std::str::from_utf8(bytes)
            .map(str::to_owned)
            .map_err(|e| DomError::Encoding(format!("invalid UTF-8: {e}"))),
    }
}

fn decode_with(encoding: &'static encoding_rs::Encoding, bytes: &[u8]) -> Result<String, DomError> {
    encoding
        .decode_without_bom_handling_and_without_replacement(bytes)
        .map(|s| s.into_owned())
        .ok_or_else(|| DomError::Encoding(format!("bytes are not valid {}", encoding.name())))
}

/// Looks for a `charset=` declaration in the first 1024 bytes.
fn sniff_charset(bytes: &[u8]) -> Option<&'static encoding_rs::Encoding> {
    let head = &bytes[..bytes.len().min(1024)];
    let lower: Vec<u8> = head.iter().map(u8::to_ascii_lowercase).collect();
    let needle = b"charset=";
    let pos = lower.windows(needle.len()).position(|w| w == needle)?;
    let rest = &lower[pos + needle.len()..];
    let rest = rest
        .iter()
        .position(|b| !matches!(b, b'"' | b'\'' | b' '))
        .map(|start| &rest[start..])?;
    let end = rest
        .iter()
        .position(|b| !(b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b':' | b'.')))
        .unwrap_or(rest.len());
    encoding_rs::Encoding::for_label(&rest[..end])
}

fn flatten(html: &Html) -> Vec<DomNode> {
    let mut nodes: Vec<DomNode> = Vec::new();
    let Some(root) = html
        .tree
        .root()
        .children()
        .find(|child| child.value().is_element())
    else {
        return nodes;
    };

    // (tree node, parent preorder index, text hidden by an ancestor)
    let mut stack = vec![(root, None::<usize>, false)];
    while let Some((tree_node, parent, hidden)) = stack.pop() {
        let Node::Element(element) = tree_node.value() else {
            continue;
        };
        let tag_name = element.name().to_ascii_lowercase();
        let hidden = hidden || HIDDEN_TEXT_TAGS.contains(&tag_name.as_str());
        let index = nodes.len();
        let mut raw_text = String::new();
        let mut element_children = Vec::new();
        for child in tree_node.children() {
            match child.value() {
                Node::Text(text) if !hidden => raw_text.push_str(text),
                Node::Element(child_element) => {
                    let name = child_element.name().to_ascii_lowercase();
                    if !UNINDEXED_TAGS.contains(&name.as_str()) {
                        element_children.push(child);
                    }
                }
                _ => {}
            }
        }
        let depth = parent.map_or(0, |p| nodes[p].depth + 1);
        if let Some(p) = parent {
            nodes[p].children.push(index);
        }
        nodes.push(DomNode {
            preorder_index: index,
            tag_name,
            parent,
            children: Vec::new(),
            direct_text: collapse_whitespace(&raw_text),
            depth,
        });
        for child in element_children.into_iter().rev() {
            stack.push((child, Some(index), hidden));
        }
    }
    nodes
}

/// Text-bearing nodes in document order.
pub fn select_clusterable(doc: &PageDocument) -> ClusterableSet {
    ClusterableSet {
        indices: doc
            .nodes
            .iter()
            .filter(|n| n.has_text())
            .map(|n| n.preorder_index)
            .collect(),
    }
}

/// Joins layout records onto `doc` by pre-order index.
pub fn attach_layout<I>(mut doc: PageDocument, records: I) -> Result<PageDocument, DomError>
where
    I: IntoIterator<Item = LayoutRecord>,
{
    for record in records {
        let Some(node) = doc.nodes.get(record.i) else {
            return Err(DomError::IndexMismatch {
                index: record.i,
                expected: None,
                found: record.t,
            });
        };
        if !node.tag_name.eq_ignore_ascii_case(&record.t) {
            return Err(DomError::IndexMismatch {
                index: record.i,
                expected: Some(node.tag_name.clone()),
                found: record.t,
            });
        }
        let bbox = record.bounding_box()?;
        doc.layout.insert(record.i, bbox);
    }
    Ok(doc)
}
