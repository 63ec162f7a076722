//! Per-node structural and visual coordinates, and the feature matrices built
//! from them.
//!
//! Structural coordinates:
//!
//! * Tag Depth (`TD`): number of element ancestors.
//! * Div ID (`DI`): pre-order position among all elements.
//! * Tag Group (`TG`): `tg(root) = 0`, and the k-th element child (0-based) of
//!   `p` gets `tg(p) + 1 + k`. Completed sibling subtrees never carry over.
//! * Data Index (`DID`): a running counter that increments at each
//!   text-bearing element before assignment; other elements carry the current
//!   value.
//!
//! Visual coordinates come from the attached layout: `X`, `Y` are the border
//! box top-left corner and `TX`, `TY` its center.
//!
//! With [`CoordinateOptions::td_divs_only`], `TD` counts only `div` ancestors
//! and `DI` counts only preceding `div` elements.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::dom::{BoundingBox, ClusterableSet, PageDocument};
use crate::error::CoordinateError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    Td,
    Di,
    Did,
    Tg,
    X,
    Y,
    Tx,
    Ty,
}

impl Component {
    pub const ALL: [Component; 8] = [
        Component::Td,
        Component::Di,
        Component::Did,
        Component::Tg,
        Component::X,
        Component::Y,
        Component::Tx,
        Component::Ty,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Component::Td => "TD",
            Component::Di => "DI",
            Component::Did => "DID",
            Component::Tg => "TG",
            Component::X => "X",
            Component::Y => "Y",
            Component::Tx => "TX",
            Component::Ty => "TY",
        }
    }

    pub fn is_visual(self) -> bool {
        matches!(
            self,
            Component::X | Component::Y | Component::Tx | Component::Ty
        )
    }
}

impl FromStr for Component {
    type Err = CoordinateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        Component::ALL
            .into_iter()
            .find(|c| c.name() == upper)
            .ok_or_else(|| CoordinateError::InvalidSpec(s.to_string()))
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

use Component::{Di, Did, Tg, Td, Tx, Ty, X, Y};

const PRESETS: [&[Component]; 13] = [
    &[Td],
    &[Di],
    &[Did],
    &[Tg],
    &[X, Y],
    &[Tx, Ty],
    &[Td, Di],
    &[X, Y, Td, Di],
    &[X, Y, Td, Di, Tx, Ty],
    &[X, Y, Td, Di, Did, Tg],
    &[Td, Di, Did, Tg],
    &[Td, Di, Tg],
    &[Td, Di, Did, Tg, X, Y, Tx, Ty],
];

/// An ordered, duplicate-free selection of coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VectorSpec {
    preset: Option<u8>,
    components: Vec<Component>,
}

impl VectorSpec {
    /// Preset `row` (1..=13).
    pub fn preset(row: u8) -> Result<Self, CoordinateError> {
        let components = PRESETS
            .get(usize::from(row).wrapping_sub(1))
            .ok_or_else(|| CoordinateError::InvalidSpec(row.to_string()))?;
        Ok(Self {
            preset: Some(row),
            components: components.to_vec(),
        })
    }

    pub fn presets() -> Vec<VectorSpec> {
        (1..=13).map(|row| Self::preset(row).unwrap()).collect()
    }

    /// A spec from explicit components. Resolves to the matching preset when
    /// the components equal one exactly (same order).
    pub fn custom(components: Vec<Component>) -> Result<Self, CoordinateError> {
        if components.is_empty() {
            return Err(CoordinateError::InvalidSpec(String::new()));
        }
        for (i, c) in components.iter().enumerate() {
            if components[..i].contains(c) {
                return Err(CoordinateError::InvalidSpec(format!(
                    "duplicate component {c}"
                )));
            }
        }
        let preset = PRESETS
            .iter()
            .position(|p| *p == components.as_slice())
            .map(|i| i as u8 + 1);
        Ok(Self { preset, components })
    }

    pub fn preset_id(&self) -> Option<u8> {
        self.preset
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn needs_layout(&self) -> bool {
        self.components.iter().any(|c| c.is_visual())
    }

    /// Vectors built from one coordinate: a single structural component, or
    /// one visual pair (`X,Y` or `TX,TY`). Presets 1-6 are single, 7-13
    /// combined.
    pub fn is_single(&self) -> bool {
        match self.components.as_slice() {
            [_] => true,
            [a, b] => {
                let mut pair = [*a, *b];
                pair.sort();
                pair == [X, Y] || pair == [Tx, Ty]
            }
            _ => false,
        }
    }

    /// Dash-joined component names, or `ALL` for preset 13.
    pub fn label(&self) -> String {
        if self.preset == Some(13) {
            return "ALL".to_string();
        }
        self.components
            .iter()
            .map(|c| c.name())
            .collect::<Vec<_>>()
            .join("-")
    }
}

impl fmt::Display for VectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for VectorSpec {
    type Err = CoordinateError;

    /// Accepts a preset row (`"7"`), a dash-joined component string
    /// (`"TD-DI"`), `ALL`, or a comma-separated custom list (`"TD,TG"`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        if let Ok(row) = trimmed.parse::<u8>() {
            return Self::preset(row);
        }
        if trimmed.eq_ignore_ascii_case("all") {
            return Self::preset(13);
        }
        let components = trimmed
            .split(['-', ','])
            .map(str::parse)
            .collect::<Result<Vec<Component>, _>>()
            .map_err(|_| CoordinateError::InvalidSpec(s.to_string()))?;
        Self::custom(components)
    }
}

/// Parses a comma-separated list of preset rows or dash-joined specs, e.g.
/// `"1,2,TD-DI,13"`. Row ranges such as `1-13` are expanded.
pub fn parse_vector_list(s: &str) -> Result<Vec<VectorSpec>, CoordinateError> {
    let mut specs = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        if let Some((lo, hi)) = item.split_once('-') {
            if let (Ok(lo), Ok(hi)) = (lo.parse::<u8>(), hi.parse::<u8>()) {
                if lo > hi {
                    return Err(CoordinateError::InvalidSpec(item.to_string()));
                }
                for row in lo..=hi {
                    specs.push(VectorSpec::preset(row)?);
                }
                continue;
            }
        }
        specs.push(item.parse()?);
    }
    if specs.is_empty() {
        return Err(CoordinateError::InvalidSpec(s.to_string()));
    }
    Ok(specs)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CoordinateOptions {
    pub td_divs_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateSet {
    pub td: usize,
    pub di: usize,
    pub tg: usize,
    pub did: usize,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub tx: Option<f64>,
    pub ty: Option<f64>,
}

impl CoordinateSet {
    pub fn get(&self, component: Component) -> Option<f64> {
        match component {
            Td => Some(self.td as f64),
            Di => Some(self.di as f64),
            Tg => Some(self.tg as f64),
            Did => Some(self.did as f64),
            X => self.x,
            Y => self.y,
            Tx => self.tx,
            Ty => self.ty,
        }
    }
}

pub fn compute_tag_depth(doc: &PageDocument, options: &CoordinateOptions) -> Vec<usize> {
    if !options.td_divs_only {
        return doc.nodes.iter().map(|n| n.depth).collect();
    }
    let mut td = vec![0; doc.len()];
    for node in &doc.nodes {
        if let Some(p) = node.parent {
            td[node.preorder_index] = td[p] + usize::from(doc.nodes[p].tag_name == "div");
        }
    }
    td
}

pub fn compute_div_id(doc: &PageDocument, options: &CoordinateOptions) -> Vec<usize> {
    if !options.td_divs_only {
        return doc.nodes.iter().map(|n| n.preorder_index).collect();
    }
    let mut seen = 0;
    doc.nodes
        .iter()
        .map(|n| {
            let di = seen;
            seen += usize::from(n.tag_name == "div");
            di
        })
        .collect()
}

pub fn compute_tag_group(doc: &PageDocument) -> Vec<usize> {
    let mut tg = vec![0; doc.len()];
    // pre-order guarantees a parent is assigned before its children
    for node in &doc.nodes {
        for (k, &child) in node.children.iter().enumerate() {
            tg[child] = tg[node.preorder_index] + 1 + k;
        }
    }
    tg
}

pub fn compute_data_index(doc: &PageDocument, clusterable: &ClusterableSet) -> Vec<usize> {
    let mut counter = 0;
    doc.nodes
        .iter()
        .map(|n| {
            if clusterable.contains(n.preorder_index) {
                counter += 1;
            }
            counter
        })
        .collect()
}

/// Center of the box: `(x + w/2, y + h/2)`.
pub fn compute_true_cartesian(bbox: &BoundingBox) -> (f64, f64) {
    (bbox.x + bbox.width / 2.0, bbox.y + bbox.height / 2.0)
}

/// All eight coordinates for every node of `doc`, indexed by pre-order.
pub fn compute_coordinates(
    doc: &PageDocument,
    clusterable: &ClusterableSet,
    options: &CoordinateOptions,
) -> Vec<CoordinateSet> {
    let td = compute_tag_depth(doc, options);
    let di = compute_div_id(doc, options);
    let tg = compute_tag_group(doc);
    let did = compute_data_index(doc, clusterable);
    (0..doc.len())
        .map(|i| {
            let bbox = doc.bounding_box(i);
            let center = bbox.map(compute_true_cartesian);
            CoordinateSet {
                td: td[i],
                di: di[i],
                tg: tg[i],
                did: did[i],
                x: bbox.map(|b| b.x),
                y: bbox.map(|b| b.y),
                tx: center.map(|c| c.0),
                ty: center.map(|c| c.1),
            }
        })
        .collect()
}

/// When to min-max scale feature columns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Normalization {
    /// Scale multi-component vectors, leave single-component ones raw.
    #[default]
    Auto,
    On,
    Off,
}

impl Normalization {
    pub fn applies(self, spec: &VectorSpec) -> bool {
        match self {
            Normalization::Auto => spec.components().len() > 1,
            Normalization::On => true,
            Normalization::Off => false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ComposeOptions {
    pub normalization: Normalization,
    pub coordinates: CoordinateOptions,
}

/// One row per clusterable node in document order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: Vec<Vec<f64>>,
    pub node_ids: Vec<usize>,
    pub dims: Vec<Component>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Min-max scales every column in place (constant columns become 0).
    pub fn normalize(&mut self) {
        for j in 0..self.dims.len() {
            let mut column = self.column(j);
            min_max_normalize(&mut column);
            for (row, v) in self.rows.iter_mut().zip(column) {
                row[j] = v;
            }
        }
    }

    /// Writes `node,<components...>`.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec!["node".to_string()];
        header.extend(self.dims.iter().map(|d| d.name().to_string()));
        out.write_record(&header)?;
        for (node, row) in self.node_ids.iter().zip(&self.rows) {
            let mut record = vec![node.to_string()];
            record.extend(row.iter().map(|v| v.to_string()));
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Scales `values` so the minimum maps to 0 and the maximum to 1. A constant
/// column maps to all zeros.
pub fn min_max_normalize(values: &mut [f64]) {
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = max - min;
    for v in values.iter_mut() {
        *v = if range > 0.0 { (*v - min) / range } else { 0.0 };
    }
}

pub fn compose_vectors(
    doc: &PageDocument,
    clusterable: &ClusterableSet,
    spec: &VectorSpec,
    options: &ComposeOptions,
) -> Result<FeatureMatrix, CoordinateError> {
    if clusterable.is_empty() {
        return Err(CoordinateError::EmptyInput);
    }
    if spec.needs_layout() {
        let missing: Vec<usize> = clusterable
            .indices()
            .iter()
            .copied()
            .filter(|&i| doc.bounding_box(i).is_none())
            .collect();
        if !missing.is_empty() {
            return Err(CoordinateError::MissingLayout(missing));
        }
    }
    let coords = compute_coordinates(doc, clusterable, &options.coordinates);
    let rows = clusterable
        .indices()
        .iter()
        .map(|&i| {
            spec.components()
                .iter()
                .map(|&c| coords[i].get(c).expect("layout checked above"))
                .collect()
        })
        .collect();
    let mut matrix = FeatureMatrix {
        rows,
        node_ids: clusterable.indices().to_vec(),
        dims: spec.components().to_vec(),
    };
    if options.normalization.applies(spec) {
        matrix.normalize();
    }
    Ok(matrix)
}
