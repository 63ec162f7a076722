//! Run settings: an optional TOML file overlaid by command-line flags.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use domseg::clustering::{Algorithm, ClusterParams};
use domseg::coordinates::{parse_vector_list, Normalization, VectorSpec};
use domseg::pipeline::RunConfig;
use serde::Deserialize;

/// Any problem with the requested settings. Maps to exit code 2.
#[derive(Debug)]
pub struct InvalidConfig(pub String);

impl fmt::Display for InvalidConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for InvalidConfig {}

/// A string such as `"1-13"` or a list of items.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ListValue {
    Joined(String),
    Items(Vec<toml::Value>),
}

impl ListValue {
    fn joined(&self) -> String {
        match self {
            ListValue::Joined(s) => s.clone(),
            ListValue::Items(items) => items
                .iter()
                .map(|v| match v {
                    toml::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
        }
    }
}

/// Keys accepted in the config file. Each mirrors a flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    vectors: Option<ListValue>,
    algorithms: Option<ListValue>,
    #[serde(alias = "min_samples")]
    min_samples: Option<usize>,
    #[serde(alias = "min_cluster_size")]
    min_cluster_size: Option<usize>,
    xi: Option<f64>,
    #[serde(alias = "eps_cut")]
    eps_cut: Option<f64>,
    normalize: Option<bool>,
    #[serde(alias = "td_divs_only")]
    td_divs_only: Option<bool>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self, InvalidConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| InvalidConfig(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| InvalidConfig(format!("{}: {e}", path.display())))
    }
}

/// Flags shared by every subcommand that composes or clusters vectors.
#[derive(Debug, Clone, Default, Args)]
pub struct SettingsArgs {
    /// TOML file with default values for the flags below
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Preset rows or component specs, e.g. `1-13` or `2,TD-DI`
    #[arg(long)]
    pub vectors: Option<String>,
    /// Comma-separated subset of `optics,hdbscan`
    #[arg(long)]
    pub algorithms: Option<String>,
    #[arg(long)]
    pub min_samples: Option<usize>,
    #[arg(long)]
    pub min_cluster_size: Option<usize>,
    #[arg(long)]
    pub xi: Option<f64>,
    /// Flat reachability cut for OPTICS instead of xi extraction
    #[arg(long)]
    pub eps_cut: Option<f64>,
    /// Min-max scale every vector
    #[arg(long, conflicts_with = "no_normalize")]
    pub normalize: bool,
    /// Never scale (default scales multi-component vectors only)
    #[arg(long)]
    pub no_normalize: bool,
    /// Count only div ancestors for tag depth
    #[arg(long)]
    pub td_divs_only: bool,
    /// Worker threads, 0 for one per core
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl SettingsArgs {
    /// Merges defaults, the config file and flags, in rising precedence.
    pub fn resolve(&self, out_flag: Option<&Path>) -> Result<RunConfig, InvalidConfig> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let defaults = RunConfig::default();

        let vectors = match self.vectors.clone().or(file.vectors.map(|v| v.joined())) {
            Some(s) => parse_vector_list(&s).map_err(|e| InvalidConfig(e.to_string()))?,
            None => defaults.vectors,
        };
        let algorithms = match self.algorithms.clone().or(file.algorithms.map(|v| v.joined())) {
            Some(s) => parse_algorithms(&s)?,
            None => defaults.algorithms,
        };
        let params = ClusterParams {
            min_samples: self
                .min_samples
                .or(file.min_samples)
                .unwrap_or(defaults.params.min_samples),
            min_cluster_size: self
                .min_cluster_size
                .or(file.min_cluster_size)
                .unwrap_or(defaults.params.min_cluster_size),
            xi: self.xi.or(file.xi).unwrap_or(defaults.params.xi),
            eps_cut: self.eps_cut.or(file.eps_cut),
        };
        let normalize = if self.normalize {
            Some(true)
        } else if self.no_normalize {
            Some(false)
        } else {
            file.normalize
        };
        let normalization = match normalize {
            Some(true) => Normalization::On,
            Some(false) => Normalization::Off,
            None => Normalization::Auto,
        };
        let run = RunConfig {
            vectors,
            algorithms,
            params,
            normalization,
            td_divs_only: self.td_divs_only || file.td_divs_only.unwrap_or(false),
            out_dir: out_flag
                .map(Path::to_path_buf)
                .or(file.out)
                .unwrap_or(defaults.out_dir),
            jobs: self.jobs.or(file.jobs).unwrap_or(defaults.jobs),
        };
        run.validate().map_err(|e| InvalidConfig(e.to_string()))?;
        Ok(run)
    }
}

fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>, InvalidConfig> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let a: Algorithm = item.parse().map_err(|e: domseg::ClusterError| InvalidConfig(e.to_string()))?;
        if !out.contains(&a) {
            out.push(a);
        }
    }
    Ok(out)
}

/// Parses one vector given on its own flag.
pub fn parse_single_vector(s: &str) -> Result<VectorSpec, InvalidConfig> {
    match parse_vector_list(s).map_err(|e| InvalidConfig(e.to_string()))?.as_slice() {
        [one] => Ok(one.clone()),
        _ => Err(InvalidConfig(format!("expected a single vector, got {s:?}"))),
    }
}
