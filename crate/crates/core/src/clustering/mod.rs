//! Density-based clustering over dense Euclidean distances.
//!
//! Both algorithms share one [`DistanceMatrix`] and one core-distance
//! convention: a point is its own first neighbour, so `min_samples = 1` gives
//! zero core distances. Every pairwise distance is rounded to 12 significant
//! decimal digits when the matrix is built. Exact ties between grid-valued
//! features then survive a uniform rescaling of the input, which keeps
//! labels identical under `x -> c * x`.
//!
//! All ties (seed queue, spanning-tree edges, cluster numbering) are broken by
//! the smallest index, so output depends only on the input values.

mod hdbscan;
mod optics;

use std::fmt;
use std::str::FromStr;

pub use hdbscan::{
    condense, hdbscan, hdbscan_hierarchy, mutual_reachability, prim_mst, select_eom,
    CondensedCluster, CondensedTree, Dendrogram, HdbscanHierarchy, Merge, MstEdge,
};
pub use optics::{extract_eps_cut, extract_xi, optics, optics_with_distances, ReachabilityPlot};

use crate::error::ClusterError;

/// Label used for points assigned to no cluster.
pub const NOISE: i32 = -1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterParams {
    /// Neighbourhood size for core distances, the point itself included.
    pub min_samples: usize,
    /// Smallest cluster the HDBSCAN condensed tree keeps.
    pub min_cluster_size: usize,
    /// OPTICS steepness threshold.
    pub xi: f64,
    /// Use a flat reachability cut at this radius instead of xi extraction.
    pub eps_cut: Option<f64>,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            min_samples: 5,
            min_cluster_size: 5,
            xi: 0.05,
            eps_cut: None,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<(), ClusterError> {
        if self.min_samples < 1 {
            return Err(ClusterError::InvalidParams("min_samples must be >= 1".into()));
        }
        if self.min_cluster_size < 2 {
            return Err(ClusterError::InvalidParams(
                "min_cluster_size must be >= 2".into(),
            ));
        }
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return Err(ClusterError::InvalidParams(format!(
                "xi must lie in (0, 1), got {}",
                self.xi
            )));
        }
        if let Some(eps) = self.eps_cut {
            if eps.is_nan() || eps <= 0.0 {
                return Err(ClusterError::InvalidParams(format!(
                    "eps_cut must be > 0, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Optics,
    Hdbscan,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Optics, Algorithm::Hdbscan];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Optics => "OPTICS",
            Algorithm::Hdbscan => "HDBSCAN",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = ClusterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "optics" => Ok(Algorithm::Optics),
            "hdbscan" => Ok(Algorithm::Hdbscan),
            other => Err(ClusterError::InvalidParams(format!(
                "unknown algorithm {other:?}"
            ))),
        }
    }
}

/// Per-row labels: [`NOISE`] or a cluster id in `0..k`.
///
/// Cluster ids are numbered by first appearance in row order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClusterAssignment {
    labels: Vec<i32>,
    k: usize,
}

impl ClusterAssignment {
    pub fn all_noise(n: usize) -> Self {
        Self {
            labels: vec![NOISE; n],
            k: 0,
        }
    }

    /// Builds an assignment from arbitrary group ids, `None` meaning noise.
    pub fn from_groups<I, T>(groups: I) -> Self
    where
        I: IntoIterator<Item = Option<T>>,
        T: PartialEq,
    {
        let mut seen: Vec<T> = Vec::new();
        let labels = groups
            .into_iter()
            .map(|g| match g {
                None => NOISE,
                Some(g) => match seen.iter().position(|s| *s == g) {
                    Some(i) => i as i32,
                    None => {
                        seen.push(g);
                        seen.len() as i32 - 1
                    }
                },
            })
            .collect();
        Self {
            labels,
            k: seen.len(),
        }
    }

    /// Builds an assignment from signed labels where any negative value is
    /// noise.
    pub fn from_labels(labels: &[i64]) -> Self {
        Self::from_groups(labels.iter().map(|&l| (l >= 0).then_some(l)))
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of clusters, noise excluded.
    pub fn cluster_count(&self) -> usize {
        self.k
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            if l >= 0 {
                sizes[l as usize] += 1;
            }
        }
        sizes
    }
}

/// Rounds to 12 significant decimal digits. Non-finite values and zero pass
/// through unchanged.
pub(crate) fn snap(value: f64) -> f64 {
    if !value.is_finite() || value == 0.0 {
        return value;
    }
    format!("{value:.11e}")
        .parse()
        .expect("formatted float parses")
}

/// Dense symmetric matrix of snapped Euclidean distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn euclidean(points: &[Vec<f64>]) -> Result<Self, ClusterError> {
        let n = points.len();
        if n == 0 {
            return Err(ClusterError::InvalidPoints("no points".into()));
        }
        let dim = points[0].len();
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(ClusterError::InvalidPoints(format!(
                    "row {i} has {} columns, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(ClusterError::InvalidPoints(format!(
                    "row {i} has a non-finite value"
                )));
            }
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let sq: f64 = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let d = snap(sq.sqrt());
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Ok(Self { n, data })
    }

    /// Wraps a precomputed square matrix. Values are used as given.
    pub fn from_square(n: usize, data: Vec<f64>) -> Result<Self, ClusterError> {
        if data.len() != n * n || n == 0 {
            return Err(ClusterError::InvalidPoints(format!(
                "expected {n}x{n} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Distance from each point to its `min_samples`-th nearest point, counting
/// the point itself first. Infinite when fewer than `min_samples` points
/// exist.
pub fn core_distances(points: &[Vec<f64>], min_samples: usize) -> Result<Vec<f64>, ClusterError> {
    if min_samples < 1 {
        return Err(ClusterError::InvalidParams("min_samples must be >= 1".into()));
    }
    Ok(core_distances_from(&DistanceMatrix::euclidean(points)?, min_samples))
}

pub fn core_distances_from(distances: &DistanceMatrix, min_samples: usize) -> Vec<f64> {
    let n = distances.len();
    if min_samples > n {
        return vec![f64::INFINITY; n];
    }
    (0..n)
        .map(|i| {
            let mut row = distances.row(i).to_vec();
            let (_, kth, _) = row.select_nth_unstable_by(min_samples - 1, f64::total_cmp);
            *kth
        })
        .collect()
}

/// Runs `algorithm` with `params` and returns per-row labels.
pub fn cluster(
    points: &[Vec<f64>],
    algorithm: Algorithm,
    params: &ClusterParams,
) -> Result<ClusterAssignment, ClusterError> {
    params.validate()?;
    match algorithm {
        Algorithm::Optics => {
            let plot = optics(points, params.min_samples)?;
            Ok(match params.eps_cut {
                Some(eps) => extract_eps_cut(&plot, eps),
                None => extract_xi(&plot, params.xi, params.min_samples),
            })
        }
        Algorithm::Hdbscan => hdbscan(points, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn core_distance_examples() {
        assert_eq!(core_distances(&line(&[0.0, 1.0, 2.0]), 2).unwrap(), [1.0, 1.0, 1.0]);
        assert_eq!(core_distances(&line(&[0.0, 1.0, 5.0]), 1).unwrap(), [0.0, 0.0, 0.0]);
        assert_eq!(core_distances(&line(&[3.0]), 2).unwrap(), [f64::INFINITY]);
        assert_eq!(core_distances(&line(&[0.0, 1.0, 3.0]), 3).unwrap(), [3.0, 2.0, 3.0]);
    }

    #[test]
    fn core_distance_rejects_zero_min_samples() {
        assert!(core_distances(&line(&[0.0]), 0).is_err());
    }

    #[test]
    fn distance_matrix_validation() {
        assert!(DistanceMatrix::euclidean(&[]).is_err());
        assert!(DistanceMatrix::euclidean(&[vec![0.0], vec![1.0, 2.0]]).is_err());
        assert!(DistanceMatrix::euclidean(&[vec![f64::NAN]]).is_err());
        let d = DistanceMatrix::euclidean(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(d.get(0, 1), 5.0);
        assert_eq!(d.get(1, 0), 5.0);
        assert_eq!(d.get(1, 1), 0.0);
    }

    #[test]
    fn snapping_preserves_ties_across_scales() {
        let a = 0.03f64 - 0.02;
        let b = 0.06f64 - 0.05;
        assert_ne!(a, b);
        assert_eq!(snap(a), snap(b));
        assert_eq!(snap(1.0 / 3.0), 0.333333333333);
        assert_eq!(snap(f64::INFINITY), f64::INFINITY);
    }

    #[test]
    fn assignment_canonical_numbering() {
        let a = ClusterAssignment::from_labels(&[7, -1, 3, 7, 3, -5]);
        assert_eq!(a.labels(), &[0, -1, 1, 0, 1, -1]);
        assert_eq!(a.cluster_count(), 2);
        assert_eq!(a.cluster_sizes(), vec![2, 2]);
        assert_eq!(a.noise_count(), 2);
        assert_eq!(ClusterAssignment::all_noise(3).cluster_count(), 0);
    }

    #[test]
    fn params_validation() {
        assert!(ClusterParams::default().validate().is_ok());
        let bad = [
            ClusterParams { min_samples: 0, ..Default::default() },
            ClusterParams { min_cluster_size: 1, ..Default::default() },
            ClusterParams { xi: 0.0, ..Default::default() },
            ClusterParams { xi: 1.0, ..Default::default() },
            ClusterParams { eps_cut: Some(0.0), ..Default::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn algorithm_names() {
        assert_eq!("optics".parse::<Algorithm>().unwrap(), Algorithm::Optics);
        assert_eq!("HDBSCAN".parse::<Algorithm>().unwrap(), Algorithm::Hdbscan);
        assert!("kmeans".parse::<Algorithm>().is_err());
        assert_eq!(Algorithm::Hdbscan.to_string(), "HDBSCAN");
    }

    #[test]
    fn tiny_inputs_are_all_noise() {
        let params = ClusterParams::default();
        for algorithm in Algorithm::ALL {
            let a = cluster(&line(&[0.0, 0.1, 0.2]), algorithm, &params).unwrap();
            assert_eq!(a, ClusterAssignment::all_noise(3));
        }
    }
}
