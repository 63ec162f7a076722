//! HDBSCAN: mutual reachability, Prim spanning tree, single-linkage
//! dendrogram, condensed tree and excess-of-mass selection.

use std::cmp::Ordering;

use super::{core_distances_from, ClusterAssignment, ClusterParams, DistanceMatrix};
use crate::error::ClusterError;

/// `max(core(a), core(b), dist(a, b))` for every pair; zero on the diagonal.
pub fn mutual_reachability(distances: &DistanceMatrix, core: &[f64]) -> DistanceMatrix {
    let n = distances.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                data[i * n + j] = distances.get(i, j).max(core[i]).max(core[j]);
            }
        }
    }
    DistanceMatrix::from_square(n, data).expect("square by construction")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MstEdge {
    /// Smaller endpoint.
    pub a: usize,
    /// Larger endpoint.
    pub b: usize,
    pub weight: f64,
}

impl MstEdge {
    fn new(u: usize, v: usize, weight: f64) -> Self {
        Self {
            a: u.min(v),
            b: u.max(v),
            weight,
        }
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
    }
}

/// Minimum spanning tree of the complete graph, grown from vertex 0. Ties
/// go to the edge with the smaller `(min, max)` endpoint pair.
pub fn prim_mst(graph: &DistanceMatrix) -> Vec<MstEdge> {
    let n = graph.len();
    let mut in_tree = vec![false; n];
    let mut best: Vec<Option<MstEdge>> = vec![None; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let candidate = MstEdge::new(current, v, graph.get(current, v));
            let better = match &best[v] {
                None => true,
                Some(edge) => candidate.key_cmp(edge) == Ordering::Less,
            };
            if better {
                best[v] = Some(candidate);
            }
        }
        let next = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&u, &v| {
                let eu = best[u].as_ref().expect("complete graph");
                let ev = best[v].as_ref().expect("complete graph");
                eu.key_cmp(ev)
            })
            .expect("vertices remain");
        edges.push(best[next].expect("complete graph"));
        in_tree[next] = true;
        current = next;
    }
    edges
}

/// One agglomeration step. Node ids below `n_points` are leaves; merge `i`
/// creates node `n_points + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub n_points: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Single-linkage hierarchy from spanning-tree edges, merged by
    /// increasing `(weight, a, b)`.
    pub fn from_mst(n_points: usize, edges: &[MstEdge]) -> Self {
        let mut sorted = edges.to_vec();
        sorted.sort_by(MstEdge::key_cmp);
        let mut parent: Vec<usize> = (0..n_points).collect();
        let mut node_of: Vec<usize> = (0..n_points).collect();
        let mut size = vec![1usize; n_points];
        let mut merges = Vec::with_capacity(sorted.len());

        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }

        for edge in sorted {
            let ra = find(&mut parent, edge.a);
            let rb = find(&mut parent, edge.b);
            if ra == rb {
                continue;
            }
            let (left, right) = (node_of[ra].min(node_of[rb]), node_of[ra].max(node_of[rb]));
            let merged = size[ra] + size[rb];
            merges.push(Merge {
                left,
                right,
                distance: edge.weight,
                size: merged,
            });
            parent[rb] = ra;
            size[ra] = merged;
            node_of[ra] = n_points + merges.len() - 1;
        }
        Self { n_points, merges }
    }

    pub fn root(&self) -> Option<usize> {
        match self.n_points {
            0 => None,
            n => Some(n + self.merges.len() - 1),
        }
    }

    pub fn node_size(&self, node: usize) -> usize {
        if node < self.n_points {
            1
        } else {
            self.merges[node - self.n_points].size
        }
    }

    /// Leaves under `node`.
    pub fn leaves(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            if x < self.n_points {
                out.push(x);
            } else {
                let m = &self.merges[x - self.n_points];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        out
    }

    /// Row-major matrix of merge heights at which each pair first joins.
    pub fn cophenetic(&self) -> Vec<f64> {
        let n = self.n_points;
        let mut out = vec![0.0; n * n];
        for m in &self.merges {
            let left = self.leaves(m.left);
            let right = self.leaves(m.right);
            for &i in &left {
                for &j in &right {
                    out[i * n + j] = m.distance;
                    out[j * n + i] = m.distance;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondensedCluster {
    pub parent: Option<usize>,
    pub birth_lambda: f64,
    pub size: usize,
    pub children: Vec<usize>,
    pub stability: f64,
}

/// Hierarchy pruned by `min_cluster_size`. Cluster 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedTree {
    pub clusters: Vec<CondensedCluster>,
    /// Cluster each point falls out of.
    pub point_cluster: Vec<usize>,
    /// Density (`1 / distance`) at which each point falls out.
    pub point_lambda: Vec<f64>,
}

fn to_lambda(distance: f64) -> f64 {
    if distance > 0.0 {
        1.0 / distance
    } else {
        f64::INFINITY
    }
}

fn excess(lambda: f64, birth: f64) -> f64 {
    if lambda == birth {
        0.0
    } else {
        lambda - birth
    }
}

pub fn condense(dendrogram: &Dendrogram, min_cluster_size: usize) -> CondensedTree {
    let n = dendrogram.n_points;
    let mut tree = CondensedTree {
        clusters: vec![CondensedCluster {
            parent: None,
            birth_lambda: 0.0,
            size: n,
            children: Vec::new(),
            stability: 0.0,
        }],
        point_cluster: vec![0; n],
        point_lambda: vec![f64::INFINITY; n],
    };
    let Some(root) = dendrogram.root() else {
        return tree;
    };

    let mut stack = vec![(root, 0usize)];
    while let Some((node, cluster)) = stack.pop() {
        if node < n {
            tree.point_cluster[node] = cluster;
            tree.point_lambda[node] = f64::INFINITY;
            continue;
        }
        let merge = dendrogram.merges[node - n];
        let lambda = to_lambda(merge.distance);
        let left_big = dendrogram.node_size(merge.left) >= min_cluster_size;
        let right_big = dendrogram.node_size(merge.right) >= min_cluster_size;
        match (left_big, right_big) {
            (true, true) => {
                let mut new_ids = [0; 2];
                for (slot, child) in [merge.left, merge.right].into_iter().enumerate() {
                    let id = tree.clusters.len();
                    tree.clusters.push(CondensedCluster {
                        parent: Some(cluster),
                        birth_lambda: lambda,
                        size: dendrogram.node_size(child),
                        children: Vec::new(),
                        stability: 0.0,
                    });
                    tree.clusters[cluster].children.push(id);
                    new_ids[slot] = id;
                }
                stack.push((merge.right, new_ids[1]));
                stack.push((merge.left, new_ids[0]));
            }
            (true, false) => {
                fall_out(&mut tree, dendrogram, merge.right, cluster, lambda);
                stack.push((merge.left, cluster));
            }
            (false, true) => {
                fall_out(&mut tree, dendrogram, merge.left, cluster, lambda);
                stack.push((merge.right, cluster));
            }
            (false, false) => {
                fall_out(&mut tree, dendrogram, merge.left, cluster, lambda);
                fall_out(&mut tree, dendrogram, merge.right, cluster, lambda);
            }
        }
    }

    // stability: points leaving the cluster plus child clusters splitting off
    for p in 0..n {
        let c = tree.point_cluster[p];
        tree.clusters[c].stability += excess(tree.point_lambda[p], tree.clusters[c].birth_lambda);
    }
    for c in 1..tree.clusters.len() {
        let parent = tree.clusters[c].parent.expect("non-root has a parent");
        let gain = excess(tree.clusters[c].birth_lambda, tree.clusters[parent].birth_lambda)
            * tree.clusters[c].size as f64;
        tree.clusters[parent].stability += gain;
    }
    tree
}

fn fall_out(
    tree: &mut CondensedTree,
    dendrogram: &Dendrogram,
    node: usize,
    cluster: usize,
    lambda: f64,
) {
    for p in dendrogram.leaves(node) {
        tree.point_cluster[p] = cluster;
        tree.point_lambda[p] = lambda;
    }
}

/// `a > b` beyond a relative tolerance of 1e-9.
fn clearly_greater(a: f64, b: f64) -> bool {
    if a == b {
        return false;
    }
    if a.is_infinite() || b.is_infinite() {
        return a > b;
    }
    a - b > 1e-9 * a.abs().max(b.abs())
}

/// Excess-of-mass selection over non-root clusters. Returns a flag per
/// cluster.
pub fn select_eom(tree: &CondensedTree) -> Vec<bool> {
    let k = tree.clusters.len();
    let mut selected = vec![false; k];
    let mut effective: Vec<f64> = tree.clusters.iter().map(|c| c.stability).collect();
    // children always carry larger ids than their parent
    for c in (1..k).rev() {
        let children = &tree.clusters[c].children;
        let subtree: f64 = children.iter().map(|&ch| effective[ch]).sum();
        if !children.is_empty() && clearly_greater(subtree, effective[c]) {
            effective[c] = subtree;
        } else {
            selected[c] = true;
            let mut stack = children.clone();
            while let Some(d) = stack.pop() {
                selected[d] = false;
                stack.extend(tree.clusters[d].children.iter().copied());
            }
        }
    }
    selected
}

/// Intermediate HDBSCAN state, kept for inspection and testing.
#[derive(Debug, Clone, PartialEq)]
pub struct HdbscanHierarchy {
    pub core_distances: Vec<f64>,
    pub mst: Vec<MstEdge>,
    pub dendrogram: Dendrogram,
    pub condensed: CondensedTree,
}

pub fn hdbscan_hierarchy(
    points: &[Vec<f64>],
    params: &ClusterParams,
) -> Result<HdbscanHierarchy, ClusterError> {
    params.validate()?;
    let distances = DistanceMatrix::euclidean(points)?;
    let core = core_distances_from(&distances, params.min_samples);
    let reach = mutual_reachability(&distances, &core);
    let mst = prim_mst(&reach);
    let dendrogram = Dendrogram::from_mst(points.len(), &mst);
    let condensed = condense(&dendrogram, params.min_cluster_size);
    Ok(HdbscanHierarchy {
        core_distances: core,
        mst,
        dendrogram,
        condensed,
    })
}

pub fn hdbscan(points: &[Vec<f64>], params: &ClusterParams) -> Result<ClusterAssignment, ClusterError> {
    params.validate()?;
    let n = points.len();
    if n < params.min_cluster_size || n < params.min_samples {
        DistanceMatrix::euclidean(points)?;
        return Ok(ClusterAssignment::all_noise(n));
    }
    let hierarchy = hdbscan_hierarchy(points, params)?;
    let tree = &hierarchy.condensed;
    let selected = select_eom(tree);
    let groups = (0..n).map(|p| {
        let mut c = tree.point_cluster[p];
        loop {
            if selected[c] {
                return Some(c);
            }
            match tree.clusters[c].parent {
                Some(parent) => c = parent,
                None => return None,
            }
        }
    });
    Ok(ClusterAssignment::from_groups(groups))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn three_point_hierarchy() {
        let points = line(&[0.0, 1.0, 2.0]);
        let distances = DistanceMatrix::euclidean(&points).unwrap();
        let core = core_distances_from(&distances, 2);
        let reach = mutual_reachability(&distances, &core);
        assert_eq!(reach.get(0, 1), 1.0);
        assert_eq!(reach.get(1, 2), 1.0);
        assert_eq!(reach.get(0, 2), 2.0);
        let mst = prim_mst(&reach);
        assert_eq!(
            mst,
            vec![MstEdge::new(0, 1, 1.0), MstEdge::new(1, 2, 1.0)]
        );
        let dendrogram = Dendrogram::from_mst(3, &mst);
        assert_eq!(
            dendrogram.merges,
            vec![
                Merge { left: 0, right: 1, distance: 1.0, size: 2 },
                Merge { left: 2, right: 3, distance: 1.0, size: 3 },
            ]
        );
        assert_eq!(dendrogram.cophenetic(), vec![0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn fewer_points_than_min_cluster_size() {
        let params = ClusterParams {
            min_samples: 2,
            min_cluster_size: 5,
            ..Default::default()
        };
        let a = hdbscan(&line(&[0.0, 0.1, 0.2, 0.3]), &params).unwrap();
        assert_eq!(a, ClusterAssignment::all_noise(4));
    }

    #[test]
    fn two_groups_and_an_outlier() {
        let mut values: Vec<f64> = (0..6).map(|i| i as f64 * 0.1).collect();
        values.extend((0..6).map(|i| 10.0 + i as f64 * 0.1));
        values.push(50.0);
        let params = ClusterParams {
            min_samples: 3,
            min_cluster_size: 3,
            ..Default::default()
        };
        let a = hdbscan(&line(&values), &params).unwrap();
        assert_eq!(a.cluster_count(), 2);
        assert_eq!(&a.labels()[..6], &[0; 6]);
        assert_eq!(&a.labels()[6..12], &[1; 6]);
        assert_eq!(a.labels()[12], -1);
    }

    #[test]
    fn duplicate_points_do_not_produce_nan() {
        let mut values = vec![0.0; 6];
        values.extend(vec![5.0; 6]);
        let params = ClusterParams {
            min_samples: 2,
            min_cluster_size: 3,
            ..Default::default()
        };
        let h = hdbscan_hierarchy(&line(&values), &params).unwrap();
        assert!(h.condensed.clusters.iter().all(|c| !c.stability.is_nan()));
        let a = hdbscan(&line(&values), &params).unwrap();
        assert_eq!(a.cluster_count(), 2);
    }

    #[test]
    fn condensed_tree_children_follow_parents() {
        let values: Vec<f64> = (0..30).map(|i| ((i * 7) % 11) as f64 + (i / 10) as f64 * 40.0).collect();
        let params = ClusterParams {
            min_samples: 2,
            min_cluster_size: 3,
            ..Default::default()
        };
        let h = hdbscan_hierarchy(&line(&values), &params).unwrap();
        for (id, c) in h.condensed.clusters.iter().enumerate() {
            for &child in &c.children {
                assert!(child > id);
                assert!(h.condensed.clusters[child].birth_lambda >= c.birth_lambda);
            }
        }
    }

    #[test]
    fn eom_prefers_stable_parent() {
        // root with one child that splits into two short-lived children
        let tree = CondensedTree {
            clusters: vec![
                CondensedCluster { parent: None, birth_lambda: 0.0, size: 10, children: vec![1, 2], stability: 0.0 },
                CondensedCluster { parent: Some(0), birth_lambda: 1.0, size: 6, children: vec![3, 4], stability: 10.0 },
                CondensedCluster { parent: Some(0), birth_lambda: 1.0, size: 4, children: vec![], stability: 2.0 },
                CondensedCluster { parent: Some(1), birth_lambda: 2.0, size: 3, children: vec![], stability: 1.0 },
                CondensedCluster { parent: Some(1), birth_lambda: 2.0, size: 3, children: vec![], stability: 1.5 },
            ],
            point_cluster: vec![],
            point_lambda: vec![],
        };
        assert_eq!(select_eom(&tree), vec![false, true, true, false, false]);
    }
}
