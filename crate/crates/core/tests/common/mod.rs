//! Independent brute-force oracles and data generators shared by the
//! integration tests and the acceptance harness.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, dims: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dims).map(|_| rng.random_range(0.0..10.0)).collect())
        .collect()
}

/// Labels in `-1..k`, where -1 is noise.
pub fn random_labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<i64> {
    let k = rng.random_range(1..=n.max(1)) as i64;
    (0..n).map(|_| rng.random_range(-1..k)).collect()
}

/// Truth ids with `None` as background.
pub fn random_truth(rng: &mut ChaCha8Rng, n: usize) -> Vec<Option<u32>> {
    let k = rng.random_range(1..=n.max(1)) as u32;
    (0..n)
        .map(|_| rng.random_bool(0.8).then(|| rng.random_range(0..k)))
        .collect()
}

/// Rand index by enumerating every pair. Noise and background never pair.
pub fn brute_rand(pred: &[i64], truth: &[Option<u32>]) -> f64 {
    let n = pred.len();
    let mut agree = 0u64;
    let mut total = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            let same_pred = pred[i] >= 0 && pred[i] == pred[j];
            let same_truth = truth[i].is_some() && truth[i] == truth[j];
            total += 1;
            if same_pred == same_truth {
                agree += 1;
            }
        }
    }
    agree as f64 / total as f64
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn brute_distances(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| points.iter().map(|q| euclid(p, q)).collect())
        .collect()
}

/// Distance to the `min_samples`-th nearest point, the point itself first.
pub fn brute_core(points: &[Vec<f64>], min_samples: usize) -> Vec<f64> {
    brute_distances(points)
        .into_iter()
        .map(|mut row| {
            row.sort_by(f64::total_cmp);
            row.get(min_samples - 1).copied().unwrap_or(f64::INFINITY)
        })
        .collect()
}

pub fn brute_mutual_reachability(points: &[Vec<f64>], min_samples: usize) -> Vec<Vec<f64>> {
    let d = brute_distances(points);
    let core = brute_core(points, min_samples);
    let n = points.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        d[i][j].max(core[i]).max(core[j])
                    }
                })
                .collect()
        })
        .collect()
}

/// Naive agglomerative single linkage. Returns the merge heights in order and
/// the cophenetic matrix.
pub fn brute_single_linkage(d: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = d.len();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut heights = Vec::new();
    let mut coph = vec![vec![0.0; n]; n];
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 1);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        if d[i][j] < best.0 {
                            best = (d[i][j], a, b);
                        }
                    }
                }
            }
        }
        let (h, a, b) = best;
        for &i in &clusters[a] {
            for &j in &clusters[b] {
                coph[i][j] = h;
                coph[j][i] = h;
            }
        }
        let merged = clusters.remove(b);
        clusters[a].extend(merged);
        heights.push(h);
    }
    (heights, coph)
}

pub fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// Core-point partition of DBSCAN(eps, min_samples): component id for each
/// core point, `None` for the rest.
pub fn brute_dbscan_cores(points: &[Vec<f64>], eps: f64, min_samples: usize) -> Vec<Option<usize>> {
    let d = brute_distances(points);
    let n = points.len();
    let is_core: Vec<bool> = (0..n)
        .map(|i| d[i].iter().filter(|&&x| x <= eps).count() >= min_samples)
        .collect();
    let mut comp = vec![None; n];
    let mut next = 0;
    for s in 0..n {
        if !is_core[s] || comp[s].is_some() {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = Some(next);
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if is_core[j] && comp[j].is_none() && d[i][j] <= eps {
                    comp[j] = Some(next);
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    comp
}

/// True when `labels` restricted to the `Some` positions of `groups` induces
/// the same partition, with none of those points labeled noise.
pub fn same_core_partition(groups: &[Option<usize>], labels: &[i32]) -> bool {
    let idx: Vec<usize> = (0..groups.len()).filter(|&i| groups[i].is_some()).collect();
    idx.iter().all(|&i| labels[i] >= 0)
        && idx.iter().all(|&i| {
            idx.iter()
                .all(|&j| (groups[i] == groups[j]) == (labels[i] == labels[j]))
        })
}

/// Three Gaussian blobs of 50 points with spread 0.05 at pairwise distance at least 1.
pub fn gaussian_blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<Option<u32>>) {
    let centers = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.87]];
    let mut rng = rng(seed);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (k, c) in centers.iter().enumerate() {
        for _ in 0..50 {
            points.push(vec![c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]);
            labels.push(Some(k as u32));
        }
    }
    (points, labels)
}

/// Grid shapes and seeds of the 20 ambiguity pages.
pub fn ambiguity_suite() -> Vec<(usize, usize, u64)> {
    let mut rng = rng(2024);
    (0..20)
        .map(|i| (rng.random_range(2..=6), rng.random_range(2..=6), 1000 + i))
        .collect()
}
