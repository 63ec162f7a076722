//! OPTICS ordering with unbounded generating radius, plus xi and flat-cut
//! cluster extraction.

use std::io::Write;

use super::{core_distances_from, snap, ClusterAssignment, DistanceMatrix, NOISE};
use crate::error::ClusterError;

/// OPTICS processing order with per-position reachability.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachabilityPlot {
    /// Row indices in processing order.
    pub order: Vec<usize>,
    /// Reachability of `order[pos]` at position `pos`; infinite at the start
    /// of every connected run.
    pub reachability: Vec<f64>,
    /// Core distance per row index.
    pub core_distance: Vec<f64>,
    /// Point from which each row index was last reached.
    pub predecessor: Vec<Option<usize>>,
}

impl ReachabilityPlot {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Writes `position,point,reachability,core_distance`, infinity as `inf`.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["position", "point", "reachability", "core_distance"])?;
        for (pos, (&point, &reach)) in self.order.iter().zip(&self.reachability).enumerate() {
            out.write_record([
                pos.to_string(),
                point.to_string(),
                fmt_radius(reach),
                fmt_radius(self.core_distance[point]),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn fmt_radius(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        v.to_string()
    }
}

pub fn optics(points: &[Vec<f64>], min_samples: usize) -> Result<ReachabilityPlot, ClusterError> {
    if min_samples < 1 {
        return Err(ClusterError::InvalidParams("min_samples must be >= 1".into()));
    }
    Ok(optics_with_distances(
        &DistanceMatrix::euclidean(points)?,
        min_samples,
    ))
}

pub fn optics_with_distances(distances: &DistanceMatrix, min_samples: usize) -> ReachabilityPlot {
    let n = distances.len();
    let core = core_distances_from(distances, min_samples);
    let mut reach = vec![f64::INFINITY; n];
    let mut predecessor = vec![None; n];
    let mut processed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut plot = Vec::with_capacity(n);

    for start in 0..n {
        if processed[start] {
            continue;
        }
        let mut current = Some(start);
        while let Some(p) = current {
            processed[p] = true;
            order.push(p);
            plot.push(reach[p]);
            if core[p].is_finite() {
                let row = distances.row(p);
                for o in 0..n {
                    if processed[o] {
                        continue;
                    }
                    let r = core[p].max(row[o]);
                    if r < reach[o] {
                        reach[o] = r;
                        predecessor[o] = Some(p);
                    }
                }
            }
            // seed with the smallest reachability, ties to the smallest index
            current = (0..n)
                .filter(|&o| !processed[o] && reach[o].is_finite())
                .min_by(|&a, &b| reach[a].total_cmp(&reach[b]).then(a.cmp(&b)));
        }
    }

    ReachabilityPlot {
        order,
        reachability: plot,
        core_distance: core,
        predecessor,
    }
}

/// Flat cut at radius `eps`: a point whose reachability exceeds `eps` opens a
/// new cluster when its own core distance is within `eps`, and is noise
/// otherwise.
pub fn extract_eps_cut(plot: &ReachabilityPlot, eps: f64) -> ClusterAssignment {
    let mut labels = vec![NOISE as i64; plot.len()];
    let mut current = NOISE as i64;
    let mut next = 0i64;
    for (&point, &reach) in plot.order.iter().zip(&plot.reachability) {
        if reach > eps {
            if plot.core_distance[point] <= eps {
                current = next;
                next += 1;
                labels[point] = current;
            } else {
                current = NOISE as i64;
            }
        } else {
            labels[point] = current;
        }
    }
    ClusterAssignment::from_labels(&labels)
}

struct SteepDownArea {
    start: usize,
    end: usize,
    mib: f64,
}

/// Xi-steep cluster extraction. Clusters smaller than `min_samples` are
/// dropped; where clusters nest, each point keeps the innermost one.
pub fn extract_xi(plot: &ReachabilityPlot, xi: f64, min_samples: usize) -> ClusterAssignment {
    let n = plot.len();
    let predecessor_plot: Vec<Option<usize>> =
        plot.order.iter().map(|&p| plot.predecessor[p]).collect();
    let clusters = xi_clusters(
        &plot.reachability,
        &predecessor_plot,
        &plot.order,
        xi,
        min_samples,
    );

    let mut by_position = vec![NOISE as i64; n];
    let mut label = 0;
    for (start, end) in clusters {
        if by_position[start..=end].iter().all(|&l| l == NOISE as i64) {
            by_position[start..=end].fill(label);
            label += 1;
        }
    }
    let mut labels = vec![NOISE as i64; n];
    for (pos, &point) in plot.order.iter().enumerate() {
        labels[point] = by_position[pos];
    }
    ClusterAssignment::from_labels(&labels)
}

/// Candidate clusters as inclusive position ranges, innermost first for each
/// steep-up area.
fn xi_clusters(
    reachability: &[f64],
    predecessor_plot: &[Option<usize>],
    ordering: &[usize],
    xi: f64,
    min_cluster_size: usize,
) -> Vec<(usize, usize)> {
    let n = reachability.len();
    // trailing sentinel lets a cluster end at the last position
    let mut r = reachability.to_vec();
    r.push(f64::INFINITY);

    let xi_complement = 1.0 - xi;
    let up_threshold = snap(xi_complement);
    let down_threshold = snap(1.0 / xi_complement);
    let scaled = |v: f64| snap(v * xi_complement);

    let ratio: Vec<f64> = (0..n).map(|i| snap(r[i] / r[i + 1])).collect();
    let steep_up: Vec<bool> = ratio.iter().map(|&q| q <= up_threshold).collect();
    let steep_down: Vec<bool> = ratio.iter().map(|&q| q >= down_threshold).collect();
    let downward: Vec<bool> = ratio.iter().map(|&q| q > 1.0).collect();
    let upward: Vec<bool> = ratio.iter().map(|&q| q < 1.0).collect();

    let mut sdas: Vec<SteepDownArea> = Vec::new();
    let mut clusters = Vec::new();
    let mut index = 0;
    let mut mib = 0.0f64;

    for steep_index in (0..n).filter(|&i| steep_up[i] || steep_down[i]) {
        if steep_index < index {
            continue;
        }
        mib = r[index..=steep_index].iter().fold(mib, |m, &v| m.max(v));

        if steep_down[steep_index] {
            update_filter_sdas(&mut sdas, mib, &r, scaled);
            let start = steep_index;
            let end = extend_region(&steep_down, &upward, start, min_cluster_size);
            sdas.push(SteepDownArea {
                start,
                end,
                mib: 0.0,
            });
            index = end + 1;
            mib = r[index];
        } else {
            update_filter_sdas(&mut sdas, mib, &r, scaled);
            let up_start = steep_index;
            let up_end = extend_region(&steep_up, &downward, up_start, min_cluster_size);
            index = up_end + 1;
            mib = r[index];

            let mut found = Vec::new();
            for sda in &sdas {
                let mut c_start = sda.start;
                let mut c_end = up_end;

                if scaled(r[c_end + 1]) < sda.mib {
                    continue;
                }

                let d_max = r[sda.start];
                if scaled(d_max) >= r[c_end + 1] {
                    while r[c_start + 1] > r[c_end + 1] && c_start < sda.end {
                        c_start += 1;
                    }
                } else if scaled(r[c_end + 1]) >= d_max {
                    while c_end > up_start && r[c_end - 1] > d_max {
                        c_end -= 1;
                    }
                }

                let Some((s, e)) =
                    correct_predecessor(&r, predecessor_plot, ordering, c_start, c_end)
                else {
                    continue;
                };
                (c_start, c_end) = (s, e);

                if c_end + 1 - c_start < min_cluster_size {
                    continue;
                }
                if c_start > sda.end {
                    continue;
                }
                if c_end < up_start {
                    continue;
                }
                found.push((c_start, c_end));
            }
            found.reverse();
            clusters.extend(found);
        }
    }
    clusters
}

fn update_filter_sdas(
    sdas: &mut Vec<SteepDownArea>,
    mib: f64,
    r: &[f64],
    scaled: impl Fn(f64) -> f64,
) {
    if mib.is_infinite() {
        sdas.clear();
        return;
    }
    sdas.retain(|sda| mib <= scaled(r[sda.start]));
    for sda in sdas.iter_mut() {
        sda.mib = sda.mib.max(mib);
    }
}

/// Extends a steep area while it stays steep, tolerating at most
/// `min_samples` consecutive non-steep points that still move the same way.
fn extend_region(steep: &[bool], xward: &[bool], start: usize, min_samples: usize) -> usize {
    let mut non_xward = 0;
    let mut end = start;
    for index in start..steep.len() {
        if steep[index] {
            non_xward = 0;
            end = index;
        } else if !xward[index] {
            non_xward += 1;
            if non_xward > min_samples {
                break;
            }
        } else {
            return end;
        }
    }
    end
}

/// Shrinks the cluster end until the end point's predecessor lies inside
/// the cluster.
fn correct_predecessor(
    r: &[f64],
    predecessor_plot: &[Option<usize>],
    ordering: &[usize],
    start: usize,
    mut end: usize,
) -> Option<(usize, usize)> {
    while start < end {
        if r[start] > r[end] {
            return Some((start, end));
        }
        if let Some(p) = predecessor_plot[end] {
            if ordering[start..end].contains(&p) {
                return Some((start, end));
            }
        }
        end -= 1;
    }
    None
}
