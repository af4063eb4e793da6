//! Agglomerative clustering of problems on the distance `1 - r` with Ward
//! linkage, and a flat partition obtained by cutting the tree at a threshold.
//!
//! Problems are processed in lexicographic order, and ties between equally
//! close cluster pairs go to the pair that comes first in that order, so the
//! result does not depend on the order of the input matrix.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::correlation::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::record::csv_io;

pub const DEFAULT_THRESHOLD: f64 = 0.8;

/// One merge. Node ids `0..n` are leaves; the merge at step `s` creates node `n + s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    /// Leaf labels, indexed by leaf node id.
    pub leaves: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Leaves in traversal order, left subtree first.
    pub fn leaf_order(&self) -> Vec<usize> {
        let n = self.leaves.len();
        if n == 0 {
            return Vec::new();
        }
        let Some(root) = self.merges.len().checked_sub(1).map(|s| n + s) else {
            return (0..n).collect();
        };
        let mut out = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            if node < n {
                out.push(node);
            } else {
                let m = &self.merges[node - n];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        out
    }

    /// Flat clusters (as leaf-id lists) after applying every merge with
    /// `distance <= threshold`.
    pub fn cut(&self, threshold: f64) -> Vec<Vec<usize>> {
        let n = self.leaves.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        // node id -> representative leaf
        let mut rep: Vec<usize> = (0..n).collect();
        for m in &self.merges {
            let (a, b) = (rep[m.left], rep[m.right]);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if m.distance <= threshold {
                parent[rb] = ra;
            }
            rep.push(a);
        }
        let order = self.leaf_order();
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        let mut roots: Vec<usize> = Vec::new();
        for leaf in order {
            let r = find(&mut parent, leaf);
            match roots.iter().position(|&x| x == r) {
                Some(i) => clusters[i].push(leaf),
                None => {
                    roots.push(r);
                    clusters.push(vec![leaf]);
                }
            }
        }
        clusters
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub threshold: f64,
    pub dendrogram: Dendrogram,
    /// Clusters in display order; problems within a cluster in leaf order.
    pub clusters: Vec<Vec<String>>,
    /// Problems without a correlation measure, left out of the clustering.
    pub excluded: Vec<String>,
}

impl Clustering {
    /// Clustered problems in leaf order followed by the excluded problems.
    pub fn display_order(&self) -> Vec<String> {
        self.clusters
            .iter()
            .flatten()
            .chain(&self.excluded)
            .cloned()
            .collect()
    }

    pub fn assignments(&self) -> Vec<(String, usize)> {
        self.clusters
            .iter()
            .enumerate()
            .flat_map(|(id, members)| members.iter().map(move |p| (p.clone(), id)))
            .collect()
    }

    /// `problem,cluster_id` for every clustered problem.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["problem", "cluster_id"]).map_err(csv_io)?;
        for (p, id) in self.assignments() {
            w.write_record([p, id.to_string()]).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Ward update for the distance between the merged cluster `a + b` and `x`.
#[inline]
fn ward(d_ax: f64, d_bx: f64, d_ab: f64, na: f64, nb: f64, nx: f64) -> f64 {
    let t = na + nb + nx;
    (((na + nx) * d_ax * d_ax + (nb + nx) * d_bx * d_bx - nx * d_ab * d_ab) / t)
        .max(0.0)
        .sqrt()
}

/// Ward-linkage agglomeration over a dense symmetric distance matrix.
pub fn ward_linkage(labels: Vec<String>, distances: &[Vec<f64>]) -> Result<Dendrogram> {
    let n = labels.len();
    let mut d: Vec<Vec<f64>> = distances.to_vec();
    let mut node: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if active[j] && best.is_none_or(|(_, _, b)| d[i][j] < b) {
                    best = Some((i, j, d[i][j]));
                }
            }
        }
        let (i, j, dist) = best.expect("at least two active clusters");
        if let Some(prev) = merges.last().map(|m: &Merge| m.distance) {
            if dist < prev - 1e-9 * prev.max(1.0) {
                return Err(Error::domain(format!(
                    "non-monotone linkage at step {step}: {dist} after {prev}"
                )));
            }
        }
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for k in 0..n {
            if active[k] && k != i && k != j {
                let v = ward(d[i][k], d[j][k], dist, ni, nj, size[k] as f64);
                d[i][k] = v;
                d[k][i] = v;
            }
        }
        merges.push(Merge {
            left: node[i],
            right: node[j],
            distance: dist,
            size: size[i] + size[j],
        });
        active[j] = false;
        size[i] += size[j];
        node[i] = n + step;
    }
    Ok(Dendrogram { leaves: labels, merges })
}

pub fn cluster(c: &CorrelationMatrix, threshold: f64) -> Result<Clustering> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::domain("cluster threshold must be a positive finite number"));
    }
    let mut defined: Vec<usize> = (0..c.len()).filter(|&i| c.is_defined(i)).collect();
    if defined.is_empty() {
        return Err(Error::domain("no problem has a correlation measure; nothing to cluster"));
    }
    defined.sort_by(|&a, &b| c.problems()[a].cmp(&c.problems()[b]));
    let mut excluded: Vec<String> = c.undefined_problems().into_iter().map(String::from).collect();
    excluded.sort();

    let labels: Vec<String> = defined.iter().map(|&i| c.problems()[i].clone()).collect();
    let distances = defined
        .iter()
        .map(|&i| {
            defined
                .iter()
                .map(|&j| {
                    c.get(i, j)
                        .map(|r| if i == j { 0.0 } else { 1.0 - r })
                        .ok_or_else(|| Error::domain("undefined correlation between defined problems"))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let dendrogram = ward_linkage(labels, &distances)?;
    let clusters = dendrogram
        .cut(threshold)
        .into_iter()
        .map(|members| members.into_iter().map(|l| dendrogram.leaves[l].clone()).collect())
        .collect();
    Ok(Clustering {
        threshold,
        dendrogram,
        clusters,
        excluded,
    })
}
