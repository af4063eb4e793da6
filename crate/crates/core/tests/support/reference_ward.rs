//! A second, independently written Ward routine for cross-checking.
//!
//! The reference keeps explicit member lists and recomputes every cluster
//! distance from the original pairwise distances,
//!
//! ```text
//! d(A, B)^2 = 2|A||B|/(|A|+|B|) * ( S(A,B)/(|A||B|) - S(A,A)/(2|A|^2) - S(B,B)/(2|B|^2) )
//! ```
//!
//! where `S(X,Y)` sums squared distances over member pairs. This is the
//! closed form that the Lance-Williams Ward update tracks incrementally.

#![allow(dead_code)]

use std::collections::BTreeSet;

use infosel_core::CorrelationMatrix;

pub fn reference_partition(labels: &[String], d: &[Vec<f64>], threshold: f64) -> BTreeSet<BTreeSet<String>> {
    let mut clusters: Vec<Vec<usize>> = (0..labels.len()).map(|i| vec![i]).collect();
    let s = |x: &[usize], y: &[usize]| -> f64 { x.iter().flat_map(|&i| y.iter().map(move |&j| d[i][j] * d[i][j])).sum() };
    loop {
        if clusters.len() < 2 {
            break;
        }
        let mut best = (0, 1, f64::INFINITY);
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let (x, y) = (&clusters[a], &clusters[b]);
                let (nx, ny) = (x.len() as f64, y.len() as f64);
                let sq = 2.0 * nx * ny / (nx + ny)
                    * (s(x, y) / (nx * ny) - s(x, x) / (2.0 * nx * nx) - s(y, y) / (2.0 * ny * ny));
                let dist = sq.max(0.0).sqrt();
                if dist < best.2 {
                    best = (a, b, dist);
                }
            }
        }
        if best.2 > threshold {
            break;
        }
        let merged = clusters.remove(best.1);
        clusters[best.0].extend(merged);
    }
    clusters
        .into_iter()
        .map(|c| c.into_iter().map(|i| labels[i].clone()).collect())
        .collect()
}

pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Correlations of random 6-dimensional vectors, so the matrix is a valid
/// correlation matrix with generic (tie-free) entries.
pub fn random_matrix(seed: u64, n: usize) -> CorrelationMatrix {
    let mut rng = Lcg(seed);
    let base: Vec<Vec<f64>> = (0..3).map(|_| (0..6).map(|_| rng.next()).collect()).collect();
    let vectors: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let b = &base[(rng.next() * 3.0) as usize];
            b.iter().map(|x| x + 0.4 * rng.next()).collect()
        })
        .collect();
    let labels: Vec<String> = (0..n).map(|i| format!("p{i:02}")).collect();
    let entries = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Some(if i == j { 1.0 } else { infosel_core::pearson(&vectors[i], &vectors[j]).unwrap() }))
                .collect()
        })
        .collect::<Vec<Vec<_>>>();
    // symmetrise exactly
    let entries = (0..n)
        .map(|i| (0..n).map(|j| if i <= j { entries[i][j] } else { entries[j][i] }).collect())
        .collect();
    CorrelationMatrix::from_entries(labels, entries).unwrap()
}

pub fn as_sets(clusters: &[Vec<String>]) -> BTreeSet<BTreeSet<String>> {
    clusters.iter().map(|c| c.iter().cloned().collect()).collect()
}

/// `1 - r` with a zero diagonal; every entry must be defined.
pub fn distances(m: &CorrelationMatrix) -> Vec<Vec<f64>> {
    m.entries()
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().enumerate().map(|(j, r)| if i == j { 0.0 } else { 1.0 - r.unwrap() }).collect())
        .collect()
}
