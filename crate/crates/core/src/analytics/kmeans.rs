// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded k-means over (IL, EL, GL) load points.
//!
//! Initialization is farthest-first from a seeded random start; Lloyd
//! iterations stop once the relative inertia change drops below
//! [`KMEANS_TOL`] or after [`KMEANS_MAX_ITER`] rounds. An empty cluster is
//! re-seeded at the point farthest from its assigned centroid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::composition::LoadPoint;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const KMEANS_TOL: f64 = 1e-6;
pub const KMEANS_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ClusterModel<S> {
    pub k: usize,
    pub centroids: Vec<[S; 3]>,
    pub assignments: Vec<usize>,
    pub seed: u64,
    /// Inertia after each assignment pass.
    pub inertia: Vec<S>,
}

fn dist2<S: Scalar>(a: &[S; 3], b: &[S; 3]) -> S {
    (0..3).map(|i| (a[i] - b[i]) * (a[i] - b[i])).sum()
}

fn nearest<S: Scalar>(p: &[S; 3], centroids: &[[S; 3]]) -> (usize, S) {
    let mut best = (0, dist2(p, &centroids[0]));
    for (c, centroid) in centroids.iter().enumerate().skip(1) {
        let d = dist2(p, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn farthest_first<S: Scalar>(data: &[[S; 3]], k: usize, seed: u64) -> Vec<[S; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = vec![data[rng.random_range(0..data.len())]];
    let mut closest: Vec<S> = data.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let mut pick = 0;
        for (i, d) in closest.iter().enumerate() {
            if *d > closest[pick] {
                pick = i;
            }
        }
        let c = data[pick];
        for (d, p) in closest.iter_mut().zip(data) {
            *d = d.min(dist2(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

pub fn cluster_strategies<S: Scalar>(
    points: &[LoadPoint<S>],
    k: usize,
    seed: u64,
) -> Result<ClusterModel<S>> {
    if k == 0 || points.len() < k {
        return Err(Error::TooFewPoints {
            needed: k.max(1),
            got: points.len(),
        });
    }
    let data: Vec<[S; 3]> = points.iter().map(|p| p.loads()).collect();
    let mut centroids = farthest_first(&data, k, seed);
    let mut assignments = vec![0usize; data.len()];
    let mut history: Vec<S> = Vec::new();
    let tol = S::of(KMEANS_TOL);

    for _ in 0..KMEANS_MAX_ITER {
        let mut inertia = S::zero();
        let mut own_dist = vec![S::zero(); data.len()];
        for (i, p) in data.iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            assignments[i] = c;
            own_dist[i] = d;
            inertia += d;
        }
        let converged = history.last().is_some_and(|&prev: &S| {
            let change = (prev - inertia).abs();
            change <= tol * prev.max(S::min_positive_value())
        });
        history.push(inertia);
        if converged {
            break;
        }

        let mut sums = vec![[S::zero(); 3]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in data.iter().zip(&assignments) {
            counts[c] += 1;
            for j in 0..3 {
                sums[c][j] += p[j];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let n = S::of_usize(counts[c]);
                centroids[c] = sums[c].map(|s| s / n);
            } else {
                let mut far = 0;
                for (i, d) in own_dist.iter().enumerate() {
                    if *d > own_dist[far] {
                        far = i;
                    }
                }
                centroids[c] = data[far];
                own_dist[far] = S::zero();
            }
        }
    }

    Ok(ClusterModel {
        k,
        centroids,
        assignments,
        seed,
        inertia: history,
    })
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Best agreement between predicted and true labels over all relabelings of
/// the predictions (exhaustive; intended for small `k`).
pub fn best_permutation_agreement(predicted: &[usize], truth: &[usize], k: usize) -> f64 {
    assert_eq!(predicted.len(), truth.len());
    if predicted.is_empty() {
        return 1.0;
    }
    permutations(k)
        .iter()
        .map(|perm| {
            predicted
                .iter()
                .zip(truth)
                .filter(|(p, t)| perm.get(**p) == Some(*t))
                .count()
        })
        .max()
        .unwrap_or(0) as f64
        / predicted.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn pt(t: usize, l: [f64; 3]) -> LoadPoint<f64> {
        LoadPoint {
            step: t,
            raw: Default::default(),
            normalized: Default::default(),
            il: l[0],
            el: l[1],
            gl: l[2],
            cli: (l[0] + l[1] + l[2]) / 3.0,
        }
    }

    #[test]
    fn one_cluster_is_the_mean() {
        let pts: Vec<_> = (0..10)
            .map(|t| pt(t, [t as f64 / 10.0, 0.5, 1.0 - t as f64 / 20.0]))
            .collect();
        let m = cluster_strategies(&pts, 1, 3).unwrap();
        let mean: [f64; 3] =
            std::array::from_fn(|j| pts.iter().map(|p| p.loads()[j]).sum::<f64>() / 10.0);
        for (c, m) in m.centroids[0].iter().zip(mean) {
            assert!((c - m).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_points_repair_to_cluster_zero() {
        let pts: Vec<_> = (0..6).map(|t| pt(t, [0.3, 0.3, 0.3])).collect();
        let m = cluster_strategies(&pts, 2, 11).unwrap();
        assert!(m.assignments.iter().all(|a| *a == 0));
        assert!(m.centroids.iter().all(|c| c.iter().all(|v| v.is_finite())));
    }

    #[test]
    fn too_few_points() {
        let pts = vec![pt(0, [0.1, 0.2, 0.3])];
        assert!(matches!(
            cluster_strategies(&pts, 2, 0),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(cluster_strategies(&pts, 0, 0).is_err());
    }

    #[test]
    fn separated_blobs_are_recovered() {
        let centers = [[0.1, 0.1, 0.9], [0.5, 0.9, 0.1], [0.5, 0.5, 0.5]];
        let noise = Normal::new(0.0, 0.03).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut pts = Vec::new();
        let mut truth = Vec::new();
        for t in 0..300 {
            let c = t % 3;
            pts.push(pt(t, centers[c].map(|v| v + noise.sample(&mut rng))));
            truth.push(c);
        }
        let m = cluster_strategies(&pts, 3, 5).unwrap();
        assert!(best_permutation_agreement(&m.assignments, &truth, 3) >= 0.99);
        assert!(m.inertia.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert_eq!(m, cluster_strategies(&pts, 3, 5).unwrap());
    }

    #[test]
    fn permutation_agreement_oracle() {
        assert_eq!(
            best_permutation_agreement(&[1, 1, 0, 2], &[0, 0, 1, 2], 3),
            1.0
        );
        assert_eq!(
            best_permutation_agreement(&[0, 0, 0, 0], &[0, 1, 0, 1], 2),
            0.5
        );
        assert_eq!(permutations(3).len(), 6);
    }
}
