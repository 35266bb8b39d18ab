//! Partitions for a range of cluster counts.
//!
//! Incremental k-means: the best `k`-center solution seeds the `k + 1`
//! search by inserting one extra center with k-means++ sampling, and
//! independent k-means++ restarts compete with the warm starts. The lowest
//! within-cluster sum of squares wins at every `k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{centroid_of, Partition, PointSet};
use crate::error::{Error, Result};
use crate::geometry::dist2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Stop when the relative objective improvement falls below this.
    pub tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            k_min: 2,
            k_max: 10,
            restarts: 10,
            seed: 0,
            max_iters: 300,
            tol: 1e-6,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self, m: usize) -> Result<()> {
        if self.k_min < 2 || self.k_min > self.k_max {
            return Err(Error::InvalidParameter(format!(
                "need 2 <= k_min <= k_max, got k_min = {}, k_max = {}",
                self.k_min, self.k_max
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be at least 1".into()));
        }
        if m <= self.k_max {
            return Err(Error::TooFewPoints { m, k_max: self.k_max });
        }
        Ok(())
    }
}

/// Labels each point by its nearest center; ties go to the smaller index.
pub fn assign_voronoi(points: &PointSet, centers: &[Vec<f64>]) -> Result<Vec<usize>> {
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            if centers[i] == centers[j] {
                return Err(Error::CoincidentCenters(i, j));
            }
        }
    }
    if centers.is_empty() {
        return Err(Error::EmptyInput("no centers".into()));
    }
    Ok(points.rows().map(|row| nearest(row, centers).0).collect())
}

fn nearest(row: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = dist2(row, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Result of one Lloyd run.
#[derive(Debug, Clone)]
pub struct KmeansFit {
    pub labels: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub wcss: f64,
}

fn update_centers(points: &PointSet, labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let n = points.dim();
    let mut sums = vec![vec![0.0; n]; k];
    let mut counts = vec![0usize; k];
    for (row, &l) in points.rows().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(row) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|v| *v /= c as f64);
        }
    }
    sums
}

fn wcss(points: &PointSet, labels: &[usize], centers: &[Vec<f64>]) -> f64 {
    points
        .rows()
        .zip(labels)
        .map(|(row, &l)| dist2(row, &centers[l]))
        .sum()
}

/// Gives every empty cluster the point farthest from its own center,
/// taken from a cluster that keeps at least one other point.
fn repair_empty(points: &PointSet, labels: &mut [usize], centers: &mut [Vec<f64>]) {
    let k = centers.len();
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        let mut far = None;
        let mut far_d = -1.0;
        for (i, row) in points.rows().enumerate() {
            let l = labels[i];
            if counts[l] < 2 {
                continue;
            }
            let d = dist2(row, &centers[l]);
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        let Some(i) = far else { break };
        counts[labels[i]] -= 1;
        labels[i] = empty;
        counts[empty] = 1;
        centers[empty] = points.row(i).to_vec();
    }
}

/// Lloyd iterations from the given centers.
pub fn lloyd(points: &PointSet, init: Vec<Vec<f64>>, max_iters: usize, tol: f64) -> KmeansFit {
    let k = init.len();
    let mut centers = init;
    let mut labels: Vec<usize> = points.rows().map(|r| nearest(r, &centers).0).collect();
    repair_empty(points, &mut labels, &mut centers);
    centers = update_centers(points, &labels, k);
    let mut objective = wcss(points, &labels, &centers);
    for _ in 0..max_iters {
        let mut next: Vec<usize> = points.rows().map(|r| nearest(r, &centers).0).collect();
        let mut trial = centers.clone();
        repair_empty(points, &mut next, &mut trial);
        if next == labels {
            break;
        }
        let next_centers = update_centers(points, &next, k);
        let next_objective = wcss(points, &next, &next_centers);
        let improvement = objective - next_objective;
        labels = next;
        centers = next_centers;
        let previous = objective;
        objective = next_objective;
        if improvement <= tol * previous {
            break;
        }
    }
    KmeansFit {
        labels,
        centers,
        wcss: objective,
    }
}

/// Samples a point with probability proportional to its squared distance to the nearest center.
fn sample_d2(points: &PointSet, centers: &[Vec<f64>], rng: &mut impl Rng) -> Option<Vec<f64>> {
    let weights: Vec<f64> = points.rows().map(|r| nearest(r, centers).1).collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut target = rng.random_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if target < *w {
            return Some(points.row(i).to_vec());
        }
        target -= w;
    }
    weights
        .iter()
        .rposition(|&w| w > 0.0)
        .map(|i| points.row(i).to_vec())
}

pub fn kmeans_pp_init(points: &PointSet, k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let first = rng.random_range(0..points.len());
    let mut centers = vec![points.row(first).to_vec()];
    while centers.len() < k {
        match sample_d2(points, &centers, rng) {
            Some(c) => centers.push(c),
            // fewer distinct points than k; repair in Lloyd handles the rest
            None => centers.push(points.row(rng.random_range(0..points.len())).to_vec()),
        }
    }
    centers
}

fn candidate_rng(seed: u64, k: usize, candidate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((k as u64) << 32) | candidate as u64);
    rng
}

#[derive(Debug, Clone)]
pub struct SweepFit {
    pub k: usize,
    pub partition: Partition,
    pub wcss: f64,
}

/// Partitions for every `k` in `k_min..=k_max`, deterministic for a fixed seed.
pub fn incremental_kmeans_sweep(points: &PointSet, config: &SweepConfig) -> Result<Vec<SweepFit>> {
    config.validate(points.len())?;
    let all: Vec<usize> = (0..points.len()).collect();
    let mut best = KmeansFit {
        labels: vec![0; points.len()],
        centers: vec![centroid_of(all.iter().map(|&i| points.row(i)), points.dim())?],
        wcss: 0.0,
    };
    best.wcss = wcss(points, &best.labels, &best.centers);

    let mut out = Vec::with_capacity(config.k_max - config.k_min + 1);
    for k in 2..=config.k_max {
        let in_range = k >= config.k_min;
        let warm = config.restarts;
        let fresh = if in_range { config.restarts } else { 0 };
        let previous = &best;
        let fits: Vec<KmeansFit> = (0..warm + fresh)
            .into_par_iter()
            .map(|c| {
                let mut rng = candidate_rng(config.seed, k, c);
                let init = if c < warm {
                    let mut centers = previous.centers.clone();
                    let extra = sample_d2(points, &centers, &mut rng)
                        .unwrap_or_else(|| points.row(rng.random_range(0..points.len())).to_vec());
                    centers.push(extra);
                    centers
                } else {
                    kmeans_pp_init(points, k, &mut rng)
                };
                lloyd(points, init, config.max_iters, config.tol)
            })
            .collect();
        // first minimum wins so the choice does not depend on scheduling
        let winner = fits
            .into_iter()
            .reduce(|a, b| if b.wcss < a.wcss { b } else { a })
            .expect("at least one candidate");
        best = winner;
        if in_range {
            out.push(SweepFit {
                k,
                partition: Partition::new(points, best.labels.clone())?,
                wcss: best.wcss,
            });
        }
    }
    Ok(out)
}
