//! Classical relative validity indices for side-by-side comparison.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::dataset::{centroid_of, Partition, PointSet};
use crate::error::{Error, Result};
use crate::geometry::{dist, dist2};

/// An index value that may be unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndexValue {
    Finite(f64),
    Infinite,
}

impl IndexValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            IndexValue::Finite(v) => Some(v),
            IndexValue::Infinite => None,
        }
    }
}

impl fmt::Display for IndexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexValue::Finite(v) => write!(f, "{v}"),
            IndexValue::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for IndexValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            IndexValue::Finite(v) => s.serialize_f64(*v),
            IndexValue::Infinite => s.serialize_str("inf"),
        }
    }
}

fn require_clusters(partition: &Partition) -> Result<()> {
    match partition.k() {
        k if k < 2 => Err(Error::SingleCluster(k)),
        _ => Ok(()),
    }
}

/// Mean silhouette width; points alone in their cluster score 0.
pub fn silhouette_avg(points: &PointSet, partition: &Partition) -> Result<f64> {
    require_clusters(partition)?;
    let k = partition.k();
    let labels = partition.labels();
    let sizes = partition.sizes();
    let mut sums = vec![0.0; k];
    let mut total = 0.0;
    for i in 0..points.len() {
        sums.iter_mut().for_each(|s| *s = 0.0);
        let a_row = points.row(i);
        for (j, &lj) in labels.iter().enumerate() {
            if j != i {
                sums[lj] += dist(a_row, points.row(j));
            }
        }
        let own = labels[i];
        if sizes[own] == 1 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / points.len() as f64)
}

fn scatter(points: &PointSet, partition: &Partition, c: usize) -> f64 {
    let center = partition.center(c);
    let members = partition.members(c);
    members
        .iter()
        .map(|&i| dist(points.row(i), center))
        .sum::<f64>()
        / members.len() as f64
}

pub fn davies_bouldin(points: &PointSet, partition: &Partition) -> Result<f64> {
    require_clusters(partition)?;
    let k = partition.k();
    let s: Vec<f64> = (0..k).map(|c| scatter(points, partition, c)).collect();
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = 0.0f64;
        for j in 0..k {
            if i == j {
                continue;
            }
            let d = dist(partition.center(i), partition.center(j));
            if d == 0.0 {
                return Err(Error::CoincidentCenters(i.min(j), i.max(j)));
            }
            worst = worst.max((s[i] + s[j]) / d);
        }
        total += worst;
    }
    Ok(total / k as f64)
}

/// Between/within dispersion ratio; infinite when every cluster is a point mass.
pub fn calinski_harabasz(points: &PointSet, partition: &Partition) -> Result<IndexValue> {
    require_clusters(partition)?;
    let (m, k) = (points.len(), partition.k());
    if k >= m {
        return Err(Error::InvalidParameter(format!(
            "Calinski-Harabasz needs k < m (k = {k}, m = {m})"
        )));
    }
    let grand = centroid_of(points.rows(), points.dim())?;
    let mut between = 0.0;
    let mut within = 0.0;
    for c in 0..k {
        let center = partition.center(c);
        between += partition.members(c).len() as f64 * dist2(center, &grand);
        within += partition
            .members(c)
            .iter()
            .map(|&i| dist2(points.row(i), center))
            .sum::<f64>();
    }
    if within == 0.0 {
        return Ok(IndexValue::Infinite);
    }
    Ok(IndexValue::Finite(
        (between / (k - 1) as f64) / (within / (m - k) as f64),
    ))
}

/// Smallest between-cluster point distance over the largest cluster diameter.
pub fn dunn(points: &PointSet, partition: &Partition) -> Result<IndexValue> {
    require_clusters(partition)?;
    let labels = partition.labels();
    let mut min_between = f64::INFINITY;
    let mut max_diameter = 0.0f64;
    for i in 0..points.len() {
        let a = points.row(i);
        for j in i + 1..points.len() {
            let d = dist(a, points.row(j));
            if labels[i] == labels[j] {
                max_diameter = max_diameter.max(d);
            } else {
                min_between = min_between.min(d);
            }
        }
    }
    if max_diameter == 0.0 {
        return Ok(IndexValue::Infinite);
    }
    Ok(IndexValue::Finite(min_between / max_diameter))
}

/// Hard-membership Xie-Beni index.
pub fn xie_beni(points: &PointSet, partition: &Partition) -> Result<f64> {
    require_clusters(partition)?;
    let k = partition.k();
    let mut min_sep = f64::INFINITY;
    for i in 0..k {
        for j in i + 1..k {
            let d = dist2(partition.center(i), partition.center(j));
            if d == 0.0 {
                return Err(Error::CoincidentCenters(i, j));
            }
            min_sep = min_sep.min(d);
        }
    }
    let numerator: f64 = (0..k)
        .map(|c| {
            partition
                .members(c)
                .iter()
                .map(|&i| dist2(points.row(i), partition.center(c)))
                .sum::<f64>()
        })
        .sum();
    Ok(numerator / (points.len() as f64 * min_sep))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineReport {
    pub silhouette_avg: f64,
    pub davies_bouldin: f64,
    pub calinski_harabasz: IndexValue,
    pub dunn: IndexValue,
    pub xie_beni: f64,
}

pub fn baseline_report(points: &PointSet, partition: &Partition) -> Result<BaselineReport> {
    Ok(BaselineReport {
        silhouette_avg: silhouette_avg(points, partition)?,
        davies_bouldin: davies_bouldin(points, partition)?,
        calinski_harabasz: calinski_harabasz(points, partition)?,
        dunn: dunn(points, partition)?,
        xie_beni: xie_beni(points, partition)?,
    })
}
