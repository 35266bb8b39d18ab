//! Margins between clusters and separability of a cluster distribution.
//!
//! For a pair of clusters, each side keeps the points that are no farther
//! from the other center than the two centers are from each other (its
//! adjacent set). The margin is the center distance minus the largest
//! own-center distance on each adjacent set; a positive margin means the
//! pair is separable. Only neighboring clusters, those not occluded by a
//! third cluster in the same direction, enter the partition-level ratios.

use serde::Serialize;

use crate::compactness::{build_ladder, FilterMode};
use crate::dataset::{Partition, PointSet};
use crate::error::{Error, Result};
use crate::geometry::{cosine_at, dist};

#[allow(clippy::approx_constant)]
pub const DEFAULT_MU: f64 = 0.7071;

/// Points of cluster `i` adjacent to cluster `j`, and vice versa.
///
/// `Z_ij = { a in A_i : d(x_j, a) <= d(x_i, x_j) }`; ties are included.
pub fn adjacent_sets(
    points: &PointSet,
    members_i: &[usize],
    members_j: &[usize],
    center_i: &[f64],
    center_j: &[f64],
) -> Result<(Vec<usize>, Vec<usize>)> {
    let d_ij = dist(center_i, center_j);
    if d_ij == 0.0 {
        return Err(Error::CoincidentCenters(0, 1));
    }
    let near = |members: &[usize], other: &[f64]| -> Vec<usize> {
        members
            .iter()
            .copied()
            .filter(|&a| dist(points.row(a), other) <= d_ij)
            .collect()
    };
    Ok((near(members_i, center_j), near(members_j, center_i)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairMargin {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
    /// Largest distance from `x_i` over `Z_ij` (0 when empty).
    pub delta_ij: f64,
    pub delta_ji: f64,
    pub beta: f64,
    pub beta_scaled: f64,
    pub adjacent_i: Vec<usize>,
    pub adjacent_j: Vec<usize>,
}

/// Margin between two point subsets with given centers.
pub fn pair_margin_sets(
    points: &PointSet,
    (i, members_i, center_i): (usize, &[usize], &[f64]),
    (j, members_j, center_j): (usize, &[usize], &[f64]),
) -> Result<PairMargin> {
    let (z_ij, z_ji) = adjacent_sets(points, members_i, members_j, center_i, center_j)
        .map_err(|_| Error::CoincidentCenters(i, j))?;
    let reach = |set: &[usize], center: &[f64]| {
        set.iter()
            .map(|&a| dist(points.row(a), center))
            .fold(0.0, f64::max)
    };
    let distance = dist(center_i, center_j);
    let delta_ij = reach(&z_ij, center_i);
    let delta_ji = reach(&z_ji, center_j);
    let beta = distance - delta_ij - delta_ji;
    Ok(PairMargin {
        i,
        j,
        distance,
        delta_ij,
        delta_ji,
        beta,
        beta_scaled: beta / distance,
        adjacent_i: z_ij,
        adjacent_j: z_ji,
    })
}

/// Members of every cluster that survive `filter`; centers stay the full-cluster centroids.
pub fn filtered_members(
    points: &PointSet,
    partition: &Partition,
    filter: FilterMode,
) -> Result<Vec<Vec<usize>>> {
    (0..partition.k())
        .map(|c| {
            if filter == FilterMode::Full {
                return Ok(partition.members(c).to_vec());
            }
            let ladder = build_ladder(points, partition.members(c), partition.center(c), filter)?;
            let mut kept = ladder.members().to_vec();
            kept.sort_unstable();
            Ok(kept)
        })
        .collect()
}

/// Margin between clusters `i` and `j` of a partition.
pub fn pair_margin(
    points: &PointSet,
    partition: &Partition,
    i: usize,
    j: usize,
    filter: FilterMode,
) -> Result<PairMargin> {
    let keep = |c: usize| -> Result<Vec<usize>> {
        if filter == FilterMode::Full {
            return Ok(partition.members(c).to_vec());
        }
        let ladder = build_ladder(points, partition.members(c), partition.center(c), filter)?;
        Ok(ladder.members().to_vec())
    };
    let (a_i, a_j) = (keep(i)?, keep(j)?);
    pair_margin_sets(
        points,
        (i, &a_i, partition.center(i)),
        (j, &a_j, partition.center(j)),
    )
}

/// Symmetric `k x k` margins with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginMatrix {
    pub filter: FilterMode,
    pub beta: Vec<Vec<f64>>,
    pub beta_scaled: Vec<Vec<f64>>,
    pub distance: Vec<Vec<f64>>,
    /// `delta[i][j]` is the reach of cluster `i`'s adjacent set toward `j`.
    pub delta: Vec<Vec<f64>>,
}

impl MarginMatrix {
    pub fn k(&self) -> usize {
        self.beta.len()
    }

    /// CSV with a header row of cluster ids.
    pub fn to_csv(&self, scaled: bool) -> String {
        let values = if scaled { &self.beta_scaled } else { &self.beta };
        let k = self.k();
        let mut out = String::from("cluster");
        for j in 0..k {
            out.push_str(&format!(",{j}"));
        }
        out.push('\n');
        for (i, row) in values.iter().enumerate() {
            out.push_str(&i.to_string());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn margin_matrix(
    points: &PointSet,
    partition: &Partition,
    filter: FilterMode,
) -> Result<MarginMatrix> {
    let k = partition.k();
    if k < 2 {
        return Err(Error::SingleCluster(k));
    }
    let kept = filtered_members(points, partition, filter)?;
    let mut beta = vec![vec![0.0; k]; k];
    let mut beta_scaled = vec![vec![0.0; k]; k];
    let mut distance = vec![vec![0.0; k]; k];
    let mut delta = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let pm = pair_margin_sets(
                points,
                (i, &kept[i], partition.center(i)),
                (j, &kept[j], partition.center(j)),
            )?;
            beta[i][j] = pm.beta;
            beta[j][i] = pm.beta;
            beta_scaled[i][j] = pm.beta_scaled;
            beta_scaled[j][i] = pm.beta_scaled;
            distance[i][j] = pm.distance;
            distance[j][i] = pm.distance;
            delta[i][j] = pm.delta_ij;
            delta[j][i] = pm.delta_ji;
        }
    }
    Ok(MarginMatrix {
        filter,
        beta,
        beta_scaled,
        distance,
        delta,
    })
}

/// For every point, the clusters whose adjacent set (toward them) contains it.
pub fn adjacency_flags(
    points: &PointSet,
    partition: &Partition,
    filter: FilterMode,
) -> Result<Vec<Vec<usize>>> {
    let k = partition.k();
    let kept = filtered_members(points, partition, filter)?;
    let mut flags = vec![Vec::new(); points.len()];
    for (i, members) in kept.iter().enumerate() {
        for j in 0..k {
            if i == j {
                continue;
            }
            let d_ij = dist(partition.center(i), partition.center(j));
            if d_ij == 0.0 {
                return Err(Error::CoincidentCenters(i, j));
            }
            for &a in members {
                if dist(points.row(a), partition.center(j)) <= d_ij {
                    flags[a].push(j);
                }
            }
        }
    }
    Ok(flags)
}

/// Directed neighbor relation between cluster centers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborGraph {
    pub mu: f64,
    /// `neighbors[i]` lists `j` in ascending order.
    pub neighbors: Vec<Vec<usize>>,
    pub n_total: usize,
}

/// `j` is a neighbor of `i` unless some third center `q` lies within the `mu`
/// cosine cone of `x_j - x_i` (angle measured at `x_i`) without being farther
/// from `x_i` than `x_j` is.
pub fn neighbor_graph(centers: &[Vec<f64>], mu: f64) -> Result<NeighborGraph> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidParameter(format!("mu must lie in (0, 1], got {mu}")));
    }
    let k = centers.len();
    if k < 2 {
        return Err(Error::SingleCluster(k));
    }
    let mut w = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let d = dist(&centers[i], &centers[j]);
            if d == 0.0 {
                return Err(Error::CoincidentCenters(i, j));
            }
            w[i][j] = d;
            w[j][i] = d;
        }
    }
    let mut neighbors = vec![Vec::new(); k];
    for i in 0..k {
        for j in 0..k {
            if j == i {
                continue;
            }
            let occluded = (0..k).filter(|&q| q != i && q != j).any(|q| {
                let lambda = cosine_at(&centers[i], &centers[j], &centers[q])
                    .expect("centers are pairwise distinct");
                lambda >= mu && w[i][q] <= w[i][j]
            });
            if !occluded {
                neighbors[i].push(j);
            }
        }
    }
    let n_total = neighbors.iter().map(Vec::len).sum();
    Ok(NeighborGraph {
        mu,
        neighbors,
        n_total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparabilityReport {
    pub k: usize,
    pub n_total: usize,
    pub n_separated: usize,
    /// Neighbors with a strictly positive margin, per cluster.
    pub separated: Vec<Vec<usize>>,
    pub ratio: f64,
    /// Smallest positive neighbor margin of each cluster, 0 when it has none.
    pub cluster_margins: Vec<f64>,
    pub distribution_margin: f64,
    /// Mean margin over all directed neighbor relations.
    pub total_margin_raw: f64,
    /// Same mean over scaled margins.
    pub total_margin_scaled: f64,
}

pub fn separability_report(
    margins: &MarginMatrix,
    graph: &NeighborGraph,
) -> Result<SeparabilityReport> {
    let k = margins.k();
    if graph.neighbors.len() != k {
        return Err(Error::LengthMismatch(format!(
            "neighbor graph has {} clusters, margin matrix has {k}",
            graph.neighbors.len()
        )));
    }
    if graph.n_total == 0 {
        return Err(Error::NoNeighbors(k));
    }
    let mut separated = vec![Vec::new(); k];
    let mut cluster_margins = vec![0.0; k];
    let mut raw_sum = 0.0;
    let mut scaled_sum = 0.0;
    for i in 0..k {
        let mut smallest = f64::INFINITY;
        for &j in &graph.neighbors[i] {
            let b = margins.beta[i][j];
            raw_sum += b;
            scaled_sum += margins.beta_scaled[i][j];
            if b > 0.0 {
                separated[i].push(j);
                smallest = smallest.min(b);
            }
        }
        if smallest.is_finite() {
            cluster_margins[i] = smallest;
        }
    }
    let n_separated: usize = separated.iter().map(Vec::len).sum();
    let n = graph.n_total as f64;
    Ok(SeparabilityReport {
        k,
        n_total: graph.n_total,
        n_separated,
        separated,
        ratio: n_separated as f64 / n,
        distribution_margin: cluster_margins.iter().sum::<f64>() / k as f64,
        cluster_margins,
        total_margin_raw: raw_sum / n,
        total_margin_scaled: scaled_sum / n,
    })
}

/// Everything the separability side computes for one partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparabilityAnalysis {
    pub margins: MarginMatrix,
    pub graph: NeighborGraph,
    pub report: SeparabilityReport,
}

pub fn analyze_separability(
    points: &PointSet,
    partition: &Partition,
    filter: FilterMode,
    mu: f64,
) -> Result<SeparabilityAnalysis> {
    let margins = margin_matrix(points, partition, filter)?;
    let graph = neighbor_graph(partition.centers(), mu)?;
    let report = separability_report(&margins, &graph)?;
    Ok(SeparabilityAnalysis {
        margins,
        graph,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[[f64; 2]]) -> PointSet {
        PointSet::from_rows(rows).unwrap()
    }

    fn line(values: &[f64]) -> PointSet {
        PointSet::from_flat(values.to_vec(), 1).unwrap()
    }

    #[test]
    fn adjacent_set_examples() {
        let p = pts(&[[0.0, 0.0], [1.0, 0.0], [4.0, 0.0], [5.0, 0.0]]);
        let (z12, z21) = adjacent_sets(&p, &[0, 1], &[2, 3], &[0.5, 0.0], &[4.5, 0.0]).unwrap();
        assert_eq!((z12, z21), (vec![1], vec![2]));

        let q = line(&[0.0, 3.0, 2.0, 5.0]);
        let (z12, z21) = adjacent_sets(&q, &[0, 1], &[2, 3], &[1.5], &[3.5]).unwrap();
        assert_eq!((z12, z21), (vec![1], vec![2]));

        let s = line(&[0.0, 7.0]);
        let (z12, z21) = adjacent_sets(&s, &[0], &[1], &[0.0], &[7.0]).unwrap();
        assert_eq!((z12, z21), (vec![0], vec![1]));

        assert!(matches!(
            adjacent_sets(&s, &[0], &[1], &[1.0], &[1.0]),
            Err(Error::CoincidentCenters(..))
        ));
    }

    #[test]
    fn pair_margin_examples() {
        let p = pts(&[[0.0, 0.0], [1.0, 0.0], [4.0, 0.0], [5.0, 0.0]]);
        let part = Partition::new(&p, vec![0, 0, 1, 1]).unwrap();
        let m = pair_margin(&p, &part, 0, 1, FilterMode::Full).unwrap();
        assert_eq!((m.delta_ij, m.delta_ji, m.beta, m.beta_scaled), (0.5, 0.5, 3.0, 0.75));

        let s = line(&[0.0, 7.0]);
        let part = Partition::new(&s, vec![0, 1]).unwrap();
        let m = pair_margin(&s, &part, 0, 1, FilterMode::Full).unwrap();
        assert_eq!((m.beta, m.beta_scaled), (7.0, 1.0));

        let q = line(&[0.0, 3.0, 2.0, 5.0]);
        let part = Partition::new(&q, vec![0, 0, 1, 1]).unwrap();
        let m = pair_margin(&q, &part, 0, 1, FilterMode::Full).unwrap();
        assert_eq!((m.delta_ij, m.delta_ji, m.beta, m.beta_scaled), (1.5, 1.5, -1.0, -0.5));
    }

    #[test]
    fn collinear_singletons() {
        let p = line(&[0.0, 1.0, 3.0]);
        let part = Partition::new(&p, vec![0, 1, 2]).unwrap();
        let mm = margin_matrix(&p, &part, FilterMode::Full).unwrap();
        assert_eq!(mm.beta[0][1], 1.0);
        assert_eq!(mm.beta[1][2], 2.0);
        assert_eq!(mm.beta[0][2], 3.0);
        assert_eq!(mm.beta, transpose(&mm.beta));

        let g = neighbor_graph(part.centers(), DEFAULT_MU).unwrap();
        assert_eq!(g.neighbors, vec![vec![1], vec![0, 2], vec![1]]);
        let r = separability_report(&mm, &g).unwrap();
        assert_eq!(r.total_margin_raw, 1.5);
        assert_eq!(r.total_margin_scaled, 1.0);
        assert_eq!(r.ratio, 1.0);
        assert_eq!(r.cluster_margins, vec![1.0, 1.0, 2.0]);
    }

    fn transpose(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
        (0..m.len())
            .map(|j| (0..m.len()).map(|i| m[i][j]).collect())
            .collect()
    }

    #[test]
    fn two_clusters_matrix_shape() {
        let q = line(&[0.0, 3.0, 2.0, 5.0]);
        let part = Partition::new(&q, vec![0, 0, 1, 1]).unwrap();
        let mm = margin_matrix(&q, &part, FilterMode::Full).unwrap();
        assert_eq!(mm.beta, vec![vec![0.0, -1.0], vec![-1.0, 0.0]]);
        let g = neighbor_graph(part.centers(), DEFAULT_MU).unwrap();
        assert_eq!(g.n_total, 2);
        let r = separability_report(&mm, &g).unwrap();
        assert_eq!(r.ratio, 0.0);
        assert_eq!(r.cluster_margins, vec![0.0, 0.0]);
        assert!(matches!(
            margin_matrix(&q, &Partition::new(&q, vec![0; 4]).unwrap(), FilterMode::Full),
            Err(Error::SingleCluster(1))
        ));
    }

    #[test]
    fn neighbor_examples() {
        let centers = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![4.0, 0.0]];
        let g = neighbor_graph(&centers, DEFAULT_MU).unwrap();
        assert_eq!(g.neighbors, vec![vec![1], vec![0, 2], vec![1]]);
        assert_eq!(g.n_total, 4);

        let tri = vec![vec![0.0, 0.0], vec![3.0, 0.1], vec![1.0, 2.0], vec![-2.0, 1.0]];
        let g = neighbor_graph(&tri, 1.0).unwrap();
        assert_eq!(g.n_total, 12);

        assert!(matches!(
            neighbor_graph(&[vec![0.0], vec![0.0]], 0.5),
            Err(Error::CoincidentCenters(0, 1))
        ));
    }

    #[test]
    fn margin_csv() {
        let p = line(&[0.0, 1.0, 3.0]);
        let part = Partition::new(&p, vec![0, 1, 2]).unwrap();
        let mm = margin_matrix(&p, &part, FilterMode::Full).unwrap();
        assert_eq!(mm.to_csv(false), "cluster,0,1,2\n0,0,1,3\n1,1,0,2\n2,3,2,0\n");
    }

    #[test]
    fn adjacency_flags_mark_boundary_points() {
        let p = pts(&[[0.0, 0.0], [1.0, 0.0], [4.0, 0.0], [5.0, 0.0]]);
        let part = Partition::new(&p, vec![0, 0, 1, 1]).unwrap();
        let f = adjacency_flags(&p, &part, FilterMode::Full).unwrap();
        assert_eq!(f, vec![vec![], vec![1], vec![0], vec![]]);
    }
}
