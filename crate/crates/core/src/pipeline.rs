//! Per-partition analysis and k-sweeps that tie the indices together.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::baselines::{baseline_report, BaselineReport};
use crate::clustering::{incremental_kmeans_sweep, SweepConfig};
use crate::compactness::{
    partition_compactness, CompactnessConfig, CompactnessReport, DirectionSet, EpsilonMode,
    FilterMode, DEFAULT_ETA,
};
use crate::dataset::{Partition, PointSet};
use crate::error::{Error, Result};
use crate::selection::{build_decision_points, select_k, Coordinate, DecisionPoint, Selection, SweepEntry};
use crate::separability::{
    analyze_separability, margin_matrix, MarginMatrix, SeparabilityAnalysis, DEFAULT_MU,
};

/// Label attached to every report so index values are attributed to the clusterer that produced them.
pub const CLUSTERER: &str = "incremental k-means (k-means++ insertion warm starts plus independent k-means++ restarts)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexParams {
    pub epsilon: EpsilonMode,
    pub eta: f64,
    pub mu: f64,
    pub filter: FilterMode,
    pub coordinate: Coordinate,
}

impl Default for IndexParams {
    fn default() -> Self {
        Self {
            epsilon: EpsilonMode::default(),
            eta: DEFAULT_ETA,
            mu: DEFAULT_MU,
            filter: FilterMode::default(),
            coordinate: Coordinate::default(),
        }
    }
}

impl IndexParams {
    fn compactness_config(&self, n: usize, dirs: Option<&DirectionSet>) -> Result<CompactnessConfig> {
        let dirs = match dirs {
            Some(d) => {
                if d.dim() != n {
                    return Err(Error::Dimension {
                        expected: n,
                        found: d.dim(),
                    });
                }
                DirectionSet::from_vectors(d.directions().to_vec(), self.eta)?
            }
            None => DirectionSet::axes(n, self.eta)?,
        };
        Ok(CompactnessConfig {
            epsilon: self.epsilon,
            filter: self.filter,
            dirs,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionAnalysis {
    pub k: usize,
    pub sizes: Vec<usize>,
    pub compactness: CompactnessReport,
    /// `"not-applicable"` for a single cluster, otherwise `"computed"`.
    pub separability_status: &'static str,
    /// `None` for a single cluster.
    pub separability: Option<SeparabilityAnalysis>,
    /// Margin matrices under additional filters, on request.
    pub extra_margins: Vec<MarginMatrix>,
}

pub fn analyze_partition(
    points: &PointSet,
    partition: &Partition,
    params: &IndexParams,
    dirs: Option<&DirectionSet>,
    extra_filters: &[FilterMode],
) -> Result<PartitionAnalysis> {
    let cfg = params.compactness_config(points.dim(), dirs)?;
    let compactness = partition_compactness(points, partition, &cfg)?;
    let k = partition.k();
    let (separability, extra_margins) = if k >= 2 {
        let sep = analyze_separability(points, partition, params.filter, params.mu)?;
        let extra = extra_filters
            .iter()
            .filter(|&&f| f != params.filter)
            .map(|&f| margin_matrix(points, partition, f))
            .collect::<Result<Vec<_>>>()?;
        (Some(sep), extra)
    } else {
        (None, Vec::new())
    };
    Ok(PartitionAnalysis {
        k,
        sizes: partition.sizes(),
        compactness,
        separability_status: if separability.is_some() {
            "computed"
        } else {
            "not-applicable"
        },
        separability,
        extra_margins,
    })
}

impl PartitionAnalysis {
    /// Columns `cluster,size,radius,average_radius,epsilon,shells,orphans,dropped,compactness,cluster_margin`.
    ///
    /// `epsilon` is empty for a degenerate ladder and `cluster_margin` for a single cluster.
    pub fn clusters_csv(&self) -> String {
        let mut out = String::from(
            "cluster,size,radius,average_radius,epsilon,shells,orphans,dropped,compactness,cluster_margin\n",
        );
        for (j, c) in self.compactness.clusters.iter().enumerate() {
            let eps = c.epsilon.map(|e| e.to_string()).unwrap_or_default();
            let margin = self
                .separability
                .as_ref()
                .map(|s| s.report.cluster_margins[j].to_string())
                .unwrap_or_default();
            writeln!(
                out,
                "{j},{},{},{},{eps},{},{},{},{},{margin}",
                c.size,
                c.radius,
                c.average_radius,
                c.shells.len(),
                c.orphans,
                c.dropped,
                c.value
            )
            .unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub wcss: f64,
    pub compactness: CompactnessReport,
    pub separability: SeparabilityAnalysis,
    pub baselines: BaselineReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub clusterer: &'static str,
    pub rows: Vec<SweepRow>,
    pub decision_points: Vec<DecisionPoint>,
    pub selection: Selection,
    #[serde(skip)]
    pub partitions: Vec<Partition>,
}

/// Evaluates already-computed partitions (one per distinct `k >= 2`).
pub fn evaluate_partitions(
    points: &PointSet,
    partitions: Vec<(Partition, f64)>,
    params: &IndexParams,
    dirs: Option<&DirectionSet>,
) -> Result<SweepReport> {
    let cfg = params.compactness_config(points.dim(), dirs)?;
    let mut rows = Vec::with_capacity(partitions.len());
    for (partition, wcss) in &partitions {
        let compactness = partition_compactness(points, partition, &cfg)?;
        let separability = analyze_separability(points, partition, params.filter, params.mu)?;
        let baselines = baseline_report(points, partition)?;
        rows.push(SweepRow {
            k: partition.k(),
            wcss: *wcss,
            compactness,
            separability,
            baselines,
        });
    }
    let entries: Vec<SweepEntry<'_>> = rows
        .iter()
        .map(|r| SweepEntry {
            k: r.k,
            compactness: &r.compactness,
            separability: &r.separability.report,
        })
        .collect();
    let decision_points = build_decision_points(&entries, params.coordinate, params.mu, params.eta)?;
    let selection = select_k(&decision_points)?;
    Ok(SweepReport {
        clusterer: CLUSTERER,
        rows,
        decision_points,
        selection,
        partitions: partitions.into_iter().map(|(p, _)| p).collect(),
    })
}

pub fn run_sweep(
    points: &PointSet,
    sweep: &SweepConfig,
    params: &IndexParams,
    dirs: Option<&DirectionSet>,
) -> Result<SweepReport> {
    let fits = incremental_kmeans_sweep(points, sweep)?;
    evaluate_partitions(
        points,
        fits.into_iter().map(|f| (f.partition, f.wcss)).collect(),
        params,
        dirs,
    )
}

impl SweepReport {
    /// Columns `k,T_k,S_av,DB,XB,Dn,CH`; CH is unscaled.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("k,T_k,S_av,DB,XB,Dn,CH\n");
        for (row, dp) in self.rows.iter().zip(&self.decision_points) {
            let b = &row.baselines;
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.k,
                dp.t_value,
                b.silhouette_avg,
                b.davies_bouldin,
                b.xie_beni,
                b.dunn,
                b.calinski_harabasz
            )
            .unwrap();
        }
        out
    }

    /// Columns `k,compactness,separability_raw,separability_scaled,t_raw,t_scaled`.
    pub fn decision_csv(&self) -> String {
        let mut out =
            String::from("k,compactness,separability_raw,separability_scaled,t_raw,t_scaled\n");
        for p in &self.decision_points {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                p.k,
                p.compactness,
                p.separability_raw,
                p.separability_scaled,
                p.t_raw(),
                p.t_scaled()
            )
            .unwrap();
        }
        out
    }
}
