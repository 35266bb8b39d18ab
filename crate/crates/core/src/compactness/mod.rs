//! Epsilon-compactness of clusters and partitions.
//!
//! A cluster is summarised by the ladder of its distinct center distances.
//! Gaps longer than `epsilon` are empty annuli and cost their excess length;
//! runs of short gaps are merged into shells whose angular coverage (the
//! fraction of probe directions reached by some point) discounts their width.
//! The index is `1 - penalty / R_A`, so it lies in `[0, 1]`.

mod directions;
mod ladder;
mod shells;

pub use directions::{direction_coverage, DirectionSet, DEFAULT_ETA};
pub use ladder::{build_ladder, DistanceLadder, EpsilonRule, FilterMode};
pub use shells::{decompose_shells, partition_gaps, GapPartition, Shell, ShellDecomposition};

use serde::{Deserialize, Serialize};

use crate::dataset::{centroid_of, Partition, PointSet};
use crate::error::{Error, Result};

/// How `epsilon` is chosen for a single cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Epsilon {
    Value(f64),
    Rule(EpsilonRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EpsilonScope {
    /// Each cluster derives its own epsilon from its ladder.
    #[default]
    Cluster,
    /// One epsilon from the ladder of the whole point set, shared by all clusters.
    Dataset,
}

/// How `epsilon` is chosen for a partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum EpsilonMode {
    Fixed { value: f64 },
    Auto { rule: EpsilonRule, scope: EpsilonScope },
}

impl Default for EpsilonMode {
    fn default() -> Self {
        EpsilonMode::Auto {
            rule: EpsilonRule::RadiusOverP,
            scope: EpsilonScope::Cluster,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShellSummary {
    pub inner: f64,
    pub outer: f64,
    pub points: usize,
    pub alpha: f64,
}

/// Compactness of one cluster with the intermediate quantities behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterCompactness {
    pub size: usize,
    pub filter: FilterMode,
    /// `None` when the ladder is degenerate and no epsilon was needed.
    pub epsilon: Option<f64>,
    pub radius: f64,
    pub average_radius: f64,
    pub rungs: usize,
    pub dropped: usize,
    pub shells: Vec<ShellSummary>,
    /// Points on the outer end of a sparse gap (in no shell).
    pub orphans: usize,
    pub value: f64,
}

/// Evaluates the index from a ladder and an explicit `epsilon`.
fn compactness_from_ladder(
    points: &PointSet,
    ladder: &DistanceLadder,
    epsilon: f64,
    dirs: &DirectionSet,
) -> Result<(f64, Vec<ShellSummary>, usize)> {
    let gaps = partition_gaps(ladder, epsilon)?;
    let decomposition = decompose_shells(ladder, &gaps);
    let r_a = ladder.radius();
    // 1 - (1/R_A)[sum (1 - alpha_j) w_j + sum_sparse (g_i - eps)], rearranged using
    // R_A = sum w_j + sum_sparse g_i so that eps = 0 gives exactly 0 and a single
    // full shell gives exactly alpha.
    let mut value = 0.0;
    let mut shells = Vec::with_capacity(decomposition.shells.len());
    for shell in &decomposition.shells {
        let alpha = direction_coverage(points, &shell.points, ladder.center(), dirs);
        value += alpha * (shell.width() / r_a);
        shells.push(ShellSummary {
            inner: shell.inner,
            outer: shell.outer,
            points: shell.points.len(),
            alpha,
        });
    }
    value += gaps.sparse.len() as f64 * (epsilon / r_a);
    debug_assert!(
        (0.0..=1.0).contains(&value),
        "compactness {value} out of range"
    );
    Ok((value, shells, decomposition.orphans.len()))
}

/// Compactness index of the `members` rows of `points` about `center`.
///
/// A cluster whose filtered ladder has no positive rung (a single point, or
/// all points at the center) has compactness 1.
pub fn cluster_compactness(
    points: &PointSet,
    members: &[usize],
    center: &[f64],
    epsilon: Epsilon,
    dirs: &DirectionSet,
    filter: FilterMode,
) -> Result<ClusterCompactness> {
    if dirs.dim() != points.dim() {
        return Err(Error::Dimension {
            expected: points.dim(),
            found: dirs.dim(),
        });
    }
    let ladder = build_ladder(points, members, center, filter)?;
    let mut report = ClusterCompactness {
        size: members.len(),
        filter,
        epsilon: None,
        radius: ladder.radius(),
        average_radius: ladder.average_radius(),
        rungs: ladder.p(),
        dropped: ladder.dropped(),
        shells: Vec::new(),
        orphans: 0,
        value: 1.0,
    };
    if ladder.p() == 0 {
        if let Epsilon::Value(v) = epsilon {
            report.epsilon = Some(v);
        }
        return Ok(report);
    }
    let eps = match epsilon {
        Epsilon::Value(v) => v,
        Epsilon::Rule(rule) => ladder.default_epsilon(rule)?,
    };
    let (value, shells, orphans) = compactness_from_ladder(points, &ladder, eps, dirs)?;
    report.epsilon = Some(eps);
    report.value = value;
    report.shells = shells;
    report.orphans = orphans;
    Ok(report)
}

/// Compactness of the whole point set about its centroid.
pub fn dataset_compactness(
    points: &PointSet,
    epsilon: Epsilon,
    dirs: &DirectionSet,
    filter: FilterMode,
) -> Result<ClusterCompactness> {
    let all: Vec<usize> = (0..points.len()).collect();
    let center = centroid_of(points.rows(), points.dim())?;
    cluster_compactness(points, &all, &center, epsilon, dirs, filter)
}

/// Epsilon shared by all clusters under [`EpsilonScope::Dataset`].
pub fn dataset_epsilon(points: &PointSet, rule: EpsilonRule, filter: FilterMode) -> Result<f64> {
    let all: Vec<usize> = (0..points.len()).collect();
    let center = centroid_of(points.rows(), points.dim())?;
    let ladder = build_ladder(points, &all, &center, filter)?;
    match ladder.default_epsilon(rule) {
        Ok(e) => Ok(e),
        // every point coincides; every cluster is then degenerate too
        Err(Error::DegenerateLadder) => Ok(0.0),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactnessReport {
    pub filter: FilterMode,
    pub epsilon_mode: EpsilonMode,
    pub clusters: Vec<ClusterCompactness>,
    /// Size-weighted mean of the cluster indices.
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct CompactnessConfig {
    pub epsilon: EpsilonMode,
    pub filter: FilterMode,
    pub dirs: DirectionSet,
}

impl CompactnessConfig {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            epsilon: EpsilonMode::default(),
            filter: FilterMode::default(),
            dirs: DirectionSet::axes(n, DEFAULT_ETA)?,
        })
    }
}

pub fn partition_compactness(
    points: &PointSet,
    partition: &Partition,
    config: &CompactnessConfig,
) -> Result<CompactnessReport> {
    let epsilon = match config.epsilon {
        EpsilonMode::Fixed { value } => Epsilon::Value(value),
        EpsilonMode::Auto {
            rule,
            scope: EpsilonScope::Cluster,
        } => Epsilon::Rule(rule),
        EpsilonMode::Auto {
            rule,
            scope: EpsilonScope::Dataset,
        } => Epsilon::Value(dataset_epsilon(points, rule, config.filter)?),
    };
    let clusters = (0..partition.k())
        .map(|j| {
            cluster_compactness(
                points,
                partition.members(j),
                partition.center(j),
                epsilon,
                &config.dirs,
                config.filter,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let value = weighted_mean(&clusters);
    Ok(CompactnessReport {
        filter: config.filter,
        epsilon_mode: config.epsilon,
        clusters,
        value,
    })
}

fn weighted_mean(clusters: &[ClusterCompactness]) -> f64 {
    let total: usize = clusters.iter().map(|c| c.size).sum();
    clusters
        .iter()
        .map(|c| c.size as f64 * c.value)
        .sum::<f64>()
        / total as f64
}
