//! Decision-space points and selection of the number of clusters.

use serde::{Deserialize, Serialize};

use crate::compactness::{CompactnessReport, EpsilonMode, FilterMode};
use crate::error::{Error, Result};
use crate::separability::SeparabilityReport;

/// Which total margin feeds the separability axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Coordinate {
    Raw,
    #[default]
    Scaled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionPoint {
    pub k: usize,
    pub compactness: f64,
    pub separability: f64,
    pub separability_raw: f64,
    pub separability_scaled: f64,
    /// `compactness + separability`.
    pub t_value: f64,
    pub coordinate: Coordinate,
    pub epsilon_mode: EpsilonMode,
    pub filter: FilterMode,
    pub mu: f64,
    pub eta: f64,
}

impl DecisionPoint {
    pub fn t_raw(&self) -> f64 {
        self.compactness + self.separability_raw
    }

    pub fn t_scaled(&self) -> f64 {
        self.compactness + self.separability_scaled
    }

    /// Weakly better in both coordinates and strictly better in one.
    pub fn dominates(&self, other: &DecisionPoint) -> bool {
        self.compactness >= other.compactness
            && self.separability >= other.separability
            && (self.compactness > other.compactness || self.separability > other.separability)
    }
}

pub struct SweepEntry<'a> {
    pub k: usize,
    pub compactness: &'a CompactnessReport,
    pub separability: &'a SeparabilityReport,
}

pub fn build_decision_points(
    entries: &[SweepEntry<'_>],
    coordinate: Coordinate,
    mu: f64,
    eta: f64,
) -> Result<Vec<DecisionPoint>> {
    if entries.is_empty() {
        return Err(Error::EmptyInput("no sweep results".into()));
    }
    let mut points: Vec<DecisionPoint> = Vec::with_capacity(entries.len());
    for e in entries {
        if e.k < 2 || e.separability.k != e.k {
            return Err(Error::SingleCluster(e.k));
        }
        if points.iter().any(|p| p.k == e.k) {
            return Err(Error::DuplicateK(e.k));
        }
        let raw = e.separability.total_margin_raw;
        let scaled = e.separability.total_margin_scaled;
        let separability = match coordinate {
            Coordinate::Raw => raw,
            Coordinate::Scaled => scaled,
        };
        let compactness = e.compactness.value;
        points.push(DecisionPoint {
            k: e.k,
            compactness,
            separability,
            separability_raw: raw,
            separability_scaled: scaled,
            t_value: compactness + separability,
            coordinate,
            epsilon_mode: e.compactness.epsilon_mode,
            filter: e.compactness.filter,
            mu,
            eta,
        });
    }
    points.sort_by_key(|p| p.k);
    Ok(points)
}

/// Points not dominated by any other point, ordered by `k`.
pub fn non_dominated(points: &[DecisionPoint]) -> Vec<DecisionPoint> {
    let mut kept: Vec<DecisionPoint> = points
        .iter()
        .filter(|p| !points.iter().any(|q| q.dominates(p)))
        .cloned()
        .collect();
    kept.sort_by_key(|p| p.k);
    kept
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub k: usize,
    pub t_value: f64,
    /// Non-dominated `k` values.
    pub front: Vec<usize>,
    /// Every `k` ordered by descending `T`, ties toward smaller `k`.
    pub ranking: Vec<(usize, f64)>,
    /// Set when the best two front points differ in `T` by less than `1e-3`.
    pub ambiguous: bool,
}

pub const AMBIGUITY_GAP: f64 = 1e-3;

fn rank(points: &[DecisionPoint]) -> Vec<(usize, f64)> {
    let mut r: Vec<(usize, f64)> = points.iter().map(|p| (p.k, p.t_value)).collect();
    r.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    r
}

/// Chooses the `k` with the largest `T` among non-dominated points.
pub fn select_k(points: &[DecisionPoint]) -> Result<Selection> {
    if points.is_empty() {
        return Err(Error::EmptyInput("no decision points".into()));
    }
    let front = non_dominated(points);
    let front_rank = rank(&front);
    let (k, t_value) = front_rank[0];
    let ambiguous = front_rank
        .get(1)
        .is_some_and(|&(_, t)| (t_value - t).abs() < AMBIGUITY_GAP);
    Ok(Selection {
        k,
        t_value,
        front: front.iter().map(|p| p.k).collect(),
        ranking: rank(points),
        ambiguous,
    })
}
