use serde::Serialize;

use super::ladder::DistanceLadder;
use crate::error::{Error, Result};

/// Ladder gap indices split by length against `epsilon`.
///
/// Indices are 1-based: index `i` names the gap `(d_{i-1}, d_i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapPartition {
    pub epsilon: f64,
    /// Gaps of length `<= epsilon`.
    pub dense: Vec<usize>,
    /// Gaps of length `> epsilon`.
    pub sparse: Vec<usize>,
    pub min_gap: f64,
    pub max_gap: f64,
    pub gaps: Vec<f64>,
}

pub fn partition_gaps(ladder: &DistanceLadder, epsilon: f64) -> Result<GapPartition> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be a finite nonnegative number, got {epsilon}"
        )));
    }
    if ladder.p() == 0 {
        return Err(Error::DegenerateLadder);
    }
    let gaps = ladder.gaps();
    let (mut dense, mut sparse) = (Vec::new(), Vec::new());
    for (i, &g) in gaps.iter().enumerate() {
        if g <= epsilon {
            dense.push(i + 1);
        } else {
            sparse.push(i + 1);
        }
    }
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    Ok(GapPartition {
        epsilon,
        dense,
        sparse,
        min_gap,
        max_gap,
        gaps,
    })
}

/// A merged run of dense gaps, `(inner, outer]`, with the points inside it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Shell {
    /// First and last gap index of the run (inclusive).
    pub first_gap: usize,
    pub last_gap: usize,
    pub inner: f64,
    pub outer: f64,
    /// Member indices into the source point set.
    pub points: Vec<usize>,
}

impl Shell {
    pub fn width(&self) -> f64 {
        self.outer - self.inner
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShellDecomposition {
    pub shells: Vec<Shell>,
    /// Points sitting on the outer end of a sparse gap; they belong to no shell.
    pub orphans: Vec<usize>,
}

/// Merges consecutive dense gaps and collects the points of each merged interval.
pub fn decompose_shells(ladder: &DistanceLadder, gaps: &GapPartition) -> ShellDecomposition {
    let rungs = ladder.rungs();
    let mut shells: Vec<Shell> = Vec::new();
    for &i in &gaps.dense {
        match shells.last_mut() {
            Some(s) if s.last_gap + 1 == i => {
                s.last_gap = i;
                s.outer = rungs[i];
            }
            _ => shells.push(Shell {
                first_gap: i,
                last_gap: i,
                inner: rungs[i - 1],
                outer: rungs[i],
                points: Vec::new(),
            }),
        }
    }

    // shell id per rung; rung 0 (the center) and sparse rungs map to none
    let mut owner: Vec<Option<usize>> = vec![None; rungs.len()];
    for (j, s) in shells.iter().enumerate() {
        for slot in &mut owner[s.first_gap..=s.last_gap] {
            *slot = Some(j);
        }
    }
    let mut orphans = Vec::new();
    for (&point, &rung) in ladder.members().iter().zip(ladder.rung_of()) {
        match owner[rung] {
            Some(j) => shells[j].points.push(point),
            None if rung > 0 => orphans.push(point),
            None => {}
        }
    }
    ShellDecomposition { shells, orphans }
}
