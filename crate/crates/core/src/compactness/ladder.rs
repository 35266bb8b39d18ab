use serde::{Deserialize, Serialize};

use crate::dataset::PointSet;
use crate::error::{Error, Result};
use crate::geometry::{dist, median};

/// Which points of a cluster take part in an index computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    /// Every point.
    Full,
    /// Points within `R_av + 2 s_d` of the center.
    #[default]
    Ms,
    /// Points within the median distinct distance.
    Med,
}

impl FilterMode {
    pub const ALL: [FilterMode; 3] = [FilterMode::Full, FilterMode::Ms, FilterMode::Med];

    pub fn as_str(self) -> &'static str {
        match self {
            FilterMode::Full => "full",
            FilterMode::Ms => "ms",
            FilterMode::Med => "med",
        }
    }
}

impl std::fmt::Display for FilterMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EpsilonRule {
    /// `R_A / p`.
    #[default]
    RadiusOverP,
    /// Median of the ladder gaps.
    MedianGap,
}

/// Sorted distinct center distances of a cluster, `0 = d_0 < d_1 < ... < d_p = R_A`.
///
/// Distances closer than `1e-9 * max(1, R_A)` share a rung; the rung value is
/// the largest distance of its group, so the top rung is exactly `R_A`.
/// Distances within that tolerance of zero collapse into `d_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceLadder {
    center: Vec<f64>,
    filter: FilterMode,
    /// Surviving member indices into the source point set, ascending by distance.
    members: Vec<usize>,
    /// Raw center distances aligned with `members`.
    distances: Vec<f64>,
    /// Rung index of each member.
    rung_of: Vec<usize>,
    rungs: Vec<f64>,
    /// Cumulative point count and distance sum over rungs `0..=i`.
    cum_count: Vec<usize>,
    cum_sum: Vec<f64>,
    r_a: f64,
    r_av: f64,
    s_d: f64,
    cutoff: Option<f64>,
    dropped: usize,
}

struct RawLadder {
    order: Vec<usize>,
    dist_sorted: Vec<f64>,
    rung_of: Vec<usize>,
    rungs: Vec<f64>,
}

fn dedup_tolerance(r_a: f64) -> f64 {
    1e-9 * r_a.max(1.0)
}

/// Groups ascending distances into rungs.
fn group_rungs(dist_sorted: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let r_a = dist_sorted.last().copied().unwrap_or(0.0);
    let tol = dedup_tolerance(r_a);
    let mut rungs = vec![0.0];
    let mut rung_of = Vec::with_capacity(dist_sorted.len());
    // start value of the current group; 0 for the center rung
    let mut group_start = 0.0;
    for &d in dist_sorted {
        if d - group_start > tol {
            rungs.push(d);
            group_start = d;
        } else if rungs.len() > 1 {
            *rungs.last_mut().unwrap() = d;
        }
        rung_of.push(rungs.len() - 1);
    }
    (rung_of, rungs)
}

fn raw_ladder(points: &PointSet, members: &[usize], center: &[f64]) -> RawLadder {
    let mut pairs: Vec<(f64, usize)> = members
        .iter()
        .map(|&i| (dist(points.row(i), center), i))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let order: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let dist_sorted: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let (rung_of, rungs) = group_rungs(&dist_sorted);
    RawLadder {
        order,
        dist_sorted,
        rung_of,
        rungs,
    }
}

/// Distinct distance values actually attained by points.
fn distinct_values(raw: &RawLadder) -> Vec<f64> {
    let mut out = Vec::new();
    let mut last = usize::MAX;
    for &r in &raw.rung_of {
        if r != last {
            out.push(raw.rungs[r]);
            last = r;
        }
    }
    out
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn population_std(values: &[f64]) -> f64 {
    let mu = mean(values);
    (values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Builds the distance ladder of the `members` rows of `points` about `center`.
///
/// `Ms` and `Med` first drop points beyond their cutoff (computed on the full
/// cluster) and rebuild the ladder from the survivors.
pub fn build_ladder(
    points: &PointSet,
    members: &[usize],
    center: &[f64],
    filter: FilterMode,
) -> Result<DistanceLadder> {
    if members.is_empty() {
        return Err(Error::EmptyInput("ladder of an empty cluster".into()));
    }
    if center.len() != points.dim() {
        return Err(Error::Dimension {
            expected: points.dim(),
            found: center.len(),
        });
    }
    let full = raw_ladder(points, members, center);
    let cutoff = match filter {
        FilterMode::Full => None,
        FilterMode::Ms => {
            let distinct = distinct_values(&full);
            let point_mean = members
                .iter()
                .map(|&i| dist(points.row(i), center))
                .sum::<f64>()
                / members.len() as f64;
            Some(point_mean + 2.0 * population_std(&distinct))
        }
        FilterMode::Med => Some(median(&distinct_values(&full))),
    };
    let raw = match cutoff {
        None => full,
        Some(limit) => {
            // a rung within the dedup tolerance of the cutoff counts as equal to it
            let limit = limit + dedup_tolerance(full.rungs[full.rungs.len() - 1]);
            let keep: Vec<usize> = full
                .order
                .iter()
                .zip(&full.rung_of)
                .filter(|&(_, &r)| full.rungs[r] <= limit)
                .map(|(&i, _)| i)
                .collect();
            if keep.is_empty() {
                return Err(Error::EmptyAfterFilter);
            }
            raw_ladder(points, &keep, center)
        }
    };
    let dropped = members.len() - raw.order.len();

    let p = raw.rungs.len() - 1;
    let mut cum_count = vec![0usize; p + 1];
    let mut cum_sum = vec![0.0; p + 1];
    for (&d, &r) in raw.dist_sorted.iter().zip(&raw.rung_of) {
        cum_count[r] += 1;
        cum_sum[r] += d;
    }
    for i in 1..=p {
        cum_count[i] += cum_count[i - 1];
        cum_sum[i] += cum_sum[i - 1];
    }
    let r_a = raw.rungs[p];
    let r_av = raw.dist_sorted.iter().sum::<f64>() / raw.dist_sorted.len() as f64;
    let s_d = population_std(&distinct_values(&raw));

    Ok(DistanceLadder {
        center: center.to_vec(),
        filter,
        members: raw.order,
        distances: raw.dist_sorted,
        rung_of: raw.rung_of,
        rungs: raw.rungs,
        cum_count,
        cum_sum,
        r_a,
        r_av,
        s_d,
        cutoff,
        dropped,
    })
}

impl DistanceLadder {
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn filter(&self) -> FilterMode {
        self.filter
    }

    /// Ladder values `d_0 = 0, d_1, ..., d_p`.
    pub fn rungs(&self) -> &[f64] {
        &self.rungs
    }

    /// Number of rungs above zero.
    pub fn p(&self) -> usize {
        self.rungs.len() - 1
    }

    /// Radius: largest surviving center distance.
    pub fn radius(&self) -> f64 {
        self.r_a
    }

    /// Mean surviving center distance.
    pub fn average_radius(&self) -> f64 {
        self.r_av
    }

    /// Population standard deviation of the distinct surviving distances.
    pub fn distinct_std(&self) -> f64 {
        self.s_d
    }

    /// Distance threshold applied by the filter, if any.
    pub fn cutoff(&self) -> Option<f64> {
        self.cutoff
    }

    /// Points removed by the filter.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    /// Surviving member indices, ascending by center distance.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn rung_of(&self) -> &[usize] {
        &self.rung_of
    }

    /// Gap lengths `d_i - d_{i-1}` for `i = 1..=p`.
    pub fn gaps(&self) -> Vec<f64> {
        self.rungs.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Mean center distance over the points within distance `t`, or 0 when there are none.
    ///
    /// Non-decreasing in `t` and constant between consecutive rungs.
    pub fn compactness_function(&self, t: f64) -> f64 {
        if t >= self.r_a {
            return self.r_av;
        }
        // largest rung index with value <= t; rung 0 is 0 so t >= 0 always finds one
        let i = self.rungs.partition_point(|&r| r <= t);
        if i == 0 {
            return 0.0;
        }
        let i = i - 1;
        match self.cum_count[i] {
            0 => 0.0,
            c => self.cum_sum[i] / c as f64,
        }
    }

    /// Default `epsilon` for this ladder.
    pub fn default_epsilon(&self, rule: EpsilonRule) -> Result<f64> {
        let p = self.p();
        if p == 0 {
            return Err(Error::DegenerateLadder);
        }
        Ok(match rule {
            EpsilonRule::RadiusOverP => self.r_a / p as f64,
            EpsilonRule::MedianGap => median(&self.gaps()),
        })
    }
}
