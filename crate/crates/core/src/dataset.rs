//! Point sets, labels, partitions and synthetic mixtures.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An immutable `m x n` matrix of finite coordinates, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    data: Vec<f64>,
    m: usize,
    n: usize,
}

impl PointSet {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::EmptyInput("point set has no rows".into()))?;
        let n = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(data, n)
    }

    pub fn from_flat(data: Vec<f64>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput("points have zero attributes".into()));
        }
        if data.is_empty() {
            return Err(Error::EmptyInput("point set has no rows".into()));
        }
        if !data.len().is_multiple_of(n) {
            return Err(Error::Dimension {
                expected: n,
                found: data.len() % n,
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                point: pos / n,
                attribute: pos % n,
            });
        }
        let m = data.len() / n;
        Ok(Self { data, m, n })
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Number of attributes.
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.n)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Applies `f` to every point, producing a new set of the same dimension.
    pub fn map_points(&self, mut f: impl FnMut(&[f64], &mut [f64])) -> Result<Self> {
        let mut data = vec![0.0; self.data.len()];
        for (src, dst) in self.rows().zip(data.chunks_exact_mut(self.n)) {
            f(src, dst);
        }
        Self::from_flat(data, self.n)
    }

    /// Selects the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.n);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self::from_flat(data, self.n)
    }

    /// CSV text, one point per line, shortest round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Parses comma- or whitespace-separated numeric text.
///
/// The first non-blank line is treated as a header when none of its fields
/// parse as numbers. Row and column numbers in errors are 1-based file positions.
pub fn parse_points(text: &str) -> Result<PointSet> {
    let mut data = Vec::new();
    let mut n: Option<usize> = None;
    let mut seen_first = false;
    for (idx, line) in text.lines().enumerate() {
        let row = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields = split_fields(line);
        if !seen_first {
            seen_first = true;
            if fields.iter().all(|f| f.parse::<f64>().is_err()) {
                continue;
            }
        }
        match n {
            None => n = Some(fields.len()),
            Some(width) if width != fields.len() => {
                return Err(Error::Parse {
                    row,
                    column: fields.len().min(width) + 1,
                    message: format!("expected {width} fields, found {}", fields.len()),
                });
            }
            _ => {}
        }
        for (col, field) in fields.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                column: col + 1,
                message: format!("not a number: {field:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: col + 1,
                    message: format!("non-finite value: {field:?}"),
                });
            }
            data.push(value);
        }
    }
    let n = n.ok_or_else(|| Error::EmptyInput("no data rows".into()))?;
    PointSet::from_flat(data, n)
}

pub fn load_points(path: impl AsRef<Path>) -> Result<PointSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_points(&text)
}

/// Cluster labels remapped to dense ids `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub ids: Vec<usize>,
    pub k: usize,
}

impl Labels {
    /// Remaps arbitrary ids to `0..k` in order of first occurrence.
    pub fn dense<T: Eq + Clone>(raw: &[T]) -> Self {
        let mut seen: Vec<T> = Vec::new();
        let ids = raw
            .iter()
            .map(|v| match seen.iter().position(|s| s == v) {
                Some(p) => p,
                None => {
                    seen.push(v.clone());
                    seen.len() - 1
                }
            })
            .collect();
        Labels {
            ids,
            k: seen.len(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.ids.len() * 3);
        for id in &self.ids {
            writeln!(out, "{id}").unwrap();
        }
        out
    }
}

pub fn parse_labels(text: &str, k_hint: Option<usize>) -> Result<Labels> {
    let mut raw = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: i64 = line.parse().map_err(|_| Error::Parse {
            row: idx + 1,
            column: 1,
            message: format!("not an integer label: {line:?}"),
        })?;
        raw.push(v);
    }
    if raw.is_empty() {
        return Err(Error::EmptyInput("labels file has no rows".into()));
    }
    let labels = Labels::dense(&raw);
    if let Some(k) = k_hint {
        if labels.k < k {
            return Err(Error::EmptyCluster(labels.k));
        }
        if labels.k > k {
            return Err(Error::InvalidParameter(format!(
                "labels contain {} distinct ids but k = {k} was expected",
                labels.k
            )));
        }
    }
    Ok(labels)
}

pub fn load_labels(path: impl AsRef<Path>, k_hint: Option<usize>) -> Result<Labels> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&text, k_hint)
}

/// Coordinate-wise arithmetic mean of the selected rows.
pub fn centroid(points: &PointSet, indices: &[usize]) -> Result<Vec<f64>> {
    centroid_of(indices.iter().map(|&i| points.row(i)), points.dim())
}

/// Coordinate-wise mean of an arbitrary collection of `n`-dimensional rows.
pub fn centroid_of<'a>(rows: impl IntoIterator<Item = &'a [f64]>, n: usize) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; n];
    let mut count = 0usize;
    for row in rows {
        for (s, v) in sum.iter_mut().zip(row) {
            *s += v;
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyInput("centroid of an empty set".into()));
    }
    let c = count as f64;
    sum.iter_mut().for_each(|s| *s /= c);
    Ok(sum)
}

/// A hard partition of a point set with its centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    labels: Vec<usize>,
    members: Vec<Vec<usize>>,
    centers: Vec<Vec<f64>>,
}

impl Partition {
    /// Builds a partition from dense labels; every id in `0..=max` must be used.
    pub fn new(points: &PointSet, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != points.len() {
            return Err(Error::LengthMismatch(format!(
                "{} labels for {} points",
                labels.len(),
                points.len()
            )));
        }
        let k = labels.iter().max().map_or(0, |&k| k + 1);
        let mut members = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            members[l].push(i);
        }
        if let Some(empty) = members.iter().position(Vec::is_empty) {
            return Err(Error::EmptyCluster(empty));
        }
        let centers = members
            .iter()
            .map(|idx| centroid(points, idx))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            labels,
            members,
            centers,
        })
    }

    pub fn from_labels(points: &PointSet, labels: &Labels) -> Result<Self> {
        Self::new(points, labels.ids.clone())
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn members(&self, cluster: usize) -> &[usize] {
        &self.members[cluster]
    }

    pub fn center(&self, cluster: usize) -> &[f64] {
        &self.centers[cluster]
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn to_labels(&self) -> Labels {
        Labels {
            ids: self.labels.clone(),
            k: self.k(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub center: Vec<f64>,
    pub std_dev: f64,
    pub count: usize,
}

/// Isotropic Gaussian mixture description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub components: Vec<MixtureComponent>,
    pub seed: u64,
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<()> {
        let first = self
            .components
            .first()
            .ok_or_else(|| Error::InvalidSpec("no components".into()))?;
        let n = first.center.len();
        if n == 0 {
            return Err(Error::InvalidSpec("component center is empty".into()));
        }
        for (j, c) in self.components.iter().enumerate() {
            if c.center.len() != n {
                return Err(Error::InvalidSpec(format!(
                    "component {j} has {} coordinates, expected {n}",
                    c.center.len()
                )));
            }
            if c.count == 0 {
                return Err(Error::InvalidSpec(format!("component {j} has count 0")));
            }
            // zero spread is accepted and yields point masses
            if !(c.std_dev >= 0.0 && c.std_dev.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "component {j} has invalid standard deviation {}",
                    c.std_dev
                )));
            }
            if c.center.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "component {j} has a non-finite center"
                )));
            }
        }
        Ok(())
    }
}

/// Samples the mixture; labels give the generating component.
pub fn generate_mixture(spec: &MixtureSpec) -> Result<(PointSet, Labels)> {
    spec.validate()?;
    let n = spec.components[0].center.len();
    let total: usize = spec.components.iter().map(|c| c.count).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = Vec::with_capacity(total * n);
    let mut ids = Vec::with_capacity(total);
    for (j, comp) in spec.components.iter().enumerate() {
        for _ in 0..comp.count {
            for &c in &comp.center {
                let z: f64 = StandardNormal.sample(&mut rng);
                data.push(c + comp.std_dev * z);
            }
            ids.push(j);
        }
    }
    let points = PointSet::from_flat(data, n)?;
    Ok((
        points,
        Labels {
            ids,
            k: spec.components.len(),
        },
    ))
}

pub const PRESETS: &[&str] = &[
    "ds1-like",
    "ds2-like",
    "ds3-like",
    "grid-a1-like",
    "grid-a2-like",
    "grid-a3-like",
];

/// Built-in mixture layouts.
///
/// The `ds*` presets place three outer clusters of 400 points around a
/// central cluster of 250 (1,450 points in total); the outer ring shrinks
/// from `ds1` (well separated) to `ds3` (outer clusters overlap the centre).
/// The `grid-a*` presets lay out 20, 35 or 50 clusters of 150 points on a
/// jittered grid.
pub fn preset(name: &str, seed: u64) -> Result<MixtureSpec> {
    let ring = |radius: f64| {
        let mut components = vec![MixtureComponent {
            center: vec![0.0, 0.0],
            std_dev: 1.0,
            count: 250,
        }];
        for a in [90.0f64, 210.0, 330.0] {
            let t = a.to_radians();
            components.push(MixtureComponent {
                center: vec![radius * t.cos(), radius * t.sin()],
                std_dev: 1.0,
                count: 400,
            });
        }
        MixtureSpec { components, seed }
    };
    let grid = |cols: usize, rows: usize| {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut components = Vec::with_capacity(cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                let jx: f64 = rng.random_range(-1.0..1.0);
                let jy: f64 = rng.random_range(-1.0..1.0);
                components.push(MixtureComponent {
                    center: vec![10.0 * c as f64 + jx, 10.0 * r as f64 + jy],
                    std_dev: 1.5,
                    count: 150,
                });
            }
        }
        MixtureSpec { components, seed }
    };
    match name {
        "ds1-like" => Ok(ring(10.0)),
        "ds2-like" => Ok(ring(6.5)),
        "ds3-like" => Ok(ring(4.0)),
        "grid-a1-like" => Ok(grid(5, 4)),
        "grid-a2-like" => Ok(grid(7, 5)),
        "grid-a3-like" => Ok(grid(10, 5)),
        other => Err(Error::InvalidSpec(format!(
            "unknown preset {other:?}; available presets: {}",
            PRESETS.join(", ")
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Rescale every attribute to [0, 1]; constant attributes become 0.
    MinMax,
    /// Subtract the mean and divide by the population standard deviation.
    ZScore,
}

pub fn normalize(points: &PointSet, method: Normalization) -> Result<PointSet> {
    let n = points.dim();
    let m = points.len() as f64;
    let mut a = vec![0.0; n];
    let mut b = vec![1.0; n];
    match method {
        Normalization::MinMax => {
            let mut lo = vec![f64::INFINITY; n];
            let mut hi = vec![f64::NEG_INFINITY; n];
            for row in points.rows() {
                for j in 0..n {
                    lo[j] = lo[j].min(row[j]);
                    hi[j] = hi[j].max(row[j]);
                }
            }
            for j in 0..n {
                a[j] = lo[j];
                b[j] = hi[j] - lo[j];
            }
        }
        Normalization::ZScore => {
            let mean = centroid_of(points.rows(), n)?;
            let mut var = vec![0.0; n];
            for row in points.rows() {
                for j in 0..n {
                    var[j] += (row[j] - mean[j]).powi(2);
                }
            }
            for j in 0..n {
                a[j] = mean[j];
                b[j] = (var[j] / m).sqrt();
            }
        }
    }
    points.map_points(|src, dst| {
        for j in 0..n {
            dst[j] = if b[j] > 0.0 { (src[j] - a[j]) / b[j] } else { 0.0 };
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_plain_rows() {
        let p = parse_points("0,0\n1,0\n4,0\n5,0").unwrap();
        assert_eq!((p.len(), p.dim()), (4, 2));
        assert_eq!(p.row(2), &[4.0, 0.0]);
    }

    #[test]
    fn parse_header_and_whitespace() {
        let p = parse_points("x,y\n1,2\n3,4\n").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.row(0), &[1.0, 2.0]);
        let q = parse_points("1.5  2\r\n3\t4\r\n").unwrap();
        assert_eq!(q.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_points("1,a") {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (1, 2)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_points("1,2\n3"),
            Err(Error::Parse { row: 2, .. })
        ));
        assert!(matches!(parse_points("x,y\n"), Err(Error::EmptyInput(_))));
        assert!(matches!(parse_points(""), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_points("/definitely/not/here.csv"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn labels_remap_densely() {
        let l = parse_labels("2\n2\n5\n5", None).unwrap();
        assert_eq!(l.ids, vec![0, 0, 1, 1]);
        assert_eq!(l.k, 2);
        let l = parse_labels("0\r\n0\r\n0\r\n", None).unwrap();
        assert_eq!((l.ids, l.k), (vec![0, 0, 0], 1));
        assert!(matches!(
            parse_labels("1\nx", None),
            Err(Error::Parse { row: 2, .. })
        ));
        assert!(matches!(
            parse_labels("1\n1", Some(2)),
            Err(Error::EmptyCluster(_))
        ));
    }

    #[test]
    fn centroid_examples() {
        let p = PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert_eq!(centroid(&p, &[0, 1]).unwrap(), vec![0.5, 0.0]);
        assert_eq!(centroid(&p, &[0]).unwrap(), vec![0.0, 0.0]);
        let q = PointSet::from_rows(&[[0.0], [1.0], [4.0]]).unwrap();
        let c = centroid(&q, &[0, 1, 2]).unwrap()[0];
        assert!((c - 5.0 / 3.0).abs() < 1e-15);
        assert!(matches!(centroid(&q, &[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn partition_rejects_bad_labels() {
        let p = PointSet::from_rows(&[[0.0], [1.0], [4.0]]).unwrap();
        assert!(matches!(
            Partition::new(&p, vec![0, 2, 2]),
            Err(Error::EmptyCluster(1))
        ));
        assert!(matches!(
            Partition::new(&p, vec![0, 1]),
            Err(Error::LengthMismatch(_))
        ));
        let part = Partition::new(&p, vec![0, 0, 1]).unwrap();
        assert_eq!(part.k(), 2);
        assert_eq!(part.center(0), &[0.5]);
    }

    #[test]
    fn mixture_counts_and_determinism() {
        let spec = MixtureSpec {
            components: vec![
                MixtureComponent {
                    center: vec![0.0, 0.0],
                    std_dev: 1.0,
                    count: 3,
                },
                MixtureComponent {
                    center: vec![5.0, 5.0],
                    std_dev: 1.0,
                    count: 2,
                },
            ],
            seed: 11,
        };
        let (p, l) = generate_mixture(&spec).unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(l.ids, vec![0, 0, 0, 1, 1]);
        let (p2, _) = generate_mixture(&spec).unwrap();
        assert_eq!(
            p.as_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            p2.as_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn zero_spread_components_are_point_masses() {
        let spec = MixtureSpec {
            components: vec![
                MixtureComponent {
                    center: vec![1.0, 2.0],
                    std_dev: 0.0,
                    count: 4,
                },
                MixtureComponent {
                    center: vec![-3.0, 0.5],
                    std_dev: 0.0,
                    count: 2,
                },
            ],
            seed: 3,
        };
        let (p, l) = generate_mixture(&spec).unwrap();
        for (row, &id) in p.rows().zip(&l.ids) {
            assert_eq!(row, spec.components[id].center.as_slice());
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = preset("ds1-like", 1).unwrap();
        spec.components[0].count = 0;
        assert!(matches!(generate_mixture(&spec), Err(Error::InvalidSpec(_))));
        let mut spec = preset("ds1-like", 1).unwrap();
        spec.components[1].std_dev = -1.0;
        assert!(matches!(generate_mixture(&spec), Err(Error::InvalidSpec(_))));
        let err = preset("nope", 1).unwrap_err().to_string();
        assert!(err.contains("ds1-like"));
    }

    #[test]
    fn ds_presets_have_expected_counts() {
        for name in ["ds1-like", "ds2-like", "ds3-like"] {
            let (p, l) = generate_mixture(&preset(name, 7).unwrap()).unwrap();
            assert_eq!(p.len(), 1450);
            assert_eq!(l.k, 4);
        }
        let (p, l) = generate_mixture(&preset("grid-a1-like", 7).unwrap()).unwrap();
        assert_eq!((p.len(), l.k), (3000, 20));
    }

    #[test]
    fn normalization() {
        let p = PointSet::from_rows(&[[0.0, 5.0], [2.0, 5.0], [4.0, 5.0]]).unwrap();
        let mm = normalize(&p, Normalization::MinMax).unwrap();
        assert_eq!(mm.row(1), &[0.5, 0.0]);
        let z = normalize(&p, Normalization::ZScore).unwrap();
        assert!((z.row(2)[0] - (2.0f64 / (8.0f64 / 3.0).sqrt())).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in proptest::collection::vec(
            proptest::collection::vec(-1e12f64..1e12, 3), 1..20)) {
            let p = PointSet::from_rows(&rows).unwrap();
            let q = parse_points(&p.to_csv()).unwrap();
            prop_assert_eq!(p, q);
        }

        #[test]
        fn centroid_translation_equivariant(
            rows in proptest::collection::vec(proptest::collection::vec(-100.0f64..100.0, 2), 1..15),
            shift in proptest::collection::vec(-1e3f64..1e3, 2),
        ) {
            let p = PointSet::from_rows(&rows).unwrap();
            let moved = p.map_points(|s, d| { d[0] = s[0] + shift[0]; d[1] = s[1] + shift[1]; }).unwrap();
            let idx: Vec<usize> = (0..p.len()).collect();
            let c = centroid(&p, &idx).unwrap();
            let cm = centroid(&moved, &idx).unwrap();
            for j in 0..2 {
                let expect = c[j] + shift[j];
                let scale = c[j].abs() + shift[j].abs() + 1.0;
                prop_assert!((cm[j] - expect).abs() <= 1e-12 * scale);
            }
        }
    }
}
