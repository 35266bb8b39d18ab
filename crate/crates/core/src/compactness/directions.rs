use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::PointSet;
use crate::error::{Error, Result};
use crate::geometry::{dot, norm};

// The published four-digit threshold, deliberately not the exact 1/sqrt(2).
#[allow(clippy::approx_constant)]
pub const DEFAULT_ETA: f64 = 0.7071;

/// Unit probe directions forming a positive spanning set, plus the cosine threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    dirs: Vec<Vec<f64>>,
    eta: f64,
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eta must lie in (0, 1], got {eta}")))
    }
}

impl DirectionSet {
    /// The coordinate set `{+e_1, ..., +e_n, -e_1, ..., -e_n}`.
    pub fn axes(n: usize, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        if n == 0 {
            return Err(Error::InvalidDirections("dimension must be positive".into()));
        }
        let mut dirs = Vec::with_capacity(2 * n);
        for sign in [1.0, -1.0] {
            for i in 0..n {
                let mut u = vec![0.0; n];
                u[i] = sign;
                dirs.push(u);
            }
        }
        Ok(Self { dirs, eta })
    }

    /// Validates user-supplied directions.
    ///
    /// Vectors must have unit norm to within 1e-6 and are renormalized exactly.
    /// The set must contain more than `n` vectors and positively span space,
    /// checked by probing seeded random directions: every probe must have a
    /// strictly positive inner product with some member.
    pub fn from_vectors(vectors: Vec<Vec<f64>>, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        let n = vectors
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidDirections("no directions given".into()))?;
        if n == 0 {
            return Err(Error::InvalidDirections("zero-length vector".into()));
        }
        if vectors.len() <= n {
            return Err(Error::InvalidDirections(format!(
                "{} directions cannot positively span {n}-dimensional space (need more than {n})",
                vectors.len()
            )));
        }
        let mut dirs = Vec::with_capacity(vectors.len());
        for (i, v) in vectors.into_iter().enumerate() {
            if v.len() != n {
                return Err(Error::InvalidDirections(format!(
                    "direction {} has {} components, expected {n}",
                    i + 1,
                    v.len()
                )));
            }
            let len = norm(&v);
            if !len.is_finite() || (len - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidDirections(format!(
                    "direction {} has norm {len}, expected 1",
                    i + 1
                )));
            }
            dirs.push(v.iter().map(|x| x / len).collect());
        }
        let set = Self { dirs, eta };
        set.check_spanning()?;
        Ok(set)
    }

    fn check_spanning(&self) -> Result<()> {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut probes: Vec<Vec<f64>> = Vec::new();
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = s;
                probes.push(e);
            }
        }
        for _ in 0..2000 {
            probes.push((0..n).map(|_| StandardNormal.sample(&mut rng)).collect());
        }
        for probe in &probes {
            let best = self
                .dirs
                .iter()
                .map(|u| dot(u, probe))
                .fold(f64::NEG_INFINITY, f64::max);
            if best <= 1e-12 * norm(probe) {
                return Err(Error::InvalidDirections(format!(
                    "not a positive spanning set: no direction points toward probe {probe:?}"
                )));
            }
        }
        Ok(())
    }

    /// Parses one direction per line, comma-separated components.
    pub fn parse(text: &str, eta: f64) -> Result<Self> {
        let mut vectors = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v = line
                .split(',')
                .enumerate()
                .map(|(col, f)| {
                    f.trim().parse::<f64>().map_err(|_| Error::Parse {
                        row: idx + 1,
                        column: col + 1,
                        message: format!("not a number: {:?}", f.trim()),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            vectors.push(v);
        }
        Self::from_vectors(vectors, eta)
    }

    pub fn load(path: impl AsRef<std::path::Path>, eta: f64) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, eta)
    }

    pub fn dim(&self) -> usize {
        self.dirs[0].len()
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.dirs
    }
}

/// Fraction of directions within the `eta` cosine cone of some shell point, seen from `center`.
///
/// Points coinciding with the center are ignored. Returns 0 for an empty shell.
pub fn direction_coverage(
    points: &PointSet,
    shell: &[usize],
    center: &[f64],
    dirs: &DirectionSet,
) -> f64 {
    let n = center.len();
    let mut best = vec![f64::NEG_INFINITY; dirs.len()];
    let mut offset = vec![0.0; n];
    for &i in shell {
        for ((o, a), c) in offset.iter_mut().zip(points.row(i)).zip(center) {
            *o = a - c;
        }
        let len = norm(&offset);
        if len == 0.0 {
            continue;
        }
        for (b, u) in best.iter_mut().zip(&dirs.dirs) {
            let cos = dot(&offset, u) / len;
            if cos > *b {
                *b = cos;
            }
        }
    }
    let covered = best.iter().filter(|&&b| b >= dirs.eta).count();
    covered as f64 / dirs.len() as f64
}
