//! Small Euclidean helpers shared by every index.

#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine of the angle between `a - origin` and `b - origin`.
///
/// Returns `None` when either vector has zero length.
pub fn cosine_at(origin: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    let mut ab = 0.0;
    let mut aa = 0.0;
    let mut bb = 0.0;
    for ((o, x), y) in origin.iter().zip(a).zip(b) {
        let u = x - o;
        let v = y - o;
        ab += u * v;
        aa += u * u;
        bb += v * v;
    }
    if aa == 0.0 || bb == 0.0 {
        return None;
    }
    Some(ab / (aa.sqrt() * bb.sqrt()))
}

/// Median of a nonempty slice; an even count averages the two middle values.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        assert_eq!(dist(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
        assert_eq!(dist2(&[1.0], &[4.0]), 9.0);
    }

    #[test]
    fn cosine_handles_zero_vectors() {
        assert_eq!(cosine_at(&[0.0, 0.0], &[0.0, 0.0], &[1.0, 0.0]), None);
        let c = cosine_at(&[1.0, 1.0], &[2.0, 1.0], &[1.0, 3.0]).unwrap();
        assert!(c.abs() < 1e-15);
    }

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
