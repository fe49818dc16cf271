/// Least-squares slope of `y` against `t`; `None` for fewer than two
/// distinct abscissae.
pub(crate) fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, y) in points {
        sxy += (t - mt) * (y - my);
        sxx += (t - mt) * (t - mt);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Positions where `a` crosses `level` upwards, left to right, each found
/// by linear interpolation between neighbouring samples.
pub(crate) fn upward_crossings(x: &[f64], a: &[f64], level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..a.len().saturating_sub(1) {
        if a[i] < level && a[i + 1] >= level {
            let w = (level - a[i]) / (a[i + 1] - a[i]);
            out.push(x[i] + w * (x[i + 1] - x[i]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<_> = (0..10).map(|i| (i as f64, 3.0 - 2.0 * i as f64)).collect();
        assert!((slope(&pts).unwrap() + 2.0).abs() < 1e-14);
        assert!(slope(&[(1.0, 2.0)]).is_none());
        assert!(slope(&[(1.0, 2.0), (1.0, 3.0)]).is_none());
    }

    #[test]
    fn crossing_interpolates() {
        let c = upward_crossings(&[0.0, 1.0, 2.0], &[0.0, 0.1, 0.5], 0.3);
        assert_eq!(c.len(), 1);
        assert!((c[0] - 1.5).abs() < 1e-14);
    }
}
