//! Small numeric helpers shared across modules.

/// Standard normal cumulative distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal survival function, `1 - cdf(z)` without cancellation.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Quantile with linear interpolation between order statistics on the
/// ascending sorted sample (the convention used for robust scaling, so
/// that the q-values are bit-reproducible).
///
/// `p` in [0,1]. Panics on an empty slice.
pub fn quantile_linear(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

/// Nearest-rank percentile on the ascending sorted sample: the smallest
/// value such that at least `p` of the sample is ≤ it.
pub fn percentile_nearest_rank(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty sample");
    let n = sorted.len();
    let rank = (p.clamp(0.0, 1.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Lower median of an integer sample (ties to the smaller middle value so
/// integer-valued inputs stay integers).
pub fn median_lower(values: &mut [u32]) -> u32 {
    assert!(!values.is_empty(), "median of empty sample");
    values.sort_unstable();
    values[(values.len() - 1) / 2]
}

/// Pearson correlation; `None` when fewer than two points or either
/// variance vanishes.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// FNV-1a 64-bit hash, used for artifact digests in run manifests.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Ordinary least squares of y on x: returns (slope, intercept).
/// `None` when fewer than two points or x has no spread.
pub fn ols(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_symmetry() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959964) - 0.975).abs() < 1e-6);
        assert!((normal_sf(1.959964) - 0.025).abs() < 1e-6);
    }

    #[test]
    fn quantile_linear_matches_hand_values() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_linear(&xs, 0.5), 3.0);
        assert_eq!(quantile_linear(&xs, 0.25), 2.0);
        assert_eq!(quantile_linear(&xs, 0.75), 4.0);
        let even = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_linear(&even, 0.5), 2.5);
    }

    #[test]
    fn nearest_rank_p75() {
        let xs = [1.0, 2.0, 3.0, 100.0];
        assert_eq!(percentile_nearest_rank(&xs, 0.75), 3.0);
        assert_eq!(percentile_nearest_rank(&xs, 1.0), 100.0);
    }

    #[test]
    fn lower_median_even_count() {
        assert_eq!(median_lower(&mut [1, 4]), 1);
        assert_eq!(median_lower(&mut [1, 4, 6]), 4);
    }

    #[test]
    fn pearson_perfect_line() {
        let xs = [1.0, 2.0, 3.0];
        let ys = [2.0, 4.0, 6.0];
        assert!((pearson(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(pearson(&xs, &[1.0, 1.0, 1.0]), None);
    }

    #[test]
    fn ols_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let (slope, intercept) = ols(&xs, &ys).unwrap();
        assert!((slope - 2.0).abs() < 1e-12);
        assert!((intercept - 1.0).abs() < 1e-12);
    }
}
