//! Small statistical helpers shared by the pipeline and its tests.

use crate::scalar::Scalar;

/// Sum by pairwise (tree) reduction. Error grows like O(log n) instead of
/// O(n), and the result is far less sensitive to input order than a left fold.
pub fn pairwise_sum<F: Scalar>(xs: &[F]) -> F {
    if xs.len() <= 32 {
        let mut acc = F::zero();
        for &x in xs {
            acc = acc + x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Arithmetic mean; zero for an empty slice.
pub fn mean<F: Scalar>(xs: &[F]) -> F {
    if xs.is_empty() {
        return F::zero();
    }
    pairwise_sum(xs) / F::from_usize(xs.len()).unwrap()
}

/// Sample standard deviation (n-1 denominator); zero when n < 2.
pub fn sample_std<F: Scalar>(xs: &[F]) -> F {
    let n = xs.len();
    if n < 2 {
        return F::zero();
    }
    let m = mean(xs);
    let sq: Vec<F> = xs.iter().map(|&x| (x - m) * (x - m)).collect();
    (pairwise_sum(&sq) / F::from_usize(n - 1).unwrap()).sqrt()
}

/// Kolmogorov-Smirnov statistic of a sample against a reference CDF.
pub fn ks_statistic<F: Scalar>(samples: &[F], cdf: impl Fn(F) -> F) -> F {
    assert!(!samples.is_empty(), "ks_statistic needs samples");
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = F::from_usize(xs.len()).unwrap();
    let mut d = F::zero();
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let lo = F::from_usize(i).unwrap() / n;
        let hi = F::from_usize(i + 1).unwrap() / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (1..=100).map(|i| i as f64 / 7.0).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }

    #[test]
    fn sample_std_two_points() {
        // {0.4, 0.6}: deviations ±0.1, n-1 = 1 → std = sqrt(0.02)
        let s = sample_std(&[0.4f64, 0.6]);
        assert!((s - 0.02f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ks_of_exact_grid_is_small() {
        // Points at (i+0.5)/n have KS = 1/(2n) against U(0,1).
        let n = 100;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x);
        assert!((d - 0.005).abs() < 1e-12);
    }
}
