//! Deterministic reductions and Monte Carlo summaries.

use serde::Serialize;

/// Pairwise (cascade) summation. The split points depend only on the slice
/// length, so the result is reproducible regardless of how the samples were
/// produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    #[serde(serialize_with = "crate::floatfmt::ser")]
    pub mean: f64,
    #[serde(rename = "se")]
    pub std_error: f64,
    pub ci95: (f64, f64),
    pub n_paths: usize,
    #[serde(rename = "tail_bound", serialize_with = "crate::floatfmt::ser")]
    pub horizon_tail_bound: f64,
    /// Paths whose sample was -inf or +inf (e.g. zero consumption under log
    /// or negative-power utility).
    pub non_finite: usize,
}

impl McEstimate {
    /// Summarizes per-path samples. When any sample is infinite the mean is
    /// that infinity and the standard error is reported as 0.
    pub fn from_samples(samples: &[f64], horizon_tail_bound: f64) -> Self {
        let n = samples.len();
        let non_finite = samples.iter().filter(|v| !v.is_finite()).count();
        let m = mean(samples);
        let se = if non_finite > 0 || n < 2 {
            0.0
        } else {
            let dev: Vec<f64> = samples.iter().map(|v| (v - m) * (v - m)).collect();
            (pairwise_sum(&dev) / (n as f64 - 1.0) / n as f64).sqrt()
        };
        Self { mean: m, std_error: se, ci95: (m - 1.96 * se, m + 1.96 * se), n_paths: n, horizon_tail_bound, non_finite }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499500.0);
    }

    #[test]
    fn summary_of_known_sample() {
        let e = McEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0], 0.0);
        assert_eq!(e.mean, 2.5);
        // sample variance 5/3, se = sqrt(5/12)
        assert!((e.std_error - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert!((e.ci95.1 - e.mean - 1.96 * e.std_error).abs() < 1e-15);
    }

    #[test]
    fn infinite_samples_are_counted() {
        let e = McEstimate::from_samples(&[1.0, f64::NEG_INFINITY], 0.0);
        assert_eq!(e.mean, f64::NEG_INFINITY);
        assert_eq!(e.non_finite, 1);
    }
}
