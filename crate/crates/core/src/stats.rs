//! Batch-means error bars for correlated Monte Carlo series.

use serde::{Deserialize, Serialize};

/// Default number of contiguous batches an orbit is split into.
pub const DEFAULT_BATCHES: usize = 32;

/// Smallest batch count accepted for error estimation.
pub const MIN_BATCHES: usize = 16;

/// A Monte Carlo value with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub n_batches: u64,
}

impl EstimateWithError {
    /// A deterministic value with no statistical error.
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
            n_samples: 0,
            n_batches: 0,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            std_error: self.std_error * factor.abs(),
            ..*self
        }
    }

    /// `|self - other|` in units of the combined standard error.
    pub fn z_score(&self, other: &Self) -> f64 {
        let se = self.std_error.hypot(other.std_error);
        let diff = (self.value - other.value).abs();
        if se == 0.0 {
            if diff == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            diff / se
        }
    }
}

/// Streaming batch-means accumulator over a series of known length.
///
/// Batch `b` covers samples `[b*n/B, (b+1)*n/B)`.
#[derive(Debug, Clone)]
pub struct BatchMeans {
    n_total: u64,
    n_batches: u64,
    seen: u64,
    batch: u64,
    next_boundary: u64,
    batch_sum: f64,
    batch_means: Vec<f64>,
    total: f64,
}

impl BatchMeans {
    /// `n_batches` is clamped to `n_total` when the series is shorter.
    pub fn new(n_total: u64, n_batches: usize) -> Self {
        let n_batches = (n_batches as u64).clamp(1, n_total.max(1));
        let mut bm = Self {
            n_total,
            n_batches,
            seen: 0,
            batch: 0,
            next_boundary: 0,
            batch_sum: 0.0,
            batch_means: Vec::with_capacity(n_batches as usize),
            total: 0.0,
        };
        bm.next_boundary = bm.boundary(1);
        bm
    }

    fn boundary(&self, b: u64) -> u64 {
        ((b as u128 * self.n_total as u128) / self.n_batches as u128) as u64
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.batch_sum += x;
        self.seen += 1;
        if self.seen == self.next_boundary {
            let start = self.boundary(self.batch);
            let len = (self.seen - start) as f64;
            self.batch_means.push(self.batch_sum / len);
            self.total += self.batch_sum;
            self.batch_sum = 0.0;
            self.batch += 1;
            self.next_boundary = self.boundary(self.batch + 1);
        }
    }

    pub fn finish(self) -> EstimateWithError {
        assert_eq!(
            self.seen, self.n_total,
            "batch-means accumulator expected {} samples, got {}",
            self.n_total, self.seen
        );
        let n = self.n_total;
        if n == 0 {
            return EstimateWithError {
                value: 0.0,
                std_error: 0.0,
                n_samples: 0,
                n_batches: 0,
            };
        }
        let value = self.total / n as f64;
        let b = self.batch_means.len();
        let std_error = if b >= 2 {
            let mean = self.batch_means.iter().sum::<f64>() / b as f64;
            let var = self
                .batch_means
                .iter()
                .map(|m| (m - mean) * (m - mean))
                .sum::<f64>()
                / (b as f64 - 1.0);
            (var / b as f64).sqrt()
        } else {
            0.0
        };
        EstimateWithError {
            value,
            std_error,
            n_samples: n,
            n_batches: b as u64,
        }
    }
}

/// Batch means over a fixed set of already-computed values (e.g. replicas).
pub fn mean_with_error(values: &[f64]) -> EstimateWithError {
    let mut bm = BatchMeans::new(values.len() as u64, values.len());
    for &v in values {
        bm.push(v);
    }
    bm.finish()
}

/// Pools independent estimates of the same quantity by inverse-variance
/// weighting. Falls back to the plain mean when any error bar is zero.
pub fn pool(estimates: &[EstimateWithError]) -> EstimateWithError {
    match estimates {
        [] => EstimateWithError::exact(0.0),
        [single] => *single,
        _ => {
            let n_samples = estimates.iter().map(|e| e.n_samples).sum();
            let n_batches = estimates.iter().map(|e| e.n_batches).sum();
            if estimates.iter().all(|e| e.std_error > 0.0) {
                let (mut wsum, mut vsum) = (0.0, 0.0);
                for e in estimates {
                    let w = 1.0 / (e.std_error * e.std_error);
                    wsum += w;
                    vsum += w * e.value;
                }
                EstimateWithError {
                    value: vsum / wsum,
                    std_error: wsum.recip().sqrt(),
                    n_samples,
                    n_batches,
                }
            } else {
                let r = estimates.len() as f64;
                let value = estimates.iter().map(|e| e.value).sum::<f64>() / r;
                let var: f64 = estimates.iter().map(|e| e.std_error * e.std_error).sum();
                EstimateWithError {
                    value,
                    std_error: var.sqrt() / r,
                    n_samples,
                    n_batches,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_has_zero_error() {
        let mut bm = BatchMeans::new(1000, 32);
        for _ in 0..1000 {
            bm.push(2.5);
        }
        let e = bm.finish();
        assert_eq!(e.value, 2.5);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.n_batches, 32);
        assert_eq!(e.n_samples, 1000);
    }

    #[test]
    fn batch_means_of_alternating_series() {
        // Batches of even length see the same mean; odd lengths differ.
        let mut bm = BatchMeans::new(64, 16);
        for i in 0..64 {
            bm.push(if i % 2 == 0 { 1.0 } else { -1.0 });
        }
        let e = bm.finish();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn error_matches_textbook_formula() {
        let xs: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let e = mean_with_error(&xs);
        // sample sd of 0..15 is sqrt(22.666..)
        let expected = (16.0f64 * 17.0 / 12.0).sqrt() / 4.0;
        assert!((e.value - 7.5).abs() < 1e-15);
        assert!((e.std_error - expected).abs() < 1e-12);
    }

    #[test]
    fn pooling_weights_by_inverse_variance() {
        let a = EstimateWithError { value: 1.0, std_error: 1.0, n_samples: 10, n_batches: 16 };
        let b = EstimateWithError { value: 2.0, std_error: 0.5, n_samples: 10, n_batches: 16 };
        let p = pool(&[a, b]);
        assert!((p.value - 1.8).abs() < 1e-12);
        assert!((p.std_error - (0.8f64).sqrt() / 2.0).abs() < 1e-12);
        let z = pool(&[EstimateWithError::exact(0.0), EstimateWithError::exact(0.0)]);
        assert_eq!(z.value, 0.0);
        assert_eq!(z.std_error, 0.0);
    }
}
