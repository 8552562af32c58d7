//! Small numeric helpers: compensated summation, sample moments, and the
//! recursive mean/covariance tracker used by the adaptive sampler.

use nalgebra::{DMatrix, DVector};

/// Neumaier-compensated sum. Summation order is fixed by the slice order,
/// which keeps reductions bit-stable regardless of how the terms were
/// produced.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0_f64;
    let mut c = 0.0_f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

pub fn mean(xs: &[f64]) -> f64 {
    compensated_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance (1/(n-1) normalizer), two-pass.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|&x| (x - m) * (x - m)).collect();
    compensated_sum(&sq) / (xs.len() as f64 - 1.0)
}

/// Median; averages the middle pair for even lengths.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Lag-1 sample autocorrelation.
pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    let n = xs.len();
    let m = mean(xs);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let d = xs[i] - m;
        den += d * d;
        if i + 1 < n {
            num += d * (xs[i + 1] - m);
        }
    }
    num / den
}

/// Running multivariate mean and covariance (Welford recursion).
///
/// `covariance` uses the unbiased 1/(n-1) normalizer and matches the batch
/// empirical covariance of the pushed points.
#[derive(Debug, Clone)]
pub struct RunningMoments {
    dim: usize,
    count: u64,
    mean: DVector<f64>,
    m2: DMatrix<f64>,
}

impl RunningMoments {
    pub fn new(dim: usize) -> Self {
        RunningMoments {
            dim,
            count: 0,
            mean: DVector::zeros(dim),
            m2: DMatrix::zeros(dim, dim),
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        self.count += 1;
        let xv = DVector::from_column_slice(x);
        let delta = &xv - &self.mean;
        self.mean += &delta / self.count as f64;
        let delta2 = &xv - &self.mean;
        self.m2 += &delta * delta2.transpose();
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// None until two points have been seen.
    pub fn covariance(&self) -> Option<DMatrix<f64>> {
        if self.count < 2 {
            return None;
        }
        // Symmetrize: the recursion keeps m2 symmetric up to rounding.
        let c = &self.m2 / (self.count as f64 - 1.0);
        Some(0.5 * (&c + c.transpose()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_handles_cancellation() {
        let xs = [1e16, 1.0, -1e16];
        assert_eq!(compensated_sum(&xs), 1.0);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn running_moments_match_batch_covariance() {
        // Recursion vs batch oracle, 2-d points, 1e-10 relative.
        let pts: Vec<[f64; 2]> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.37;
                [t.sin() * 3.0 + 1.0, (t * 0.5).cos() - 2.0]
            })
            .collect();
        let mut rm = RunningMoments::new(2);
        for p in &pts {
            rm.push(p);
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
        let my = pts.iter().map(|p| p[1]).sum::<f64>() / n;
        let mut batch = [[0.0_f64; 2]; 2];
        for p in &pts {
            let dx = p[0] - mx;
            let dy = p[1] - my;
            batch[0][0] += dx * dx;
            batch[0][1] += dx * dy;
            batch[1][0] += dy * dx;
            batch[1][1] += dy * dy;
        }
        let cov = rm.covariance().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let b = batch[i][j] / (n - 1.0);
                assert!((cov[(i, j)] - b).abs() <= 1e-10 * b.abs().max(1.0));
            }
        }
    }
}
