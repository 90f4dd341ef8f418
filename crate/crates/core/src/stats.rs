//! Sample summaries and least-squares fits.

use serde::{Deserialize, Serialize};

/// Mean, unbiased variance and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub standard_error: f64,
}

impl Summary {
    /// Two-pass summary; variance and SE are NaN below two samples.
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        let n = count as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = if count > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            f64::NAN
        };
        Self {
            count,
            mean,
            variance,
            standard_error: (variance / n).sqrt(),
        }
    }

    /// Whether `target` lies within `k` standard errors of the mean.
    pub fn within_se(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.standard_error
    }

    /// `|mean/target − 1|`.
    pub fn relative_error(&self, target: f64) -> f64 {
        (self.mean / target - 1.0).abs()
    }
}

/// Running sums for chunked Monte Carlo, merged in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn summary(&self) -> Summary {
        let n = self.count as f64;
        let mean = self.sum / n;
        let variance = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        Summary {
            count: self.count as usize,
            mean,
            variance,
            standard_error: (variance / n).sqrt(),
        }
    }
}

/// Ordinary least-squares line `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_standard_error: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_standard_error = if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Some(LineFit {
        slope,
        intercept,
        slope_standard_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_basics() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!(s.within_se(2.5, 0.0));
    }

    #[test]
    fn accumulator_matches_summary() {
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut a = Accumulator::default();
        let mut b = Accumulator::default();
        xs[..20].iter().for_each(|&x| a.push(x));
        xs[20..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        let direct = Summary::of(&xs);
        let merged = a.summary();
        assert!((direct.mean - merged.mean).abs() < 1e-15);
        assert!((direct.variance - merged.variance).abs() < 1e-12);
    }

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-15 && (f.intercept - 2.0).abs() < 1e-15);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }
}
